//! Sampled functions on a truncated uniform coordinate box, extended by zero outside.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{MultiIndex, StratifiedGroup, StructureFile};

/// Interpolation fractions this close to an integer are treated as exact grid hits.
pub(crate) const SNAP: f64 = 1e-9;

/// A uniform box grid `[-w_i, w_i]` with an odd number of nodes per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    group: StratifiedGroup,
    half_widths: Vec<f64>,
    points: Vec<usize>,
    spacing: Vec<f64>,
    strides: Vec<usize>,
    len: usize,
}

/// Serialized form of a [`GridSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpecFile {
    pub group: StructureFile,
    pub half_widths: Vec<f64>,
    pub points_per_axis: Vec<usize>,
}

impl GridSpec {
    pub fn new(group: StratifiedGroup, half_widths: Vec<f64>, points: Vec<usize>) -> Result<Self> {
        let n = group.dim();
        if half_widths.len() != n || points.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: if half_widths.len() != n {
                    half_widths.len()
                } else {
                    points.len()
                },
            });
        }
        for (axis, (&w, &p)) in half_widths.iter().zip(&points).enumerate() {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidGrid(format!(
                    "half width of axis {axis} must be positive, got {w}"
                )));
            }
            if p < 3 || p % 2 == 0 {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis} needs an odd number of points >= 3, got {p}"
                )));
            }
        }
        let spacing: Vec<f64> = half_widths
            .iter()
            .zip(&points)
            .map(|(&w, &p)| 2.0 * w / (p - 1) as f64)
            .collect();
        let mut strides = vec![1; n];
        for a in (0..n.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * points[a + 1];
        }
        let len = points.iter().product();
        Ok(GridSpec {
            group,
            half_widths,
            points,
            spacing,
            strides,
            len,
        })
    }

    pub fn from_file(file: &GridSpecFile) -> Result<Self> {
        let g = StratifiedGroup::from_structure(&file.group)?;
        Self::new(g, file.half_widths.clone(), file.points_per_axis.clone())
    }

    pub fn to_file(&self) -> GridSpecFile {
        GridSpecFile {
            group: self.group.to_structure(),
            half_widths: self.half_widths.clone(),
            points_per_axis: self.points.clone(),
        }
    }

    /// The same box with every axis refined by a factor 2 (N ↦ 2N − 1).
    pub fn refined(&self) -> Result<Self> {
        Self::new(
            self.group.clone(),
            self.half_widths.clone(),
            self.points.iter().map(|&p| 2 * p - 1).collect(),
        )
    }

    pub fn group(&self) -> &StratifiedGroup {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn half_widths(&self) -> &[f64] {
        &self.half_widths
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn origin_index(&self) -> usize {
        self.points
            .iter()
            .zip(&self.strides)
            .map(|(&p, &s)| (p - 1) / 2 * s)
            .sum()
    }

    /// Coordinate of node `i` along `axis`.
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        let c = ((self.points[axis] - 1) / 2) as f64;
        (i as f64 - c) * self.spacing[axis]
    }

    pub fn axis_coords(&self, axis: usize) -> Vec<f64> {
        (0..self.points[axis]).map(|i| self.coord(axis, i)).collect()
    }

    pub fn unflatten(&self, mut flat: usize, out: &mut [usize]) {
        for a in (0..self.dim()).rev() {
            out[a] = flat % self.points[a];
            flat /= self.points[a];
        }
    }

    pub fn node_into(&self, flat: usize, out: &mut [f64]) {
        let mut f = flat;
        for a in (0..self.dim()).rev() {
            out[a] = self.coord(a, f % self.points[a]);
            f /= self.points[a];
        }
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.node_into(flat, &mut x);
        x
    }

    /// Homogeneous diameter of the box, |(2w_1, …, 2w_n)|.
    pub fn diameter(&self) -> f64 {
        let full: Vec<f64> = self.half_widths.iter().map(|w| 2.0 * w).collect();
        self.group.hom_norm(&full)
    }

    /// Homogeneous norm of every node.
    pub fn node_norms(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        (0..self.len)
            .map(|i| {
                self.node_into(i, &mut x);
                self.group.hom_norm(&x)
            })
            .collect()
    }

    /// Multilinear interpolation stencil for the point `x`: up to 2^n (flat index,
    /// weight) pairs. The samples are extended by zero, so points within one cell of the
    /// box still pick up the boundary nodes.
    pub(crate) fn stencil(&self, x: &[f64], out: &mut Vec<(usize, f64)>) {
        out.clear();
        let n = self.dim();
        debug_assert!(n <= 8);
        let mut lo = [(0usize, 0.0f64, false); 8];
        let mut hi = [(0usize, 0.0f64, false); 8];
        for a in 0..n {
            let p = (x[a] + self.half_widths[a]) / self.spacing[a];
            let last = (self.points[a] - 1) as i64;
            let mut i0 = p.floor();
            let mut t = p - i0;
            if t > 1.0 - SNAP {
                i0 += 1.0;
                t = 0.0;
            } else if t < SNAP {
                t = 0.0;
            }
            if !(i0 >= -1.0 && i0 <= last as f64) {
                return;
            }
            let i0 = i0 as i64;
            let l_ok = i0 >= 0 && t < 1.0;
            let h_ok = t > 0.0 && i0 < last;
            if !l_ok && !h_ok {
                return;
            }
            lo[a] = (if l_ok { i0 as usize } else { 0 }, 1.0 - t, l_ok);
            hi[a] = (if h_ok { (i0 + 1) as usize } else { 0 }, t, h_ok);
        }
        out.push((0, 1.0));
        for a in 0..n {
            let m = out.len();
            let s = self.strides[a];
            match (lo[a].2, hi[a].2) {
                (true, false) => out.iter_mut().for_each(|(i, w)| {
                    *i += lo[a].0 * s;
                    *w *= lo[a].1;
                }),
                (false, true) => out.iter_mut().for_each(|(i, w)| {
                    *i += hi[a].0 * s;
                    *w *= hi[a].1;
                }),
                _ => {
                    for q in 0..m {
                        let (idx, w) = out[q];
                        out[q] = (idx + lo[a].0 * s, w * lo[a].1);
                        out.push((idx + hi[a].0 * s, w * hi[a].1));
                    }
                }
            }
        }
    }
}

/// Complex samples on a [`GridSpec`], row-major with the last axis fastest.
#[derive(Clone, Debug)]
pub struct GridFunction {
    spec: Arc<GridSpec>,
    values: Vec<Complex64>,
}

impl PartialEq for GridFunction {
    fn eq(&self, other: &Self) -> bool {
        same_spec(&self.spec, &other.spec) && self.values == other.values
    }
}

pub(crate) fn same_spec(a: &Arc<GridSpec>, b: &Arc<GridSpec>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// An Lᵖ exponent in [1, ∞].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponent(f64);

impl Exponent {
    pub const ONE: Exponent = Exponent(1.0);
    pub const TWO: Exponent = Exponent(2.0);
    pub const INF: Exponent = Exponent(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p >= 1.0 {
            Ok(Exponent(p))
        } else {
            Err(Error::InvalidExponent(p))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// 1/p, zero for p = ∞.
    pub fn reciprocal(self) -> f64 {
        if self.is_infinite() {
            0.0
        } else {
            1.0 / self.0
        }
    }
}

impl std::fmt::Display for Exponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl std::str::FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::INF),
            t => t
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("not an exponent: {s:?}")))
                .and_then(Exponent::new),
        }
    }
}

/// Serialized as a number, or the string `"inf"`.
impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let e = match Raw::deserialize(d)? {
            Raw::Num(p) => Exponent::new(p),
            Raw::Text(t) => t.parse(),
        };
        e.map_err(serde::de::Error::custom)
    }
}

impl GridFunction {
    pub fn new(spec: Arc<GridSpec>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::DimensionMismatch {
                expected: spec.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(GridFunction { spec, values })
    }

    /// Construction without the finiteness scan, for values produced by finite arithmetic.
    pub(crate) fn from_parts(spec: Arc<GridSpec>, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), spec.len());
        GridFunction { spec, values }
    }

    pub fn zeros(spec: Arc<GridSpec>) -> Self {
        let n = spec.len();
        GridFunction::from_parts(spec, vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn from_real(spec: Arc<GridSpec>, values: Vec<f64>) -> Result<Self> {
        Self::new(spec, values.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
    }

    /// values[idx] = f(node(idx)).
    pub fn sample<F>(spec: Arc<GridSpec>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let values: Vec<Complex64> = (0..spec.len())
            .into_par_iter()
            .map_init(
                || vec![0.0; spec.dim()],
                |x, i| {
                    spec.node_into(i, x);
                    f(x)
                },
            )
            .collect();
        Self::new(spec, values)
    }

    pub fn sample_real<F>(spec: Arc<GridSpec>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        Self::sample(spec, |x| Complex64::new(f(x), 0.0))
    }

    /// The discrete delta: 1/vol at the origin node.
    pub fn delta(spec: Arc<GridSpec>) -> Self {
        let mut d = Self::zeros(spec);
        let o = d.spec.origin_index();
        d.values[o] = Complex64::new(1.0 / d.spec.cell_volume(), 0.0);
        d
    }

    pub fn spec(&self) -> &Arc<GridSpec> {
        &self.spec
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn value_at_origin(&self) -> Complex64 {
        self.values[self.spec.origin_index()]
    }

    fn check_spec(&self, other: &GridFunction) -> Result<()> {
        if same_spec(&self.spec, &other.spec) {
            Ok(())
        } else {
            Err(Error::SpecMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        GridFunction::from_parts(self.spec.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    /// self + s·other.
    pub fn axpy(&self, s: f64, other: &GridFunction) -> Result<Self> {
        self.check_spec(other)?;
        Ok(GridFunction::from_parts(
            self.spec.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b * s)
                .collect(),
        ))
    }

    pub fn add_assign_scaled(&mut self, s: f64, other: &GridFunction) -> Result<()> {
        self.check_spec(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b * s;
        }
        Ok(())
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    /// f̃(x) = f(x⁻¹); on a symmetric odd grid this reverses every axis.
    pub fn involution(&self) -> Self {
        let mut v = self.values.clone();
        v.reverse();
        GridFunction::from_parts(self.spec.clone(), v)
    }

    /// f^*(x) = conj(f(x⁻¹)).
    pub fn star(&self) -> Self {
        GridFunction::from_parts(
            self.spec.clone(),
            self.values.iter().rev().map(|v| v.conj()).collect(),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn lp_norm(&self, p: Exponent) -> f64 {
        let vol = self.spec.cell_volume();
        match p.value() {
            v if v.is_infinite() => self.max_abs(),
            1.0 => vol * reflected_sum(&self.values, |z| z.norm()),
            2.0 => (vol * reflected_sum(&self.values, |z| z.norm_sqr())).sqrt(),
            v => (vol * reflected_sum(&self.values, |z| z.norm().powf(v))).powf(1.0 / v),
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.lp_norm(Exponent::TWO)
    }

    /// ‖self − other‖₂ / ‖other‖₂.
    pub fn relative_l2_error(&self, reference: &GridFunction) -> Result<f64> {
        Ok(self.sub(reference)?.l2_norm() / reference.l2_norm())
    }

    /// vol·Σ f.
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.spec.cell_volume()
    }

    /// Grid inner product vol·Σ f·conj(g).
    pub fn inner(&self, other: &GridFunction) -> Result<Complex64> {
        self.check_spec(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum::<Complex64>()
            * self.spec.cell_volume())
    }

    /// vol·Σ f(x)·x^I.
    pub fn moment(&self, idx: &MultiIndex) -> Result<Complex64> {
        self.moments(std::slice::from_ref(idx)).map(|m| m[0])
    }

    /// Several moments in one pass.
    pub fn moments(&self, idxs: &[MultiIndex]) -> Result<Vec<Complex64>> {
        let spec = &self.spec;
        let n = spec.dim();
        for idx in idxs {
            if idx.0.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: idx.0.len(),
                });
            }
        }
        // per-axis power tables
        let max_e: Vec<u32> = (0..n)
            .map(|a| idxs.iter().map(|m| m.0[a]).max().unwrap_or(0))
            .collect();
        let tables: Vec<Vec<Vec<f64>>> = (0..n)
            .map(|a| {
                spec.axis_coords(a)
                    .iter()
                    .map(|&c| (0..=max_e[a]).map(|e| c.powi(e as i32)).collect())
                    .collect()
            })
            .collect();
        let mut acc = vec![Complex64::new(0.0, 0.0); idxs.len()];
        let mut ix = vec![0usize; n];
        for (flat, v) in self.values.iter().enumerate() {
            if v.re == 0.0 && v.im == 0.0 {
                continue;
            }
            spec.unflatten(flat, &mut ix);
            for (m, a) in idxs.iter().zip(acc.iter_mut()) {
                let w: f64 = (0..n).map(|ax| tables[ax][ix[ax]][m.0[ax] as usize]).product();
                *a += v * w;
            }
        }
        let vol = spec.cell_volume();
        Ok(acc.into_iter().map(|a| a * vol).collect())
    }

    /// Largest N ≤ n_max with |moment(I)| ≤ tol·‖f‖₁·diam^{d(I)} for all d(I) ≤ N − 1.
    pub fn vanishing_moment_order(&self, n_max: u32, tol: f64) -> Result<u32> {
        Ok(self.moment_report(n_max, tol)?.order)
    }

    /// Normalized moments through degree `n_max − 1` and the resulting vanishing order.
    pub fn moment_report(&self, n_max: u32, tol: f64) -> Result<MomentReport> {
        if !(tol > 0.0) {
            return Err(Error::Config(format!("moment tolerance must be positive, got {tol}")));
        }
        let g = self.spec.group();
        let l1 = self.lp_norm(Exponent::ONE);
        let diam = self.spec.diameter();
        let basis = if n_max == 0 {
            Vec::new()
        } else {
            g.poly_basis(n_max as i64 - 1)?
        };
        let raw = self.moments(&basis)?;
        let mut entries = Vec::with_capacity(basis.len());
        for (idx, m) in basis.into_iter().zip(raw) {
            let d = g.hom_degree(&idx)?;
            let scale = l1 * diam.powi(d as i32);
            let relative = if scale > 0.0 { m.norm() / scale } else { 0.0 };
            entries.push(MomentEntry {
                index: idx,
                degree: d,
                value: m,
                relative,
            });
        }
        let mut order = 0;
        for d in 0..n_max {
            if entries
                .iter()
                .filter(|e| e.degree == d)
                .all(|e| e.relative <= tol)
            {
                order = d + 1;
            } else {
                break;
            }
        }
        Ok(MomentReport { entries, order })
    }

    /// Multilinear interpolation at an arbitrary point, zero outside the box.
    pub fn interpolate(&self, x: &[f64]) -> Complex64 {
        let mut st = Vec::with_capacity(1 << self.spec.dim());
        self.spec.stencil(x, &mut st);
        st.iter().map(|&(i, w)| self.values[i] * w).sum()
    }

    /// (D_t f)(x) = t^Q f(δ_t x).
    pub fn dilate(&self, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidDilation(t));
        }
        if t == 1.0 {
            return Ok(self.clone());
        }
        let spec = &self.spec;
        let g = spec.group();
        let factors: Vec<f64> = g.layers().iter().map(|&n| t.powi(n as i32)).collect();
        let tq = t.powi(g.homogeneous_dim() as i32);
        let values: Vec<Complex64> = (0..spec.len())
            .into_par_iter()
            .map_init(
                || (vec![0.0; spec.dim()], Vec::new()),
                |(x, st), i| {
                    spec.node_into(i, x);
                    for (v, f) in x.iter_mut().zip(&factors) {
                        *v *= f;
                    }
                    spec.stencil(x, st);
                    st.iter().map(|&(j, w)| self.values[j] * w).sum::<Complex64>() * tq
                },
            )
            .collect();
        Ok(GridFunction::from_parts(spec.clone(), values))
    }

    /// Resamples onto another grid over the same group by multilinear interpolation.
    pub fn resample(&self, target: Arc<GridSpec>) -> Result<Self> {
        if target.group() != self.spec.group() {
            return Err(Error::SpecMismatch);
        }
        let values: Vec<Complex64> = (0..target.len())
            .into_par_iter()
            .map_init(
                || (vec![0.0; target.dim()], Vec::new()),
                |(x, st), i| {
                    target.node_into(i, x);
                    self.spec.stencil(x, st);
                    st.iter().map(|&(j, w)| self.values[j] * w).sum::<Complex64>()
                },
            )
            .collect();
        Ok(GridFunction::from_parts(target, values))
    }

    /// Group convolution (f∗g)(x) = ∫ f(y) g(y⁻¹x) dy by Riemann-sum quadrature.
    pub fn convolve(&self, other: &GridFunction) -> Result<Self> {
        self.check_spec(other)?;
        crate::convolution::convolve(self, other)
    }

    /// The O(M²) quadrature with full multilinear interpolation, for any group.
    pub fn convolve_direct(&self, other: &GridFunction) -> Result<Self> {
        self.check_spec(other)?;
        Ok(crate::convolution::convolve_direct(self, other))
    }

    /// Maximum of |f| over nodes with homogeneous norm at most `radius`.
    pub fn max_abs_within(&self, radius: f64) -> f64 {
        let spec = &self.spec;
        let mut x = vec![0.0; spec.dim()];
        let mut m: f64 = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            spec.node_into(i, &mut x);
            if spec.group().hom_norm(&x) <= radius {
                m = m.max(v.norm());
            }
        }
        m
    }
}

/// Σ f(v_i) accumulated over mirrored pairs (v_i, v_{M−1−i}), so that reversing the
/// array (the involution) leaves the result bit-for-bit unchanged.
fn reflected_sum(v: &[Complex64], f: impl Fn(&Complex64) -> f64) -> f64 {
    let m = v.len();
    let mut s = 0.0;
    for i in 0..m / 2 {
        s += f(&v[i]) + f(&v[m - 1 - i]);
    }
    if m % 2 == 1 {
        s += f(&v[m / 2]);
    }
    s
}

#[derive(Clone, Debug)]
pub struct MomentEntry {
    pub index: MultiIndex,
    pub degree: u32,
    pub value: Complex64,
    /// |moment| / (‖f‖₁·diam^{d(I)}).
    pub relative: f64,
}

#[derive(Clone, Debug)]
pub struct MomentReport {
    pub entries: Vec<MomentEntry>,
    pub order: u32,
}

impl MomentReport {
    /// Worst normalized moment among degrees below `n`.
    pub fn worst_below(&self, n: u32) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.degree < n)
            .map(|e| e.relative)
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r1(n: usize, w: f64) -> Arc<GridSpec> {
        Arc::new(GridSpec::new(StratifiedGroup::abelian(1), vec![w], vec![n]).unwrap())
    }

    #[test]
    fn spec_validation() {
        let g = StratifiedGroup::abelian(1);
        assert!(GridSpec::new(g.clone(), vec![1.0], vec![4]).is_err());
        assert!(GridSpec::new(g.clone(), vec![0.0], vec![5]).is_err());
        assert!(GridSpec::new(g, vec![1.0, 1.0], vec![5, 5]).is_err());
        let s = r1(5, 1.0);
        assert_eq!(s.spacing(), &[0.5]);
        assert_eq!(s.node(s.origin_index()), vec![0.0]);
    }

    #[test]
    fn sample_examples() {
        let s = r1(9, 2.0);
        let one = GridFunction::sample_real(s.clone(), |_| 1.0).unwrap();
        assert!(one.values().iter().all(|v| *v == Complex64::new(1.0, 0.0)));
        let gauss = GridFunction::sample_real(s.clone(), |x| (-x[0] * x[0]).exp()).unwrap();
        assert_eq!(gauss.value_at_origin().re, 1.0);
        let odd = GridFunction::sample_real(s.clone(), |x| x[0].powi(3)).unwrap();
        let v = odd.real_parts();
        for i in 0..9 {
            assert_eq!(v[i], -v[8 - i]);
        }
        assert!(matches!(
            GridFunction::sample_real(s, |_| f64::NAN),
            Err(Error::NonFinite(0))
        ));
    }

    #[test]
    fn star_and_norm_examples() {
        let h = Arc::new(
            GridSpec::new(StratifiedGroup::heisenberg(), vec![1.0, 1.0, 2.0], vec![5, 5, 7])
                .unwrap(),
        );
        let f = GridFunction::sample(h.clone(), |x| {
            Complex64::new(x[0] + 0.3 * x[2], x[1] * x[0] - 0.2)
        })
        .unwrap();
        assert_eq!(f.star().star(), f);
        for p in [Exponent::ONE, Exponent::TWO, Exponent::new(3.5).unwrap(), Exponent::INF] {
            assert_eq!(f.star().lp_norm(p), f.lp_norm(p));
        }
        let even = GridFunction::sample_real(h.clone(), |x| (-x[0] * x[0] - x[2] * x[2]).exp())
            .unwrap();
        assert_eq!(even.star(), even);
        // star really is f(x⁻¹) = f(−x)
        let s = f.star();
        for i in 0..h.len() {
            let x = h.node(i);
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            let want = f.interpolate(&neg).conj();
            assert!((s.values()[i] - want).norm() < 1e-12);
        }
        assert!(Exponent::new(0.5).is_err());
    }

    #[test]
    fn lp_norm_examples() {
        let s = r1(11, 1.0);
        let one = GridFunction::sample_real(s.clone(), |_| 1.0).unwrap();
        // Riemann sum over 11 nodes of spacing 0.2
        assert!((one.lp_norm(Exponent::ONE) - 11.0 * 0.2).abs() < 1e-12);
        assert_eq!(GridFunction::zeros(s).lp_norm(Exponent::TWO), 0.0);
    }

    #[test]
    fn stencil_weights_sum_to_one() {
        let h = GridSpec::new(StratifiedGroup::heisenberg(), vec![1.0, 1.0, 2.0], vec![5, 5, 7])
            .unwrap();
        let mut st = Vec::new();
        h.stencil(&[0.13, -0.77, 1.9], &mut st);
        assert_eq!(st.len(), 8);
        assert!((st.iter().map(|s| s.1).sum::<f64>() - 1.0).abs() < 1e-14);
        h.stencil(&[0.5, 0.0, 0.0], &mut st);
        assert_eq!(st.len(), 1);
        h.stencil(&[1.6, 0.0, 0.0], &mut st);
        assert!(st.is_empty());
        // half a cell beyond the edge: half the boundary value, zero beyond
        h.stencil(&[1.25, 1.0, 2.0], &mut st);
        assert_eq!(st, vec![(h.len() - 1, 0.5)]);
        h.stencil(&[1.0, 1.0, 2.0], &mut st);
        assert_eq!(st, vec![(h.len() - 1, 1.0)]);
    }

    #[test]
    fn dilate_identity_and_errors() {
        let s = r1(21, 2.0);
        let f = GridFunction::sample_real(s, |x| (-x[0] * x[0]).exp()).unwrap();
        assert_eq!(f.dilate(1.0).unwrap(), f);
        assert!(f.dilate(0.0).is_err());
        assert!(f.dilate(-2.0).is_err());
    }

    #[test]
    fn moment_order_examples() {
        let s = r1(2049, 16.0);
        let gauss = GridFunction::sample_real(s.clone(), |x| (-x[0] * x[0]).exp()).unwrap();
        assert!(gauss.moment(&MultiIndex(vec![1])).unwrap().norm() < 1e-12);
        assert_eq!(gauss.vanishing_moment_order(4, 1e-8).unwrap(), 0);
        let d1 = GridFunction::sample_real(s.clone(), |x| -2.0 * x[0] * (-x[0] * x[0]).exp())
            .unwrap();
        assert_eq!(d1.vanishing_moment_order(4, 1e-8).unwrap(), 1);
        let hat = GridFunction::sample_real(s, |x| (1.0 - x[0] * x[0]) * (-x[0] * x[0] / 2.0).exp())
            .unwrap();
        assert!(hat.moment(&MultiIndex(vec![0])).unwrap().norm() < 1e-8);
        assert_eq!(hat.vanishing_moment_order(4, 1e-8).unwrap(), 2);
    }
}
