//! Coordinate arithmetic on simply connected stratified Lie groups of step at most 3.
//!
//! Points are written in exponential coordinates, so the group and its Lie algebra
//! coincide as sets and the product is given by the (finite) Baker-Campbell-Hausdorff
//! series.

use std::cmp::Reverse;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Deref, DerefMut};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_STEP: usize = 3;

/// Absolute tolerance used when checking the Jacobi identity and antisymmetry.
const STRUCTURE_TOL: f64 = 1e-12;

/// A point of the group in exponential coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupPoint(pub Vec<f64>);

impl GroupPoint {
    pub fn zero(dim: usize) -> Self {
        GroupPoint(vec![0.0; dim])
    }

    /// The group inverse, which in exponential coordinates is negation.
    pub fn inverse(&self) -> Self {
        GroupPoint(self.0.iter().map(|v| -v).collect())
    }
}

impl Deref for GroupPoint {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for GroupPoint {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for GroupPoint {
    fn from(v: Vec<f64>) -> Self {
        GroupPoint(v)
    }
}

/// Exponent vector of a monomial `x^I`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Evaluates the monomial `x^I`.
    pub fn monomial(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .filter(|(e, _)| **e > 0)
            .map(|(&e, &v)| v.powi(e as i32))
            .product()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (n, e) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// On-disk description of a group: 1-based bracket entries `[i, j, k, c]` meaning
/// `[Y_i, Y_j] = c Y_k`. Entries for `(j, i)` are implied by antisymmetry when absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dim: usize,
    pub layers: Vec<usize>,
    pub brackets: Vec<(usize, usize, usize, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct BracketTerm {
    i: usize,
    j: usize,
    k: usize,
    c: f64,
}

/// A stratified Lie algebra with a fixed layer-adapted basis.
#[derive(Clone, Debug)]
pub struct StratifiedGroup {
    name: String,
    dim: usize,
    layers: Vec<usize>,
    // dense c[i][j][k], flattened
    constants: Vec<f64>,
    // nonzero entries of `constants`, used by the hot product loop
    terms: Vec<BracketTerm>,
    step: usize,
    homogeneous_dim: usize,
}

impl PartialEq for StratifiedGroup {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.layers == other.layers && self.constants == other.constants
    }
}

impl StratifiedGroup {
    /// Builds a group from 0-based bracket entries `(i, j, k, c)`, filling in the
    /// antisymmetric partner of every entry whose partner is not given, and validates
    /// every structural invariant.
    pub fn new(
        name: impl Into<String>,
        layers: Vec<usize>,
        brackets: &[(usize, usize, usize, f64)],
    ) -> Result<Self> {
        let dim = layers.len();
        if dim == 0 {
            return Err(Error::InvalidStructure("dimension must be positive".into()));
        }
        let step = *layers.iter().max().unwrap();
        if layers.contains(&0) {
            return Err(Error::InvalidStructure("layer weights start at 1".into()));
        }
        if step > MAX_STEP {
            return Err(Error::UnsupportedStep(step));
        }
        if let Some(p) = layers.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::InvalidStructure(format!(
                "basis is not sorted by layer: index {} has layer {} after layer {}",
                p + 2,
                layers[p + 1],
                layers[p]
            )));
        }
        for layer in 1..=step {
            if !layers.contains(&layer) {
                return Err(Error::InvalidStructure(format!("layer {layer} is empty")));
            }
        }

        let at = |i: usize, j: usize, k: usize| (i * dim + j) * dim + k;
        let mut constants = vec![0.0; dim * dim * dim];
        let mut given = vec![false; dim * dim * dim];
        for &(i, j, k, c) in brackets {
            for idx in [i, j, k] {
                if idx >= dim {
                    return Err(Error::InvalidStructure(format!(
                        "bracket index {} out of range 1..={dim}",
                        idx + 1
                    )));
                }
            }
            if !c.is_finite() {
                return Err(Error::InvalidStructure(format!(
                    "non-finite constant for [Y{}, Y{}]",
                    i + 1,
                    j + 1
                )));
            }
            if given[at(i, j, k)] {
                return Err(Error::InvalidStructure(format!(
                    "duplicate bracket entry ({}, {}, {})",
                    i + 1,
                    j + 1,
                    k + 1
                )));
            }
            given[at(i, j, k)] = true;
            constants[at(i, j, k)] = c;
        }
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    if given[at(i, j, k)] && !given[at(j, i, k)] {
                        constants[at(j, i, k)] = -constants[at(i, j, k)];
                    }
                }
            }
        }

        let g = Self::from_constants(name.into(), layers, constants)?;
        g.validate()?;
        Ok(g)
    }

    fn from_constants(name: String, layers: Vec<usize>, constants: Vec<f64>) -> Result<Self> {
        let dim = layers.len();
        let mut terms = Vec::new();
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    let c = constants[(i * dim + j) * dim + k];
                    if c != 0.0 {
                        terms.push(BracketTerm { i, j, k, c });
                    }
                }
            }
        }
        let step = *layers.iter().max().unwrap_or(&1);
        let homogeneous_dim = layers.iter().sum();
        Ok(StratifiedGroup {
            name,
            dim,
            layers,
            constants,
            terms,
            step,
            homogeneous_dim,
        })
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let (cij, cji) = (self.c(i, j, k), self.c(j, i, k));
                    if (cij + cji).abs() > STRUCTURE_TOL {
                        return Err(Error::InvalidStructure(format!(
                            "antisymmetry fails: c({0},{1},{2}) = {cij} but c({1},{0},{2}) = {cji}",
                            i + 1,
                            j + 1,
                            k + 1
                        )));
                    }
                    if cij != 0.0 && self.layers[k] != self.layers[i] + self.layers[j] {
                        return Err(Error::InvalidStructure(format!(
                            "stratification fails: [Y{}, Y{}] has a Y{} component but layers are {} + {} != {}",
                            i + 1,
                            j + 1,
                            k + 1,
                            self.layers[i],
                            self.layers[j],
                            self.layers[k]
                        )));
                    }
                }
            }
        }
        // Jacobi: [[Y_i,Y_j],Y_l] + [[Y_j,Y_l],Y_i] + [[Y_l,Y_i],Y_j] = 0
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    for k in 0..n {
                        let mut r = 0.0;
                        let mut scale = 0.0f64;
                        for m in 0..n {
                            let t = [
                                self.c(i, j, m) * self.c(m, l, k),
                                self.c(j, l, m) * self.c(m, i, k),
                                self.c(l, i, m) * self.c(m, j, k),
                            ];
                            for v in t {
                                r += v;
                                scale = scale.max(v.abs());
                            }
                        }
                        if r.abs() > STRUCTURE_TOL * scale.max(1.0) {
                            return Err(Error::JacobiViolation {
                                i: i + 1,
                                j: j + 1,
                                l: l + 1,
                                k: k + 1,
                                residual: r,
                            });
                        }
                    }
                }
            }
        }
        // V_1 generates: [V_1, V_{s-1}] spans V_s
        for s in 2..=self.step {
            let target: Vec<usize> = (0..n).filter(|&k| self.layers[k] == s).collect();
            let mut rows = Vec::new();
            for a in (0..n).filter(|&a| self.layers[a] == 1) {
                for b in (0..n).filter(|&b| self.layers[b] == s - 1) {
                    rows.push(target.iter().map(|&k| self.c(a, b, k)).collect::<Vec<_>>());
                }
            }
            if matrix_rank(rows, target.len()) < target.len() {
                return Err(Error::InvalidStructure(format!(
                    "layer {s} is not generated by brackets of the first layer"
                )));
            }
        }
        Ok(())
    }

    pub fn from_structure(file: &StructureFile) -> Result<Self> {
        if file.layers.len() != file.dim {
            return Err(Error::InvalidStructure(format!(
                "dim is {} but {} layer weights were given",
                file.dim,
                file.layers.len()
            )));
        }
        let mut brackets = Vec::with_capacity(file.brackets.len());
        for &(i, j, k, c) in &file.brackets {
            if i == 0 || j == 0 || k == 0 {
                return Err(Error::InvalidStructure(
                    "bracket indices are 1-based".into(),
                ));
            }
            brackets.push((i - 1, j - 1, k - 1, c));
        }
        let name = file.name.clone().unwrap_or_else(|| "custom".into());
        Self::new(name, file.layers.clone(), &brackets)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: StructureFile = serde_json::from_str(s)?;
        Self::from_structure(&file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        Self::from_json_str(&s)
    }

    pub fn to_structure(&self) -> StructureFile {
        StructureFile {
            name: Some(self.name.clone()),
            dim: self.dim,
            layers: self.layers.clone(),
            brackets: self
                .terms
                .iter()
                .map(|t| (t.i + 1, t.j + 1, t.k + 1, t.c))
                .collect(),
        }
    }

    /// The abelian group ℝⁿ.
    pub fn abelian(n: usize) -> Self {
        Self::new(format!("abelian{n}"), vec![1; n.max(1)], &[]).expect("abelian group is valid")
    }

    /// The first Heisenberg group with `[Y1, Y2] = Y3`.
    pub fn heisenberg() -> Self {
        Self::new("heisenberg", vec![1, 1, 2], &[(0, 1, 2, 1.0)]).expect("valid")
    }

    /// The 4-dimensional Engel group, step 3: `[Y1, Y2] = Y3`, `[Y1, Y3] = Y4`.
    pub fn engel() -> Self {
        Self::new("engel", vec![1, 1, 2, 3], &[(0, 1, 2, 1.0), (0, 2, 3, 1.0)]).expect("valid")
    }

    /// Looks up a catalog group by identifier: `abelianN`, `rN`, `heisenberg`, `h1`, `engel`.
    pub fn by_name(id: &str) -> Option<Self> {
        let id = id.to_ascii_lowercase();
        match id.as_str() {
            "heisenberg" | "h1" => return Some(Self::heisenberg()),
            "engel" => return Some(Self::engel()),
            _ => {}
        }
        let digits = id
            .strip_prefix("abelian")
            .or_else(|| id.strip_prefix('r'))?;
        let n: usize = digits.parse().ok()?;
        (n > 0).then(|| Self::abelian(n))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Layer weight n(i) of every basis index (0-based indices).
    pub fn layers(&self) -> &[usize] {
        &self.layers
    }

    pub fn layer_of(&self, i: usize) -> usize {
        self.layers[i]
    }

    pub fn step(&self) -> usize {
        self.step
    }

    /// Homogeneous dimension Q = Σ n(i).
    pub fn homogeneous_dim(&self) -> usize {
        self.homogeneous_dim
    }

    /// Dimension of the first layer.
    pub fn first_layer_dim(&self) -> usize {
        self.layers.iter().filter(|&&n| n == 1).count()
    }

    pub fn is_abelian(&self) -> bool {
        self.terms.is_empty()
    }

    /// Structure constant c_{ijk} (0-based).
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.constants[(i * self.dim + j) * self.dim + k]
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Lie bracket of two algebra elements, accumulated into `out` scaled by `s`.
    fn bracket_acc(&self, x: &[f64], y: &[f64], s: f64, out: &mut [f64]) {
        for t in &self.terms {
            out[t.k] += s * t.c * x[t.i] * y[t.j];
        }
    }

    pub fn bracket(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        self.check_len(y)?;
        let mut out = vec![0.0; self.dim];
        self.bracket_acc(x, y, 1.0, &mut out);
        Ok(out)
    }

    /// Product without length checks; `out` must not alias the inputs.
    pub(crate) fn product_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        for k in 0..self.dim {
            out[k] = x[k] + y[k];
        }
        if self.terms.is_empty() {
            return;
        }
        if self.step < 3 {
            self.bracket_acc(x, y, 0.5, out);
            return;
        }
        let mut b = [0.0; 16];
        let b = if self.dim <= 16 {
            &mut b[..self.dim]
        } else {
            return self.product_into_alloc(x, y, out);
        };
        self.bracket_acc(x, y, 1.0, b);
        for k in 0..self.dim {
            out[k] += 0.5 * b[k];
        }
        // (1/12)([x,[x,y]] + [y,[y,x]]) = (1/12)[x - y, [x,y]]
        for t in &self.terms {
            out[t.k] += t.c * (x[t.i] - y[t.i]) * b[t.j] / 12.0;
        }
    }

    fn product_into_alloc(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let mut b = vec![0.0; self.dim];
        self.bracket_acc(x, y, 1.0, &mut b);
        for k in 0..self.dim {
            out[k] += 0.5 * b[k];
        }
        for t in &self.terms {
            out[t.k] += t.c * (x[t.i] - y[t.i]) * b[t.j] / 12.0;
        }
    }

    /// The group product x·y.
    pub fn cbh_product(&self, x: &[f64], y: &[f64]) -> Result<GroupPoint> {
        self.check_len(x)?;
        self.check_len(y)?;
        if self.step > MAX_STEP {
            return Err(Error::UnsupportedStep(self.step));
        }
        let mut out = vec![0.0; self.dim];
        self.product_into(x, y, &mut out);
        Ok(GroupPoint(out))
    }

    /// The dilation δ_a.
    pub fn dilate_point(&self, a: f64, x: &[f64]) -> Result<GroupPoint> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidDilation(a));
        }
        self.check_len(x)?;
        Ok(GroupPoint(
            x.iter()
                .zip(&self.layers)
                .map(|(&v, &n)| v * a.powi(n as i32))
                .collect(),
        ))
    }

    /// The exponent 2·m! used by the homogeneous norm.
    fn norm_exponent(&self) -> u32 {
        2 * (1..=self.step as u32).product::<u32>()
    }

    /// |x| = (Σ |x_i|^{2m!/n(i)})^{1/(2m!)}.
    pub fn hom_norm(&self, x: &[f64]) -> f64 {
        let e = self.norm_exponent();
        let s: f64 = x
            .iter()
            .zip(&self.layers)
            .map(|(&v, &n)| v.abs().powi((e / n as u32) as i32))
            .sum();
        s.powf(1.0 / e as f64)
    }

    /// Homogeneous degree d(I) = Σ I_i n(i).
    pub fn hom_degree(&self, idx: &MultiIndex) -> Result<u32> {
        self.check_len_idx(idx)?;
        Ok(idx
            .0
            .iter()
            .zip(&self.layers)
            .map(|(&e, &n)| e * n as u32)
            .sum())
    }

    fn check_len_idx(&self, idx: &MultiIndex) -> Result<()> {
        if idx.0.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: idx.0.len(),
            });
        }
        Ok(())
    }

    /// All multi-indices with d(I) ≤ k, ordered by homogeneous degree, then total
    /// degree, then reverse lexicographically (so x comes before y, x² before xy).
    pub fn poly_basis(&self, k: i64) -> Result<Vec<MultiIndex>> {
        if k < 0 {
            return Err(Error::InvalidStructure(format!(
                "polynomial degree must be non-negative, got {k}"
            )));
        }
        let k = k as u32;
        let mut out = Vec::new();
        let mut cur = vec![0u32; self.dim];
        self.enumerate(0, k, &mut cur, &mut out);
        out.sort_by_cached_key(|m| {
            let d: u32 = m.0.iter().zip(&self.layers).map(|(&e, &n)| e * n as u32).sum();
            (d, m.total_degree(), Reverse(m.clone()))
        });
        Ok(out)
    }

    fn enumerate(&self, pos: usize, budget: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if pos == self.dim {
            out.push(MultiIndex(cur.clone()));
            return;
        }
        let w = self.layers[pos] as u32;
        let mut e = 0;
        while e * w <= budget {
            cur[pos] = e;
            self.enumerate(pos + 1, budget - e * w, cur, out);
            e += 1;
        }
        cur[pos] = 0;
    }

    /// Coordinate expression of the left-invariant field Y_i (0-based `i`).
    pub fn left_invariant_field(&self, i: usize) -> Result<VectorField> {
        if i >= self.dim {
            return Err(Error::InvalidStructure(format!(
                "basis index {} out of range 1..={}",
                i + 1,
                self.dim
            )));
        }
        // d/dt (x · t e_i) at t = 0 is e_i + ½[x, e_i] + (1/12)[x, [x, e_i]]
        let mut coeffs = vec![Polynomial::zero(self.dim); self.dim];
        coeffs[i].add_term(MultiIndex::zero(self.dim), 1.0);
        for t in self.terms.iter().filter(|t| t.j == i) {
            coeffs[t.k].add_term(unit_index(self.dim, &[t.i]), 0.5 * t.c);
        }
        if self.step >= 3 {
            // [x, [x, e_i]]_k = Σ c_{a m k} x_a c_{j i m} x_j
            for inner in self.terms.iter().filter(|t| t.j == i) {
                for outer in self.terms.iter().filter(|t| t.j == inner.k) {
                    coeffs[outer.k]
                        .add_term(unit_index(self.dim, &[outer.i, inner.i]), outer.c * inner.c / 12.0);
                }
            }
        }
        Ok(VectorField { index: i, coeffs })
    }
}

fn unit_index(dim: usize, at: &[usize]) -> MultiIndex {
    let mut v = vec![0; dim];
    for &a in at {
        v[a] += 1;
    }
    MultiIndex(v)
}

fn matrix_rank(mut rows: Vec<Vec<f64>>, cols: usize) -> usize {
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows.len()).max_by(|&a, &b| {
            rows[a][col].abs().total_cmp(&rows[b][col].abs())
        }) else {
            break;
        };
        if rows[p][col].abs() < 1e-12 {
            continue;
        }
        rows.swap(rank, p);
        for r in rank + 1..rows.len() {
            let f = rows[r][col] / rows[rank][col];
            let (top, bottom) = rows.split_at_mut(r);
            for (x, y) in bottom[0][col..cols].iter_mut().zip(&top[rank][col..cols]) {
                *x -= f * y;
            }
        }
        rank += 1;
    }
    rank
}

/// A real polynomial in the exponential coordinates.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Polynomial {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(idx: MultiIndex, c: f64) -> Self {
        let mut p = Self::zero(idx.0.len());
        p.add_term(idx, c);
        p
    }

    /// The coordinate function x_k.
    pub fn coordinate(dim: usize, k: usize) -> Self {
        Self::monomial(unit_index(dim, &[k]), 1.0)
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::monomial(MultiIndex::zero(dim), c)
    }

    pub fn add_term(&mut self, idx: MultiIndex, c: f64) {
        let e = self.terms.entry(idx).or_insert(0.0);
        *e += c;
        if *e == 0.0 {
            self.terms.retain(|_, v| *v != 0.0);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(k, &v)| (k, v))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(m, c)| c * m.monomial(x)).sum()
    }

    pub fn derivative(&self, k: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (m, &c) in &self.terms {
            if m.0[k] > 0 {
                let mut e = m.clone();
                e.0[k] -= 1;
                out.add_term(e, c * m.0[k] as f64);
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.dim);
        for (a, &ca) in &self.terms {
            for (b, &cb) in &other.terms {
                let e = MultiIndex(a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect());
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero(self.dim);
        for (m, &c) in &self.terms {
            out.add_term(m.clone(), c * s);
        }
        out
    }
}

/// A first-order differential operator Σ_k a_k(x) ∂_k with polynomial coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub index: usize,
    pub coeffs: Vec<Polynomial>,
}

impl VectorField {
    /// Coefficient vector (a_1(x), …, a_n(x)).
    pub fn coefficients_at(&self, x: &[f64]) -> Vec<f64> {
        self.coeffs.iter().map(|p| p.eval(x)).collect()
    }

    pub fn apply(&self, f: &Polynomial) -> Polynomial {
        self.coeffs
            .iter()
            .enumerate()
            .fold(Polynomial::zero(f.dim), |acc, (k, a)| {
                acc.add(&a.mul(&f.derivative(k)))
            })
    }

    /// The commutator [self, other] applied to `f`.
    pub fn commutator_apply(&self, other: &VectorField, f: &Polynomial) -> Polynomial {
        self.apply(&other.apply(f))
            .add(&other.apply(&self.apply(f)).scale(-1.0))
    }
}

/// Empirical quasi-triangle constant max |xy| / (|x| + |y|) over the given pairs.
pub fn quasi_triangle_constant<'a>(
    g: &StratifiedGroup,
    pairs: impl IntoIterator<Item = (&'a [f64], &'a [f64])>,
) -> f64 {
    let mut out = vec![0.0; g.dim()];
    let mut c: f64 = 0.0;
    for (x, y) in pairs {
        let d = g.hom_norm(x) + g.hom_norm(y);
        if d > 0.0 {
            g.product_into(x, y, &mut out);
            c = c.max(g.hom_norm(&out) / d);
        }
    }
    c
}
