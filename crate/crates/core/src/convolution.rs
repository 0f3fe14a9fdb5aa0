//! Group convolution kernels.
//!
//! On step-1 and step-2 groups the non-central coordinates of y⁻¹x are exact grid
//! differences, and the central coordinates are shifted by ½B(y, x). The quadrature
//! therefore splits into a discrete sum over the non-central axes and, for each pair of
//! non-central slices, a shifted linear convolution along the central axes, which is
//! evaluated with padded FFTs. Multilinear interpolation along a central axis becomes the
//! factor (1−θ)ω^{κm} + θω^{κ(m+1)} in frequency space, so the fast path reproduces the
//! direct quadrature up to round-off.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::grid::{GridFunction, SNAP};

/// Slices whose magnitude stays below this fraction of the global maximum are skipped.
const SUPPORT_EPS: f64 = 1e-15;

pub(crate) fn convolve(f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    let group = f.spec().group();
    if group.is_abelian() {
        let axes: Vec<usize> = (0..group.dim()).collect();
        Ok(fft_convolve(f, g, &axes))
    } else if group.step() == 2 {
        let axes: Vec<usize> = (0..group.dim()).filter(|&a| group.layer_of(a) == 2).collect();
        Ok(fft_convolve(f, g, &axes))
    } else {
        Ok(convolve_direct(f, g))
    }
}

/// Smallest 5-smooth integer ≥ n.
pub(crate) fn fast_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Direct O(M²) quadrature vol·Σ_y f(y) g(y⁻¹x) with multilinear interpolation.
pub(crate) fn convolve_direct(f: &GridFunction, g: &GridFunction) -> GridFunction {
    let spec = f.spec().clone();
    let group = spec.group();
    let n = spec.dim();
    let fmax = f.max_abs();
    let support: Vec<(Vec<f64>, Complex64)> = f
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() > 0.0 && v.norm() >= fmax * SUPPORT_EPS)
        .map(|(i, &v)| (spec.node(i).iter().map(|c| -c).collect(), v))
        .collect();
    let vol = spec.cell_volume();
    let gv = g.values();
    let values: Vec<Complex64> = (0..spec.len())
        .into_par_iter()
        .map_init(
            || (vec![0.0; n], vec![0.0; n], Vec::new()),
            |(x, z, st), i| {
                spec.node_into(i, x);
                let mut acc = Complex64::new(0.0, 0.0);
                for (yinv, fv) in &support {
                    group.product_into(yinv, x, z);
                    spec.stencil(z, st);
                    let gz: Complex64 = st.iter().map(|&(j, w)| gv[j] * w).sum();
                    acc += fv * gz;
                }
                acc * vol
            },
        )
        .collect();
    GridFunction::from_parts(spec, values)
}

struct Layout {
    outer_axes: Vec<usize>,
    inner_axes: Vec<usize>,
    outer_shape: Vec<usize>,
    inner_shape: Vec<usize>,
    outer_len: usize,
    inner_len: usize,
}

impl Layout {
    fn new(points: &[usize], inner_axes: &[usize]) -> Self {
        let outer_axes: Vec<usize> = (0..points.len()).filter(|a| !inner_axes.contains(a)).collect();
        let outer_shape: Vec<usize> = outer_axes.iter().map(|&a| points[a]).collect();
        let inner_shape: Vec<usize> = inner_axes.iter().map(|&a| points[a]).collect();
        Layout {
            outer_len: outer_shape.iter().product(),
            inner_len: inner_shape.iter().product(),
            outer_axes,
            inner_axes: inner_axes.to_vec(),
            outer_shape,
            inner_shape,
        }
    }

    /// Splits the grid function into one inner slice per outer index.
    fn slices(&self, values: &[Complex64], points: &[usize]) -> Vec<Vec<Complex64>> {
        let n = points.len();
        let mut out = vec![vec![Complex64::new(0.0, 0.0); self.inner_len]; self.outer_len];
        let mut ix = vec![0usize; n];
        for (flat, &v) in values.iter().enumerate() {
            let mut f = flat;
            for a in (0..n).rev() {
                ix[a] = f % points[a];
                f /= points[a];
            }
            let o = flatten(&self.outer_axes, &self.outer_shape, &ix);
            let i = flatten(&self.inner_axes, &self.inner_shape, &ix);
            out[o][i] = v;
        }
        out
    }
}

fn flatten(axes: &[usize], shape: &[usize], ix: &[usize]) -> usize {
    axes.iter().zip(shape).fold(0, |acc, (&a, &s)| acc * s + ix[a])
}

fn unflatten(mut flat: usize, shape: &[usize], out: &mut [usize]) {
    for a in (0..shape.len()).rev() {
        out[a] = flat % shape[a];
        flat /= shape[a];
    }
}

/// Per inner axis: the integer part and fraction of the central shift σ = ½B(y, x)/h.
#[derive(Clone, Copy)]
struct Shift {
    m: i64,
    theta: f64,
}

fn split_shift(sigma: f64) -> Shift {
    let mut m = sigma.floor();
    let mut theta = sigma - m;
    if theta > 1.0 - SNAP {
        m += 1.0;
        theta = 0.0;
    } else if theta < SNAP {
        theta = 0.0;
    }
    Shift { m: m as i64, theta }
}

/// Index range [lo, hi] of entries above the support threshold along each inner axis.
fn inner_support(slices: &[Vec<Complex64>], shape: &[usize], thresh: f64) -> Vec<(i64, i64)> {
    let mut r = vec![(i64::MAX, i64::MIN); shape.len()];
    let mut ix = vec![0usize; shape.len()];
    for s in slices {
        for (i, v) in s.iter().enumerate() {
            if v.norm() > thresh {
                unflatten(i, shape, &mut ix);
                for (a, &k) in ix.iter().enumerate() {
                    r[a].0 = r[a].0.min(k as i64);
                    r[a].1 = r[a].1.max(k as i64);
                }
            }
        }
    }
    r
}

struct Plans {
    fwd: Vec<Arc<dyn Fft<f64>>>,
    inv: Vec<Arc<dyn Fft<f64>>>,
}

/// In-place N-dimensional FFT of a row-major block.
fn fftn(buf: &mut [Complex64], shape: &[usize], ffts: &[Arc<dyn Fft<f64>>], line: &mut Vec<Complex64>) {
    let n = shape.len();
    let total: usize = shape.iter().product();
    for a in 0..n {
        let len = shape[a];
        let stride: usize = shape[a + 1..].iter().product();
        if stride == 1 {
            ffts[a].process(buf);
            continue;
        }
        line.resize(len, Complex64::new(0.0, 0.0));
        let block = len * stride;
        for start in (0..total).step_by(block) {
            for off in 0..stride {
                let base = start + off;
                for k in 0..len {
                    line[k] = buf[base + k * stride];
                }
                ffts[a].process(line);
                for k in 0..len {
                    buf[base + k * stride] = line[k];
                }
            }
        }
    }
}

/// Linear FFT convolution along `inner_axes`, explicit summation over the others.
fn fft_convolve(f: &GridFunction, g: &GridFunction, inner_axes: &[usize]) -> GridFunction {
    let spec = f.spec().clone();
    let group = spec.group();
    let points = spec.points();
    let lay = Layout::new(points, inner_axes);
    let fmax = f.max_abs();
    let gmax = g.max_abs();
    if fmax == 0.0 || gmax == 0.0 {
        return GridFunction::zeros(spec);
    }
    let fs = lay.slices(f.values(), points);
    let gs = lay.slices(g.values(), points);
    let f_on: Vec<bool> = fs
        .iter()
        .map(|s| s.iter().any(|v| v.norm() > fmax * SUPPORT_EPS))
        .collect();
    let g_on: Vec<bool> = gs
        .iter()
        .map(|s| s.iter().any(|v| v.norm() > gmax * SUPPORT_EPS))
        .collect();
    let f_sup = inner_support(&fs, &lay.inner_shape, fmax * SUPPORT_EPS);
    let g_sup = inner_support(&gs, &lay.inner_shape, gmax * SUPPORT_EPS);
    let centers_in: Vec<i64> = lay.inner_shape.iter().map(|&p| (p as i64 - 1) / 2).collect();
    let centers_out: Vec<i64> = lay.outer_shape.iter().map(|&p| (p as i64 - 1) / 2).collect();

    // Outer coordinates (full-length vectors with zeros on inner axes) for the bracket.
    let outer_coords: Vec<Vec<f64>> = (0..lay.outer_len)
        .map(|o| {
            let mut ix = vec![0usize; lay.outer_axes.len()];
            unflatten(o, &lay.outer_shape, &mut ix);
            let mut x = vec![0.0; spec.dim()];
            for (k, &a) in lay.outer_axes.iter().enumerate() {
                x[a] = spec.coord(a, ix[k]);
            }
            x
        })
        .collect();
    let half_h: Vec<f64> = lay.inner_axes.iter().map(|&a| 0.5 / spec.spacing()[a]).collect();
    let shifts = |y: &[f64], x: &[f64], out: &mut [Shift], tmp: &mut Vec<f64>| {
        if group.is_abelian() {
            out.iter_mut().for_each(|s| *s = Shift { m: 0, theta: 0.0 });
            return;
        }
        tmp.iter_mut().for_each(|v| *v = 0.0);
        let b = group.bracket(y, x).expect("lengths match");
        tmp.copy_from_slice(&b);
        for (k, &a) in lay.inner_axes.iter().enumerate() {
            out[k] = split_shift(tmp[a] * half_h[k]);
        }
    };
    let partner = |xo: usize, yo: usize| -> Option<usize> {
        let mut xi = vec![0usize; lay.outer_axes.len()];
        let mut yi = vec![0usize; lay.outer_axes.len()];
        unflatten(xo, &lay.outer_shape, &mut xi);
        unflatten(yo, &lay.outer_shape, &mut yi);
        let mut v = 0usize;
        for k in 0..xi.len() {
            let d = xi[k] as i64 - yi[k] as i64 + centers_out[k];
            if d < 0 || d >= lay.outer_shape[k] as i64 {
                return None;
            }
            v = v * lay.outer_shape[k] + d as usize;
        }
        Some(v)
    };
    // Value interval of the shifted linear convolution and the read window; the pair
    // contributes only if they meet, and the union must fit in one period.
    let window = |k: usize, s: Shift| -> Option<i64> {
        let lo = f_sup[k].0 + g_sup[k].0 + s.m;
        let hi = f_sup[k].1 + g_sup[k].1 + s.m + i64::from(s.theta > 0.0);
        let rlo = centers_in[k];
        let rhi = centers_in[k] + lay.inner_shape[k] as i64 - 1;
        if hi < rlo || lo > rhi {
            None
        } else {
            Some(hi.max(rhi) - lo.min(rlo) + 1)
        }
    };
    let f_support: Vec<usize> = (0..lay.outer_len).filter(|&o| f_on[o]).collect();
    let n_in = lay.inner_axes.len();

    // First pass: padded lengths.
    let spans: Vec<Vec<i64>> = (0..lay.outer_len)
        .into_par_iter()
        .map_init(
            || (vec![Shift { m: 0, theta: 0.0 }; n_in], vec![0.0; spec.dim()]),
            |(sh, tmp), xo| {
                let mut span = vec![0i64; n_in];
                for &yo in &f_support {
                    let Some(v) = partner(xo, yo) else { continue };
                    if !g_on[v] {
                        continue;
                    }
                    shifts(&outer_coords[yo], &outer_coords[xo], sh, tmp);
                    let w: Option<Vec<i64>> = (0..n_in).map(|k| window(k, sh[k])).collect();
                    if let Some(w) = w {
                        for k in 0..n_in {
                            span[k] = span[k].max(w[k]);
                        }
                    }
                }
                span
            },
        )
        .collect();
    let padded: Vec<usize> = (0..n_in)
        .map(|k| fast_len(spans.iter().map(|s| s[k]).max().unwrap_or(1).max(1) as usize))
        .collect();
    let padded_len: usize = padded.iter().product();

    let mut planner = FftPlanner::<f64>::new();
    let plans = Plans {
        fwd: padded.iter().map(|&p| planner.plan_fft_forward(p)).collect(),
        inv: padded.iter().map(|&p| planner.plan_fft_inverse(p)).collect(),
    };
    let transform = |slices: &[Vec<Complex64>], on: &[bool]| -> Vec<Option<Vec<Complex64>>> {
        slices
            .par_iter()
            .zip(on.par_iter())
            .map_init(Vec::new, |line, (s, &live)| {
                live.then(|| {
                    let mut buf = vec![Complex64::new(0.0, 0.0); padded_len];
                    let mut ix = vec![0usize; n_in];
                    for (i, &v) in s.iter().enumerate() {
                        unflatten(i, &lay.inner_shape, &mut ix);
                        let p = ix.iter().zip(&padded).fold(0, |acc, (&k, &p)| acc * p + k);
                        buf[p] = v;
                    }
                    fftn(&mut buf, &padded, &plans.fwd, line);
                    buf
                })
            })
            .collect()
    };
    let fhat = transform(&fs, &f_on);
    let ghat = transform(&gs, &g_on);
    drop(fs);
    drop(gs);

    // ω^k tables, ω = e^{−2πi/P}
    let omega: Vec<Vec<Complex64>> = padded
        .iter()
        .map(|&p| {
            (0..p)
                .map(|k| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * k as f64 / p as f64))
                .collect()
        })
        .collect();
    let scale = spec.cell_volume() / padded_len as f64;

    let out_slices: Vec<Vec<Complex64>> = (0..lay.outer_len)
        .into_par_iter()
        .map_init(
            || {
                (
                    vec![Shift { m: 0, theta: 0.0 }; n_in],
                    vec![0.0; spec.dim()],
                    vec![Complex64::new(0.0, 0.0); padded_len],
                    padded.iter().map(|&p| vec![Complex64::new(0.0, 0.0); p]).collect::<Vec<_>>(),
                    Vec::new(),
                )
            },
            |(sh, tmp, acc, phi, line), xo| {
                acc.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                let mut any = false;
                for &yo in &f_support {
                    let Some(v) = partner(xo, yo) else { continue };
                    let (Some(fy), Some(gv)) = (&fhat[yo], &ghat[v]) else { continue };
                    shifts(&outer_coords[yo], &outer_coords[xo], sh, tmp);
                    if (0..n_in).any(|k| window(k, sh[k]).is_none()) {
                        continue;
                    }
                    any = true;
                    for k in 0..n_in {
                        let p = padded[k];
                        let m = sh[k].m.rem_euclid(p as i64) as usize;
                        let t = sh[k].theta;
                        let om = &omega[k];
                        for (kap, ph) in phi[k].iter_mut().enumerate() {
                            let e0 = (kap * m) % p;
                            *ph = if t == 0.0 {
                                om[e0]
                            } else {
                                om[e0] * (1.0 - t) + om[(e0 + kap) % p] * t
                            };
                        }
                    }
                    if n_in == 1 {
                        for ((a, (x, y)), ph) in acc.iter_mut().zip(fy.iter().zip(gv)).zip(&phi[0]) {
                            *a += x * y * ph;
                        }
                    } else {
                        let mut ix = vec![0usize; n_in];
                        for (i, a) in acc.iter_mut().enumerate() {
                            unflatten(i, &padded, &mut ix);
                            let ph: Complex64 = (0..n_in).map(|k| phi[k][ix[k]]).product();
                            *a += fy[i] * gv[i] * ph;
                        }
                    }
                }
                let mut out = vec![Complex64::new(0.0, 0.0); lay.inner_len];
                if !any {
                    return out;
                }
                fftn(acc, &padded, &plans.inv, line);
                let mut ix = vec![0usize; n_in];
                for (i, o) in out.iter_mut().enumerate() {
                    unflatten(i, &lay.inner_shape, &mut ix);
                    let p = (0..n_in).fold(0, |a, k| {
                        a * padded[k] + (ix[k] + centers_in[k] as usize) % padded[k]
                    });
                    *o = acc[p] * scale;
                }
                out
            },
        )
        .collect();

    // Scatter back to row-major order.
    let mut values = vec![Complex64::new(0.0, 0.0); spec.len()];
    let mut ix = vec![0usize; spec.dim()];
    for (flat, v) in values.iter_mut().enumerate() {
        spec.unflatten(flat, &mut ix);
        let o = flatten(&lay.outer_axes, &lay.outer_shape, &ix);
        let i = flatten(&lay.inner_axes, &lay.inner_shape, &ix);
        *v = out_slices[o][i];
    }
    GridFunction::from_parts(spec, values)
}
