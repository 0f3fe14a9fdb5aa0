//! Fourier multiplier kernels on ℝⁿ.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::convolution::fast_len;
use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};

/// Oversampling of the periodic box used to approximate the inverse Fourier integral.
const OVERSAMPLE_1D: usize = 8;
const OVERSAMPLE_ND: usize = 4;

/// The kernel K(x) = (2π)^{−n} ∫ m(|ω|²) e^{iω·x} dω sampled on the grid, computed with
/// an inverse FFT on an enlarged periodic box. The result is real for real m.
pub fn multiplier_kernel(spec: Arc<GridSpec>, m: &dyn Fn(f64) -> f64) -> Result<GridFunction> {
    if !spec.group().is_abelian() {
        return Err(Error::NotAbelian);
    }
    let n = spec.dim();
    let over = if n == 1 { OVERSAMPLE_1D } else { OVERSAMPLE_ND };
    let padded: Vec<usize> = spec.points().iter().map(|&p| fast_len(over * p)).collect();
    let total: usize = padded.iter().product();
    let h = spec.spacing().to_vec();
    let mut buf = vec![Complex64::new(0.0, 0.0); total];
    let mut ix = vec![0usize; n];
    for (flat, v) in buf.iter_mut().enumerate() {
        let mut f = flat;
        for a in (0..n).rev() {
            ix[a] = f % padded[a];
            f /= padded[a];
        }
        let xi: f64 = (0..n)
            .map(|a| {
                let k = ix[a] as f64;
                let p = padded[a] as f64;
                let k = if k >= p / 2.0 { k - p } else { k };
                let w = 2.0 * std::f64::consts::PI * k / (p * h[a]);
                w * w
            })
            .sum();
        *v = Complex64::new(m(xi), 0.0);
    }
    let mut planner = FftPlanner::<f64>::new();
    let plans: Vec<_> = padded.iter().map(|&p| planner.plan_fft_inverse(p)).collect();
    let mut line = Vec::new();
    for a in 0..n {
        let len = padded[a];
        let stride: usize = padded[a + 1..].iter().product();
        line.resize(len, Complex64::new(0.0, 0.0));
        for start in (0..total).step_by(len * stride) {
            for off in 0..stride {
                for k in 0..len {
                    line[k] = buf[start + off + k * stride];
                }
                plans[a].process(&mut line);
                for k in 0..len {
                    buf[start + off + k * stride] = line[k];
                }
            }
        }
    }
    let norm: f64 = padded.iter().zip(&h).map(|(&p, &hh)| 1.0 / (p as f64 * hh)).product();
    let mut vals = Vec::with_capacity(spec.len());
    for flat in 0..spec.len() {
        spec.unflatten(flat, &mut ix);
        let p = (0..n).fold(0, |acc, a| {
            let c = (spec.points()[a] as i64 - 1) / 2;
            let k = (ix[a] as i64 - c).rem_euclid(padded[a] as i64) as usize;
            acc * padded[a] + k
        });
        vals.push(buf[p].re * norm);
    }
    GridFunction::from_real(spec, vals)
}
