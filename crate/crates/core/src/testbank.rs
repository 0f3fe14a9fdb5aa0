//! Test functions for the experiments: derivatives of Gaussians, modulated Gaussians,
//! dilated wavelets and rough piecewise-smooth functions, mean-corrected where needed.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::family::Pointwise;
use crate::grid::{GridFunction, GridSpec};
use crate::group::StratifiedGroup;
use crate::littlewood_paley::TestFunction;

/// u − (∫u / ∫G) G with G the Gaussian of `gaussian` at length scale `sigma`.
pub fn mean_correct(u: &GridFunction, sigma: f64) -> Result<GridFunction> {
    let g = gaussian(u.spec().clone(), sigma)?;
    let c = u.integral().re / g.integral().re;
    u.axpy(-c, &g)
}

/// e^{−Σ_i (x_i/s_i)²/2} with s_i = σ on the first layer and 2σ^{n(i)} above, so the bump is
/// roughly round in the homogeneous norm.
pub fn gaussian_profile(group: &StratifiedGroup, sigma: f64) -> Pointwise {
    let scales: Vec<f64> = group
        .layers()
        .iter()
        .map(|&n| if n == 1 { sigma } else { 2.0 * sigma.powi(n as i32) })
        .collect();
    Arc::new(move |x: &[f64]| {
        let r2: f64 = x.iter().zip(&scales).map(|(v, s)| (v / s).powi(2)).sum();
        (-0.5 * r2).exp()
    })
}

/// [`gaussian_profile`] sampled on the grid.
pub fn gaussian(spec: Arc<GridSpec>, sigma: f64) -> Result<GridFunction> {
    let f = gaussian_profile(spec.group(), sigma);
    GridFunction::sample_real(spec, move |x| f(x))
}

/// Probabilists' Hermite polynomial He_k, so that d^k/dx^k e^{−x²/2} = (−1)^k He_k(x) e^{−x²/2}.
fn hermite(k: u32, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, x);
    if k == 0 {
        return a;
    }
    for n in 1..k {
        let c = x * b - n as f64 * a;
        a = b;
        b = c;
    }
    b
}

fn named(id: &str, f: GridFunction) -> TestFunction {
    TestFunction { id: id.to_string(), f }
}

/// The twelve-function bank on ℝ¹; `sigma` is the common length scale.
pub fn real_line_bank(spec: Arc<GridSpec>, sigma: f64) -> Result<Vec<TestFunction>> {
    if spec.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: spec.dim(),
        });
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Config(format!("bank length scale must be positive, got {sigma}")));
    }
    let s = || spec.clone();
    let mut bank = Vec::with_capacity(12);
    for k in 1..=4u32 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let f = GridFunction::sample_real(s(), move |x| {
            let y = x[0] / sigma;
            sign * hermite(k, y) * (-0.5 * y * y).exp()
        })?;
        bank.push(named(&format!("gauss-d{k}"), f));
    }
    for w in [2.0, 4.0] {
        let f = GridFunction::sample_real(s(), move |x| {
            let y = x[0] / sigma;
            (w * y).cos() * (-0.5 * y * y).exp()
        })?;
        bank.push(named(&format!("mod-cos-{w}"), mean_correct(&f, sigma)?));
    }
    let f = GridFunction::sample_real(s(), move |x| {
        let y = x[0] / sigma;
        (3.0 * y).sin() * (-y * y / 4.0).exp()
    })?;
    bank.push(named("mod-sin-3", f));
    for t in [0.5, 2.0, 4.0] {
        let f = GridFunction::sample_real(s(), move |x| {
            let y = t * x[0] / sigma;
            t * (1.0 - y * y) * (-0.5 * y * y).exp()
        })?;
        bank.push(named(&format!("hat-{t}"), f));
    }
    let f = GridFunction::sample_real(s(), move |x| {
        let y = x[0] / sigma;
        y * (1.0 - y.abs()).max(0.0).powi(2)
    })?;
    bank.push(named("rough-tent", f));
    let f = GridFunction::sample_real(s(), move |x| {
        let y = (x[0] / sigma).abs();
        (1.0 + y) * (-y).exp()
    })?;
    bank.push(named("rough-exp", mean_correct(&f, sigma)?));
    Ok(bank)
}

/// A bank on the Heisenberg group with coordinates (x, y, z).
pub fn heisenberg_bank(spec: Arc<GridSpec>, sigma: f64) -> Result<Vec<TestFunction>> {
    if spec.dim() != 3 || spec.group().is_abelian() {
        return Err(Error::InvalidGrid("the Heisenberg bank needs a 3-dimensional step-2 group".into()));
    }
    let g = gaussian(spec.clone(), sigma)?;
    let with = |id: &str, p: fn(&[f64]) -> f64| -> Result<TestFunction> {
        let f = GridFunction::sample_real(spec.clone(), p)?;
        let f = GridFunction::from_real(
            spec.clone(),
            f.real_parts()
                .iter()
                .zip(g.real_parts())
                .map(|(a, b)| a * b)
                .collect(),
        )?;
        Ok(named(id, mean_correct(&f, sigma)?))
    };
    Ok(vec![
        with("h-x", |x| x[0])?,
        with("h-y", |x| x[1])?,
        with("h-z", |x| x[2])?,
        with("h-xy", |x| x[0] * x[1])?,
        with("h-x2-y2", |x| x[0] * x[0] - x[1] * x[1])?,
        with("h-mod-cos", |x| (1.5 * x[0]).cos())?,
    ])
}
