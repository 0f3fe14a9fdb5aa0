//! Matrix functions f(A)b for sparse symmetric A by the Lanczos process.
//!
//! The basis is never stored: a first pass builds the tridiagonal T_m until the
//! coefficient vector f(T_m)e₁ settles, and a second pass regenerates the basis with
//! the same recurrence to accumulate ‖b‖·V_m f(T_m)e₁.

use faer::{Mat, Side};
use sprs::CsMat;

use crate::error::{Error, Result};

pub(crate) fn matvec(a: &CsMat<f64>, x: &[f64], y: &mut [f64]) {
    let indptr = a.indptr();
    let indptr = indptr.raw_storage();
    let (ind, data) = (a.indices(), a.data());
    for (r, out) in y.iter_mut().enumerate() {
        let mut s = 0.0;
        for k in indptr[r]..indptr[r + 1] {
            s += data[k] * x[ind[k]];
        }
        *out = s;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Copy, Debug)]
pub struct KrylovSettings {
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for KrylovSettings {
    fn default() -> Self {
        KrylovSettings {
            tol: 1e-11,
            max_steps: 4000,
        }
    }
}

/// Eigenvalues and the matrix of eigenvectors (column-major) of a symmetric tridiagonal.
fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> Result<(Vec<f64>, Mat<f64>)> {
    let m = alpha.len();
    let t = Mat::<f64>::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i == j + 1 {
            beta[j]
        } else if j == i + 1 {
            beta[i]
        } else {
            0.0
        }
    });
    let e = t
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = e.S();
    let vals = (0..m).map(|i| s[i]).collect();
    Ok((vals, e.U().to_owned()))
}

/// f(T)e₁ for the leading m×m block.
fn coefficients(alpha: &[f64], beta: &[f64], f: &dyn Fn(f64) -> f64) -> Result<Vec<f64>> {
    let m = alpha.len();
    let (theta, z) = tridiagonal_eigen(alpha, &beta[..m.saturating_sub(1)])?;
    let mut c = vec![0.0; m];
    for (k, &t) in theta.iter().enumerate() {
        let w = f(t.max(0.0)) * z[(0, k)];
        if w != 0.0 {
            for (i, ci) in c.iter_mut().enumerate() {
                *ci += w * z[(i, k)];
            }
        }
    }
    Ok(c)
}

/// Lanczos recurrence state shared by both passes.
struct Recurrence<'a> {
    a: &'a CsMat<f64>,
    prev: Vec<f64>,
    cur: Vec<f64>,
    w: Vec<f64>,
}

impl<'a> Recurrence<'a> {
    fn new(a: &'a CsMat<f64>, b: &[f64], beta0: f64) -> Self {
        Recurrence {
            a,
            prev: vec![0.0; b.len()],
            cur: b.iter().map(|v| v / beta0).collect(),
            w: vec![0.0; b.len()],
        }
    }

    /// Computes w = A v_j − β_{j−1} v_{j−1} and returns α_j; `w` is left holding
    /// the residual w − α_j v_j.
    fn expand(&mut self, beta_prev: f64) -> f64 {
        matvec(self.a, &self.cur, &mut self.w);
        for (w, p) in self.w.iter_mut().zip(&self.prev) {
            *w -= beta_prev * p;
        }
        let alpha = dot(&self.w, &self.cur);
        for (w, c) in self.w.iter_mut().zip(&self.cur) {
            *w -= alpha * c;
        }
        alpha
    }

    fn advance(&mut self, beta: f64) {
        std::mem::swap(&mut self.prev, &mut self.cur);
        for (c, w) in self.cur.iter_mut().zip(&self.w) {
            *c = w / beta;
        }
    }
}

/// Ritz values after at most `steps` Lanczos steps from `b`.
pub(crate) fn ritz_values(a: &CsMat<f64>, b: &[f64], steps: usize) -> Result<Vec<f64>> {
    let beta0 = dot(b, b).sqrt();
    if beta0 == 0.0 {
        return Ok(Vec::new());
    }
    let mut rec = Recurrence::new(a, b, beta0);
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    let mut scale: f64 = 0.0;
    for _ in 0..steps.min(b.len()) {
        let al = rec.expand(beta.last().copied().unwrap_or(0.0));
        alpha.push(al);
        let be = dot(&rec.w, &rec.w).sqrt();
        scale = scale.max(al.abs()).max(be);
        if be <= 1e-13 * scale {
            break;
        }
        beta.push(be);
        rec.advance(be);
    }
    let m = alpha.len();
    Ok(tridiagonal_eigen(&alpha, &beta[..m - 1])?.0)
}

/// f(A)b.
pub(crate) fn apply_function(
    a: &CsMat<f64>,
    b: &[f64],
    f: &dyn Fn(f64) -> f64,
    settings: KrylovSettings,
) -> Result<Vec<f64>> {
    let beta0 = dot(b, b).sqrt();
    if beta0 == 0.0 {
        return Ok(vec![0.0; b.len()]);
    }
    let max_steps = settings.max_steps.min(b.len());
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    let mut rec = Recurrence::new(a, b, beta0);
    let mut next_check = 16usize;
    let mut last: Option<Vec<f64>> = None;
    let mut scale: f64 = 0.0;
    let coef = loop {
        let bp = beta.last().copied().unwrap_or(0.0);
        let al = rec.expand(bp);
        alpha.push(al);
        let be = dot(&rec.w, &rec.w).sqrt();
        scale = scale.max(al.abs()).max(be);
        let breakdown = be <= 1e-13 * scale;
        let m = alpha.len();
        if breakdown || m >= max_steps || m >= next_check {
            beta.push(be);
            let c = coefficients(&alpha, &beta, f)?;
            let norm = dot(&c, &c).sqrt();
            let settled = last.as_ref().is_some_and(|p| {
                let diff: f64 = c
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (v - p.get(i).copied().unwrap_or(0.0)).powi(2))
                    .sum::<f64>()
                    .sqrt();
                diff <= settings.tol * norm.max(f64::MIN_POSITIVE)
            });
            if breakdown || settled {
                break c;
            }
            if m >= max_steps {
                return Err(Error::Eigen(format!(
                    "Lanczos did not converge within {max_steps} steps"
                )));
            }
            last = Some(c);
            next_check = (next_check * 3 / 2).max(next_check + 8);
            beta.pop();
        }
        beta.push(be);
        rec.advance(be);
    };

    let m = coef.len();
    let mut out = vec![0.0; b.len()];
    let mut rec = Recurrence::new(a, b, beta0);
    for j in 0..m {
        let c = coef[j] * beta0;
        for (o, v) in out.iter_mut().zip(&rec.cur) {
            *o += c * v;
        }
        if j + 1 < m {
            let bp = if j == 0 { 0.0 } else { beta[j - 1] };
            rec.expand(bp);
            rec.advance(beta[j]);
        }
    }
    log::debug!("Lanczos converged after {m} steps");
    Ok(out)
}
