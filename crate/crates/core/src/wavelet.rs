//! Admissible wavelets ψ = 𝓛ĥ(𝓛)δ, the continuous wavelet transform on a log-scale
//! grid, Calderón reconstruction and the continuous-scale Besov norm.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::family::KernelFamily;
use crate::grid::GridFunction;
use crate::grid::Exponent;
use crate::littlewood_paley::{
    norm_table, weighted_sequence_norm, BesovParams, LpPair, RatioReport, RatioRow, TestFunction, MOMENT_TOL,
};
use crate::spectral::{multiplier, Multiplier, SpectralModel};

const QUAD_TOL: f64 = 1e-14;

/// ∫₀^∞ f(u) du through u = t/(1−t).
fn integrate_half_line(f: impl Fn(f64) -> f64) -> f64 {
    quadrature::double_exponential::integrate(
        |t: f64| {
            if t <= 0.0 || t >= 1.0 {
                return 0.0;
            }
            let s = 1.0 - t;
            let v = f(t / s) / (s * s);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        QUAD_TOL,
    )
    .integral
}

/// ½∫₀^∞ u·ĥ(u)² du.
pub fn calderon_constant(h_hat: &dyn Fn(f64) -> f64) -> f64 {
    0.5 * integrate_half_line(|u| u * h_hat(u).powi(2))
}

/// ∫₀^∞ (a²ξ)²ĥ(a²ξ)² da/a, which equals the Calderón constant for every ξ > 0.
pub fn scale_integral(h_hat: &dyn Fn(f64) -> f64, xi: f64) -> f64 {
    // a = t/(1−t) maps (0,1) onto (0,∞); da/a = dt/(t(1−t))
    quadrature::double_exponential::integrate(
        |t: f64| {
            if t <= 0.0 || t >= 1.0 {
                return 0.0;
            }
            let a = t / (1.0 - t);
            let u = a * a * xi;
            let v = (u * h_hat(u)).powi(2) / (t * (1.0 - t));
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        QUAD_TOL,
    )
    .integral
}

type ScaleCache = Mutex<BTreeMap<u64, Arc<GridFunction>>>;

#[derive(Clone)]
pub struct AdmissibleWavelet {
    pub label: String,
    pub h_hat: Multiplier,
    pub c_psi: f64,
    pub moment_order: u32,
    model: Arc<SpectralModel>,
    family: KernelFamily,
    cache: Arc<ScaleCache>,
}

impl std::fmt::Debug for AdmissibleWavelet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AdmissibleWavelet")
            .field("label", &self.label)
            .field("c_psi", &self.c_psi)
            .field("moment_order", &self.moment_order)
            .finish()
    }
}

/// ψ = 𝓛ĥ(𝓛)δ with its Calderón constant and verified moment order.
pub fn make_admissible(
    model: Arc<SpectralModel>,
    h_hat: Multiplier,
    label: impl Into<String>,
) -> Result<AdmissibleWavelet> {
    let label = label.into();
    let c_psi = calderon_constant(&*h_hat);
    if !(c_psi >= 1e-12) {
        return Err(Error::DegenerateWavelet(format!(
            "{label}: Calderón constant {c_psi:e} is below 1e-12"
        )));
    }
    let h = h_hat.clone();
    let family = KernelFamily::spectral(model.clone(), multiplier(move |xi| xi * h(xi)));
    let psi = family.base()?;
    let moment_order = psi.vanishing_moment_order(6, MOMENT_TOL)?;
    let w = AdmissibleWavelet {
        label,
        h_hat,
        c_psi,
        moment_order,
        model,
        family,
        cache: Arc::default(),
    };
    w.cache.lock().unwrap().insert(1f64.to_bits(), Arc::new(psi));
    Ok(w)
}

/// Multiplier ξ^k e^{−ξ}, i.e. ĥ(ξ) = ξ^{k−1}e^{−ξ}.
pub fn mexican_hat(model: Arc<SpectralModel>, k: u32) -> Result<AdmissibleWavelet> {
    if k == 0 {
        return Err(Error::DegenerateWavelet("Mexican hat order must be at least 1".into()));
    }
    let h = multiplier(move |xi| xi.powi(k as i32 - 1) * (-xi).exp());
    make_admissible(model, h, format!("mexican-hat-{k}"))
}

/// ψ = (e^{−t₁𝓛} − e^{−t₂𝓛})δ, a difference of heat kernels, with
/// ĥ(ξ) = (e^{−t₁ξ} − e^{−t₂ξ})/ξ.
pub fn heat_difference(model: Arc<SpectralModel>, t1: f64, t2: f64) -> Result<AdmissibleWavelet> {
    if !(t1 > 0.0 && t2 > t1 && t2.is_finite()) {
        return Err(Error::DegenerateWavelet(format!(
            "heat times must satisfy 0 < t1 < t2, got {t1}, {t2}"
        )));
    }
    let h = multiplier(move |xi| {
        if xi <= 0.0 {
            t2 - t1
        } else {
            -(-t1 * xi).exp() * (-(t2 - t1) * xi).exp_m1() / xi
        }
    });
    make_admissible(model, h, format!("heat-{t1}-{t2}"))
}

impl AdmissibleWavelet {
    pub fn psi(&self) -> Result<Arc<GridFunction>> {
        self.at_scale(1.0)
    }

    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    pub fn model(&self) -> &Arc<SpectralModel> {
        &self.model
    }

    /// D_a ψ, memoized.
    pub fn at_scale(&self, a: f64) -> Result<Arc<GridFunction>> {
        if let Some(k) = self.cache.lock().unwrap().get(&a.to_bits()) {
            return Ok(k.clone());
        }
        let k = Arc::new(self.family.at_scale(a)?);
        self.cache.lock().unwrap().insert(a.to_bits(), k.clone());
        Ok(k)
    }

    /// Σ_a w_a D_a(ψ^*∗ψ) / c_ψ as one spectral kernel.
    pub fn calderon_kernel(&self, grid: &ScaleGrid) -> Result<GridFunction> {
        let h = self.h_hat.clone();
        let nodes: Vec<(f64, f64)> = grid.nodes().zip(grid.weights()).collect();
        let c = self.c_psi;
        self.model.spectral_kernel(&move |xi| {
            nodes
                .iter()
                .map(|&(a, w)| {
                    let u = xi / (a * a);
                    w * (u * h(u)).powi(2)
                })
                .sum::<f64>()
                / c
        })
    }
}

/// Geometric scale nodes with log-midpoint weights for da/a.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleGrid {
    pub a_min: f64,
    pub a_max: f64,
    pub n_scales: usize,
}

impl ScaleGrid {
    pub fn new(a_min: f64, a_max: f64, n_scales: usize) -> Result<Self> {
        if !(a_min > 0.0 && a_max > a_min && a_max.is_finite()) || n_scales == 0 {
            return Err(Error::Config(format!(
                "scale grid needs 0 < a_min < a_max and at least one node, got [{a_min}, {a_max}] x {n_scales}"
            )));
        }
        Ok(ScaleGrid {
            a_min,
            a_max,
            n_scales,
        })
    }

    /// [2^lo, 2^hi] with the given number of nodes per octave.
    pub fn dyadic(lo: i32, hi: i32, per_octave: usize) -> Result<Self> {
        Self::new(
            2f64.powi(lo),
            2f64.powi(hi),
            (hi - lo).max(0) as usize * per_octave,
        )
    }

    fn log_width(&self) -> f64 {
        (self.a_max / self.a_min).ln()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let step = self.log_width() / self.n_scales as f64;
        (0..self.n_scales).map(move |i| self.a_min * ((i as f64 + 0.5) * step).exp())
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        let w = self.log_width() / self.n_scales as f64;
        std::iter::repeat_n(w, self.n_scales)
    }

    pub fn refined(&self) -> Self {
        ScaleGrid {
            n_scales: 2 * self.n_scales,
            ..self.clone()
        }
    }
}

/// a ↦ u ∗ (D_aψ)^* over the scale nodes.
pub fn cwt(u: &GridFunction, w: &AdmissibleWavelet, grid: &ScaleGrid) -> Result<Vec<(f64, GridFunction)>> {
    let nodes: Vec<f64> = grid.nodes().collect();
    for &a in &nodes {
        w.at_scale(a)?;
    }
    nodes
        .par_iter()
        .map(|&a| Ok((a, u.convolve(&w.at_scale(a)?.star())?)))
        .collect()
}

/// Σ_a w_a f ∗ D_a(ψ^*∗ψ) / c_ψ.
pub fn calderon_reconstruct(f: &GridFunction, w: &AdmissibleWavelet, grid: &ScaleGrid) -> Result<GridFunction> {
    f.convolve(&w.calderon_kernel(grid)?)
}

/// (Σ_a w_a (a^s‖u∗D_aψ^*‖_p)^q)^{1/q}, or the max over nodes for q = ∞.
pub fn continuous_besov_norm(
    u: &GridFunction,
    w: &AdmissibleWavelet,
    params: &BesovParams,
    grid: &ScaleGrid,
) -> Result<f64> {
    params.check_moments(w.moment_order)?;
    let norms: Vec<(f64, f64)> = cwt(u, w, grid)?
        .into_iter()
        .map(|(a, c)| (a, c.lp_norm(params.p)))
        .collect();
    Ok(continuous_from_norms(&norms, grid, params))
}

pub(crate) fn continuous_from_norms(norms: &[(f64, f64)], grid: &ScaleGrid, params: &BesovParams) -> f64 {
    if params.q.is_infinite() {
        return weighted_sequence_norm(norms, params.s, params.q);
    }
    let q = params.q.value();
    norms
        .iter()
        .zip(grid.weights())
        .map(|(&(a, n), wt)| wt * (a.powf(params.s) * n).powf(q))
        .sum::<f64>()
        .powf(1.0 / q)
}

/// Continuous norms for every test function and parameter point.
fn continuous_table(
    w: &AdmissibleWavelet,
    bank: &[TestFunction],
    params: &[BesovParams],
    grid: &ScaleGrid,
) -> Result<Vec<Vec<f64>>> {
    for p in params {
        p.check_moments(w.moment_order)?;
    }
    let mut exps: Vec<Exponent> = Vec::new();
    for p in params {
        if !exps.contains(&p.p) {
            exps.push(p.p);
        }
    }
    bank.iter()
        .map(|tf| {
            let coeffs = cwt(&tf.f, w, grid)?;
            let norms: Vec<Vec<(f64, f64)>> = exps
                .iter()
                .map(|&p| coeffs.iter().map(|(a, c)| (*a, c.lp_norm(p))).collect())
                .collect();
            Ok(params
                .iter()
                .map(|bp| {
                    let k = exps.iter().position(|e| *e == bp.p).unwrap();
                    continuous_from_norms(&norms[k], grid, bp)
                })
                .collect())
        })
        .collect()
}

/// Ratios continuous/discrete Besov norm over the test bank, one group of rows per
/// wavelet and parameter point.
pub fn cwt_equivalence_experiment(
    wavelets: &[AdmissibleWavelet],
    pair: &LpPair,
    bank: &[TestFunction],
    params: &[BesovParams],
    grid: &ScaleGrid,
) -> Result<RatioReport> {
    let discrete = norm_table(pair, bank, params)?;
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for w in wavelets {
        let cont = continuous_table(w, bank, params, grid)?;
        for (fi, tf) in bank.iter().enumerate() {
            for (pi, bp) in params.iter().enumerate() {
                let (a, b) = (cont[fi][pi], discrete[fi][pi]);
                if !(a > 0.0 && b > 0.0) {
                    log::warn!("skipping {} for {}: zero norm", tf.id, w.label);
                    skipped.push(tf.id.clone());
                    continue;
                }
                rows.push(RatioRow {
                    pair1: w.label.clone(),
                    pair2: pair.label.clone(),
                    s: bp.s,
                    p: bp.p,
                    q: bp.q,
                    f_id: tf.id.clone(),
                    ratio: a / b,
                });
            }
        }
    }
    skipped.sort();
    skipped.dedup();
    Ok(RatioReport::from_rows(rows, skipped))
}
