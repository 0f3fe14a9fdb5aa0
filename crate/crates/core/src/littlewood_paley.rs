//! Littlewood-Paley pairs built by spectral calculus, dyadic coefficients, homogeneous
//! Besov semi-norms and the experiments comparing them.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::KernelFamily;
use crate::grid::{Exponent, GridFunction};
use crate::spectral::{multiplier, Multiplier, SpectralModel};

/// Tolerance of the moment check that certifies an LP kernel.
pub const MOMENT_TOL: f64 = 1e-5;

/// Smooth step: 0 for x ≤ 0, 1 for x ≥ 1, built from e^{−1/x}.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / x).exp();
        let b = (-1.0 / (1.0 - x)).exp();
        a / (a + b)
    }
}

/// A compactly supported spectral profile whose squares form a partition of unity
/// over the dilates ξ ↦ a^{2j}ξ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpProfile {
    pub xi_center: f64,
    pub base: f64,
}

impl LpProfile {
    pub fn new(xi_center: f64, base: f64) -> Result<Self> {
        if !(base > 1.0 && base.is_finite()) {
            return Err(Error::InvalidBase(base));
        }
        if !(xi_center > 0.0 && xi_center.is_finite()) {
            return Err(Error::DegenerateProfile(format!(
                "center must be positive, got {xi_center}"
            )));
        }
        let p = LpProfile { xi_center, base };
        let worst = (0..=1000)
            .map(|i| p.denominator_at(i as f64 / 1000.0))
            .fold(f64::INFINITY, f64::min);
        if worst < 1e-6 {
            return Err(Error::DegenerateProfile(format!(
                "normalizing sum drops to {worst:e}"
            )));
        }
        Ok(p)
    }

    fn log_coordinate(&self, xi: f64) -> f64 {
        (xi / self.xi_center).ln() / (self.base * self.base).ln()
    }

    fn bump(u: f64) -> f64 {
        smooth_step(1.0 - u.abs())
    }

    /// Σ_j θ(u + j)², periodic in u.
    fn denominator_at(&self, u: f64) -> f64 {
        let f = u - u.floor();
        (-2..=2).map(|j| Self::bump(f + j as f64).powi(2)).sum()
    }

    /// [ξ_lo, ξ_hi] = [ξ_c / a², ξ_c a²].
    pub fn support(&self) -> (f64, f64) {
        let a2 = self.base * self.base;
        (self.xi_center / a2, self.xi_center * a2)
    }

    /// The unnormalized bump θ.
    pub fn theta(&self, xi: f64) -> f64 {
        if xi <= 0.0 {
            return 0.0;
        }
        Self::bump(self.log_coordinate(xi))
    }

    pub fn psi_hat(&self, xi: f64) -> f64 {
        if xi <= 0.0 {
            return 0.0;
        }
        let u = self.log_coordinate(xi);
        let t = Self::bump(u);
        if t == 0.0 {
            0.0
        } else {
            t / self.denominator_at(u).sqrt()
        }
    }

    /// Σ_{|j|≤j0} ψ̂(a^{2j}ξ)².
    pub fn partition_sum(&self, xi: f64, j0: i32) -> f64 {
        let a2 = self.base * self.base;
        (-j0..=j0).map(|j| self.psi_hat(a2.powi(j) * xi).powi(2)).sum()
    }

    pub fn multiplier(&self) -> Multiplier {
        let p = *self;
        multiplier(move |xi| p.psi_hat(xi))
    }
}

/// (s, p, q) and the scale cutoff J.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesovParams {
    pub s: f64,
    pub p: Exponent,
    pub q: Exponent,
    pub j_max: i32,
}

impl BesovParams {
    pub fn new(s: f64, p: Exponent, q: Exponent, j_max: i32) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::Config(format!("smoothness must be finite, got {s}")));
        }
        if j_max < 0 {
            return Err(Error::Config(format!("scale cutoff must be non-negative, got {j_max}")));
        }
        Ok(BesovParams { s, p, q, j_max })
    }

    /// Enforces the hypothesis k > |s| (and k ≥ 1 for p = ∞).
    pub fn check_moments(&self, k: u32) -> Result<()> {
        if self.s.abs() >= k as f64 {
            return Err(Error::Config(format!(
                "smoothness s = {} needs vanishing moments of order k > |s|, but k = {k}",
                self.s
            )));
        }
        if self.p.is_infinite() && k == 0 {
            return Err(Error::Config(
                "p = inf requires a wavelet with vanishing moments".into(),
            ));
        }
        Ok(())
    }
}

type KernelCache = Mutex<BTreeMap<(bool, i32), Arc<GridFunction>>>;

/// An analysis/synthesis pair (ψ, η) with dilation base a.
#[derive(Clone)]
pub struct LpPair {
    pub label: String,
    pub profile: LpProfile,
    pub analysis: KernelFamily,
    pub synthesis: KernelFamily,
    pub moment_order: u32,
    cache: Arc<KernelCache>,
}

impl std::fmt::Debug for LpPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LpPair")
            .field("label", &self.label)
            .field("profile", &self.profile)
            .field("moment_order", &self.moment_order)
            .finish()
    }
}

pub fn build_lp_profile(xi_center: f64, base: f64) -> Result<LpProfile> {
    LpProfile::new(xi_center, base)
}

/// ψ = η = ψ̂(𝓛)δ, certified with moments at the default tolerance.
pub fn make_lp_pair(model: Arc<SpectralModel>, profile: LpProfile) -> Result<LpPair> {
    make_lp_pair_with_tolerance(model, profile, MOMENT_TOL)
}

/// As `make_lp_pair` with an explicit relative moment tolerance.
pub fn make_lp_pair_with_tolerance(
    model: Arc<SpectralModel>,
    profile: LpProfile,
    moment_tol: f64,
) -> Result<LpPair> {
    let family = KernelFamily::spectral(model, profile.multiplier());
    let psi = family.base()?;
    let order = psi.vanishing_moment_order(4, moment_tol)?;
    if order < 2 {
        return Err(Error::UnderResolved(format!(
            "LP kernel with center {} has vanishing moments only of order {order}",
            profile.xi_center
        )));
    }
    Ok(LpPair {
        label: format!("lp-{}-a{}", profile.xi_center, profile.base),
        profile,
        analysis: family.clone(),
        synthesis: family,
        moment_order: order,
        cache: Arc::default(),
    })
}

impl LpPair {
    pub fn base(&self) -> f64 {
        self.profile.base
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn psi(&self) -> Result<Arc<GridFunction>> {
        self.kernel(true, 0)
    }

    pub fn eta(&self) -> Result<Arc<GridFunction>> {
        self.kernel(false, 0)
    }

    /// ψ_j = D_{a^j}ψ (analysis) or η_j (synthesis), memoized.
    pub fn kernel(&self, analysis: bool, j: i32) -> Result<Arc<GridFunction>> {
        if let Some(k) = self.cache.lock().unwrap().get(&(analysis, j)) {
            return Ok(k.clone());
        }
        let fam = if analysis { &self.analysis } else { &self.synthesis };
        let k = Arc::new(fam.at_scale(self.base().powi(j))?);
        self.cache.lock().unwrap().insert((analysis, j), k.clone());
        Ok(k)
    }

    /// The same pair with an empty kernel cache, so every kernel is rebuilt.
    pub fn rebuilt(&self, label: impl Into<String>) -> Self {
        LpPair {
            label: label.into(),
            cache: Arc::default(),
            ..self.clone()
        }
    }

    /// The pair with the roles of ψ and η exchanged.
    pub fn swapped(&self) -> Self {
        LpPair {
            label: format!("{}-swapped", self.label),
            profile: self.profile,
            analysis: self.synthesis.clone(),
            synthesis: self.analysis.clone(),
            moment_order: self.moment_order,
            cache: Arc::default(),
        }
    }
}

/// η = ψ + φ with φ the Fourier-multiplier kernel of a low-frequency bump supported
/// where ψ̂ vanishes. Abelian groups only.
pub fn shifted_synthesis_pair(pair: &LpPair, phi_hat: Multiplier) -> Result<LpPair> {
    let spec = pair.analysis.spec();
    if !spec.group().is_abelian() {
        return Err(Error::NotAbelian);
    }
    let (_, hi) = pair.profile.support();
    let mut worst: f64 = 0.0;
    for i in 0..=20000 {
        // dense log grid from 1e-10 to the top of the support
        let xi = 1e-10 * (hi * 1e10).powf(i as f64 / 20000.0);
        worst = worst.max((pair.profile.psi_hat(xi) * phi_hat(xi)).abs());
    }
    if worst > 1e-12 {
        return Err(Error::SupportOverlap(format!(
            "sup |psi_hat * phi_hat| = {worst:e}"
        )));
    }
    let phi = KernelFamily::Fourier {
        spec,
        multiplier: phi_hat,
    };
    Ok(LpPair {
        label: format!("{}+phi", pair.label),
        profile: pair.profile,
        analysis: pair.analysis.clone(),
        synthesis: KernelFamily::Sum(vec![pair.synthesis.clone(), phi]),
        moment_order: pair.moment_order,
        cache: Arc::default(),
    })
}

/// The default low-frequency bump 1 − smooth_step(ξ/ξ_cut), supported in [0, ξ_cut].
pub fn low_frequency_bump(xi_cut: f64) -> Multiplier {
    multiplier(move |xi| 1.0 - smooth_step(xi / xi_cut))
}

/// u ∗ ψ_j^* for |j| ≤ J.
pub fn lp_coefficients(u: &GridFunction, pair: &LpPair, j_max: i32) -> Result<Vec<(i32, GridFunction)>> {
    (-j_max..=j_max)
        .map(|j| {
            let k = pair.kernel(true, j)?;
            Ok((j, u.convolve(&k.star())?))
        })
        .collect()
}

/// Σ_j coeff_j ∗ η_j.
pub fn lp_reconstruct(coeffs: &[(i32, GridFunction)], pair: &LpPair) -> Result<GridFunction> {
    let spec = coeffs
        .first()
        .map(|c| c.1.spec().clone())
        .ok_or_else(|| Error::Config("no coefficients to reconstruct from".into()))?;
    let mut out = GridFunction::zeros(spec);
    for (j, c) in coeffs {
        let eta = pair.kernel(false, *j)?;
        out.add_assign_scaled(1.0, &c.convolve(&eta)?)?;
    }
    Ok(out)
}

/// ℓ^q norm of (a^{js}·n_j)_j.
pub fn weighted_sequence_norm(norms: &[(f64, f64)], s: f64, q: Exponent) -> f64 {
    let terms = norms.iter().map(|&(scale, n)| scale.powf(s) * n);
    if q.is_infinite() {
        terms.fold(0.0, f64::max)
    } else {
        let q = q.value();
        terms.map(|t| t.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// ‖u∗ψ_j^*‖_p for each exponent, keyed by j.
pub fn coefficient_norms(
    u: &GridFunction,
    pair: &LpPair,
    j_max: i32,
    exponents: &[Exponent],
) -> Result<Vec<Vec<(i32, f64)>>> {
    let coeffs = lp_coefficients(u, pair, j_max)?;
    Ok(exponents
        .iter()
        .map(|&p| coeffs.iter().map(|(j, c)| (*j, c.lp_norm(p))).collect())
        .collect())
}

fn besov_from_norms(norms: &[(i32, f64)], base: f64, s: f64, q: Exponent) -> f64 {
    let scaled: Vec<(f64, f64)> = norms.iter().map(|&(j, n)| (base.powi(j), n)).collect();
    weighted_sequence_norm(&scaled, s, q)
}

/// ‖(a^{js}‖u∗ψ_j^*‖_p)_{|j|≤J}‖_{ℓ^q}.
pub fn besov_norm(u: &GridFunction, pair: &LpPair, params: &BesovParams) -> Result<f64> {
    params.check_moments(pair.moment_order)?;
    let norms = coefficient_norms(u, pair, params.j_max, &[params.p])?;
    Ok(besov_from_norms(&norms[0], pair.base(), params.s, params.q))
}

/// A named test function.
#[derive(Clone, Debug)]
pub struct TestFunction {
    pub id: String,
    pub f: GridFunction,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioRow {
    pub pair1: String,
    pub pair2: String,
    pub s: f64,
    pub p: Exponent,
    pub q: Exponent,
    pub f_id: String,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpreadSummary {
    pub pair1: String,
    pub pair2: String,
    pub s: f64,
    pub p: Exponent,
    pub q: Exponent,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
    pub n: usize,
}

#[derive(Clone, Debug, Default)]
pub struct RatioReport {
    pub rows: Vec<RatioRow>,
    pub summaries: Vec<SpreadSummary>,
    pub skipped: Vec<String>,
}

impl RatioReport {
    pub fn worst_spread(&self) -> f64 {
        self.summaries.iter().map(|s| s.spread).fold(1.0, f64::max)
    }

    /// Builds summaries from rows, grouped by (pair1, pair2, s, p, q) in sorted order.
    pub(crate) fn from_rows(mut rows: Vec<RatioRow>, skipped: Vec<String>) -> Self {
        rows.sort_by(|a, b| {
            (&a.pair1, &a.pair2, a.s, a.p.value(), a.q.value(), &a.f_id)
                .partial_cmp(&(&b.pair1, &b.pair2, b.s, b.p.value(), b.q.value(), &b.f_id))
                .unwrap()
        });
        let mut summaries: Vec<SpreadSummary> = Vec::new();
        for r in &rows {
            match summaries.last_mut() {
                Some(s)
                    if s.pair1 == r.pair1
                        && s.pair2 == r.pair2
                        && s.s == r.s
                        && s.p == r.p
                        && s.q == r.q =>
                {
                    s.min = s.min.min(r.ratio);
                    s.max = s.max.max(r.ratio);
                    s.spread = s.max / s.min;
                    s.n += 1;
                }
                _ => summaries.push(SpreadSummary {
                    pair1: r.pair1.clone(),
                    pair2: r.pair2.clone(),
                    s: r.s,
                    p: r.p,
                    q: r.q,
                    min: r.ratio,
                    max: r.ratio,
                    spread: 1.0,
                    n: 1,
                }),
            }
        }
        RatioReport {
            rows,
            summaries,
            skipped,
        }
    }
}

/// Per (pair, test function): Besov norms for every parameter point.
pub(crate) fn norm_table(
    pair: &LpPair,
    bank: &[TestFunction],
    params: &[BesovParams],
) -> Result<Vec<Vec<f64>>> {
    for p in params {
        p.check_moments(pair.moment_order)?;
    }
    let j_max = params.iter().map(|p| p.j_max).max().unwrap_or(0);
    let mut exps: Vec<Exponent> = Vec::new();
    for p in params {
        if !exps.contains(&p.p) {
            exps.push(p.p);
        }
    }
    // warm the kernel cache sequentially so parallel workers share it
    for j in -j_max..=j_max {
        pair.kernel(true, j)?;
    }
    bank.par_iter()
        .map(|tf| {
            let norms = coefficient_norms(&tf.f, pair, j_max, &exps)?;
            Ok(params
                .iter()
                .map(|bp| {
                    let k = exps.iter().position(|e| *e == bp.p).unwrap();
                    let sel: Vec<(i32, f64)> = norms[k]
                        .iter()
                        .copied()
                        .filter(|(j, _)| j.abs() <= bp.j_max)
                        .collect();
                    besov_from_norms(&sel, pair.base(), bp.s, bp.q)
                })
                .collect())
        })
        .collect()
}

/// Norm ratios ‖f‖_{pair1}/‖f‖_{pair2} over the test bank for every ordered pair
/// combination (i < k) and parameter point.
pub fn equivalence_experiment(
    pairs: &[LpPair],
    bank: &[TestFunction],
    params: &[BesovParams],
) -> Result<RatioReport> {
    if pairs.len() < 2 {
        return Err(Error::Config("the equivalence experiment needs at least two pairs".into()));
    }
    let tables: Vec<Vec<Vec<f64>>> = pairs
        .iter()
        .map(|p| norm_table(p, bank, params))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for i in 0..pairs.len() {
        for k in i + 1..pairs.len() {
            for (fi, tf) in bank.iter().enumerate() {
                for (pi, bp) in params.iter().enumerate() {
                    let (a, b) = (tables[i][fi][pi], tables[k][fi][pi]);
                    if !(b > 0.0) || !(a > 0.0) {
                        log::warn!("skipping {} for {} vs {}: zero norm", tf.id, pairs[i].label, pairs[k].label);
                        skipped.push(tf.id.clone());
                        continue;
                    }
                    rows.push(RatioRow {
                        pair1: pairs[i].label.clone(),
                        pair2: pairs[k].label.clone(),
                        s: bp.s,
                        p: bp.p,
                        q: bp.q,
                        f_id: tf.id.clone(),
                        ratio: a / b,
                    });
                }
            }
        }
    }
    skipped.sort();
    skipped.dedup();
    Ok(RatioReport::from_rows(rows, skipped))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayDirection {
    SmallT,
    LargeT,
}

#[derive(Clone, Debug)]
pub struct DecaySettings {
    pub ts: Vec<f64>,
    /// Sup is taken over nodes with homogeneous norm at most this radius.
    pub window_radius: f64,
    pub floor: f64,
}

#[derive(Clone, Debug)]
pub struct DecayResult {
    pub direction: DecayDirection,
    pub k: u32,
    pub expected: f64,
    pub slope: f64,
    pub samples: Vec<(f64, f64)>,
    /// Scales dropped because the norm fell below the floor.
    pub truncated: usize,
}

/// Least-squares slope of log y against log x.
pub fn log_log_slope(samples: &[(f64, f64)]) -> f64 {
    let n = samples.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in samples {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Fits the decay of ‖g ∗ D_t f‖_∞ over the t-sweep.
pub fn decay_slope_experiment(
    f: &KernelFamily,
    g: &GridFunction,
    k: u32,
    direction: DecayDirection,
    settings: &DecaySettings,
) -> Result<DecayResult> {
    let q = g.spec().group().homogeneous_dim() as f64;
    let mut samples = Vec::new();
    let mut truncated = 0;
    for &t in &settings.ts {
        let conv = g.convolve(&f.at_scale(t)?)?;
        let v = conv.max_abs_within(settings.window_radius);
        if v < settings.floor {
            truncated += 1;
            continue;
        }
        samples.push((t, v));
    }
    if samples.len() < 2 {
        return Err(Error::UnderResolved(format!(
            "decay sweep kept {} of {} scales above the floor {:e}",
            samples.len(),
            settings.ts.len(),
            settings.floor
        )));
    }
    let expected = match direction {
        DecayDirection::SmallT => k as f64 + q,
        DecayDirection::LargeT => -(k as f64),
    };
    Ok(DecayResult {
        direction,
        k,
        expected,
        slope: log_log_slope(&samples),
        samples,
        truncated,
    })
}

/// Geometric sweep base^lo, …, base^hi.
pub fn geometric_sweep(base: f64, lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|e| base.powi(e)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_step_limits() {
        assert_eq!(smooth_step(0.0), 0.0);
        assert_eq!(smooth_step(1.0), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn profile_examples() {
        let p = LpProfile::new(16.0, 2.0).unwrap();
        assert!((p.partition_sum(16.0, 8) - 1.0).abs() < 1e-10);
        let (lo, hi) = p.support();
        assert_eq!(p.psi_hat(lo / 2.0), 0.0);
        assert_eq!(p.psi_hat(hi * 1.01), 0.0);
        assert_eq!(p.psi_hat(0.0), 0.0);
        assert!(matches!(LpProfile::new(1.0, 1.0), Err(Error::InvalidBase(_))));
        assert!(LpProfile::new(1.0, 0.5).is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let s: Vec<(f64, f64)> = (0..6).map(|i| (2f64.powi(i), 3.0 * 2f64.powi(-2 * i))).collect();
        assert!((log_log_slope(&s) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn params_respect_moment_hypothesis() {
        let bp = BesovParams::new(1.0, Exponent::TWO, Exponent::TWO, 4).unwrap();
        assert!(bp.check_moments(2).is_ok());
        assert!(bp.check_moments(1).is_err());
        let inf = BesovParams::new(0.0, Exponent::INF, Exponent::TWO, 4).unwrap();
        assert!(inf.check_moments(0).is_err());
    }
}
