use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, KernelConfig, WaveletConfig};
use super::report::{fmt_f, Check, SuiteReport, Table};
use crate::calibration::{self, Bound};
use crate::error::{Error, Result};
use crate::family::KernelFamily;
use crate::grid::{GridFunction, GridSpec};
use crate::group::{quasi_triangle_constant, StratifiedGroup};
use crate::littlewood_paley::{
    besov_norm, decay_slope_experiment, equivalence_experiment, geometric_sweep,
    make_lp_pair_with_tolerance, DecayDirection, DecaySettings, LpPair, LpProfile, RatioReport,
    TestFunction,
};
use crate::spectral::{BuildOptions, SpectralModel};
use crate::testbank::{gaussian, gaussian_profile, heisenberg_bank, real_line_bank};
use crate::wavelet::{cwt_equivalence_experiment, heat_difference, mexican_hat, AdmissibleWavelet, ScaleGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    GroupCheck,
    Kernel,
    LpBuild,
    Besov,
    Equivalence,
    CwtEquivalence,
    Decay,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::GroupCheck,
        Suite::Kernel,
        Suite::LpBuild,
        Suite::Besov,
        Suite::Equivalence,
        Suite::CwtEquivalence,
        Suite::Decay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::GroupCheck => "group-check",
            Suite::Kernel => "kernel",
            Suite::LpBuild => "lp-build",
            Suite::Besov => "besov",
            Suite::Equivalence => "equivalence",
            Suite::CwtEquivalence => "cwt-equivalence",
            Suite::Decay => "decay",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Disables the eigendecomposition cache even when the config names one.
    pub no_cache: bool,
}

const FIXED: &str = "fixed";
const CONFIG: &str = "config";

pub fn run(suite: Suite, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SuiteReport> {
    let ctx = Context { cfg, opts };
    match suite {
        Suite::GroupCheck => group_check(&ctx),
        Suite::Kernel => kernel(&ctx),
        Suite::LpBuild => lp_build(&ctx),
        Suite::Besov => besov(&ctx),
        Suite::Equivalence => equivalence(&ctx),
        Suite::CwtEquivalence => cwt_equivalence(&ctx),
        Suite::Decay => decay(&ctx),
    }
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    opts: &'a RunOptions,
}

impl Context<'_> {
    fn spec(&self) -> Result<Arc<GridSpec>> {
        self.cfg.grid_spec()
    }

    fn model(&self, spec: &Arc<GridSpec>) -> Result<Arc<SpectralModel>> {
        let l = self
            .cfg
            .sublaplacian_dim
            .unwrap_or_else(|| spec.group().first_layer_dim());
        let cache_dir: Option<PathBuf> = match (&self.cfg.cache_dir, self.opts.no_cache) {
            (Some(d), false) => Some(self.cfg.resolve(d)),
            _ => None,
        };
        let opts = BuildOptions {
            cache_dir,
            ..Default::default()
        };
        Ok(Arc::new(SpectralModel::build(spec.clone(), l, &opts)?))
    }

    /// The configured moment tolerance, else the calibrated one for the group.
    fn moment_tolerance(&self, spec: &GridSpec) -> (f64, String) {
        let cal = calibration::defaults();
        match self.cfg.tolerances.moment {
            Some(t) => (t, CONFIG.into()),
            None if spec.group().is_abelian() => (cal.tolerance.moment, FIXED.into()),
            None => (
                cal.bound.heisenberg_moment.value,
                cal.bound.heisenberg_moment.provenance.clone(),
            ),
        }
    }

    fn pairs(&self, model: &Arc<SpectralModel>) -> Result<Vec<LpPair>> {
        let (tol, _) = self.moment_tolerance(model.spec());
        self.cfg
            .profiles
            .iter()
            .map(|p| make_lp_pair_with_tolerance(model.clone(), LpProfile::new(p.xi_center, p.base)?, tol))
            .collect()
    }

    fn wavelets(&self, model: &Arc<SpectralModel>) -> Result<Vec<AdmissibleWavelet>> {
        if self.cfg.wavelets.is_empty() {
            return Err(Error::Config("the wavelet list is empty".into()));
        }
        self.cfg
            .wavelets
            .iter()
            .map(|w| match *w {
                WaveletConfig::MexicanHat { k } => mexican_hat(model.clone(), k),
                WaveletConfig::HeatDifference { t1, t2 } => heat_difference(model.clone(), t1, t2),
            })
            .collect()
    }

    fn bank(&self, spec: &Arc<GridSpec>) -> Result<Vec<TestFunction>> {
        let cal = calibration::defaults();
        let b = self.cfg.bank.clone().unwrap_or(super::config::BankConfig {
            sigma: None,
            ids: None,
        });
        let g = spec.group();
        let bank = if g.is_abelian() && g.dim() == 1 {
            real_line_bank(spec.clone(), b.sigma.unwrap_or(cal.real_line.bank_sigma))?
        } else {
            heisenberg_bank(spec.clone(), b.sigma.unwrap_or(cal.heisenberg.bank_sigma))?
        };
        match b.ids {
            None => Ok(bank),
            Some(ids) => {
                if let Some(bad) = ids.iter().find(|id| !bank.iter().any(|t| &t.id == *id)) {
                    return Err(Error::Config(format!("unknown test function {bad:?}")));
                }
                Ok(bank.into_iter().filter(|t| ids.contains(&t.id)).collect())
            }
        }
    }

    fn scale_grid(&self) -> Result<ScaleGrid> {
        let cal = &calibration::defaults().scales;
        match self.cfg.scales {
            Some(s) => ScaleGrid::dyadic(s.lo, s.hi, s.per_octave),
            None => ScaleGrid::dyadic(cal.lo, cal.hi, cal.per_octave),
        }
    }

    fn bound(&self, configured: Option<f64>, calibrated: Option<&Bound>, what: &str) -> Result<(f64, String)> {
        match (configured, calibrated) {
            (Some(v), _) => Ok((v, CONFIG.into())),
            (None, Some(b)) => Ok((b.value, b.provenance.clone())),
            (None, None) => Err(Error::Config(format!(
                "no calibrated {what} bound applies; set it under tolerances"
            ))),
        }
    }
}

fn group_check(ctx: &Context) -> Result<SuiteReport> {
    let g = ctx.cfg.group()?;
    let tol = ctx
        .cfg
        .tolerances
        .group_algebra
        .unwrap_or(calibration::defaults().tolerance.group_algebra);
    let prov = if ctx.cfg.tolerances.group_algebra.is_some() { CONFIG } else { FIXED };
    let n = ctx.cfg.samples.unwrap_or(256);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed.unwrap_or(7));
    let pts: Vec<Vec<f64>> = (0..3 * n)
        .map(|_| (0..g.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    let residuals = algebra_residuals(&g, &pts)?;
    let mut rep = SuiteReport::new(Suite::GroupCheck.name());
    let mut t = Table::new("residuals", &["group", "check", "max_residual"]);
    for (name, r) in &residuals {
        t.push(vec![g.name().into(), name.clone(), fmt_f(*r)]);
        rep.checks.push(Check::at_most(format!("{}/{name}", g.name()), *r, tol, prov));
    }
    let c = quasi_triangle_constant(&g, pts.chunks(2).filter(|p| p.len() == 2).map(|p| (&p[0][..], &p[1][..])));
    t.push(vec![g.name().into(), "quasi-triangle-constant".into(), fmt_f(c)]);
    rep.tables.push(t);
    Ok(rep)
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn sup_abs(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Relative residuals of associativity, inverses, automorphism and homogeneity of the
/// dilations over the sample points, taken in consecutive triples.
pub fn algebra_residuals(g: &StratifiedGroup, pts: &[Vec<f64>]) -> Result<Vec<(String, f64)>> {
    let mut assoc: f64 = 0.0;
    let mut inverse: f64 = 0.0;
    let mut auto: f64 = 0.0;
    let mut homog: f64 = 0.0;
    for t in pts.chunks_exact(3) {
        let (x, y, z) = (&t[0], &t[1], &t[2]);
        let left = g.cbh_product(&g.cbh_product(x, y)?, z)?;
        let right = g.cbh_product(x, &g.cbh_product(y, z)?)?;
        assoc = assoc.max(sup_diff(&left, &right) / (1.0 + sup_abs(&left)));
        let e = g.cbh_product(x, &crate::GroupPoint(x.clone()).inverse())?;
        inverse = inverse.max(sup_abs(&e) / (1.0 + sup_abs(x)));
        for a in [0.5, 2.0, 3.7] {
            let lhs = g.dilate_point(a, &g.cbh_product(x, y)?)?;
            let rhs = g.cbh_product(&g.dilate_point(a, x)?, &g.dilate_point(a, y)?)?;
            auto = auto.max(sup_diff(&lhs, &rhs) / (1.0 + sup_abs(&lhs)));
            let nx = g.hom_norm(x);
            if nx > 0.0 {
                homog = homog.max((g.hom_norm(&g.dilate_point(a, x)?) - a * nx).abs() / (a * nx));
            }
        }
    }
    Ok(vec![
        ("associativity".into(), assoc),
        ("inverse".into(), inverse),
        ("automorphism".into(), auto),
        ("homogeneity".into(), homog),
    ])
}

fn moments_table(name: &str, k: &GridFunction, n_max: u32, tol: f64) -> Result<Table> {
    let rep = k.moment_report(n_max, tol)?;
    let mut t = Table::new(name, &["index", "degree", "re", "im", "relative"]);
    for e in &rep.entries {
        t.push(vec![
            e.index.to_string(),
            e.degree.to_string(),
            fmt_f(e.value.re),
            fmt_f(e.value.im),
            fmt_f(e.relative),
        ]);
    }
    Ok(t)
}

/// Closed-form heat kernel (4πt)^{−n/2} e^{−|x|²/4t} of −Δ on ℝⁿ.
pub fn euclidean_heat(spec: Arc<GridSpec>, t: f64) -> Result<GridFunction> {
    let n = spec.dim() as i32;
    let c = (4.0 * std::f64::consts::PI * t).powf(-0.5 * n as f64);
    GridFunction::sample_real(spec, move |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        c * (-r2 / (4.0 * t)).exp()
    })
}

/// Moments are checked through homogeneous degree 4.
const MOMENT_DEGREES: u32 = 5;

fn kernel(ctx: &Context) -> Result<SuiteReport> {
    let kc = ctx
        .cfg
        .kernel
        .ok_or_else(|| Error::Config("the kernel suite needs a `kernel` entry".into()))?;
    let spec = ctx.spec()?;
    let model = ctx.model(&spec)?;
    let cal = calibration::defaults();
    let mut rep = SuiteReport::new(Suite::Kernel.name());
    let (moment_tol, moment_prov) = ctx.moment_tolerance(&spec);
    let (k, label) = match kc {
        KernelConfig::Heat { t } => (model.heat_kernel(t)?, format!("heat-{t}")),
        KernelConfig::Lp { xi_center, base } => {
            let p = LpProfile::new(xi_center, base)?;
            (model.spectral_kernel(&|x| p.psi_hat(x))?, format!("lp-{xi_center}-a{base}"))
        }
        KernelConfig::MexicanHat { k } => {
            let w = mexican_hat(model.clone(), k)?;
            ((*w.psi()?).clone(), w.label.clone())
        }
        KernelConfig::One => (model.spectral_kernel(&|_| 1.0)?, "identity".into()),
    };
    let kernel_tol = ctx.cfg.tolerances.kernel.unwrap_or(cal.tolerance.heat_kernel);
    let kernel_prov = if ctx.cfg.tolerances.kernel.is_some() { CONFIG } else { FIXED };
    match kc {
        KernelConfig::Heat { t } if spec.group().is_abelian() => {
            let exact = euclidean_heat(spec.clone(), t)?;
            let err = k.sub(&exact)?.max_abs();
            rep.checks.push(Check::at_most(format!("{label}/closed-form-max-abs"), err, kernel_tol, kernel_prov));
        }
        KernelConfig::Lp { .. } => {
            let r = k.moment_report(MOMENT_DEGREES, moment_tol)?;
            rep.checks.push(Check::at_most(
                format!("{label}/moments-through-degree-4"),
                r.worst_below(MOMENT_DEGREES),
                moment_tol,
                moment_prov.clone(),
            ));
        }
        KernelConfig::MexicanHat { k: order } => {
            let r = k.moment_report(2 * order, moment_tol)?;
            rep.checks.push(Check::at_most(
                format!("{label}/moments-below-degree-{}", 2 * order),
                r.worst_below(2 * order),
                moment_tol,
                moment_prov.clone(),
            ));
        }
        KernelConfig::One => {
            let delta = GridFunction::delta(spec.clone());
            let err = k.sub(&delta)?.max_abs() / delta.max_abs();
            rep.checks.push(Check::at_most(format!("{label}/delta"), err, 1e-10, FIXED));
        }
        _ => {}
    }
    rep.tables.push(moments_table("moments", &k, MOMENT_DEGREES, moment_tol)?);
    rep.kernels.push((label, k));
    Ok(rep)
}

/// Largest deviation of Σ_{|j|≤J} ψ̂(a^{−2j}ξ)² from 1 on the resolved band, over a
/// logarithmic sample of the band.
pub fn partition_deviation(p: &LpProfile, j_max: i32, samples: usize) -> f64 {
    let a2 = p.base * p.base;
    let lo = (p.xi_center * a2.powi(-j_max)).ln();
    let hi = (p.xi_center * a2.powi(j_max)).ln();
    (0..=samples)
        .map(|i| {
            let xi = (lo + (hi - lo) * i as f64 / samples as f64).exp();
            (p.partition_sum(xi, j_max) - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

fn lp_build(ctx: &Context) -> Result<SuiteReport> {
    if ctx.cfg.profiles.is_empty() {
        return Err(Error::Config("the profile list is empty".into()));
    }
    let spec = ctx.spec()?;
    let model = ctx.model(&spec)?;
    let j_max = ctx.cfg.j_max()?;
    let cal = calibration::defaults();
    let (tol, prov) = ctx.moment_tolerance(&spec);
    let part_tol = ctx.cfg.tolerances.partition.unwrap_or(cal.tolerance.partition);
    let part_prov = if ctx.cfg.tolerances.partition.is_some() { CONFIG } else { FIXED };
    let mut rep = SuiteReport::new(Suite::LpBuild.name());
    let mut t = Table::new("pairs", &["pair", "xi_center", "base", "moment_order", "partition_deviation", "worst_moment"]);
    for pair in ctx.pairs(&model)? {
        let psi = pair.psi()?;
        let dev = partition_deviation(&pair.profile, j_max, 4096);
        let worst = psi.moment_report(MOMENT_DEGREES, tol)?.worst_below(MOMENT_DEGREES);
        t.push(vec![
            pair.label.clone(),
            fmt_f(pair.profile.xi_center),
            fmt_f(pair.base()),
            pair.moment_order.to_string(),
            fmt_f(dev),
            fmt_f(worst),
        ]);
        rep.checks.push(Check::at_most(format!("{}/partition", pair.label), dev, part_tol, part_prov));
        rep.checks.push(Check::at_most(format!("{}/moments", pair.label), worst, tol, prov.clone()));
        rep.kernels.push((format!("psi-{}", pair.label), (*psi).clone()));
        rep.kernels.push((format!("eta-{}", pair.label), (*pair.eta()?).clone()));
    }
    rep.tables.push(t);
    Ok(rep)
}

fn besov(ctx: &Context) -> Result<SuiteReport> {
    let spec = ctx.spec()?;
    let model = ctx.model(&spec)?;
    let params = ctx.cfg.besov_params()?;
    let bank = ctx.bank(&spec)?;
    let pairs = ctx.pairs(&model)?;
    if pairs.is_empty() {
        return Err(Error::Config("the profile list is empty".into()));
    }
    let mut rep = SuiteReport::new(Suite::Besov.name());
    let mut t = Table::new("norms", &["group", "pair", "s", "p", "q", "f_id", "norm"]);
    let mut bad = 0usize;
    for pair in &pairs {
        for bp in &params {
            bp.check_moments(pair.moment_order)?;
        }
        for tf in &bank {
            for bp in &params {
                let v = besov_norm(&tf.f, pair, bp)?;
                if !v.is_finite() {
                    bad += 1;
                }
                t.push(vec![
                    spec.group().name().into(),
                    pair.label.clone(),
                    bp.s.to_string(),
                    bp.p.to_string(),
                    bp.q.to_string(),
                    tf.id.clone(),
                    fmt_f(v),
                ]);
            }
        }
    }
    rep.checks.push(Check::at_most("non-finite-norms", bad as f64, 0.0, FIXED));
    rep.tables.push(t);
    Ok(rep)
}

fn ratio_tables(rep: &mut SuiteReport, group: &str, ratios: &RatioReport, bound: f64, prov: &str) {
    let mut rows = Table::new("ratios", &["group", "pair1", "pair2", "s", "p", "q", "f_id", "ratio"]);
    for r in &ratios.rows {
        rows.push(vec![
            group.into(),
            r.pair1.clone(),
            r.pair2.clone(),
            r.s.to_string(),
            r.p.to_string(),
            r.q.to_string(),
            r.f_id.clone(),
            fmt_f(r.ratio),
        ]);
    }
    let mut sums = Table::new("spread", &["group", "pair1", "pair2", "s", "p", "q", "min", "max", "spread", "n"]);
    for s in &ratios.summaries {
        sums.push(vec![
            group.into(),
            s.pair1.clone(),
            s.pair2.clone(),
            s.s.to_string(),
            s.p.to_string(),
            s.q.to_string(),
            fmt_f(s.min),
            fmt_f(s.max),
            fmt_f(s.spread),
            s.n.to_string(),
        ]);
        rep.checks.push(Check::at_most(
            format!("{}/{}/s={},p={},q={}", s.pair1, s.pair2, s.s, s.p, s.q),
            s.spread,
            bound,
            prov,
        ));
    }
    let mut skipped = Table::new("skipped", &["f_id"]);
    for id in &ratios.skipped {
        skipped.push(vec![id.clone()]);
    }
    rep.tables.extend([rows, sums, skipped]);
}

fn equivalence(ctx: &Context) -> Result<SuiteReport> {
    if ctx.cfg.profiles.len() < 2 {
        return Err(Error::Config("the equivalence suite needs at least two profiles".into()));
    }
    let spec = ctx.spec()?;
    let params = ctx.cfg.besov_params()?;
    let model = ctx.model(&spec)?;
    let bank = ctx.bank(&spec)?;
    let pairs = ctx.pairs(&model)?;
    let cal = calibration::defaults();
    let calibrated = if spec.group().is_abelian() && spec.dim() == 1 {
        cal.bound.spread_for_base(pairs[0].base())
    } else {
        None
    };
    let (bound, prov) = ctx.bound(ctx.cfg.tolerances.spread, calibrated, "spread")?;
    let ratios = equivalence_experiment(&pairs, &bank, &params)?;
    let mut rep = SuiteReport::new(Suite::Equivalence.name());
    ratio_tables(&mut rep, spec.group().name(), &ratios, bound, &prov);
    Ok(rep)
}

fn cwt_equivalence(ctx: &Context) -> Result<SuiteReport> {
    let spec = ctx.spec()?;
    let params = ctx.cfg.besov_params()?;
    let model = ctx.model(&spec)?;
    let wavelets = ctx.wavelets(&model)?;
    let pairs = ctx.pairs(&model)?;
    let pair = pairs
        .first()
        .ok_or_else(|| Error::Config("the continuous comparison needs one LP profile".into()))?;
    let bank = ctx.bank(&spec)?;
    let grid = ctx.scale_grid()?;
    let cal = calibration::defaults();
    let calibrated = (spec.group().is_abelian() && spec.dim() == 1).then_some(&cal.bound.spread_cwt);
    let (bound, prov) = ctx.bound(ctx.cfg.tolerances.spread, calibrated, "spread")?;
    let ratios = cwt_equivalence_experiment(&wavelets, pair, &bank, &params, &grid)?;
    let mut rep = SuiteReport::new(Suite::CwtEquivalence.name());
    ratio_tables(&mut rep, spec.group().name(), &ratios, bound, &prov);
    let mut consts = Table::new("wavelets", &["wavelet", "c_psi", "moment_order"]);
    for w in &wavelets {
        consts.push(vec![w.label.clone(), fmt_f(w.c_psi), w.moment_order.to_string()]);
    }
    rep.tables.push(consts);
    Ok(rep)
}

/// Slopes of ‖ψ ∗ D_t G‖_∞ for small t and ‖G ∗ D_tψ‖_∞ for large t, G a Gaussian.
pub fn decay_pair(
    w: &AdmissibleWavelet,
    sigma: f64,
    small: &DecaySettings,
    large: &DecaySettings,
) -> Result<[crate::littlewood_paley::DecayResult; 2]> {
    if w.moment_order == 0 {
        return Err(Error::UnderResolved(format!("{} has no verified vanishing moments", w.label)));
    }
    let spec = w.model().spec().clone();
    let gauss = KernelFamily::Analytic {
        spec: spec.clone(),
        f: gaussian_profile(spec.group(), sigma),
    };
    let psi = w.psi()?;
    let s = decay_slope_experiment(&gauss, &psi, w.moment_order, DecayDirection::SmallT, small)?;
    let g = gaussian(spec, sigma)?;
    let l = decay_slope_experiment(w.family(), &g, w.moment_order, DecayDirection::LargeT, large)?;
    Ok([s, l])
}

fn decay(ctx: &Context) -> Result<SuiteReport> {
    let spec = ctx.spec()?;
    let model = ctx.model(&spec)?;
    let wavelets = ctx.wavelets(&model)?;
    let cal = calibration::defaults();
    let d = &cal.decay;
    let dc = ctx.cfg.decay.clone();
    let sigma = dc.as_ref().map(|c| c.sigma).unwrap_or(if spec.group().is_abelian() {
        d.sigma_real_line
    } else {
        d.sigma_heisenberg
    });
    let settings = |win: Option<[i32; 2]>, def: [i32; 2]| {
        let [lo, hi] = win.unwrap_or(def);
        DecaySettings {
            ts: geometric_sweep(2.0, lo, hi),
            window_radius: dc.as_ref().and_then(|c| c.window_radius).unwrap_or(d.window_radius),
            floor: dc.as_ref().and_then(|c| c.floor).unwrap_or(d.floor),
        }
    };
    let small = settings(dc.as_ref().and_then(|c| c.small_t), d.small_t);
    let large = settings(dc.as_ref().and_then(|c| c.large_t), d.large_t);
    let tol = ctx.cfg.tolerances.slope.unwrap_or(cal.tolerance.slope);
    let prov = if ctx.cfg.tolerances.slope.is_some() { CONFIG } else { FIXED };
    let mut rep = SuiteReport::new(Suite::Decay.name());
    let mut t = Table::new(
        "slopes",
        &["group", "wavelet", "direction", "k", "expected", "slope", "n_samples", "truncated"],
    );
    for w in &wavelets {
        for r in decay_pair(w, sigma, &small, &large)? {
            let dir = match r.direction {
                DecayDirection::SmallT => "small-t",
                DecayDirection::LargeT => "large-t",
            };
            t.push(vec![
                spec.group().name().into(),
                w.label.clone(),
                dir.into(),
                r.k.to_string(),
                fmt_f(r.expected),
                fmt_f(r.slope),
                r.samples.len().to_string(),
                r.truncated.to_string(),
            ]);
            rep.checks.push(Check::at_most(
                format!("{}/{dir}", w.label),
                (r.slope - r.expected).abs(),
                tol,
                prov,
            ));
        }
    }
    rep.tables.push(t);
    Ok(rep)
}
