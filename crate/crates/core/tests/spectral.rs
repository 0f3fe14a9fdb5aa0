use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use strata::spectral::{BuildOptions, Mode};
use strata::{Error, GridFunction, GridSpec, SpectralModel, StratifiedGroup};

fn line_spec(n: usize) -> Arc<GridSpec> {
    Arc::new(GridSpec::new(StratifiedGroup::abelian(1), vec![16.0], vec![n]).unwrap())
}

fn line_model() -> &'static SpectralModel {
    static M: OnceLock<SpectralModel> = OnceLock::new();
    M.get_or_init(|| SpectralModel::build(line_spec(513), 1, &BuildOptions::default()).unwrap())
}

fn h1_model() -> &'static SpectralModel {
    static M: OnceLock<SpectralModel> = OnceLock::new();
    M.get_or_init(|| {
        let spec = GridSpec::new(StratifiedGroup::heisenberg(), vec![4.0, 4.0, 6.0], vec![11, 11, 17]).unwrap();
        SpectralModel::build(Arc::new(spec), 2, &BuildOptions::default()).unwrap()
    })
}

fn max_rel(a: &GridFunction, b: &GridFunction) -> f64 {
    a.sub(b).unwrap().max_abs() / b.max_abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn heat_semigroup(s in 0.05..2.0f64, t in 0.05..2.0f64) {
        for m in [line_model(), h1_model()] {
            let hs = m.heat_kernel(s).unwrap();
            let hst = m.apply_function(&|x| (-t * x).exp(), &hs).unwrap();
            let direct = m.heat_kernel(s + t).unwrap();
            prop_assert!(max_rel(&hst, &direct) < 1e-9);
        }
    }

    #[test]
    fn functional_calculus_is_multiplicative(a in 0.1..3.0f64, b in 0.1..3.0f64) {
        let m = line_model();
        let f = |x: f64| 1.0 / (1.0 + a * x);
        let g = |x: f64| x * (-b * x).exp();
        let fg = m.spectral_kernel(&|x| f(x) * g(x)).unwrap();
        let composed = m.apply_function(&f, &m.spectral_kernel(&g).unwrap()).unwrap();
        prop_assert!(max_rel(&composed, &fg) < 1e-9);
    }
}

#[test]
fn identity_multiplier_gives_the_delta() {
    for m in [line_model(), h1_model()] {
        let k = m.spectral_kernel(&|_| 1.0).unwrap();
        let d = GridFunction::delta(m.spec().clone());
        assert!(max_rel(&k, &d) < 1e-10);
    }
}

#[test]
fn line_heat_kernel_matches_the_gaussian() {
    let m = line_model();
    for t in [0.5, 1.0, 2.0] {
        let h = m.heat_kernel(t).unwrap();
        let exact =
            GridFunction::sample_real(m.spec().clone(), |x| (-x[0] * x[0] / (4.0 * t)).exp() / (4.0 * PI * t).sqrt())
                .unwrap();
        assert!(max_rel(&h, &exact) < 1e-3, "t = {t}: {}", max_rel(&h, &exact));
        assert!((h.integral().re - 1.0).abs() < 1e-3);
    }
}

#[test]
fn line_eigenvalues_match_the_dirichlet_spectrum() {
    let m = line_model();
    let ev = m.eigenvalues();
    assert_eq!(ev.len(), 513);
    assert!(ev.windows(2).all(|w| w[0] <= w[1]));
    // −d²/dx² on (−L, L) with zero boundary values: (πk / 2L)², L = 16 + h
    let h = 32.0 / 512.0;
    let l = 16.0 + h;
    for k in 1..=20 {
        let exact = (PI * k as f64 / (2.0 * l)).powi(2);
        assert!((ev[k - 1] - exact).abs() < 1e-2 * exact, "k = {k}: {} vs {exact}", ev[k - 1]);
    }
}

#[test]
fn heisenberg_heat_kernel_properties() {
    let m = h1_model();
    assert_eq!(m.mode(), Mode::Dense);
    assert!(m.assembly_asymmetry() < 1e-12);
    let h = m.heat_kernel(0.5).unwrap();
    assert!(h.max_imag() == 0.0);
    // invariant under x ↦ x⁻¹ up to discretization error (1.5% on this grid)
    assert!(max_rel(&h.involution(), &h) < 3e-2);
    let peak = h.value_at_origin().re;
    assert!(h.values().iter().all(|v| v.re <= peak * (1.0 + 1e-12)));
    assert!(m.raw_eigenvalues().unwrap().iter().all(|&v| v > -1e-9));
}

#[test]
fn krylov_mode_agrees_with_dense() {
    let spec = line_spec(257);
    let dense = SpectralModel::build(spec.clone(), 1, &BuildOptions::default()).unwrap();
    let opts = BuildOptions {
        dense_limit: 0,
        ..BuildOptions::default()
    };
    let krylov = SpectralModel::build(spec, 1, &opts).unwrap();
    assert_eq!(krylov.mode(), Mode::Krylov);
    assert!(krylov.eigenvector(0).is_none());
    for t in [0.2, 1.0] {
        let a = krylov.heat_kernel(t).unwrap();
        let b = dense.heat_kernel(t).unwrap();
        assert!(max_rel(&a, &b) < 1e-8, "t = {t}: {}", max_rel(&a, &b));
    }
    assert!((krylov.lambda_max() - dense.lambda_max()).abs() < 1e-6 * dense.lambda_max());
}

#[test]
fn eigen_cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let opts = BuildOptions {
        cache_dir: Some(dir.path().to_path_buf()),
        ..BuildOptions::default()
    };
    let spec = line_spec(129);
    let first = SpectralModel::build(spec.clone(), 1, &opts).unwrap();
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    let second = SpectralModel::build(spec, 1, &opts).unwrap();
    assert_eq!(first.raw_eigenvalues(), second.raw_eigenvalues());
    assert_eq!(first.heat_kernel(1.0).unwrap(), second.heat_kernel(1.0).unwrap());
}

#[test]
fn build_rejects_bad_input() {
    let coarse = Arc::new(GridSpec::new(StratifiedGroup::abelian(1), vec![1.0], vec![5]).unwrap());
    assert!(matches!(
        SpectralModel::build(coarse, 1, &BuildOptions::default()),
        Err(Error::GridTooCoarse { .. })
    ));
    assert!(SpectralModel::build(line_spec(33), 2, &BuildOptions::default()).is_err());
    assert!(matches!(line_model().heat_kernel(-1.0), Err(Error::InvalidDilation(_))));
    let other = GridFunction::delta(line_spec(33));
    assert!(matches!(line_model().apply_function(&|x| x, &other), Err(Error::SpecMismatch)));
}

#[test]
fn sublaplacian_is_self_adjoint() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for m in [line_model(), h1_model()] {
        let n = m.spec().len();
        for _ in 0..4 {
            let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let g: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
            let (af, ag) = (m.apply_matrix(&f), m.apply_matrix(&g));
            let scale = dot(&af, &af).sqrt() * dot(&g, &g).sqrt();
            assert!((dot(&af, &g) - dot(&f, &ag)).abs() < 1e-10 * scale);
        }
    }
}

#[test]
fn heat_kernels_convolve_to_the_sum_of_times() {
    let m = line_model();
    for (s, t) in [(0.5, 0.5), (1.0, 2.0)] {
        let c = m.heat_kernel(s).unwrap().convolve(&m.heat_kernel(t).unwrap()).unwrap();
        let err = c.relative_l2_error(&m.heat_kernel(s + t).unwrap()).unwrap();
        assert!(err < 2e-2, "{s} {t}: {err}");
    }
}

#[test]
fn dilated_heat_kernel_matches_the_rescaled_time() {
    // D_a e^{−t𝓛}δ = e^{−t𝓛/a²}δ
    let m = line_model();
    let d = m.heat_kernel(1.0).unwrap().dilate(2.0).unwrap();
    let err = d.relative_l2_error(&m.heat_kernel(0.25).unwrap()).unwrap();
    assert!(err < 2e-2, "{err}");
}
