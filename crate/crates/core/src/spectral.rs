//! The discretized sub-Laplacian and its spectral functional calculus g ↦ g(𝓛)δ.
//!
//! Each squared field Y_i² is discretized along its own flow:
//! Y_i² f(x) ≈ (f(x·he_i) − 2f(x) + f(x·(−h)e_i)) / h², with the shifted points
//! evaluated exactly by the group product and f interpolated multilinearly. On
//! step-2 groups the transpose of the shift by h is the shift by −h, so the assembled
//! matrix is symmetric, positive semidefinite and has non-positive off-diagonal
//! entries.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use faer::{Mat, Side};
use num_complex::Complex64;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use sprs::{CsMat, TriMat};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};
use crate::group::{StratifiedGroup, VectorField};
use crate::lanczos::{self, KrylovSettings};

/// Above this many nodes the model switches from a dense eigendecomposition to
/// Krylov evaluation of matrix functions.
pub const DEFAULT_DENSE_LIMIT: usize = 4500;

/// Minimum points per axis for assembly.
pub const MIN_POINTS: usize = 9;

/// Relative asymmetry tolerated before symmetrization.
const ASYMMETRY_TOL: f64 = 1e-6;

const CACHE_MAGIC: &[u8; 8] = b"STRATEIG";
const CACHE_VERSION: u32 = 1;
const ASSEMBLY_VERSION: &str = "flow-fd-1";

/// A scalar multiplier ξ ↦ ĝ(ξ) on [0, ∞).
pub type Multiplier = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Wraps a closure as a [`Multiplier`].
pub fn multiplier(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Multiplier {
    Arc::new(f)
}

/// The coordinate expression of the left-invariant field Y_i (0-based).
pub fn left_invariant_field(g: &StratifiedGroup, i: usize) -> Result<VectorField> {
    g.left_invariant_field(i)
}

#[derive(Clone, Debug)]
pub struct BuildOptions {
    pub dense_limit: usize,
    pub cache_dir: Option<PathBuf>,
    pub krylov: KrylovSettings,
    /// Lanczos steps of the reference run recorded in Krylov mode.
    pub reference_steps: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            dense_limit: DEFAULT_DENSE_LIMIT,
            cache_dir: None,
            krylov: KrylovSettings::default(),
            reference_steps: 200,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Dense,
    Krylov,
}

enum Spectrum {
    Dense {
        values: Vec<f64>,
        // column-major M × M
        vectors: Vec<f64>,
    },
    Krylov {
        ritz: Vec<f64>,
        settings: KrylovSettings,
    },
}

/// Discretized sub-Laplacian −Σ_{i≤l} Y_i² with its spectral data.
pub struct SpectralModel {
    spec: Arc<GridSpec>,
    l: usize,
    matrix: CsMat<f64>,
    asymmetry: f64,
    spectrum: Spectrum,
}

impl std::fmt::Debug for SpectralModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralModel")
            .field("points", &self.spec.points())
            .field("l", &self.l)
            .field("mode", &self.mode())
            .finish()
    }
}

/// Builds the model with default options (no cache).
pub fn build_sublaplacian(spec: Arc<GridSpec>, l: usize) -> Result<SpectralModel> {
    SpectralModel::build(spec, l, &BuildOptions::default())
}

pub fn heat_kernel(model: &SpectralModel, t: f64) -> Result<GridFunction> {
    model.heat_kernel(t)
}

pub fn spectral_kernel(model: &SpectralModel, ghat: &dyn Fn(f64) -> f64) -> Result<GridFunction> {
    model.spectral_kernel(ghat)
}

/// Assembles the symmetrized matrix and reports the relative asymmetry seen before
/// symmetrization.
pub fn assemble(spec: &GridSpec, l: usize) -> Result<(CsMat<f64>, f64)> {
    let g = spec.group();
    if l != g.first_layer_dim() {
        return Err(Error::InvalidStructure(format!(
            "sub-Laplacian uses the first layer: expected l = {}, got {l}",
            g.first_layer_dim()
        )));
    }
    for (axis, &p) in spec.points().iter().enumerate() {
        if p < MIN_POINTS {
            return Err(Error::GridTooCoarse {
                axis,
                points: p,
                min: MIN_POINTS,
            });
        }
    }
    let m = spec.len();
    let n = spec.dim();
    let rows: Vec<Vec<(usize, f64)>> = (0..m)
        .into_par_iter()
        .map_init(
            || (vec![0.0; n], vec![0.0; n], vec![0.0; n], Vec::new()),
            |(x, step, z, st), r| {
                spec.node_into(r, x);
                let mut row = Vec::with_capacity(1 + 4 * l);
                let mut diag = 0.0;
                for i in 0..l {
                    let h = spec.spacing()[i];
                    let inv = 1.0 / (h * h);
                    diag += 2.0 * inv;
                    for sign in [1.0, -1.0] {
                        step.iter_mut().for_each(|v| *v = 0.0);
                        step[i] = sign * h;
                        g.product_into(x, step, z);
                        spec.stencil(z, st);
                        row.extend(st.iter().map(|&(c, w)| (c, -w * inv)));
                    }
                }
                row.push((r, diag));
                row
            },
        )
        .collect();
    let nnz: usize = rows.iter().map(Vec::len).sum();
    let mut tri = TriMat::with_capacity((m, m), nnz);
    for (r, row) in rows.into_iter().enumerate() {
        for (c, v) in row {
            tri.add_triplet(r, c, v);
        }
    }
    let a: CsMat<f64> = tri.to_csr();
    let at: CsMat<f64> = a.transpose_view().to_csr();
    let scale = a.data().iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let diff = &a - &at;
    let asym = diff.data().iter().fold(0.0f64, |s, v| s.max(v.abs())) / scale;
    if asym > ASYMMETRY_TOL {
        return Err(Error::AsymmetricAssembly(asym));
    }
    let sum = &a + &at;
    let sym = sum.map(|v| 0.5 * v);
    Ok((sym, asym))
}

impl SpectralModel {
    pub fn build(spec: Arc<GridSpec>, l: usize, opts: &BuildOptions) -> Result<Self> {
        let (matrix, asymmetry) = assemble(&spec, l)?;
        let m = spec.len();
        let spectrum = if m <= opts.dense_limit {
            let key = cache_key(&spec, l);
            let cached = opts
                .cache_dir
                .as_deref()
                .map(|d| cache_path(d, &key))
                .and_then(|p| match read_cache(&p, &key, m) {
                    Ok(v) => v,
                    Err(e) => {
                        log::warn!("ignoring eigen cache {}: {e}", p.display());
                        None
                    }
                });
            let (values, vectors) = match cached {
                Some(v) => {
                    log::info!("loaded eigendecomposition for {m} nodes from cache");
                    v
                }
                None => {
                    log::info!("dense eigendecomposition of {m} nodes");
                    let v = dense_eigen(&matrix)?;
                    if let Some(dir) = &opts.cache_dir {
                        std::fs::create_dir_all(dir)?;
                        write_cache(&cache_path(dir, &key), &key, &v.0, &v.1)?;
                    }
                    v
                }
            };
            Spectrum::Dense { values, vectors }
        } else {
            log::info!("{m} nodes exceed the dense limit {}; using Krylov evaluation", opts.dense_limit);
            let delta = GridFunction::delta(spec.clone()).real_parts();
            let ritz = lanczos::ritz_values(&matrix, &delta, opts.reference_steps)?;
            Spectrum::Krylov {
                ritz,
                settings: opts.krylov,
            }
        };
        Ok(SpectralModel {
            spec,
            l,
            matrix,
            asymmetry,
            spectrum,
        })
    }

    pub fn spec(&self) -> &Arc<GridSpec> {
        &self.spec
    }

    pub fn first_layer_dim(&self) -> usize {
        self.l
    }

    pub fn matrix(&self) -> &CsMat<f64> {
        &self.matrix
    }

    /// Relative asymmetry ‖A − Aᵀ‖_max/‖A‖_max measured before symmetrization.
    pub fn assembly_asymmetry(&self) -> f64 {
        self.asymmetry
    }

    pub fn mode(&self) -> Mode {
        match self.spectrum {
            Spectrum::Dense { .. } => Mode::Dense,
            Spectrum::Krylov { .. } => Mode::Krylov,
        }
    }

    /// Eigenvalues (dense mode) or Ritz values of the reference run (Krylov mode),
    /// ascending, negatives clamped to zero.
    pub fn eigenvalues(&self) -> Vec<f64> {
        match &self.spectrum {
            Spectrum::Dense { values, .. } => values.iter().map(|v| v.max(0.0)).collect(),
            Spectrum::Krylov { ritz, .. } => ritz.iter().map(|v| v.max(0.0)).collect(),
        }
    }

    /// Raw eigenvalues before clamping (dense mode only).
    pub fn raw_eigenvalues(&self) -> Option<&[f64]> {
        match &self.spectrum {
            Spectrum::Dense { values, .. } => Some(values),
            Spectrum::Krylov { .. } => None,
        }
    }

    /// Column `r` of the eigenvector matrix (dense mode only).
    pub fn eigenvector(&self, r: usize) -> Option<&[f64]> {
        match &self.spectrum {
            Spectrum::Dense { vectors, .. } => {
                let m = self.spec.len();
                vectors.get(r * m..(r + 1) * m)
            }
            Spectrum::Krylov { .. } => None,
        }
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    /// A·v for a real coefficient vector.
    pub fn apply_matrix(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        lanczos::matvec(&self.matrix, v, &mut out);
        out
    }

    /// ĝ(𝓛)δ.
    pub fn spectral_kernel(&self, ghat: &dyn Fn(f64) -> f64) -> Result<GridFunction> {
        let delta = GridFunction::delta(self.spec.clone());
        self.apply_function(ghat, &delta)
    }

    /// e^{−t𝓛}δ.
    pub fn heat_kernel(&self, t: f64) -> Result<GridFunction> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidDilation(t));
        }
        self.spectral_kernel(&|x| (-t * x).exp())
    }

    /// ĝ(𝓛)u for an arbitrary grid function, through the spectral data.
    pub fn apply_function(&self, ghat: &dyn Fn(f64) -> f64, u: &GridFunction) -> Result<GridFunction> {
        if !crate::grid::same_spec(u.spec(), &self.spec) {
            return Err(Error::SpecMismatch);
        }
        let re: Vec<f64> = u.values().iter().map(|v| v.re).collect();
        let im: Vec<f64> = u.values().iter().map(|v| v.im).collect();
        let has_im = im.iter().any(|&v| v != 0.0);
        let fr = self.apply_real(ghat, &re)?;
        let fi = if has_im {
            Some(self.apply_real(ghat, &im)?)
        } else {
            None
        };
        let values: Vec<Complex64> = match fi {
            Some(fi) => fr.into_iter().zip(fi).map(|(a, b)| Complex64::new(a, b)).collect(),
            None => fr.into_iter().map(|a| Complex64::new(a, 0.0)).collect(),
        };
        GridFunction::new(self.spec.clone(), values)
    }

    fn apply_real(&self, ghat: &dyn Fn(f64) -> f64, u: &[f64]) -> Result<Vec<f64>> {
        match &self.spectrum {
            Spectrum::Dense { values, vectors } => {
                let m = self.spec.len();
                let mut out = vec![0.0; m];
                let nonzero: Vec<(usize, f64)> =
                    u.iter().copied().enumerate().filter(|(_, v)| *v != 0.0).collect();
                for (r, &lam) in values.iter().enumerate() {
                    let g = ghat(lam.max(0.0));
                    if g == 0.0 {
                        continue;
                    }
                    if !g.is_finite() {
                        return Err(Error::NonFinite(r));
                    }
                    let col = &vectors[r * m..(r + 1) * m];
                    let c: f64 = nonzero.iter().map(|&(i, v)| col[i] * v).sum::<f64>() * g;
                    if c != 0.0 {
                        for (o, v) in out.iter_mut().zip(col) {
                            *o += c * v;
                        }
                    }
                }
                Ok(out)
            }
            Spectrum::Krylov { settings, .. } => {
                Ok(lanczos::apply_function(&self.matrix, u, &|x| ghat(x.max(0.0)), *settings)?)
            }
        }
    }
}

fn dense_eigen(a: &CsMat<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = a.rows();
    let mut dense = Mat::<f64>::zeros(m, m);
    for (v, (r, c)) in a.iter() {
        dense[(r, c)] = *v;
    }
    let e = dense
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    drop(dense);
    let (u, s) = (e.U(), e.S());
    let values: Vec<f64> = (0..m).map(|i| s[i]).collect();
    let mut vectors = Vec::with_capacity(m * m);
    for r in 0..m {
        vectors.extend(u.col(r).iter().copied());
    }
    Ok((values, vectors))
}

fn cache_key(spec: &GridSpec, l: usize) -> [u8; 32] {
    let desc = serde_json::json!({
        "spec": spec.to_file(),
        "l": l,
        "assembly": ASSEMBLY_VERSION,
    });
    Sha256::digest(desc.to_string().as_bytes()).into()
}

fn cache_path(dir: &Path, key: &[u8; 32]) -> PathBuf {
    let hex: String = key[..12].iter().map(|b| format!("{b:02x}")).collect();
    dir.join(format!("eigen-{hex}.bin"))
}

fn write_cache(path: &Path, key: &[u8; 32], values: &[f64], vectors: &[f64]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&CACHE_VERSION.to_le_bytes())?;
        w.write_all(key)?;
        w.write_all(&(values.len() as u64).to_le_bytes())?;
        w.write_all(&((vectors.len() / values.len().max(1)) as u64).to_le_bytes())?;
        for v in values.iter().chain(vectors) {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
    }
    std::fs::rename(tmp, path)?;
    Ok(())
}

type Decomposition = (Vec<f64>, Vec<f64>);

fn read_cache(path: &Path, key: &[u8; 32], m: usize) -> Result<Option<Decomposition>> {
    let Ok(file) = File::open(path) else {
        return Ok(None);
    };
    let mut r = BufReader::new(file);
    let mut head = [0u8; 8 + 4 + 32 + 16];
    r.read_exact(&mut head)?;
    if &head[..8] != CACHE_MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let version = u32::from_le_bytes(head[8..12].try_into().unwrap());
    if version != CACHE_VERSION {
        return Err(Error::Cache(format!("unsupported version {version}")));
    }
    if &head[12..44] != key {
        return Err(Error::Cache("key mismatch".into()));
    }
    let r_count = u64::from_le_bytes(head[44..52].try_into().unwrap()) as usize;
    let rows = u64::from_le_bytes(head[52..60].try_into().unwrap()) as usize;
    if r_count != m || rows != m {
        return Err(Error::Cache(format!("size {r_count}x{rows}, expected {m}")));
    }
    let mut bytes = Vec::with_capacity(8 * (m + m * m));
    r.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * (m + m * m) {
        return Err(Error::Cache("truncated payload".into()));
    }
    let mut all = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let values: Vec<f64> = all.by_ref().take(m).collect();
    let vectors: Vec<f64> = all.collect();
    Ok(Some((values, vectors)))
}
