use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use crate::calibration;
use crate::error::{Error, Result};
use crate::grid::{Exponent, GridSpec};
use crate::group::StratifiedGroup;
use crate::littlewood_paley::BesovParams;

/// Either a catalog identifier or a structure-constants file.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum GroupRef {
    Id { id: String },
    Structure { structure: PathBuf },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_widths: Vec<f64>,
    pub points: Vec<usize>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub xi_center: f64,
    #[serde(default = "default_base")]
    pub base: f64,
}

fn default_base() -> f64 {
    2.0
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WaveletConfig {
    MexicanHat { k: u32 },
    HeatDifference { t1: f64, t2: f64 },
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamConfig {
    pub s: f64,
    pub p: Exponent,
    pub q: Exponent,
}

/// An explicit list of (s, p, q) points or their Cartesian product.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum ParamSpec {
    List(Vec<ParamConfig>),
    Grid {
        s: Vec<f64>,
        p: Vec<Exponent>,
        q: Vec<Exponent>,
    },
}

impl Default for ParamSpec {
    fn default() -> Self {
        ParamSpec::List(Vec::new())
    }
}

impl ParamSpec {
    pub fn expand(&self) -> Vec<ParamConfig> {
        match self {
            ParamSpec::List(v) => v.clone(),
            ParamSpec::Grid { s, p, q } => s
                .iter()
                .flat_map(|&s| p.iter().flat_map(move |&p| q.iter().map(move |&q| ParamConfig { s, p, q })))
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleConfig {
    /// log2 of the window ends.
    pub lo: i32,
    pub hi: i32,
    pub per_octave: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BankConfig {
    pub sigma: Option<f64>,
    /// Restricts the bank to these identifiers.
    pub ids: Option<Vec<String>>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(tag = "ghat", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KernelConfig {
    Heat { t: f64 },
    Lp { xi_center: f64, base: f64 },
    MexicanHat { k: u32 },
    One,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayConfig {
    /// Length scale of the Gaussian on the other side of the convolution.
    pub sigma: f64,
    pub small_t: Option<[i32; 2]>,
    pub large_t: Option<[i32; 2]>,
    pub window_radius: Option<f64>,
    pub floor: Option<f64>,
}

/// Overrides of the calibrated tolerances.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    pub spread: Option<f64>,
    pub moment: Option<f64>,
    pub slope: Option<f64>,
    pub kernel: Option<f64>,
    pub partition: Option<f64>,
    pub group_algebra: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub group: GroupRef,
    pub grid: Option<GridConfig>,
    /// Number of first-layer fields in the sub-Laplacian; all of them by default.
    pub sublaplacian_dim: Option<usize>,
    #[serde(default)]
    pub profiles: Vec<ProfileConfig>,
    #[serde(default)]
    pub wavelets: Vec<WaveletConfig>,
    #[serde(default)]
    pub params: ParamSpec,
    /// Vanishing-moment order k the parameter grid is declared against.
    pub declared_k: Option<u32>,
    pub j_max: Option<i32>,
    pub scales: Option<ScaleConfig>,
    pub bank: Option<BankConfig>,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    pub kernel: Option<KernelConfig>,
    pub decay: Option<DecayConfig>,
    /// Points sampled by the group suites.
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    /// Directory that relative paths in the file resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        for (name, v) in [
            ("spread", t.spread),
            ("moment", t.moment),
            ("slope", t.slope),
            ("kernel", t.kernel),
            ("partition", t.partition),
            ("group_algebra", t.group_algebra),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::Config(format!("tolerance {name} must be positive, got {v}")));
                }
            }
        }
        let params = self.params.expand();
        if let Some(k) = self.declared_k {
            for p in &params {
                if p.s.abs() >= k as f64 {
                    return Err(Error::Config(format!(
                        "parameter s = {} violates the hypothesis k > |s| for the declared moment order k = {k}",
                        p.s
                    )));
                }
            }
        } else if !params.is_empty() {
            return Err(Error::Config("a parameter grid needs declared_k".into()));
        }
        if let Some(j) = self.j_max {
            if j < 0 {
                return Err(Error::Config(format!("j_max must be nonnegative, got {j}")));
            }
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn group(&self) -> Result<StratifiedGroup> {
        match &self.group {
            GroupRef::Id { id } => StratifiedGroup::by_name(id)
                .ok_or_else(|| Error::Config(format!("unknown group {id:?}"))),
            GroupRef::Structure { structure } => StratifiedGroup::load(&self.resolve(structure)),
        }
    }

    /// The configured grid, or the calibrated default for ℝ¹ and H¹.
    pub fn grid_spec(&self) -> Result<Arc<GridSpec>> {
        let g = self.group()?;
        let cal = calibration::defaults();
        let (w, n) = match &self.grid {
            Some(c) => (c.half_widths.clone(), c.points.clone()),
            None if g.is_abelian() && g.dim() == 1 => {
                (vec![cal.real_line.half_width], vec![cal.real_line.points])
            }
            None if g.dim() == 3 && g.step() == 2 => {
                (cal.heisenberg.half_widths.clone(), cal.heisenberg.points.clone())
            }
            None => return Err(Error::Config(format!("no default grid for group {}", g.name()))),
        };
        Ok(Arc::new(GridSpec::new(g, w, n)?))
    }

    pub fn besov_params(&self) -> Result<Vec<BesovParams>> {
        let params = self.params.expand();
        if params.is_empty() {
            return Err(Error::Config("the parameter grid is empty".into()));
        }
        let j = self.j_max()?;
        params.iter().map(|p| BesovParams::new(p.s, p.p, p.q, j)).collect()
    }

    pub fn j_max(&self) -> Result<i32> {
        let g = self.group()?;
        let cal = calibration::defaults();
        Ok(self.j_max.unwrap_or(if g.is_abelian() {
            cal.real_line.j_max
        } else {
            cal.heisenberg.j_max
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_inf_and_expands_grid() {
        let cfg = ExperimentConfig::from_json(
            r#"{"group": {"id": "r1"}, "declared_k": 2,
                "params": {"s": [-1, 0, 1], "p": [1, "inf"], "q": [2]}}"#,
        )
        .unwrap();
        let p = cfg.params.expand();
        assert_eq!(p.len(), 6);
        assert!(p[1].p.is_infinite());
    }

    #[test]
    fn rejects_s_at_moment_order() {
        let e = ExperimentConfig::from_json(
            r#"{"group": {"id": "r1"}, "declared_k": 1, "params": [{"s": 1, "p": 2, "q": 2}]}"#,
        )
        .unwrap_err();
        assert!(e.to_string().contains("k > |s|"), "{e}");
    }

    #[test]
    fn rejects_nonpositive_tolerance() {
        let e = ExperimentConfig::from_json(r#"{"group": {"id": "r1"}, "tolerances": {"spread": 0}}"#);
        assert!(e.is_err());
    }
}
