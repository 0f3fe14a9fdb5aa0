//! Frozen defaults and bounds, read from the versioned `calibration.toml`.

use std::sync::OnceLock;

use serde::Deserialize;

use crate::error::{Error, Result};

const SOURCE: &str = include_str!("../calibration.toml");

#[derive(Clone, Debug, Deserialize)]
pub struct Calibration {
    pub version: u32,
    pub run: String,
    pub real_line: RealLine,
    pub heisenberg: Heisenberg,
    pub scales: Scales,
    pub decay: Decay,
    pub tolerance: Tolerances,
    pub bound: Bounds,
}

#[derive(Clone, Debug, Deserialize)]
pub struct RealLine {
    pub half_width: f64,
    pub points: usize,
    pub refined_points: usize,
    pub bank_sigma: f64,
    pub xi_centers: Vec<f64>,
    pub j_max: i32,
}

#[derive(Clone, Debug, Deserialize)]
pub struct Heisenberg {
    pub half_widths: Vec<f64>,
    pub points: Vec<usize>,
    pub bank_sigma: f64,
    pub xi_center: f64,
    pub j_max: i32,
}

#[derive(Clone, Debug, Deserialize)]
pub struct Scales {
    pub lo: i32,
    pub hi: i32,
    pub per_octave: usize,
}

#[derive(Clone, Debug, Deserialize)]
pub struct Decay {
    pub sigma_real_line: f64,
    pub sigma_heisenberg: f64,
    pub window_radius: f64,
    pub floor: f64,
    pub small_t: [i32; 2],
    pub large_t: [i32; 2],
}

#[derive(Clone, Debug, Deserialize)]
pub struct Tolerances {
    pub group_algebra: f64,
    pub eigenvalue_rel: f64,
    pub heat_kernel: f64,
    pub fft_oracle: f64,
    pub partition: f64,
    pub moment: f64,
    pub reconstruction_real_line: f64,
    pub slope: f64,
    pub calderon: f64,
    pub refinement_drift: f64,
    pub reswap_variation: f64,
    pub c_psi: f64,
}

/// A calibrated bound and the run that produced it.
#[derive(Clone, Debug, Deserialize, PartialEq)]
pub struct Bound {
    pub value: f64,
    pub provenance: String,
}

#[derive(Clone, Debug, Deserialize)]
pub struct Bounds {
    pub heisenberg_moment: Bound,
    pub heisenberg_reconstruction: Bound,
    pub spread_base2: Bound,
    pub spread_base3: Bound,
    pub spread_cwt: Bound,
}

impl Bounds {
    /// The equivalence spread bound for a dilation base, if one was calibrated.
    pub fn spread_for_base(&self, base: f64) -> Option<&Bound> {
        if base == 2.0 {
            Some(&self.spread_base2)
        } else if base == 3.0 {
            Some(&self.spread_base3)
        } else {
            None
        }
    }
}

impl Calibration {
    pub fn parse(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Format(format!("calibration file: {e}")))
    }
}

/// The compiled-in calibration.
pub fn defaults() -> &'static Calibration {
    static CAL: OnceLock<Calibration> = OnceLock::new();
    CAL.get_or_init(|| Calibration::parse(SOURCE).expect("bundled calibration file parses"))
}
