//! One-parameter dilation families t ↦ D_t k of convolution kernels.
//!
//! Interpolating a sampled kernel to dilate it loses the kernel's spectral localization
//! once t^{-2} pushes its band past the grid's Nyquist range, and zero-moment structure
//! with it. Kernels defined by a multiplier are therefore dilated in the spectral
//! variable instead: since 𝓛 is homogeneous of degree 2, D_t(ĝ(𝓛)δ) = ĝ(t^{-2}𝓛)δ.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fourier;
use crate::grid::{GridFunction, GridSpec};
use crate::spectral::{Multiplier, SpectralModel};

pub type Pointwise = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum KernelFamily {
    /// ĝ(t^{-2}𝓛)δ from the discretized sub-Laplacian.
    Spectral {
        model: Arc<SpectralModel>,
        multiplier: Multiplier,
    },
    /// ĝ(t^{-2}|ω|²) on ℝⁿ, by inverse FFT.
    Fourier {
        spec: Arc<GridSpec>,
        multiplier: Multiplier,
    },
    /// A sampled kernel dilated by interpolation.
    Sampled(GridFunction),
    /// A closed-form kernel, resampled exactly at every scale.
    Analytic {
        spec: Arc<GridSpec>,
        f: Pointwise,
    },
    Sum(Vec<KernelFamily>),
}

impl std::fmt::Debug for KernelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelFamily::Spectral { .. } => write!(f, "Spectral"),
            KernelFamily::Fourier { .. } => write!(f, "Fourier"),
            KernelFamily::Sampled(_) => write!(f, "Sampled"),
            KernelFamily::Analytic { .. } => write!(f, "Analytic"),
            KernelFamily::Sum(v) => f.debug_list().entries(v).finish(),
        }
    }
}

impl KernelFamily {
    pub fn spectral(model: Arc<SpectralModel>, multiplier: Multiplier) -> Self {
        KernelFamily::Spectral { model, multiplier }
    }

    pub fn spec(&self) -> Arc<GridSpec> {
        match self {
            KernelFamily::Spectral { model, .. } => model.spec().clone(),
            KernelFamily::Fourier { spec, .. } => spec.clone(),
            KernelFamily::Sampled(g) => g.spec().clone(),
            KernelFamily::Analytic { spec, .. } => spec.clone(),
            KernelFamily::Sum(v) => v[0].spec(),
        }
    }

    /// D_t of the base kernel.
    pub fn at_scale(&self, t: f64) -> Result<GridFunction> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidDilation(t));
        }
        let s = t.powi(-2);
        match self {
            KernelFamily::Spectral { model, multiplier } => {
                model.spectral_kernel(&|xi| multiplier(s * xi))
            }
            KernelFamily::Fourier { spec, multiplier } => {
                fourier::multiplier_kernel(spec.clone(), &|xi| multiplier(s * xi))
            }
            KernelFamily::Sampled(g) => g.dilate(t),
            KernelFamily::Analytic { spec, f } => {
                let g = spec.group();
                let tq = t.powi(g.homogeneous_dim() as i32);
                let weights: Vec<f64> = g.layers().iter().map(|&n| t.powi(n as i32)).collect();
                GridFunction::sample_real(spec.clone(), |x| {
                    let y: Vec<f64> = x.iter().zip(&weights).map(|(v, w)| v * w).collect();
                    tq * f(&y)
                })
            }
            KernelFamily::Sum(parts) => {
                let mut it = parts.iter();
                let first = it
                    .next()
                    .ok_or_else(|| Error::Config("empty kernel sum".into()))?
                    .at_scale(t)?;
                it.try_fold(first, |acc, p| acc.add(&p.at_scale(t)?))
            }
        }
    }

    pub fn base(&self) -> Result<GridFunction> {
        self.at_scale(1.0)
    }

    /// The multiplier when the family is purely spectral or Fourier.
    pub fn multiplier(&self) -> Option<&Multiplier> {
        match self {
            KernelFamily::Spectral { multiplier, .. } | KernelFamily::Fourier { multiplier, .. } => {
                Some(multiplier)
            }
            _ => None,
        }
    }
}
