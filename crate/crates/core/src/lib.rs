pub mod calibration;
pub mod error;
pub mod experiments;
pub mod family;
pub mod fourier;
pub mod grid;
pub mod group;
pub mod io;
pub mod littlewood_paley;
pub mod spectral;
pub mod testbank;
pub mod wavelet;

mod convolution;
mod lanczos;

pub use error::{Error, Result};
pub use grid::{Exponent, GridFunction, GridSpec};
pub use group::{GroupPoint, MultiIndex, StratifiedGroup};
pub use lanczos::KrylovSettings;
pub use spectral::{Multiplier, SpectralModel};
