//! Spectral analysis and parameter extraction.

mod dft;
mod fourier_map;
mod gaussian;
mod lorentzian;
mod lsq;

pub use dft::{dft, DftOptions, FIDTrace, Spectrum, Window};
pub use fourier_map::{fourier_map, overlay_curves, FourierMap, Overlay, OverlayPoint};
pub use gaussian::{
    double_gaussian, fit_double_gaussian, fwhm_from_sigma, t2star_from_fwhm, GaussianInit, SpectrumFit,
};
pub use lorentzian::{fit_lorentzian_profile, LorentzianFit};
