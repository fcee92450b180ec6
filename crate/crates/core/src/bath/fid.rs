use std::f64::consts::PI;

use num_complex::Complex64;

use super::NuclearBath;
use crate::analysis::FIDTrace;
use crate::spin_model::Constants;
use crate::{Error, Result, Vec3};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FidOptions {
    /// Ramsey detuning, Hz.
    pub detuning: f64,
    /// FWHM of the Gaussian drift envelope in the frequency domain, Hz.
    pub drift_broadening: Option<f64>,
    /// Include the beat from the host ¹⁵N hyperfine doublet.
    pub host_beat: bool,
    /// Include the bath product.
    pub bath: bool,
}

impl Default for FidOptions {
    fn default() -> Self {
        FidOptions { detuning: 0.0, drift_broadening: Some(150e3), host_beat: true, bath: true }
    }
}

/// Secular shift `γ_n A·ẑ` of each nucleus, Hz.
pub(crate) fn secular_shifts(bath: &NuclearBath, c: &Constants) -> Vec<f64> {
    let z = Vec3::z();
    bath.nuclei.iter().map(|n| c.gamma_n * n.a.a.dot(&z)).collect()
}

/// Ramsey signal of the electron in a bath of scalar-polarized nuclei.
///
/// Each nucleus contributes `cos(π a t) + i p sin(π a t)`, the host doublet
/// `cos(π Δ t)` and the drift a Gaussian envelope; `S(0) = 1`.
pub fn synthesize_fid(bath: &NuclearBath, opts: &FidOptions, t: &[f64], c: &Constants) -> Result<FIDTrace> {
    if t.len() < 2 || !t.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidArgument("time grid needs ≥ 2 strictly increasing points".into()));
    }
    if let Some(d) = opts.drift_broadening {
        if !(d >= 0.0) {
            return Err(Error::InvalidArgument(format!("drift broadening must be ≥ 0, got {d}")));
        }
    }
    let shifts = secular_shifts(bath, c);
    let pol = bath.polarizations();
    let s = t
        .iter()
        .map(|&ti| {
            let mut z = Complex64::from_polar(1.0, 2.0 * PI * opts.detuning * ti);
            if opts.bath {
                for (a, p) in shifts.iter().zip(&pol) {
                    let (sin, cos) = (PI * a * ti).sin_cos();
                    z *= Complex64::new(cos, p * sin);
                }
            }
            let mut v = z.re;
            if opts.host_beat {
                v *= (PI * c.host_n_splitting * ti).cos();
            }
            if let Some(d) = opts.drift_broadening {
                v *= (-(PI * d * ti).powi(2) / (4.0 * std::f64::consts::LN_2)).exp();
            }
            v
        })
        .collect();
    FIDTrace::new(t.to_vec(), s)
}

#[cfg(test)]
mod tests {
    use super::super::{BathConfig, Nucleus};
    use super::*;
    use crate::spin_model::HyperfineVector;

    fn grid() -> Vec<f64> {
        (0..400).map(|i| i as f64 * 25e-9).collect()
    }

    fn bath_of(nuclei: Vec<Nucleus>) -> NuclearBath {
        NuclearBath { nuclei, config: BathConfig::default() }
    }

    fn nucleus(az: f64, p: f64) -> Nucleus {
        let c = Constants::default();
        Nucleus {
            position: Vec3::new(1e-9, 0.0, 0.0),
            a: HyperfineVector::new(Vec3::new(1e-5, 0.0, az / c.gamma_n)),
            polarization: p,
        }
    }

    const BARE: FidOptions = FidOptions { detuning: 0.0, drift_broadening: None, host_beat: false, bath: true };

    #[test]
    fn starts_at_one() {
        let bath = bath_of(vec![nucleus(3e5, 0.2), nucleus(-1e5, -0.7)]);
        let fid = synthesize_fid(&bath, &FidOptions { detuning: 4e6, ..Default::default() }, &grid(), &Constants::default()).unwrap();
        assert!((fid.s[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_unpolarized_beat() {
        let a = 2.5e5;
        let bath = bath_of(vec![nucleus(a, 0.0)]);
        let t = grid();
        let fid = synthesize_fid(&bath, &BARE, &t, &Constants::default()).unwrap();
        for (ti, si) in t.iter().zip(&fid.s) {
            assert!((si - (PI * a * ti).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn polarized_bath_does_not_decay() {
        let bath = bath_of(vec![nucleus(3e5, 1.0), nucleus(-2e5, -1.0), nucleus(7e4, 1.0)]);
        let t = grid();
        let c = Constants::default();
        // Complex envelope is a pure phase; the real part at zero detuning
        // is cos of the summed shift.
        let fid = synthesize_fid(&bath, &BARE, &t, &c).unwrap();
        let total: f64 = (3e5 + -2e5 * -1.0 + 7e4) * PI;
        for (ti, si) in t.iter().zip(&fid.s) {
            assert!((si - (total * ti).cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_unsorted_grid() {
        let bath = bath_of(vec![]);
        assert!(synthesize_fid(&bath, &BARE, &[0.0, 1e-6, 0.5e-6], &Constants::default()).is_err());
    }
}
