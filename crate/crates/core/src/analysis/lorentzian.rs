use nalgebra::DMatrix;

use super::lsq::{self, LsqOptions, Model};
use crate::{Error, Result};

/// Fitted resonance profile `A·J²/(J² + (Ω − Ω_opt)²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzianFit {
    pub amplitude: f64,
    /// Half width at half maximum, Hz.
    pub j: f64,
    pub omega_opt: f64,
    /// `2J`.
    pub fwhm: f64,
    pub residual_norm: f64,
    /// One-σ errors in the order `(amplitude, j, omega_opt)`.
    pub param_std: [f64; 3],
    pub iterations: usize,
}

struct Lorentzian;

impl Model for Lorentzian {
    fn n_params(&self) -> usize {
        3
    }

    fn eval(&self, p: &[f64], x: &[f64], values: &mut [f64], jac: &mut DMatrix<f64>) {
        let (a, j, x0) = (p[0], p[1], p[2]);
        for (i, &xi) in x.iter().enumerate() {
            let d = xi - x0;
            let den = j * j + d * d;
            let shape = j * j / den;
            values[i] = a * shape;
            jac[(i, 0)] = shape;
            jac[(i, 1)] = a * 2.0 * j * d * d / (den * den);
            jac[(i, 2)] = a * j * j * 2.0 * d / (den * den);
        }
    }
}

/// Fits peak transfer against drive amplitude. Needs at least five samples
/// that bracket the maximum.
pub fn fit_lorentzian_profile(omegas: &[f64], values: &[f64]) -> Result<LorentzianFit> {
    if omegas.len() != values.len() {
        return Err(Error::InvalidArgument(format!("{} drive values vs {} samples", omegas.len(), values.len())));
    }
    if omegas.len() < 5 {
        return Err(Error::InvalidArgument(format!("profile fit needs ≥ 5 samples, got {}", omegas.len())));
    }
    let lo = omegas.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = omegas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let height = values.iter().copied().fold(0.0, f64::max);
    if !(hi > lo) || !(height > 0.0) {
        return Err(Error::InvalidArgument("profile is degenerate".into()));
    }
    let centre = 0.5 * (lo + hi);
    let span = hi - lo;
    let x: Vec<f64> = omegas.iter().map(|w| (w - centre) / span).collect();
    let y: Vec<f64> = values.iter().map(|v| v / height).collect();

    let ipk = (0..y.len()).max_by(|&a, &b| y[a].total_cmp(&y[b])).unwrap();
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let rank = order.iter().position(|&i| i == ipk).unwrap();
    // Width from the nearest half-maximum crossings on either side.
    let below = |k: &&usize| y[**k] < 0.5 * y[ipk];
    let left = order[..rank].iter().rev().find(below).map(|&k| x[ipk] - x[k]);
    let right = order[rank + 1..].iter().find(below).map(|&k| x[k] - x[ipk]);
    let hw = match (left, right) {
        (Some(l), Some(r)) => 0.5 * (l + r),
        (Some(w), None) | (None, Some(w)) => w,
        (None, None) => 0.25,
    };
    let p0 = [y[ipk], hw.max(1e-6), x[ipk]];
    let fit = lsq::solve(&Lorentzian, &x, &y, &p0, LsqOptions::default())?;
    let j = fit.params[1].abs() * span;
    Ok(LorentzianFit {
        amplitude: fit.params[0] * height,
        j,
        omega_opt: centre + fit.params[2] * span,
        fwhm: 2.0 * j,
        residual_norm: fit.rss.sqrt() * height,
        param_std: [fit.std[0] * height, fit.std[1] * span, fit.std[2] * span],
        iterations: fit.iterations,
    })
}
