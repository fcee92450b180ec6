use nalgebra::DMatrix;

use super::dft::Spectrum;
use super::lsq::{self, LsqOptions, Model};
use crate::{Error, Result};

/// `Λ1 exp(−((f−μ1)/σ)²) + Λ2 exp(−((f−μ2)/σ)²)`. Note the exponent has no
/// factor 2, so the full width at half maximum is `2σ√ln2`.
pub fn double_gaussian(f: f64, lambda1: f64, mu1: f64, lambda2: f64, mu2: f64, sigma: f64) -> f64 {
    let g = |mu: f64| (-((f - mu) / sigma).powi(2)).exp();
    lambda1 * g(mu1) + lambda2 * g(mu2)
}

pub fn fwhm_from_sigma(sigma: f64) -> f64 {
    2.0 * sigma * std::f64::consts::LN_2.sqrt()
}

pub fn t2star_from_fwhm(fwhm: f64) -> f64 {
    2.0 / (std::f64::consts::PI * fwhm)
}

/// Starting point for [`fit_double_gaussian`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianInit {
    pub lambda1: f64,
    pub mu1: f64,
    pub lambda2: f64,
    pub mu2: f64,
    pub sigma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumFit {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Centres in Hz, `mu1 ≤ mu2`.
    pub mu1: f64,
    pub mu2: f64,
    pub sigma: f64,
    pub fwhm: f64,
    pub t2star: f64,
    /// `√Σ residual²`.
    pub residual_norm: f64,
    /// One-σ errors in the order `(λ1, μ1, λ2, μ2, σ)`. NaN for parameters
    /// that were not fitted.
    pub param_std: [f64; 5],
    /// Only one peak was found; the fit used a single Gaussian with `λ2 = 0`.
    pub single_peak: bool,
    pub iterations: usize,
}

impl SpectrumFit {
    pub fn as_init(&self) -> GaussianInit {
        GaussianInit { lambda1: self.lambda1, mu1: self.mu1, lambda2: self.lambda2, mu2: self.mu2, sigma: self.sigma }
    }
}

/// Frequencies scaled to `(f − centre)/span`, amplitudes to `amp/height`.
struct Scaled {
    x: Vec<f64>,
    y: Vec<f64>,
    centre: f64,
    span: f64,
    height: f64,
}

impl Scaled {
    fn new(spec: &Spectrum) -> Result<Self> {
        let lo = spec.f.first().copied().unwrap_or(0.0);
        let hi = spec.f.last().copied().unwrap_or(0.0);
        let span = hi - lo;
        let height = spec.amp.iter().copied().fold(0.0, f64::max);
        if !(span > 0.0) || !(height > 0.0) {
            return Err(Error::InvalidArgument("spectrum is empty or flat".into()));
        }
        let centre = 0.5 * (lo + hi);
        Ok(Scaled {
            x: spec.f.iter().map(|f| (f - centre) / span).collect(),
            y: spec.amp.iter().map(|a| a / height).collect(),
            centre,
            span,
            height,
        })
    }
}

/// Parameters `(λ1, μ1, λ2, μ2, σ)`, or `(λ, μ, σ)` when `single`.
struct Gaussians {
    single: bool,
}

impl Model for Gaussians {
    fn n_params(&self) -> usize {
        if self.single {
            3
        } else {
            5
        }
    }

    fn eval(&self, p: &[f64], x: &[f64], values: &mut [f64], jac: &mut DMatrix<f64>) {
        let sigma = *p.last().unwrap();
        let pairs: &[(usize, usize)] = if self.single { &[(0, 1)] } else { &[(0, 1), (2, 3)] };
        let is = p.len() - 1;
        for (i, &xi) in x.iter().enumerate() {
            values[i] = 0.0;
            jac[(i, is)] = 0.0;
            for &(il, im) in pairs {
                let u = (xi - p[im]) / sigma;
                let e = (-u * u).exp();
                values[i] += p[il] * e;
                jac[(i, il)] = e;
                jac[(i, im)] = p[il] * e * 2.0 * u / sigma;
                jac[(i, is)] += p[il] * e * 2.0 * u * u / sigma;
            }
        }
    }
}

/// Half width at half maximum around bin `i`, by linear interpolation.
fn half_width(f: &[f64], y: &[f64], i: usize) -> f64 {
    let half = 0.5 * y[i];
    let mut left = f[0];
    for k in (0..i).rev() {
        if y[k] < half {
            left = f[k] + (f[k + 1] - f[k]) * (half - y[k]) / (y[k + 1] - y[k]);
            break;
        }
    }
    let mut right = f[f.len() - 1];
    for k in i + 1..f.len() {
        if y[k] < half {
            right = f[k - 1] + (f[k] - f[k - 1]) * (y[k - 1] - half) / (y[k - 1] - y[k]);
            break;
        }
    }
    0.5 * (right - left)
}

/// Largest peak, then the largest local maximum clear of its line, if any.
fn initial_guess(spec: &Spectrum) -> (GaussianInit, bool) {
    let (f, y) = (&spec.f, &spec.amp);
    let i1 = (0..y.len()).max_by(|&a, &b| y[a].total_cmp(&y[b])).unwrap_or(0);
    let hw = half_width(f, y, i1).max(spec.resolution());
    let sigma = hw / std::f64::consts::LN_2.sqrt();
    let df = spec.resolution().max(f64::MIN_POSITIVE);
    let w = ((hw / df).round() as usize).max(1);
    let second = (0..y.len())
        .filter(|&i| (f[i] - f[i1]).abs() > 2.0 * hw && y[i] > 0.05 * y[i1])
        .filter(|&i| {
            let lo = i.saturating_sub(w);
            let hi = (i + w).min(y.len() - 1);
            (lo..=hi).all(|k| y[k] <= y[i])
        })
        .max_by(|&a, &b| y[a].total_cmp(&y[b]));
    match second {
        Some(i2) => (GaussianInit { lambda1: y[i1], mu1: f[i1], lambda2: y[i2], mu2: f[i2], sigma }, false),
        None => (GaussianInit { lambda1: y[i1], mu1: f[i1], lambda2: 0.0, mu2: f[i1], sigma }, true),
    }
}

/// Least-squares fit of the shared-width double Gaussian to a magnitude
/// spectrum.
///
/// Without `init` the two largest separated peaks seed the fit; if only
/// one peak is present a single Gaussian is fitted and `single_peak` set.
pub fn fit_double_gaussian(spec: &Spectrum, init: Option<GaussianInit>) -> Result<SpectrumFit> {
    if spec.f.len() != spec.amp.len() || spec.f.len() < 6 {
        return Err(Error::InvalidArgument(format!("spectrum too short for a fit ({} bins)", spec.f.len())));
    }
    let sc = Scaled::new(spec)?;
    let (init, single) = match init {
        Some(i) => (i, false),
        None => initial_guess(spec),
    };
    if !(init.sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("initial sigma must be positive, got {}", init.sigma)));
    }
    let to_x = |mu: f64| (mu - sc.centre) / sc.span;
    let p0: Vec<f64> = if single {
        vec![init.lambda1 / sc.height, to_x(init.mu1), init.sigma / sc.span]
    } else {
        vec![
            init.lambda1 / sc.height,
            to_x(init.mu1),
            init.lambda2 / sc.height,
            to_x(init.mu2),
            init.sigma / sc.span,
        ]
    };
    let fit = lsq::solve(&Gaussians { single }, &sc.x, &sc.y, &p0, LsqOptions::default()).map_err(|e| match e {
        Error::NonConvergence { iterations, last } => Error::NonConvergence {
            iterations,
            last: last
                .iter()
                .enumerate()
                .map(|(i, v)| match (single, i) {
                    (true, 0) | (false, 0) | (false, 2) => v * sc.height,
                    (true, 1) | (false, 1) | (false, 3) => sc.centre + v * sc.span,
                    _ => v * sc.span,
                })
                .collect(),
        },
        other => other,
    })?;
    let p = &fit.params;
    let s = &fit.std;
    let nan = f64::NAN;
    let (mut l1, mut m1, mut l2, mut m2, sigma) = if single {
        (p[0], p[1], 0.0, p[1], p[2].abs())
    } else {
        (p[0], p[1], p[2], p[3], p[4].abs())
    };
    let mut std = if single { [s[0], s[1], nan, nan, s[2]] } else { [s[0], s[1], s[2], s[3], s[4]] };
    if !single && m2 < m1 {
        std::mem::swap(&mut l1, &mut l2);
        std::mem::swap(&mut m1, &mut m2);
        std.swap(0, 2);
        std.swap(1, 3);
    }
    let sigma = sigma * sc.span;
    let fwhm = fwhm_from_sigma(sigma);
    let param_std = [std[0] * sc.height, std[1] * sc.span, std[2] * sc.height, std[3] * sc.span, std[4] * sc.span];
    Ok(SpectrumFit {
        lambda1: l1 * sc.height,
        lambda2: l2 * sc.height,
        mu1: sc.centre + m1 * sc.span,
        mu2: sc.centre + m2 * sc.span,
        sigma,
        fwhm,
        t2star: t2star_from_fwhm(fwhm),
        residual_norm: fit.rss.sqrt() * sc.height,
        param_std,
        single_peak: single,
        iterations: fit.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(truth: GaussianInit, n: usize) -> Spectrum {
        let f: Vec<f64> = (0..n).map(|i| i as f64 * 1e4).collect();
        let amp = f
            .iter()
            .map(|&x| double_gaussian(x, truth.lambda1, truth.mu1, truth.lambda2, truth.mu2, truth.sigma))
            .collect();
        Spectrum { f, amp, n_fft: 2 * (n - 1) }
    }

    #[test]
    fn conversions() {
        let s = 1.5e5;
        assert_eq!(fwhm_from_sigma(s), 2.0 * s * 2f64.ln().sqrt());
        assert_eq!(t2star_from_fwhm(1.5e5), 2.0 / (std::f64::consts::PI * 1.5e5));
    }

    #[test]
    fn model_half_maximum() {
        let sigma = 3.0;
        let hw = fwhm_from_sigma(sigma) / 2.0;
        assert!((double_gaussian(10.0 + hw, 1.0, 10.0, 0.0, 0.0, sigma) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn exact_recovery() {
        let truth = GaussianInit { lambda1: 2.0, mu1: 3.0e6, lambda2: 1.3, mu2: 6.1e6, sigma: 4.0e5 };
        let fit = fit_double_gaussian(&synthetic(truth, 1000), None).unwrap();
        assert!(!fit.single_peak);
        for (got, want) in [
            (fit.lambda1, truth.lambda1),
            (fit.mu1, truth.mu1),
            (fit.lambda2, truth.lambda2),
            (fit.mu2, truth.mu2),
            (fit.sigma, truth.sigma),
        ] {
            assert!((got / want - 1.0).abs() < 1e-8, "{got} vs {want}");
        }
        assert_eq!(fit.fwhm, fwhm_from_sigma(fit.sigma));
        assert_eq!(fit.t2star, t2star_from_fwhm(fit.fwhm));
    }

    #[test]
    fn single_peak_fallback() {
        let truth = GaussianInit { lambda1: 1.0, mu1: 4.0e6, lambda2: 0.0, mu2: 0.0, sigma: 2.0e5 };
        let fit = fit_double_gaussian(&synthetic(truth, 800), None).unwrap();
        assert!(fit.single_peak);
        assert_eq!(fit.lambda2, 0.0);
        assert!((fit.mu1 / 4.0e6 - 1.0).abs() < 1e-9 && (fit.sigma / 2.0e5 - 1.0).abs() < 1e-8);
        assert!(fit.param_std[2].is_nan());
    }

    #[test]
    fn rejects_flat_spectrum() {
        let spec = Spectrum { f: (0..20).map(f64::from).collect(), amp: vec![0.0; 20], n_fft: 38 };
        assert!(fit_double_gaussian(&spec, None).is_err());
    }
}
