use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::{Error, Result};

/// Real signal on a uniform time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FIDTrace {
    pub t: Vec<f64>,
    pub s: Vec<f64>,
}

impl FIDTrace {
    pub fn new(t: Vec<f64>, s: Vec<f64>) -> Result<Self> {
        if t.len() != s.len() {
            return Err(Error::InvalidArgument(format!("{} times vs {} samples", t.len(), s.len())));
        }
        Ok(FIDTrace { t, s })
    }

    /// Sample spacing, checking the grid is strictly increasing and uniform
    /// to 1e-9 relative.
    pub fn spacing(&self) -> Result<f64> {
        if self.t.len() < 2 {
            return Err(Error::InvalidArgument("trace needs at least two samples".into()));
        }
        let n = self.t.len();
        let dt = (self.t[n - 1] - self.t[0]) / (n - 1) as f64;
        if !(dt > 0.0) {
            return Err(Error::NonUniformGrid(f64::INFINITY));
        }
        let worst = self
            .t
            .windows(2)
            .map(|w| ((w[1] - w[0]) - dt).abs() / dt)
            .fold(0.0, f64::max);
        if worst > 1e-9 {
            return Err(Error::NonUniformGrid(worst));
        }
        Ok(dt)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Window {
    #[default]
    None,
    Hann,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DftOptions {
    /// Transform length is `zero_pad × samples`.
    pub zero_pad: usize,
    pub window: Window,
    pub subtract_mean: bool,
}

impl Default for DftOptions {
    fn default() -> Self {
        DftOptions { zero_pad: 1, window: Window::None, subtract_mean: true }
    }
}

/// One-sided magnitude spectrum `|X_k|`, `k = 0 … N/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub f: Vec<f64>,
    pub amp: Vec<f64>,
    /// Transform length (after zero padding).
    pub n_fft: usize,
}

impl Spectrum {
    pub fn resolution(&self) -> f64 {
        if self.f.len() > 1 {
            self.f[1] - self.f[0]
        } else {
            0.0
        }
    }

    /// Time-domain energy `Σ x²` reconstructed from the one-sided spectrum
    /// (Parseval, using `|X_k| = |X_{N−k}|` for real input).
    pub fn parseval_energy(&self) -> f64 {
        let n = self.n_fft;
        let mut sum = 0.0;
        for (k, a) in self.amp.iter().enumerate() {
            let w = if k == 0 || (n.is_multiple_of(2) && k == n / 2) { 1.0 } else { 2.0 };
            sum += w * a * a;
        }
        sum / n as f64
    }

    pub fn peak(&self) -> Option<(f64, f64)> {
        self.amp
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, &a)| (self.f[i], a))
    }
}

/// Samples that enter the transform: mean-subtracted and windowed.
pub(crate) fn prepared_samples(trace: &FIDTrace, opts: &DftOptions) -> Vec<f64> {
    let n = trace.s.len();
    let mean = if opts.subtract_mean { trace.s.iter().sum::<f64>() / n as f64 } else { 0.0 };
    trace
        .s
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let w = match opts.window {
                Window::None => 1.0,
                Window::Hann => 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos(),
            };
            (x - mean) * w
        })
        .collect()
}

pub fn dft(trace: &FIDTrace, opts: &DftOptions) -> Result<Spectrum> {
    if trace.s.len() < 8 {
        return Err(Error::InvalidArgument(format!("dft needs ≥ 8 samples, got {}", trace.s.len())));
    }
    if opts.zero_pad == 0 {
        return Err(Error::InvalidArgument("zero_pad must be ≥ 1".into()));
    }
    let dt = trace.spacing()?;
    let samples = prepared_samples(trace, opts);
    let n_fft = samples.len() * opts.zero_pad;
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    buf.resize(n_fft, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n_fft).process(&mut buf);
    let df = 1.0 / (n_fft as f64 * dt);
    let f = (0..=n_fft / 2).map(|k| k as f64 * df).collect();
    let amp = buf[..=n_fft / 2].iter().map(|z| z.norm()).collect();
    Ok(Spectrum { f, amp, n_fft })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, dt: f64) -> Vec<f64> {
        (0..n).map(|i| i as f64 * dt).collect()
    }

    #[test]
    fn cosine_peaks_at_nearest_bin() {
        let dt = 1e-8;
        let t = grid(1000, dt);
        let f0 = 3.21e6;
        let s = t.iter().map(|&x| (2.0 * PI * f0 * x).cos()).collect();
        let spec = dft(&FIDTrace::new(t, s).unwrap(), &DftOptions { zero_pad: 4, ..Default::default() }).unwrap();
        let (fp, _) = spec.peak().unwrap();
        assert!((fp - f0).abs() <= spec.resolution() / 2.0 + 1e-6, "{fp}");
        assert!((spec.resolution() - 1.0 / (4.0 * 1000.0 * dt)).abs() < 1e-6);
    }

    #[test]
    fn constant_trace_has_empty_spectrum() {
        let t = grid(64, 1e-7);
        let spec = dft(&FIDTrace::new(t, vec![0.7; 64]).unwrap(), &DftOptions::default()).unwrap();
        assert!(spec.amp.iter().all(|&a| a < 1e-12));
    }

    #[test]
    fn parseval_with_padding_and_window() {
        let t = grid(301, 2e-8);
        let s: Vec<f64> = t.iter().map(|&x| (1e6 * x).sin() + 0.3 * (7.3e6 * x).cos() + 0.1).collect();
        let trace = FIDTrace::new(t, s).unwrap();
        for opts in [
            DftOptions::default(),
            DftOptions { zero_pad: 3, window: Window::Hann, subtract_mean: true },
            DftOptions { zero_pad: 2, window: Window::None, subtract_mean: false },
        ] {
            let spec = dft(&trace, &opts).unwrap();
            let energy: f64 = prepared_samples(&trace, &opts).iter().map(|x| x * x).sum();
            assert!((spec.parseval_energy() / energy - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        let mut t = grid(16, 1e-6);
        t[5] += 1e-8;
        assert!(matches!(dft(&FIDTrace::new(t, vec![0.0; 16]).unwrap(), &DftOptions::default()), Err(Error::NonUniformGrid(_))));
        assert!(dft(&FIDTrace::new(grid(4, 1e-6), vec![0.0; 4]).unwrap(), &DftOptions::default()).is_err());
    }
}
