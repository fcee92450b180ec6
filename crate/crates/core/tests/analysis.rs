use std::f64::consts::PI;

use hhdr::analysis::*;
use hhdr::engine::{simulate_map, MapOptions, SpinSystem};
use hhdr::spin_model::*;
use hhdr::Vec3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const TRUTH: GaussianInit = GaussianInit { lambda1: 1.0, mu1: 3.5e6, lambda2: 0.7, mu2: 6.5e6, sigma: 0.4e6 };

fn synthetic(truth: GaussianInit, noise: f64, seed: u64) -> Spectrum {
    let f: Vec<f64> = (0..1001).map(|i| i as f64 * 1e4).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise * truth.lambda1).unwrap();
    let amp = f
        .iter()
        .map(|&x| {
            double_gaussian(x, truth.lambda1, truth.mu1, truth.lambda2, truth.mu2, truth.sigma) + normal.sample(&mut rng)
        })
        .collect();
    Spectrum { f, amp, n_fft: 2000 }
}

fn params(fit: &SpectrumFit) -> [f64; 5] {
    [fit.lambda1, fit.mu1, fit.lambda2, fit.mu2, fit.sigma]
}

fn truth() -> [f64; 5] {
    [TRUTH.lambda1, TRUTH.mu1, TRUTH.lambda2, TRUTH.mu2, TRUTH.sigma]
}

#[test]
fn noiseless_spectrum_is_recovered_and_idempotent() {
    let fit = fit_double_gaussian(&synthetic(TRUTH, 0.0, 0), None).unwrap();
    for (p, t) in params(&fit).iter().zip(truth()) {
        assert!((p / t - 1.0).abs() < 1e-8);
    }
    assert_eq!(fit.fwhm, fwhm_from_sigma(fit.sigma));
    assert_eq!(fit.t2star, t2star_from_fwhm(fit.fwhm));
}

#[test]
fn refit_from_converged_solution_stays_put() {
    for seed in 0..5 {
        let spec = synthetic(TRUTH, 0.01, seed);
        let first = fit_double_gaussian(&spec, None).unwrap();
        let again = fit_double_gaussian(&spec, Some(first.as_init())).unwrap();
        for (a, b) in params(&first).iter().zip(params(&again)) {
            assert!((a - b).abs() <= 1e-10 * a.abs(), "seed {seed}: {a} → {b}");
        }
    }
}

#[test]
fn noise_bias_is_small() {
    let n = 100;
    let mut mean = [0.0; 5];
    for seed in 0..n {
        let fit = fit_double_gaussian(&synthetic(TRUTH, 0.01, seed), None).unwrap();
        for (m, p) in mean.iter_mut().zip(params(&fit)) {
            *m += p / n as f64;
        }
    }
    for (m, t) in mean.iter().zip(truth()) {
        assert!((m / t - 1.0).abs() < 5e-3, "mean {m} vs {t}");
    }
}

#[test]
fn symmetric_peaks_fit_symmetrically() {
    let sym = GaussianInit { lambda1: 1.0, mu1: 3.0e6, lambda2: 1.0, mu2: 7.0e6, sigma: 0.5e6 };
    let fit = fit_double_gaussian(&synthetic(sym, 0.01, 11), None).unwrap();
    let centre = 5.0e6;
    let asym = (fit.mu1 + fit.mu2) / 2.0 - centre;
    let err = 0.5 * fit.param_std[1].hypot(fit.param_std[3]);
    assert!(asym.abs() <= 3.0 * err, "asymmetry {asym}, σ {err}");
}

#[test]
fn dft_scales_linearly_and_conserves_energy() {
    let t: Vec<f64> = (0..500).map(|i| i as f64 * 2e-8).collect();
    let s: Vec<f64> = t.iter().map(|&x| (2.0 * PI * 1.3e6 * x).cos() * (-x / 4e-6).exp()).collect();
    let opts = DftOptions { zero_pad: 2, ..Default::default() };
    let base = dft(&FIDTrace::new(t.clone(), s.clone()).unwrap(), &opts).unwrap();
    let scaled = dft(&FIDTrace::new(t.clone(), s.iter().map(|v| -2.5 * v).collect()).unwrap(), &opts).unwrap();
    for (a, b) in base.amp.iter().zip(&scaled.amp) {
        assert!((2.5 * a - b).abs() <= 1e-12 * b.max(1.0));
    }
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    let energy: f64 = s.iter().map(|v| (v - mean).powi(2)).sum();
    assert!((base.parseval_energy() / energy - 1.0).abs() < 1e-6);
}

#[test]
fn lorentzian_of_envelope_is_exact() {
    let (j, centre) = (188e3, 5.88e6);
    let omegas: Vec<f64> = (-40..=40).map(|k| centre + k as f64 * j / 10.0).collect();
    let vals: Vec<f64> = omegas.iter().map(|&w| 0.8 * transfer_envelope(w - centre, j)).collect();
    let fit = fit_lorentzian_profile(&omegas, &vals).unwrap();
    assert!((fit.j / j - 1.0).abs() < 1e-6);
    assert!((fit.omega_opt / centre - 1.0).abs() < 1e-6);
    assert!((fit.amplitude - 0.8).abs() < 1e-6);
    assert_eq!(fit.fwhm, 2.0 * fit.j);
}

#[test]
fn fourier_map_shows_flip_flop_frequency() {
    let c = Constants::default();
    let b = Vec3::new(0.0, 0.0, 0.5375);
    let a = hyperfine_from_coupling(&b, 188e3, 80f64.to_radians(), &c).unwrap();
    let pred = flip_flop_rate(&b, &a, &c).unwrap();
    let sys = SpinSystem::new(b, vec![a], c).unwrap();
    let omegas: Vec<f64> = (-3..=3).map(|k| pred.omega_opt + k as f64 * 0.5 * pred.j).collect();
    let taus: Vec<f64> = (0..256).map(|i| i as f64 * 0.1e-6).collect();
    let map = simulate_map(&sys, &omegas, &taus, MapOptions::default()).unwrap();
    let fm = fourier_map(&map, &DftOptions { zero_pad: 4, ..Default::default() }).unwrap();
    let row = fm.row(3);
    let k = (0..row.len()).max_by(|&x, &y| row[x].total_cmp(&row[y])).unwrap();
    let df = fm.freqs[1] - fm.freqs[0];
    assert!((fm.freqs[k] - pred.j).abs() <= 2.0 * df, "{} vs {}", fm.freqs[k], pred.j);
    // Off resonance the oscillation is faster and weaker.
    let off = fm.row(0).iter().cloned().fold(0.0, f64::max);
    assert!(off < row[k]);
}

#[test]
fn overlay_spans_the_coupling_cone() {
    let c = Constants::default();
    let b = Vec3::new(0.0, 0.0, 0.5375);
    let ov = overlay_curves(&b, 220e3, &c, 181).unwrap();
    assert!((ov.bare_larmor - c.gamma_n * 0.5375).abs() < 1e-6);
    let jmax = ov.points.iter().map(|p| p.j).fold(0.0, f64::max);
    assert!(jmax <= 220e3 * (1.0 + 1e-9));
    assert!(jmax > 0.99 * 220e3);
}
