use hhdr::analysis::*;
use hhdr::bath::*;
use hhdr::engine::Sign;
use hhdr::spin_model::*;
use hhdr::Vec3;
use proptest::prelude::*;

fn field() -> Vec3 {
    Vec3::new(0.0, 0.0, 0.5375)
}

proptest! {
    #[test]
    fn transfer_is_a_probability(tau in 0.0..1e-3f64, delta in -5e6..5e6f64, j in 0.0..1e6f64) {
        let p = transfer_probability(tau, delta, j);
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn transfer_is_even_and_periodic(tau in 0.0..1e-4f64, delta in -2e6..2e6f64, j in 1e3..1e6f64) {
        let p = transfer_probability(tau, delta, j);
        prop_assert_eq!(p, transfer_probability(tau, -delta, j));
        let period = 1.0 / j.hypot(delta);
        prop_assert!((transfer_probability(tau + period, delta, j) - p).abs() < 1e-9);
    }

    #[test]
    fn envelope_is_the_peak(delta in -2e6..2e6f64, j in 1e3..1e6f64) {
        let peak = transfer_probability(0.5 / j.hypot(delta), delta, j);
        prop_assert!((peak - transfer_envelope(delta, j)).abs() < 1e-9);
        prop_assert!((transfer_envelope(j, j) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn flip_flop_rate_is_bounded(q in 1e3..5e5f64, theta in 0.0..std::f64::consts::PI) {
        let c = Constants::default();
        let a = hyperfine_from_coupling(&field(), q, theta, &c).unwrap();
        let pred = flip_flop_rate(&field(), &a, &c).unwrap();
        prop_assert!(pred.j >= 0.0);
        prop_assert!(pred.j <= a.quarter_coupling(&c) * (1.0 + 1e-12));
    }

    #[test]
    fn inversion_recovers_forward_model(q in 2e4..4e5f64, theta in 0.2..2.9f64) {
        let c = Constants::default();
        let a = hyperfine_from_coupling(&field(), q, theta, &c).unwrap();
        let pred = flip_flop_rate(&field(), &a, &c).unwrap();
        let inv = invert_spectroscopy(pred.omega_opt, pred.j, &field(), &c).unwrap();
        let hit = inv.branches.iter().any(|br| {
            (br.quarter_coupling / q - 1.0).abs() < 1e-6 && (br.theta - theta).abs() < 1e-6
        });
        prop_assert!(hit, "q={q} θ={theta}: {:?}", inv.branches);
        for br in &inv.branches {
            let back = flip_flop_rate(&field(), &br.hyperfine(&field()), &c).unwrap();
            prop_assert!((back.omega_opt / pred.omega_opt - 1.0).abs() < 1e-9);
            prop_assert!((back.j - pred.j).abs() < 1e-6 * pred.j.max(1.0));
        }
    }

    #[test]
    fn sweeps_stay_bounded_and_mirror(
        seed in 0u64..1000,
        n_plus in 0usize..60,
        n_minus in 0usize..60,
        inter in prop_oneof![Just(Interleaving::Blocked), Just(Interleaving::Alternating), Just(Interleaving::Mixed)],
        lead_minus in any::<bool>(),
        tau_scale in 0.1..2.0f64,
    ) {
        let c = Constants::default();
        let cfg = BathConfig { radius: 2e-9, seed, ..Default::default() };
        let bath = generate_bath(&cfg, &c).unwrap();
        prop_assume!(!bath.is_empty());
        let pred = flip_flop_rate(&cfg.b, &bath.nuclei[0].a, &c).unwrap();
        prop_assume!(pred.j > 0.0);
        let mut sched = SweepSchedule::new(n_plus, n_minus, inter, pred.omega_opt, tau_scale / (2.0 * pred.j)).unwrap();
        if lead_minus {
            sched.lead = Sign::Minus;
        }
        let rec = run_sweeps(&bath, &sched, &c).unwrap();
        prop_assert!(rec.snapshots.iter().flatten().all(|p| (-1.0..=1.0).contains(p)));
        prop_assert!(rec.transferred.iter().all(|&t| t <= 1.0 + 1e-12));
        let mirror = run_sweeps(&bath, &sched.flipped(), &c).unwrap();
        for (a, b) in rec.snapshots.iter().flatten().zip(mirror.snapshots.iter().flatten()) {
            prop_assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn dft_is_homogeneous(scale in -10.0..10.0f64, f0 in 1e5..5e6f64) {
        let t: Vec<f64> = (0..128).map(|i| i as f64 * 5e-8).collect();
        let s: Vec<f64> = t.iter().map(|&x| (2.0 * std::f64::consts::PI * f0 * x).sin() + 0.2).collect();
        let opts = DftOptions::default();
        let a = dft(&FIDTrace::new(t.clone(), s.clone()).unwrap(), &opts).unwrap();
        let b = dft(&FIDTrace::new(t, s.iter().map(|v| scale * v).collect()).unwrap(), &opts).unwrap();
        for (x, y) in a.amp.iter().zip(&b.amp) {
            prop_assert!((scale.abs() * x - y).abs() <= 1e-10 * (1.0 + y));
        }
    }

    #[test]
    fn linewidth_conversions_are_exact(sigma in 1.0..1e8f64) {
        let fwhm = fwhm_from_sigma(sigma);
        prop_assert_eq!(fwhm, 2.0 * sigma * 2f64.ln().sqrt());
        prop_assert_eq!(t2star_from_fwhm(fwhm), 2.0 / (std::f64::consts::PI * fwhm));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fit_is_idempotent(
        l2 in 0.3..1.0f64,
        mu1 in 2e6..4e6f64,
        gap in 2e6..4e6f64,
        sigma in 2e5..6e5f64,
    ) {
        let truth = GaussianInit { lambda1: 1.0, mu1, lambda2: l2, mu2: mu1 + gap, sigma };
        let f: Vec<f64> = (0..801).map(|i| i as f64 * 1.25e4).collect();
        let amp = f.iter().map(|&x| double_gaussian(x, 1.0, mu1, l2, mu1 + gap, sigma) * (1.0 + 0.01 * (x * 1e-4).sin())).collect();
        let spec = Spectrum { f, amp, n_fft: 1600 };
        let first = fit_double_gaussian(&spec, None).unwrap();
        let again = fit_double_gaussian(&spec, Some(first.as_init())).unwrap();
        for (a, b) in [(first.lambda1, again.lambda1), (first.mu1, again.mu1), (first.lambda2, again.lambda2), (first.mu2, again.mu2), (first.sigma, again.sigma)] {
            prop_assert!((a - b).abs() <= 1e-10 * a.abs(), "{a} → {b} for {truth:?}");
        }
    }
}
