use std::f64::consts::PI;

use super::dft::{dft, DftOptions, FIDTrace};
use crate::engine::SpectroscopyMap;
use crate::spin_model::{flip_flop_rate, hyperfine_at_angle, Constants};
use crate::{Error, Result, Vec3};

/// Magnitude spectra of every drive row of a spin-lock map, taken along τ.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierMap {
    pub omegas: Vec<f64>,
    pub freqs: Vec<f64>,
    /// Row-major by drive amplitude.
    pub amp: Vec<f64>,
}

impl FourierMap {
    pub fn get(&self, i_omega: usize, i_freq: usize) -> f64 {
        self.amp[i_omega * self.freqs.len() + i_freq]
    }

    pub fn row(&self, i_omega: usize) -> &[f64] {
        let n = self.freqs.len();
        &self.amp[i_omega * n..(i_omega + 1) * n]
    }
}

pub fn fourier_map(map: &SpectroscopyMap, opts: &DftOptions) -> Result<FourierMap> {
    if map.values.len() != map.omegas.len() * map.taus.len() || map.omegas.is_empty() {
        return Err(Error::InvalidArgument("map is not rectangular".into()));
    }
    let mut freqs = Vec::new();
    let mut amp = Vec::with_capacity(map.omegas.len() * map.taus.len());
    for i in 0..map.omegas.len() {
        let trace = FIDTrace::new(map.taus.clone(), map.row(i).to_vec())?;
        let spec = dft(&trace, opts)?;
        if i == 0 {
            freqs = spec.f;
        }
        amp.extend(spec.amp);
    }
    Ok(FourierMap { omegas: map.omegas.clone(), freqs, amp })
}

/// Predicted `(Ω_opt, J)` for one orientation of a fixed-strength coupling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OverlayPoint {
    /// Angle between `B` and `A`, rad.
    pub alpha: f64,
    /// Angle between `B_eff` and `A`, rad.
    pub theta: f64,
    pub omega_opt: f64,
    pub j: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Overlay {
    /// `γ_n|B|`, the uncoupled nuclear line.
    pub bare_larmor: f64,
    pub points: Vec<OverlayPoint>,
}

/// Resonance positions for a coupling `¼γ_n|A| = quarter_coupling` swept
/// through `n_angles` orientations from parallel to antiparallel with `b`.
pub fn overlay_curves(b: &Vec3, quarter_coupling: f64, c: &Constants, n_angles: usize) -> Result<Overlay> {
    if n_angles < 2 {
        return Err(Error::InvalidArgument("overlay needs at least two angles".into()));
    }
    if quarter_coupling < 0.0 {
        return Err(Error::InvalidArgument(format!("coupling must be ≥ 0, got {quarter_coupling}")));
    }
    let magnitude = 4.0 * quarter_coupling / c.gamma_n;
    let mut points = Vec::with_capacity(n_angles);
    for i in 0..n_angles {
        let alpha = PI * i as f64 / (n_angles - 1) as f64;
        let a = hyperfine_at_angle(b, magnitude, alpha);
        let pred = flip_flop_rate(b, &a, c)?;
        points.push(OverlayPoint { alpha, theta: pred.theta, omega_opt: pred.omega_opt, j: pred.j });
    }
    Ok(Overlay { bare_larmor: c.gamma_n * b.norm(), points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_map_has_empty_spectrum() {
        let taus: Vec<f64> = (0..32).map(|i| i as f64 * 1e-6).collect();
        let map = SpectroscopyMap::new(vec![1e6, 2e6], taus, vec![0.5; 64]).unwrap();
        let fm = fourier_map(&map, &DftOptions::default()).unwrap();
        assert_eq!(fm.freqs.len(), 17);
        assert!(fm.amp.iter().all(|&a| a < 1e-12));
    }

    #[test]
    fn rows_resolve_their_oscillation() {
        let taus: Vec<f64> = (0..200).map(|i| i as f64 * 0.5e-6).collect();
        let mut values = Vec::new();
        for f in [1e5, 3e5] {
            values.extend(taus.iter().map(|t| (PI * f * t).sin().powi(2)));
        }
        let map = SpectroscopyMap::new(vec![5.7e6, 5.8e6], taus, values).unwrap();
        let fm = fourier_map(&map, &DftOptions { zero_pad: 4, ..Default::default() }).unwrap();
        for (i, f) in [1e5, 3e5].into_iter().enumerate() {
            let row = fm.row(i);
            let k = (0..row.len()).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
            assert!((fm.freqs[k] - f).abs() <= fm.freqs[1], "{}", fm.freqs[k]);
        }
    }

    #[test]
    fn overlay_endpoints() {
        let c = Constants::default();
        let b = Vec3::new(0.0, 0.0, 0.5375);
        let ov = overlay_curves(&b, 2.2e5, &c, 181).unwrap();
        let larmor = c.gamma_n * 0.5375;
        assert!((ov.bare_larmor - larmor).abs() < 1e-6);
        // Parallel and antiparallel couplings have no transverse part.
        assert!(ov.points[0].j.abs() < 1e-6 && ov.points[180].j.abs() < 1e-6);
        assert!((ov.points[0].omega_opt - (larmor - 2.0 * 2.2e5)).abs() < 1e-3);
        assert!((ov.points[180].omega_opt - (larmor + 2.0 * 2.2e5)).abs() < 1e-3);
        let jmax = ov.points.iter().map(|p| p.j).fold(0.0, f64::max);
        assert!(jmax <= 2.2e5 * (1.0 + 1e-12));
    }
}
