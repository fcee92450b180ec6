use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::evolve::{laser_reset, Evolver, Reset};
use super::sequence::{alternating_signal, Sign, PHASE_X, PHASE_Y};
use super::state::Ensemble;
use super::system::SpinSystem;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MapOptions {
    /// Scale every cell by the host-¹⁵N population factor.
    pub contrast_factor: bool,
}

/// Alternating spin-lock signal over a (Ω, τ) grid, rows indexed by Ω.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectroscopyMap {
    pub omegas: Vec<f64>,
    pub taus: Vec<f64>,
    pub values: Vec<f64>,
}

impl SpectroscopyMap {
    pub fn new(omegas: Vec<f64>, taus: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != omegas.len() * taus.len() {
            return Err(Error::InvalidArgument(format!(
                "map has {} values for a {}×{} grid",
                values.len(),
                omegas.len(),
                taus.len()
            )));
        }
        Ok(SpectroscopyMap { omegas, taus, values })
    }

    pub fn get(&self, i_omega: usize, i_tau: usize) -> f64 {
        self.values[i_omega * self.taus.len() + i_tau]
    }

    pub fn row(&self, i_omega: usize) -> &[f64] {
        let n = self.taus.len();
        &self.values[i_omega * n..(i_omega + 1) * n]
    }
}

/// Raw spin-lock readout `p0(τ)` for every `tau`, starting from `initial`
/// (laser reset is applied first).
///
/// Equivalent to evolving `build_spin_lock(omega, tau, sign)` for each τ,
/// but the lock eigendecomposition and the readout pulse are shared across
/// the τ axis. No T1ρ envelope or contrast factor is applied.
pub fn lock_trace(sys: &SpinSystem, omega: f64, sign: Sign, taus: &[f64], initial: &Ensemble) -> Result<Vec<f64>> {
    if !(omega > 0.0) {
        return Err(Error::InvalidArgument(format!("lock amplitude must be positive, got {omega}")));
    }
    let mut ev = Evolver::new(sys);
    let quarter = 1.0 / (4.0 * omega);
    let prep_t = match sign {
        Sign::Plus => quarter,
        Sign::Minus => 3.0 * quarter,
    };
    let pulse = ev.segment(omega, PHASE_X)?;
    let lock = ev.segment(omega, PHASE_Y)?;
    let dim = sys.dim();
    let half = dim / 2;
    let readout: DMatrix<Complex64> = pulse.propagator(quarter) * &lock.vectors;
    let readout0 = readout.rows(0, half).into_owned();

    let mut coeffs = Vec::new();
    for (w, s) in &initial.members {
        if s.dim() != dim {
            return Err(Error::InvalidArgument("initial state dimension mismatch".into()));
        }
        let branches = match laser_reset(&s.amplitudes) {
            Reset::Pure(p) => vec![(1.0, p)],
            Reset::Split(parts) => parts,
        };
        for (bw, psi) in branches {
            let prepared = pulse.apply(&psi, prep_t);
            coeffs.push((w * bw, lock.vectors.ad_mul(&prepared)));
        }
    }

    let mut out = Vec::with_capacity(taus.len());
    if coeffs.len() * half <= dim {
        for &tau in taus {
            let ph = lock.phases(tau);
            let mut p0 = 0.0;
            for (w, c) in &coeffs {
                let evolved = c.component_mul(&ph);
                p0 += w * (&readout0 * evolved).norm_squared();
            }
            out.push(p0);
        }
        return Ok(out);
    }
    // Large mixtures: p0(τ) = Σ_ij K_ij e^{−2πi(λ_i − λ_j)τ} with
    // K_ij = (R†R)_ji ρ_ij, ρ the mixture in the lock eigenbasis.
    let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
    for (w, c) in &coeffs {
        rho.gerc(Complex64::new(*w, 0.0), c, c, Complex64::new(1.0, 0.0));
    }
    let k = readout0.ad_mul(&readout0).transpose().component_mul(&rho);
    for &tau in taus {
        let ph = lock.phases(tau);
        out.push(ph.dot(&(&k * ph.conjugate())).re);
    }
    Ok(out)
}

/// Alternating spin-lock map from an unpolarized nuclear state.
///
/// Each cell is `(p0⁺ + 1 − p0⁻)/2` after the optional T1ρ envelope, scaled
/// by the host factor when requested. Rows are computed independently, so
/// the output does not depend on scheduling.
pub fn simulate_map(sys: &SpinSystem, omegas: &[f64], taus: &[f64], opts: MapOptions) -> Result<SpectroscopyMap> {
    if omegas.is_empty() || taus.is_empty() {
        return Err(Error::InvalidArgument("map grids must be non-empty".into()));
    }
    let sorted = |v: &[f64]| v.windows(2).all(|w| w[0] <= w[1]);
    if !sorted(omegas) || !sorted(taus) {
        return Err(Error::InvalidArgument("map grids must be sorted".into()));
    }
    let initial = Ensemble::unpolarized(sys.n_nuclei());
    let host = sys.constants.host_n_population;
    let rows: Vec<Vec<f64>> = omegas
        .par_iter()
        .map(|&omega| -> Result<Vec<f64>> {
            let plus = lock_trace(sys, omega, Sign::Plus, taus, &initial)?;
            let minus = lock_trace(sys, omega, Sign::Minus, taus, &initial)?;
            let quarter = 1.0 / (4.0 * omega);
            Ok(taus
                .iter()
                .zip(plus.iter().zip(&minus))
                .map(|(&tau, (&pp, &pm))| {
                    let (pp, pm) = match sys.t1rho {
                        Some(t1) => {
                            let fp = (-(tau + 2.0 * quarter) / t1).exp();
                            let fm = (-(tau + 4.0 * quarter) / t1).exp();
                            (0.5 + (pp - 0.5) * fp, 0.5 + (pm - 0.5) * fm)
                        }
                        None => (pp, pm),
                    };
                    let v = alternating_signal(pp, pm);
                    if opts.contrast_factor {
                        v * host
                    } else {
                        v
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    SpectroscopyMap::new(omegas.to_vec(), taus.to_vec(), rows.concat())
}

/// Peak transfer `max_τ p0(τ)` of the "+" lock for each drive amplitude.
pub fn resonance_profile(sys: &SpinSystem, omegas: &[f64], taus: &[f64], initial: &Ensemble) -> Result<Vec<f64>> {
    omegas
        .par_iter()
        .map(|&omega| {
            let trace = lock_trace(sys, omega, Sign::Plus, taus, initial)?;
            Ok(trace.into_iter().fold(0.0, f64::max))
        })
        .collect()
}
