use std::collections::HashMap;
use std::f64::consts::PI;
use std::rc::Rc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::hamiltonian::rotating_frame_hamiltonian;
use super::sequence::{PulseElement, PulseSequence};
use super::state::{Ensemble, QuantumState};
use super::system::SpinSystem;
use crate::{Error, Result};

const NORM_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct ReadoutResult {
    /// Population of the electron `|0⟩` at readout.
    pub p0: f64,
    /// `p0` weighted by the host-¹⁵N population factor.
    pub contrast_scaled: f64,
    pub final_state: QuantumState,
}

#[derive(Clone, Debug)]
pub struct EnsembleReadout {
    pub p0: f64,
    pub contrast_scaled: f64,
    pub final_states: Ensemble,
}

/// Eigendecomposition `H = V diag(λ) V†` of one constant segment.
pub(crate) struct Segment {
    pub values: DVector<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl Segment {
    pub fn phases(&self, t: f64) -> DVector<Complex64> {
        self.values.map(|l| Complex64::from_polar(1.0, -2.0 * PI * l * t))
    }

    pub fn apply(&self, psi: &DVector<Complex64>, t: f64) -> DVector<Complex64> {
        if t == 0.0 {
            return psi.clone();
        }
        let mut c = self.vectors.ad_mul(psi);
        c.component_mul_assign(&self.phases(t));
        &self.vectors * c
    }

    /// Full propagator `exp(−2πi H t)`.
    pub fn propagator(&self, t: f64) -> DMatrix<Complex64> {
        let mut scaled = self.vectors.clone();
        let ph = self.phases(t);
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= ph[j];
        }
        scaled * self.vectors.adjoint()
    }
}

/// Piecewise-constant propagation with a per-(Ω, φ) eigendecomposition
/// cache. One evolver serves many sequences on the same system.
pub struct Evolver<'a> {
    sys: &'a SpinSystem,
    cache: HashMap<(u64, u64), Rc<Segment>>,
}

impl<'a> Evolver<'a> {
    pub fn new(sys: &'a SpinSystem) -> Self {
        Evolver { sys, cache: HashMap::new() }
    }

    pub fn system(&self) -> &SpinSystem {
        self.sys
    }

    pub(crate) fn segment(&mut self, omega: f64, phase: f64) -> Result<Rc<Segment>> {
        let phase = if omega == 0.0 { 0.0 } else { phase };
        let key = (omega.to_bits(), phase.to_bits());
        if let Some(seg) = self.cache.get(&key) {
            return Ok(seg.clone());
        }
        let h = rotating_frame_hamiltonian(self.sys, omega, phase)?;
        let eig = SymmetricEigen::new(h);
        let seg = Rc::new(Segment { values: eig.eigenvalues, vectors: eig.eigenvectors });
        self.cache.insert(key, seg.clone());
        Ok(seg)
    }

    fn check_state(&self, state: &QuantumState) -> Result<()> {
        if state.dim() != self.sys.dim() {
            return Err(Error::InvalidArgument(format!(
                "state dimension {} does not match system dimension {}",
                state.dim(),
                self.sys.dim()
            )));
        }
        let n = state.norm_sqr();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(())
    }

    /// Applies one non-readout element to a pure state.
    pub(crate) fn step(&mut self, psi: &DVector<Complex64>, el: &PulseElement) -> Result<DVector<Complex64>> {
        match *el {
            PulseElement::Drive { omega, phase, duration } => Ok(self.segment(omega, phase)?.apply(psi, duration)),
            PulseElement::Free { duration } => Ok(self.segment(0.0, 0.0)?.apply(psi, duration)),
            PulseElement::LaserInit | PulseElement::Readout => Ok(psi.clone()),
        }
    }

    pub fn evolve(&mut self, state: &QuantumState, seq: &PulseSequence) -> Result<ReadoutResult> {
        self.check_state(state)?;
        let n = state.n_nuclei();
        let mut psi = state.amplitudes.clone();
        for el in seq.elements() {
            psi = match el {
                PulseElement::LaserInit => match laser_reset(&psi) {
                    Reset::Pure(p) => p,
                    Reset::Split(_) => return Err(Error::EntangledReset),
                },
                PulseElement::Readout => break,
                other => self.step(&psi, other)?,
            };
        }
        let final_state = QuantumState::from_amplitudes(psi, n)?;
        let p0 = self.envelope(final_state.p0(), seq);
        Ok(ReadoutResult { p0, contrast_scaled: p0 * self.sys.constants.host_n_population, final_state })
    }

    pub fn evolve_ensemble(&mut self, ensemble: &Ensemble, seq: &PulseSequence) -> Result<EnsembleReadout> {
        let total = ensemble.total_weight();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(total));
        }
        let mut members: Vec<(f64, DVector<Complex64>)> = Vec::with_capacity(ensemble.members.len());
        let mut n = 0;
        for (w, s) in &ensemble.members {
            self.check_state(s)?;
            n = s.n_nuclei();
            members.push((*w, s.amplitudes.clone()));
        }
        for el in seq.elements() {
            match el {
                PulseElement::Readout => break,
                PulseElement::LaserInit => {
                    members = members
                        .into_iter()
                        .flat_map(|(w, psi)| match laser_reset(&psi) {
                            Reset::Pure(p) => vec![(w, p)],
                            Reset::Split(parts) => parts.into_iter().map(|(pw, p)| (w * pw, p)).collect(),
                        })
                        .collect();
                }
                other => {
                    for m in members.iter_mut() {
                        m.1 = self.step(&m.1, other)?;
                    }
                }
            }
        }
        let mut out = Vec::with_capacity(members.len());
        for (w, psi) in members {
            out.push((w, QuantumState::from_amplitudes(psi, n)?));
        }
        let final_states = Ensemble { members: out };
        let p0 = self.envelope(final_states.p0(), seq);
        Ok(EnsembleReadout { p0, contrast_scaled: p0 * self.sys.constants.host_n_population, final_states })
    }

    /// Rotating-frame relaxation of the readout toward 1/2 over the total
    /// driven time.
    fn envelope(&self, p0: f64, seq: &PulseSequence) -> f64 {
        match self.sys.t1rho {
            Some(t1rho) => 0.5 + (p0 - 0.5) * (-seq.drive_duration() / t1rho).exp(),
            None => p0,
        }
    }
}

pub(crate) enum Reset {
    Pure(DVector<Complex64>),
    Split(Vec<(f64, DVector<Complex64>)>),
}

/// Resets the electron to `|0⟩` keeping the nuclear reduced state.
///
/// `ψ = |0⟩ψ₀ + |−1⟩ψ₁` has nuclear reduced state `|ψ₀⟩⟨ψ₀| + |ψ₁⟩⟨ψ₁|`;
/// a product state maps to a single pure state, an entangled one to the two
/// branches `|0⟩ψ̂₀`, `|0⟩ψ̂₁` with weights `‖ψ₀‖²`, `‖ψ₁‖²`.
pub(crate) fn laser_reset(psi: &DVector<Complex64>) -> Reset {
    let half = psi.len() / 2;
    let a = psi.rows(0, half).into_owned();
    let b = psi.rows(half, half).into_owned();
    let na = a.norm_squared();
    let nb = b.norm_squared();
    let lift = |v: DVector<Complex64>, norm2: f64| {
        let mut out = DVector::zeros(2 * half);
        out.rows_mut(0, half).copy_from(&(v / Complex64::new(norm2.sqrt(), 0.0)));
        out
    };
    const EPS: f64 = 1e-14;
    if nb <= EPS * (na + nb) {
        return Reset::Pure(lift(a, na));
    }
    if na <= EPS * (na + nb) {
        return Reset::Pure(lift(b, nb));
    }
    let overlap = a.dotc(&b).norm_sqr();
    if (na * nb - overlap) <= 1e-12 * na * nb {
        return Reset::Pure(lift(a, na));
    }
    let total = na + nb;
    Reset::Split(vec![(na / total, lift(a, na)), (nb / total, lift(b, nb))])
}

/// Evolves a pure state through `seq`.
pub fn evolve(state: &QuantumState, seq: &PulseSequence, sys: &SpinSystem) -> Result<ReadoutResult> {
    Evolver::new(sys).evolve(state, seq)
}

pub fn evolve_ensemble(ensemble: &Ensemble, seq: &PulseSequence, sys: &SpinSystem) -> Result<EnsembleReadout> {
    Evolver::new(sys).evolve_ensemble(ensemble, seq)
}
