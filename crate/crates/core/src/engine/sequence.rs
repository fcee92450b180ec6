use std::f64::consts::PI;

use crate::{Error, Result};

/// Drive phase of an X pulse.
pub const PHASE_X: f64 = 0.0;
/// Drive phase of a Y pulse (90° shifted).
pub const PHASE_Y: f64 = PI / 2.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PulseElement {
    /// Optical reset of the electron to `|0⟩`; nuclei untouched.
    LaserInit,
    /// Resonant microwave drive: Rabi frequency (Hz), phase (rad), duration (s).
    Drive { omega: f64, phase: f64, duration: f64 },
    Free { duration: f64 },
    Readout,
}

impl PulseElement {
    pub fn duration(&self) -> f64 {
        match *self {
            PulseElement::Drive { duration, .. } | PulseElement::Free { duration } => duration,
            _ => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Validated element list ending in exactly one `Readout`.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseSequence {
    elements: Vec<PulseElement>,
}

impl PulseSequence {
    /// Checks: non-empty; a single trailing `Readout`; no `Drive` ahead of
    /// the first `LaserInit` when the sequence contains one; durations and
    /// drive amplitudes finite and non-negative.
    pub fn new(elements: Vec<PulseElement>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::EmptySequence);
        }
        let readouts = elements.iter().filter(|e| matches!(e, PulseElement::Readout)).count();
        if readouts != 1 || !matches!(elements.last(), Some(PulseElement::Readout)) {
            return Err(Error::InvalidSequence("sequence must end with exactly one Readout".into()));
        }
        if let Some(first_init) = elements.iter().position(|e| matches!(e, PulseElement::LaserInit)) {
            if elements[..first_init].iter().any(|e| matches!(e, PulseElement::Drive { .. })) {
                return Err(Error::InvalidSequence("Drive before the first LaserInit".into()));
            }
        }
        for e in &elements {
            let d = e.duration();
            if !(d >= 0.0 && d.is_finite()) {
                return Err(Error::InvalidSequence(format!("invalid duration {d}")));
            }
            if let PulseElement::Drive { omega, phase, .. } = *e {
                if !(omega >= 0.0 && omega.is_finite() && phase.is_finite()) {
                    return Err(Error::InvalidSequence(format!("invalid drive ({omega} Hz, {phase} rad)")));
                }
            }
        }
        Ok(PulseSequence { elements })
    }

    pub fn elements(&self) -> &[PulseElement] {
        &self.elements
    }

    pub fn total_duration(&self) -> f64 {
        self.elements.iter().map(PulseElement::duration).sum()
    }

    pub fn drive_duration(&self) -> f64 {
        self.elements
            .iter()
            .filter(|e| matches!(e, PulseElement::Drive { .. }))
            .map(PulseElement::duration)
            .sum()
    }
}

/// Spin-locking sequence: laser, π/2 (X), lock (Y) for `tau`, π/2 (X), readout.
///
/// `Sign::Minus` uses a 3π/2 preparation pulse and therefore locks in the
/// opposite dressed state; its readout is inverted (no transfer gives
/// `p0 = 1`).
pub fn build_spin_lock(omega: f64, tau: f64, sign: Sign) -> Result<PulseSequence> {
    if !(omega > 0.0) {
        return Err(Error::InvalidArgument(format!("lock amplitude must be positive, got {omega}")));
    }
    let quarter = 1.0 / (4.0 * omega);
    let prep = match sign {
        Sign::Plus => quarter,
        Sign::Minus => 3.0 * quarter,
    };
    PulseSequence::new(vec![
        PulseElement::LaserInit,
        PulseElement::Drive { omega, phase: PHASE_X, duration: prep },
        PulseElement::Drive { omega, phase: PHASE_Y, duration: tau },
        PulseElement::Drive { omega, phase: PHASE_X, duration: quarter },
        PulseElement::Readout,
    ])
}

/// Lock time that the closed-form transfer law should be evaluated at for a
/// lock of length `tau`: the two π/2 pulses add a quarter period of
/// flip-flop evolution between them.
pub fn effective_lock_time(omega: f64, tau: f64) -> f64 {
    tau + 1.0 / (4.0 * omega)
}

/// The "+" and "−" halves of the alternating spin-lock.
pub fn build_alternating(omega: f64, tau: f64) -> Result<(PulseSequence, PulseSequence)> {
    Ok((build_spin_lock(omega, tau, Sign::Plus)?, build_spin_lock(omega, tau, Sign::Minus)?))
}

/// Transfer signal of an alternating pair: the "−" readout is inverted
/// before averaging so both halves report the dressed-state flip probability.
pub fn alternating_signal(p0_plus: f64, p0_minus: f64) -> f64 {
    0.5 * (p0_plus + 1.0 - p0_minus)
}

/// Ramsey sequence with π/2 pulses at `pulse_omega`; the software detuning
/// is a phase ramp `2π·detuning·tau` on the closing pulse.
pub fn build_ramsey(detuning: f64, tau: f64, pulse_omega: f64) -> Result<PulseSequence> {
    if !(pulse_omega > 0.0) {
        return Err(Error::InvalidArgument(format!("pulse amplitude must be positive, got {pulse_omega}")));
    }
    let quarter = 1.0 / (4.0 * pulse_omega);
    PulseSequence::new(vec![
        PulseElement::LaserInit,
        PulseElement::Drive { omega: pulse_omega, phase: PHASE_X, duration: quarter },
        PulseElement::Free { duration: tau },
        PulseElement::Drive { omega: pulse_omega, phase: 2.0 * PI * detuning * tau, duration: quarter },
        PulseElement::Readout,
    ])
}
