//! Exact state-vector simulation of pulse sequences on the two-level
//! electron ⊗ (spin-1/2)ⁿ Hilbert space.
//!
//! Basis ordering: the electron is the most significant factor
//! (`index = e·2ⁿ + m`, `e = 0` for `|0⟩`, `e = 1` for `|−1⟩`), nucleus 0 is
//! the most significant nuclear bit, and bit value 0 is `|↑⟩` along the lab ẑ.

mod entanglement;
mod evolve;
mod hamiltonian;
mod map;
mod sequence;
mod state;
mod system;

pub use entanglement::{leakage, pair_concurrence};
pub use evolve::{evolve, evolve_ensemble, EnsembleReadout, Evolver, ReadoutResult};
pub use hamiltonian::rotating_frame_hamiltonian;
pub use map::{lock_trace, resonance_profile, simulate_map, MapOptions, SpectroscopyMap};
pub use sequence::{
    alternating_signal, build_alternating, effective_lock_time, build_ramsey, build_spin_lock, PulseElement, PulseSequence, Sign,
    PHASE_X, PHASE_Y,
};
pub use state::{spinor_along, Ensemble, QuantumState, Spinor};
pub use system::{Coupling, SpinSystem, MAX_NUCLEI};
