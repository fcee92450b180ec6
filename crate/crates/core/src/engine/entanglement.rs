use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;

use super::evolve::ReadoutResult;
use super::state::{spinor_along, QuantumState};
use super::system::SpinSystem;
use crate::{Error, Result};

/// Reduced density matrix of electron ⊗ nucleus `k`, basis `(e, b)` with
/// index `2e + b`.
fn reduced_pair(state: &QuantumState, k: usize) -> Matrix4<Complex64> {
    let n = state.n_nuclei();
    let half = state.dim() / 2;
    let shift = n - 1 - k;
    let mut rho = Matrix4::<Complex64>::zeros();
    for i in 0..state.dim() {
        let ai = state.amplitudes[i];
        if ai.norm_sqr() == 0.0 {
            continue;
        }
        let (ei, mi) = (i / half, i % half);
        let bi = (mi >> shift) & 1;
        let rest = mi & !(1 << shift);
        for bj in 0..2 {
            for ej in 0..2 {
                let j = ej * half + (rest | (bj << shift));
                rho[(2 * ei + bi, 2 * ej + bj)] += ai * state.amplitudes[j].conj();
            }
        }
    }
    rho
}

/// Wootters concurrence of the electron and nucleus `k` (others traced out).
pub fn pair_concurrence(state: &QuantumState, k: usize) -> Result<f64> {
    let n = state.n_nuclei();
    if k >= n {
        return Err(Error::InvalidIndex { index: k, count: n });
    }
    let rho = reduced_pair(state, k);
    // σy ⊗ σy
    let mut yy = Matrix4::<Complex64>::zeros();
    for (i, j, v) in [(0, 3, -1.0), (1, 2, 1.0), (2, 1, 1.0), (3, 0, -1.0)] {
        yy[(i, j)] = Complex64::new(v, 0.0);
    }
    let rho_tilde = yy * rho.conjugate() * yy;
    let eig = SymmetricEigen::new(rho);
    let mut sqrt_rho = Matrix4::<Complex64>::zeros();
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(i);
        sqrt_rho += v * v.adjoint() * Complex64::new(l.max(0.0).sqrt(), 0.0);
    }
    let r = sqrt_rho * rho_tilde * sqrt_rho;
    let r = (r + r.adjoint()) * Complex64::new(0.5, 0.0);
    let mut lambdas: Vec<f64> = SymmetricEigen::new(r).eigenvalues.iter().map(|&m| m.max(0.0).sqrt()).collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0))
}

/// Double-flip (counter-rotating) population after a "+" spin-lock that
/// started in the non-resonant pair `|lower dressed⟩ ⊗ |aligned with B_eff⟩`.
///
/// The readout pulse maps the upper dressed state to `|0⟩`, so the channel
/// `|+,↑⟩ → |−,↓⟩` lands in `|0⟩ ⊗ |anti-aligned⟩`. Summed over nuclei; the
/// ideal two-state model predicts zero.
pub fn leakage(result: &ReadoutResult, sys: &SpinSystem) -> Result<f64> {
    let state = &result.final_state;
    let n = state.n_nuclei();
    if n == 0 || n != sys.n_nuclei() {
        return Err(Error::InvalidArgument("leakage needs at least one nucleus matching the system".into()));
    }
    let half = state.dim() / 2;
    let mut total = 0.0;
    for k in 0..n {
        let anti = spinor_along(&-sys.quantization_axis(k));
        let shift = n - 1 - k;
        for rest in (0..half).filter(|m| (m >> shift) & 1 == 0) {
            let up = state.amplitudes[rest];
            let down = state.amplitudes[rest | (1 << shift)];
            total += (anti[0].conj() * up + anti[1].conj() * down).norm_sqr();
        }
    }
    Ok(total)
}
