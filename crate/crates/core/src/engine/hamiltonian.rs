use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use super::system::{Coupling, SpinSystem, MAX_NUCLEI};
use crate::spin_model::b_effective;
use crate::{Error, Result, Vec3};

/// `F·I` for a spin-1/2 in the (↑, ↓) basis.
pub(crate) fn field_dot_spin(f: &Vec3) -> Matrix2<Complex64> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    Matrix2::new(
        c(0.5 * f.z, 0.0),
        c(0.5 * f.x, -0.5 * f.y),
        c(0.5 * f.x, 0.5 * f.y),
        c(-0.5 * f.z, 0.0),
    )
}

/// Rotating-frame Hamiltonian in Hz (propagate with `exp(−2πi H t)`).
///
/// `H = (Ω/2)(cos φ σx + sin φ σy) ⊗ 1 − Σ_k γ_n (B + s_z A_k)·I_k` with
/// `s_z = diag(0, −1)`. Writing `s_z = −½ + σz/2` splits every nucleus into
/// an electron-independent part `−γ_n B_eff·I` and an electron-dependent
/// part `−(γ_n/2) σz ⊗ A·I`; under [`Coupling::Canonical`] the component of
/// `A` transverse to `B_eff` in the latter is halved.
pub fn rotating_frame_hamiltonian(sys: &SpinSystem, omega: f64, phase: f64) -> Result<DMatrix<Complex64>> {
    let n = sys.n_nuclei();
    if n > MAX_NUCLEI {
        return Err(Error::DimensionOverflow(n));
    }
    if !(omega >= 0.0) || !omega.is_finite() {
        return Err(Error::InvalidArgument(format!("drive amplitude must be ≥ 0, got {omega}")));
    }
    let dim = sys.dim();
    let half = dim / 2;
    let gamma = sys.constants.gamma_n;
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);

    if omega > 0.0 {
        let off = Complex64::from_polar(omega / 2.0, -phase);
        for m in 0..half {
            h[(m, half + m)] += off;
            h[(half + m, m)] += off.conj();
        }
    }

    for (k, a) in sys.nuclei.iter().enumerate() {
        let b_eff = b_effective(&sys.b, a);
        let a_dep = match sys.coupling {
            Coupling::Bare => a.a,
            Coupling::Canonical => {
                let axis = sys.quantization_axis(k);
                let par = axis * axis.dot(&a.a);
                par + (a.a - par) * 0.5
            }
        };
        let common = field_dot_spin(&(b_eff * -gamma));
        let dependent = field_dot_spin(&(a_dep * (-0.5 * gamma)));
        let shift = n - 1 - k;
        for e in 0..2 {
            let sigma_z = if e == 0 { 1.0 } else { -1.0 };
            let block = common + dependent * Complex64::new(sigma_z, 0.0);
            for m in 0..half {
                let bit = (m >> shift) & 1;
                for b2 in 0..2 {
                    let m2 = (m & !(1 << shift)) | (b2 << shift);
                    h[(e * half + m2, e * half + m)] += block[(b2, bit)];
                }
            }
        }
    }

    let adj = h.adjoint();
    h += adj;
    h *= Complex64::new(0.5, 0.0);
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin_model::{flip_flop_rate, hyperfine_from_coupling, Constants, HyperfineVector};
    use nalgebra::SymmetricEigen;

    fn b() -> Vec3 {
        Vec3::new(0.0, 0.0, 0.5375)
    }

    #[test]
    fn bare_drive() {
        let sys = SpinSystem::new(b(), vec![], Constants::default()).unwrap();
        let h = rotating_frame_hamiltonian(&sys, 2e6, 0.0).unwrap();
        assert_eq!(h.nrows(), 2);
        assert!((h[(0, 1)].re - 1e6).abs() < 1e-9 && h[(0, 1)].im.abs() < 1e-9);
        assert!(h[(0, 0)].norm() < 1e-12);
    }

    #[test]
    fn bare_zeeman_levels() {
        let sys = SpinSystem::new(b(), vec![HyperfineVector::zero()], Constants::default()).unwrap();
        let h = rotating_frame_hamiltonian(&sys, 0.0, 0.0).unwrap();
        let eig = SymmetricEigen::new(h);
        let larmor = 1.07084e7 * 0.5375;
        for v in eig.eigenvalues.iter() {
            assert!((v.abs() - larmor / 2.0).abs() < 1e-6, "{v}");
        }
    }

    #[test]
    fn hermitian_with_tilted_coupling() {
        let a = HyperfineVector::new(Vec3::new(3e-3, -2e-3, 5e-3));
        let sys = SpinSystem::new(b(), vec![a, HyperfineVector::new(Vec3::new(0.0, 1e-3, 0.0))], Constants::default())
            .unwrap();
        let h = rotating_frame_hamiltonian(&sys, 5e6, 1.1).unwrap();
        assert!((&h - h.adjoint()).norm() < 1e-12);
    }

    #[test]
    fn too_many_nuclei() {
        let sys = SpinSystem::new(b(), vec![HyperfineVector::zero(); 13], Constants::default());
        assert!(matches!(sys, Err(Error::DimensionOverflow(13))));
    }

    /// Dressed-basis flip-flop element `⟨−,↑|H|+,↓⟩` against `J/2`.
    #[test]
    fn dressed_flip_flop_element() {
        let c = Constants::default();
        let a = hyperfine_from_coupling(&b(), 100e3, 1.2, &c).unwrap();
        let pred = flip_flop_rate(&b(), &a, &c).unwrap();
        let sys = SpinSystem::new(b(), vec![a], c).unwrap();
        let h = rotating_frame_hamiltonian(&sys, pred.omega_opt, 0.0).unwrap();

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = [Complex64::new(s, 0.0), Complex64::new(s, 0.0)];
        let minus = [Complex64::new(s, 0.0), Complex64::new(-s, 0.0)];
        let axis = sys.quantization_axis(0);
        let up = crate::engine::spinor_along(&axis);
        let down = crate::engine::spinor_along(&-axis);
        let ket = crate::engine::QuantumState::product(plus, &[down]);
        let bra = crate::engine::QuantumState::product(minus, &[up]);
        let elem = bra.amplitudes.dotc(&(&h * &ket.amplitudes));
        assert!((elem.norm() - pred.j / 2.0).abs() < 1e-6 * pred.j, "{} vs {}", elem.norm(), pred.j / 2.0);

        let bare = sys.clone().with_coupling(Coupling::Bare);
        let h = rotating_frame_hamiltonian(&bare, pred.omega_opt, 0.0).unwrap();
        let elem = bra.amplitudes.dotc(&(&h * &ket.amplitudes));
        assert!((elem.norm() - pred.j).abs() < 1e-6 * pred.j);
    }
}
