use nalgebra::DVector;
use num_complex::Complex64;

use crate::{Error, Result, Vec3};

/// Two-component amplitude pair `(c_↑, c_↓)` or `(c_0, c_−1)`.
pub type Spinor = [Complex64; 2];

/// Spin-1/2 state pointing along `dir` (the +1 eigenvector of `n̂·σ`).
pub fn spinor_along(dir: &Vec3) -> Spinor {
    let n = dir.normalize();
    let theta = n.z.clamp(-1.0, 1.0).acos();
    let phi = n.y.atan2(n.x);
    [
        Complex64::new((theta / 2.0).cos(), 0.0),
        Complex64::from_polar((theta / 2.0).sin(), phi),
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    pub amplitudes: DVector<Complex64>,
    n_nuclei: usize,
}

impl QuantumState {
    pub fn from_amplitudes(amplitudes: DVector<Complex64>, n_nuclei: usize) -> Result<Self> {
        if amplitudes.len() != 2 << n_nuclei {
            return Err(Error::InvalidArgument(format!(
                "{} amplitudes do not match {} nuclei",
                amplitudes.len(),
                n_nuclei
            )));
        }
        Ok(QuantumState { amplitudes, n_nuclei })
    }

    /// Computational basis state `index`.
    pub fn basis(index: usize, n_nuclei: usize) -> Self {
        let mut amplitudes = DVector::zeros(2 << n_nuclei);
        amplitudes[index] = Complex64::new(1.0, 0.0);
        QuantumState { amplitudes, n_nuclei }
    }

    /// Electron `|0⟩` with every nucleus `|↑⟩` along ẑ.
    pub fn ground(n_nuclei: usize) -> Self {
        Self::basis(0, n_nuclei)
    }

    /// Product state `electron ⊗ nuclei[0] ⊗ nuclei[1] ⊗ …`.
    pub fn product(electron: Spinor, nuclei: &[Spinor]) -> Self {
        let mut amps = vec![electron[0], electron[1]];
        for s in nuclei {
            amps = amps.iter().flat_map(|&a| [a * s[0], a * s[1]]).collect();
        }
        QuantumState { amplitudes: DVector::from_vec(amps), n_nuclei: nuclei.len() }
    }

    pub fn n_nuclei(&self) -> usize {
        self.n_nuclei
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            self.amplitudes /= Complex64::new(n, 0.0);
        }
    }

    /// Population of the electron `|0⟩` sublevel.
    pub fn p0(&self) -> f64 {
        let half = self.dim() / 2;
        self.amplitudes.rows(0, half).iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &QuantumState) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

/// Statistical mixture of pure states, used where a laser reset leaves the
/// nuclei in a mixed reduced state or the initial bath is unpolarized.
#[derive(Clone, Debug)]
pub struct Ensemble {
    pub members: Vec<(f64, QuantumState)>,
}

impl Ensemble {
    pub fn pure(state: QuantumState) -> Self {
        Ensemble { members: vec![(1.0, state)] }
    }

    /// Electron `|0⟩` with the nuclei maximally mixed, unravelled over the
    /// ẑ product basis.
    pub fn unpolarized(n_nuclei: usize) -> Self {
        let count = 1usize << n_nuclei;
        let w = 1.0 / count as f64;
        Ensemble { members: (0..count).map(|m| (w, QuantumState::basis(m, n_nuclei))).collect() }
    }

    /// Electron `|0⟩`, each nucleus independently polarized by `p[k]` along
    /// its own `axes[k]` (the mixture is unravelled over the 2ⁿ aligned /
    /// anti-aligned products).
    pub fn polarized(axes: &[Vec3], polarizations: &[f64]) -> Result<Self> {
        if axes.len() != polarizations.len() {
            return Err(Error::InvalidArgument("axes and polarizations differ in length".into()));
        }
        let n = axes.len();
        let up: Vec<Spinor> = axes.iter().map(spinor_along).collect();
        let down: Vec<Spinor> = axes.iter().map(|a| spinor_along(&-a)).collect();
        let zero = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let mut members = Vec::new();
        for mask in 0..(1usize << n) {
            let mut w = 1.0;
            let mut spinors = Vec::with_capacity(n);
            for k in 0..n {
                let p = polarizations[k].clamp(-1.0, 1.0);
                if mask >> k & 1 == 0 {
                    w *= (1.0 + p) / 2.0;
                    spinors.push(up[k]);
                } else {
                    w *= (1.0 - p) / 2.0;
                    spinors.push(down[k]);
                }
            }
            if w > 0.0 {
                members.push((w, QuantumState::product(zero, &spinors)));
            }
        }
        Ok(Ensemble { members })
    }

    pub fn total_weight(&self) -> f64 {
        self.members.iter().map(|(w, _)| w).sum()
    }

    pub fn p0(&self) -> f64 {
        self.members.iter().map(|(w, s)| w * s.p0()).sum()
    }
}
