use crate::spin_model::{b_effective, Constants, HyperfineVector};
use crate::{Error, Result, Vec3};

/// Largest nuclear count the dense engine accepts (dimension 8192).
pub const MAX_NUCLEI: usize = 12;

/// Normalization of the electron-dependent hyperfine term.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Coupling {
    /// The part of the electron-dependent coupling transverse to each
    /// nucleus' `B_eff` carries half weight, so the dressed flip-flop matrix
    /// element is `J/2` and spin-lock dynamics follow
    /// [`transfer_probability`](crate::spin_model::transfer_probability).
    #[default]
    Canonical,
    /// Nucleus sees `B + s_z A` with `s_z ∈ {0, −1}`: flip-flop element `J`.
    Bare,
}

#[derive(Clone, Debug)]
pub struct SpinSystem {
    /// Static field, Tesla. The NV axis is the lab ẑ.
    pub b: Vec3,
    pub nuclei: Vec<HyperfineVector>,
    pub constants: Constants,
    /// Rotating-frame relaxation time for the phenomenological lock
    /// envelope, s. `None` disables it.
    pub t1rho: Option<f64>,
    pub coupling: Coupling,
}

impl SpinSystem {
    pub fn new(b: Vec3, nuclei: Vec<HyperfineVector>, constants: Constants) -> Result<Self> {
        if nuclei.len() > MAX_NUCLEI {
            return Err(Error::DimensionOverflow(nuclei.len()));
        }
        if !(b.norm() > 0.0) {
            return Err(Error::InvalidArgument("static field must be non-zero".into()));
        }
        constants.validate()?;
        Ok(SpinSystem { b, nuclei, constants, t1rho: None, coupling: Coupling::Canonical })
    }

    pub fn with_t1rho(mut self, t1rho: Option<f64>) -> Result<Self> {
        if let Some(t) = t1rho {
            if !(t > 0.0) {
                return Err(Error::InvalidArgument(format!("t1rho must be positive, got {t}")));
            }
        }
        self.t1rho = t1rho;
        Ok(self)
    }

    pub fn with_coupling(mut self, coupling: Coupling) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn n_nuclei(&self) -> usize {
        self.nuclei.len()
    }

    pub fn dim(&self) -> usize {
        2 << self.nuclei.len()
    }

    /// Unit vector of `B_eff` for nucleus `k`; falls back to `B̂` when the
    /// effective field vanishes.
    pub fn quantization_axis(&self, k: usize) -> Vec3 {
        let be = b_effective(&self.b, &self.nuclei[k]);
        if be.norm() > 0.0 {
            be.normalize()
        } else {
            self.b.normalize()
        }
    }
}
