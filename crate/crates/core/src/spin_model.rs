//! Closed-form Hartmann-Hahn model for one electron-nuclear pair.
//!
//! The dressed electron (Rabi frequency Ω) exchanges polarization with a
//! nucleus whose Zeeman splitting is `γ_n |B − A/2|`. At the matching point
//! the pair `|+,↓⟩ ↔ |−,↑⟩` oscillates at the flip-flop rate
//! `J = ¼ γ_n |A| sin θ`, with θ the angle between `A` and `B_eff`.

use std::f64::consts::PI;

use crate::{Error, Result, Vec3};

/// Vacuum permeability over 4π (CODATA 2018), T·m/A.
pub const MU0_OVER_4PI: f64 = 1.256_637_062_12e-6 / (4.0 * PI);
/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Physical constants used throughout the crate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constants {
    /// Electron gyromagnetic ratio, Hz/T.
    pub gamma_e: f64,
    /// ¹³C gyromagnetic ratio, Hz/T.
    pub gamma_n: f64,
    /// Diamond cubic lattice constant, m.
    pub lattice_const: f64,
    /// Host ¹⁵N hyperfine splitting used by FID synthesis, Hz.
    pub host_n_splitting: f64,
    /// Fraction of the readout contrast carried by the resonant host
    /// hyperfine projection.
    pub host_n_population: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            gamma_e: 2.8024e10,
            gamma_n: 1.07084e7,
            lattice_const: 3.567e-10,
            host_n_splitting: 3.03e6,
            host_n_population: 0.45,
        }
    }
}

impl Constants {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("gamma_e", self.gamma_e),
            ("gamma_n", self.gamma_n),
            ("lattice_const", self.lattice_const),
            ("host_n_splitting", self.host_n_splitting),
            ("host_n_population", self.host_n_population),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if self.host_n_population > 1.0 {
            return Err(Error::InvalidArgument(format!(
                "host_n_population must lie in (0, 1], got {}",
                self.host_n_population
            )));
        }
        Ok(())
    }
}

/// Hyperfine vector: the field (Tesla) felt by a nucleus per unit electron
/// `S_z`. `γ_n |a|` is a frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperfineVector {
    pub a: Vec3,
}

impl HyperfineVector {
    pub fn new(a: Vec3) -> Self {
        HyperfineVector { a }
    }

    pub fn zero() -> Self {
        HyperfineVector { a: Vec3::zeros() }
    }

    pub fn magnitude(&self) -> f64 {
        self.a.norm()
    }

    /// Adds an isotropic (contact) part. In the secular frame it acts along
    /// the NV axis only.
    pub fn with_contact(self, nv_axis: &Vec3, contact: f64) -> Self {
        HyperfineVector { a: self.a + nv_axis.normalize() * contact }
    }

    /// `¼ γ_n |A|`, the coupling strength quoted for a pair, Hz.
    pub fn quarter_coupling(&self, c: &Constants) -> f64 {
        0.25 * c.gamma_n * self.magnitude()
    }
}

/// Resonance prediction for one nucleus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HHPrediction {
    /// Drive amplitude satisfying the matching condition, Hz.
    pub omega_opt: f64,
    /// Flip-flop rate, Hz.
    pub j: f64,
    /// Angle between `B_eff` and `A`, rad.
    pub theta: f64,
    pub b_eff: Vec3,
}

/// Point-dipole hyperfine field of the electron at `pos`.
///
/// `A = (μ0/4π) h γ_e (3 r̂ (ẑ·r̂) − ẑ) / r³` with ẑ the NV axis. Contact
/// term is zero.
pub fn dipolar_hyperfine(pos: &Vec3, nv_axis: &Vec3, c: &Constants) -> Result<HyperfineVector> {
    let r = pos.norm();
    if !(r > 1e-10) {
        return Err(Error::SingularPosition(r));
    }
    let axis_norm = nv_axis.norm();
    if (axis_norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("nv_axis must be a unit vector, |axis| = {axis_norm}")));
    }
    let rhat = pos / r;
    let scale = MU0_OVER_4PI * PLANCK * c.gamma_e / (r * r * r);
    let a = (rhat * (3.0 * nv_axis.dot(&rhat)) - nv_axis) * scale;
    Ok(HyperfineVector { a })
}

/// `B_eff = B − A/2`, the nuclear quantization field under the dressed
/// electron.
pub fn b_effective(b: &Vec3, a: &HyperfineVector) -> Vec3 {
    b - a.a * 0.5
}

/// `δΩ = Ω − γ_n |B_eff|`.
pub fn hh_detuning(omega: f64, b: &Vec3, a: &HyperfineVector, c: &Constants) -> f64 {
    omega - c.gamma_n * b_effective(b, a).norm()
}

pub fn flip_flop_rate(b: &Vec3, a: &HyperfineVector, c: &Constants) -> Result<HHPrediction> {
    let b_eff = b_effective(b, a);
    let be = b_eff.norm();
    if !(be > 0.0) {
        return Err(Error::DegenerateField);
    }
    let am = a.magnitude();
    let theta = if am == 0.0 {
        0.0
    } else {
        angle_between(&b_eff, &a.a)
    };
    Ok(HHPrediction {
        omega_opt: c.gamma_n * be,
        j: 0.25 * c.gamma_n * am * theta.sin(),
        theta,
        b_eff,
    })
}

/// Transfer probability `J²/(J²+δΩ²) sin²(π √(J²+δΩ²) τ)`.
///
/// Inputs are linear frequencies; the sine argument is the angular form
/// `√(J²+δΩ²)·τ/2` with 2π applied.
pub fn transfer_probability(tau: f64, delta_omega: f64, j: f64) -> f64 {
    let rate2 = j * j + delta_omega * delta_omega;
    if rate2 == 0.0 {
        return 0.0;
    }
    let s = (PI * rate2.sqrt() * tau).sin();
    (j * j / rate2 * s * s).clamp(0.0, 1.0)
}

/// Lorentzian envelope `J²/(J²+δΩ²)` of [`transfer_probability`].
pub fn transfer_envelope(delta_omega: f64, j: f64) -> f64 {
    let rate2 = j * j + delta_omega * delta_omega;
    if rate2 == 0.0 {
        0.0
    } else {
        j * j / rate2
    }
}

/// One geometric solution of the inverted resonance conditions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InversionBranch {
    /// `|A|`, Tesla.
    pub a_magnitude: f64,
    /// `¼ γ_n |A|`, Hz.
    pub quarter_coupling: f64,
    /// Angle between `B_eff` and `A`, rad.
    pub theta: f64,
    /// Angle between `B` and `A`, rad.
    pub alpha: f64,
}

impl InversionBranch {
    /// Orientation folded into [0, π/2]; `θ` and `π − θ` give the same J.
    pub fn theta_folded(&self) -> f64 {
        self.theta.min(PI - self.theta)
    }

    /// A hyperfine vector realizing this branch, placed in the plane of `b`
    /// and a fixed perpendicular reference.
    pub fn hyperfine(&self, b: &Vec3) -> HyperfineVector {
        hyperfine_at_angle(b, self.a_magnitude, self.alpha)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Inversion {
    pub primary: InversionBranch,
    /// Every solution, smallest coupling first.
    pub branches: Vec<InversionBranch>,
}

/// Inverts `γ_n|B − A/2| = Ω_opt` and `¼γ_n|A| sin θ = J` for `(|A|, θ)`.
///
/// With `x = |A|/2` resolved along and across `B_eff`
/// (`x cos θ`, `x sin θ = 2J/γ_n`) the field triangle `B = B_eff + A/2`
/// gives a quadratic for the parallel part, so both branches come out in
/// closed form. The primary branch is the one with θ ≤ π/2 when exactly one
/// qualifies, otherwise the smaller coupling.
pub fn invert_spectroscopy(omega_opt_meas: f64, j_meas: f64, b: &Vec3, c: &Constants) -> Result<Inversion> {
    if !(omega_opt_meas > 0.0) {
        return Err(Error::InvalidArgument(format!("omega_opt must be positive, got {omega_opt_meas}")));
    }
    if j_meas < 0.0 || !j_meas.is_finite() {
        return Err(Error::InvalidArgument(format!("j must be non-negative, got {j_meas}")));
    }
    if j_meas > omega_opt_meas {
        return Err(Error::NoSolution(format!(
            "J = {j_meas} Hz exceeds omega_opt = {omega_opt_meas} Hz"
        )));
    }
    let bm = b.norm();
    if !(bm > 0.0) {
        return Err(Error::DegenerateField);
    }
    let e = omega_opt_meas / c.gamma_n;
    let s = 2.0 * j_meas / c.gamma_n;
    if s > bm {
        return Err(Error::NoSolution(format!(
            "2J/γ_n = {s:e} T exceeds |B| = {bm:e} T; no geometry reaches this flip-flop rate"
        )));
    }
    let root = (bm * bm - s * s).sqrt();
    let mut branches = Vec::with_capacity(2);
    for par in [-e + root, -e - root] {
        let x = s.hypot(par);
        let theta = if x == 0.0 { 0.0 } else { s.atan2(par) };
        let alpha = if x == 0.0 {
            0.0
        } else {
            ((e * theta.cos() + x) / bm).clamp(-1.0, 1.0).acos()
        };
        branches.push(InversionBranch {
            a_magnitude: 2.0 * x,
            quarter_coupling: 0.5 * c.gamma_n * x,
            theta,
            alpha,
        });
    }
    branches.sort_by(|p, q| p.a_magnitude.total_cmp(&q.a_magnitude));
    let acute: Vec<_> = branches.iter().filter(|br| br.theta <= PI / 2.0).collect();
    let primary = if acute.len() == 1 { *acute[0] } else { branches[0] };
    Ok(Inversion { primary, branches })
}

/// Hyperfine vector of magnitude `a_magnitude` at angle `alpha` from `b`,
/// lying in the plane of `b` and a deterministic perpendicular.
pub fn hyperfine_at_angle(b: &Vec3, a_magnitude: f64, alpha: f64) -> HyperfineVector {
    let bhat = b.normalize();
    let perp = perpendicular(&bhat);
    HyperfineVector { a: (bhat * alpha.cos() + perp * alpha.sin()) * a_magnitude }
}

/// Hyperfine vector with coupling `¼γ_n|A| = quarter_coupling` whose angle
/// to the resulting `B_eff` is `theta`.
pub fn hyperfine_from_coupling(b: &Vec3, quarter_coupling: f64, theta: f64, c: &Constants) -> Result<HyperfineVector> {
    if quarter_coupling < 0.0 || !(0.0..=PI).contains(&theta) {
        return Err(Error::InvalidArgument(format!(
            "need coupling ≥ 0 and θ ∈ [0, π], got {quarter_coupling}, {theta}"
        )));
    }
    let bm = b.norm();
    let x = 2.0 * quarter_coupling / c.gamma_n;
    let disc = bm * bm - (x * theta.sin()).powi(2);
    if disc < 0.0 {
        return Err(Error::NoSolution(format!(
            "coupling {quarter_coupling} Hz at θ = {theta} rad cannot close the field triangle"
        )));
    }
    let e = -x * theta.cos() + disc.sqrt();
    if !(e > 0.0) {
        return Err(Error::DegenerateField);
    }
    let alpha = if x == 0.0 {
        0.0
    } else {
        ((e * theta.cos() + x) / bm).clamp(-1.0, 1.0).acos()
    };
    Ok(hyperfine_at_angle(b, 2.0 * x, alpha))
}

/// Angle between two non-zero vectors, rad, in [0, π].
pub fn angle_between(u: &Vec3, v: &Vec3) -> f64 {
    u.cross(v).norm().atan2(u.dot(v))
}

fn perpendicular(unit: &Vec3) -> Vec3 {
    let trial = if unit.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    (trial - unit * unit.dot(&trial)).normalize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c() -> Constants {
        Constants::default()
    }

    fn b0() -> Vec3 {
        Vec3::new(0.0, 0.0, 0.5375)
    }

    #[test]
    fn dipolar_scales_as_inverse_cube() {
        let z = Vec3::z();
        let a1 = dipolar_hyperfine(&Vec3::new(0.0, 0.0, 0.6e-9), &z, &c()).unwrap();
        let a2 = dipolar_hyperfine(&Vec3::new(0.0, 0.0, 1.2e-9), &z, &c()).unwrap();
        assert_relative_eq!(a1.magnitude() / a2.magnitude(), 8.0, max_relative = 1e-12);
    }

    #[test]
    fn dipolar_perpendicular_is_antiparallel_to_axis() {
        let r = 0.7e-9;
        let a = dipolar_hyperfine(&Vec3::new(r, 0.0, 0.0), &Vec3::z(), &c()).unwrap();
        let expected = MU0_OVER_4PI * PLANCK * c().gamma_e / r.powi(3);
        assert_relative_eq!(a.a.z, -expected, max_relative = 1e-12);
        assert!(a.a.x.abs() < 1e-18 && a.a.y.abs() < 1e-18);
    }

    #[test]
    fn dipolar_golden_half_nanometre_on_axis() {
        // μ0/4π · h · γ_e · 2 / (0.5 nm)³ × γ_n, evaluated independently:
        // 1.2566370621e-7 · 6.62607015e-34 · 2.8024e10 · 2 / 1.25e-28 · 1.07084e7
        let a = dipolar_hyperfine(&Vec3::new(0.0, 0.0, 0.5e-9), &Vec3::z(), &c()).unwrap();
        assert_relative_eq!(c().gamma_n * a.magnitude(), 318_149.116_856_319_3, max_relative = 1e-9);
    }

    #[test]
    fn dipolar_rejects_origin() {
        assert!(matches!(
            dipolar_hyperfine(&Vec3::zeros(), &Vec3::z(), &c()),
            Err(Error::SingularPosition(_))
        ));
        assert!(dipolar_hyperfine(&Vec3::new(0.0, 0.0, 1e-9), &Vec3::new(0.0, 0.0, 2.0), &c()).is_err());
    }

    #[test]
    fn b_effective_cases() {
        let b = b0();
        assert_eq!(b_effective(&b, &HyperfineVector::zero()), b);
        assert_eq!(b_effective(&b, &HyperfineVector::new(b * 2.0)), Vec3::zeros());
        let a = HyperfineVector::new(Vec3::new(1e-3, 0.0, 4e-3));
        let be = b_effective(&b, &a);
        assert_relative_eq!(be.x, -0.5e-3);
        assert_eq!(be.y, 0.0);
        assert_relative_eq!(be.z, 0.5375 - 2e-3);
    }

    #[test]
    fn detuning_at_bare_larmor() {
        let d = hh_detuning(1.07084e7 * 0.5375, &b0(), &HyperfineVector::zero(), &c());
        assert!(d.abs() < 1e-6);
        let d = hh_detuning(5.7558e6, &b0(), &HyperfineVector::zero(), &c());
        assert!(d.abs() < 100.0, "{d}");
    }

    #[test]
    fn flip_flop_limits() {
        let b = b0();
        let par = HyperfineVector::new(Vec3::new(0.0, 0.0, 1e-3));
        assert!(flip_flop_rate(&b, &par, &c()).unwrap().j.abs() < 1e-9);

        // A ⊥ B_eff: choose A = (a, 0, a²/(4 b))-free construction through the helper.
        let a = hyperfine_from_coupling(&b, 150e3, PI / 2.0, &c()).unwrap();
        let p = flip_flop_rate(&b, &a, &c()).unwrap();
        assert_relative_eq!(p.theta, PI / 2.0, epsilon = 1e-9);
        assert_relative_eq!(p.j, a.quarter_coupling(&c()), max_relative = 1e-9);
    }

    #[test]
    fn flip_flop_measured_pair() {
        let a = hyperfine_from_coupling(&b0(), 220e3, 56f64.to_radians(), &c()).unwrap();
        let p = flip_flop_rate(&b0(), &a, &c()).unwrap();
        assert_relative_eq!(p.j, 220e3 * 56f64.to_radians().sin(), max_relative = 1e-9);
        assert!((p.j - 188e3).abs() <= 30e3);
    }

    #[test]
    fn degenerate_effective_field() {
        let b = b0();
        assert!(matches!(
            flip_flop_rate(&b, &HyperfineVector::new(b * 2.0), &c()),
            Err(Error::DegenerateField)
        ));
    }

    #[test]
    fn transfer_probability_checkpoints() {
        let j = 188e3;
        assert_relative_eq!(transfer_probability(1.0 / (2.0 * j), 0.0, j), 1.0, epsilon = 1e-12);
        assert_relative_eq!(transfer_probability(1.0 / (4.0 * j), 0.0, j), 0.5, epsilon = 1e-12);
        for k in 0..50 {
            let tau = k as f64 * 1.3e-7;
            assert!(transfer_probability(tau, j, j) <= 0.5 + 1e-15);
        }
        assert_eq!(transfer_probability(1e-6, 0.0, 0.0), 0.0);
    }

    #[test]
    fn inversion_vanishing_coupling() {
        let b = b0();
        let inv = invert_spectroscopy(c().gamma_n * b.norm(), 1e-3, &b, &c()).unwrap();
        assert!(inv.primary.quarter_coupling < 1.0, "{:?}", inv.primary);
    }

    #[test]
    fn inversion_rejects_impossible_rate() {
        let b = Vec3::new(0.0, 0.0, 0.01);
        let err = invert_spectroscopy(107_084.0, 60e3, &b, &c()).unwrap_err();
        assert!(matches!(err, Error::NoSolution(_)), "{err}");
        assert!(invert_spectroscopy(1e6, 2e6, &b0(), &c()).is_err());
        assert!(invert_spectroscopy(-1.0, 2e3, &b0(), &c()).is_err());
    }

    #[test]
    fn inversion_reports_both_branches() {
        let inv = invert_spectroscopy(5.88e6, 188e3, &b0(), &c()).unwrap();
        assert_eq!(inv.branches.len(), 2);
        assert!(inv.branches[0].a_magnitude < inv.branches[1].a_magnitude);
        for br in &inv.branches {
            let pred = flip_flop_rate(&b0(), &br.hyperfine(&b0()), &c()).unwrap();
            assert_relative_eq!(pred.omega_opt, 5.88e6, max_relative = 1e-9);
            assert_relative_eq!(pred.j, 188e3, max_relative = 1e-7);
        }
    }
}
