//! Random ¹³C baths, kinetic polarization by repeated spin-lock sweeps and
//! Ramsey (FID) synthesis.

mod fid;
mod lattice;
mod scan;
mod sweeps;

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spin_model::{dipolar_hyperfine, Constants, HyperfineVector};
use crate::{Error, Result, Vec3};

pub use fid::{synthesize_fid, FidOptions};
pub use scan::{bias_scan, fit_linewidth, BiasPoint, BiasScan, LinewidthSetup};
pub use sweeps::{
    cooling_schedule, frozen_fraction, run_sweeps, CoolingDesign, Interleaving, PolarizationRecord, SweepSchedule,
};

#[derive(Clone, Debug, PartialEq)]
pub struct BathConfig {
    /// Probability that a lattice site holds a ¹³C.
    pub abundance: f64,
    /// Bath radius around the vacancy, m.
    pub radius: f64,
    /// Sites closer than this are left empty, m.
    pub min_distance: f64,
    /// Static field, T.
    pub b: Vec3,
    pub seed: u64,
    /// Keep only the nearest `n` occupied sites.
    pub target_count: Option<usize>,
}

impl Default for BathConfig {
    fn default() -> Self {
        BathConfig {
            abundance: 0.0111,
            radius: 4e-9,
            min_distance: 2.5e-10,
            b: Vec3::new(0.0, 0.0, 0.5375),
            seed: 0,
            target_count: None,
        }
    }
}

impl BathConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.abundance) {
            return Err(Error::InvalidArgument(format!("abundance must lie in [0, 1), got {}", self.abundance)));
        }
        if !(self.min_distance > 0.0) || !(self.radius > self.min_distance) {
            return Err(Error::InvalidArgument(format!(
                "need radius > min_distance > 0, got {} and {}",
                self.radius, self.min_distance
            )));
        }
        if !(self.b.norm() > 0.0) {
            return Err(Error::InvalidArgument("static field must be non-zero".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Nucleus {
    pub position: Vec3,
    pub a: HyperfineVector,
    pub polarization: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NuclearBath {
    pub nuclei: Vec<Nucleus>,
    pub config: BathConfig,
}

/// Places ¹³C on the diamond lattice around the NV.
///
/// Sites are visited nearest first and each draws one uniform number from
/// a ChaCha8 stream seeded with `cfg.seed`, so a bath is a prefix-stable
/// function of the seed. Polarizations start at zero.
pub fn generate_bath(cfg: &BathConfig, c: &Constants) -> Result<NuclearBath> {
    cfg.validate()?;
    c.validate()?;
    let sites = lattice::sites_within(cfg.radius, c.lattice_const);
    if !sites.iter().any(|(_, r)| r.norm() >= cfg.min_distance) {
        return Err(Error::EmptyBath(format!(
            "no lattice site between {:e} m and {:e} m",
            cfg.min_distance, cfg.radius
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut nuclei = Vec::new();
    for (_, r) in sites {
        let occupied = rng.random::<f64>() < cfg.abundance;
        if occupied && r.norm() >= cfg.min_distance {
            let a = dipolar_hyperfine(&r, &Vec3::z(), c)?;
            nuclei.push(Nucleus { position: r, a, polarization: 0.0 });
        }
    }
    if let Some(n) = cfg.target_count {
        if nuclei.len() < n {
            return Err(Error::EmptyBath(format!(
                "only {} occupied sites within {:e} m, {} requested",
                nuclei.len(),
                cfg.radius,
                n
            )));
        }
        nuclei.truncate(n);
    }
    Ok(NuclearBath { nuclei, config: cfg.clone() })
}

impl NuclearBath {
    pub fn len(&self) -> usize {
        self.nuclei.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nuclei.is_empty()
    }

    pub fn polarizations(&self) -> Vec<f64> {
        self.nuclei.iter().map(|n| n.polarization).collect()
    }

    pub fn with_polarizations(&self, p: &[f64]) -> Result<NuclearBath> {
        if p.len() != self.nuclei.len() {
            return Err(Error::InvalidArgument(format!("{} polarizations for {} nuclei", p.len(), self.len())));
        }
        if let Some(bad) = p.iter().find(|v| !(v.abs() <= 1.0)) {
            return Err(Error::InvalidArgument(format!("polarization {bad} outside [−1, 1]")));
        }
        let mut out = self.clone();
        for (n, &v) in out.nuclei.iter_mut().zip(p) {
            n.polarization = v;
        }
        Ok(out)
    }

    pub fn mean_polarization(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.nuclei.iter().map(|n| n.polarization).sum::<f64>() / self.len() as f64
        }
    }

    /// One nucleus per line: `x y z` (m), `Ax Ay Az` (T), polarization,
    /// tab-separated, after a `#` header echoing the configuration.
    pub fn to_text(&self) -> String {
        let cfg = &self.config;
        let mut s = String::new();
        let target = cfg.target_count.map_or("none".to_string(), |n| n.to_string());
        let _ = writeln!(s, "# hhdr bath");
        let _ = writeln!(
            s,
            "# seed={} abundance={:.16e} radius={:.16e} min_distance={:.16e} b={:.16e},{:.16e},{:.16e} target_count={}",
            cfg.seed, cfg.abundance, cfg.radius, cfg.min_distance, cfg.b.x, cfg.b.y, cfg.b.z, target
        );
        let _ = writeln!(s, "# x_m\ty_m\tz_m\tax_T\tay_T\taz_T\tpolarization");
        for n in &self.nuclei {
            let _ = writeln!(
                s,
                "{:.16e}\t{:.16e}\t{:.16e}\t{:.16e}\t{:.16e}\t{:.16e}\t{:.16e}",
                n.position.x, n.position.y, n.position.z, n.a.a.x, n.a.a.y, n.a.a.z, n.polarization
            );
        }
        s
    }

    pub fn from_text(text: &str) -> Result<NuclearBath> {
        let mut cfg = None;
        let mut nuclei = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            let err = |msg: String| Error::Parse(format!("line {}: {msg}", lineno + 1));
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if rest.trim_start().starts_with("seed=") {
                    cfg = Some(parse_header(rest).map_err(err)?);
                }
                continue;
            }
            let v: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| err(format!("{t:?}: {e}"))))
                .collect::<Result<_>>()?;
            if v.len() != 7 {
                return Err(err(format!("expected 7 columns, found {}", v.len())));
            }
            if !(v[6].abs() <= 1.0) {
                return Err(err(format!("polarization {} outside [−1, 1]", v[6])));
            }
            nuclei.push(Nucleus {
                position: Vec3::new(v[0], v[1], v[2]),
                a: HyperfineVector::new(Vec3::new(v[3], v[4], v[5])),
                polarization: v[6],
            });
        }
        let config = cfg.ok_or_else(|| Error::Parse("missing configuration header".into()))?;
        Ok(NuclearBath { nuclei, config })
    }
}

fn parse_header(rest: &str) -> std::result::Result<BathConfig, String> {
    let mut cfg = BathConfig::default();
    for item in rest.split_whitespace() {
        let (k, v) = item.split_once('=').ok_or_else(|| format!("malformed header item {item:?}"))?;
        let num = |s: &str| s.parse::<f64>().map_err(|e| format!("{k}: {e}"));
        match k {
            "seed" => cfg.seed = v.parse().map_err(|e| format!("seed: {e}"))?,
            "abundance" => cfg.abundance = num(v)?,
            "radius" => cfg.radius = num(v)?,
            "min_distance" => cfg.min_distance = num(v)?,
            "b" => {
                let c: Vec<f64> = v.split(',').map(num).collect::<std::result::Result<_, _>>()?;
                if c.len() != 3 {
                    return Err("b needs three components".into());
                }
                cfg.b = Vec3::new(c[0], c[1], c[2]);
            }
            "target_count" => {
                cfg.target_count = match v {
                    "none" => None,
                    n => Some(n.parse().map_err(|e| format!("target_count: {e}"))?),
                }
            }
            other => return Err(format!("unknown header key {other:?}")),
        }
    }
    Ok(cfg)
}
