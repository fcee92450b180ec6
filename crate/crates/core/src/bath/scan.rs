use rayon::prelude::*;

use super::fid::{synthesize_fid, FidOptions};
use super::sweeps::{run_sweeps, SweepSchedule};
use super::NuclearBath;
use crate::analysis::{dft, fit_double_gaussian, DftOptions, SpectrumFit};
use crate::spin_model::Constants;
use crate::{Error, Result};

/// Ramsey trace and transform settings for linewidth extraction.
#[derive(Clone, Debug, PartialEq)]
pub struct LinewidthSetup {
    pub fid: FidOptions,
    pub t: Vec<f64>,
    pub dft: DftOptions,
}

impl LinewidthSetup {
    /// `n` samples spaced `dt` from zero.
    pub fn uniform(fid: FidOptions, n: usize, dt: f64, dft: DftOptions) -> Self {
        LinewidthSetup { fid, t: (0..n).map(|i| i as f64 * dt).collect(), dft }
    }
}

/// FID → spectrum → double-Gaussian fit for the bath as it stands.
pub fn fit_linewidth(bath: &NuclearBath, setup: &LinewidthSetup, c: &Constants) -> Result<SpectrumFit> {
    let trace = synthesize_fid(bath, &setup.fid, &setup.t, c)?;
    let spec = dft(&trace, &setup.dft)?;
    fit_double_gaussian(&spec, None)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BiasPoint {
    /// Requested bias.
    pub bias: f64,
    pub n_plus: usize,
    pub n_minus: usize,
    pub mean_polarization: f64,
    pub fit: SpectrumFit,
}

impl BiasPoint {
    /// One-σ error on T2*, propagated from the width error.
    pub fn t2star_std(&self) -> f64 {
        self.fit.t2star * self.fit.param_std[4] / self.fit.sigma
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BiasScan {
    pub points: Vec<BiasPoint>,
    /// T2* never drops by more than the combined one-σ error as |bias|
    /// grows.
    pub monotone: bool,
}

/// Re-polarizes the bath from zero for each bias (keeping the template's
/// total sweep count) and fits the resulting FID linewidth. Bias points
/// run in parallel; the output order follows `biases`.
pub fn bias_scan(
    bath: &NuclearBath,
    template: &SweepSchedule,
    biases: &[f64],
    setup: &LinewidthSetup,
    c: &Constants,
) -> Result<BiasScan> {
    let fresh = bath.with_polarizations(&vec![0.0; bath.len()])?;
    let points = biases
        .par_iter()
        .map(|&bias| -> Result<BiasPoint> {
            let wrap = |e: Error| Error::BiasFit { bias, source: Box::new(e) };
            let sched = template.with_bias(bias)?;
            let rec = run_sweeps(&fresh, &sched, c).map_err(wrap)?;
            let polarized = fresh.with_polarizations(rec.final_polarizations()).map_err(wrap)?;
            let fit = fit_linewidth(&polarized, setup, c).map_err(wrap)?;
            Ok(BiasPoint {
                bias,
                n_plus: sched.n_plus,
                n_minus: sched.n_minus,
                mean_polarization: polarized.mean_polarization(),
                fit,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut order: Vec<&BiasPoint> = points.iter().collect();
    order.sort_by(|a, b| a.bias.abs().total_cmp(&b.bias.abs()));
    let monotone = order.windows(2).all(|w| {
        let tol = w[0].t2star_std().hypot(w[1].t2star_std());
        w[1].fit.t2star >= w[0].fit.t2star - tol.max(0.0)
    });
    Ok(BiasScan { points, monotone })
}
