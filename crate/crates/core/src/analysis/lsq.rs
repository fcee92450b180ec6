//! Damped Gauss-Newton (Levenberg-Marquardt damping) for small dense
//! least-squares problems with analytic Jacobians.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

pub(crate) trait Model {
    fn n_params(&self) -> usize;
    /// Model values at `x` for parameters `p`, and `∂model/∂p` row by row.
    fn eval(&self, p: &[f64], x: &[f64], values: &mut [f64], jac: &mut DMatrix<f64>);
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct LsqOptions {
    pub max_iter: usize,
    /// Converged when every `|δ_i| ≤ step_tol (|p_i| + step_tol)`.
    pub step_tol: f64,
}

impl Default for LsqOptions {
    fn default() -> Self {
        LsqOptions { max_iter: 200, step_tol: 1e-8 }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct LsqResult {
    pub params: Vec<f64>,
    pub rss: f64,
    pub iterations: usize,
    /// One-standard-deviation errors from `s² (JᵀJ)⁻¹`, `s² = RSS/(m − k)`.
    pub std: Vec<f64>,
}

fn rss_at<M: Model>(model: &M, p: &[f64], x: &[f64], y: &[f64], vals: &mut [f64], jac: &mut DMatrix<f64>) -> f64 {
    model.eval(p, x, vals, jac);
    vals.iter().zip(y).map(|(v, t)| (t - v) * (t - v)).sum()
}

pub(crate) fn solve<M: Model>(model: &M, x: &[f64], y: &[f64], p0: &[f64], opts: LsqOptions) -> Result<LsqResult> {
    let k = model.n_params();
    let m = x.len();
    if m <= k {
        return Err(Error::InvalidArgument(format!("{m} samples cannot determine {k} parameters")));
    }
    let mut p = p0.to_vec();
    let mut vals = vec![0.0; m];
    let mut jac = DMatrix::zeros(m, k);
    let mut trial_vals = vec![0.0; m];
    let mut trial_jac = DMatrix::zeros(m, k);
    let mut rss = rss_at(model, &p, x, y, &mut vals, &mut jac);
    if !rss.is_finite() {
        return Err(Error::NonConvergence { iterations: 0, last: p });
    }
    let mut lambda = 1e-3;
    let mut converged_at = None;

    for iter in 1..=opts.max_iter {
        let r = DVector::from_iterator(m, y.iter().zip(&vals).map(|(t, v)| t - v));
        let jtj = jac.tr_mul(&jac);
        let g = jac.tr_mul(&r);
        let mut accepted = false;
        let mut small_step = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for i in 0..k {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-30);
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let delta = chol.solve(&g);
            small_step = delta.iter().zip(&p).all(|(d, pi)| d.abs() <= opts.step_tol * (pi.abs() + opts.step_tol));
            let trial: Vec<f64> = p.iter().zip(delta.iter()).map(|(pi, d)| pi + d).collect();
            let trial_rss = rss_at(model, &trial, x, y, &mut trial_vals, &mut trial_jac);
            if trial_rss.is_finite() && trial_rss <= rss {
                p = trial;
                rss = trial_rss;
                std::mem::swap(&mut vals, &mut trial_vals);
                std::mem::swap(&mut jac, &mut trial_jac);
                lambda = (lambda * 0.3).max(1e-15);
                accepted = true;
                break;
            }
            if small_step {
                break;
            }
            lambda *= 10.0;
        }
        if small_step || !accepted {
            if !accepted && !small_step {
                return Err(Error::NonConvergence { iterations: iter, last: p });
            }
            converged_at = Some(iter);
            break;
        }
        if iter == opts.max_iter {
            return Err(Error::NonConvergence { iterations: iter, last: p });
        }
    }

    // Undamped polish so a restart from the solution stays put. Near the
    // minimum the RSS is flat to rounding, so small steps are taken on the
    // gradient condition alone.
    for _ in 0..10 {
        let r = DVector::from_iterator(m, y.iter().zip(&vals).map(|(t, v)| t - v));
        let Some(chol) = jac.tr_mul(&jac).cholesky() else { break };
        let delta = chol.solve(&jac.tr_mul(&r));
        let trial: Vec<f64> = p.iter().zip(delta.iter()).map(|(pi, d)| pi + d).collect();
        let trial_rss = rss_at(model, &trial, x, y, &mut trial_vals, &mut trial_jac);
        let tiny = delta.iter().zip(&p).all(|(d, pi)| d.abs() <= 1e-6 * (pi.abs() + 1e-6));
        if !(trial_rss <= rss || (tiny && trial_rss <= rss * (1.0 + 1e-12))) {
            break;
        }
        p = trial;
        rss = trial_rss;
        std::mem::swap(&mut vals, &mut trial_vals);
        std::mem::swap(&mut jac, &mut trial_jac);
        if delta.iter().zip(&p).all(|(d, pi)| d.abs() <= 1e-15 * pi.abs().max(1e-300)) {
            break;
        }
    }

    let iterations = converged_at.unwrap_or(opts.max_iter);
    let s2 = rss / (m - k) as f64;
    let std = match jac.tr_mul(&jac).try_inverse() {
        Some(inv) => (0..k).map(|i| (inv[(i, i)] * s2).max(0.0).sqrt()).collect(),
        None => vec![f64::NAN; k],
    };
    Ok(LsqResult { params: p, rss, iterations, std })
}
