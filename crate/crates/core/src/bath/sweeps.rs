use super::NuclearBath;
use crate::engine::Sign;
use crate::spin_model::{flip_flop_rate, hh_detuning, transfer_probability, Constants};
use crate::{Error, Result};

/// Order in which "+" and "−" sweeps are applied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Interleaving {
    /// Every sweep of the leading sign, then the rest.
    Blocked,
    /// Strictly alternating from the leading sign; the surplus runs at the
    /// end.
    Alternating,
    /// Every sweep applies the bias-weighted mean of the "+" and "−"
    /// updates, i.e. the time-averaged effect of a finely interleaved
    /// schedule.
    #[default]
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepSchedule {
    pub n_plus: usize,
    pub n_minus: usize,
    pub interleaving: Interleaving,
    /// Lock drive amplitude, Hz.
    pub omega: f64,
    /// Lock duration, s.
    pub tau: f64,
    /// Sign that opens a blocked or alternating schedule.
    pub lead: Sign,
}

impl SweepSchedule {
    pub fn new(n_plus: usize, n_minus: usize, interleaving: Interleaving, omega: f64, tau: f64) -> Result<Self> {
        let s = SweepSchedule { n_plus, n_minus, interleaving, omega, tau, lead: Sign::Plus };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) || !(self.tau >= 0.0) || !self.tau.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "sweep needs omega > 0 and tau ≥ 0, got {} and {}",
                self.omega, self.tau
            )));
        }
        Ok(())
    }

    pub fn total(&self) -> usize {
        self.n_plus + self.n_minus
    }

    /// `(N₊ − N₋)/(N₊ + N₋)`, zero for an empty schedule.
    pub fn bias(&self) -> f64 {
        let n = self.total();
        if n == 0 {
            0.0
        } else {
            (self.n_plus as f64 - self.n_minus as f64) / n as f64
        }
    }

    /// Same schedule with every sign reversed, sweep for sweep.
    pub fn flipped(&self) -> Self {
        SweepSchedule { n_plus: self.n_minus, n_minus: self.n_plus, lead: self.lead.flipped(), ..*self }
    }

    /// Same total sweep count with the split closest to `bias`.
    pub fn with_bias(&self, bias: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&bias) {
            return Err(Error::InvalidArgument(format!("bias {bias} outside [−1, 1]")));
        }
        let n = self.total();
        let n_plus = ((n as f64) * (1.0 + bias) / 2.0).round() as usize;
        Ok(SweepSchedule { n_plus: n_plus.min(n), n_minus: n - n_plus.min(n), ..*self })
    }

    /// Sign weights `(w₊, w₋)` of each sweep in order.
    fn steps(&self) -> Vec<(f64, f64)> {
        let (lead, other, weight) = match self.lead {
            Sign::Plus => (self.n_plus, self.n_minus, (1.0, 0.0)),
            Sign::Minus => (self.n_minus, self.n_plus, (0.0, 1.0)),
        };
        let first = weight;
        let second = (weight.1, weight.0);
        match self.interleaving {
            Interleaving::Blocked => {
                let mut v = vec![first; lead];
                v.extend(vec![second; other]);
                v
            }
            Interleaving::Alternating => {
                let pairs = lead.min(other);
                let mut v = Vec::with_capacity(lead + other);
                for _ in 0..pairs {
                    v.extend([first, second]);
                }
                v.extend(vec![first; lead - pairs]);
                v.extend(vec![second; other - pairs]);
                v
            }
            Interleaving::Mixed => {
                let n = self.total() as f64;
                vec![(self.n_plus as f64 / n, self.n_minus as f64 / n); self.total()]
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolarizationRecord {
    /// Per-nucleus transfer probability of one lock.
    pub transfer: Vec<f64>,
    /// `snapshots[s]` holds every polarization after `s` sweeps; entry 0
    /// is the starting state.
    pub snapshots: Vec<Vec<f64>>,
    /// Quanta moved into the bath by each sweep, `Σ_k |Δp_k|/2`.
    pub transferred: Vec<f64>,
}

impl PolarizationRecord {
    pub fn final_polarizations(&self) -> &[f64] {
        self.snapshots.last().expect("record always holds the initial state")
    }

    pub fn mean_polarization(&self, sweep: usize) -> f64 {
        let p = &self.snapshots[sweep];
        if p.is_empty() {
            0.0
        } else {
            p.iter().sum::<f64>() / p.len() as f64
        }
    }
}

/// Change of every polarization under one sweep of sign `s`.
fn sweep_delta(p: &[f64], q: &[f64], s: f64, out: &mut [f64]) {
    let budget: f64 = p.iter().zip(q).map(|(pk, qk)| qk * (1.0 - s * pk) / 2.0).sum();
    let scale = 1.0 / budget.max(1.0);
    for ((o, pk), qk) in out.iter_mut().zip(p).zip(q) {
        *o = 2.0 * s * qk * ((1.0 - s * pk) / 2.0) * scale;
    }
}

/// Kinetic polarization of the bath, starting from its current state.
///
/// A sweep of sign `s` flips each nucleus with its lock transfer
/// probability `q_k`, acting on the fraction `(1 − s p_k)/2` still
/// flippable, and the electron delivers at most one quantum in total.
pub fn run_sweeps(bath: &NuclearBath, sched: &SweepSchedule, c: &Constants) -> Result<PolarizationRecord> {
    sched.validate()?;
    let b = bath.config.b;
    let transfer: Vec<f64> = bath
        .nuclei
        .iter()
        .map(|n| {
            let pred = flip_flop_rate(&b, &n.a, c)?;
            Ok(transfer_probability(sched.tau, hh_detuning(sched.omega, &b, &n.a, c), pred.j))
        })
        .collect::<Result<_>>()?;
    let mut p = bath.polarizations();
    let mut snapshots = Vec::with_capacity(sched.total() + 1);
    snapshots.push(p.clone());
    let mut transferred = Vec::with_capacity(sched.total());
    let mut dp = vec![0.0; p.len()];
    let mut dm = vec![0.0; p.len()];
    for (wp, wm) in sched.steps() {
        sweep_delta(&p, &transfer, 1.0, &mut dp);
        sweep_delta(&p, &transfer, -1.0, &mut dm);
        let mut moved = 0.0;
        for k in 0..p.len() {
            let next = (p[k] + (wp * dp[k] + wm * dm[k])).clamp(-1.0, 1.0);
            moved += (next - p[k]).abs() / 2.0;
            p[k] = next;
        }
        transferred.push(moved);
        snapshots.push(p.clone());
    }
    Ok(PolarizationRecord { transfer, snapshots, transferred })
}

/// Resonant lock chosen to cool the bath.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoolingDesign {
    pub schedule: SweepSchedule,
    /// Nucleus the lock is matched to (`q = 1` for it).
    pub target: usize,
    /// Fraction of the secular dephasing variance `Σ a_z²` carried by
    /// nuclei that `n` sweeps can reach, ignoring the per-sweep budget.
    pub reach: f64,
}

/// Picks the lock `(Ω_opt,k, 1/(2J_k))` of the nucleus `k` (with
/// `J_k ≥ j_floor`) that reaches the largest share of the dephasing
/// variance in `n_sweeps` "+" sweeps.
pub fn cooling_schedule(bath: &NuclearBath, n_sweeps: usize, j_floor: f64, c: &Constants) -> Result<CoolingDesign> {
    let b = bath.config.b;
    let preds = bath
        .nuclei
        .iter()
        .map(|n| flip_flop_rate(&b, &n.a, c))
        .collect::<Result<Vec<_>>>()?;
    let weight: Vec<f64> = bath.nuclei.iter().map(|n| (c.gamma_n * n.a.a.z).powi(2)).collect();
    let total: f64 = weight.iter().sum();
    let mut best: Option<(f64, usize)> = None;
    for (k, pk) in preds.iter().enumerate().filter(|(_, p)| p.j >= j_floor && p.j > 0.0) {
        let tau = 1.0 / (2.0 * pk.j);
        let reached: f64 = bath
            .nuclei
            .iter()
            .zip(&preds)
            .zip(&weight)
            .map(|((n, pi), w)| {
                let q = transfer_probability(tau, hh_detuning(pk.omega_opt, &b, &n.a, c), pi.j);
                w * (1.0 - (1.0 - q).powf(n_sweeps as f64))
            })
            .sum();
        let reach = if total > 0.0 { reached / total } else { 0.0 };
        if best.is_none_or(|(r, _)| reach > r) {
            best = Some((reach, k));
        }
    }
    let (reach, target) = best.ok_or_else(|| Error::EmptyBath(format!("no nucleus with J ≥ {j_floor} Hz")))?;
    let p = preds[target];
    let schedule = SweepSchedule::new(n_sweeps, 0, Interleaving::Mixed, p.omega_opt, 1.0 / (2.0 * p.j))?;
    Ok(CoolingDesign { schedule, target, reach })
}

/// Share of `Σ a_z²` carried by nuclei with `J < j_floor`, which flip-flops
/// cannot polarize.
pub fn frozen_fraction(bath: &NuclearBath, j_floor: f64, c: &Constants) -> Result<f64> {
    let mut frozen = 0.0;
    let mut total = 0.0;
    for n in &bath.nuclei {
        let w = (c.gamma_n * n.a.a.z).powi(2);
        total += w;
        if flip_flop_rate(&bath.config.b, &n.a, c)?.j < j_floor {
            frozen += w;
        }
    }
    Ok(if total > 0.0 { frozen / total } else { 0.0 })
}
