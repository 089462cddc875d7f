//! Edge CPU budget split across the `2N` offloaded tasks.
//!
//! With offload latencies fixed, the allocation-dependent part of the total
//! latency is `Σ_i a_i / f_i`, where `a_i` is the cycle count of task `i`.
//! The latency thresholds turn into lower bounds
//! `f_i >= a_i / (T_th - T_off_i)` and the budget is `Σ_i f_i <= f_th`.
//! The problem is separable and convex. Its KKT conditions give
//! `f_i = max(lb_i, sqrt(a_i / ν))` with `ν > 0` chosen so the budget is
//! spent exactly, which the active-set loop in [`solve_cpu`] finds in closed
//! form.

use crate::latency::{CpuAllocation, LatencyReport};
use crate::scenario::{DataSizes, ScenarioConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CpuSubproblem {
    /// Cycle counts `a_{n,c}`.
    pub load_comm: Vec<f64>,
    /// Cycle counts `a_{n,s}`.
    pub load_sense: Vec<f64>,
    pub offload_comm: Vec<f64>,
    pub offload_sense: Vec<f64>,
    pub budget: f64,
    pub threshold_comm: f64,
    pub threshold_sense: f64,
}

#[derive(Debug, Clone, Copy)]
struct Task {
    load: f64,
    lower: f64,
}

impl CpuSubproblem {
    /// Builds the subproblem from dataset sizes and the offload latencies of
    /// the current iterate.
    pub fn new(data: &DataSizes, offload_comm: Vec<f64>, offload_sense: Vec<f64>, cfg: &ScenarioConfig, budget: f64) -> Self {
        Self {
            load_comm: data.comm.iter().map(|&b| cfg.task_load(b)).collect(),
            load_sense: data.sense.iter().map(|&b| cfg.task_load(b)).collect(),
            offload_comm,
            offload_sense,
            budget,
            threshold_comm: cfg.latency_threshold_comm,
            threshold_sense: cfg.latency_threshold_sense,
        }
    }

    pub fn from_report(data: &DataSizes, report: &LatencyReport, cfg: &ScenarioConfig, budget: f64) -> Self {
        Self::new(
            data,
            report.vehicles.iter().map(|v| v.offload_comm).collect(),
            report.vehicles.iter().map(|v| v.offload_sense).collect(),
            cfg,
            budget,
        )
    }

    pub fn num_vehicles(&self) -> usize {
        self.load_comm.len()
    }

    /// `Σ a_i / f_i` over tasks with nonzero load.
    pub fn objective(&self, alloc: &CpuAllocation) -> f64 {
        let part = |loads: &[f64], freqs: &[f64]| -> f64 {
            loads.iter().zip(freqs).filter(|(&a, _)| a > 0.0).map(|(&a, &f)| a / f).sum()
        };
        part(&self.load_comm, &alloc.comm) + part(&self.load_sense, &alloc.sense)
    }

    /// Lower bounds implied by the latency thresholds, `(comm, sense)`.
    pub fn lower_bounds(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let bound = |loads: &[f64], offloads: &[f64], threshold: f64, kind: &str| -> Result<Vec<f64>> {
            loads
                .iter()
                .zip(offloads)
                .enumerate()
                .map(|(n, (&a, &off))| {
                    if a == 0.0 {
                        return Ok(0.0);
                    }
                    let slack = threshold - off;
                    if slack > 0.0 {
                        Ok(a / slack)
                    } else {
                        Err(Error::infeasible(format!(
                            "vehicle {n} {kind} task: offload latency {off:e} s leaves no room under the \
                             {threshold:e} s threshold"
                        )))
                    }
                })
                .collect()
        };
        Ok((
            bound(&self.load_comm, &self.offload_comm, self.threshold_comm, "communication")?,
            bound(&self.load_sense, &self.offload_sense, self.threshold_sense, "sensing")?,
        ))
    }

    fn tasks(&self) -> Result<Vec<Task>> {
        let (lc, ls) = self.lower_bounds()?;
        Ok(self
            .load_comm
            .iter()
            .chain(&self.load_sense)
            .zip(lc.iter().chain(&ls))
            .map(|(&load, &lower)| Task { load, lower })
            .collect())
    }

    fn split(&self, flat: Vec<f64>) -> CpuAllocation {
        let n = self.num_vehicles();
        CpuAllocation { comm: flat[..n].to_vec(), sense: flat[n..].to_vec() }
    }
}

/// Optimal CPU split.
///
/// Tasks without load receive zero frequency. Fails when a threshold is
/// already exceeded by its offload latency or when the threshold lower bounds
/// do not fit in the budget.
pub fn solve_cpu(sub: &CpuSubproblem) -> Result<CpuAllocation> {
    if !(sub.budget > 0.0) {
        return Err(Error::domain("CPU budget must be > 0"));
    }
    let tasks = sub.tasks()?;
    let required: f64 = tasks.iter().map(|t| t.lower).sum();
    if required > sub.budget {
        let n = sub.num_vehicles();
        let worst = tasks
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.lower.total_cmp(&b.1.lower))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let kind = if worst < n { "communication" } else { "sensing" };
        return Err(Error::infeasible(format!(
            "latency thresholds need {required:e} Hz but the budget is {:e} Hz (largest demand: vehicle {} {kind} task)",
            sub.budget,
            worst % n
        )));
    }

    let mut clamped: Vec<bool> = tasks.iter().map(|t| t.load == 0.0).collect();
    let mut scale;
    loop {
        let fixed: f64 = tasks.iter().zip(&clamped).filter(|(_, &c)| c).map(|(t, _)| t.lower).sum();
        let roots: f64 = tasks.iter().zip(&clamped).filter(|(_, &c)| !c).map(|(t, _)| t.load.sqrt()).sum();
        if roots == 0.0 {
            // Everything sits at its bound (or there is no load at all).
            scale = 0.0;
            break;
        }
        scale = (sub.budget - fixed) / roots;
        let mut changed = false;
        for (t, c) in tasks.iter().zip(clamped.iter_mut()) {
            if !*c && scale * t.load.sqrt() < t.lower {
                *c = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let flat = tasks
        .iter()
        .zip(&clamped)
        .map(|(t, &c)| if c { t.lower } else { scale * t.load.sqrt() })
        .collect();
    Ok(sub.split(flat))
}

/// Largest relative violation of the KKT conditions at `alloc`: stationarity
/// of the unclamped tasks, sign of the bound multipliers, the budget equality
/// (complementary slackness with `ν > 0`), and primal feasibility.
pub fn kkt_residual(sub: &CpuSubproblem, alloc: &CpuAllocation) -> Result<f64> {
    let tasks = sub.tasks()?;
    let freqs: Vec<f64> = alloc.comm.iter().chain(&alloc.sense).copied().collect();
    let active: Vec<(Task, f64)> = tasks.into_iter().zip(freqs).filter(|(t, _)| t.load > 0.0).collect();
    if active.is_empty() {
        return Ok(0.0);
    }
    let is_free = |t: &Task, f: f64| f > t.lower * (1.0 + 1e-12);
    let marginals: Vec<f64> = active.iter().filter(|(t, f)| is_free(t, *f)).map(|(t, f)| t.load / (f * f)).collect();
    let nu = if marginals.is_empty() {
        active.iter().map(|(t, f)| t.load / (f * f)).fold(f64::INFINITY, f64::min)
    } else {
        marginals.iter().sum::<f64>() / marginals.len() as f64
    };
    let mut residual = 0.0f64;
    for (t, f) in &active {
        let marginal = t.load / (f * f);
        if is_free(t, *f) {
            residual = residual.max((marginal - nu).abs() / nu);
        } else {
            // Bound multiplier ν - a/f² must be nonnegative.
            residual = residual.max((marginal - nu).max(0.0) / nu);
        }
        if t.lower > 0.0 {
            residual = residual.max((t.lower - f).max(0.0) / t.lower);
        }
    }
    let spent: f64 = alloc.total();
    residual = residual.max((spent - sub.budget).abs() / sub.budget);
    Ok(residual)
}
