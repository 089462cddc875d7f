//! Antenna placement by particle swarm optimization.
//!
//! A particle is a flattened layout `[x_1, y_1, ..., x_M, y_M]`. Positions are
//! clamped to the receive region after every move, so the region constraint
//! always holds. The spacing and latency-threshold constraints enter the
//! fitness as a quadratic exterior penalty, and the elite layout is repaired
//! at the end so the spacing constraint holds on output.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{all_rates, build_channels, CombinerSet};
use crate::combining::{solve_combining, CombinerStrategy};
use crate::latency::{assemble_report, CpuAllocation, LatencyReport};
use crate::scenario::{distance, AntennaLayout, DataSizes, PathSet, ScenarioConfig};
use crate::{Error, Result};

/// Fitness assigned to layouts whose latency is not finite.
pub const INFEASIBLE_FITNESS: f64 = 1e30;

/// Spacing slack accepted for a layout to count as feasible during the search.
const SPACING_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoSettings {
    pub swarm_size: usize,
    pub max_iterations: usize,
    /// Inertia weight, decayed linearly from `inertia_start` to `inertia_end`.
    pub inertia_start: f64,
    pub inertia_end: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Per-axis velocity clamp as a fraction of the region side.
    pub velocity_clamp: f64,
    /// Penalty weight as a multiple of the objective at the starting layout.
    pub penalty_scale: f64,
    /// Fraction of the swarm started near the incoming layout; the rest start
    /// uniformly in the region.
    pub local_fraction: f64,
    pub rng_seed: u64,
}

impl Default for PsoSettings {
    fn default() -> Self {
        Self {
            swarm_size: 50,
            max_iterations: 100,
            inertia_start: 0.9,
            inertia_end: 0.4,
            cognitive: 2.0,
            social: 2.0,
            velocity_clamp: 0.2,
            penalty_scale: 1e3,
            local_fraction: 0.5,
            rng_seed: 0,
        }
    }
}

impl PsoSettings {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size < 2 {
            return Err(Error::config("pso.swarm_size must be >= 2"));
        }
        if !(self.cognitive > 0.0 && self.social > 0.0) {
            return Err(Error::config("pso.cognitive and pso.social must be > 0"));
        }
        let finite = [
            self.inertia_start,
            self.inertia_end,
            self.cognitive,
            self.social,
            self.velocity_clamp,
            self.penalty_scale,
            self.local_fraction,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("pso settings must be finite"));
        }
        if !(self.velocity_clamp > 0.0) || self.penalty_scale < 0.0 {
            return Err(Error::config("pso.velocity_clamp must be > 0 and pso.penalty_scale >= 0"));
        }
        if !(0.0..=1.0).contains(&self.local_fraction) {
            return Err(Error::config("pso.local_fraction must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// How combiners are obtained while the layout varies.
#[derive(Debug, Clone, Copy)]
pub enum CombinerMode<'a> {
    /// Keep the given combiners fixed.
    Frozen(&'a CombinerSet),
    /// Recompute combiners for each candidate layout with the given strategy.
    Reoptimize(CombinerStrategy),
}

/// Everything held fixed while positions are searched.
#[derive(Debug, Clone, Copy)]
pub struct PlacementProblem<'a> {
    pub paths: &'a PathSet,
    pub cfg: &'a ScenarioConfig,
    pub data: &'a DataSizes,
    pub cpu: &'a CpuAllocation,
    pub combiners: CombinerMode<'a>,
    pub slot: usize,
    /// Weight `μ` of the exterior penalty.
    pub penalty_weight: f64,
}

/// Exact latencies of a layout and the combiners used to obtain them.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub report: LatencyReport,
    pub combiners: CombinerSet,
}

/// `Σ_{m<κ} max(0, d0 − ‖d_m − d_κ‖)²`.
pub fn spacing_violation(layout: &AntennaLayout, d0: f64) -> f64 {
    let p = &layout.positions;
    let mut total = 0.0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            total += (d0 - distance(&p[i], &p[j])).max(0.0).powi(2);
        }
    }
    total
}

impl PlacementProblem<'_> {
    pub fn evaluate(&self, layout: &AntennaLayout) -> Result<Evaluation> {
        let state = build_channels(self.paths, layout, self.cfg, self.slot);
        let combiners = match self.combiners {
            CombinerMode::Frozen(w) => w.clone(),
            CombinerMode::Reoptimize(strategy) => solve_combining(strategy, &state, self.cfg)?,
        };
        let rates = all_rates(&state, &combiners, self.cfg)?;
        let report = assemble_report(&rates, self.cpu, self.data, self.cfg, self.slot)?;
        Ok(Evaluation { report, combiners })
    }

    /// `T_total + μ·[spacing + threshold violations]`, always finite.
    pub fn fitness(&self, layout: &AntennaLayout) -> f64 {
        let spacing = spacing_violation(layout, self.cfg.min_spacing);
        let report = match self.evaluate(layout) {
            Ok(e) if e.report.system_total.is_finite() => e.report,
            _ => return INFEASIBLE_FITNESS + self.penalty_weight * spacing,
        };
        let over = |t: f64, th: f64| (t - th).max(0.0).powi(2);
        let thresholds: f64 = report
            .vehicles
            .iter()
            .map(|v| over(v.comm, self.cfg.latency_threshold_comm) + over(v.sense, self.cfg.latency_threshold_sense))
            .sum();
        report.system_total + self.penalty_weight * (spacing + thresholds)
    }
}

/// Result of one swarm run.
#[derive(Debug, Clone)]
pub struct PlacementOutcome {
    pub layout: AntennaLayout,
    pub fitness: f64,
    pub initial_fitness: f64,
    /// Global-best fitness after initialization and after each iteration.
    pub history: Vec<f64>,
}

fn feasible(layout: &AntennaLayout, cfg: &ScenarioConfig) -> bool {
    layout.is_feasible(cfg.region_side, cfg.min_spacing, SPACING_TOL)
}

/// Projects onto the region, then pushes violating pairs apart along their
/// separating direction until the spacing holds or the round limit is hit.
pub fn repair(layout: &AntennaLayout, cfg: &ScenarioConfig) -> AntennaLayout {
    let side = cfg.region_side;
    let d0 = cfg.min_spacing;
    let mut p = layout.positions.clone();
    let clamp = |q: &mut [f64; 2]| {
        q[0] = q[0].clamp(0.0, side);
        q[1] = q[1].clamp(0.0, side);
    };
    p.iter_mut().for_each(clamp);
    for _ in 0..200 {
        let mut moved = false;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                let dist = distance(&p[i], &p[j]);
                if dist >= d0 {
                    continue;
                }
                let (ux, uy) = if dist > 0.0 {
                    ((p[j][0] - p[i][0]) / dist, (p[j][1] - p[i][1]) / dist)
                } else {
                    let a = (i * 31 + j * 17) as f64;
                    (a.cos(), a.sin())
                };
                let push = 0.5 * (d0 - dist) * (1.0 + 1e-9) + 1e-15;
                p[i][0] -= push * ux;
                p[i][1] -= push * uy;
                p[j][0] += push * ux;
                p[j][1] += push * uy;
                clamp(&mut p[i]);
                clamp(&mut p[j]);
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    AntennaLayout { positions: p, slot: layout.slot }
}

/// Searches antenna positions starting from a feasible `initial` layout.
///
/// The incoming layout is particle 0, so the returned fitness never exceeds
/// the fitness of `initial`. The global best is repaired at the end; if the
/// repaired layout is infeasible or worse than the best feasible layout seen
/// during the search, the latter is returned.
pub fn solve_placement(
    initial: &AntennaLayout,
    problem: &PlacementProblem<'_>,
    settings: &PsoSettings,
) -> Result<PlacementOutcome> {
    settings.validate()?;
    let cfg = problem.cfg;
    if !feasible(initial, cfg) {
        return Err(Error::infeasible("initial layout violates the region or spacing constraint"));
    }
    let slot = problem.slot;
    let side = cfg.region_side;
    let dim = 2 * initial.len();
    let vmax = settings.velocity_clamp * side;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.rng_seed);

    let start = initial.to_flat();
    let local = ((settings.swarm_size - 1) as f64 * settings.local_fraction).round() as usize;
    let mut positions: Vec<Vec<f64>> = Vec::with_capacity(settings.swarm_size);
    let mut velocities: Vec<Vec<f64>> = Vec::with_capacity(settings.swarm_size);
    positions.push(start.clone());
    velocities.push(vec![0.0; dim]);
    for i in 1..settings.swarm_size {
        let x: Vec<f64> = if i <= local {
            start.iter().map(|&s| (s + rng.random_range(-vmax..=vmax)).clamp(0.0, side)).collect()
        } else {
            (0..dim).map(|_| rng.random_range(0.0..=side)).collect()
        };
        positions.push(x);
        velocities.push((0..dim).map(|_| rng.random_range(-vmax..=vmax)).collect());
    }

    let evaluate = |xs: &[Vec<f64>]| -> Vec<f64> {
        xs.par_iter()
            .map(|x| problem.fitness(&AntennaLayout::from_flat(x, slot)))
            .collect()
    };

    let fitness = evaluate(&positions);
    let initial_fitness = fitness[0];
    let mut personal = positions.clone();
    let mut personal_fit = fitness.clone();
    let mut best = 0;
    for (i, &f) in fitness.iter().enumerate() {
        if f < personal_fit[best] {
            best = i;
        }
    }
    let mut global = personal[best].clone();
    let mut global_fit = personal_fit[best];
    let mut feasible_best: Option<(Vec<f64>, f64)> = None;
    let track_feasible = |x: &[f64], f: f64, best: &mut Option<(Vec<f64>, f64)>| {
        let better = best.as_ref().is_none_or(|(_, bf)| f < *bf);
        if better && feasible(&AntennaLayout::from_flat(x, slot), cfg) {
            *best = Some((x.to_vec(), f));
        }
    };
    for (x, &f) in positions.iter().zip(&fitness) {
        track_feasible(x, f, &mut feasible_best);
    }
    let mut history = vec![global_fit];

    let iters = settings.max_iterations;
    for k in 0..iters {
        let frac = if iters > 1 { k as f64 / (iters - 1) as f64 } else { 0.0 };
        let inertia = settings.inertia_start + (settings.inertia_end - settings.inertia_start) * frac;
        for ((x, v), pb) in positions.iter_mut().zip(velocities.iter_mut()).zip(&personal) {
            for d in 0..dim {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                v[d] = (inertia * v[d]
                    + settings.cognitive * r1 * (pb[d] - x[d])
                    + settings.social * r2 * (global[d] - x[d]))
                    .clamp(-vmax, vmax);
            }
            for d in 0..dim {
                x[d] = (x[d] + v[d]).clamp(0.0, side);
            }
        }
        let fitness = evaluate(&positions);
        for (i, (&f, x)) in fitness.iter().zip(&positions).enumerate() {
            if f < personal_fit[i] {
                personal_fit[i] = f;
                personal[i] = x.clone();
            }
            if f < global_fit {
                global_fit = f;
                global = x.clone();
            }
            track_feasible(x, f, &mut feasible_best);
        }
        history.push(global_fit);
    }

    let repaired = repair(&AntennaLayout::from_flat(&global, slot), cfg);
    let repaired = feasible(&repaired, cfg).then(|| {
        let f = problem.fitness(&repaired);
        (repaired, f)
    });
    let chosen = match (repaired, feasible_best) {
        (Some((layout, f)), Some((bx, bf))) => {
            if f < bf {
                (layout, f)
            } else {
                (AntennaLayout::from_flat(&bx, slot), bf)
            }
        }
        (Some(r), None) => r,
        (None, Some((bx, bf))) => (AntennaLayout::from_flat(&bx, slot), bf),
        (None, None) => return Err(Error::infeasible("no feasible antenna layout found")),
    };
    Ok(PlacementOutcome { layout: chosen.0, fitness: chosen.1, initial_fitness, history })
}
