//! Alternating optimization over CPU allocation, receive combining, and
//! antenna placement, plus the comparison schemes.
//!
//! Each slot starts from the previous slot's variables. One inner iteration
//! runs the blocks in the fixed order CPU → combining → placement, each with
//! the other variables frozen, and records the latency report after every
//! block.

use serde::{Deserialize, Serialize};

use crate::channel::{build_channels, CombinerSet, LinkRates};
use crate::combining::solve_combining;
use crate::cpu_alloc::{solve_cpu, CpuSubproblem};
use crate::latency::{assemble_report, CpuAllocation, LatencyReport};
use crate::placement::{solve_placement, CombinerMode, PlacementProblem};
use crate::scenario::{draw_data, generate_scenario, initial_layout, AntennaLayout, DataSizes, PathSet, ScenarioConfig};
use crate::seed::{derive_seed, TAG_PSO};
use crate::{Error, Result};

/// Spacing tolerance used when checking emitted solutions.
pub const SPACING_TOL: f64 = 1e-9;
/// Relative budget tolerance used when checking emitted solutions.
pub const BUDGET_TOL: f64 = 1e-9;

/// Which optimization block produced a trace step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Block {
    Init,
    Cpu,
    Combining,
    Placement,
}

/// Combiner handling inside the placement search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum PlacementCombiners {
    /// Each candidate layout is scored with combiners recomputed for it.
    #[default]
    #[serde(rename = "reoptimize")]
    Reoptimize,
    /// Candidate layouts are scored with the combiners of the previous block.
    #[serde(rename = "frozen")]
    Frozen,
}

/// Constraint status of a solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    /// Every antenna inside the region.
    pub region: bool,
    /// Smallest pairwise distance minus the minimum spacing (m).
    pub spacing_margin: f64,
    pub comm_ok: Vec<bool>,
    pub sense_ok: Vec<bool>,
    /// `Σf / budget − 1`.
    pub budget_excess: f64,
}

impl Feasibility {
    pub fn check(cfg: &ScenarioConfig, budget: f64, layout: &AntennaLayout, cpu: &CpuAllocation, report: &LatencyReport) -> Self {
        Self {
            region: layout.in_region(cfg.region_side),
            spacing_margin: if layout.len() < 2 { f64::INFINITY } else { layout.min_distance() - cfg.min_spacing },
            comm_ok: report.comm_ok.clone(),
            sense_ok: report.sense_ok.clone(),
            budget_excess: cpu.total() / budget - 1.0,
        }
    }

    pub fn ok(&self) -> bool {
        self.region
            && self.spacing_margin >= -SPACING_TOL
            && self.comm_ok.iter().chain(&self.sense_ok).all(|&b| b)
            && self.budget_excess <= BUDGET_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    /// Inner iteration; 0 is the evaluation before the first iteration.
    pub iter: usize,
    pub block: Block,
    pub report: LatencyReport,
    pub feasibility: Feasibility,
}

/// Optimization variables carried between blocks and slots.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub layout: AntennaLayout,
    pub combiners: CombinerSet,
    pub cpu: CpuAllocation,
}

/// Record of one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub slot: usize,
    pub data: DataSizes,
    pub steps: Vec<TraceStep>,
    pub final_state: SolverState,
}

impl IterationTrace {
    pub fn final_step(&self) -> &TraceStep {
        self.steps.last().expect("trace has an initial step")
    }

    pub fn final_report(&self) -> &LatencyReport {
        &self.final_step().report
    }

    /// Last step of each inner iteration, starting with the initial evaluation.
    pub fn iteration_ends(&self) -> Vec<&TraceStep> {
        let mut ends: Vec<&TraceStep> = Vec::new();
        for step in &self.steps {
            match ends.last_mut() {
                Some(last) if last.iter == step.iter => *last = step,
                _ => ends.push(step),
            }
        }
        ends
    }

    /// System total latency at the end of each inner iteration.
    pub fn iteration_totals(&self) -> Vec<f64> {
        self.iteration_ends().iter().map(|s| s.report.system_total).collect()
    }
}

/// First iteration whose relative change from the previous iteration is below `tol`.
pub fn stabilization_index(totals: &[f64], tol: f64) -> Option<usize> {
    (1..totals.len()).find(|&i| ((totals[i] - totals[i - 1]) / totals[i - 1]).abs() < tol)
}

/// Which task types exist, which blocks run, and the CPU budget share.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pipeline {
    pub comm: bool,
    pub sense: bool,
    pub placement: bool,
    pub budget_share: f64,
    /// Distinguishes PSO streams of different schemes on the same scenario.
    pub stream: u64,
}

impl Pipeline {
    pub fn full() -> Self {
        Self { comm: true, sense: true, placement: true, budget_share: 1.0, stream: 0 }
    }
}

/// Runs the alternating loop for one scenario and pipeline.
pub struct Runner<'a> {
    pub cfg: &'a ScenarioConfig,
    pub paths: &'a PathSet,
    pub pipeline: Pipeline,
    pub placement_combiners: PlacementCombiners,
}

impl<'a> Runner<'a> {
    pub fn new(cfg: &'a ScenarioConfig, paths: &'a PathSet, pipeline: Pipeline) -> Self {
        Self { cfg, paths, pipeline, placement_combiners: PlacementCombiners::default() }
    }

    pub fn budget(&self) -> f64 {
        self.cfg.cpu_budget * self.pipeline.budget_share
    }

    /// Dataset sizes of `slot`, with absent task types zeroed.
    pub fn data(&self, slot: usize) -> DataSizes {
        let mut d = draw_data(self.cfg, slot);
        if !self.pipeline.comm {
            d.comm.iter_mut().for_each(|b| *b = 0.0);
        }
        if !self.pipeline.sense {
            d.sense.iter_mut().for_each(|b| *b = 0.0);
        }
        d
    }

    /// Grid layout, combiners from the configured strategy, equal CPU split.
    pub fn initial_state(&self) -> Result<SolverState> {
        let layout = initial_layout(self.cfg)?;
        let state = build_channels(self.paths, &layout, self.cfg, 0);
        let combiners = solve_combining(self.cfg.combiner, &state, self.cfg)?;
        let cpu = CpuAllocation::equal_split(&self.data(0), self.budget());
        Ok(SolverState { layout, combiners, cpu })
    }

    fn problem<'b>(&'b self, state: &'b SolverState, data: &'b DataSizes, slot: usize, mode: CombinerMode<'b>, penalty_weight: f64) -> PlacementProblem<'b> {
        PlacementProblem { paths: self.paths, cfg: self.cfg, data, cpu: &state.cpu, combiners: mode, slot, penalty_weight }
    }

    fn evaluate(&self, state: &SolverState, data: &DataSizes, slot: usize) -> Result<LatencyReport> {
        Ok(self.problem(state, data, slot, CombinerMode::Frozen(&state.combiners), 0.0).evaluate(&state.layout)?.report)
    }

    fn step(&self, iter: usize, block: Block, state: &SolverState, report: LatencyReport) -> TraceStep {
        let feasibility = Feasibility::check(self.cfg, self.budget(), &state.layout, &state.cpu, &report);
        TraceStep { iter, block, report, feasibility }
    }

    /// Runs `inner_iterations` alternating iterations in `slot` starting from `state`.
    pub fn run_slot(&self, mut state: SolverState, slot: usize) -> Result<IterationTrace> {
        let cfg = self.cfg;
        let data = self.data(slot);
        state.layout.slot = slot;
        let mut report = self.evaluate(&state, &data, slot)?;
        let mut steps = vec![self.step(0, Block::Init, &state, report.clone())];

        for iter in 1..=cfg.inner_iterations {
            let sub = CpuSubproblem::from_report(&data, &report, cfg, self.budget());
            state.cpu = solve_cpu(&sub)?;
            report = self.evaluate(&state, &data, slot)?;
            steps.push(self.step(iter, Block::Cpu, &state, report.clone()));

            let channels = build_channels(self.paths, &state.layout, cfg, slot);
            state.combiners = solve_combining(cfg.combiner, &channels, cfg)?;
            report = self.evaluate(&state, &data, slot)?;
            steps.push(self.step(iter, Block::Combining, &state, report.clone()));

            if self.pipeline.placement {
                let mut settings = cfg.pso.clone();
                settings.rng_seed = derive_seed(
                    cfg.rng_seed,
                    &[TAG_PSO, self.pipeline.stream, slot as u64, iter as u64, cfg.pso.rng_seed],
                );
                let mode = match self.placement_combiners {
                    PlacementCombiners::Reoptimize => CombinerMode::Reoptimize(cfg.combiner),
                    PlacementCombiners::Frozen => CombinerMode::Frozen(&state.combiners),
                };
                let weight = cfg.pso.penalty_scale * report.system_total.min(crate::placement::INFEASIBLE_FITNESS);
                let problem = self.problem(&state, &data, slot, mode, weight);
                let outcome = solve_placement(&state.layout, &problem, &settings)?;
                let eval = problem.evaluate(&outcome.layout)?;
                state.layout = outcome.layout;
                state.combiners = eval.combiners;
                report = eval.report;
                steps.push(self.step(iter, Block::Placement, &state, report.clone()));
            }
        }
        Ok(IterationTrace { slot, data, steps, final_state: state })
    }

    /// Runs all slots, warm-starting each from the previous slot's variables.
    pub fn run_horizon(&self) -> Result<Vec<IterationTrace>> {
        let mut state = self.initial_state()?;
        let mut traces = Vec::with_capacity(self.cfg.num_slots);
        for slot in 0..self.cfg.num_slots {
            let trace = self.run_slot(state, slot)?;
            state = trace.final_state.clone();
            traces.push(trace);
        }
        Ok(traces)
    }

    /// All tasks executed locally at `local_cpu`: no offload latency, no optimization.
    pub fn run_local(&self) -> Result<Vec<IterationTrace>> {
        let layout = initial_layout(self.cfg)?;
        let n = self.cfg.num_vehicles;
        let cpu = CpuAllocation::uniform(n, self.cfg.local_cpu);
        let rates = LinkRates { comm: vec![f64::INFINITY; n], sense: vec![f64::INFINITY; n] };
        let state = build_channels(self.paths, &layout, self.cfg, 0);
        let combiners = solve_combining(self.cfg.combiner, &state, self.cfg)?;
        (0..self.cfg.num_slots)
            .map(|slot| {
                let data = self.data(slot);
                let report = assemble_report(&rates, &cpu, &data, self.cfg, slot)?;
                let layout = AntennaLayout { slot, ..layout.clone() };
                let feasibility = Feasibility {
                    region: layout.in_region(self.cfg.region_side),
                    spacing_margin: if n < 2 { f64::INFINITY } else { layout.min_distance() - self.cfg.min_spacing },
                    comm_ok: report.comm_ok.clone(),
                    sense_ok: report.sense_ok.clone(),
                    // Local CPUs do not draw from the edge budget.
                    budget_excess: -1.0,
                };
                let step = TraceStep { iter: 0, block: Block::Init, report, feasibility };
                Ok(IterationTrace {
                    slot,
                    data,
                    steps: vec![step],
                    final_state: SolverState { layout, combiners: combiners.clone(), cpu: cpu.clone() },
                })
            })
            .collect()
    }
}

/// Runs the alternating algorithm over all slots of `cfg`.
pub fn run_horizon(cfg: &ScenarioConfig) -> Result<Vec<IterationTrace>> {
    let paths = generate_scenario(cfg)?;
    Runner::new(cfg, &paths, Pipeline::full()).run_horizon()
}

/// Runs a single slot from the initial variables.
pub fn run_slot(cfg: &ScenarioConfig, slot: usize) -> Result<IterationTrace> {
    let paths = generate_scenario(cfg)?;
    let runner = Runner::new(cfg, &paths, Pipeline::full());
    runner.run_slot(runner.initial_state()?, slot)
}

/// Compared systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemeId {
    /// Joint communication, sensing, and computing with movable antennas.
    Proposed,
    /// Communication and computing as an independent system with its own share of the CPU.
    Scheme1,
    /// Sensing and computing as an independent system with its own share of the CPU.
    Scheme2,
    /// Communication part of the proposed joint solution.
    Scheme3,
    /// Sensing part of the proposed joint solution.
    Scheme4,
    /// No offloading; everything runs on the vehicles' local CPUs with fixed antennas.
    Baseline1,
    /// Offloading with optimized CPU and combiners but fixed antennas.
    Baseline2,
}

impl SchemeId {
    pub const ALL: [SchemeId; 7] = [
        SchemeId::Proposed,
        SchemeId::Scheme1,
        SchemeId::Scheme2,
        SchemeId::Scheme3,
        SchemeId::Scheme4,
        SchemeId::Baseline1,
        SchemeId::Baseline2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::Proposed => "proposed",
            SchemeId::Scheme1 => "scheme1",
            SchemeId::Scheme2 => "scheme2",
            SchemeId::Scheme3 => "scheme3",
            SchemeId::Scheme4 => "scheme4",
            SchemeId::Baseline1 => "baseline1",
            SchemeId::Baseline2 => "baseline2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|id| id.name().eq_ignore_ascii_case(s))
    }

    /// Which latency components of the report the scheme's total counts.
    fn share(self) -> Share {
        match self {
            SchemeId::Scheme1 | SchemeId::Scheme3 => Share::Comm,
            SchemeId::Scheme2 | SchemeId::Scheme4 => Share::Sense,
            _ => Share::All,
        }
    }

    fn pipeline(self, cfg: &ScenarioConfig) -> Pipeline {
        let share = cfg.independent_share;
        match self {
            SchemeId::Proposed | SchemeId::Scheme3 | SchemeId::Scheme4 => Pipeline::full(),
            SchemeId::Scheme1 => Pipeline { sense: false, budget_share: share, stream: 1, ..Pipeline::full() },
            SchemeId::Scheme2 => Pipeline { comm: false, budget_share: share, stream: 2, ..Pipeline::full() },
            SchemeId::Baseline1 => Pipeline { placement: false, stream: 3, ..Pipeline::full() },
            SchemeId::Baseline2 => Pipeline { placement: false, stream: 4, ..Pipeline::full() },
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Share {
    All,
    Comm,
    Sense,
}

/// Per-slot latency of one scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSummary {
    pub scheme: SchemeId,
    /// Scheme latency per slot (s).
    pub slot_totals: Vec<f64>,
    /// Mean of `slot_totals` (s).
    pub mean_total_latency: f64,
    /// Every slot's final solution satisfies the constraints.
    pub feasible: bool,
}

fn summarize(scheme: SchemeId, traces: &[IterationTrace]) -> SchemeSummary {
    let slot_totals: Vec<f64> = traces
        .iter()
        .map(|t| {
            let r = t.final_report();
            match scheme.share() {
                Share::All => r.system_total,
                Share::Comm => r.comm_total(),
                Share::Sense => r.sense_total(),
            }
        })
        .collect();
    let mean_total_latency = slot_totals.iter().sum::<f64>() / slot_totals.len() as f64;
    let feasible = traces.iter().all(|t| t.final_step().feasibility.ok());
    SchemeSummary { scheme, slot_totals, mean_total_latency, feasible }
}

/// Traces of the run behind `scheme`. Schemes 3 and 4 share the proposed run.
pub fn scheme_traces(scheme: SchemeId, cfg: &ScenarioConfig, paths: &PathSet) -> Result<Vec<IterationTrace>> {
    let runner = Runner::new(cfg, paths, scheme.pipeline(cfg));
    match scheme {
        SchemeId::Baseline1 => runner.run_local(),
        _ => runner.run_horizon(),
    }
}

pub fn run_scheme(scheme: SchemeId, cfg: &ScenarioConfig) -> Result<SchemeSummary> {
    Ok(run_schemes(&[scheme], cfg)?.remove(0))
}

/// Runs several schemes on the same scenario; the proposed run is shared by
/// the proposed scheme and schemes 3 and 4.
pub fn run_schemes(schemes: &[SchemeId], cfg: &ScenarioConfig) -> Result<Vec<SchemeSummary>> {
    cfg.validate()?;
    let paths = generate_scenario(cfg)?;
    let mut proposed: Option<Vec<IterationTrace>> = None;
    let mut out = Vec::with_capacity(schemes.len());
    for &scheme in schemes {
        let joint = matches!(scheme, SchemeId::Proposed | SchemeId::Scheme3 | SchemeId::Scheme4);
        let summary = if joint {
            if proposed.is_none() {
                proposed = Some(scheme_traces(SchemeId::Proposed, cfg, &paths)?);
            }
            summarize(scheme, proposed.as_deref().unwrap_or_default())
        } else {
            summarize(scheme, &scheme_traces(scheme, cfg, &paths)?)
        };
        out.push(summary);
    }
    Ok(out)
}

/// Maps an error to the diagnostic used when a slot is aborted.
pub fn describe(err: &Error) -> String {
    match err {
        Error::Infeasible(msg) => format!("slot aborted, infeasible: {msg}"),
        other => other.to_string(),
    }
}
