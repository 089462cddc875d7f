//! Command-line front end: `run`, `sweep`, and `convergence`.
//!
//! Exit codes: 0 on success, 1 on I/O failure, 2 on configuration or usage
//! errors, 3 when a slot is infeasible.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::combining::CombinerStrategy;
use crate::orchestrator::{run_schemes, scheme_traces, stabilization_index, IterationTrace, Runner, Pipeline, SchemeId};
use crate::scenario::{generate_scenario, InterferenceForm, ScenarioConfig};
use crate::seed::{derive_seed, TAG_RUN};
use crate::{Error, Result};

/// Relative change below which an iteration counts as stabilized.
pub const STABILIZATION_TOL: f64 = 1e-3;

#[derive(Debug, Parser)]
#[command(name = "fa-iscc", version, about = "Latency minimization for fluid-antenna ISCC vehicular offloading")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scheme over all slots and write a per-iteration trace.
    Run {
        #[command(flatten)]
        common: Common,
        /// Scheme to run.
        #[arg(long, default_value = "proposed", value_parser = parse_scheme)]
        scheme: SchemeId,
    },
    /// Sweep the number of antennas or vehicles across seeds and schemes.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        param: SweepParam,
        /// Comma-separated values of the swept parameter.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        /// Schemes to include; all when omitted.
        #[arg(long = "scheme", value_parser = parse_scheme)]
        schemes: Vec<SchemeId>,
        /// When sweeping N, set M = N + offset instead of keeping M fixed.
        #[arg(long)]
        antenna_offset: Option<usize>,
    },
    /// Record the inner-iteration convergence of the proposed scheme.
    Convergence {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        seeds: usize,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// TOML or JSON scenario file; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Root seed, overriding the file.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    combiner: Option<CombinerArg>,
    #[arg(long, value_enum)]
    interference: Option<InterferenceArg>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write SVG charts.
    #[arg(long)]
    plot: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CombinerArg {
    Mmse,
    BoundSdp,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InterferenceArg {
    Cross,
    Paper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepParam {
    #[value(name = "M")]
    M,
    #[value(name = "N")]
    N,
}

fn parse_scheme(s: &str) -> std::result::Result<SchemeId, String> {
    SchemeId::parse(s).ok_or_else(|| {
        let names: Vec<&str> = SchemeId::ALL.iter().map(|s| s.name()).collect();
        format!("unknown scheme `{s}`; expected one of {}", names.join(", "))
    })
}

impl Common {
    fn load(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(path) => ScenarioConfig::from_file(path)?,
            None => ScenarioConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.rng_seed = seed;
        }
        if let Some(c) = self.combiner {
            cfg.combiner = match c {
                CombinerArg::Mmse => CombinerStrategy::Mmse,
                CombinerArg::BoundSdp => CombinerStrategy::BoundSdp,
            };
        }
        if let Some(i) = self.interference {
            cfg.interference_form = match i {
                InterferenceArg::Cross => InterferenceForm::CrossChannel,
                InterferenceArg::Paper => InterferenceForm::OwnLink,
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Provenance of a CLI invocation, written as `manifest.json`.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: ScenarioConfig,
    pub seeds: Vec<u64>,
    pub outputs: Vec<String>,
    pub wall_clock_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stabilization: Option<StabilizationSummary>,
}

#[derive(Debug, Serialize)]
pub struct StabilizationSummary {
    pub tolerance: f64,
    /// Per seed; `null` when a run never stabilized.
    pub per_seed: Vec<Option<usize>>,
    pub median: Option<f64>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match cli.command {
        Command::Run { common, scheme } => cmd_run(&common, scheme),
        Command::Sweep { common, param, values, seeds, schemes, antenna_offset } => {
            cmd_sweep(&common, param, &values, seeds, &schemes, antenna_offset)
        }
        Command::Convergence { common, seeds } => cmd_convergence(&common, seeds),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Domain(_) => 2,
        Error::Infeasible(_) => 3,
        Error::Io(_) => 1,
    }
}

fn write_out(dir: &Path, name: &str, contents: &str, outputs: &mut Vec<String>) -> Result<()> {
    fs::write(dir.join(name), contents)?;
    outputs.push(name.to_owned());
    Ok(())
}

fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<()> {
    let json = serde_json::to_string_pretty(manifest).map_err(|e| Error::Io(e.into()))?;
    fs::write(dir.join("manifest.json"), json + "\n")?;
    Ok(())
}

/// Formats a latency, using `inf` for unbounded values.
fn num(x: f64) -> String {
    if x.is_infinite() {
        "inf".to_owned()
    } else {
        format!("{x:e}")
    }
}

/// One row per vehicle per inner iteration, taken at the end of the iteration.
pub fn trace_csv(traces: &[IterationTrace]) -> String {
    let mut s = String::from("slot,iter,vehicle,T_off_c,T_exe_c,T_off_s,T_exe_s,T_total,system_total,feasible\n");
    for trace in traces {
        for step in trace.iteration_ends() {
            let r = &step.report;
            for (n, v) in r.vehicles.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{},{}",
                    trace.slot,
                    step.iter,
                    n,
                    num(v.offload_comm),
                    num(v.exec_comm),
                    num(v.offload_sense),
                    num(v.exec_sense),
                    num(v.total),
                    num(r.system_total),
                    step.feasibility.ok()
                );
            }
        }
    }
    s
}

fn cmd_run(common: &Common, scheme: SchemeId) -> Result<()> {
    let start = Instant::now();
    let cfg = common.load()?;
    fs::create_dir_all(&common.out)?;
    let paths = generate_scenario(&cfg)?;
    let traces = scheme_traces(scheme, &cfg, &paths)?;
    let mut outputs = Vec::new();
    write_out(&common.out, "trace.csv", &trace_csv(&traces), &mut outputs)?;
    if common.plot {
        let series = vec![(
            scheme.name().to_owned(),
            traces
                .iter()
                .flat_map(|t| t.iteration_totals().into_iter().enumerate().map(move |(i, y)| ((t.slot * 1000 + i) as f64, y)))
                .collect::<Vec<_>>(),
        )];
        write_out(&common.out, "trace.svg", &line_chart("System latency", "iteration", "latency (s)", &series), &mut outputs)?;
    }
    let last = traces.last().map(|t| t.final_report().system_total).unwrap_or(0.0);
    println!("{}: final system latency {} s over {} slot(s)", scheme.name(), num(last), traces.len());
    write_manifest(
        &common.out,
        &RunManifest {
            command: format!("run --scheme {}", scheme.name()),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            config: cfg.clone(),
            seeds: vec![cfg.rng_seed],
            outputs,
            wall_clock_s: start.elapsed().as_secs_f64(),
            stabilization: None,
        },
    )
}

/// Scenario of one sweep cell: the swept parameter applied and the region
/// grown to hold the antenna grid.
pub fn sweep_config(base: &ScenarioConfig, param_is_antennas: bool, value: usize, antenna_offset: Option<usize>, seed: u64) -> ScenarioConfig {
    let mut cfg = base.clone();
    if param_is_antennas {
        cfg.num_antennas = value;
    } else {
        cfg.num_vehicles = value;
        if let Some(k) = antenna_offset {
            cfg.num_antennas = value + k;
        }
    }
    cfg.rng_seed = seed;
    cfg.fit_region_to_antennas();
    cfg
}

/// Seed of the `index`-th run of a multi-seed command.
pub fn run_seed(root: u64, index: usize) -> u64 {
    derive_seed(root, &[TAG_RUN, index as u64])
}

fn cmd_sweep(
    common: &Common,
    param: SweepParam,
    values: &[usize],
    seeds: usize,
    schemes: &[SchemeId],
    antenna_offset: Option<usize>,
) -> Result<()> {
    let start = Instant::now();
    let base = common.load()?;
    if seeds == 0 {
        return Err(Error::config("--seeds must be >= 1"));
    }
    let schemes: Vec<SchemeId> = if schemes.is_empty() { SchemeId::ALL.to_vec() } else { schemes.to_vec() };
    let seed_list: Vec<u64> = (0..seeds).map(|i| run_seed(base.rng_seed, i)).collect();
    let cells: Vec<(usize, usize)> = (0..values.len()).flat_map(|v| (0..seeds).map(move |s| (v, s))).collect();
    let name = match param {
        SweepParam::M => "M",
        SweepParam::N => "N",
    };
    let results: Vec<Vec<f64>> = cells
        .par_iter()
        .map(|&(v, s)| {
            let cfg = sweep_config(&base, param == SweepParam::M, values[v], antenna_offset, seed_list[s]);
            cfg.validate()?;
            Ok(run_schemes(&schemes, &cfg)?.into_iter().map(|r| r.mean_total_latency).collect())
        })
        .collect::<Result<_>>()?;

    let mut csv = String::from("param,value,scheme,seed,mean_total_latency\n");
    let mut series: Vec<(String, Vec<(f64, f64)>)> = schemes.iter().map(|s| (s.name().to_owned(), Vec::new())).collect();
    for (v, &value) in values.iter().enumerate() {
        for (k, scheme) in schemes.iter().enumerate() {
            let mut sum = 0.0;
            for (s, seed) in seed_list.iter().enumerate() {
                let t = results[v * seeds + s][k];
                sum += t;
                let _ = writeln!(csv, "{name},{value},{},{seed},{}", scheme.name(), num(t));
            }
            series[k].1.push((value as f64, sum / seeds as f64));
        }
    }
    let mut outputs = Vec::new();
    fs::create_dir_all(&common.out)?;
    write_out(&common.out, "sweep.csv", &csv, &mut outputs)?;
    if common.plot {
        let chart = line_chart("Mean system latency", name, "latency (s)", &series);
        write_out(&common.out, "sweep.svg", &chart, &mut outputs)?;
    }
    for (label, points) in &series {
        let means: Vec<String> = points.iter().map(|(x, y)| format!("{name}={x}: {}", num(*y))).collect();
        println!("{label:>10}  {}", means.join("  "));
    }
    write_manifest(
        &common.out,
        &RunManifest {
            command: format!("sweep --param {name}"),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            config: base,
            seeds: seed_list,
            outputs,
            wall_clock_s: start.elapsed().as_secs_f64(),
            stabilization: None,
        },
    )
}

/// Median of the stabilization indices; runs that never stabilize count as
/// larger than any index.
pub fn median_stabilization(indices: &[Option<usize>]) -> Option<f64> {
    if indices.is_empty() {
        return None;
    }
    let mut keys: Vec<f64> = indices.iter().map(|i| i.map_or(f64::INFINITY, |v| v as f64)).collect();
    keys.sort_by(f64::total_cmp);
    let n = keys.len();
    let m = if n % 2 == 1 { keys[n / 2] } else { 0.5 * (keys[n / 2 - 1] + keys[n / 2]) };
    m.is_finite().then_some(m)
}

/// Slot-0 trace of the proposed scheme for seed `seed`.
pub fn convergence_trace(base: &ScenarioConfig, seed: u64) -> Result<IterationTrace> {
    let cfg = ScenarioConfig { rng_seed: seed, ..base.clone() };
    let paths = generate_scenario(&cfg)?;
    let runner = Runner::new(&cfg, &paths, Pipeline::full());
    runner.run_slot(runner.initial_state()?, 0)
}

fn cmd_convergence(common: &Common, seeds: usize) -> Result<()> {
    let start = Instant::now();
    let base = common.load()?;
    if seeds == 0 {
        return Err(Error::config("--seeds must be >= 1"));
    }
    let seed_list: Vec<u64> = (0..seeds).map(|i| run_seed(base.rng_seed, i)).collect();
    let traces: Vec<IterationTrace> =
        seed_list.par_iter().map(|&seed| convergence_trace(&base, seed)).collect::<Result<_>>()?;

    let mut csv = String::from("seed,iter,vehicle,T_total,system_total\n");
    let mut series = Vec::new();
    let mut per_seed = Vec::new();
    for (trace, seed) in traces.iter().zip(&seed_list) {
        for step in trace.iteration_ends() {
            for (n, v) in step.report.vehicles.iter().enumerate() {
                let _ = writeln!(csv, "{seed},{},{n},{},{}", step.iter, num(v.total), num(step.report.system_total));
            }
        }
        let totals = trace.iteration_totals();
        let n = base.num_vehicles as f64;
        series.push((format!("seed {seed}"), totals.iter().enumerate().map(|(i, t)| (i as f64, t / n)).collect()));
        per_seed.push(stabilization_index(&totals, STABILIZATION_TOL));
    }
    let median = median_stabilization(&per_seed);
    let mut outputs = Vec::new();
    fs::create_dir_all(&common.out)?;
    write_out(&common.out, "convergence.csv", &csv, &mut outputs)?;
    if common.plot {
        let chart = line_chart("Average latency per vehicle", "iteration", "latency (s)", &series);
        write_out(&common.out, "convergence.svg", &chart, &mut outputs)?;
    }
    for (seed, idx) in seed_list.iter().zip(&per_seed) {
        println!("seed {seed}: stabilized at {}", idx.map_or("never".to_owned(), |i| i.to_string()));
    }
    println!("median stabilization index: {}", median.map_or("none".to_owned(), |m| m.to_string()));
    write_manifest(
        &common.out,
        &RunManifest {
            command: "convergence".to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            config: base,
            seeds: seed_list,
            outputs,
            wall_clock_s: start.elapsed().as_secs_f64(),
            stabilization: Some(StabilizationSummary { tolerance: STABILIZATION_TOL, per_seed, median }),
        },
    )
}

const PALETTE: [&str; 7] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"];

/// Minimal SVG line chart with a legend.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let (w, h, left, right, top, bottom) = (720.0, 440.0, 80.0, 160.0, 40.0, 50.0);
    let pts = series.iter().flat_map(|(_, p)| p.iter()).filter(|(x, y)| x.is_finite() && y.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + y0.abs().max(1e-12);
    }
    let pw = w - left - right;
    let ph = h - top - bottom;
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{title}</text>"#, left + pw / 2.0);
    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{fx:.3}</text>"#, sx(fx), top + ph + 16.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{fy:.3e}</text>"#, left - 6.0, sy(fy) + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, left + pw / 2.0, h - 12.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{y_label}</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );
    for (i, (label, points)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, coords.join(" "));
        let ly = top + 14.0 + 18.0 * i as f64;
        let _ = writeln!(s, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, w - right + 10.0, w - right + 30.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{label}</text>"#, w - right + 36.0, ly + 4.0);
    }
    s.push_str("</svg>\n");
    s
}
