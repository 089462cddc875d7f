//! Offload, execution, and total latencies.

use serde::{Deserialize, Serialize};

use crate::channel::LinkRates;
use crate::scenario::{DataSizes, ScenarioConfig};
use crate::{Error, Result};

/// Transfer time `D / R`. An empty task takes no time; a zero rate with data
/// pending yields `+inf`.
pub fn offload_latency(bits: f64, rate: f64) -> f64 {
    if bits == 0.0 {
        0.0
    } else if rate <= 0.0 {
        f64::INFINITY
    } else {
        bits / rate
    }
}

/// Edge training time `C_M · (D / sample_size) · ϖ_M · ι_M / f`.
pub fn exec_latency(bits: f64, freq: f64, cfg: &ScenarioConfig) -> Result<f64> {
    if !(freq > 0.0) {
        return Err(Error::domain(format!("CPU frequency must be > 0, got {freq}")));
    }
    Ok(cfg.task_load(bits) / freq)
}

/// Per-vehicle CPU frequencies (Hz) for communication and sensing tasks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpuAllocation {
    pub comm: Vec<f64>,
    pub sense: Vec<f64>,
}

impl CpuAllocation {
    /// Equal split of `budget` over the tasks that carry data.
    pub fn equal_split(data: &DataSizes, budget: f64) -> Self {
        let active = data.comm.iter().chain(&data.sense).filter(|&&b| b > 0.0).count().max(1);
        let share = budget / active as f64;
        let pick = |b: &f64| if *b > 0.0 { share } else { 0.0 };
        Self { comm: data.comm.iter().map(pick).collect(), sense: data.sense.iter().map(pick).collect() }
    }

    pub fn uniform(n: usize, freq: f64) -> Self {
        Self { comm: vec![freq; n], sense: vec![freq; n] }
    }

    pub fn total(&self) -> f64 {
        self.comm.iter().chain(&self.sense).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleLatency {
    pub offload_comm: f64,
    pub exec_comm: f64,
    pub comm: f64,
    pub offload_sense: f64,
    pub exec_sense: f64,
    pub sense: f64,
    pub total: f64,
}

/// Latencies of one slot plus the per-vehicle threshold checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyReport {
    pub vehicles: Vec<VehicleLatency>,
    pub system_total: f64,
    pub slot: usize,
    /// `T_c <= T_th^c` per vehicle.
    pub comm_ok: Vec<bool>,
    /// `T_s <= T_th^s` per vehicle.
    pub sense_ok: Vec<bool>,
}

impl LatencyReport {
    pub fn thresholds_ok(&self) -> bool {
        self.comm_ok.iter().chain(&self.sense_ok).all(|&ok| ok)
    }

    pub fn comm_total(&self) -> f64 {
        self.vehicles.iter().map(|v| v.comm).sum()
    }

    pub fn sense_total(&self) -> f64 {
        self.vehicles.iter().map(|v| v.sense).sum()
    }
}

fn task_exec(bits: f64, freq: f64, cfg: &ScenarioConfig) -> Result<f64> {
    if bits == 0.0 {
        Ok(0.0)
    } else {
        exec_latency(bits, freq, cfg)
    }
}

/// Combines rates, CPU frequencies, and dataset sizes into a report.
pub fn assemble_report(
    rates: &LinkRates,
    alloc: &CpuAllocation,
    data: &DataSizes,
    cfg: &ScenarioConfig,
    slot: usize,
) -> Result<LatencyReport> {
    let n = data.num_vehicles();
    let mut vehicles = Vec::with_capacity(n);
    for k in 0..n {
        let offload_comm = offload_latency(data.comm[k], rates.comm[k]);
        let exec_comm = task_exec(data.comm[k], alloc.comm[k], cfg)?;
        let offload_sense = offload_latency(data.sense[k], rates.sense[k]);
        let exec_sense = task_exec(data.sense[k], alloc.sense[k], cfg)?;
        let comm = offload_comm + exec_comm;
        let sense = offload_sense + exec_sense;
        vehicles.push(VehicleLatency {
            offload_comm,
            exec_comm,
            comm,
            offload_sense,
            exec_sense,
            sense,
            total: comm + sense,
        });
    }
    let system_total = vehicles.iter().map(|v| v.total).sum();
    Ok(LatencyReport {
        comm_ok: vehicles.iter().map(|v| v.comm <= cfg.latency_threshold_comm).collect(),
        sense_ok: vehicles.iter().map(|v| v.sense <= cfg.latency_threshold_sense).collect(),
        vehicles,
        system_total,
        slot,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_cfg() -> ScenarioConfig {
        ScenarioConfig {
            cycles_per_sample: 1e3,
            minibatch_ratio: 1.0,
            sgd_iterations: 1,
            sample_size_bits: 8192.0,
            ..Default::default()
        }
    }

    #[test]
    fn offload_values() {
        assert_eq!(offload_latency(8192.0, 8192.0), 1.0);
        assert_eq!(offload_latency(0.0, 0.0), 0.0);
        assert_eq!(offload_latency(0.0, 5.0), 0.0);
        assert_eq!(offload_latency(1.0, 0.0), f64::INFINITY);
        assert_eq!(offload_latency(16384.0, 1e6), 16384.0 / 1e6);
    }

    #[test]
    fn exec_values() {
        let cfg = unit_cfg();
        assert_eq!(exec_latency(8192.0, 1e3, &cfg).unwrap(), 1.0);
        let half = exec_latency(8192.0, 2e3, &cfg).unwrap();
        assert_eq!(half, 0.5);
        let cfg = ScenarioConfig { minibatch_ratio: 0.5, sgd_iterations: 10, ..unit_cfg() };
        assert!((exec_latency(2.0 * 8192.0, 1e4, &cfg).unwrap() - 1.0).abs() < 1e-15);
        assert!(exec_latency(1.0, 0.0, &cfg).is_err());
        assert!(exec_latency(1.0, -3.0, &cfg).is_err());
    }

    #[test]
    fn symmetric_vehicle_total_is_twice_comm() {
        let cfg = unit_cfg();
        let rates = LinkRates { comm: vec![4096.0], sense: vec![4096.0] };
        let data = DataSizes { comm: vec![8192.0], sense: vec![8192.0] };
        let r = assemble_report(&rates, &CpuAllocation::uniform(1, 1e3), &data, &cfg, 0).unwrap();
        assert_eq!(r.vehicles[0].total, 2.0 * r.vehicles[0].comm);
        assert_eq!(r.vehicles[0].comm, 3.0);
    }

    #[test]
    fn system_total_adds_vehicle_totals() {
        let cfg = ScenarioConfig { latency_threshold_comm: 1.0, latency_threshold_sense: 1.0, ..unit_cfg() };
        // Vehicle k has offload-only latency (k+1)/2 per task.
        let rates = LinkRates { comm: vec![2.0, 1.0, 2.0 / 3.0], sense: vec![2.0, 1.0, 2.0 / 3.0] };
        let data = DataSizes { comm: vec![1.0; 3], sense: vec![1.0; 3] };
        let alloc = CpuAllocation::uniform(3, 1e300);
        let r = assemble_report(&rates, &alloc, &data, &cfg, 4).unwrap();
        assert!((r.system_total - 6.0).abs() < 1e-12);
        assert_eq!(r.slot, 4);
        assert_eq!(r.comm_ok, vec![true, true, false]);
    }

    #[test]
    fn absent_tasks_cost_nothing() {
        let cfg = unit_cfg();
        let rates = LinkRates { comm: vec![1.0], sense: vec![0.0] };
        let data = DataSizes { comm: vec![8192.0], sense: vec![0.0] };
        let alloc = CpuAllocation { comm: vec![1e3], sense: vec![0.0] };
        let r = assemble_report(&rates, &alloc, &data, &cfg, 0).unwrap();
        assert_eq!(r.vehicles[0].sense, 0.0);
        assert_eq!(r.system_total, 8192.0 + 1.0);
    }

    #[test]
    fn zero_rate_gives_infinite_sentinel() {
        let cfg = unit_cfg();
        let rates = LinkRates { comm: vec![0.0], sense: vec![1.0] };
        let data = DataSizes { comm: vec![1.0], sense: vec![1.0] };
        let r = assemble_report(&rates, &CpuAllocation::uniform(1, 1.0), &data, &cfg, 0).unwrap();
        assert!(r.system_total.is_infinite());
        assert!(!r.comm_ok[0]);
    }
}
