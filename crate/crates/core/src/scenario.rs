//! Configuration, physical parameters, and seeded scenario generation.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::combining::CombinerStrategy;
use crate::placement::PsoSettings;
use crate::seed::{rng_for, TAG_DATA, TAG_PATHS};
use crate::{Error, Result, C64};

/// Bits per kilobyte (1 KB = 1024 bytes).
pub const BITS_PER_KB: f64 = 8192.0;

/// Interference term used in the uplink SINR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum InterferenceForm {
    /// `Σ_{k≠n} |w_nᴴ h_k|² p_k`: leakage of the other vehicles through vehicle `n`'s combiner.
    #[default]
    #[serde(rename = "cross")]
    CrossChannel,
    /// `Σ_{k≠n} |w_kᴴ h_k|² p_k`: each other vehicle's power through its own combiner.
    #[serde(rename = "paper")]
    OwnLink,
}

/// Number of propagation paths, either shared by every vehicle or per vehicle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PathCount {
    Uniform(usize),
    PerVehicle(Vec<usize>),
}

impl PathCount {
    pub fn for_vehicle(&self, n: usize) -> usize {
        match self {
            PathCount::Uniform(l) => *l,
            PathCount::PerVehicle(ls) => ls[n],
        }
    }
}

/// All physical, system, and solver parameters of a run.
///
/// Defaults follow the reference simulation setting: 4 antennas, 3 vehicles,
/// 3 paths per vehicle, λ = 0.1 m, a 1.5λ square receive region, λ minimum
/// spacing, 0.5–2 KB datasets, 100 GHz edge CPU, 30 dBm transmit power,
/// −174 dBm/Hz noise density, and reflection coefficient 0.5.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub num_antennas: usize,
    pub num_vehicles: usize,
    pub paths_per_vehicle: PathCount,
    /// Carrier wavelength (m).
    pub wavelength: f64,
    /// Side of the square receive region with lower-left corner at the origin (m).
    pub region_side: f64,
    /// Minimum distance between two antennas (m).
    pub min_spacing: f64,
    /// Transmit power of every vehicle (W).
    pub tx_power: f64,
    /// Noise power spectral density of the communication link (dBm/Hz).
    pub noise_density_comm: f64,
    /// Noise power spectral density of the sensing link (dBm/Hz).
    pub noise_density_sense: f64,
    /// Signal bandwidth (Hz).
    pub bandwidth: f64,
    /// Dataset sizes are drawn uniformly in `[data_min_kb, data_max_kb]`.
    pub data_min_kb: f64,
    pub data_max_kb: f64,
    /// Redraw dataset sizes every slot; otherwise slot 0 sizes are reused.
    pub redraw_data_each_slot: bool,
    /// Reflection coefficient of every sensing path.
    pub reflection_coeff: f64,
    /// Path delays are drawn uniformly in `[0, max_delay]` (s).
    pub max_delay: f64,
    /// Vehicle speeds are drawn uniformly in `[speed_min, speed_max]` (m/s).
    pub speed_min: f64,
    pub speed_max: f64,
    /// CPU cycles to process one data sample.
    pub cycles_per_sample: f64,
    /// Mini-batch size ratio in (0, 1].
    pub minibatch_ratio: f64,
    /// SGD iterations on the edge server.
    pub sgd_iterations: u32,
    /// Bits per data sample.
    pub sample_size_bits: f64,
    /// Edge CPU budget shared by all tasks (Hz).
    pub cpu_budget: f64,
    /// Per-vehicle communication latency threshold (s).
    pub latency_threshold_comm: f64,
    /// Per-vehicle sensing latency threshold (s).
    pub latency_threshold_sense: f64,
    pub num_slots: usize,
    /// Slot duration (s); slot `t` starts at `t * slot_duration`.
    pub slot_duration: f64,
    /// Alternating iterations per slot.
    pub inner_iterations: usize,
    /// Local vehicle CPU used when tasks are not offloaded (Hz).
    pub local_cpu: f64,
    /// Fraction of the CPU budget given to each task type when communication
    /// and sensing run as independent systems.
    pub independent_share: f64,
    pub rng_seed: u64,
    pub interference_form: InterferenceForm,
    pub combiner: CombinerStrategy,
    pub pso: PsoSettings,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            num_antennas: 4,
            num_vehicles: 3,
            paths_per_vehicle: PathCount::Uniform(3),
            wavelength: 0.1,
            // 1.5 and 1 wavelengths.
            region_side: 0.15,
            min_spacing: 0.1,
            tx_power: dbm_to_watts(30.0),
            noise_density_comm: -174.0,
            noise_density_sense: -174.0,
            bandwidth: 1e6,
            data_min_kb: 0.5,
            data_max_kb: 2.0,
            redraw_data_each_slot: true,
            reflection_coeff: 0.5,
            max_delay: 1e-6,
            speed_min: 10.0,
            speed_max: 30.0,
            cycles_per_sample: 1e6,
            minibatch_ratio: 0.5,
            sgd_iterations: 10,
            sample_size_bits: BITS_PER_KB,
            cpu_budget: 100e9,
            latency_threshold_comm: 0.1,
            latency_threshold_sense: 0.1,
            num_slots: 1,
            slot_duration: 0.1,
            inner_iterations: 10,
            local_cpu: 1e9,
            independent_share: 0.5,
            rng_seed: 1,
            interference_form: InterferenceForm::CrossChannel,
            combiner: CombinerStrategy::Mmse,
            pso: PsoSettings::default(),
        }
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

impl ScenarioConfig {
    /// Reads a TOML or JSON config; the format is chosen by file extension
    /// (`.json` is JSON, anything else TOML). Missing fields take defaults.
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: Self = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::config(e.to_string()))?
        } else {
            toml::from_str(&text).map_err(|e| Error::config(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must be finite and > 0, got {v}")))
            }
        }
        if self.num_antennas == 0 {
            return Err(Error::config("num_antennas must be >= 1"));
        }
        if self.num_vehicles == 0 {
            return Err(Error::config("num_vehicles must be >= 1"));
        }
        if self.num_vehicles > self.num_antennas {
            return Err(Error::config(format!(
                "num_vehicles ({}) must not exceed num_antennas ({})",
                self.num_vehicles, self.num_antennas
            )));
        }
        match &self.paths_per_vehicle {
            PathCount::Uniform(0) => return Err(Error::config("paths_per_vehicle must be >= 1")),
            PathCount::PerVehicle(ls) if ls.len() != self.num_vehicles => {
                return Err(Error::config(format!(
                    "paths_per_vehicle lists {} entries for {} vehicles",
                    ls.len(),
                    self.num_vehicles
                )))
            }
            PathCount::PerVehicle(ls) if ls.contains(&0) => {
                return Err(Error::config("paths_per_vehicle entries must be >= 1"))
            }
            _ => {}
        }
        positive("wavelength", self.wavelength)?;
        positive("region_side", self.region_side)?;
        positive("min_spacing", self.min_spacing)?;
        if self.num_antennas >= 2 && self.min_spacing > self.region_side * 2f64.sqrt() {
            return Err(Error::config(format!(
                "min_spacing {} exceeds the region diagonal {}",
                self.min_spacing,
                self.region_side * 2f64.sqrt()
            )));
        }
        positive("tx_power", self.tx_power)?;
        positive("bandwidth", self.bandwidth)?;
        positive("noise_power_comm", self.noise_power_comm())?;
        positive("noise_power_sense", self.noise_power_sense())?;
        positive("data_min_kb", self.data_min_kb)?;
        positive("data_max_kb", self.data_max_kb)?;
        if self.data_min_kb > self.data_max_kb {
            return Err(Error::config("data_min_kb must not exceed data_max_kb"));
        }
        if !(0.0..=1.0).contains(&self.reflection_coeff) {
            return Err(Error::config("reflection_coeff must lie in [0, 1]"));
        }
        if !(self.max_delay >= 0.0 && self.max_delay.is_finite()) {
            return Err(Error::config("max_delay must be finite and >= 0"));
        }
        if !(self.speed_min >= 0.0 && self.speed_min <= self.speed_max && self.speed_max.is_finite())
        {
            return Err(Error::config("speeds must satisfy 0 <= speed_min <= speed_max"));
        }
        positive("cycles_per_sample", self.cycles_per_sample)?;
        if !(self.minibatch_ratio > 0.0 && self.minibatch_ratio <= 1.0) {
            return Err(Error::config("minibatch_ratio must lie in (0, 1]"));
        }
        if self.sgd_iterations == 0 {
            return Err(Error::config("sgd_iterations must be >= 1"));
        }
        positive("sample_size_bits", self.sample_size_bits)?;
        positive("cpu_budget", self.cpu_budget)?;
        positive("latency_threshold_comm", self.latency_threshold_comm)?;
        positive("latency_threshold_sense", self.latency_threshold_sense)?;
        if self.num_slots == 0 {
            return Err(Error::config("num_slots must be >= 1"));
        }
        positive("slot_duration", self.slot_duration)?;
        positive("local_cpu", self.local_cpu)?;
        if !(self.independent_share > 0.0 && self.independent_share < 1.0) {
            return Err(Error::config("independent_share must lie in (0, 1)"));
        }
        self.pso.validate()
    }

    pub fn noise_power_comm(&self) -> f64 {
        dbm_to_watts(self.noise_density_comm) * self.bandwidth
    }

    pub fn noise_power_sense(&self) -> f64 {
        dbm_to_watts(self.noise_density_sense) * self.bandwidth
    }

    pub fn powers(&self) -> Vec<f64> {
        vec![self.tx_power; self.num_vehicles]
    }

    /// Start time of slot `t` (s).
    pub fn slot_time(&self, t: usize) -> f64 {
        t as f64 * self.slot_duration
    }

    /// Cycles needed to train on `bits` of data: `C_M · (D / sample_size) · ϖ_M · ι_M`.
    pub fn task_load(&self, bits: f64) -> f64 {
        self.cycles_per_sample
            * (bits / self.sample_size_bits)
            * self.minibatch_ratio
            * f64::from(self.sgd_iterations)
    }

    /// Smallest square side that holds the [`initial_layout`] grid of `m`
    /// antennas at spacing `d0`, with a half-spacing margin.
    pub fn grid_region_side(m: usize, d0: f64) -> f64 {
        let (cols, rows) = grid_shape(m);
        (cols.max(rows) - 1) as f64 * d0 + 0.5 * d0
    }

    /// Grows `region_side` to [`Self::grid_region_side`] when the grid does not fit.
    pub fn fit_region_to_antennas(&mut self) {
        let need = Self::grid_region_side(self.num_antennas, self.min_spacing);
        if need > self.region_side {
            self.region_side = need;
        }
    }
}

/// One propagation path of a vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    /// Elevation angle of arrival (rad).
    pub elevation: f64,
    /// Azimuth angle of arrival (rad).
    pub azimuth: f64,
    pub gain: C64,
    pub reflection: f64,
    /// Echo delay (s).
    pub delay: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehiclePaths {
    pub paths: Vec<Path>,
    /// Speed (m/s).
    pub speed: f64,
    /// Heading angle (rad).
    pub heading: f64,
}

/// Multipath parameters of every vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub vehicles: Vec<VehiclePaths>,
}

impl PathSet {
    pub fn num_vehicles(&self) -> usize {
        self.vehicles.len()
    }

    /// Checks the angle range, reflection bound, and per-vehicle path counts.
    pub fn check(&self, cfg: &ScenarioConfig) -> Result<()> {
        if self.vehicles.len() != cfg.num_vehicles {
            return Err(Error::domain("path set vehicle count mismatch"));
        }
        for (n, v) in self.vehicles.iter().enumerate() {
            if v.paths.len() != cfg.paths_per_vehicle.for_vehicle(n) {
                return Err(Error::domain(format!("vehicle {n} has wrong path count")));
            }
            for p in &v.paths {
                let angle_ok = |a: f64| (-FRAC_PI_2..=FRAC_PI_2).contains(&a);
                if !angle_ok(p.elevation) || !angle_ok(p.azimuth) {
                    return Err(Error::domain(format!("vehicle {n} has an angle outside [-pi/2, pi/2]")));
                }
                if p.reflection.abs() > 1.0 {
                    return Err(Error::domain(format!("vehicle {n} has |alpha| > 1")));
                }
            }
        }
        Ok(())
    }
}

/// Draws the multipath scenario. Each vehicle has its own random stream, so
/// vehicle `n` gets the same paths regardless of `N` or `M`.
///
/// Angles are uniform on [−π/2, π/2], gains are circularly-symmetric complex
/// Gaussian with unit total power per vehicle, delays uniform on
/// `[0, max_delay]`, and speeds uniform on `[speed_min, speed_max]` with a
/// uniform heading on [−π, π].
pub fn generate_scenario(cfg: &ScenarioConfig) -> Result<PathSet> {
    cfg.validate()?;
    let vehicles = (0..cfg.num_vehicles)
        .map(|n| {
            let mut rng = rng_for(cfg.rng_seed, &[TAG_PATHS, n as u64]);
            let l = cfg.paths_per_vehicle.for_vehicle(n);
            let std = (0.5 / l as f64).sqrt();
            let paths = (0..l)
                .map(|_| {
                    let elevation = rng.random_range(-FRAC_PI_2..=FRAC_PI_2);
                    let azimuth = rng.random_range(-FRAC_PI_2..=FRAC_PI_2);
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    let delay = rng.random_range(0.0..=cfg.max_delay);
                    Path {
                        elevation,
                        azimuth,
                        gain: C64::new(re * std, im * std),
                        reflection: cfg.reflection_coeff,
                        delay,
                    }
                })
                .collect();
            let speed = rng.random_range(cfg.speed_min..=cfg.speed_max);
            let heading = rng.random_range(-PI..=PI);
            VehiclePaths { paths, speed, heading }
        })
        .collect();
    Ok(PathSet { vehicles })
}

/// Dataset sizes (bits) of one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSizes {
    pub comm: Vec<f64>,
    pub sense: Vec<f64>,
}

impl DataSizes {
    pub fn num_vehicles(&self) -> usize {
        self.comm.len()
    }
}

/// Draws the communication and sensing dataset sizes for slot `t`.
pub fn draw_data(cfg: &ScenarioConfig, t: usize) -> DataSizes {
    let slot = if cfg.redraw_data_each_slot { t } else { 0 };
    let (comm, sense) = (0..cfg.num_vehicles)
        .map(|n| {
            let mut rng = rng_for(cfg.rng_seed, &[TAG_DATA, n as u64, slot as u64]);
            let mut draw = || rng.random_range(cfg.data_min_kb..=cfg.data_max_kb) * BITS_PER_KB;
            (draw(), draw())
        })
        .unzip();
    DataSizes { comm, sense }
}

/// Antenna positions `d_m = [x_m, y_m]` (m).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntennaLayout {
    pub positions: Vec<[f64; 2]>,
    pub slot: usize,
}

impl AntennaLayout {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Packs positions as `[x_1, y_1, x_2, y_2, ...]`.
    pub fn to_flat(&self) -> Vec<f64> {
        self.positions.iter().flat_map(|p| [p[0], p[1]]).collect()
    }

    pub fn from_flat(flat: &[f64], slot: usize) -> Self {
        Self {
            positions: flat.chunks_exact(2).map(|c| [c[0], c[1]]).collect(),
            slot,
        }
    }

    /// Every antenna lies in `[0, side]²`.
    pub fn in_region(&self, side: f64) -> bool {
        self.positions
            .iter()
            .all(|p| p.iter().all(|&c| (0.0..=side).contains(&c)))
    }

    /// Smallest pairwise distance; `+inf` for fewer than two antennas.
    pub fn min_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.positions.iter().enumerate() {
            for b in &self.positions[i + 1..] {
                best = best.min(distance(a, b));
            }
        }
        best
    }

    /// C1 holds exactly and C2 holds within `tol`.
    pub fn is_feasible(&self, side: f64, d0: f64, tol: f64) -> bool {
        self.in_region(side) && self.min_distance() >= d0 - tol
    }
}

pub(crate) fn distance(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn grid_shape(m: usize) -> (usize, usize) {
    let cols = (m as f64).sqrt().ceil() as usize;
    let rows = m.div_ceil(cols);
    (cols, rows)
}

/// Deterministic starting layout.
///
/// A single antenna sits at the region center. Otherwise antennas fill a
/// row-major grid of `ceil(sqrt(M))` columns at spacing `d0`, anchored at the
/// origin. The grid for `M` antennas contains the grid for fewer antennas.
pub fn initial_layout(cfg: &ScenarioConfig) -> Result<AntennaLayout> {
    let m = cfg.num_antennas;
    let side = cfg.region_side;
    if m == 1 {
        return Ok(AntennaLayout { positions: vec![[side / 2.0, side / 2.0]], slot: 0 });
    }
    let d0 = cfg.min_spacing;
    let (cols, rows) = grid_shape(m);
    let extent = (cols.max(rows) - 1) as f64 * d0;
    if extent > side {
        return Err(Error::infeasible(format!(
            "{m} antennas need a {cols}x{rows} grid of extent {extent} m at spacing {d0} m, \
             but the region side is {side} m"
        )));
    }
    let positions = (0..m)
        .map(|i| [(i % cols) as f64 * d0, (i / cols) as f64 * d0])
        .collect();
    Ok(AntennaLayout { positions, slot: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_seeds_give_identical_scenarios() {
        let cfg = ScenarioConfig { rng_seed: 7, ..Default::default() };
        assert_eq!(generate_scenario(&cfg).unwrap(), generate_scenario(&cfg).unwrap());
        assert_eq!(draw_data(&cfg, 3), draw_data(&cfg, 3));
        let other = ScenarioConfig { rng_seed: 8, ..Default::default() };
        assert_ne!(generate_scenario(&cfg).unwrap(), generate_scenario(&other).unwrap());
    }

    #[test]
    fn default_scenario_has_nine_paths() {
        let paths = generate_scenario(&ScenarioConfig::default()).unwrap();
        let total: usize = paths.vehicles.iter().map(|v| v.paths.len()).sum();
        assert_eq!(total, 9);
        paths.check(&ScenarioConfig::default()).unwrap();
    }

    #[test]
    fn angles_stay_in_range_over_many_draws() {
        let cfg = ScenarioConfig {
            num_vehicles: 10,
            num_antennas: 10,
            region_side: 1.0,
            paths_per_vehicle: PathCount::Uniform(500),
            ..Default::default()
        };
        let paths = generate_scenario(&cfg).unwrap();
        let mut count = 0;
        for p in paths.vehicles.iter().flat_map(|v| &v.paths) {
            assert!((-FRAC_PI_2..=FRAC_PI_2).contains(&p.elevation));
            assert!((-FRAC_PI_2..=FRAC_PI_2).contains(&p.azimuth));
            count += 2;
        }
        assert_eq!(count, 10_000);
    }

    #[test]
    fn gains_have_unit_total_power_on_average() {
        let cfg = ScenarioConfig {
            num_vehicles: 200,
            num_antennas: 200,
            region_side: 10.0,
            ..Default::default()
        };
        let paths = generate_scenario(&cfg).unwrap();
        let mean: f64 = paths
            .vehicles
            .iter()
            .map(|v| v.paths.iter().map(|p| p.gain.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            / 200.0;
        assert!((mean - 1.0).abs() < 0.15, "mean power {mean}");
    }

    #[test]
    fn vehicle_paths_do_not_depend_on_fleet_size() {
        let small = generate_scenario(&ScenarioConfig { num_vehicles: 2, ..Default::default() }).unwrap();
        let large = generate_scenario(&ScenarioConfig::default()).unwrap();
        assert_eq!(small.vehicles[..], large.vehicles[..2]);
    }

    #[test]
    fn data_sizes_in_range_and_in_bits() {
        let cfg = ScenarioConfig::default();
        for t in 0..20 {
            let d = draw_data(&cfg, t);
            for &b in d.comm.iter().chain(&d.sense) {
                assert!((0.5 * 8192.0..=2.0 * 8192.0).contains(&b));
            }
        }
        let fixed = ScenarioConfig { redraw_data_each_slot: false, ..Default::default() };
        assert_eq!(draw_data(&fixed, 0), draw_data(&fixed, 5));
    }

    #[test]
    fn single_antenna_sits_at_center() {
        let cfg = ScenarioConfig { num_antennas: 1, num_vehicles: 1, ..Default::default() };
        let layout = initial_layout(&cfg).unwrap();
        let [x, y] = layout.positions[0];
        assert!((x - 0.075).abs() < 1e-15 && (y - 0.075).abs() < 1e-15);
    }

    #[test]
    fn four_antennas_form_a_feasible_grid() {
        let cfg = ScenarioConfig::default();
        let layout = initial_layout(&cfg).unwrap();
        assert_eq!(layout.len(), 4);
        assert!(layout.in_region(0.15));
        assert!(layout.min_distance() >= 0.1 - 1e-15);
    }

    #[test]
    fn ten_antennas_do_not_fit() {
        let cfg = ScenarioConfig { num_antennas: 10, ..Default::default() };
        assert!(matches!(initial_layout(&cfg), Err(Error::Infeasible(_))));
    }

    #[test]
    fn grids_are_nested_and_fitted_regions_hold_them() {
        // Each grid contains the previous one as a set, up to nine antennas.
        for m in 2..=9 {
            let mut cfg = ScenarioConfig { num_antennas: m, num_vehicles: 1, ..Default::default() };
            cfg.fit_region_to_antennas();
            let big = initial_layout(&cfg).unwrap();
            assert!(big.is_feasible(cfg.region_side, cfg.min_spacing, 0.0));
            let small = initial_layout(&ScenarioConfig { num_antennas: m - 1, ..cfg.clone() }).unwrap();
            if m > 2 {
                assert!(small.positions.iter().all(|p| big.positions.contains(p)), "m = {m}");
            }
        }
        assert!((ScenarioConfig::grid_region_side(4, 0.1) - 0.15).abs() < 1e-15);
    }

    #[test]
    fn invalid_configs_name_the_violation() {
        let err = ScenarioConfig { num_vehicles: 5, ..Default::default() }.validate().unwrap_err();
        assert!(err.to_string().contains("num_vehicles"));
        let err = ScenarioConfig { minibatch_ratio: 0.0, ..Default::default() }.validate().unwrap_err();
        assert!(err.to_string().contains("minibatch_ratio"));
        let err = ScenarioConfig { min_spacing: 1.0, ..Default::default() }.validate().unwrap_err();
        assert!(err.to_string().contains("min_spacing"));
        assert!(generate_scenario(&ScenarioConfig { tx_power: -1.0, ..Default::default() }).is_err());
    }

    #[test]
    fn config_parses_partial_toml_and_json() {
        let dir = tempfile::tempdir().unwrap();
        let toml_path = dir.path().join("c.toml");
        std::fs::write(&toml_path, "num_antennas = 6\nregion_side = 0.25\n[pso]\nswarm_size = 10\n").unwrap();
        let cfg = ScenarioConfig::from_file(&toml_path).unwrap();
        assert_eq!(cfg.num_antennas, 6);
        assert_eq!(cfg.pso.swarm_size, 10);
        assert_eq!(cfg.num_vehicles, 3);
        let json_path = dir.path().join("c.json");
        std::fs::write(&json_path, r#"{"paths_per_vehicle": [1, 2, 3], "combiner": "bound-sdp"}"#).unwrap();
        let cfg = ScenarioConfig::from_file(&json_path).unwrap();
        assert_eq!(cfg.paths_per_vehicle.for_vehicle(2), 3);
        assert_eq!(cfg.combiner, CombinerStrategy::BoundSdp);
    }

    #[test]
    fn dbm_conversion() {
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
        let cfg = ScenarioConfig::default();
        assert!((cfg.noise_power_comm() / 3.981_071_705_534_972e-15 - 1.0).abs() < 1e-12);
    }
}
