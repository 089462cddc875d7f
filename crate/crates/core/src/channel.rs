//! Field-response channel model, SINR, and achievable rates.
//!
//! Under the far-field assumption each path keeps its angle and gain as an
//! antenna moves; only the propagation phase `2πρ/λ` changes. For vehicle `n`
//! and antenna position `d_m` the channel entry is
//! `h_{m,n} = Σ_l e^{-j2πρ_{n,l}(t, d_m)/λ} g_{n,l}`, and the sensing echo
//! additionally carries `γ_{n,l} = α_{n,l} e^{j2πτ_{n,l}/λ}` per path.

use std::f64::consts::{LN_2, PI};

use nalgebra::{DMatrix, DVector};

use crate::scenario::{AntennaLayout, InterferenceForm, PathSet, ScenarioConfig, VehiclePaths};
use crate::{Error, Result, C64};

/// Propagation-distance difference of one path between `position` and the origin (m).
pub fn phase_offset(
    elevation: f64,
    azimuth: f64,
    speed: f64,
    heading: f64,
    position: [f64; 2],
    t: f64,
) -> f64 {
    position[0] * elevation.sin() * azimuth.cos()
        + position[1] * elevation.cos()
        + speed * t * (elevation - heading).cos()
}

fn path_phase(vehicle: &VehiclePaths, l: usize, position: [f64; 2], t: f64, wavelength: f64) -> f64 {
    let p = &vehicle.paths[l];
    2.0 * PI / wavelength * phase_offset(p.elevation, p.azimuth, vehicle.speed, vehicle.heading, position, t)
}

/// Communication field-response vector of a vehicle at one antenna position.
pub fn comm_field_response(vehicle: &VehiclePaths, position: [f64; 2], t: f64, wavelength: f64) -> Vec<C64> {
    (0..vehicle.paths.len())
        .map(|l| C64::from_polar(1.0, path_phase(vehicle, l, position, t, wavelength)))
        .collect()
}

/// Sensing field-response vector: each entry is scaled by `α e^{j2πτ/λ}`.
pub fn sense_field_response(vehicle: &VehiclePaths, position: [f64; 2], t: f64, wavelength: f64) -> Vec<C64> {
    vehicle
        .paths
        .iter()
        .enumerate()
        .map(|(l, p)| {
            let gamma = C64::from_polar(p.reflection, 2.0 * PI / wavelength * p.delay);
            gamma * C64::from_polar(1.0, path_phase(vehicle, l, position, t, wavelength))
        })
        .collect()
}

/// Communication and sensing channel matrices (`M × N`) for one layout and slot.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    pub comm: DMatrix<C64>,
    pub sense: DMatrix<C64>,
    pub slot: usize,
}

impl ChannelState {
    pub fn num_antennas(&self) -> usize {
        self.comm.nrows()
    }

    pub fn num_vehicles(&self) -> usize {
        self.comm.ncols()
    }

    pub fn link(&self, link: Link) -> &DMatrix<C64> {
        match link {
            Link::Comm => &self.comm,
            Link::Sense => &self.sense,
        }
    }
}

/// `h = Fᴴ G`: conjugated field response dotted with the path gains.
fn project(response: &[C64], vehicle: &VehiclePaths) -> C64 {
    response
        .iter()
        .zip(&vehicle.paths)
        .map(|(f, p)| f.conj() * p.gain)
        .sum()
}

/// Builds `H_c` and `H_s` for the given layout at slot `slot`.
pub fn build_channels(paths: &PathSet, layout: &AntennaLayout, cfg: &ScenarioConfig, slot: usize) -> ChannelState {
    let t = cfg.slot_time(slot);
    let m = layout.len();
    let n = paths.num_vehicles();
    let mut comm = DMatrix::zeros(m, n);
    let mut sense = DMatrix::zeros(m, n);
    for (k, vehicle) in paths.vehicles.iter().enumerate() {
        for (i, &pos) in layout.positions.iter().enumerate() {
            comm[(i, k)] = project(&comm_field_response(vehicle, pos, t, cfg.wavelength), vehicle);
            sense[(i, k)] = project(&sense_field_response(vehicle, pos, t, cfg.wavelength), vehicle);
        }
    }
    ChannelState { comm, sense, slot }
}

/// Receive combiners, one column per vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinerSet {
    pub comm: DMatrix<C64>,
    pub sense: DMatrix<C64>,
}

impl CombinerSet {
    pub fn link(&self, link: Link) -> &DMatrix<C64> {
        match link {
            Link::Comm => &self.comm,
            Link::Sense => &self.sense,
        }
    }

    /// Every column is finite and nonzero.
    pub fn check(&self) -> Result<()> {
        for (name, w) in [("comm", &self.comm), ("sense", &self.sense)] {
            for (n, col) in w.column_iter().enumerate() {
                if col.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(Error::domain(format!("{name} combiner {n} has non-finite entries")));
                }
                if col.norm() == 0.0 {
                    return Err(Error::domain(format!("{name} combiner {n} is zero")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    Comm,
    Sense,
}

/// SINR of vehicle `n` for one link given channel matrix `h` and combiners `w`.
pub fn link_sinr(
    h: &DMatrix<C64>,
    w: &DMatrix<C64>,
    powers: &[f64],
    noise: f64,
    n: usize,
    form: InterferenceForm,
) -> Result<f64> {
    let wn = w.column(n);
    let wn_norm2 = wn.norm_squared();
    if wn_norm2 == 0.0 {
        return Err(Error::domain(format!("combiner column {n} is zero")));
    }
    let signal = wn.dotc(&h.column(n)).norm_sqr() * powers[n];
    let interference: f64 = (0..h.ncols())
        .filter(|&k| k != n)
        .map(|k| {
            let leak = match form {
                InterferenceForm::CrossChannel => wn.dotc(&h.column(k)),
                InterferenceForm::OwnLink => w.column(k).dotc(&h.column(k)),
            };
            leak.norm_sqr() * powers[k]
        })
        .sum();
    Ok(signal / (interference + wn_norm2 * noise))
}

pub fn comm_sinr(
    state: &ChannelState,
    combiners: &CombinerSet,
    powers: &[f64],
    noise: f64,
    n: usize,
    form: InterferenceForm,
) -> Result<f64> {
    link_sinr(&state.comm, &combiners.comm, powers, noise, n, form)
}

pub fn sense_sinr(
    state: &ChannelState,
    combiners: &CombinerSet,
    powers: &[f64],
    noise: f64,
    n: usize,
    form: InterferenceForm,
) -> Result<f64> {
    link_sinr(&state.sense, &combiners.sense, powers, noise, n, form)
}

/// `B · log2(1 + SINR)` in bits/s.
pub fn rate_from_sinr(bandwidth: f64, sinr: f64) -> f64 {
    bandwidth * sinr.ln_1p() / LN_2
}

pub fn comm_rate(state: &ChannelState, combiners: &CombinerSet, cfg: &ScenarioConfig, n: usize) -> Result<f64> {
    let sinr = comm_sinr(state, combiners, &cfg.powers(), cfg.noise_power_comm(), n, cfg.interference_form)?;
    Ok(rate_from_sinr(cfg.bandwidth, sinr))
}

pub fn sense_rate(state: &ChannelState, combiners: &CombinerSet, cfg: &ScenarioConfig, n: usize) -> Result<f64> {
    let sinr = sense_sinr(state, combiners, &cfg.powers(), cfg.noise_power_sense(), n, cfg.interference_form)?;
    Ok(rate_from_sinr(cfg.bandwidth, sinr))
}

/// Per-vehicle communication and sensing rates (bits/s).
#[derive(Debug, Clone, PartialEq)]
pub struct LinkRates {
    pub comm: Vec<f64>,
    pub sense: Vec<f64>,
}

pub fn all_rates(state: &ChannelState, combiners: &CombinerSet, cfg: &ScenarioConfig) -> Result<LinkRates> {
    let n = state.num_vehicles();
    Ok(LinkRates {
        comm: (0..n).map(|k| comm_rate(state, combiners, cfg, k)).collect::<Result<_>>()?,
        sense: (0..n).map(|k| sense_rate(state, combiners, cfg, k)).collect::<Result<_>>()?,
    })
}

/// Column `n` of a channel matrix as an owned vector.
pub fn column(h: &DMatrix<C64>, n: usize) -> DVector<C64> {
    h.column(n).into_owned()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    use super::*;
    use crate::scenario::{generate_scenario, initial_layout, Path, PathCount};

    fn single_path_vehicle(alpha: f64, delay: f64) -> VehiclePaths {
        VehiclePaths {
            paths: vec![Path { elevation: 0.3, azimuth: -0.7, gain: C64::new(0.6, -0.8), reflection: alpha, delay }],
            speed: 12.0,
            heading: 0.4,
        }
    }

    #[test]
    fn phase_offset_hand_values() {
        assert_eq!(phase_offset(0.3, 0.2, 5.0, 1.0, [0.0, 0.0], 0.0), 0.0);
        let rho = phase_offset(FRAC_PI_2, 0.0, 0.0, 0.0, [0.07, 0.11], 0.0);
        assert!((rho - 0.07).abs() < 1e-15);
        let rho = phase_offset(FRAC_PI_4, 0.0, 10.0, FRAC_PI_4, [0.0, 0.0], 0.1);
        assert!((rho - 1.0).abs() < 1e-15);
    }

    #[test]
    fn comm_response_at_origin_is_all_ones() {
        let v = single_path_vehicle(0.5, 0.0);
        let f = comm_field_response(&v, [0.0, 0.0], 0.0, 0.1);
        assert_eq!(f, vec![C64::new(1.0, 0.0)]);
    }

    #[test]
    fn half_wavelength_offset_flips_sign() {
        let v = VehiclePaths {
            paths: vec![Path { elevation: FRAC_PI_2, azimuth: 0.0, gain: C64::new(1.0, 0.0), reflection: 1.0, delay: 0.0 }],
            speed: 0.0,
            heading: 0.0,
        };
        let f = comm_field_response(&v, [0.05, 0.0], 0.0, 0.1);
        assert!((f[0] - C64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn sense_response_modulus_is_reflection() {
        let v = single_path_vehicle(0.5, 3e-7);
        let f = sense_field_response(&v, [0.03, 0.12], 0.2, 0.1);
        assert!((f[0].norm() - 0.5).abs() < 1e-15);
        let v = single_path_vehicle(0.0, 3e-7);
        assert_eq!(sense_field_response(&v, [0.03, 0.12], 0.2, 0.1)[0].norm(), 0.0);
        let v = single_path_vehicle(0.5, 0.0);
        assert!((sense_field_response(&v, [0.0, 0.0], 0.0, 0.1)[0] - C64::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn channels_at_origin_sum_path_gains() {
        let cfg = ScenarioConfig::default();
        let paths = generate_scenario(&cfg).unwrap();
        let layout = AntennaLayout { positions: vec![[0.0, 0.0]; 4], slot: 0 };
        let state = build_channels(&paths, &layout, &cfg, 0);
        for (n, v) in paths.vehicles.iter().enumerate() {
            let sum: C64 = v.paths.iter().map(|p| p.gain).sum();
            for m in 0..4 {
                assert!((state.comm[(m, n)] - sum).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn single_path_channels_have_constant_modulus() {
        let cfg = ScenarioConfig { paths_per_vehicle: PathCount::Uniform(1), ..Default::default() };
        let paths = generate_scenario(&cfg).unwrap();
        let layout = initial_layout(&cfg).unwrap();
        let state = build_channels(&paths, &layout, &cfg, 3);
        for (n, v) in paths.vehicles.iter().enumerate() {
            for m in 0..4 {
                assert!((state.comm[(m, n)].norm() - v.paths[0].gain.norm()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn scalar_sinr_and_mrc() {
        let h = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        let s = link_sinr(&h, &h, &[1.0], 1.0, 0, InterferenceForm::CrossChannel).unwrap();
        assert_eq!(s, 1.0);

        let h = DMatrix::from_column_slice(3, 1, &[C64::new(0.3, 0.1), C64::new(-0.2, 0.5), C64::new(0.9, -0.4)]);
        let s = link_sinr(&h, &h, &[2.0], 0.5, 0, InterferenceForm::CrossChannel).unwrap();
        assert!((s - h.norm_squared() * 2.0 / 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_combiner_is_a_domain_error() {
        let h = DMatrix::from_element(2, 1, C64::new(1.0, 0.0));
        let w = DMatrix::zeros(2, 1);
        assert!(matches!(
            link_sinr(&h, &w, &[1.0], 1.0, 0, InterferenceForm::CrossChannel),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn rate_values() {
        assert_eq!(rate_from_sinr(1.0, 1.0), 1.0);
        assert_eq!(rate_from_sinr(1e6, 0.0), 0.0);
    }
}
