//! Independent reference implementations used by the integration tests and
//! the acceptance harness. They avoid the library's matrix code and follow
//! the defining formulas term by term.

#![allow(dead_code)]

use fa_iscc::cpu_alloc::CpuSubproblem;
use fa_iscc::scenario::{AntennaLayout, PathSet, ScenarioConfig};
use fa_iscc::C64;
use rand::Rng;

pub fn cis(phase: f64) -> C64 {
    C64::new(phase.cos(), phase.sin())
}

/// Channel coefficients `[vehicle][antenna]` for both links by direct summation.
pub fn oracle_channels(paths: &PathSet, layout: &AntennaLayout, cfg: &ScenarioConfig, t: f64) -> (Vec<Vec<C64>>, Vec<Vec<C64>>) {
    let k = 2.0 * std::f64::consts::PI / cfg.wavelength;
    let mut comm = Vec::new();
    let mut sense = Vec::new();
    for v in &paths.vehicles {
        let mut c_row = Vec::new();
        let mut s_row = Vec::new();
        for &[x, y] in &layout.positions {
            let mut c = C64::new(0.0, 0.0);
            let mut s = C64::new(0.0, 0.0);
            for p in &v.paths {
                let rho = x * p.elevation.sin() * p.azimuth.cos()
                    + y * p.elevation.cos()
                    + v.speed * t * (p.elevation - v.heading).cos();
                c += cis(-k * rho) * p.gain;
                s += cis(-k * (rho + p.delay)) * p.reflection * p.gain;
            }
            c_row.push(c);
            s_row.push(s);
        }
        comm.push(c_row);
        sense.push(s_row);
    }
    (comm, sense)
}

fn inner(w: &[C64], h: &[C64]) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..w.len() {
        acc += w[i].conj() * h[i];
    }
    acc
}

/// SINR of vehicle `n` with `h[k]`, `w[k]` the channel and combiner of vehicle `k`.
pub fn oracle_sinr(h: &[Vec<C64>], w: &[Vec<C64>], p: &[f64], noise: f64, n: usize, own_link: bool) -> f64 {
    let signal = inner(&w[n], &h[n]).norm_sqr() * p[n];
    let mut interference = 0.0;
    for k in 0..h.len() {
        if k == n {
            continue;
        }
        let leak = if own_link { inner(&w[k], &h[k]) } else { inner(&w[n], &h[k]) };
        interference += leak.norm_sqr() * p[k];
    }
    let wn2: f64 = w[n].iter().map(|z| z.norm_sqr()).sum();
    signal / (interference + wn2 * noise)
}

pub fn oracle_rate(bandwidth: f64, sinr: f64) -> f64 {
    bandwidth * (1.0 + sinr).log2()
}

/// `(offload, exec)` latency of one task.
pub fn oracle_task_latency(bits: f64, rate: f64, freq: f64, cfg: &ScenarioConfig) -> (f64, f64) {
    if bits == 0.0 {
        return (0.0, 0.0);
    }
    let samples = bits / cfg.sample_size_bits;
    let cycles = cfg.cycles_per_sample * samples * cfg.minibatch_ratio * cfg.sgd_iterations as f64;
    (bits / rate, cycles / freq)
}

/// Minimum of `Σ a_i / f_i` over allocations on the grid `f_i = k_i · budget · step`
/// with `f_i >= lower_i` and `Σ f_i <= budget`, found by dynamic programming over
/// grid units. Returns `None` if no grid point is feasible.
pub fn grid_cpu_optimum(loads: &[f64], lower: &[f64], budget: f64, step: f64) -> Option<f64> {
    let units = (1.0 / step).round() as usize;
    let unit = budget / units as f64;
    let mut best = vec![0.0f64; units + 1];
    for (&a, &lb) in loads.iter().zip(lower) {
        let k_min = ((lb / unit) - 1e-9).ceil().max(1.0) as usize;
        let mut next = vec![f64::INFINITY; units + 1];
        for used in 0..=units {
            if best[used].is_infinite() {
                continue;
            }
            for k in k_min..=units - used {
                let v = best[used] + a / (k as f64 * unit);
                if v < next[used + k] {
                    next[used + k] = v;
                }
            }
        }
        // Allow leftover budget: carry the running minimum forward.
        for u in 1..=units {
            if next[u - 1] < next[u] {
                next[u] = next[u - 1];
            }
        }
        best = next;
    }
    let v = best[units];
    v.is_finite().then_some(v)
}

pub fn random_complex<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Four antennas, one per corner of the region, each jittered inward by at
/// most `(side − d0) / 2` per axis. Always feasible when `side >= d0`.
pub fn corner_layout<R: Rng>(rng: &mut R, side: f64, d0: f64) -> AntennaLayout {
    let slack = (side - d0) / 2.0;
    let corners = [[0.0, 0.0], [side, 0.0], [0.0, side], [side, side]];
    let positions = corners
        .iter()
        .map(|&[cx, cy]| {
            let dx = rng.random_range(0.0..=slack);
            let dy = rng.random_range(0.0..=slack);
            [if cx == 0.0 { dx } else { cx - dx }, if cy == 0.0 { dy } else { cy - dy }]
        })
        .collect();
    AntennaLayout { positions, slot: 0 }
}

/// Random two-vehicle instance whose threshold bounds fit in the budget.
pub fn random_cpu_instance<R: Rng>(rng: &mut R) -> CpuSubproblem {
    loop {
        let sub = CpuSubproblem {
            load_comm: (0..2).map(|_| rng.random_range(0.05..1.0)).collect(),
            load_sense: (0..2).map(|_| rng.random_range(0.05..1.0)).collect(),
            offload_comm: (0..2).map(|_| rng.random_range(0.0..0.5)).collect(),
            offload_sense: (0..2).map(|_| rng.random_range(0.0..0.5)).collect(),
            budget: 1.0,
            threshold_comm: rng.random_range(2.0..8.0),
            threshold_sense: rng.random_range(2.0..8.0),
        };
        if let Ok((lc, ls)) = sub.lower_bounds() {
            if lc.iter().chain(&ls).sum::<f64>() < 0.9 {
                return sub;
            }
        }
    }
}
