//! Receive combiner design for the communication and sensing links.
//!
//! Two strategies are available:
//!
//! * [`CombinerStrategy::BoundSdp`] works on the lifted variables
//!   `W̃_n = w_n w_nᴴ`, `H̃_n = h_n h_nᴴ` and the eigenvalue bound on the
//!   offload latency ([`bound_offload_latency`]). `H̃_k` is rank one, so for
//!   `M >= 2` its smallest eigenvalue is zero, the interference term of the
//!   bound vanishes, and the bound depends on `W̃_n` only through a trace
//!   scale that cancels. Every unit-trace PSD `W̃_n` aligned with `h_n` is then
//!   optimal and its principal eigenvector is `h_n / ‖h_n‖`.
//! * [`CombinerStrategy::Mmse`] returns `(Σ_{k≠n} p_k h_k h_kᴴ + σ² I)⁻¹ h_n`,
//!   which maximizes the cross-channel SINR of every vehicle.
//!
//! All combiners are returned with unit norm.

use std::f64::consts::LN_2;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelState, CombinerSet};
use crate::scenario::ScenarioConfig;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum CombinerStrategy {
    #[default]
    #[serde(rename = "mmse")]
    Mmse,
    #[serde(rename = "bound-sdp")]
    BoundSdp,
}

/// `W̃_n = w_n w_nᴴ` and `H̃_n = h_n h_nᴴ` for every vehicle of one link.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedVariables {
    pub combiners: Vec<DMatrix<C64>>,
    pub channels: Vec<DMatrix<C64>>,
}

fn outer(v: &DVector<C64>) -> DMatrix<C64> {
    v * v.adjoint()
}

impl LiftedVariables {
    /// Lifts combiner and channel columns into rank-one matrices.
    pub fn from_vectors(w: &DMatrix<C64>, h: &DMatrix<C64>) -> Self {
        Self {
            combiners: w.column_iter().map(|c| outer(&c.into_owned())).collect(),
            channels: h.column_iter().map(|c| outer(&c.into_owned())).collect(),
        }
    }
}

/// Extreme eigenvalues `(λ_min, λ_max)` of a Hermitian PSD matrix.
fn psd_extremes(a: &DMatrix<C64>, what: &str) -> Result<(f64, f64)> {
    let scale = a.norm().max(f64::MIN_POSITIVE);
    if (a - a.adjoint()).norm() > 1e-10 * scale {
        return Err(Error::domain(format!("{what} is not Hermitian")));
    }
    let eig = a.clone().symmetric_eigenvalues();
    let lo = eig.min();
    let hi = eig.max();
    if lo < -1e-10 * scale {
        return Err(Error::domain(format!("{what} is not positive semidefinite (eigenvalue {lo:e})")));
    }
    Ok((lo.max(0.0), hi))
}

fn trace(a: &DMatrix<C64>) -> f64 {
    a.trace().re
}

/// Lower bound on the offload latency of vehicle `n`:
///
/// `D / (B log2(1 + λ_max(H̃_n) Tr(W̃_n) p_n / (Σ_{k≠n} λ_min(H̃_k) Tr(W̃_k) p_k + Tr(W̃_n) σ²)))`.
///
/// The bandwidth factor keeps the bound in the same units as
/// [`crate::latency::offload_latency`].
pub fn bound_offload_latency(
    lifted: &LiftedVariables,
    powers: &[f64],
    bits: f64,
    noise: f64,
    bandwidth: f64,
    n: usize,
) -> Result<f64> {
    let tr_n = trace(&lifted.combiners[n]);
    psd_extremes(&lifted.combiners[n], "lifted combiner")?;
    if !(tr_n > 0.0) {
        return Err(Error::domain(format!("lifted combiner {n} has zero trace")));
    }
    let (_, h_max) = psd_extremes(&lifted.channels[n], "lifted channel")?;
    let mut interference = 0.0;
    for k in (0..lifted.channels.len()).filter(|&k| k != n) {
        psd_extremes(&lifted.combiners[k], "lifted combiner")?;
        let (h_min, _) = psd_extremes(&lifted.channels[k], "lifted channel")?;
        interference += h_min * trace(&lifted.combiners[k]) * powers[k];
    }
    let sinr = h_max * tr_n * powers[n] / (interference + tr_n * noise);
    let rate = bandwidth * sinr.ln_1p() / LN_2;
    Ok(crate::latency::offload_latency(bits, rate))
}

fn checked_columns(h: &DMatrix<C64>, what: &str) -> Result<()> {
    for (n, col) in h.column_iter().enumerate() {
        if !(col.norm() > 0.0) {
            return Err(Error::domain(format!("{what} channel of vehicle {n} is zero")));
        }
    }
    Ok(())
}

fn normalized(mut v: DVector<C64>) -> DVector<C64> {
    let norm = v.norm();
    v.unscale_mut(norm);
    v
}

fn matched(h: &DMatrix<C64>) -> DMatrix<C64> {
    let cols: Vec<_> = h.column_iter().map(|c| normalized(c.into_owned())).collect();
    DMatrix::from_columns(&cols)
}

/// Minimizer of the eigenvalue-bound objective: the principal eigenvector of
/// the optimal lifted combiner, `h_n / ‖h_n‖`, for both links.
pub fn solve_combining_bound(state: &ChannelState) -> Result<CombinerSet> {
    checked_columns(&state.comm, "communication")?;
    checked_columns(&state.sense, "sensing")?;
    Ok(CombinerSet { comm: matched(&state.comm), sense: matched(&state.sense) })
}

/// Per-vehicle bound constraints `T̃_off + T_exe <= T_th` for both links,
/// evaluated at `combiners`. Returns `(comm_ok, sense_ok)`.
pub fn bound_constraints(
    state: &ChannelState,
    combiners: &CombinerSet,
    cfg: &ScenarioConfig,
    data: &crate::scenario::DataSizes,
    exec: &crate::latency::LatencyReport,
) -> Result<(Vec<bool>, Vec<bool>)> {
    let powers = cfg.powers();
    let check = |w: &DMatrix<C64>, h: &DMatrix<C64>, bits: &[f64], noise: f64, threshold: f64, comm: bool| {
        let lifted = LiftedVariables::from_vectors(w, h);
        (0..h.ncols())
            .map(|n| {
                let bound = bound_offload_latency(&lifted, &powers, bits[n], noise, cfg.bandwidth, n)?;
                let v = &exec.vehicles[n];
                let exe = if comm { v.exec_comm } else { v.exec_sense };
                Ok(bound + exe <= threshold)
            })
            .collect::<Result<Vec<bool>>>()
    };
    Ok((
        check(&combiners.comm, &state.comm, &data.comm, cfg.noise_power_comm(), cfg.latency_threshold_comm, true)?,
        check(&combiners.sense, &state.sense, &data.sense, cfg.noise_power_sense(), cfg.latency_threshold_sense, false)?,
    ))
}

/// MMSE combiners of one link via the Woodbury identity:
/// `(σ²I + H_{-n} P H_{-n}ᴴ)⁻¹ h_n ∝ h_n − H_{-n} (σ² P⁻¹ + H_{-n}ᴴ H_{-n})⁻¹ H_{-n}ᴴ h_n`.
/// The `(N−1) × (N−1)` system stays well conditioned even when `σ²` is tiny
/// relative to the channel power.
fn mmse_link(h: &DMatrix<C64>, powers: &[f64], noise: f64, what: &str) -> Result<DMatrix<C64>> {
    checked_columns(h, what)?;
    let n_veh = h.ncols();
    let mut cols = Vec::with_capacity(n_veh);
    for n in 0..n_veh {
        let hn = h.column(n).into_owned();
        if n_veh == 1 {
            cols.push(normalized(hn));
            continue;
        }
        let others: Vec<usize> = (0..n_veh).filter(|&k| k != n).collect();
        let hk = h.select_columns(&others);
        let mut gram = hk.adjoint() * &hk;
        for (i, &k) in others.iter().enumerate() {
            gram[(i, i)] += C64::new(noise / powers[k], 0.0);
        }
        let rhs = hk.adjoint() * &hn;
        let y = gram
            .cholesky()
            .ok_or_else(|| Error::domain(format!("{what} interference Gram matrix is not positive definite")))?
            .solve(&rhs);
        let w = &hn - &hk * y;
        if !(w.norm() > 0.0) {
            return Err(Error::domain(format!("{what} MMSE combiner of vehicle {n} vanished")));
        }
        cols.push(normalized(w));
    }
    Ok(DMatrix::from_columns(&cols))
}

pub fn solve_combining_mmse(state: &ChannelState, powers: &[f64], noise_comm: f64, noise_sense: f64) -> Result<CombinerSet> {
    Ok(CombinerSet {
        comm: mmse_link(&state.comm, powers, noise_comm, "communication")?,
        sense: mmse_link(&state.sense, powers, noise_sense, "sensing")?,
    })
}

/// Combiners for `state` under the configured strategy.
pub fn solve_combining(strategy: CombinerStrategy, state: &ChannelState, cfg: &ScenarioConfig) -> Result<CombinerSet> {
    match strategy {
        CombinerStrategy::Mmse => {
            solve_combining_mmse(state, &cfg.powers(), cfg.noise_power_comm(), cfg.noise_power_sense())
        }
        CombinerStrategy::BoundSdp => solve_combining_bound(state),
    }
}
