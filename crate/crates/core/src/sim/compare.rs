//! Simulated versus closed-form energies.

use serde::{Deserialize, Serialize};

use super::SimMetrics;
use crate::analysis::{self, ClusterConfig};
use crate::error::{Error, Result};
use crate::radio::Radio;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub simulated: f64,
    pub analytic: f64,
    /// `|simulated - analytic| / analytic`
    pub rel_error: f64,
}

impl Comparison {
    fn new(simulated: f64, analytic: f64) -> Self {
        let rel_error = if analytic == 0.0 && simulated == 0.0 {
            0.0
        } else {
            libm::fabs(simulated - analytic) / libm::fabs(analytic)
        };
        Self { simulated, analytic, rel_error }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub ch_election: Comparison,
    pub nonch_election: Comparison,
    pub ch_frame: Comparison,
    pub nonch_frame: Comparison,
    pub ch_iteration: Comparison,
    pub nonch_iteration: Comparison,
    /// Mean simulated energy per round against `n * start_energy`.
    pub round: Comparison,
}

impl ComparisonReport {
    pub fn max_role_error(&self) -> f64 {
        [
            self.ch_election,
            self.nonch_election,
            self.ch_frame,
            self.nonch_frame,
            self.ch_iteration,
            self.nonch_iteration,
        ]
        .iter()
        .map(|c| c.rel_error)
        .fold(0.0, f64::max)
    }
}

/// Compares simulated role energies with the closed forms, substituting the
/// measured mean join distance (election), mean uplink distance (member
/// frames) and mean head-to-base-station distance (head frames).
pub fn analytic_comparison(metrics: &SimMetrics, cfg: &ClusterConfig, radio: &Radio) -> Result<ComparisonReport> {
    let s = &metrics.scenario;
    let checks = [
        ("n", metrics.n as f64, f64::from(cfg.n)),
        ("k", f64::from(s.k), f64::from(cfg.k)),
        ("m", f64::from(s.m), f64::from(cfg.m)),
        ("l", f64::from(s.l), f64::from(cfg.l)),
        ("n_frames", s.n_frames as f64, cfg.n_frames as f64),
    ];
    for (field, simulated, analytic) in checks {
        if simulated != analytic {
            return Err(Error::Mismatch { field, simulated, analytic });
        }
    }

    let elec_cfg = ClusterConfig { d_intra: metrics.mean_join_distance, ..*cfg };
    let data_cfg = ClusterConfig {
        d_intra: metrics.mean_uplink_distance,
        d_bs: metrics.mean_bs_distance,
        ..*cfg
    };
    let elec = analysis::election_energies(&elec_cfg, radio)?;
    let frame = analysis::frame_energies(&data_cfg, radio)?;
    let nf = cfg.n_frames as f64;
    let start = analysis::start_energy(&data_cfg, radio)?;

    let rounds = metrics.energy_per_round.len();
    let mean_round = if rounds == 0 {
        0.0
    } else {
        metrics.energy_per_round.iter().copied().collect::<crate::CompensatedSum>().value() / rounds as f64
    };

    Ok(ComparisonReport {
        ch_election: Comparison::new(metrics.mean_ch_election_energy, elec.ch),
        nonch_election: Comparison::new(metrics.mean_nonch_election_energy, elec.non_ch),
        ch_frame: Comparison::new(metrics.mean_ch_frame_energy, frame.ch),
        nonch_frame: Comparison::new(metrics.mean_nonch_frame_energy, frame.non_ch),
        ch_iteration: Comparison::new(metrics.mean_ch_energy, elec.ch + nf * frame.ch),
        nonch_iteration: Comparison::new(metrics.mean_nonch_energy, elec.non_ch + nf * frame.non_ch),
        round: Comparison::new(mean_round, f64::from(cfg.n) * start),
    })
}
