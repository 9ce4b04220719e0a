//! Command dispatch. Each command writes one CSV (to `output_path`, or
//! stdout when none is given) and, when writing to a file, JSON sidecars
//! next to it.

use std::io::Write;
use std::path::Path;

use eehc_core::analysis::{self, EnergyReport};
use eehc_core::sim::{self, ComparisonReport, LedgerEvent, SimMetrics, SimScenario};
use eehc_core::{Radio, SnrMode};
use serde::Serialize;

use crate::config::{Command, RunConfig};
use crate::error::LabError;
use crate::output::{self, sidecar};
use crate::parallel;

/// Modelling choices recorded in every metadata sidecar.
const ASSUMPTIONS: [&str; 5] = [
    "cluster count n/k is treated as a real number in the closed forms",
    "f2 is computed as 1/k - f1",
    "physical mode converts SNR and noise figure from dB to linear; paper_db_compat uses the dB number of the SNR directly in the closed-form cluster count",
    "base station defaults to (field_side/2, field_side/2 + d_bs)",
    "head-set duty is split into contiguous slots of about n_frames/m frames",
];

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    command: Command,
    seed: Option<u64>,
    compat_flags: Vec<&'a str>,
    snr_mode: SnrMode,
    rng_algorithm: &'static str,
    assumptions: &'static [&'static str],
    config: &'a RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<&'a eehc_core::sweep::SweepSpec>,
}

#[derive(Serialize)]
struct SimSummary<'a> {
    metrics: &'a SimMetrics,
    base_station: (f64, f64),
    e_start: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    analytic_comparison: Option<ComparisonReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison_error: Option<String>,
}

/// Runs the configured command. The caller maps errors to exit codes.
pub fn run(cfg: &RunConfig) -> Result<(), LabError> {
    match cfg.command {
        Command::Analyze => analyze(cfg),
        Command::Sweep => sweep(cfg),
        Command::Simulate => simulate(cfg),
        Command::OptimalK => optimal_k(cfg),
    }
}

fn emit(cfg: &RunConfig, header: &[impl AsRef<str>], rows: &[Vec<f64>], sweep: Option<&eehc_core::sweep::SweepSpec>) -> Result<(), LabError> {
    match &cfg.output_path {
        Some(path) => {
            output::write_csv(path, header, rows)?;
            write_metadata(cfg, path, sweep)
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            output::write_csv_to(&mut lock, header, rows)
                .map_err(|e| LabError::io("<stdout>", std::io::Error::other(e.to_string())))?;
            lock.flush().map_err(|e| LabError::io("<stdout>", e))
        }
    }
}

fn write_metadata(cfg: &RunConfig, path: &Path, sweep: Option<&eehc_core::sweep::SweepSpec>) -> Result<(), LabError> {
    let meta = Metadata {
        tool: "eehc-lab",
        version: crate::TOOL_VERSION,
        command: cfg.command,
        seed: (cfg.command == Command::Simulate).then_some(cfg.sim.seed),
        compat_flags: cfg.compat_flags.iter().map(String::as_str).collect(),
        snr_mode: sweep.map_or(cfg.snr_mode(), |s| s.snr_mode),
        rng_algorithm: sim::RNG_ALGORITHM,
        assumptions: &ASSUMPTIONS,
        config: cfg,
        sweep,
    };
    output::write_json(&sidecar(path, "meta.json"), &meta)
}

pub fn analyze_report(cfg: &RunConfig) -> Result<EnergyReport, LabError> {
    let radio = Radio::new(cfg.radio)?;
    Ok(analysis::energy_report(&cfg.cluster, &radio)?)
}

fn analyze(cfg: &RunConfig) -> Result<(), LabError> {
    let report = analyze_report(cfg)?;
    emit(cfg, &EnergyReport::HEADER, &[report.values().to_vec()], None)
}

fn sweep(cfg: &RunConfig) -> Result<(), LabError> {
    let spec = cfg.sweep_spec()?;
    let table = parallel::run_sweep_parallel(spec.clone())?;
    emit(cfg, &table.header, &table.rows, Some(&spec))
}

pub const OPTIMAL_K_HEADER: [&str; 8] =
    ["n", "d_bs", "field_side", "paper_db_compat", "k_closed_raw", "k_closed", "k_numeric", "e_numeric_min"];

pub fn optimal_k_row(cfg: &RunConfig) -> Result<Vec<f64>, LabError> {
    let radio = Radio::new(cfg.radio)?;
    let c = &cfg.cluster;
    let mode = cfg.snr_mode();
    let raw = analysis::optimal_clusters_closed_raw(c.n, &radio, c.d_bs, c.field_side, mode)?;
    let rounded = analysis::optimal_clusters_closed(c.n, &radio, c.d_bs, c.field_side, mode)?;
    let range = cfg.k_range.unwrap_or((1, 100));
    let (k_num, e_min) = analysis::optimal_clusters_numeric(c, &radio, range)?;
    Ok(vec![
        f64::from(c.n),
        c.d_bs,
        c.field_side,
        if mode == SnrMode::PaperDbCompat { 1.0 } else { 0.0 },
        raw,
        f64::from(rounded),
        f64::from(k_num),
        e_min,
    ])
}

fn optimal_k(cfg: &RunConfig) -> Result<(), LabError> {
    let row = optimal_k_row(cfg)?;
    emit(cfg, &OPTIMAL_K_HEADER, &[row], None)
}

pub const ROUND_HEADER: [&str; 3] = ["round", "energy_j", "live_nodes"];

/// Runs the simulation for `cfg` and returns its metrics and, when
/// tracing, the event ledger.
pub fn simulate_run(cfg: &RunConfig) -> Result<(SimMetrics, Vec<LedgerEvent>), LabError> {
    let radio = Radio::new(cfg.radio)?;
    let c = &cfg.cluster;
    let mut state = sim::init_network(cfg.sim.seed, c.n as usize, c.field_side, cfg.base_station(), cfg.sim.e_start)?;
    if cfg.sim.trace {
        state.enable_trace();
    }
    let scenario = SimScenario {
        k: c.k,
        m: c.m,
        n_frames: c.n_frames,
        l: c.l,
        max_rounds: cfg.sim.max_rounds,
        stop_at_first_death: cfg.sim.stop_at_first_death,
    };
    let metrics = sim::run_lifetime(&mut state, &scenario, &radio);
    if metrics.eligibility_resets > 0 {
        log::warn!("head eligibility was reset {} time(s) before every node had served", metrics.eligibility_resets);
    }
    Ok((metrics, state.trace().to_vec()))
}

fn simulate(cfg: &RunConfig) -> Result<(), LabError> {
    let (metrics, trace) = simulate_run(cfg)?;
    let rows: Vec<Vec<f64>> = metrics
        .energy_per_round
        .iter()
        .zip(&metrics.live_after_round)
        .enumerate()
        .map(|(i, (e, live))| vec![(i + 1) as f64, *e, *live as f64])
        .collect();
    emit(cfg, &ROUND_HEADER, &rows, None)?;
    let Some(path) = &cfg.output_path else { return Ok(()) };

    let radio = Radio::new(cfg.radio)?;
    let comparison = sim::analytic_comparison(&metrics, &cfg.cluster, &radio);
    let summary = SimSummary {
        metrics: &metrics,
        base_station: cfg.base_station(),
        e_start: cfg.sim.e_start,
        comparison_error: comparison.as_ref().err().map(ToString::to_string),
        analytic_comparison: comparison.ok(),
    };
    output::write_json(&sidecar(path, "summary.json"), &summary)?;
    if cfg.sim.trace {
        write_trace(&sidecar(path, "trace.csv"), &trace)?;
    }
    Ok(())
}

fn write_trace(path: &Path, events: &[LedgerEvent]) -> Result<(), LabError> {
    let io = |e: csv::Error| LabError::io(path, std::io::Error::other(e.to_string()));
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(io)?;
    // Rounds are 1-based on disk, like the per-round table.
    for event in events {
        w.serialize(LedgerEvent { round: event.round + 1, ..*event }).map_err(io)?;
    }
    if events.is_empty() {
        w.write_record(["round", "iteration", "node", "kind", "count", "joules"]).map_err(io)?;
    }
    w.flush().map_err(|e| LabError::io(path, e))
}
