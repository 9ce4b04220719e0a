//! Grid sweeps over radio and cluster parameters.
//!
//! A [`SweepSpec`] names axes by field name (any [`RadioParams`] or
//! [`ClusterConfig`] field) and the metrics to tabulate. Rows come out in
//! row-major order: the first axis varies slowest. Points where a metric
//! cannot be evaluated (for example `m > n/k`) keep their row, carry `NaN`
//! in that metric and `0` in the trailing `feasible` column.

use alloc::borrow::ToOwned;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::{self, ClusterConfig, EnergyReport, SnrMode};
use crate::error::{Error, Result};
use crate::radio::{Radio, RadioParams};

pub const MAX_ROWS: u64 = 1_000_000;
pub const FEASIBLE_COLUMN: &str = "feasible";

/// A sweepable input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    SnrMinDb,
    NoiseFactorDb,
    ThermalNoiseFloor,
    BandwidthHz,
    WavelengthM,
    AntennaGainProduct,
    PaEfficiency,
    PathLossExponent,
    BitRate,
    ElectronicsPowerW,
    ElecEnergyPerBit,
    BeamformEnergyPerBit,
    LongRangeAmp,
    ReferenceDistanceM,
    N,
    K,
    M,
    L,
    NFrames,
    DBs,
    DIntra,
    FieldSide,
}

impl Param {
    pub const ALL: [(&'static str, Param); 22] = [
        ("snr_min_db", Param::SnrMinDb),
        ("noise_factor_db", Param::NoiseFactorDb),
        ("thermal_noise_floor", Param::ThermalNoiseFloor),
        ("bandwidth_hz", Param::BandwidthHz),
        ("wavelength_m", Param::WavelengthM),
        ("antenna_gain_product", Param::AntennaGainProduct),
        ("pa_efficiency", Param::PaEfficiency),
        ("path_loss_exponent", Param::PathLossExponent),
        ("bit_rate", Param::BitRate),
        ("electronics_power_w", Param::ElectronicsPowerW),
        ("elec_energy_per_bit", Param::ElecEnergyPerBit),
        ("beamform_energy_per_bit", Param::BeamformEnergyPerBit),
        ("long_range_amp", Param::LongRangeAmp),
        ("reference_distance_m", Param::ReferenceDistanceM),
        ("n", Param::N),
        ("k", Param::K),
        ("m", Param::M),
        ("l", Param::L),
        ("n_frames", Param::NFrames),
        ("d_bs", Param::DBs),
        ("d_intra", Param::DIntra),
        ("field_side", Param::FieldSide),
    ];

    fn is_integer(self) -> bool {
        matches!(self, Param::N | Param::K | Param::M | Param::L | Param::NFrames)
    }

    fn apply(self, v: f64, radio: &mut RadioParams, cluster: &mut ClusterConfig) {
        match self {
            Param::SnrMinDb => radio.snr_min_db = v,
            Param::NoiseFactorDb => radio.noise_factor_db = v,
            Param::ThermalNoiseFloor => radio.thermal_noise_floor = v,
            Param::BandwidthHz => radio.bandwidth_hz = v,
            Param::WavelengthM => radio.wavelength_m = v,
            Param::AntennaGainProduct => radio.antenna_gain_product = v,
            Param::PaEfficiency => radio.pa_efficiency = v,
            Param::PathLossExponent => radio.path_loss_exponent = v,
            Param::BitRate => radio.bit_rate = v,
            Param::ElectronicsPowerW => radio.electronics_power_w = v,
            Param::ElecEnergyPerBit => radio.elec_energy_per_bit = v,
            Param::BeamformEnergyPerBit => radio.beamform_energy_per_bit = v,
            Param::LongRangeAmp => radio.long_range_amp = v,
            Param::ReferenceDistanceM => radio.reference_distance_m = v,
            // Integer axes are checked to be whole and in range by validate().
            Param::N => cluster.n = v as u32,
            Param::K => cluster.k = v as u32,
            Param::M => cluster.m = v as u32,
            Param::L => cluster.l = v as u32,
            Param::NFrames => cluster.n_frames = v as u64,
            Param::DBs => cluster.d_bs = v,
            Param::DIntra => cluster.d_intra = v,
            Param::FieldSide => cluster.field_side = v,
        }
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Param::ALL
            .iter()
            .find(|(name, _)| *name == s)
            .map(|(_, p)| *p)
            .ok_or_else(|| Error::UnknownParameter(s.to_owned()))
    }
}

/// A tabulated output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Index into [`EnergyReport::HEADER`].
    Report(usize),
    KClosedRaw,
    KClosed,
    KNumeric,
    ENumericMin,
    /// Amplifier energy per bit at `d_intra`.
    PerBitEnergy,
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(i) = EnergyReport::HEADER.iter().position(|h| *h == s) {
            return Ok(Metric::Report(i));
        }
        Ok(match s {
            "k_closed_raw" => Metric::KClosedRaw,
            "k_closed" => Metric::KClosed,
            "k_numeric" => Metric::KNumeric,
            "e_numeric_min" => Metric::ENumericMin,
            "per_bit_energy" => Metric::PerBitEnergy,
            _ => return Err(Error::UnknownMetric(s.to_owned())),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub param: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(param: &str, values: impl Into<Vec<f64>>) -> Self {
        Self { param: param.to_owned(), values: values.into() }
    }

    pub fn range(param: &str, lo: u32, hi: u32) -> Self {
        Self::new(param, (lo..=hi).map(f64::from).collect::<Vec<_>>())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub base_radio: RadioParams,
    pub base_cluster: ClusterConfig,
    pub axes: Vec<Axis>,
    pub outputs: Vec<String>,
    pub snr_mode: SnrMode,
    /// Inclusive cluster-count range for `k_numeric` / `e_numeric_min`.
    pub k_range: (u32, u32),
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            base_radio: RadioParams::default(),
            base_cluster: ClusterConfig::default(),
            axes: Vec::new(),
            outputs: EnergyReport::HEADER.iter().map(|s| (*s).to_owned()).collect(),
            snr_mode: SnrMode::Physical,
            k_range: (1, 100),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl SweepTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// A validated spec, ready to evaluate individual grid points.
#[derive(Debug, Clone)]
pub struct SweepPlan {
    spec: SweepSpec,
    params: Vec<Param>,
    metrics: Vec<Metric>,
    rows: usize,
}

impl SweepPlan {
    pub fn new(spec: SweepSpec) -> Result<Self> {
        let mut params = Vec::with_capacity(spec.axes.len());
        let mut rows: u128 = 1;
        for axis in &spec.axes {
            let p: Param = axis.param.parse()?;
            if axis.values.is_empty() {
                return Err(Error::EmptyAxis(axis.param.clone()));
            }
            for &v in &axis.values {
                if !v.is_finite() {
                    return Err(Error::NonFinite { field: "axis value" });
                }
                if p.is_integer() && (v < 0.0 || v != libm::trunc(v) || v > u32::MAX as f64) {
                    return Err(Error::Invalid {
                        field: "axis value",
                        rule: "integer parameters take whole non-negative values",
                        value: v,
                    });
                }
            }
            params.push(p);
            rows = rows.saturating_mul(axis.values.len() as u128);
        }
        if rows > u128::from(MAX_ROWS) {
            return Err(Error::GridTooLarge { rows, limit: MAX_ROWS });
        }
        let metrics = spec
            .outputs
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<Metric>>>()?;
        Ok(Self { spec, params, metrics, rows: rows as usize })
    }

    pub fn spec(&self) -> &SweepSpec {
        &self.spec
    }

    pub fn row_count(&self) -> usize {
        self.rows
    }

    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = self.spec.axes.iter().map(|a| a.param.clone()).collect();
        h.extend(self.spec.outputs.iter().cloned());
        h.push(FEASIBLE_COLUMN.to_string());
        h
    }

    /// Axis values of grid point `index`, row-major.
    pub fn point(&self, index: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.spec.axes.len()];
        let mut rest = index;
        for (slot, axis) in out.iter_mut().zip(&self.spec.axes).rev() {
            let len = axis.values.len();
            *slot = axis.values[rest % len];
            rest /= len;
        }
        out
    }

    /// Full row for grid point `index`.
    pub fn evaluate(&self, index: usize) -> Vec<f64> {
        let point = self.point(index);
        let mut radio_p = self.spec.base_radio;
        let mut cluster = self.spec.base_cluster;
        for (p, &v) in self.params.iter().zip(&point) {
            p.apply(v, &mut radio_p, &mut cluster);
        }
        let mut row = point;
        let mut feasible = true;
        let radio = Radio::new(radio_p);
        let report = radio
            .as_ref()
            .ok()
            .and_then(|r| analysis::energy_report(&cluster, r).ok());
        for metric in &self.metrics {
            let value = radio.as_ref().ok().and_then(|r| self.metric(*metric, &cluster, r, report.as_ref()));
            feasible &= value.is_some();
            row.push(value.unwrap_or(f64::NAN));
        }
        row.push(if feasible && radio.is_ok() { 1.0 } else { 0.0 });
        row
    }

    fn metric(
        &self,
        metric: Metric,
        cluster: &ClusterConfig,
        radio: &Radio,
        report: Option<&EnergyReport>,
    ) -> Option<f64> {
        let closed = || {
            analysis::optimal_clusters_closed_raw(
                cluster.n,
                radio,
                cluster.d_bs,
                cluster.field_side,
                self.spec.snr_mode,
            )
        };
        match metric {
            Metric::Report(i) => report.map(|r| r.values()[i]),
            Metric::KClosedRaw => closed().ok(),
            Metric::KClosed => analysis::optimal_clusters_closed(
                cluster.n,
                radio,
                cluster.d_bs,
                cluster.field_side,
                self.spec.snr_mode,
            )
            .ok()
            .map(f64::from),
            Metric::KNumeric => analysis::optimal_clusters_numeric(cluster, radio, self.spec.k_range)
                .ok()
                .map(|(k, _)| f64::from(k)),
            Metric::ENumericMin => analysis::optimal_clusters_numeric(cluster, radio, self.spec.k_range)
                .ok()
                .map(|(_, e)| e),
            Metric::PerBitEnergy => radio.per_bit_energy(cluster.d_intra).ok(),
        }
    }
}

/// Evaluates every grid point sequentially.
pub fn run_sweep(spec: SweepSpec) -> Result<SweepTable> {
    let plan = SweepPlan::new(spec)?;
    let rows = (0..plan.row_count()).map(|i| plan.evaluate(i)).collect();
    Ok(SweepTable { header: plan.header(), rows })
}

/// Published figure datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigurePreset {
    Fig3a,
    Fig3b,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9a,
    Fig9b,
    Fig10a,
    Fig10b,
    Fig11,
    Fig12,
    Fig13,
    Fig14,
}

impl FigurePreset {
    pub const ALL: [FigurePreset; 14] = [
        FigurePreset::Fig3a,
        FigurePreset::Fig3b,
        FigurePreset::Fig5,
        FigurePreset::Fig6,
        FigurePreset::Fig7,
        FigurePreset::Fig8,
        FigurePreset::Fig9a,
        FigurePreset::Fig9b,
        FigurePreset::Fig10a,
        FigurePreset::Fig10b,
        FigurePreset::Fig11,
        FigurePreset::Fig12,
        FigurePreset::Fig13,
        FigurePreset::Fig14,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigurePreset::Fig3a => "fig3a",
            FigurePreset::Fig3b => "fig3b",
            FigurePreset::Fig5 => "fig5",
            FigurePreset::Fig6 => "fig6",
            FigurePreset::Fig7 => "fig7",
            FigurePreset::Fig8 => "fig8",
            FigurePreset::Fig9a => "fig9a",
            FigurePreset::Fig9b => "fig9b",
            FigurePreset::Fig10a => "fig10a",
            FigurePreset::Fig10b => "fig10b",
            FigurePreset::Fig11 => "fig11",
            FigurePreset::Fig12 => "fig12",
            FigurePreset::Fig13 => "fig13",
            FigurePreset::Fig14 => "fig14",
        }
    }

    /// Builds the sweep. Values the captions state are fixed here; visible
    /// axis spans not stated anywhere are `k` in 1..=50 and `m` in 1..=20.
    /// "Network diameter" maps to `d_bs`, swept over 50..=250 m in 50 m
    /// steps. Everything else comes from [`ClusterConfig::default`].
    pub fn spec(self) -> SweepSpec {
        const OPTIMUM: [&str; 4] = ["k_closed_raw", "k_closed", "k_numeric", "e_numeric_min"];
        const CH_NONCH: [&str; 5] = ["e_ch_elec", "e_nonch_elec", "e_ch_data", "e_nonch_data", "e_start"];
        let diameters = [50.0, 100.0, 150.0, 200.0, 250.0];
        let frames = [10_000.0, 25_000.0, 50_000.0];

        let outputs = |names: &[&str]| names.iter().map(|s| (*s).to_owned()).collect::<Vec<_>>();
        let base = SweepSpec::default();
        let with_m = |m: u32| ClusterConfig { m, ..ClusterConfig::default() };
        let k_axis = || Axis::range("k", 1, 50);
        let m_axis = || Axis::range("m", 1, 20);

        match self {
            FigurePreset::Fig3a => SweepSpec {
                axes: vec![Axis::new("n", [1000.0, 1500.0, 2000.0]), m_axis()],
                outputs: outputs(&OPTIMUM),
                ..base
            },
            // The generating procedure is not published; this tabulates the
            // numeric optimum for the stated head-set sizes.
            FigurePreset::Fig3b => SweepSpec {
                axes: vec![Axis::new("n", [1000.0, 1500.0, 2000.0]), Axis::new("m", [100.0, 200.0, 300.0])],
                outputs: outputs(&OPTIMUM),
                ..base
            },
            FigurePreset::Fig5 => SweepSpec {
                axes: vec![Axis::new("d_bs", diameters), m_axis()],
                outputs: outputs(&["e_ch_data", "e_nonch_data"]),
                ..base
            },
            FigurePreset::Fig6 => SweepSpec {
                axes: vec![Axis::new("snr_min_db", [10.0, 20.0, 30.0]), m_axis()],
                outputs: outputs(&OPTIMUM),
                snr_mode: SnrMode::PaperDbCompat,
                ..base
            },
            FigurePreset::Fig7 => SweepSpec {
                axes: vec![Axis::new("pa_efficiency", [0.6, 0.4, 0.2]), m_axis()],
                outputs: outputs(&OPTIMUM),
                ..base
            },
            FigurePreset::Fig8 => SweepSpec {
                base_cluster: with_m(1),
                axes: vec![k_axis(), Axis::new("d_bs", [150.0, 400.0])],
                outputs: outputs(&["e_ch_frame", "e_start"]),
                ..base
            },
            FigurePreset::Fig9a | FigurePreset::Fig9b => SweepSpec {
                base_cluster: with_m(if self == FigurePreset::Fig9a { 1 } else { 3 }),
                axes: vec![k_axis(), Axis::new("n_frames", frames)],
                outputs: outputs(&["e_start"]),
                ..base
            },
            FigurePreset::Fig10a | FigurePreset::Fig10b => SweepSpec {
                base_cluster: with_m(if self == FigurePreset::Fig10a { 1 } else { 3 }),
                axes: vec![k_axis()],
                outputs: outputs(&["e_ch_frame", "e_nonch_frame", "e_ch_data", "e_nonch_data"]),
                ..base
            },
            FigurePreset::Fig11 => SweepSpec {
                axes: vec![k_axis(), Axis::new("d_bs", diameters)],
                outputs: outputs(&["e_start"]),
                ..base
            },
            FigurePreset::Fig12 => SweepSpec {
                axes: vec![Axis::new("n_frames", frames), k_axis(), Axis::new("d_bs", diameters)],
                outputs: outputs(&["e_start"]),
                ..base
            },
            FigurePreset::Fig13 => SweepSpec {
                base_cluster: with_m(3),
                axes: vec![k_axis(), Axis::new("d_bs", diameters)],
                outputs: outputs(&CH_NONCH),
                ..base
            },
            FigurePreset::Fig14 => SweepSpec {
                base_cluster: with_m(3),
                axes: vec![Axis::range("k", 1, 60)],
                outputs: outputs(&CH_NONCH),
                ..base
            },
        }
    }
}

impl FromStr for FigurePreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigurePreset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_owned()))
    }
}

pub fn figure_preset(name: &str) -> Result<SweepSpec> {
    Ok(name.parse::<FigurePreset>()?.spec())
}
