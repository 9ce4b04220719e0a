//! RF transmit chain and message-energy primitives.
//!
//! [`RadioParams`] is the plain, serializable parameter set (dB-valued fields
//! carry a `_db` suffix). [`Radio`] is the validated form: dB quantities are
//! converted to linear ratios once, at construction, and every operation
//! after that is linear and pure.

use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, finite, Error, Result};

/// `10^(x/10)`.
pub fn db_to_linear(x: f64) -> Result<f64> {
    let x = finite("db", x)?;
    Ok(libm::pow(10.0, x / 10.0))
}

/// Transceiver constants. [`Default`] is the reference parameter table:
/// 915 MHz carrier, 1 Mbit/s, 1 bit/Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioParams {
    pub snr_min_db: f64,
    pub noise_factor_db: f64,
    /// W/Hz (equivalently J).
    pub thermal_noise_floor: f64,
    pub bandwidth_hz: f64,
    pub wavelength_m: f64,
    /// Combined linear gain of both antennas.
    pub antenna_gain_product: f64,
    pub pa_efficiency: f64,
    pub path_loss_exponent: f64,
    /// bit/s
    pub bit_rate: f64,
    pub electronics_power_w: f64,
    /// J/bit
    pub elec_energy_per_bit: f64,
    /// J/bit
    pub beamform_energy_per_bit: f64,
    /// J/bit/m^4
    pub long_range_amp: f64,
    pub reference_distance_m: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        let bit_rate = 1.0e6;
        Self {
            snr_min_db: 10.0,
            noise_factor_db: 11.0,
            thermal_noise_floor: 4.17e-21,
            bandwidth_hz: bit_rate * 1.0,
            wavelength_m: 0.328,
            antenna_gain_product: 0.01,
            pa_efficiency: 0.2,
            path_loss_exponent: 2.0,
            bit_rate,
            electronics_power_w: 3.63e-3,
            elec_energy_per_bit: 50.0e-9,
            beamform_energy_per_bit: 5.0e-9,
            long_range_amp: 0.0013e-12,
            reference_distance_m: 0.1,
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<()> {
        let fields: [(&'static str, f64); 14] = [
            ("snr_min_db", self.snr_min_db),
            ("noise_factor_db", self.noise_factor_db),
            ("thermal_noise_floor", self.thermal_noise_floor),
            ("bandwidth_hz", self.bandwidth_hz),
            ("wavelength_m", self.wavelength_m),
            ("antenna_gain_product", self.antenna_gain_product),
            ("pa_efficiency", self.pa_efficiency),
            ("path_loss_exponent", self.path_loss_exponent),
            ("bit_rate", self.bit_rate),
            ("electronics_power_w", self.electronics_power_w),
            ("elec_energy_per_bit", self.elec_energy_per_bit),
            ("beamform_energy_per_bit", self.beamform_energy_per_bit),
            ("long_range_amp", self.long_range_amp),
            ("reference_distance_m", self.reference_distance_m),
        ];
        for (name, v) in fields {
            finite(name, v)?;
        }
        let p = self;
        ensure(p.pa_efficiency > 0.0 && p.pa_efficiency <= 1.0, "pa_efficiency", "0 < pa_efficiency <= 1", p.pa_efficiency)?;
        ensure(p.bit_rate > 0.0, "bit_rate", "bit_rate > 0", p.bit_rate)?;
        ensure(p.bandwidth_hz > 0.0, "bandwidth_hz", "bandwidth_hz > 0", p.bandwidth_hz)?;
        ensure(p.wavelength_m > 0.0, "wavelength_m", "wavelength_m > 0", p.wavelength_m)?;
        ensure(p.antenna_gain_product > 0.0, "antenna_gain_product", "antenna_gain_product > 0", p.antenna_gain_product)?;
        ensure(p.path_loss_exponent >= 2.0, "path_loss_exponent", "path_loss_exponent >= 2", p.path_loss_exponent)?;
        ensure(p.reference_distance_m > 0.0, "reference_distance_m", "reference_distance_m > 0", p.reference_distance_m)?;
        ensure(p.thermal_noise_floor > 0.0, "thermal_noise_floor", "thermal_noise_floor > 0", p.thermal_noise_floor)?;
        ensure(p.electronics_power_w >= 0.0, "electronics_power_w", "electronics_power_w >= 0", p.electronics_power_w)?;
        ensure(p.elec_energy_per_bit >= 0.0, "elec_energy_per_bit", "elec_energy_per_bit >= 0", p.elec_energy_per_bit)?;
        ensure(p.beamform_energy_per_bit >= 0.0, "beamform_energy_per_bit", "beamform_energy_per_bit >= 0", p.beamform_energy_per_bit)?;
        ensure(p.long_range_amp >= 0.0, "long_range_amp", "long_range_amp >= 0", p.long_range_amp)?;
        Ok(())
    }
}

/// Which amplifier law a transmission uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeClass {
    /// Intra-cluster: electronics plus the RF-chain per-bit energy at `d`.
    Short,
    /// To the base station: electronics plus `long_range_amp * d^4`.
    Long,
}

/// Validated transceiver. Cheap to copy; immutable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Radio {
    params: RadioParams,
    snr_linear: f64,
    noise_factor_linear: f64,
}

impl Radio {
    pub fn new(params: RadioParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            snr_linear: db_to_linear(params.snr_min_db)?,
            noise_factor_linear: db_to_linear(params.noise_factor_db)?,
        })
    }

    pub fn params(&self) -> &RadioParams {
        &self.params
    }

    /// Minimum detectable power at the receiver, in watts.
    pub fn receiver_sensitivity(&self) -> f64 {
        self.sensitivity_with_snr(self.snr_linear)
    }

    fn sensitivity_with_snr(&self, snr_factor: f64) -> f64 {
        let p = &self.params;
        snr_factor * self.noise_factor_linear * p.thermal_noise_floor * p.bandwidth_hz
    }

    /// PA output power needed to close a link of `d` metres given the SNR
    /// factor. `(4pi/w)^a` is the reference-distance loss, `(d/d_o)^a` the
    /// excess path loss.
    fn amplifier_power(&self, d: f64, snr_factor: f64) -> f64 {
        let p = &self.params;
        let a = p.path_loss_exponent;
        let reference_loss = libm::pow(4.0 * PI / p.wavelength_m, a);
        let excess = libm::pow(1.0 / p.reference_distance_m, a) * libm::pow(d, a);
        self.sensitivity_with_snr(snr_factor) * reference_loss * excess
            / (p.antenna_gain_product * p.pa_efficiency)
    }

    /// Power drawn by the power amplifier at distance `d`, in watts.
    pub fn pa_power(&self, d: f64) -> Result<f64> {
        check_distance("d", d)?;
        Ok(self.amplifier_power(d, self.snr_linear))
    }

    /// Total transmit-path power: amplifier plus the other electronics.
    pub fn total_tx_power(&self, d: f64) -> Result<f64> {
        Ok(self.pa_power(d)? + self.params.electronics_power_w)
    }

    /// Amplifier energy per transmitted bit at distance `d` (J/bit).
    ///
    /// Already contains the `d^a` dependence; callers never multiply by a
    /// further distance power.
    pub fn per_bit_energy(&self, d: f64) -> Result<f64> {
        Ok(self.pa_power(d)? / self.params.bit_rate)
    }

    /// Per-bit energy with a caller-chosen SNR factor in place of the
    /// linear minimum SNR. Used by the optimizer's dB-compatibility mode.
    pub(crate) fn per_bit_energy_with_snr(&self, d: f64, snr_factor: f64) -> Result<f64> {
        check_distance("d", d)?;
        Ok(self.amplifier_power(d, snr_factor) / self.params.bit_rate)
    }

    /// Energy to transmit an `l`-bit message over `d` metres.
    pub fn tx_energy(&self, l: f64, d: f64, range: RangeClass) -> Result<f64> {
        check_bits(l)?;
        check_distance("d", d)?;
        let p = &self.params;
        let amp = match range {
            RangeClass::Long => p.long_range_amp * libm::pow(d, 4.0),
            RangeClass::Short => self.amplifier_power(d, self.snr_linear) / p.bit_rate,
        };
        Ok(l * p.elec_energy_per_bit + l * amp)
    }

    /// Energy to receive an `l`-bit message, beamforming included.
    pub fn rx_energy(&self, l: f64) -> Result<f64> {
        check_bits(l)?;
        Ok(l * self.receive_per_bit())
    }

    pub fn receive_per_bit(&self) -> f64 {
        self.params.elec_energy_per_bit + self.params.beamform_energy_per_bit
    }
}

impl Default for Radio {
    fn default() -> Self {
        Radio::new(RadioParams::default()).expect("default parameters are valid")
    }
}

impl TryFrom<RadioParams> for Radio {
    type Error = Error;

    fn try_from(p: RadioParams) -> Result<Self> {
        Radio::new(p)
    }
}

fn check_distance(field: &'static str, d: f64) -> Result<()> {
    finite(field, d)?;
    ensure(d >= 0.0, field, "distance >= 0", d)
}

fn check_bits(l: f64) -> Result<()> {
    finite("l", l)?;
    ensure(l >= 0.0, "l", "l >= 0", l)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn db_conversions() {
        assert_eq!(db_to_linear(0.0).unwrap(), 1.0);
        assert!(rel(db_to_linear(10.0).unwrap(), 10.0) < 1e-15);
        assert!(rel(db_to_linear(-20.0).unwrap(), 0.01) < 1e-15);
        assert!(rel(db_to_linear(11.0).unwrap(), 12.589) < 1e-4);
        assert!(db_to_linear(f64::NAN).is_err());
        assert!(db_to_linear(f64::INFINITY).is_err());
    }

    #[test]
    fn defaults_match_reference_table() {
        let p = RadioParams::default();
        assert_eq!(p.long_range_amp, 1.3e-15);
        assert_eq!(p.elec_energy_per_bit, 5.0e-8);
        assert_eq!(p.beamform_energy_per_bit, 5.0e-9);
        assert_eq!(p.noise_factor_db, 11.0);
        assert_eq!(p.snr_min_db, 10.0);
        assert_eq!(p.thermal_noise_floor, 4.17e-21);
        assert_eq!(p.wavelength_m, 0.328);
        assert_eq!(p.antenna_gain_product, 0.01);
        assert_eq!(p.pa_efficiency, 0.2);
        assert_eq!(p.path_loss_exponent, 2.0);
        assert_eq!(p.electronics_power_w, 3.63e-3);
        assert_eq!(p.reference_distance_m, 0.1);
        assert_eq!(p.bandwidth_hz, p.bit_rate);
    }

    // Scalar evaluation: 10 * 10^1.1 * 4.17e-21 * 1e6.
    #[test]
    fn sensitivity_reference_value() {
        let r = Radio::default();
        assert!(rel(r.receiver_sensitivity(), 5.249718967181679e-13) < 1e-12);
        assert!(rel(r.receiver_sensitivity(), 5.25e-13) < 1e-3);
    }

    #[test]
    fn sensitivity_linear_in_noise_floor_and_unit_gains() {
        let base = Radio::default();
        let mut p = RadioParams::default();
        p.thermal_noise_floor *= 2.0;
        assert_eq!(Radio::new(p).unwrap().receiver_sensitivity(), 2.0 * base.receiver_sensitivity());

        let mut p = RadioParams::default();
        p.snr_min_db = 0.0;
        p.noise_factor_db = 0.0;
        assert_eq!(Radio::new(p).unwrap().receiver_sensitivity(), 4.17e-21 * 1e6);
    }

    #[test]
    fn pa_power_reference_and_edges() {
        let r = Radio::default();
        assert_eq!(r.pa_power(0.0).unwrap(), 0.0);
        assert!(rel(r.pa_power(150.0).unwrap(), 0.8668832629513817) < 1e-12);
        assert!(r.pa_power(-1.0).is_err());

        let mut p = RadioParams::default();
        p.pa_efficiency /= 2.0;
        let half = Radio::new(p).unwrap();
        assert!(rel(half.pa_power(150.0).unwrap(), 2.0 * r.pa_power(150.0).unwrap()) < 1e-15);
    }

    #[test]
    fn per_bit_energy_reference_and_scaling() {
        let r = Radio::default();
        assert!(rel(r.per_bit_energy(150.0).unwrap(), 8.668832629513818e-7) < 1e-12);
        assert_eq!(r.per_bit_energy(0.0).unwrap(), 0.0);
        let e = r.per_bit_energy(37.0).unwrap();
        assert!(rel(r.per_bit_energy(74.0).unwrap(), 4.0 * e) < 1e-14);
        let pa = r.pa_power(150.0).unwrap();
        assert!(rel(r.per_bit_energy(150.0).unwrap() * 1e6, pa) < 1e-15);
    }

    #[test]
    fn total_power_is_pa_plus_electronics() {
        let r = Radio::default();
        for d in [0.0, 1.0, 50.0, 150.0, 400.0] {
            assert_eq!(r.total_tx_power(d).unwrap(), r.pa_power(d).unwrap() + 3.63e-3);
        }
    }

    #[test]
    fn tx_energy_cases() {
        let r = Radio::default();
        assert_eq!(r.tx_energy(0.0, 100.0, RangeClass::Long).unwrap(), 0.0);
        assert_eq!(r.tx_energy(0.0, 100.0, RangeClass::Short).unwrap(), 0.0);
        // 5e-8 + 1.3e-15 * 1e8
        assert!(rel(r.tx_energy(1.0, 100.0, RangeClass::Long).unwrap(), 1.8e-7) < 1e-12);
        assert_eq!(r.tx_energy(1000.0, 0.0, RangeClass::Short).unwrap(), 1000.0 * 5.0e-8);
        assert!(r.tx_energy(-1.0, 1.0, RangeClass::Short).is_err());
        assert!(r.tx_energy(1.0, -1.0, RangeClass::Long).is_err());
    }

    #[test]
    fn rx_energy_cases() {
        let r = Radio::default();
        assert!(rel(r.rx_energy(1.0).unwrap(), 55e-9) < 1e-15);
        assert_eq!(r.rx_energy(0.0).unwrap(), 0.0);
        assert_eq!(r.rx_energy(2000.0).unwrap(), 2000.0 * r.rx_energy(1.0).unwrap());
        assert!(r.rx_energy(-5.0).is_err());
    }

    #[test]
    fn invalid_params_rejected() {
        let bad = [
            RadioParams { pa_efficiency: 0.0, ..Default::default() },
            RadioParams { pa_efficiency: 1.5, ..Default::default() },
            RadioParams { bit_rate: 0.0, ..Default::default() },
            RadioParams { bandwidth_hz: -1.0, ..Default::default() },
            RadioParams { wavelength_m: 0.0, ..Default::default() },
            RadioParams { antenna_gain_product: 0.0, ..Default::default() },
            RadioParams { path_loss_exponent: 1.5, ..Default::default() },
            RadioParams { snr_min_db: f64::NAN, ..Default::default() },
        ];
        for p in bad {
            assert!(Radio::new(p).is_err(), "{p:?}");
        }
    }
}
