//! Energy model and cluster-routing analysis for head-set (EEHC) wireless
//! sensor networks.
//!
//! The crate is `no_std` with `alloc`. It contains:
//!
//! * [`radio`]: the RF transmit chain (receiver sensitivity, power amplifier
//!   draw, per-bit energy) and the three message-energy primitives.
//! * [`analysis`]: election, data-transfer and start energies per role, the
//!   stage fractions, the inverse for supported frames, and both the closed
//!   form and exhaustive optimal cluster count.
//! * [`sweep`]: grid sweeps over any radio or cluster parameter plus the
//!   figure presets.
//! * [`sim`]: a seeded round-based simulator with per-node battery accounting.
//!
//! IO, file formats and the command line live in the `eehc-lab` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod analysis;
mod error;
pub mod radio;
pub mod sim;
mod sum;
pub mod sweep;

pub use analysis::{ClusterConfig, EnergyReport, FramesSupported, IterationCount, SnrMode};
pub use error::{Error, Result};
pub use radio::{db_to_linear, Radio, RadioParams, RangeClass};
pub use sum::CompensatedSum;
