//! Sustainability accounting for edge AI accelerators.
//!
//! The crate covers four steps of a holistic energy comparison:
//!
//! * [`grid`]: regional carbon intensity from generation shares and
//!   per-source emission factors.
//! * [`fab`]: embodied energy and carbon per die (and per multi-die module)
//!   from wafer-level process energy.
//! * [`usage`] and [`operational`]: time-averaged operational power under a
//!   usage scenario, and throughput-per-watt / throughput-per-gram metrics.
//! * [`tradeoff`]: indifference and break-even times between an incumbent
//!   and a candidate system, plus 2-D sweeps over usage scenarios.
//!
//! [`workload`] counts convolution FLOPs so that GFLOPS-rated devices can be
//! compared on identical work.
//!
//! Everything here is pure and allocation-only; file formats, parallel sweeps
//! and the command line live in the `greenedge` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod fab;
pub mod grid;
pub mod operational;
pub mod tradeoff;
pub mod units;
pub mod usage;
pub mod workload;

pub use fab::{Comparability, DeviceSpec, EmbodiedFootprint, FabError, LcaStudy};
pub use grid::{CarbonIntensity, EmissionFactorTable, Finding, GridError, RegionProfile, Severity};
pub use operational::{EfficiencyReport, OperationalError, Phase, Throughput, ThroughputUnit, WorkloadRecord};
pub use tradeoff::{ComparisonInput, SweepSurface, TimeResult, TradeoffError};
pub use units::{GramsCo2e, Joules, KilowattHours, Seconds, Watts};
pub use usage::{PowerProfile, StandbyFractions, UsageError, UsageScenario};
pub use workload::{ConvLayerSpec, NetworkSpec, WorkEstimate, WorkloadError};
