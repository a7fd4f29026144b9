//! Workload throughput/power records and the efficiency metrics derived from
//! them: work per joule, and work per gram of CO2eq on a given grid.

use alloc::format;
use alloc::string::String;
use core::fmt;

use crate::grid::CarbonIntensity;
use crate::units::{Joules, Seconds, Watts, JOULES_PER_KWH};
use crate::usage::{average_power, PowerProfile, StandbyFractions, UsageError, UsageScenario};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OperationalError {
    #[error("{field} must be positive (got {value})")]
    NonPositive { field: &'static str, value: f64 },
    #[error("{phase} records are rated in {expected}, not {got}")]
    UnitPhaseMismatch { phase: Phase, expected: ThroughputUnit, got: ThroughputUnit },
    #[error("at least one grid mix is required")]
    NoMixes,
    #[error("grid mix for `{region}` must be positive (got {value})")]
    NonPositiveMix { region: String, value: f64 },
    #[error("duration {0} s must be finite and nonnegative")]
    NegativeDuration(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Inference,
    Training,
}

impl Phase {
    /// Inference rows are rated in frames per second, training rows in GFLOPS.
    pub fn conventional_unit(self) -> ThroughputUnit {
        match self {
            Phase::Inference => ThroughputUnit::Fps,
            Phase::Training => ThroughputUnit::Gflops,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Inference => "inference",
            Phase::Training => "training",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Closed set of throughput units. Each one knows how to scale "work per
/// gram" into the magnitude used in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ThroughputUnit {
    /// Frames (images) per second.
    Fps,
    /// 10^9 floating-point operations per second.
    Gflops,
}

impl ThroughputUnit {
    pub fn as_str(self) -> &'static str {
        match self {
            ThroughputUnit::Fps => "FPS",
            ThroughputUnit::Gflops => "GFLOPS",
        }
    }

    pub fn per_watt_label(self) -> &'static str {
        match self {
            ThroughputUnit::Fps => "FPS/W",
            ThroughputUnit::Gflops => "GFLOPS/W",
        }
    }

    /// Label of the per-carbon figure: mega-frames or teraFLOPs per gram.
    pub fn per_carbon_label(self) -> &'static str {
        match self {
            ThroughputUnit::Fps => "MF/gCO2eq",
            ThroughputUnit::Gflops => "TFLOP/gCO2eq",
        }
    }

    /// Multiplier from (base work unit per gram) to the reported unit:
    /// frames to mega-frames, GFLOP to TFLOP.
    pub fn per_carbon_scale(self) -> f64 {
        match self {
            ThroughputUnit::Fps => 1e-6,
            ThroughputUnit::Gflops => 1e-3,
        }
    }

    /// Decimal places used when rendering per-carbon figures.
    pub fn per_carbon_decimals(self) -> usize {
        match self {
            ThroughputUnit::Fps => 2,
            ThroughputUnit::Gflops => 0,
        }
    }

    /// Base work units per item of rated throughput, in FLOPs.
    pub fn flops_per_unit(self) -> Option<f64> {
        match self {
            ThroughputUnit::Fps => None,
            ThroughputUnit::Gflops => Some(1e9),
        }
    }
}

impl fmt::Display for ThroughputUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Throughput {
    pub unit: ThroughputUnit,
    pub value: f64,
}

impl Throughput {
    pub fn fps(value: f64) -> Self {
        Self { unit: ThroughputUnit::Fps, value }
    }

    pub fn gflops(value: f64) -> Self {
        Self { unit: ThroughputUnit::Gflops, value }
    }
}

/// Published throughput and active power of one (benchmark, device) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadRecord {
    pub benchmark: String,
    pub device: String,
    pub phase: Phase,
    throughput: Throughput,
    power: Watts,
    pub precision_note: String,
}

impl WorkloadRecord {
    pub fn new(
        benchmark: impl Into<String>,
        device: impl Into<String>,
        phase: Phase,
        throughput: Throughput,
        power: Watts,
    ) -> Result<Self, OperationalError> {
        if !(throughput.value.is_finite() && throughput.value > 0.0) {
            return Err(OperationalError::NonPositive { field: "throughput", value: throughput.value });
        }
        if !(power.value().is_finite() && power.value() > 0.0) {
            return Err(OperationalError::NonPositive { field: "power", value: power.value() });
        }
        if throughput.unit != phase.conventional_unit() {
            return Err(OperationalError::UnitPhaseMismatch {
                phase,
                expected: phase.conventional_unit(),
                got: throughput.unit,
            });
        }
        Ok(Self {
            benchmark: benchmark.into(),
            device: device.into(),
            phase,
            throughput,
            power,
            precision_note: String::new(),
        })
    }

    pub fn with_precision_note(mut self, note: impl Into<String>) -> Self {
        self.precision_note = note.into();
        self
    }

    pub fn throughput(&self) -> Throughput {
        self.throughput
    }

    pub fn power(&self) -> Watts {
        self.power
    }

    pub fn power_profile(&self, standby: StandbyFractions) -> Result<PowerProfile, UsageError> {
        PowerProfile::from_active(self.power, standby)
    }
}

/// Throughput per watt, in the record's unit per W (i.e. work per joule).
pub fn efficiency_per_watt(record: &WorkloadRecord) -> f64 {
    record.throughput.value / record.power.value()
}

/// Work per gram of CO2eq at one grid mix, in the unit's reporting scale.
pub fn work_per_gram(per_watt: f64, unit: ThroughputUnit, mix_g_per_kwh: f64) -> f64 {
    per_watt * JOULES_PER_KWH / mix_g_per_kwh * unit.per_carbon_scale()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyReport {
    pub unit: ThroughputUnit,
    pub per_watt: f64,
    /// Work per gram on the dirtiest grid.
    pub per_carbon_min: f64,
    /// Work per gram on the cleanest grid.
    pub per_carbon_max: f64,
    pub mix_range: (f64, f64),
}

impl EfficiencyReport {
    pub fn render_per_watt(&self) -> String {
        format!("{:.2}", self.per_watt)
    }

    pub fn render_per_carbon(&self) -> (String, String) {
        let d = self.unit.per_carbon_decimals();
        (format!("{:.*}", d, self.per_carbon_min), format!("{:.*}", d, self.per_carbon_max))
    }
}

/// Per-watt efficiency plus the per-carbon range spanned by `mixes`.
pub fn efficiency_per_carbon(
    record: &WorkloadRecord,
    mixes: &[CarbonIntensity],
) -> Result<EfficiencyReport, OperationalError> {
    let mut range: Option<(f64, f64)> = None;
    for mix in mixes {
        let g = mix.g_per_kwh();
        if g <= 0.0 {
            return Err(OperationalError::NonPositiveMix { region: mix.region.clone(), value: g });
        }
        range = Some(match range {
            None => (g, g),
            Some((lo, hi)) => (lo.min(g), hi.max(g)),
        });
    }
    let (lo, hi) = range.ok_or(OperationalError::NoMixes)?;
    let unit = record.throughput.unit;
    let per_watt = efficiency_per_watt(record);
    Ok(EfficiencyReport {
        unit,
        per_watt,
        per_carbon_min: work_per_gram(per_watt, unit, hi),
        per_carbon_max: work_per_gram(per_watt, unit, lo),
        mix_range: (lo, hi),
    })
}

/// Energy drawn over `duration` under a usage scenario.
pub fn operational_energy(
    profile: &PowerProfile,
    scenario: &UsageScenario,
    duration: Seconds,
) -> Result<Joules, OperationalError> {
    if !(duration.value().is_finite() && duration.value() >= 0.0) {
        return Err(OperationalError::NegativeDuration(duration.value()));
    }
    Ok(average_power(profile, scenario) * duration)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    fn record(phase: Phase, t: Throughput, p: f64) -> WorkloadRecord {
        WorkloadRecord::new("bench", "dev", phase, t, Watts(p)).unwrap()
    }

    fn table_mixes() -> Vec<CarbonIntensity> {
        [("AZ", 395.0), ("CA", 234.0), ("TX", 438.0), ("NY", 188.0)]
            .into_iter()
            .map(|(r, g)| CarbonIntensity::new(r, g).unwrap())
            .collect()
    }

    #[test]
    fn per_watt_examples() {
        let ddr3 = record(Phase::Inference, Throughput::fps(84.8), 2.0);
        assert!((efficiency_per_watt(&ddr3) - 42.4).abs() < 1e-12);
        let gpu = record(Phase::Training, Throughput::gflops(1335.0), 21.05);
        assert!((efficiency_per_watt(&gpu) - 63.420_427_5).abs() < 1e-6);
        let unit = record(Phase::Training, Throughput::gflops(1.0), 1.0);
        assert_eq!(efficiency_per_watt(&unit), 1.0);
    }

    #[test]
    fn per_carbon_gpu_training() {
        let gpu = record(Phase::Training, Throughput::gflops(1335.0), 21.05);
        let r = efficiency_per_carbon(&gpu, &table_mixes()).unwrap();
        // 63.4204 GFLOP/J * 3.6e6 J/kWh / 438 g/kWh / 1000
        assert!((r.per_carbon_min - 521.2637).abs() < 1e-3);
        assert!((r.per_carbon_max - 1214.4338).abs() < 1e-3);
        assert_eq!(r.render_per_carbon(), ("521".into(), "1214".into()));
        assert_eq!(r.mix_range, (188.0, 438.0));
    }

    #[test]
    fn per_carbon_ddr3_inference() {
        let ddr3 = record(Phase::Inference, Throughput::fps(84.8), 2.0);
        let r = efficiency_per_carbon(&ddr3, &table_mixes()).unwrap();
        assert!((r.per_carbon_min - 0.348_493).abs() < 1e-6);
        assert!((r.per_carbon_max - 0.811_915).abs() < 1e-6);
        assert_eq!(r.render_per_carbon(), ("0.35".into(), "0.81".into()));
    }

    #[test]
    fn per_carbon_rm_inference_follows_formula() {
        let rm = record(Phase::Inference, Throughput::fps(490.0), 0.93);
        let r = efficiency_per_carbon(&rm, &table_mixes()).unwrap();
        assert_eq!(r.render_per_carbon(), ("4.33".into(), "10.09".into()));
    }

    #[test]
    fn doubling_mixes_halves_range() {
        let gpu = record(Phase::Training, Throughput::gflops(848.0), 20.37);
        let base = efficiency_per_carbon(&gpu, &table_mixes()).unwrap();
        let doubled: Vec<_> = table_mixes()
            .into_iter()
            .map(|m| CarbonIntensity::new(m.region.clone(), 2.0 * m.g_per_kwh()).unwrap())
            .collect();
        let half = efficiency_per_carbon(&gpu, &doubled).unwrap();
        assert_eq!(half.per_carbon_min * 2.0, base.per_carbon_min);
        assert_eq!(half.per_carbon_max * 2.0, base.per_carbon_max);
    }

    #[test]
    fn per_carbon_rejects_bad_mixes() {
        let gpu = record(Phase::Training, Throughput::gflops(848.0), 20.37);
        assert_eq!(efficiency_per_carbon(&gpu, &[]), Err(OperationalError::NoMixes));
        let zero = vec![CarbonIntensity::new("Z", 0.0).unwrap()];
        assert!(matches!(efficiency_per_carbon(&gpu, &zero), Err(OperationalError::NonPositiveMix { .. })));
    }

    #[test]
    fn record_invariants() {
        let bad = |t, p| WorkloadRecord::new("b", "d", Phase::Inference, t, Watts(p));
        assert!(bad(Throughput::fps(0.0), 1.0).is_err());
        assert!(bad(Throughput::fps(1.0), 0.0).is_err());
        assert!(matches!(bad(Throughput::gflops(1.0), 1.0), Err(OperationalError::UnitPhaseMismatch { .. })));
    }

    #[test]
    fn energy_over_time() {
        let full = UsageScenario::new(1.0, 0.0).unwrap();
        let p = PowerProfile::new(2.0, 0.5, 0.1).unwrap();
        assert_eq!(operational_energy(&p, &full, Seconds(3600.0)).unwrap(), Joules(7200.0));

        let half = UsageScenario::new(0.5, 1.0).unwrap();
        let e = operational_energy(&p, &half, Seconds(1000.0)).unwrap();
        assert!((e.value() - 1050.0).abs() < 1e-9);

        assert_eq!(operational_energy(&p, &half, Seconds(0.0)).unwrap(), Joules(0.0));
        assert!(operational_energy(&p, &half, Seconds(-1.0)).is_err());
    }
}
