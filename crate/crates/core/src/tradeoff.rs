//! Indifference and break-even analysis between an incumbent system (index 0)
//! and a candidate system (index 1).
//!
//! With embodied energies `M0`, `M1` and operating powers `P0`, `P1`, the
//! indifference time is the service time at which total energy is equal:
//!
//! ```text
//! t_I = (M1 - M0) / (P0 - P1)        t_B = M1 / (P0 - P1)
//! ```
//!
//! The break-even time treats the incumbent as already built (`M0 = 0`).
//! When one system is no worse on both terms there is no crossover and the
//! result is a dominance verdict instead of a time.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::fab::{check_study_compatibility, embodied_energy_per_die, Comparability, DeviceSpec};
use crate::operational::{Throughput, ThroughputUnit, WorkloadRecord};
use crate::units::{Joules, Seconds, Watts};
use crate::usage::{average_power, derive_activity_from_demand, PowerProfile, UsageError, UsageScenario};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TradeoffError {
    #[error("{field} must be finite and nonnegative (got {value})")]
    InvalidTerm { field: &'static str, value: f64 },
    #[error("{axis} axis: {reason}")]
    InvalidAxis { axis: &'static str, reason: String },
    #[error("`{a}` ({a_study}) and `{b}` ({b_study}) come from different LCA studies")]
    CrossStudy { a: String, a_study: String, b: String, b_study: String },
    #[error("workload `{benchmark}` runs on `{workload_device}`, not `{device}`")]
    DeviceMismatch { benchmark: String, workload_device: String, device: String },
    #[error("iso-work needs matching throughput units: {0} vs {1}")]
    UnitMismatch(ThroughputUnit, ThroughputUnit),
    #[error(
        "cell (activity {activity}, sleep {sleep}): `{device}` cannot serve {demand} with capability {capability}"
    )]
    InfeasibleCell { activity: f64, sleep: f64, device: String, demand: f64, capability: f64 },
    #[error(transparent)]
    Usage(#[from] UsageError),
}

/// Outcome of an indifference or break-even calculation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeResult {
    /// The two systems trade off; totals cross after this many seconds.
    Finite(Seconds),
    /// The candidate is no worse in both embodied energy and power. With
    /// `equivalent` set, the two are identical.
    DominatedByCandidate { equivalent: bool },
    /// Equal embodied energy but the candidate draws more power.
    DominatedByIncumbent,
    /// The candidate costs more to build and saves no power: it never pays back.
    Never,
}

/// Which system a verdict favours.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preference {
    Candidate,
    Incumbent,
    Either,
    DependsOnServiceTime,
}

impl TimeResult {
    /// Seconds until the candidate is at least as good, where defined.
    pub fn seconds(&self) -> Option<Seconds> {
        match *self {
            TimeResult::Finite(t) => Some(t),
            TimeResult::DominatedByCandidate { .. } => Some(Seconds::ZERO),
            TimeResult::DominatedByIncumbent | TimeResult::Never => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, TimeResult::Finite(_))
    }

    pub fn preference(&self) -> Preference {
        match self {
            TimeResult::Finite(_) => Preference::DependsOnServiceTime,
            TimeResult::DominatedByCandidate { equivalent: true } => Preference::Either,
            TimeResult::DominatedByCandidate { equivalent: false } => Preference::Candidate,
            TimeResult::DominatedByIncumbent | TimeResult::Never => Preference::Incumbent,
        }
    }

    /// Surface cell text: days to one decimal, or a verdict word.
    pub fn render_days(&self) -> String {
        match self {
            TimeResult::Finite(t) => format!("{:.1}", t.days()),
            TimeResult::DominatedByCandidate { equivalent: true } => "equivalent".into(),
            TimeResult::DominatedByCandidate { equivalent: false } => "dominated".into(),
            TimeResult::DominatedByIncumbent | TimeResult::Never => "never".into(),
        }
    }
}

/// The four terms of a two-system comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonInput {
    pub m0: Joules,
    pub m1: Joules,
    pub p0: Watts,
    pub p1: Watts,
    pub labels: (String, String),
}

impl ComparisonInput {
    pub fn new(m0: Joules, m1: Joules, p0: Watts, p1: Watts) -> Result<Self, TradeoffError> {
        for (field, value) in [("m0", m0.value()), ("m1", m1.value()), ("p0", p0.value()), ("p1", p1.value())] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(TradeoffError::InvalidTerm { field, value });
            }
        }
        Ok(Self { m0, m1, p0, p1, labels: ("incumbent".into(), "candidate".into()) })
    }

    pub fn with_labels(mut self, incumbent: impl Into<String>, candidate: impl Into<String>) -> Self {
        self.labels = (incumbent.into(), candidate.into());
        self
    }

    /// Exchanges the roles of the two systems.
    pub fn swapped(&self) -> Self {
        Self {
            m0: self.m1,
            m1: self.m0,
            p0: self.p1,
            p1: self.p0,
            labels: (self.labels.1.clone(), self.labels.0.clone()),
        }
    }
}

fn classify(m0: f64, m1: f64, p0: f64, p1: f64) -> TimeResult {
    if m1 == m0 && p1 == p0 {
        return TimeResult::DominatedByCandidate { equivalent: true };
    }
    if m1 <= m0 && p1 <= p0 {
        return TimeResult::DominatedByCandidate { equivalent: false };
    }
    if m1 > m0 && p1 >= p0 {
        return TimeResult::Never;
    }
    if m1 == m0 {
        // p1 > p0 here
        return TimeResult::DominatedByIncumbent;
    }
    // Genuine tradeoff: the signs of (m1 - m0) and (p0 - p1) agree.
    TimeResult::Finite(Seconds((m1 - m0) / (p0 - p1)))
}

pub fn indifference_time(input: &ComparisonInput) -> TimeResult {
    classify(input.m0.value(), input.m1.value(), input.p0.value(), input.p1.value())
}

/// Indifference time with the incumbent's embodied energy treated as sunk.
pub fn breakeven_time(input: &ComparisonInput) -> TimeResult {
    classify(0.0, input.m1.value(), input.p0.value(), input.p1.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalysisMode {
    Breakeven,
    Indifference,
}

impl AnalysisMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AnalysisMode::Breakeven => "breakeven",
            AnalysisMode::Indifference => "indifference",
        }
    }

    pub fn evaluate(self, input: &ComparisonInput) -> TimeResult {
        match self {
            AnalysisMode::Breakeven => breakeven_time(input),
            AnalysisMode::Indifference => indifference_time(input),
        }
    }
}

/// Whether embodied energy is counted per die or per multi-die module.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbodiedBasis {
    Die,
    Module,
}

impl EmbodiedBasis {
    pub fn as_str(self) -> &'static str {
        match self {
            EmbodiedBasis::Die => "die",
            EmbodiedBasis::Module => "module",
        }
    }

    pub fn embodied_energy(self, device: &DeviceSpec) -> Joules {
        let per_die = embodied_energy_per_die(device);
        match self {
            EmbodiedBasis::Die => per_die,
            EmbodiedBasis::Module => per_die * f64::from(device.dies_per_module()),
        }
    }
}

/// How a shared usage scenario maps onto each system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ComparisonMode {
    /// Both systems are active for the scenario's activity fraction.
    IsoPower,
    /// Both systems serve the same demand. The activity axis scales the
    /// reference demand; each system's active fraction is demand over its own
    /// throughput. Without a reference, the slower system's capability is used.
    IsoWork { demand: Option<Throughput> },
}

impl ComparisonMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ComparisonMode::IsoPower => "iso_power",
            ComparisonMode::IsoWork { .. } => "iso_work",
        }
    }
}

/// One side of a comparison: a die, the workload it runs, and its power states.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub device: DeviceSpec,
    pub workload: WorkloadRecord,
    pub profile: PowerProfile,
}

impl SystemConfig {
    pub fn new(device: DeviceSpec, workload: WorkloadRecord, profile: PowerProfile) -> Result<Self, TradeoffError> {
        if workload.device != device.name() {
            return Err(TradeoffError::DeviceMismatch {
                benchmark: workload.benchmark.clone(),
                workload_device: workload.device.clone(),
                device: device.name().into(),
            });
        }
        Ok(Self { device, workload, profile })
    }

    pub fn name(&self) -> &str {
        self.device.name()
    }
}

/// Evenly spaced axis values, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl AxisSpec {
    pub fn values(&self) -> Vec<f64> {
        match self.steps {
            0 => Vec::new(),
            1 => alloc::vec![self.from],
            n => {
                let span = self.to - self.from;
                let last = (n - 1) as f64;
                (0..n).map(|i| if i == n - 1 { self.to } else { self.from + span * (i as f64) / last }).collect()
            }
        }
    }
}

fn check_axis(axis: &'static str, values: &[f64], valid: impl Fn(f64) -> bool) -> Result<(), TradeoffError> {
    let invalid = |reason: String| TradeoffError::InvalidAxis { axis, reason };
    if values.is_empty() {
        return Err(invalid("no values".into()));
    }
    if let Some(v) = values.iter().find(|v| !valid(**v)) {
        return Err(invalid(format!("value {v} out of range")));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("values must be strictly increasing".into()));
    }
    Ok(())
}

/// A validated sweep: two systems, two axes and the evaluation rules.
#[derive(Debug, Clone)]
pub struct SweepPlan {
    incumbent: SystemConfig,
    candidate: SystemConfig,
    activity: Vec<f64>,
    sleep: Vec<f64>,
    analysis: AnalysisMode,
    basis: EmbodiedBasis,
    comparison: ComparisonMode,
    reference_demand: f64,
    m0: Joules,
    m1: Joules,
}

impl SweepPlan {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        incumbent: SystemConfig,
        candidate: SystemConfig,
        activity: Vec<f64>,
        sleep: Vec<f64>,
        analysis: AnalysisMode,
        basis: EmbodiedBasis,
        comparison: ComparisonMode,
        allow_cross_study: bool,
    ) -> Result<Self, TradeoffError> {
        check_axis("activity", &activity, |a| a > 0.0 && a <= 1.0)?;
        check_axis("sleep", &sleep, |s| (0.0..=1.0).contains(&s))?;

        if let Comparability::Incomparable { a_study, b_study } =
            check_study_compatibility(&incumbent.device, &candidate.device)
        {
            if !allow_cross_study {
                return Err(TradeoffError::CrossStudy {
                    a: incumbent.name().into(),
                    a_study,
                    b: candidate.name().into(),
                    b_study,
                });
            }
        }

        let t0 = incumbent.workload.throughput();
        let t1 = candidate.workload.throughput();
        let reference_demand = match comparison {
            ComparisonMode::IsoPower => 0.0,
            ComparisonMode::IsoWork { demand } => {
                if t0.unit != t1.unit {
                    return Err(TradeoffError::UnitMismatch(t0.unit, t1.unit));
                }
                match demand {
                    Some(d) if d.unit != t0.unit => return Err(TradeoffError::UnitMismatch(d.unit, t0.unit)),
                    Some(d) => d.value,
                    None => t0.value.min(t1.value),
                }
            }
        };

        let m0 = basis.embodied_energy(&incumbent.device);
        let m1 = basis.embodied_energy(&candidate.device);
        Ok(Self { incumbent, candidate, activity, sleep, analysis, basis, comparison, reference_demand, m0, m1 })
    }

    pub fn activity_axis(&self) -> &[f64] {
        &self.activity
    }
    pub fn sleep_axis(&self) -> &[f64] {
        &self.sleep
    }
    pub fn analysis(&self) -> AnalysisMode {
        self.analysis
    }
    pub fn basis(&self) -> EmbodiedBasis {
        self.basis
    }
    pub fn comparison(&self) -> ComparisonMode {
        self.comparison
    }
    pub fn incumbent(&self) -> &SystemConfig {
        &self.incumbent
    }
    pub fn candidate(&self) -> &SystemConfig {
        &self.candidate
    }
    /// Demand at activity 1 in iso-work mode (zero in iso-power mode).
    pub fn reference_demand(&self) -> f64 {
        self.reference_demand
    }
    pub fn embodied(&self) -> (Joules, Joules) {
        (self.m0, self.m1)
    }

    pub fn cell_count(&self) -> usize {
        self.activity.len() * self.sleep.len()
    }

    /// Row-major position of flat cell `k`: (activity index, sleep index).
    pub fn position(&self, k: usize) -> (usize, usize) {
        (k / self.sleep.len(), k % self.sleep.len())
    }

    fn scenario_for(&self, system: &SystemConfig, activity: f64, sleep: f64) -> Result<UsageScenario, TradeoffError> {
        let a = match self.comparison {
            ComparisonMode::IsoPower => activity,
            ComparisonMode::IsoWork { .. } => {
                let demand = activity * self.reference_demand;
                let capability = system.workload.throughput().value;
                derive_activity_from_demand(demand, capability).map_err(|e| match e {
                    UsageError::Infeasible { demand, capability } => TradeoffError::InfeasibleCell {
                        activity,
                        sleep,
                        device: system.name().into(),
                        demand,
                        capability,
                    },
                    other => other.into(),
                })?
            }
        };
        Ok(UsageScenario::new(a, sleep)?)
    }

    /// Average power of (incumbent, candidate) at one grid point.
    pub fn powers_at(&self, activity: f64, sleep: f64) -> Result<(Watts, Watts), TradeoffError> {
        let s0 = self.scenario_for(&self.incumbent, activity, sleep)?;
        let s1 = self.scenario_for(&self.candidate, activity, sleep)?;
        Ok((average_power(&self.incumbent.profile, &s0), average_power(&self.candidate.profile, &s1)))
    }

    /// Evaluates a single point, which need not lie on the axes.
    pub fn evaluate_at(&self, activity: f64, sleep: f64) -> Result<TimeResult, TradeoffError> {
        let (p0, p1) = self.powers_at(activity, sleep)?;
        let input = ComparisonInput::new(self.m0, self.m1, p0, p1)?;
        Ok(self.analysis.evaluate(&input))
    }

    pub fn cell(&self, i: usize, j: usize) -> Result<TimeResult, TradeoffError> {
        self.evaluate_at(self.activity[i], self.sleep[j])
    }

    /// Assembles a surface from row-major cell results.
    pub fn surface(&self, cells: Vec<TimeResult>) -> SweepSurface {
        assert_eq!(cells.len(), self.cell_count(), "cell count does not match axes");
        SweepSurface {
            activity: self.activity.clone(),
            sleep: self.sleep.clone(),
            cells,
            analysis: self.analysis,
            basis: self.basis,
            comparison: self.comparison.as_str(),
            labels: (self.incumbent.name().into(), self.candidate.name().into()),
        }
    }

    /// Evaluates every cell in row-major order.
    pub fn evaluate(&self) -> Result<SweepSurface, TradeoffError> {
        let cells = (0..self.cell_count())
            .map(|k| {
                let (i, j) = self.position(k);
                self.cell(i, j)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.surface(cells))
    }
}

/// Convenience wrapper: validate and evaluate in one call.
#[allow(clippy::too_many_arguments)]
pub fn sweep(
    incumbent: SystemConfig,
    candidate: SystemConfig,
    activity: Vec<f64>,
    sleep: Vec<f64>,
    analysis: AnalysisMode,
    basis: EmbodiedBasis,
    comparison: ComparisonMode,
    allow_cross_study: bool,
) -> Result<SweepSurface, TradeoffError> {
    SweepPlan::new(incumbent, candidate, activity, sleep, analysis, basis, comparison, allow_cross_study)?.evaluate()
}

/// Time results over an activity × sleep grid, row-major by activity.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSurface {
    activity: Vec<f64>,
    sleep: Vec<f64>,
    cells: Vec<TimeResult>,
    pub analysis: AnalysisMode,
    pub basis: EmbodiedBasis,
    pub comparison: &'static str,
    pub labels: (String, String),
}

impl SweepSurface {
    pub fn activity_axis(&self) -> &[f64] {
        &self.activity
    }
    pub fn sleep_axis(&self) -> &[f64] {
        &self.sleep
    }
    pub fn cells(&self) -> &[TimeResult] {
        &self.cells
    }

    pub fn get(&self, activity_idx: usize, sleep_idx: usize) -> TimeResult {
        self.cells[activity_idx * self.sleep.len() + sleep_idx]
    }

    /// Cell at the highest activity and lowest sleep ratio.
    pub fn full_activity_corner(&self) -> TimeResult {
        self.get(self.activity.len() - 1, 0)
    }
}

/// CSV rendering of a surface.
///
/// The header row holds the sleep-axis values; each following row starts with
/// its activity value. Rows run from the highest activity down, so the text
/// reads like the heatmap it feeds. Cells are days to one decimal or a
/// verdict word (`dominated`, `equivalent`, `never`).
pub fn render_surface_csv(surface: &SweepSurface) -> String {
    let mut out = String::from("activity\\sleep");
    for s in &surface.sleep {
        let _ = write!(out, ",{s:.4}");
    }
    out.push('\n');
    for i in (0..surface.activity.len()).rev() {
        let _ = write!(out, "{:.4}", surface.activity[i]);
        for j in 0..surface.sleep.len() {
            out.push(',');
            out.push_str(&surface.get(i, j).render_days());
        }
        out.push('\n');
    }
    out
}
