//! Usage scenarios and time-averaged operational power.
//!
//! Wall time is split three ways. A fraction `a` (the activity ratio) is spent
//! computing at active power. Of the remaining `1 - a`, a fraction `s` (the
//! sleep ratio) is spent asleep and the rest idle:
//!
//! ```text
//! P_avg = a * P_active + (1 - a) * (s * P_sleep + (1 - s) * P_idle)
//! ```

use crate::units::Watts;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum UsageError {
    #[error("power levels must satisfy 0 <= sleep ({sleep}) <= idle ({idle}) <= active ({active})")]
    PowerOrdering { active: f64, idle: f64, sleep: f64 },
    #[error("activity ratio {0} must lie in (0, 1]")]
    ActivityRatio(f64),
    #[error("sleep ratio {0} must lie in [0, 1]")]
    SleepRatio(f64),
    #[error("standby fraction {0} must lie in [0, 1]")]
    StandbyFraction(f64),
    #[error("demand {demand} exceeds device capability {capability}")]
    Infeasible { demand: f64, capability: f64 },
    #[error("demand {0} must be finite and nonnegative")]
    NegativeDemand(f64),
    #[error("capability {0} must be positive")]
    NonPositiveCapability(f64),
}

/// Power drawn in each of the three device states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerProfile {
    active: Watts,
    idle: Watts,
    sleep: Watts,
}

impl PowerProfile {
    pub fn new(active: f64, idle: f64, sleep: f64) -> Result<Self, UsageError> {
        let ordered =
            [active, idle, sleep].iter().all(|p| p.is_finite()) && 0.0 <= sleep && sleep <= idle && idle <= active;
        if !ordered {
            return Err(UsageError::PowerOrdering { active, idle, sleep });
        }
        Ok(Self { active: Watts(active), idle: Watts(idle), sleep: Watts(sleep) })
    }

    /// Idle and sleep power as fixed fractions of the active power.
    pub fn from_active(active: Watts, standby: StandbyFractions) -> Result<Self, UsageError> {
        Self::new(active.value(), active.value() * standby.idle, active.value() * standby.sleep)
    }

    pub fn active(&self) -> Watts {
        self.active
    }
    pub fn idle(&self) -> Watts {
        self.idle
    }
    pub fn sleep(&self) -> Watts {
        self.sleep
    }
}

/// Idle and sleep power relative to active power.
///
/// No published device data gives these; they are explicit inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandbyFractions {
    pub idle: f64,
    pub sleep: f64,
}

impl StandbyFractions {
    /// Placeholder for volatile CMOS parts: idle 25%, sleep 5% of active.
    pub const CMOS: Self = Self { idle: 0.25, sleep: 0.05 };
    /// Placeholder for non-volatile parts, which need no refresh or retention
    /// power: idle and sleep both 2% of active.
    pub const NON_VOLATILE: Self = Self { idle: 0.02, sleep: 0.02 };

    pub fn new(idle: f64, sleep: f64) -> Result<Self, UsageError> {
        for f in [idle, sleep] {
            if !(0.0..=1.0).contains(&f) {
                return Err(UsageError::StandbyFraction(f));
            }
        }
        if sleep > idle {
            return Err(UsageError::PowerOrdering { active: 1.0, idle, sleep });
        }
        Ok(Self { idle, sleep })
    }
}

/// Activity ratio and sleep ratio, both as fractions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UsageScenario {
    activity: f64,
    sleep: f64,
}

impl UsageScenario {
    pub fn new(activity: f64, sleep: f64) -> Result<Self, UsageError> {
        if !(activity > 0.0 && activity <= 1.0) {
            return Err(UsageError::ActivityRatio(activity));
        }
        if !(0.0..=1.0).contains(&sleep) {
            return Err(UsageError::SleepRatio(sleep));
        }
        Ok(Self { activity, sleep })
    }

    pub fn activity(&self) -> f64 {
        self.activity
    }
    pub fn sleep(&self) -> f64 {
        self.sleep
    }
}

pub fn average_power(profile: &PowerProfile, scenario: &UsageScenario) -> Watts {
    let a = scenario.activity;
    let s = scenario.sleep;
    let standby = s * profile.sleep.value() + (1.0 - s) * profile.idle.value();
    Watts(a * profile.active.value() + (1.0 - a) * standby)
}

/// Fraction of wall time a device must be active to serve `demand` when it
/// can process `capability` (same work unit per second).
pub fn derive_activity_from_demand(demand: f64, capability: f64) -> Result<f64, UsageError> {
    if !(capability.is_finite() && capability > 0.0) {
        return Err(UsageError::NonPositiveCapability(capability));
    }
    if !(demand.is_finite() && demand >= 0.0) {
        return Err(UsageError::NegativeDemand(demand));
    }
    if demand > capability {
        return Err(UsageError::Infeasible { demand, capability });
    }
    Ok(demand / capability)
}
