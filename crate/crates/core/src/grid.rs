//! Regional grid carbon intensity.
//!
//! A region's intensity is the share-weighted sum of per-source emission
//! factors. Shares are used as given: a region whose published shares add up
//! to 102% is not rescaled, because the published mixes are the raw weighted
//! sums.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::units::{GramsCo2e, KilowattHours};

/// Share sums outside this band are rejected as nonsense input.
pub const SHARE_SUM_HARD_BAND: (f64, f64) = (0.95, 1.05);
/// Share sums outside this band (but inside the hard band) produce a warning.
pub const SHARE_SUM_WARN_BAND: (f64, f64) = (0.99, 1.01);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("unknown generation source `{source_name}` in region `{region}`")]
    UnknownSource { region: String, source_name: String },
    #[error("share {share} for `{source_name}` in region `{region}` is outside [0, 1]")]
    ShareOutOfRange { region: String, source_name: String, share: f64 },
    #[error("emission factor {factor} for `{source_name}` must be finite and nonnegative")]
    InvalidFactor { source_name: String, factor: f64 },
    #[error("duplicate generation source `{0}`")]
    DuplicateSource(String),
    #[error("carbon intensity {0} must be finite and nonnegative")]
    InvalidIntensity(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmissionFactor {
    pub source: String,
    /// gCO2eq per kWh generated.
    pub g_per_kwh: f64,
}

/// Per-source life-cycle emission factors, in insertion order.
///
/// Source names are matched case-insensitively.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmissionFactorTable {
    entries: Vec<EmissionFactor>,
}

impl EmissionFactorTable {
    pub fn new<I, S>(entries: I) -> Result<Self, GridError>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut table = Self::default();
        for (source, factor) in entries {
            table.insert(source.into(), factor)?;
        }
        Ok(table)
    }

    fn insert(&mut self, source: String, factor: f64) -> Result<(), GridError> {
        if !(factor.is_finite() && factor >= 0.0) {
            return Err(GridError::InvalidFactor { source_name: source, factor });
        }
        if self.get(&source).is_some() {
            return Err(GridError::DuplicateSource(source));
        }
        self.entries.push(EmissionFactor { source, g_per_kwh: factor });
        Ok(())
    }

    pub fn get(&self, source: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.source.eq_ignore_ascii_case(source)).map(|e| e.g_per_kwh)
    }

    pub fn entries(&self) -> &[EmissionFactor] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Generation shares of one region.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionProfile {
    pub region: String,
    pub shares: Vec<(String, f64)>,
}

impl RegionProfile {
    pub fn new<I, S>(region: impl Into<String>, shares: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        Self { region: region.into(), shares: shares.into_iter().map(|(s, v)| (s.into(), v)).collect() }
    }

    pub fn share_sum(&self) -> f64 {
        self.shares.iter().map(|(_, s)| s).sum()
    }

    pub fn share_of(&self, source: &str) -> Option<f64> {
        self.shares.iter().find(|(s, _)| s.eq_ignore_ascii_case(source)).map(|(_, v)| *v)
    }
}

/// Grid carbon intensity of a region, in gCO2eq per kWh.
#[derive(Debug, Clone, PartialEq)]
pub struct CarbonIntensity {
    pub region: String,
    value: f64,
}

impl CarbonIntensity {
    pub fn new(region: impl Into<String>, g_per_kwh: f64) -> Result<Self, GridError> {
        if !(g_per_kwh.is_finite() && g_per_kwh >= 0.0) {
            return Err(GridError::InvalidIntensity(g_per_kwh));
        }
        Ok(Self { region: region.into(), value: g_per_kwh })
    }

    pub fn g_per_kwh(&self) -> f64 {
        self.value
    }

    /// Emissions from consuming `energy` on this grid.
    pub fn emissions(&self, energy: KilowattHours) -> GramsCo2e {
        GramsCo2e(energy.value() * self.value)
    }

    /// Integer gCO2eq/kWh, as printed in mix tables.
    pub fn rendered(&self) -> String {
        format!("{:.0}", self.value)
    }
}

/// Share-weighted sum of emission factors over the profile's sources.
pub fn compute_mix(profile: &RegionProfile, factors: &EmissionFactorTable) -> Result<CarbonIntensity, GridError> {
    let mut total = 0.0;
    for (source, share) in &profile.shares {
        if !(0.0..=1.0).contains(share) {
            return Err(GridError::ShareOutOfRange {
                region: profile.region.clone(),
                source_name: source.clone(),
                share: *share,
            });
        }
        let factor = factors
            .get(source)
            .ok_or_else(|| GridError::UnknownSource { region: profile.region.clone(), source_name: source.clone() })?;
        total += share * factor;
    }
    CarbonIntensity::new(profile.region.clone(), total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Finding {
    pub severity: Severity,
    pub message: String,
}

impl Finding {
    fn warning(message: String) -> Self {
        Self { severity: Severity::Warning, message }
    }

    fn error(message: String) -> Self {
        Self { severity: Severity::Error, message }
    }
}

/// Checks a profile without evaluating it. Problems are returned as data.
pub fn validate_profile(profile: &RegionProfile, factors: &EmissionFactorTable) -> Vec<Finding> {
    let mut findings = Vec::new();
    for (source, share) in &profile.shares {
        if factors.get(source).is_none() {
            findings.push(Finding::error(format!("unknown source `{source}`")));
        }
        if !(0.0..=1.0).contains(share) {
            findings.push(Finding::error(format!("share {share} for `{source}` outside [0, 1]")));
        }
    }

    let sum = profile.share_sum();
    let (hard_lo, hard_hi) = SHARE_SUM_HARD_BAND;
    let (warn_lo, warn_hi) = SHARE_SUM_WARN_BAND;
    if !(hard_lo..=hard_hi).contains(&sum) {
        findings.push(Finding::error(format!("share sum {sum:.2} outside [{hard_lo}, {hard_hi}]")));
    } else if !(warn_lo..=warn_hi).contains(&sum) {
        findings.push(Finding::warning(format!("share sum {sum:.2}")));
    }
    findings
}
