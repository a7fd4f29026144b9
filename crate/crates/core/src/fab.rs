//! Embodied energy and carbon of a die from wafer-level process energy.
//!
//! The process energy of a whole wafer (PE, kWh/wafer) is split evenly over
//! the dies it yields. Dies per wafer is taken as published; the gross-area
//! estimator here is only a cross-check.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::grid::CarbonIntensity;
use crate::units::{GramsCo2e, Joules, KilowattHours};

pub const DEFAULT_WAFER_DIAMETER_MM: f64 = 300.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FabError {
    #[error("{field} must be positive (got {value})")]
    NonPositive { field: &'static str, value: f64 },
    #[error("study `{study}` has inverted node range {min}..{max} nm")]
    InvertedNodeRange { study: String, min: u32, max: u32 },
    #[error("device `{device}` references unknown study `{study}`")]
    UnknownStudy { device: String, study: String },
    #[error("device `{device}` at {node} nm is outside study `{study}` range {min}..={max} nm")]
    NodeOutsideStudy { device: String, node: u32, study: String, min: u32, max: u32 },
    #[error("device `{device}`: {dies} dies of {die_mm2} mm2 exceed the {wafer_mm2:.0} mm2 wafer")]
    ExceedsWafer { device: String, dies: u32, die_mm2: f64, wafer_mm2: f64 },
    #[error("at least one grid mix is required")]
    NoMixes,
}

fn positive(field: &'static str, value: f64) -> Result<f64, FabError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(FabError::NonPositive { field, value })
    }
}

/// A published process-LCA study and the technology nodes it covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LcaStudy {
    pub id: String,
    pub node_min_nm: u32,
    pub node_max_nm: u32,
}

impl LcaStudy {
    pub fn new(id: impl Into<String>, node_min_nm: u32, node_max_nm: u32) -> Result<Self, FabError> {
        let id = id.into();
        if node_min_nm > node_max_nm {
            return Err(FabError::InvertedNodeRange { study: id, min: node_min_nm, max: node_max_nm });
        }
        Ok(Self { id, node_min_nm, node_max_nm })
    }

    pub fn covers(&self, node_nm: u32) -> bool {
        (self.node_min_nm..=self.node_max_nm).contains(&node_nm)
    }
}

/// Unvalidated device description; see [`DeviceSpec::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceParams {
    pub name: String,
    pub node_nm: u32,
    pub study: String,
    pub die_mm2: f64,
    pub dies_per_wafer: u32,
    pub wafer_energy: KilowattHours,
    /// The die needs the extra magnetic-stack masks (lithography, dry etch and
    /// deposition). Recorded for provenance; the energy is already in PE.
    pub spintronics: bool,
    pub dies_per_module: u32,
    pub wafer_diameter_mm: f64,
}

impl DeviceParams {
    pub fn new(
        name: impl Into<String>,
        node_nm: u32,
        study: impl Into<String>,
        die_mm2: f64,
        dies_per_wafer: u32,
        pe_kwh_per_wafer: f64,
    ) -> Self {
        Self {
            name: name.into(),
            node_nm,
            study: study.into(),
            die_mm2,
            dies_per_wafer,
            wafer_energy: KilowattHours(pe_kwh_per_wafer),
            spintronics: false,
            dies_per_module: 1,
            wafer_diameter_mm: DEFAULT_WAFER_DIAMETER_MM,
        }
    }

    pub fn spintronics(mut self, yes: bool) -> Self {
        self.spintronics = yes;
        self
    }

    pub fn dies_per_module(mut self, n: u32) -> Self {
        self.dies_per_module = n;
        self
    }
}

/// One accelerator or memory die, validated against its LCA study.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceSpec {
    params: DeviceParams,
}

impl DeviceSpec {
    pub fn new(params: DeviceParams, studies: &[LcaStudy]) -> Result<Self, FabError> {
        positive("tech node", f64::from(params.node_nm))?;
        positive("die area", params.die_mm2)?;
        positive("dies per wafer", f64::from(params.dies_per_wafer))?;
        positive("wafer energy", params.wafer_energy.value())?;
        positive("dies per module", f64::from(params.dies_per_module))?;
        positive("wafer diameter", params.wafer_diameter_mm)?;

        let study = studies
            .iter()
            .find(|s| s.id == params.study)
            .ok_or_else(|| FabError::UnknownStudy { device: params.name.clone(), study: params.study.clone() })?;
        if !study.covers(params.node_nm) {
            return Err(FabError::NodeOutsideStudy {
                device: params.name.clone(),
                node: params.node_nm,
                study: study.id.clone(),
                min: study.node_min_nm,
                max: study.node_max_nm,
            });
        }

        let wafer_mm2 = wafer_area_mm2(params.wafer_diameter_mm);
        if params.die_mm2 * f64::from(params.dies_per_wafer) > wafer_mm2 {
            return Err(FabError::ExceedsWafer {
                device: params.name.clone(),
                dies: params.dies_per_wafer,
                die_mm2: params.die_mm2,
                wafer_mm2,
            });
        }
        Ok(Self { params })
    }

    pub fn name(&self) -> &str {
        &self.params.name
    }
    pub fn node_nm(&self) -> u32 {
        self.params.node_nm
    }
    pub fn study(&self) -> &str {
        &self.params.study
    }
    pub fn die_mm2(&self) -> f64 {
        self.params.die_mm2
    }
    pub fn dies_per_wafer(&self) -> u32 {
        self.params.dies_per_wafer
    }
    pub fn wafer_energy(&self) -> KilowattHours {
        self.params.wafer_energy
    }
    pub fn spintronics(&self) -> bool {
        self.params.spintronics
    }
    pub fn dies_per_module(&self) -> u32 {
        self.params.dies_per_module
    }
    pub fn wafer_diameter_mm(&self) -> f64 {
        self.params.wafer_diameter_mm
    }

    /// Process energy attributed to one die.
    pub fn energy_per_die_kwh(&self) -> KilowattHours {
        KilowattHours(self.params.wafer_energy.value() / f64::from(self.params.dies_per_wafer))
    }
}

pub fn wafer_area_mm2(diameter_mm: f64) -> f64 {
    let r = diameter_mm / 2.0;
    PI * r * r
}

/// Embodied energy per die, in joules (render as MJ).
pub fn embodied_energy_per_die(device: &DeviceSpec) -> Joules {
    device.energy_per_die_kwh().to_joules()
}

/// Embodied carbon per die when the fab runs on `mix`.
pub fn embodied_carbon_per_die(device: &DeviceSpec, mix: &CarbonIntensity) -> GramsCo2e {
    mix.emissions(device.energy_per_die_kwh())
}

/// Gross dies per wafer, `floor(wafer area / die area)`, with no edge loss.
pub fn estimate_dies_per_wafer(die_mm2: f64, wafer_diameter_mm: f64) -> Result<u32, FabError> {
    positive("die area", die_mm2)?;
    positive("wafer diameter", wafer_diameter_mm)?;
    // truncation of a positive finite value is floor
    Ok((wafer_area_mm2(wafer_diameter_mm) / die_mm2) as u32)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionalCarbon {
    pub region: String,
    pub grams: GramsCo2e,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbodiedFootprint {
    pub device: String,
    pub dies_per_module: u32,
    pub energy_per_die: Joules,
    pub energy_per_module: Joules,
    pub carbon_per_die: Vec<RegionalCarbon>,
    pub carbon_per_module: Vec<RegionalCarbon>,
}

impl EmbodiedFootprint {
    pub fn carbon_per_die_in(&self, region: &str) -> Option<GramsCo2e> {
        self.carbon_per_die.iter().find(|c| c.region == region).map(|c| c.grams)
    }

    pub fn carbon_per_module_in(&self, region: &str) -> Option<GramsCo2e> {
        self.carbon_per_module.iter().find(|c| c.region == region).map(|c| c.grams)
    }
}

pub fn embodied_footprint(device: &DeviceSpec, mixes: &[CarbonIntensity]) -> Result<EmbodiedFootprint, FabError> {
    if mixes.is_empty() {
        return Err(FabError::NoMixes);
    }
    let n = f64::from(device.dies_per_module());
    let energy_per_die = embodied_energy_per_die(device);
    let carbon_per_die: Vec<RegionalCarbon> = mixes
        .iter()
        .map(|mix| RegionalCarbon { region: mix.region.clone(), grams: embodied_carbon_per_die(device, mix) })
        .collect();
    let carbon_per_module =
        carbon_per_die.iter().map(|c| RegionalCarbon { region: c.region.clone(), grams: c.grams * n }).collect();
    Ok(EmbodiedFootprint {
        device: device.name().into(),
        dies_per_module: device.dies_per_module(),
        energy_per_die,
        energy_per_module: energy_per_die * n,
        carbon_per_die,
        carbon_per_module,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Comparability {
    Comparable,
    Incomparable { a_study: String, b_study: String },
}

impl Comparability {
    pub fn is_comparable(&self) -> bool {
        matches!(self, Comparability::Comparable)
    }
}

/// Two devices may only be compared when their embodied figures come from the
/// same LCA study.
pub fn check_study_compatibility(a: &DeviceSpec, b: &DeviceSpec) -> Comparability {
    if a.study() == b.study() {
        Comparability::Comparable
    } else {
        Comparability::Incomparable { a_study: a.study().into(), b_study: b.study().into() }
    }
}

/// MJ to two decimals.
pub fn render_megajoules(energy: Joules) -> String {
    format!("{:.2}", energy.megajoules())
}

/// Whole grams.
pub fn render_grams(mass: GramsCo2e) -> String {
    format!("{:.0}", mass.value())
}
