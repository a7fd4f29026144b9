//! JSON databases and their loaders.
//!
//! Every loader hashes the bytes it read so that emitted artifacts can name
//! their exact inputs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use greenedge_core::fab::DeviceParams;
use greenedge_core::grid::{compute_mix, validate_profile};
use greenedge_core::tradeoff::{AnalysisMode, AxisSpec, ComparisonMode, EmbodiedBasis};
use greenedge_core::workload::{ConvLayerSpec, FeatureShape, Layer, OpaqueLayer};
use greenedge_core::{
    CarbonIntensity, DeviceSpec, EmissionFactorTable, Finding, LcaStudy, NetworkSpec, Phase, RegionProfile, Severity,
    StandbyFractions, Throughput, ThroughputUnit, Watts, WorkloadRecord,
};

use crate::error::{Error, Result};

/// A file that was read, by name and content hash.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct InputFile {
    pub name: String,
    pub sha256: String,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<(T, InputFile)> {
    let bytes = fs::read(path).map_err(|source| Error::Read { path: path.into(), source })?;
    let value = serde_json::from_slice(&bytes).map_err(|source| Error::Parse { path: path.into(), source })?;
    let sha256 = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
    let name = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
    Ok((value, InputFile { name, sha256 }))
}

fn invalid(path: &Path, message: impl std::fmt::Display) -> Error {
    Error::Invalid { path: path.into(), message: message.to_string() }
}

fn unknown(kind: &'static str, name: &str, known: impl IntoIterator<Item = impl Into<String>>) -> Error {
    Error::Unknown { kind, name: name.into(), known: known.into_iter().map(Into::into).collect() }
}

// ---- grids ----

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    factors: serde_json::Map<String, serde_json::Value>,
    regions: Vec<RegionEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RegionEntry {
    region: String,
    shares: serde_json::Map<String, serde_json::Value>,
}

fn numbers(path: &Path, map: serde_json::Map<String, serde_json::Value>) -> Result<Vec<(String, f64)>> {
    map.into_iter()
        .map(|(k, v)| match v.as_f64() {
            Some(x) => Ok((k, x)),
            None => Err(invalid(path, format!("`{k}` must be a number"))),
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct GridDb {
    pub factors: EmissionFactorTable,
    pub regions: Vec<RegionProfile>,
    pub mixes: Vec<CarbonIntensity>,
    /// Warning-grade findings, prefixed with their region.
    pub warnings: Vec<String>,
    pub input: InputFile,
}

impl GridDb {
    pub fn load(path: &Path) -> Result<Self> {
        let (raw, input): (GridFile, _) = read_json(path)?;
        let factors = EmissionFactorTable::new(numbers(path, raw.factors)?).map_err(|e| invalid(path, e))?;
        let mut regions = Vec::new();
        let mut warnings = Vec::new();
        for entry in raw.regions {
            if regions.iter().any(|r: &RegionProfile| r.region == entry.region) {
                return Err(invalid(path, format!("duplicate region `{}`", entry.region)));
            }
            let profile = RegionProfile::new(entry.region, numbers(path, entry.shares)?);
            for Finding { severity, message } in validate_profile(&profile, &factors) {
                match severity {
                    Severity::Error => return Err(invalid(path, format!("region {}: {message}", profile.region))),
                    Severity::Warning => warnings.push(format!("region {}: {message}", profile.region)),
                }
            }
            regions.push(profile);
        }
        let mixes = regions
            .iter()
            .map(|r| compute_mix(r, &factors))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| invalid(path, e))?;
        Ok(Self { factors, regions, mixes, warnings, input })
    }

    pub fn region_names(&self) -> Vec<String> {
        self.regions.iter().map(|r| r.region.clone()).collect()
    }

    /// Index of a region, case-insensitively.
    pub fn find_region(&self, name: &str) -> Result<usize> {
        self.regions
            .iter()
            .position(|r| r.region.eq_ignore_ascii_case(name))
            .ok_or_else(|| unknown("region", name, self.region_names()))
    }
}

// ---- devices ----

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DeviceFile {
    studies: Vec<StudyJson>,
    devices: Vec<DeviceRecord>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StudyJson {
    id: String,
    node_min_nm: u32,
    node_max_nm: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DeviceRecord {
    name: String,
    label: String,
    node_nm: u32,
    study: String,
    die_mm2: f64,
    dies_per_wafer: u32,
    pe_kwh_per_wafer: f64,
    #[serde(default)]
    spintronics: bool,
    #[serde(default = "one")]
    dies_per_module: u32,
    idle_fraction: Option<f64>,
    sleep_fraction: Option<f64>,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone)]
pub struct DeviceEntry {
    pub spec: DeviceSpec,
    /// Short column label (`RM`, `GPU`, ...); not unique.
    pub label: String,
    pub standby: StandbyFractions,
}

#[derive(Debug, Clone)]
pub struct DeviceDb {
    pub studies: Vec<LcaStudy>,
    pub devices: Vec<DeviceEntry>,
    pub input: InputFile,
}

impl DeviceDb {
    pub fn load(path: &Path) -> Result<Self> {
        let (raw, input): (DeviceFile, _) = read_json(path)?;
        let studies = raw
            .studies
            .into_iter()
            .map(|s| LcaStudy::new(s.id, s.node_min_nm, s.node_max_nm).map_err(|e| invalid(path, e)))
            .collect::<Result<Vec<_>>>()?;
        let mut devices: Vec<DeviceEntry> = Vec::new();
        for d in raw.devices {
            if devices.iter().any(|e| e.spec.name() == d.name) {
                return Err(invalid(path, format!("duplicate device `{}`", d.name)));
            }
            let default = if d.spintronics { StandbyFractions::NON_VOLATILE } else { StandbyFractions::CMOS };
            let standby = StandbyFractions::new(
                d.idle_fraction.unwrap_or(default.idle),
                d.sleep_fraction.unwrap_or(default.sleep),
            )
            .map_err(|e| invalid(path, format!("device {}: {e}", d.name)))?;
            let params =
                DeviceParams::new(d.name.clone(), d.node_nm, d.study, d.die_mm2, d.dies_per_wafer, d.pe_kwh_per_wafer)
                    .spintronics(d.spintronics)
                    .dies_per_module(d.dies_per_module);
            let spec =
                DeviceSpec::new(params, &studies).map_err(|e| invalid(path, format!("device {}: {e}", d.name)))?;
            devices.push(DeviceEntry { spec, label: d.label, standby });
        }
        Ok(Self { studies, devices, input })
    }

    pub fn get(&self, name: &str) -> Result<&DeviceEntry> {
        self.devices
            .iter()
            .find(|d| d.spec.name() == name)
            .ok_or_else(|| unknown("device", name, self.devices.iter().map(|d| d.spec.name())))
    }
}

// ---- workloads ----

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WorkloadFile {
    workloads: Vec<WorkloadJson>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WorkloadJson {
    benchmark: String,
    device: String,
    phase: PhaseJson,
    throughput: ThroughputJson,
    power_w: f64,
    #[serde(default)]
    precision_note: String,
    published: Option<Published>,
}

#[derive(Deserialize, Clone, Copy)]
#[serde(rename_all = "lowercase")]
enum PhaseJson {
    Inference,
    Training,
}

#[derive(Debug, Deserialize, Clone, Copy)]
#[serde(deny_unknown_fields)]
pub struct ThroughputJson {
    unit: UnitJson,
    value: f64,
}

#[derive(Debug, Deserialize, Clone, Copy)]
#[serde(rename_all = "lowercase")]
enum UnitJson {
    Fps,
    Gflops,
}

impl From<ThroughputJson> for Throughput {
    fn from(t: ThroughputJson) -> Self {
        let unit = match t.unit {
            UnitJson::Fps => ThroughputUnit::Fps,
            UnitJson::Gflops => ThroughputUnit::Gflops,
        };
        Throughput { unit, value: t.value }
    }
}

/// Values as printed in the source table, kept for erratum checks.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Published {
    pub per_watt: Option<f64>,
    pub per_carbon: Option<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct WorkloadEntry {
    pub record: WorkloadRecord,
    pub published: Option<Published>,
}

#[derive(Debug, Clone)]
pub struct WorkloadDb {
    pub entries: Vec<WorkloadEntry>,
    pub input: InputFile,
}

impl WorkloadDb {
    pub fn load(path: &Path) -> Result<Self> {
        let (raw, input): (WorkloadFile, _) = read_json(path)?;
        let entries = raw
            .workloads
            .into_iter()
            .enumerate()
            .map(|(i, w)| {
                let phase = match w.phase {
                    PhaseJson::Inference => Phase::Inference,
                    PhaseJson::Training => Phase::Training,
                };
                let record = WorkloadRecord::new(w.benchmark, w.device, phase, w.throughput.into(), Watts(w.power_w))
                    .map_err(|e| invalid(path, format!("workload {i}: {e}")))?
                    .with_precision_note(w.precision_note);
                Ok(WorkloadEntry { record, published: w.published })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { entries, input })
    }

    /// The record for `device`, narrowed by `benchmark` when given.
    pub fn select(&self, device: &str, benchmark: Option<&str>) -> Result<&WorkloadRecord> {
        let matches: Vec<&WorkloadRecord> = self
            .entries
            .iter()
            .map(|e| &e.record)
            .filter(|r| r.device == device && benchmark.is_none_or(|b| r.benchmark == b))
            .collect();
        match matches.as_slice() {
            [one] => Ok(one),
            [] => Err(unknown(
                "workload for device",
                &match benchmark {
                    Some(b) => format!("{device}/{b}"),
                    None => device.to_string(),
                },
                self.entries.iter().map(|e| format!("{}/{}", e.record.device, e.record.benchmark)),
            )),
            many => Err(Error::Usage(format!(
                "device `{device}` has {} workloads ({}); pass --benchmark",
                many.len(),
                many.iter().map(|r| r.benchmark.as_str()).collect::<Vec<_>>().join(", ")
            ))),
        }
    }
}

// ---- networks ----

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    name: String,
    batch: u32,
    training_multiplier: Option<u64>,
    #[serde(default)]
    #[allow(dead_code)]
    source: String,
    layers: Vec<LayerJson>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerJson {
    #[serde(rename = "type")]
    kind: String,
    n: Option<u32>,
    m: Option<u32>,
    k: Option<u32>,
    r_in: Option<u32>,
    c_in: Option<u32>,
    stride: Option<u32>,
    pad: Option<u32>,
    flops: Option<u64>,
    out: Option<ShapeJson>,
}

#[derive(Deserialize, Clone, Copy)]
#[serde(deny_unknown_fields)]
struct ShapeJson {
    channels: u32,
    rows: u32,
    cols: u32,
}

impl LayerJson {
    fn into_layer(self, path: &Path, idx: usize) -> Result<Layer> {
        if self.kind != "conv" {
            let output = self.out.map(|s| FeatureShape { channels: s.channels, rows: s.rows, cols: s.cols });
            return Ok(Layer::Opaque(OpaqueLayer { tag: self.kind, flops: self.flops, output }));
        }
        let need = |v: Option<u32>, field: &str| {
            v.ok_or_else(|| invalid(path, format!("layer {idx}: conv layer needs `{field}`")))
        };
        Ok(Layer::Conv(ConvLayerSpec {
            in_channels: need(self.n, "n")?,
            out_channels: need(self.m, "m")?,
            kernel: need(self.k, "k")?,
            rows_in: need(self.r_in, "r_in")?,
            cols_in: need(self.c_in, "c_in")?,
            stride: self.stride.unwrap_or(1),
            padding: self.pad.unwrap_or(0),
        }))
    }
}

pub fn load_network(path: &Path) -> Result<(NetworkSpec, InputFile)> {
    let (raw, input): (NetworkFile, _) = read_json(path)?;
    let layers = raw.layers.into_iter().enumerate().map(|(i, l)| l.into_layer(path, i)).collect::<Result<Vec<_>>>()?;
    let mut net = NetworkSpec::new(raw.name, layers, raw.batch).map_err(|e| invalid(path, e))?;
    if let Some(m) = raw.training_multiplier {
        net = net.with_training_multiplier(m).map_err(|e| invalid(path, e))?;
    }
    Ok((net, input))
}

/// Loads one network file, or every `*.json` in a directory in name order.
pub fn load_networks(path: &Path) -> Result<Vec<(NetworkSpec, InputFile)>> {
    if path.is_dir() {
        json_files(path)?.iter().map(|p| load_network(p)).collect()
    } else {
        Ok(vec![load_network(path)?])
    }
}

/// `*.json` files directly under `dir`, sorted by path.
pub fn json_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let read_err = |source| Error::Read { path: dir.into(), source };
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(read_err)? {
        let p = entry.map_err(read_err)?.path();
        if p.extension().is_some_and(|e| e == "json") && p.is_file() {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

// ---- comparison configs ----

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Breakeven,
    Indifference,
}

impl From<ModeArg> for AnalysisMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Breakeven => AnalysisMode::Breakeven,
            ModeArg::Indifference => AnalysisMode::Indifference,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BasisArg {
    Die,
    Module,
}

impl From<BasisArg> for EmbodiedBasis {
    fn from(b: BasisArg) -> Self {
        match b {
            BasisArg::Die => EmbodiedBasis::Die,
            BasisArg::Module => EmbodiedBasis::Module,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioArg {
    IsoPower,
    IsoWork,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioJson {
    pub mode: ScenarioArg,
    pub demand: Option<ThroughputJson>,
}

impl ScenarioJson {
    pub fn to_mode(self) -> ComparisonMode {
        match self.mode {
            ScenarioArg::IsoPower => ComparisonMode::IsoPower,
            ScenarioArg::IsoWork => ComparisonMode::IsoWork { demand: self.demand.map(Into::into) },
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisJson {
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl From<AxisJson> for AxisSpec {
    fn from(a: AxisJson) -> Self {
        AxisSpec { from: a.from, to: a.to, steps: a.steps }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpecJson {
    pub activity: AxisJson,
    pub sleep: AxisJson,
}

impl Default for GridSpecJson {
    fn default() -> Self {
        Self {
            activity: AxisJson { from: 0.05, to: 1.0, steps: 20 },
            sleep: AxisJson { from: 0.0, to: 1.0, steps: 20 },
        }
    }
}

/// A comparison as written in a scenario file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonConfig {
    pub name: Option<String>,
    pub benchmark: Option<String>,
    pub incumbent: String,
    pub candidate: String,
    pub mode: ModeArg,
    pub embodied_basis: BasisArg,
    pub scenario: Option<ScenarioJson>,
    #[serde(default)]
    pub grid: GridSpecJson,
}

impl ComparisonConfig {
    pub fn load(path: &Path) -> Result<(Self, InputFile)> {
        read_json(path)
    }

    /// Output file stem: the configured name or one built from the systems.
    pub fn stem(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            format!("{}-vs-{}-{}", self.incumbent, self.candidate, AnalysisMode::from(self.mode).as_str())
        })
    }
}
