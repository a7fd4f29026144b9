//! Two-system comparisons: plan assembly, output files and the sidecar.

use std::io::Write as _;
use std::path::Path;

use serde_json::{json, Value};

use greenedge_core::tradeoff::{render_surface_csv, AxisSpec, ComparisonMode, SweepPlan, SweepSurface, SystemConfig};
use greenedge_core::{TimeResult, WorkloadRecord};

use crate::data::{ComparisonConfig, DeviceDb, WorkloadDb};
use crate::error::{Error, Result};
use crate::tables::Provenance;

/// Builds a validated sweep plan from a comparison config.
pub fn plan(
    cfg: &ComparisonConfig,
    devices: &DeviceDb,
    workloads: &WorkloadDb,
    allow_cross_study: bool,
) -> Result<SweepPlan> {
    let system = |name: &str| -> Result<SystemConfig> {
        let entry = devices.get(name)?;
        let record: WorkloadRecord = workloads.select(name, cfg.benchmark.as_deref())?.clone();
        let profile = record.power_profile(entry.standby)?;
        Ok(SystemConfig::new(entry.spec.clone(), record, profile)?)
    };
    let comparison = cfg.scenario.map_or(ComparisonMode::IsoPower, |s| s.to_mode());
    Ok(SweepPlan::new(
        system(&cfg.incumbent)?,
        system(&cfg.candidate)?,
        AxisSpec::from(cfg.grid.activity).values(),
        AxisSpec::from(cfg.grid.sleep).values(),
        cfg.mode.into(),
        cfg.embodied_basis.into(),
        comparison,
        allow_cross_study,
    )?)
}

fn system_json(plan: &SweepPlan, sys: &SystemConfig, embodied_j: f64) -> Value {
    let t = sys.workload.throughput();
    json!({
        "device": sys.name(),
        "lca_study": sys.device.study(),
        "benchmark": sys.workload.benchmark,
        "throughput": { "value": t.value, "unit": t.unit.as_str() },
        "power_w": {
            "active": sys.profile.active().value(),
            "idle": sys.profile.idle().value(),
            "sleep": sys.profile.sleep().value(),
        },
        "dies_per_module": sys.device.dies_per_module(),
        "embodied_mj": embodied_j / 1e6,
        "embodied_basis": plan.basis().as_str(),
    })
}

fn result_json(t: TimeResult) -> Value {
    match t.seconds() {
        Some(s) if t.is_finite() => json!({ "verdict": "finite", "days": s.days(), "years": s.years() }),
        _ => json!({ "verdict": t.render_days() }),
    }
}

/// Inputs and assumptions behind a surface, for the JSON sidecar.
pub fn sidecar(stem: &str, plan: &SweepPlan, surface: &SweepSurface, provenance: &Provenance) -> Value {
    let (m0, m1) = plan.embodied();
    let demand = match plan.comparison() {
        ComparisonMode::IsoPower => Value::Null,
        ComparisonMode::IsoWork { .. } => json!({
            "value": plan.reference_demand(),
            "unit": plan.incumbent().workload.throughput().unit.as_str(),
        }),
    };
    json!({
        "name": stem,
        "tool": format!("greenedge {}", env!("CARGO_PKG_VERSION")),
        "analysis": plan.analysis().as_str(),
        "embodied_basis": plan.basis().as_str(),
        "comparison": plan.comparison().as_str(),
        "reference_demand": demand,
        "incumbent": system_json(plan, plan.incumbent(), m0.value()),
        "candidate": system_json(plan, plan.candidate(), m1.value()),
        "axes": { "activity": plan.activity_axis(), "sleep": plan.sleep_axis() },
        "full_activity_corner": result_json(surface.full_activity_corner()),
        "time_units": "days of 86400 s, years of 365.25 days",
        "inputs": provenance
            .inputs()
            .iter()
            .map(|f| json!({ "file": f.name, "sha256": f.sha256 }))
            .collect::<Vec<_>>(),
    })
}

/// Surface CSV with the provenance line on top; tab-delimited on request.
pub fn surface_text(surface: &SweepSurface, provenance: &Provenance, tabs: bool) -> String {
    let body = render_surface_csv(surface);
    let body = if tabs { body.replace(',', "\t") } else { body };
    format!("{}\n{body}", provenance.line())
}

/// One-line summary of the highest-activity, lowest-sleep cell.
pub fn corner_summary(surface: &SweepSurface) -> String {
    let a = surface.activity_axis().last().copied().unwrap_or_default();
    let s = surface.sleep_axis().first().copied().unwrap_or_default();
    let corner = surface.full_activity_corner();
    let value = match corner {
        TimeResult::Finite(t) => format!("{:.1} days ({:.2} years)", t.days(), t.years()),
        other => other.render_days(),
    };
    format!(
        "{} vs {} ({}, {} basis), activity {a:.2}, sleep {s:.2}: {value}",
        surface.labels.0,
        surface.labels.1,
        surface.analysis.as_str(),
        surface.basis.as_str()
    )
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let write_err = |source| Error::Write { path: path.into(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(write_err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(write_err)?;
    tmp.write_all(contents).map_err(write_err)?;
    tmp.persist(path).map_err(|e| write_err(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_whole_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/out.csv");
        write_atomic(&path, b"first version, longer").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"second");
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1, "no temp files left");
    }
}
