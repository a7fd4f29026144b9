//! Regenerated tables and their text renderings.

use std::fmt::Write as _;

use greenedge_core::fab::{embodied_footprint, estimate_dies_per_wafer, render_grams, render_megajoules};
use greenedge_core::operational::efficiency_per_carbon;
use greenedge_core::tradeoff::EmbodiedBasis;
use greenedge_core::workload::{network_flops, network_flops_per_item};
use greenedge_core::{NetworkSpec, Phase};

use crate::data::{DeviceDb, GridDb, InputFile, WorkloadDb};
use crate::error::Result;

/// Relative gap between a computed and a printed value above which the row
/// gets an erratum note.
pub const ERRATUM_THRESHOLD: f64 = 0.02;

/// Listed dies per wafer further than this from the area estimate get a note.
pub const DIES_CROSS_CHECK: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableId {
    GridMixes,
    Embodied,
    Efficiency,
    Flops,
}

impl TableId {
    pub fn as_str(self) -> &'static str {
        match self {
            TableId::GridMixes => "grid-mixes",
            TableId::Embodied => "embodied",
            TableId::Efficiency => "efficiency",
            TableId::Flops => "flops",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Tsv,
    Pretty,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Tsv => "tsv",
            Format::Pretty => "txt",
        }
    }
}

/// Tool version and hashed inputs, emitted as a `#` comment line.
#[derive(Debug, Clone, Default)]
pub struct Provenance {
    inputs: Vec<InputFile>,
}

impl Provenance {
    pub fn new(inputs: impl IntoIterator<Item = InputFile>) -> Self {
        let mut inputs: Vec<InputFile> = inputs.into_iter().collect();
        inputs.sort();
        inputs.dedup();
        Self { inputs }
    }

    pub fn inputs(&self) -> &[InputFile] {
        &self.inputs
    }

    pub fn line(&self) -> String {
        let mut s = format!("# greenedge {}", env!("CARGO_PKG_VERSION"));
        for (i, f) in self.inputs.iter().enumerate() {
            s.push_str(if i == 0 { "; inputs: " } else { ", " });
            let _ = write!(s, "{} sha256={}", f.name, f.sha256);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableArtifact {
    pub id: TableId,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub annotations: Vec<String>,
}

impl TableArtifact {
    fn new(id: TableId, header: Vec<String>) -> Self {
        Self { id, header, rows: Vec::new(), annotations: Vec::new() }
    }

    /// Cell at the row whose first column is `key`.
    pub fn lookup(&self, key: &str, column: &str) -> Option<&str> {
        let c = self.header.iter().position(|h| h == column)?;
        self.rows.iter().find(|r| r[0] == key).map(|r| r[c].as_str())
    }

    pub fn render(&self, format: Format, provenance: &Provenance) -> String {
        let mut out = provenance.line();
        out.push('\n');
        match format {
            Format::Csv => out.push_str(&self.delimited(b',')),
            Format::Tsv => out.push_str(&self.delimited(b'\t')),
            Format::Pretty => out.push_str(&self.pretty()),
        }
        for note in &self.annotations {
            let _ = writeln!(out, "# note: {note}");
        }
        out
    }

    fn delimited(&self, delimiter: u8) -> String {
        let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(Vec::new());
        // writing to a Vec cannot fail
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("cells are UTF-8")
    }

    fn pretty(&self) -> String {
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        let mut line = |cells: &[String]| {
            let mut l = String::new();
            for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
                if i == 0 {
                    let _ = write!(l, "{cell:<w$}");
                } else {
                    let _ = write!(l, "  {cell:>w$}");
                }
            }
            out.push_str(l.trim_end());
            out.push('\n');
        };
        line(&self.header);
        for row in &self.rows {
            line(row);
        }
        out
    }
}

/// Emission factors and generation shares per region, with the mix as the
/// last row.
pub fn grid_table(grids: &GridDb, region: Option<&str>) -> Result<TableArtifact> {
    let picked: Vec<usize> = match region {
        Some(name) => vec![grids.find_region(name)?],
        None => (0..grids.regions.len()).collect(),
    };
    let mut header = vec!["source".to_string(), "gCO2eq/kWh".to_string()];
    header.extend(picked.iter().map(|&i| grids.regions[i].region.clone()));
    let mut t = TableArtifact::new(TableId::GridMixes, header);
    for f in grids.factors.entries() {
        let mut row = vec![f.source.clone(), format!("{:.0}", f.g_per_kwh)];
        for &i in &picked {
            row.push(grids.regions[i].share_of(&f.source).map_or_else(|| "-".into(), |s| format!("{s:.2}")));
        }
        t.rows.push(row);
    }
    let mut mix = vec!["mix".to_string(), String::new()];
    mix.extend(picked.iter().map(|&i| grids.mixes[i].rendered()));
    t.rows.push(mix);
    t.annotations.extend(
        grids
            .warnings
            .iter()
            .filter(|w| picked.iter().any(|&i| w.starts_with(&format!("region {}:", grids.regions[i].region))))
            .cloned(),
    );
    Ok(t)
}

/// One column per device: fab statistics, embodied energy and regional
/// embodied carbon, per die or per module.
pub fn embodied_table(
    devices: &DeviceDb,
    grids: &GridDb,
    device: Option<&str>,
    region: Option<&str>,
    basis: EmbodiedBasis,
) -> Result<TableArtifact> {
    let picked = match device {
        Some(name) => vec![devices.get(name)?],
        None => devices.devices.iter().collect(),
    };
    let mixes = match region {
        Some(name) => vec![grids.mixes[grids.find_region(name)?].clone()],
        None => grids.mixes.clone(),
    };
    let unit = basis.as_str();

    let mut header = vec!["metric".to_string()];
    header.extend(picked.iter().map(|d| d.spec.name().to_string()));
    let mut t = TableArtifact::new(TableId::Embodied, header);

    let row = |label: &str, cell: &dyn Fn(&crate::data::DeviceEntry) -> String| {
        let mut r = vec![label.to_string()];
        r.extend(picked.iter().map(|d| cell(d)));
        r
    };
    let mut rows = vec![
        row("accelerator", &|d| d.label.clone()),
        row("node (nm)", &|d| d.spec.node_nm().to_string()),
        row("lca study", &|d| d.spec.study().to_string()),
        row("spintronics", &|d| if d.spec.spintronics() { "yes" } else { "no" }.to_string()),
        row("die (mm2)", &|d| d.spec.die_mm2().to_string()),
        row("dies/wafer", &|d| d.spec.dies_per_wafer().to_string()),
        row("PE (kWh/wafer)", &|d| d.spec.wafer_energy().value().to_string()),
    ];
    if basis == EmbodiedBasis::Module {
        rows.push(row("dies/module", &|d| d.spec.dies_per_module().to_string()));
    }

    let footprints = picked.iter().map(|d| embodied_footprint(&d.spec, &mixes)).collect::<Result<Vec<_>, _>>()?;
    let mut energy = vec![format!("energy (MJ/{unit})")];
    energy.extend(footprints.iter().map(|f| {
        render_megajoules(match basis {
            EmbodiedBasis::Die => f.energy_per_die,
            EmbodiedBasis::Module => f.energy_per_module,
        })
    }));
    rows.push(energy);
    for mix in &mixes {
        let mut r = vec![format!("{} (gCO2eq/{unit})", mix.region)];
        r.extend(footprints.iter().map(|f| {
            let grams = match basis {
                EmbodiedBasis::Die => f.carbon_per_die_in(&mix.region),
                EmbodiedBasis::Module => f.carbon_per_module_in(&mix.region),
            };
            grams.map(render_grams).unwrap_or_default()
        }));
        rows.push(r);
    }
    t.rows = rows;

    t.annotations.push("energy = wafer process energy / dies per wafer; carbon = energy x grid mix".into());
    if basis == EmbodiedBasis::Module {
        t.annotations.push("module basis: per-die values x dies per module".into());
    }
    for d in &picked {
        let listed = d.spec.dies_per_wafer();
        let estimate = estimate_dies_per_wafer(d.spec.die_mm2(), d.spec.wafer_diameter_mm())?;
        let gap = (f64::from(estimate) - f64::from(listed)).abs() / f64::from(listed);
        if gap > DIES_CROSS_CHECK {
            t.annotations.push(format!(
                "{}: listed {listed} dies/wafer, area estimate {estimate} ({:.0}% apart)",
                d.spec.name(),
                gap * 100.0
            ));
        }
    }
    Ok(t)
}

fn deviates(computed: f64, published: f64) -> bool {
    (computed - published).abs() > ERRATUM_THRESHOLD * published.abs()
}

/// Per-watt and per-carbon efficiency for every workload record.
///
/// The per-carbon range spans the dirtiest to the cleanest loaded grid.
pub fn efficiency_table(workloads: &WorkloadDb, grids: &GridDb) -> Result<TableArtifact> {
    let header = [
        "benchmark",
        "device",
        "phase",
        "throughput",
        "unit",
        "power (W)",
        "per watt",
        "per watt unit",
        "per carbon min",
        "per carbon max",
        "per carbon unit",
        "note",
    ];
    let mut t = TableArtifact::new(TableId::Efficiency, header.iter().map(|s| s.to_string()).collect());
    for entry in &workloads.entries {
        let r = &entry.record;
        let report = efficiency_per_carbon(r, &grids.mixes)?;
        let (lo, hi) = report.render_per_carbon();
        t.rows.push(vec![
            r.benchmark.clone(),
            r.device.clone(),
            r.phase.to_string(),
            r.throughput().value.to_string(),
            r.throughput().unit.to_string(),
            r.power().value().to_string(),
            report.render_per_watt(),
            report.unit.per_watt_label().to_string(),
            lo.clone(),
            hi.clone(),
            report.unit.per_carbon_label().to_string(),
            r.precision_note.clone(),
        ]);

        let Some(published) = entry.published else { continue };
        if let Some(pw) = published.per_watt.filter(|&pw| deviates(report.per_watt, pw)) {
            t.annotations.push(format!(
                "erratum: {} {} per watt computes to {} {}; printed {pw}",
                r.device,
                r.benchmark,
                report.render_per_watt(),
                report.unit.per_watt_label()
            ));
        }
        if let Some((plo, phi)) = published.per_carbon {
            if deviates(report.per_carbon_min, plo) || deviates(report.per_carbon_max, phi) {
                t.annotations.push(format!(
                    "erratum: {} {} per carbon computes to {lo}-{hi} {} over mixes {:.0}-{:.0}; printed {plo}-{phi}",
                    r.device,
                    r.benchmark,
                    report.unit.per_carbon_label(),
                    report.mix_range.0,
                    report.mix_range.1
                ));
            }
        }
    }
    Ok(t)
}

/// Forward and training FLOPs per item and per batch for each network.
pub fn flops_table(networks: &[NetworkSpec]) -> Result<TableArtifact> {
    let header = ["network", "layers", "batch", "forward flops/item", "forward flops/batch", "training flops/batch"];
    let mut t = TableArtifact::new(TableId::Flops, header.iter().map(|s| s.to_string()).collect());
    for net in networks {
        let item = network_flops_per_item(net, Phase::Inference)?;
        let batch = network_flops(net, Phase::Training)?;
        t.rows.push(vec![
            net.name.clone(),
            net.layers().len().to_string(),
            net.batch().to_string(),
            item.forward_flops.to_string(),
            batch.forward_flops.to_string(),
            batch.training_flops.to_string(),
        ]);
        t.annotations.extend(net.warnings());
    }
    t.annotations.push("FLOPs count each multiply and each add; training = forward x training multiplier".into());
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn artifact() -> TableArtifact {
        TableArtifact {
            id: TableId::Efficiency,
            header: vec!["name".into(), "note".into()],
            rows: vec![vec!["a".into(), "x, y".into()]],
            annotations: vec!["check".into()],
        }
    }

    #[test]
    fn csv_quotes_cells_with_commas() {
        let text = artifact().render(Format::Csv, &Provenance::default());
        assert_eq!(text, "# greenedge 0.1.0\nname,note\na,\"x, y\"\n# note: check\n");
    }

    #[test]
    fn tsv_leaves_commas_alone() {
        let text = artifact().render(Format::Tsv, &Provenance::default());
        assert!(text.contains("a\tx, y\n"));
    }

    #[test]
    fn provenance_is_sorted_and_deduplicated() {
        let f = |name: &str| InputFile { name: name.into(), sha256: "00".into() };
        let p = Provenance::new([f("b.json"), f("a.json"), f("b.json")]);
        assert!(p.line().ends_with("; inputs: a.json sha256=00, b.json sha256=00"));
    }

    #[test]
    fn erratum_threshold_is_relative() {
        assert!(!deviates(521.1, 521.0));
        assert!(deviates(4.33, 4.6));
        assert!(!deviates(0.348, 0.35));
    }

    #[test]
    fn lookup_by_row_key() {
        assert_eq!(artifact().lookup("a", "note"), Some("x, y"));
        assert_eq!(artifact().lookup("b", "note"), None);
    }
}
