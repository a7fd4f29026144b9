//! Command-line interface.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use greenedge_core::tradeoff::EmbodiedBasis;

use crate::compare;
use crate::data::{self, BasisArg, ComparisonConfig, DeviceDb, GridDb, ModeArg, ScenarioArg, WorkloadDb};
use crate::error::{Error, Result};
use crate::sweep;
use crate::tables::{self, Format, Provenance, TableArtifact};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  output could not be written
  2  bad command line
  3  an input file could not be read, parsed or validated
  4  invalid request (unknown name, infeasible or inconsistent comparison)
  5  devices come from different LCA studies (see --allow-cross-study)";

#[derive(Debug, Parser)]
#[command(name = "greenedge", version, about = "Embodied and operational carbon of edge AI accelerators")]
#[command(after_help = EXIT_CODES)]
pub struct Cli {
    #[command(flatten)]
    pub paths: DataArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Directory holding devices.json, workloads.json, grids.json, networks/ and scenarios/
    #[arg(long, env = "GREENEDGE_DATA", global = true, value_name = "DIR")]
    pub data: Option<PathBuf>,
    #[arg(long, global = true, value_name = "PATH")]
    pub devices: Option<PathBuf>,
    #[arg(long, global = true, value_name = "PATH")]
    pub workloads: Option<PathBuf>,
    #[arg(long, global = true, value_name = "PATH")]
    pub grids: Option<PathBuf>,
    /// Network spec file or directory of them
    #[arg(long, global = true, value_name = "PATH")]
    pub networks: Option<PathBuf>,
    /// Write output files here instead of printing tables
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Sweep threads (0 = one per core)
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
}

impl DataArgs {
    fn data_dir(&self) -> PathBuf {
        self.data.clone().unwrap_or_else(|| PathBuf::from(crate::DEFAULT_DATA_DIR))
    }

    fn resolve(&self, explicit: &Option<PathBuf>, default: &str) -> PathBuf {
        explicit.clone().unwrap_or_else(|| self.data_dir().join(default))
    }

    pub fn devices_path(&self) -> PathBuf {
        self.resolve(&self.devices, "devices.json")
    }
    pub fn workloads_path(&self) -> PathBuf {
        self.resolve(&self.workloads, "workloads.json")
    }
    pub fn grids_path(&self) -> PathBuf {
        self.resolve(&self.grids, "grids.json")
    }
    pub fn networks_path(&self) -> PathBuf {
        self.resolve(&self.networks, "networks")
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emission factors, generation shares and grid mix per region
    Grid {
        #[arg(long)]
        region: Option<String>,
    },
    /// Embodied energy and carbon per die or module
    Embodied {
        #[arg(long)]
        device: Option<String>,
        #[arg(long)]
        region: Option<String>,
        #[arg(long, value_enum, default_value_t = BasisArg::Die)]
        basis: BasisArg,
    },
    /// Throughput per watt and per gram of CO2eq
    Efficiency,
    /// Sweep indifference or break-even time between two systems
    Compare(CompareArgs),
    /// Write all tables and every scenario surface to --out
    Report {
        /// Directory of comparison configs [default: <data>/scenarios]
        #[arg(long, value_name = "DIR")]
        scenarios: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = BasisArg::Die)]
        basis: BasisArg,
        #[arg(long)]
        allow_cross_study: bool,
    },
    /// FLOP counts for network specs
    Flops {
        #[arg(long)]
        network: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Comparison config JSON; flags below override its fields
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub incumbent: Option<String>,
    #[arg(long)]
    pub candidate: Option<String>,
    /// Workload benchmark, needed when a device has several records
    #[arg(long)]
    pub benchmark: Option<String>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    pub basis: Option<BasisArg>,
    #[arg(long, value_enum)]
    pub scenario: Option<ScenarioArg>,
    #[arg(long)]
    pub allow_cross_study: bool,
}

impl CompareArgs {
    fn config(&self) -> Result<(ComparisonConfig, Vec<data::InputFile>)> {
        let (mut cfg, inputs) = match &self.config {
            Some(path) => {
                let (cfg, input) = ComparisonConfig::load(path)?;
                (cfg, vec![input])
            }
            None => {
                let need = |v: &Option<String>, flag: &str| {
                    v.clone().ok_or_else(|| Error::Usage(format!("{flag} is required without --config")))
                };
                let cfg = ComparisonConfig {
                    name: None,
                    benchmark: None,
                    incumbent: need(&self.incumbent, "--incumbent")?,
                    candidate: need(&self.candidate, "--candidate")?,
                    mode: self.mode.unwrap_or(ModeArg::Indifference),
                    embodied_basis: self.basis.unwrap_or(BasisArg::Die),
                    scenario: None,
                    grid: Default::default(),
                };
                (cfg, Vec::new())
            }
        };
        if let Some(v) = &self.incumbent {
            cfg.incumbent = v.clone();
        }
        if let Some(v) = &self.candidate {
            cfg.candidate = v.clone();
        }
        if let Some(v) = &self.benchmark {
            cfg.benchmark = Some(v.clone());
        }
        if let Some(v) = self.mode {
            cfg.mode = v;
        }
        if let Some(v) = self.basis {
            cfg.embodied_basis = v;
        }
        if let Some(mode) = self.scenario {
            let demand = cfg.scenario.and_then(|s| s.demand);
            cfg.scenario = Some(data::ScenarioJson { mode, demand });
        }
        Ok((cfg, inputs))
    }
}

fn warn(message: &str) {
    eprintln!("warning: {message}");
}

fn load_grids(args: &DataArgs) -> Result<GridDb> {
    let grids = GridDb::load(&args.grids_path())?;
    grids.warnings.iter().for_each(|w| warn(w));
    Ok(grids)
}

fn load_workloads(args: &DataArgs) -> Result<WorkloadDb> {
    let workloads = WorkloadDb::load(&args.workloads_path())?;
    if workloads.entries.is_empty() {
        warn("workload database is empty");
    }
    Ok(workloads)
}

fn stdout(text: &str) -> Result<()> {
    std::io::stdout().write_all(text.as_bytes()).map_err(|source| Error::Write { path: "<stdout>".into(), source })
}

/// Prints a table, or writes it to `--out` when given.
fn emit(args: &DataArgs, table: &TableArtifact, provenance: &Provenance) -> Result<()> {
    match &args.out {
        Some(dir) => write_table(dir, table, args.format, provenance).map(|path| eprintln!("wrote {}", path.display())),
        None => stdout(&table.render(args.format, provenance)),
    }
}

fn write_table(dir: &Path, table: &TableArtifact, format: Format, provenance: &Provenance) -> Result<PathBuf> {
    let path = dir.join(format!("{}.{}", table.id.as_str(), format.extension()));
    compare::write_atomic(&path, table.render(format, provenance).as_bytes())?;
    Ok(path)
}

/// Runs one comparison and writes its surface and sidecar into `dir`.
fn run_comparison(
    args: &DataArgs,
    cfg: &ComparisonConfig,
    devices: &DeviceDb,
    workloads: &WorkloadDb,
    mut inputs: Vec<data::InputFile>,
    allow_cross_study: bool,
    dir: &Path,
) -> Result<String> {
    let plan = compare::plan(cfg, devices, workloads, allow_cross_study)?;
    let surface = sweep::evaluate(&plan, args.jobs)?;
    inputs.extend([devices.input.clone(), workloads.input.clone()]);
    let provenance = Provenance::new(inputs);
    let stem = cfg.stem();
    let ext = if args.format == Format::Tsv { "tsv" } else { "csv" };
    let text = compare::surface_text(&surface, &provenance, args.format == Format::Tsv);
    compare::write_atomic(&dir.join(format!("{stem}.{ext}")), text.as_bytes())?;
    let mut json = serde_json::to_string_pretty(&compare::sidecar(&stem, &plan, &surface, &provenance))
        .expect("sidecar values are finite");
    json.push('\n');
    compare::write_atomic(&dir.join(format!("{stem}.json")), json.as_bytes())?;
    Ok(compare::corner_summary(&surface))
}

pub fn run(cli: Cli) -> Result<()> {
    let args = &cli.paths;
    match &cli.command {
        Command::Grid { region } => {
            let grids = load_grids(args)?;
            let table = tables::grid_table(&grids, region.as_deref())?;
            emit(args, &table, &Provenance::new([grids.input.clone()]))
        }
        Command::Embodied { device, region, basis } => {
            let grids = load_grids(args)?;
            let devices = DeviceDb::load(&args.devices_path())?;
            let table =
                tables::embodied_table(&devices, &grids, device.as_deref(), region.as_deref(), (*basis).into())?;
            emit(args, &table, &Provenance::new([grids.input.clone(), devices.input.clone()]))
        }
        Command::Efficiency => {
            let grids = load_grids(args)?;
            let workloads = load_workloads(args)?;
            let table = tables::efficiency_table(&workloads, &grids)?;
            emit(args, &table, &Provenance::new([grids.input.clone(), workloads.input.clone()]))
        }
        Command::Flops { network } => {
            let mut loaded = data::load_networks(&args.networks_path())?;
            if let Some(name) = network {
                let known: Vec<String> = loaded.iter().map(|(n, _)| n.name.clone()).collect();
                loaded.retain(|(n, _)| &n.name == name);
                if loaded.is_empty() {
                    return Err(Error::Unknown { kind: "network", name: name.clone(), known });
                }
            }
            let (nets, inputs): (Vec<_>, Vec<_>) = loaded.into_iter().unzip();
            let table = tables::flops_table(&nets)?;
            table.annotations.iter().filter(|a| a.contains("no FLOP count")).for_each(|a| warn(a));
            emit(args, &table, &Provenance::new(inputs))
        }
        Command::Compare(c) => {
            let (cfg, inputs) = c.config()?;
            let devices = DeviceDb::load(&args.devices_path())?;
            let workloads = WorkloadDb::load(&args.workloads_path())?;
            let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("."));
            let summary = run_comparison(args, &cfg, &devices, &workloads, inputs, c.allow_cross_study, &dir)?;
            stdout(&format!("{summary}\n"))
        }
        Command::Report { scenarios, basis, allow_cross_study } => {
            let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            let grids = load_grids(args)?;
            let devices = DeviceDb::load(&args.devices_path())?;
            let workloads = load_workloads(args)?;

            let mut written = vec![
                write_table(
                    &dir,
                    &tables::grid_table(&grids, None)?,
                    args.format,
                    &Provenance::new([grids.input.clone()]),
                )?,
                write_table(
                    &dir,
                    &tables::embodied_table(&devices, &grids, None, None, EmbodiedBasis::from(*basis))?,
                    args.format,
                    &Provenance::new([grids.input.clone(), devices.input.clone()]),
                )?,
                write_table(
                    &dir,
                    &tables::efficiency_table(&workloads, &grids)?,
                    args.format,
                    &Provenance::new([grids.input.clone(), workloads.input.clone()]),
                )?,
            ];

            let scenario_dir = scenarios.clone().unwrap_or_else(|| args.data_dir().join("scenarios"));
            let configs = if scenario_dir.is_dir() { data::json_files(&scenario_dir)? } else { Vec::new() };
            let mut summaries = String::new();
            for path in configs {
                let (cfg, input) = ComparisonConfig::load(&path)?;
                let summary = run_comparison(args, &cfg, &devices, &workloads, vec![input], *allow_cross_study, &dir)?;
                summaries.push_str(&summary);
                summaries.push('\n');
                written.push(dir.join(format!("{}.csv", cfg.stem())));
            }
            for path in &written {
                eprintln!("wrote {}", path.display());
            }
            stdout(&summaries)
        }
    }
}
