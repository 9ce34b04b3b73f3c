//! Command-line front end: presets, configuration merging and output files.

pub mod config;
pub mod output;
pub mod presets;
pub mod run;

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use config::Config;
use presets::Damping;
use run::Quantity;

#[derive(Debug, Parser)]
#[command(name = "halfspace-rabi", version, about = "Two-level atoms entering a half-space laser: figure data and sweeps")]
pub struct Cli {
    /// JSON configuration; its keys override the preset of the command.
    #[arg(long, global = true, env = "HALFSPACE_RABI_CONFIG")]
    pub config: Option<PathBuf>,
    /// Output directory (default: current directory).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Base seed of the Monte Carlo trajectories.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Exit successfully even if some sweep points failed.
    #[arg(long, global = true)]
    pub allow_partial: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QuantityArg {
    Visibility,
    Mixing,
    Reflection,
    SpatialVisibility,
}

impl From<QuantityArg> for Quantity {
    fn from(q: QuantityArg) -> Self {
        match q {
            QuantityArg::Visibility => Quantity::Visibility,
            QuantityArg::Mixing => Quantity::Mixing,
            QuantityArg::Reflection => Quantity::Reflection,
            QuantityArg::SpatialVisibility => Quantity::SpatialVisibility,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Data behind figure N.
    Figure {
        #[arg(value_parser = clap::value_parser!(u32).range(1..=14))]
        n: u32,
    },
    /// A quantity over a velocity or wavenumber axis.
    Sweep { quantity: QuantityArg },
    /// Stationary scattering state at packet.v0.
    Stationary,
    /// Exact wave-packet populations versus time.
    Packet,
    /// Quantum-jump ensemble of a moving packet.
    Mcwf,
    /// Validity estimates of the one-dimensional model.
    Validity,
    /// Raman–Nath internal dynamics and momentum distributions.
    Rn,
}

impl Command {
    fn preset(&self) -> Result<Config> {
        Ok(match self {
            Command::Figure { n } => presets::figure(*n)?,
            Command::Sweep { .. } => presets::command("sweep"),
            Command::Stationary => presets::command("stationary"),
            Command::Packet => presets::command("packet"),
            Command::Mcwf => presets::command("mcwf"),
            Command::Validity => presets::command("validity"),
            Command::Rn => presets::command("rn"),
        })
    }

    fn label(&self) -> String {
        match self {
            Command::Figure { n } => format!("figure {n}"),
            Command::Sweep { quantity } => format!("sweep {}", Quantity::from(*quantity).name()),
            Command::Stationary => "stationary".into(),
            Command::Packet => "packet".into(),
            Command::Mcwf => "mcwf".into(),
            Command::Validity => "validity".into(),
            Command::Rn => "rn".into(),
        }
    }
}

/// Preset, then config file, then command-line flags.
pub fn resolve(cli: &Cli) -> Result<Config> {
    let mut cfg = cli.command.preset()?;
    if let Some(path) = &cli.config {
        let user = Config::load(path)?;
        if let (Some(want), Some(got)) = (&cfg.scenario, &user.scenario) {
            if want != got {
                bail!("conflict at key `scenario`: the config is for `{got}` but the command runs `{want}`");
            }
        }
        cfg.overlay(&user);
    }
    if let Some(s) = cli.seed {
        cfg.mcwf.seed = Some(s);
    }
    if let Some(t) = cli.threads {
        cfg.mcwf.threads = Some(t);
    }
    if let Some(o) = &cli.out {
        cfg.output.dir = Some(o.to_string_lossy().into_owned());
    }
    if let Command::Figure { n } = cli.command {
        let gamma = cfg.laser.gamma.unwrap_or(f64::NAN);
        match presets::figure_damping(n) {
            Damping::Zero if gamma != 0.0 => {
                bail!("conflict at key `laser.gamma`: figure {n} is undamped, got gamma = {gamma}")
            }
            Damping::Positive if !(gamma > 0.0) => {
                bail!("conflict at key `laser.gamma`: figure {n} needs gamma > 0, got {gamma}")
            }
            _ => {}
        }
    }
    Ok(cfg)
}

/// Outcome of a successful command.
#[derive(Debug, Clone)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub failed_rows: usize,
}

fn base_meta(cli: &Cli, cfg: &Config, seconds: f64) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), json!(cli.command.label()));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("runtime_s".into(), json!(seconds));
    m.insert("threads".into(), json!(rayon::current_num_threads()));
    m.insert("tolerance".into(), json!(cfg.tolerance()));
    if let Some(s) = cfg.mcwf.seed {
        m.insert("seed".into(), json!(s));
    }
    match run::derived_scales(cfg) {
        Ok(d) => {
            m.insert("derived".into(), Value::Object(d));
        }
        Err(e) => log::debug!("no derived scales: {e:#}"),
    }
    m
}

pub fn execute(cli: &Cli) -> Result<Report> {
    let cfg = resolve(cli)?;
    let dir = PathBuf::from(cfg.output.dir.clone().unwrap_or_else(|| ".".into()));
    let start = Instant::now();
    let work = || -> Result<Report> {
        if let Command::Validity = cli.command {
            return write_validity(cli, &cfg, &dir, start);
        }
        let run = match &cli.command {
            Command::Figure { n } => run::figure(*n, &cfg)?,
            Command::Sweep { quantity } => run::sweep(&cfg, (*quantity).into())?,
            Command::Stationary => run::stationary(&cfg)?,
            Command::Packet => run::packet(&cfg)?,
            Command::Mcwf => run::mcwf(&cfg)?,
            Command::Rn => run::raman_nath(&cfg)?,
            Command::Validity => unreachable!(),
        };
        let mut meta = base_meta(cli, &cfg, start.elapsed().as_secs_f64());
        meta.extend(run.meta);
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut files = Vec::new();
        let mut extra_names = Vec::new();
        for (suffix, t) in &run.extra {
            let p = dir.join(format!("{}_{suffix}.csv", run.stem));
            output::write_csv(&p, t)?;
            extra_names.push(json!(p.file_name().map(|f| f.to_string_lossy().into_owned())));
            files.push(p);
        }
        if !extra_names.is_empty() {
            meta.insert("extra_files".into(), Value::Array(extra_names));
        }
        let failed = run.table.failures();
        let w = output::write_outputs(&dir, &run.stem, &run.table, &cfg, meta)?;
        files.insert(0, w.meta);
        files.insert(0, w.data);
        Ok(Report {
            files,
            failed_rows: failed,
        })
    };
    match cfg.mcwf.threads {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build()?.install(work),
        None => work(),
    }
}

fn write_validity(cli: &Cli, cfg: &Config, dir: &Path, start: Instant) -> Result<Report> {
    let (report, extra) = run::validity(cfg)?;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join("validity_report.json");
    let text = serde_json::to_string_pretty(&report)?;
    std::fs::write(&path, text.clone() + "\n")?;
    println!("{text}");
    let mut meta = base_meta(cli, cfg, start.elapsed().as_secs_f64());
    meta.extend(extra);
    meta.insert("data_file".into(), json!("validity_report.json"));
    let meta_path = dir.join("validity_meta.json");
    output::write_meta(&meta_path, cfg, meta)?;
    Ok(Report {
        files: vec![path, meta_path],
        failed_rows: 0,
    })
}
