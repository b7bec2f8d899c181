//! Command-line front end: one subcommand per library layer, CSV outputs and
//! a `manifest.csv` provenance file per run.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};

use crate::collective::{AtomicEnsemble, CollectiveMode};
use crate::config::ConfigDoc;
use crate::constants::angular;
use crate::error::{Error, Result};
use crate::experiment::{analyze_trace, forward_simulate, heating_curve_table, HeatingPoint, ProtocolConfig, TransmissionTrace};
use crate::oracle::{run_suites, write_estimates_csv, EnsembleEstimate, SuiteConfig};
use crate::output::{fmt_f64, write_csv};
use crate::params::PhysicalParams;
use crate::spectra::NoiseSpectrum;

#[derive(Debug, Parser)]
#[command(name = "backaction-sim", version, about = "Cavity backaction heating of a collective atomic mode")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// `key = value` configuration file; defaults apply to absent keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    /// Overrides the configured master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for Monte Carlo and analysis.
    #[arg(long, global = true, env = "BACKACTION_SIM_THREADS")]
    pub threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Closed-form photon-number noise spectrum.
    Spectrum,
    /// Jitter-convolved R/R_fs around the motional sideband.
    HeatingCurve,
    /// Forward simulation of the transmission and atom-loss trace.
    Simulate,
    /// Heating rates from a transmission trace.
    Analyze {
        #[arg(long)]
        trace: PathBuf,
    },
    /// Numerical cross-checks of the closed forms.
    Oracle,
    /// Parameter dump with derived quantities.
    Params,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::HeatingCurve => "heating-curve",
            Command::Simulate => "simulate",
            Command::Analyze { .. } => "analyze",
            Command::Oracle => "oracle",
            Command::Params => "params",
        }
    }
}

/// One resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: Command,
    pub config_path: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed_override: Option<u64>,
    pub threads: Option<usize>,
}

impl From<Cli> for RunManifest {
    fn from(cli: Cli) -> Self {
        Self {
            command: cli.command,
            config_path: cli.config,
            output_dir: cli.out,
            seed_override: cli.seed,
            threads: cli.threads,
        }
    }
}

/// Everything a command writes, kept in memory until all work succeeded.
struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
    resolved: Vec<(String, String)>,
    seed: u64,
    /// Reported after the files are written.
    failure: Option<Error>,
}

/// Executes the manifest and returns the written files.
pub fn run(manifest: &RunManifest) -> Result<Vec<PathBuf>> {
    let text = match &manifest.config_path {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut doc = ConfigDoc::parse(&text)?;
    let params = PhysicalParams::from_doc(&mut doc)?;

    let mut work = || execute(manifest, &params, &mut doc);
    let artifacts = match manifest.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };

    fs::create_dir_all(&manifest.output_dir)?;
    let mut written = Vec::new();
    for (name, bytes) in &artifacts.files {
        let path = manifest.output_dir.join(name);
        fs::write(&path, bytes)?;
        written.push(path);
    }
    let path = manifest.output_dir.join("manifest.csv");
    fs::write(&path, manifest_csv(manifest, &params, &artifacts)?)?;
    written.push(path);
    match artifacts.failure {
        Some(e) => Err(e),
        None => Ok(written),
    }
}

fn execute(manifest: &RunManifest, params: &PhysicalParams, doc: &mut ConfigDoc) -> Result<Artifacts> {
    let configured_seed = doc.take_u64("seed")?;
    let seed = manifest.seed_override.or(configured_seed).unwrap_or(0);
    let cmd = manifest.command.name();
    let mut resolved = Vec::new();
    let mut files = Vec::new();
    let mut failure = None;
    let base_prov = vec![("command".to_string(), cmd.to_string()), ("seed".to_string(), seed.to_string())];

    let take = |doc: &mut ConfigDoc, key: &str, default: f64, resolved: &mut Vec<(String, String)>| -> Result<f64> {
        let v = doc.take_f64(key)?.unwrap_or(default);
        resolved.push((key.to_string(), fmt_f64(v)));
        Ok(v)
    };

    match &manifest.command {
        Command::Params => {
            doc.ensure_consumed()?;
            let mut buf = Vec::new();
            let rows = params
                .dump_rows()
                .into_iter()
                .map(|(k, v, u)| vec![k, fmt_f64(v), u]);
            write_csv(&mut buf, &base_prov, &["key", "value", "unit"], rows)?;
            files.push(("params.csv".to_string(), buf));
        }
        Command::Spectrum => {
            let nbar = take(doc, "nbar", 1.9, &mut resolved)?;
            let delta = angular(take(doc, "delta_hz", crate::constants::hertz(params.omega_z), &mut resolved)?);
            let omega_max = angular(take(doc, "omega_max_hz", crate::constants::hertz(10.0 * params.kappa), &mut resolved)?);
            let n_points = take(doc, "n_points", 401.0, &mut resolved)? as usize;
            doc.ensure_consumed()?;
            if n_points < 2 {
                return Err(Error::Config("n_points must be at least 2".into()));
            }
            let grid: Vec<f64> = (0..n_points)
                .map(|i| -omega_max + 2.0 * omega_max * i as f64 / (n_points - 1) as f64)
                .collect();
            let spectrum = NoiseSpectrum::analytic(grid, nbar, delta, params.kappa)?;
            let mut buf = Vec::new();
            spectrum.write_csv(&mut buf, &base_prov)?;
            files.push(("spectrum.csv".to_string(), buf));
        }
        Command::HeatingCurve => {
            let nbar = take(doc, "nbar", 1.9, &mut resolved)?;
            let n_atoms = take(doc, "n_atoms", 1e5, &mut resolved)?;
            let half_width = take(doc, "half_width_kappa", 10.0, &mut resolved)?;
            let n_points = take(doc, "n_points", 201.0, &mut resolved)? as usize;
            doc.ensure_consumed()?;
            if n_points < 2 {
                return Err(Error::Config("n_points must be at least 2".into()));
            }
            let mode = CollectiveMode::new(&AtomicEnsemble::uniform(n_atoms.round() as u64), params);
            let k = params.kappa;
            let grid: Vec<f64> = (0..n_points)
                .map(|i| params.omega_z + half_width * k * (-1.0 + 2.0 * i as f64 / (n_points - 1) as f64))
                .collect();
            let points = heating_curve_table(params, &mode, params.sigma_jitter, nbar, &grid)?;
            let mut buf = Vec::new();
            HeatingPoint::write_csv(&points, &mut buf, &base_prov)?;
            files.push(("heating_curve.csv".to_string(), buf));
        }
        Command::Simulate => {
            let mut protocol = ProtocolConfig::from_doc(doc)?;
            doc.ensure_consumed()?;
            protocol.seed = manifest.seed_override.or(configured_seed).unwrap_or(protocol.seed);
            resolved.extend(protocol.entries());
            let ensemble = AtomicEnsemble::uniform(protocol.n_initial.round() as u64);
            let trace = forward_simulate(&protocol, params, &ensemble)?;
            let mut buf = Vec::new();
            trace.write_csv(&mut buf, &[("command".to_string(), cmd.to_string())])?;
            files.push(("trace.csv".to_string(), buf));
        }
        Command::Analyze { trace } => {
            doc.ensure_consumed()?;
            let trace = TransmissionTrace::load(trace)?;
            resolved.extend(trace.config.entries());
            let analysis = analyze_trace(&trace, params)?;
            let mut buf = Vec::new();
            let mut prov = base_prov.clone();
            prov[1].1 = trace.config.seed.to_string();
            analysis.write_csv(&mut buf, &prov)?;
            files.push(("analysis.csv".to_string(), buf));
        }
        Command::Oracle => {
            let defaults = SuiteConfig::default();
            let suite = SuiteConfig {
                seed,
                n_trajectories: take(doc, "n_trajectories", defaults.n_trajectories as f64, &mut resolved)? as usize,
                n_atoms: take(doc, "n_atoms", defaults.n_atoms as f64, &mut resolved)? as u64,
                nbar: take(doc, "nbar", defaults.nbar, &mut resolved)?,
            };
            doc.ensure_consumed()?;
            let results = run_suites(params, &suite)?;
            let rows: Vec<(String, EnsembleEstimate, u64)> = results
                .iter()
                .map(|r| {
                    let e = r.estimate.unwrap_or(EnsembleEstimate {
                        mean: r.value,
                        stderr: 0.0,
                        n_samples: 1,
                    });
                    (r.name.to_string(), e, seed)
                })
                .collect();
            let mut buf = Vec::new();
            write_estimates_csv(&mut buf, &base_prov, &rows)?;
            files.push(("estimates.csv".to_string(), buf));
            let mut checks = Vec::new();
            let check_rows = results.iter().map(|r| {
                vec![
                    r.name.to_string(),
                    fmt_f64(r.value),
                    fmt_f64(r.tolerance),
                    if r.passed { "pass" } else { "fail" }.to_string(),
                ]
            });
            write_csv(&mut checks, &base_prov, &["check", "value", "tolerance", "result"], check_rows)?;
            files.push(("checks.csv".to_string(), checks));
            for r in &results {
                log::info!("{}: {} (tolerance {}) {}", r.name, r.value, r.tolerance, if r.passed { "pass" } else { "FAIL" });
            }
            if let Some(bad) = results.iter().find(|r| !r.passed) {
                failure = Some(Error::numeric(format!("oracle check {} failed", bad.name), bad.value));
            }
        }
    }
    Ok(Artifacts {
        files,
        resolved,
        seed,
        failure,
    })
}

fn manifest_csv(manifest: &RunManifest, params: &PhysicalParams, artifacts: &Artifacts) -> Result<Vec<u8>> {
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let mut rows: Vec<Vec<String>> = vec![
        vec!["command".into(), manifest.command.name().into()],
        vec!["config_path".into(), manifest.config_path.as_deref().map_or(String::new(), path_string)],
        vec!["output_dir".into(), path_string(&manifest.output_dir)],
        vec!["seed".into(), artifacts.seed.to_string()],
        vec!["threads".into(), manifest.threads.map_or("default".into(), |n| n.to_string())],
        vec!["version".into(), env!("CARGO_PKG_VERSION").into()],
    ];
    rows.extend(params.config_entries().into_iter().map(|(k, v, _)| vec![k.to_string(), fmt_f64(v)]));
    rows.extend(artifacts.resolved.iter().map(|(k, v)| vec![k.clone(), v.clone()]));
    let mut buf = Vec::new();
    write_csv(&mut buf, &[("timestamp".to_string(), stamp.to_string())], &["key", "value"], rows)?;
    Ok(buf)
}

fn path_string(p: &Path) -> String {
    p.display().to_string()
}

/// Parses arguments, runs, reports errors on stderr; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli.into()) {
        Ok(files) => {
            for f in files {
                log::info!("wrote {}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
