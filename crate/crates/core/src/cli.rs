//! Command-line front end. The binary only forwards `argv` to [`run`].

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    asymptotic_correction, classify, detect_drift, find_fixed_points_with, AsymptoticCorrection,
    DriftReport, FixedPointReport, NewtonConfig, RegimeClassification,
};
use crate::averaging::{average_through_order2, AveragedField, QuadratureSpec};
use crate::campaign::{run_campaign, write_run_directory, CampaignConfig, FamilySpec, InitSet};
use crate::error::{Error, Result};
use crate::figures::{figure_spec, reproduce_figure, FigureSpec};
use crate::hashing::config_hash;
use crate::integrate::{integrate, InitialState, IntegratorConfig};
use crate::report::emit_csv;

#[derive(Debug, Parser)]
#[command(name = "resonance-lab", version, about = "Averaging, stability analysis and long-time simulation of resonantly forced oscillators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// Output file or directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Relative integrator tolerance; the absolute tolerance is set to 1e-2 of it [default: 1e-9].
    #[arg(long)]
    tol: Option<f64>,
    /// Final integration time [default: 1e3, 1e5 for figures].
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Seed for ball-sampled initial conditions.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for ensembles.
    #[arg(long, env = "RESONANCE_LAB_THREADS")]
    threads: Option<usize>,
    /// Print the resolved configuration as JSON and exit.
    #[arg(long = "dump-config")]
    dump_config: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one trajectory and write it as CSV.
    ///
    /// Config: {"family": {"family": "ex1", "params": {...}}, "init": {"kind": "shift", "rho": 1.0, "theta": 0.0},
    /// "integrator": {"rel_tol": 1e-9, "abs_tol": 1e-11, "t_start": 1, "t_end": 1000, "h_max": 0.5, "record_stride": 1}}.
    Simulate {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate the averaged field and compare it with the closed form.
    ///
    /// Config: {"family": {...}, "r_nodes": [..], "psi_nodes": 24, "n_s": 64}.
    Average {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Locate resonant fixed points and drift circles and classify them.
    ///
    /// Config: {"family": {...}, "newton": {"psi_seeds": 24, "rho_seeds": 16, "fp_tol": 1e-10, "max_iter": 50}, "n_s": 64}.
    Analyze {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run an ensemble and compare with the analysis.
    ///
    /// Config: {"family": {...}, "inits": {"kind": "ball", "rho": .., "theta": .., "radius": .., "count": .., "seed": ..},
    /// "integrator": {...}, "detector": {...}, "containment": {"t_s": 10, "delta": 0.3, "epsilon": 0.5}}.
    Campaign {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run the canned configuration of a published figure.
    ReproduceFigure {
        /// One of 1a, 1b, 1c, 2, 3, 4, 5, 6.
        figure: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub family: FamilySpec,
    pub init: InitialState,
    #[serde(default)]
    pub integrator: IntegratorConfig,
}

fn default_n_s() -> usize {
    64
}

fn default_psi_nodes() -> usize {
    24
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageConfig {
    pub family: FamilySpec,
    /// Amplitude nodes; defaults to eight nodes spread over the domain.
    #[serde(default)]
    pub r_nodes: Option<Vec<f64>>,
    #[serde(default = "default_psi_nodes")]
    pub psi_nodes: usize,
    #[serde(default = "default_n_s")]
    pub n_s: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeConfig {
    pub family: FamilySpec,
    #[serde(default)]
    pub newton: NewtonConfig,
    #[serde(default = "default_n_s")]
    pub n_s: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointEntry {
    pub report: FixedPointReport,
    pub classification: RegimeClassification,
    pub correction: Option<AsymptoticCorrection>,
    pub correction_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub config_hash: String,
    pub system: String,
    pub n: u32,
    pub m: u32,
    pub q: u32,
    pub fixed_points: Vec<FixedPointEntry>,
    pub drift: Vec<DriftReport>,
    /// Largest distance to a closed-form fixed point, when the family has one.
    pub closed_form_max_deviation: Option<f64>,
}

/// Runs the averaging pipeline and the analysis for a family.
pub fn analyze(cfg: &AnalyzeConfig) -> Result<AnalysisReport> {
    let fam = cfg.family.build()?;
    let avg = average_through_order2(&fam.system, QuadratureSpec { n_s: cfg.n_s })?;
    let (n, m) = avg.indices()?;
    let fixed_points: Vec<FixedPointEntry> = find_fixed_points_with(&avg, n, m, &cfg.newton)?
        .into_iter()
        .map(|report| {
            let (correction, correction_error) = match asymptotic_correction(&avg, &report) {
                Ok(c) => (Some(c), None),
                Err(e) => (None, Some(e.to_string())),
            };
            FixedPointEntry {
                classification: classify(&report),
                report,
                correction,
                correction_error,
            }
        })
        .collect();
    let seeds: Vec<f64> = fam.rho_star().into_iter().collect();
    let drift = detect_drift(&avg, n, m, &seeds);
    let predicted = fam.predicted_fixed_points();
    let closed_form_max_deviation = (!predicted.is_empty() && !fixed_points.is_empty()).then(|| {
        predicted
            .iter()
            .map(|p| {
                fixed_points
                    .iter()
                    .map(|f| {
                        (f.report.rho_star - p.rho_star).abs()
                            + crate::model::angle_distance(f.report.phi_star, p.phi_star)
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    });
    Ok(AnalysisReport {
        config_hash: config_hash(cfg),
        system: fam.system.name.clone(),
        n,
        m,
        q: fam.q(),
        fixed_points,
        drift,
        closed_form_max_deviation,
    })
}

fn psi_grid(n: usize) -> Vec<f64> {
    (0..n).map(|j| -std::f64::consts::PI + 2.0 * std::f64::consts::PI * j as f64 / n as f64).collect()
}

/// Max deviation of the pipeline field from the closed form, per order.
fn closed_form_deviation(avg: &AveragedField, exact: &AveragedField, rs: &[f64], ps: &[f64]) -> Result<Vec<(u32, f64)>> {
    let mut out = Vec::new();
    for k in exact.orders().collect::<Vec<_>>() {
        let mut dev: f64 = 0.0;
        for &r in rs {
            for &p in ps {
                let (l, o) = avg.get_or_zero(k, r, p)?;
                let (le, oe) = exact.get(k, r, p)?;
                dev = dev.max((l - le).abs()).max((o - oe).abs());
            }
        }
        out.push((k, dev));
    }
    Ok(out)
}

fn read_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn apply_integrator(cfg: &mut IntegratorConfig, c: &Common) {
    if let Some(tol) = c.tol {
        cfg.rel_tol = tol;
        cfg.abs_tol = tol * 1e-2;
    }
    if let Some(t) = c.t_end {
        cfg.t_end = t;
    }
}

fn apply_campaign(cfg: &mut CampaignConfig, c: &Common) {
    apply_integrator(&mut cfg.integrator, c);
    if let (Some(s), InitSet::Ball { seed, .. }) = (c.seed, &mut cfg.inits) {
        *seed = s;
    }
}

fn dump<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn print_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(p) => std::fs::write(p, &text).map_err(|e| Error::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn configure_threads(c: &Common) {
    if let Some(n) = c.threads.filter(|n| *n > 0) {
        // A pool that is already initialised keeps its size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate { config, common } => {
            let mut cfg: SimulateConfig = read_config(&config)?;
            apply_integrator(&mut cfg.integrator, &common);
            if common.dump_config {
                return dump(&cfg);
            }
            cfg.integrator.validate()?;
            let fam = cfg.family.build()?;
            let mut rec = integrate(&fam.system, cfg.init, &cfg.integrator)?;
            rec.meta.config_hash = config_hash(&cfg);
            match common.out {
                Some(p) => emit_csv(&rec, &p)?,
                None => std::io::stdout()
                    .write_all(rec.to_csv().as_bytes())
                    .map_err(|e| Error::io("<stdout>", e))?,
            }
            if let Some(exit) = rec.exit {
                eprintln!("left the domain at t = {} (rho = {})", exit.t, exit.rho);
            }
            Ok(())
        }
        Command::Average { config, common } => {
            let cfg: AverageConfig = read_config(&config)?;
            if common.dump_config {
                return dump(&cfg);
            }
            let fam = cfg.family.build()?;
            let avg = average_through_order2(&fam.system, QuadratureSpec { n_s: cfg.n_s })?;
            let rs = cfg.r_nodes.clone().unwrap_or_else(|| avg.test_grid().0);
            let ps = psi_grid(cfg.psi_nodes);
            let orders: Vec<u32> = avg.orders().collect();
            for &k in &orders {
                let csv = avg.grid_csv(k, &rs, &ps)?;
                match &common.out {
                    Some(dir) => {
                        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                        let p = dir.join(format!("order{k}.csv"));
                        std::fs::write(&p, csv).map_err(|e| Error::io(&p, e))?;
                    }
                    None => print!("{csv}"),
                }
            }
            let (n, m) = avg.indices()?;
            let deviation = match fam.closed_form_field() {
                Some(exact) => closed_form_deviation(&avg, &exact, &rs, &ps)?,
                None => vec![],
            };
            let summary = serde_json::json!({
                "config_hash": config_hash(&cfg),
                "system": fam.system.name,
                "orders": orders,
                "n": n,
                "m": m,
                "closed_form_max_deviation": deviation.iter().map(|(k, d)| serde_json::json!({"order": k, "max_abs": d})).collect::<Vec<_>>(),
            });
            if common.out.is_some() {
                println!("{}", serde_json::to_string_pretty(&summary)?);
            } else {
                eprintln!("{}", serde_json::to_string_pretty(&summary)?);
            }
            Ok(())
        }
        Command::Analyze { config, common } => {
            let cfg: AnalyzeConfig = read_config(&config)?;
            if common.dump_config {
                return dump(&cfg);
            }
            print_json(&analyze(&cfg)?, common.out.as_deref())
        }
        Command::Campaign { config, common } => {
            let mut cfg: CampaignConfig = read_config(&config)?;
            apply_campaign(&mut cfg, &common);
            if common.dump_config {
                return dump(&cfg);
            }
            configure_threads(&common);
            let result = run_campaign(&cfg)?;
            let root = common.out.unwrap_or_else(|| PathBuf::from("runs"));
            let dir = write_run_directory(&result, &root)?;
            eprintln!("wrote {}", dir.display());
            print_json(&result.summary, None)
        }
        Command::ReproduceFigure { figure, common } => {
            let mut spec: FigureSpec = figure_spec(&figure)?;
            apply_campaign(&mut spec.campaign, &common);
            if common.dump_config {
                return dump(&spec.campaign);
            }
            let Some(out) = common.out.clone() else {
                return Err(Error::Config("reproduce-figure needs --out <dir>".into()));
            };
            configure_threads(&common);
            let res = reproduce_figure(&spec, &out)?;
            println!("{}", res.svg.display());
            for (label, count) in &res.summary.verdicts {
                println!("{label}: {count}");
            }
            Ok(())
        }
    }
}

/// Parses `args` (including the program name) and runs the command; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Known family names for usage text and validation.
pub fn family_names() -> [&'static str; 4] {
    ["ex0", "ex1", "ex2", "ex3"]
}
