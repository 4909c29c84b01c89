//! Experiment runner: each subcommand reproduces one study and writes CSV
//! reports plus a JSON manifest into the output directory.

mod config;
mod experiments;

use clap::{Args, Parser, Subcommand};
use config::*;
use experiments::Report;
use fvlab::Error;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

#[derive(Parser)]
#[command(name = "fvlab", version, about = "Finite-volume reconstruction laboratory")]
struct Cli {
    /// List the available experiments and exit.
    #[arg(long, global = true)]
    list: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// JSON config file; CLI flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: runs/<experiment>-<unix time>).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone)]
enum Command {
    /// Reconstruction-error convergence on the five-cell pattern grid.
    ReconConvergence {
        #[command(flatten)]
        common: CommonArgs,
        /// weno3 | cweno3
        #[arg(long)]
        kind: Option<String>,
        /// exp | extremum
        #[arg(long)]
        function: Option<String>,
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Distance between nonlinear and optimal weights on the pattern grid.
    WeightConvergence {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        function: Option<String>,
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Gradient of the reconstruction map vs the optimal-parabola gradient.
    GradientDiagnostic {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        kind: Option<String>,
    },
    /// Numerical-derivative truncation and linear-transport convergence on
    /// the four grid families.
    DerivativeTransport {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        kind: Option<String>,
        /// h | h2 | <constant>
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long)]
        max_n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Square-wave transport: 1-norm error and total variation.
    TransportDisc {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        kind: Option<String>,
    },
    /// Fourier-basis spectrum of the derivative operator and SSPRK3
    /// stability margins.
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        cells: Option<usize>,
        #[arg(long)]
        cfl: Option<f64>,
    },
    /// h-adaptive efficiency diagrams for linear transport (u1/u2).
    AdaptiveTransport {
        #[command(flatten)]
        common: CommonArgs,
        /// u1 | u2
        #[arg(long)]
        datum: Option<String>,
        #[arg(long, value_delimiter = ',')]
        coarse: Option<Vec<usize>>,
    },
    /// h-adaptive efficiency diagrams for Burgers (u3/u4).
    AdaptiveBurgers {
        #[command(flatten)]
        common: CommonArgs,
        /// u3 | u4
        #[arg(long)]
        datum: Option<String>,
        #[arg(long, value_delimiter = ',')]
        coarse: Option<Vec<usize>>,
        #[arg(long)]
        reference_n: Option<usize>,
    },
    /// Shock-acoustic interaction with the adaptive scheme.
    ShuOsher {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_delimiter = ',')]
        coarse: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<u32>>,
        #[arg(long)]
        reference_n: Option<usize>,
    },
    /// Pond sloshing test: conservation error of the positivity filter.
    Pond {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_delimiter = ',')]
        resolutions: Option<Vec<usize>>,
    },
    /// Two-dimensional quad-tree reconstruction error table.
    Quadtree2d {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        base: Option<usize>,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        max_k: Option<u32>,
    },
}

const EXPERIMENTS: &[(&str, &str)] = &[
    ("recon-convergence", "reconstruction error vs h on the pattern grid"),
    ("weight-convergence", "nonlinear-weight deviation vs h"),
    ("gradient-diagnostic", "gradient of the reconstruction map"),
    ("derivative-transport", "derivative truncation + transport convergence"),
    ("transport-disc", "square-wave transport error and total variation"),
    ("spectrum", "Fourier spectrum and SSPRK3 stability margins"),
    ("adaptive-transport", "adaptive efficiency, linear transport"),
    ("adaptive-burgers", "adaptive efficiency, Burgers"),
    ("shu-osher", "adaptive shock-acoustic interaction"),
    ("pond", "shallow-water pond conservation error"),
    ("quadtree2d", "2D quad-tree reconstruction errors"),
];

fn load_config<T: serde::de::DeserializeOwned + Default>(path: &Option<PathBuf>) -> Result<T, Error> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("bad config {}: {e}", p.display())))
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    experiment: &'a str,
    config: &'a C,
    version: &'a str,
    wall_time_secs: f64,
    outputs: Vec<&'a str>,
}

fn write_report<C: Serialize>(
    name: &str,
    config: &C,
    report: &Report,
    out: &Option<PathBuf>,
    elapsed: f64,
) -> Result<PathBuf, Error> {
    let dir = match out {
        Some(d) => d.clone(),
        None => {
            let ts = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            Path::new("runs").join(format!("{name}-{ts}"))
        }
    };
    std::fs::create_dir_all(&dir)?;
    for (file, content) in &report.files {
        std::fs::write(dir.join(file), content)?;
    }
    let manifest = Manifest {
        experiment: name,
        config,
        version: env!("CARGO_PKG_VERSION"),
        wall_time_secs: elapsed,
        outputs: report.files.iter().map(|(f, _)| f.as_str()).collect(),
    };
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Config(format!("manifest serialization: {e}")))?;
    std::fs::write(dir.join("manifest.json"), json)?;
    Ok(dir)
}

fn run(command: Command) -> Result<(), Error> {
    let started = Instant::now();
    let (name, common, config_json, report): (&str, CommonArgs, serde_json::Value, Report) =
        match command {
            Command::ReconConvergence {
                common,
                kind,
                function,
                levels,
            } => {
                let mut cfg: ReconStudyConfig = load_config(&common.config)?;
                if let Some(k) = kind {
                    cfg.kind = k;
                }
                if let Some(f) = function {
                    cfg.function = f;
                }
                if let Some(l) = levels {
                    cfg.levels = l;
                }
                let report = experiments::recon_convergence(&cfg)?;
                ("recon-convergence", common, serde_json::to_value(&cfg).unwrap(), report)
            }
            Command::WeightConvergence {
                common,
                kind,
                function,
                levels,
            } => {
                let mut cfg: ReconStudyConfig = load_config(&common.config)?;
                if let Some(k) = kind {
                    cfg.kind = k;
                }
                if let Some(f) = function {
                    cfg.function = f;
                }
                if let Some(l) = levels {
                    cfg.levels = l;
                }
                let report = experiments::weight_convergence(&cfg)?;
                ("weight-convergence", common, serde_json::to_value(&cfg).unwrap(), report)
            }
            Command::GradientDiagnostic { common, kind } => {
                let mut cfg: GradientConfig = load_config(&common.config)?;
                if let Some(k) = kind {
                    cfg.kind = k;
                }
                let report = experiments::gradient_diagnostic(&cfg)?;
                ("gradient-diagnostic", common, serde_json::to_value(&cfg).unwrap(), report)
            }
            Command::DerivativeTransport {
                common,
                kind,
                epsilon,
                max_n,
                seed,
            } => {
                let mut cfg: DerivativeTransportConfig = load_config(&common.config)?;
                if let Some(k) = kind {
                    cfg.kind = k;
                }
                if let Some(e) = epsilon {
                    cfg.epsilon = e;
                }
                if let Some(n) = max_n {
                    cfg.resolutions.retain(|&r| r <= n);
                }
                if let Some(s) = seed {
                    cfg.seed = s;
                }
                let report = experiments::derivative_transport(&cfg)?;
                ("derivative-transport", common, serde_json::to_value(&cfg).unwrap(), report)
            }
            Command::TransportDisc { common, kind } => {
                let mut cfg: TransportDiscConfig = load_config(&common.config)?;
                if let Some(k) = kind {
                    cfg.kind = k;
                }
                let report = experiments::transport_disc(&cfg)?;
                ("transport-disc", common, serde_json::to_value(&cfg).unwrap(), report)
            }
            Command::Spectrum { common, cells, cfl } => {
                let mut cfg: SpectrumConfig = load_config(&common.config)?;
                if let Some(c) = cells {
                    cfg.cells = c;
                }
                if let Some(c) = cfl {
                    cfg.cfl = c;
                }
                let report = experiments::spectrum(&cfg)?;
                ("spectrum", common, serde_json::to_value(&cfg).unwrap(), report)
            }
            Command::AdaptiveTransport { common, datum, coarse } => {
                let mut cfg: AdaptiveConfig = load_config(&common.config)?;
                cfg.datum = datum.unwrap_or_else(|| "u1".into());
                if let Some(c) = coarse {
                    cfg.coarse = c;
                }
                if !matches!(cfg.datum.as_str(), "u1" | "u2") {
                    return Err(Error::Config(format!(
                        "adaptive-transport expects u1 or u2, got '{}'",
                        cfg.datum
                    )));
                }
                let report = experiments::adaptive_efficiency(&cfg)?;
                ("adaptive-transport", common, serde_json::to_value(&cfg).unwrap(), report)
            }
            Command::AdaptiveBurgers {
                common,
                datum,
                coarse,
                reference_n,
            } => {
                let mut cfg: AdaptiveConfig = load_config(&common.config)?;
                cfg.datum = datum.unwrap_or_else(|| "u3".into());
                if let Some(c) = coarse {
                    cfg.coarse = c;
                }
                if let Some(r) = reference_n {
                    cfg.reference_n = r;
                }
                if !matches!(cfg.datum.as_str(), "u3" | "u4") {
                    return Err(Error::Config(format!(
                        "adaptive-burgers expects u3 or u4, got '{}'",
                        cfg.datum
                    )));
                }
                let report = experiments::adaptive_efficiency(&cfg)?;
                ("adaptive-burgers", common, serde_json::to_value(&cfg).unwrap(), report)
            }
            Command::ShuOsher {
                common,
                coarse,
                levels,
                reference_n,
            } => {
                let mut cfg: ShuOsherConfig = load_config(&common.config)?;
                if let Some(c) = coarse {
                    cfg.coarse = c;
                }
                if let Some(l) = levels {
                    cfg.levels = l;
                }
                if let Some(r) = reference_n {
                    cfg.reference_n = r;
                }
                let report = experiments::shu_osher(&cfg)?;
                ("shu-osher", common, serde_json::to_value(&cfg).unwrap(), report)
            }
            Command::Pond { common, resolutions } => {
                let mut cfg: PondConfig = load_config(&common.config)?;
                if let Some(r) = resolutions {
                    cfg.resolutions = r;
                }
                let report = experiments::pond_experiment(&cfg)?;
                ("pond", common, serde_json::to_value(&cfg).unwrap(), report)
            }
            Command::Quadtree2d {
                common,
                base,
                threshold,
                max_k,
            } => {
                let mut cfg: Quadtree2dConfig = load_config(&common.config)?;
                if let Some(b) = base {
                    cfg.base = b;
                }
                if let Some(t) = threshold {
                    cfg.threshold = t;
                }
                if let Some(k) = max_k {
                    cfg.max_k = k;
                }
                let report = experiments::quadtree(&cfg)?;
                ("quadtree2d", common, serde_json::to_value(&cfg).unwrap(), report)
            }
        };
    let dir = write_report(name, &config_json, &report, &common.out, started.elapsed().as_secs_f64())?;
    println!("{name}: {} files written to {}", report.files.len(), dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list {
        for (name, desc) in EXPERIMENTS {
            println!("{name:22} {desc}");
        }
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("no experiment given; use --list to see the available ones");
        return ExitCode::from(2);
    };
    match run(command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err {
                Error::Config(_) | Error::Mesh(_) => 2,
                _ => 3,
            };
            ExitCode::from(code)
        }
    }
}
