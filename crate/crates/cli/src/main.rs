//! Command-line runner: classify a Hamiltonian's spectral region, execute a
//! scenario config, reproduce the worked figures, or sweep parameter grids.

mod config;
mod output;
mod runner;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

use nhqfi_core::linalg::{eigenvalues, textio, tol};
use nhqfi_core::metric::{biorthogonal_metric, pseudo_hermiticity_residual};
use nhqfi_core::models::{classify_matrix, RegionLabel};

use config::{
    apply_override, FormalismId, GridConfig, ModelConfig, ScenarioConfig, StateConfig, SweepConfig,
};
use output::{fmt_f64, write_file};
use runner::run_scenario;

/// Environment variable holding the default output directory.
pub const OUT_DIR_ENV: &str = "NHQFI_OUT_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure in {stage}: {message}")]
    Numerical {
        stage: &'static str,
        message: String,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "nhqfi",
    about = "Compare probability-conserving treatments of non-Hermitian qubit dynamics and their quantum Fisher information"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the spectral region of a Hamiltonian.
    Classify {
        /// Matrix file: first line dim, then dim^2 lines "re im" (row-major).
        #[arg(long, conflicts_with_all = ["model", "config"])]
        matrix: Option<PathBuf>,
        /// Inline model JSON, e.g.
        /// '{"kind":"gain_loss","omega0":0,"g":0.5,"gamma":0.4}'.
        #[arg(long, conflicts_with = "config")]
        model: Option<String>,
        /// Scenario config whose model section is classified.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Relative classification tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run a scenario config and write trajectory/QFI/summary artifacts.
    Run {
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Override the grid point count of the config.
        #[arg(long)]
        grid_points: Option<usize>,
        /// Override the region-classification tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Reproduce a worked figure's data files (fig3, fig4, fig5, fig6).
    Reproduce {
        figure: String,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run the cartesian parameter sweep described by a sweep config.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Classify {
            matrix,
            model,
            config,
            tol,
        } => cmd_classify(matrix, model, config, tol),
        Command::Run {
            config,
            out_dir,
            grid_points,
            tol,
        } => cmd_run(&config, out_dir, grid_points, tol),
        Command::Reproduce { figure, out_dir } => cmd_reproduce(&figure, out_dir),
        Command::Sweep { config, out_dir } => cmd_sweep(&config, out_dir),
    }
}

fn resolve_out_dir(flag: Option<PathBuf>, config_dir: Option<&str>) -> PathBuf {
    if let Some(dir) = flag {
        return dir;
    }
    if let Some(dir) = config_dir {
        return PathBuf::from(dir);
    }
    if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    PathBuf::from("out")
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

fn model_matrix(model: &ModelConfig) -> Result<nhqfi_core::ComplexMatrix, CliError> {
    use nhqfi_core::models::{make_decaying_qubit, make_gain_loss, make_general2x2};
    Ok(match *model {
        ModelConfig::General2x2 { r, s, tau, phi } => make_general2x2(r, s, tau, phi).matrix,
        ModelConfig::GainLoss { omega0, g, gamma } => make_gain_loss(omega0, g, gamma).matrix,
        ModelConfig::DecayingQubit { omega, gamma } => {
            make_decaying_qubit(omega, gamma)
                .map_err(|e| CliError::Numerical {
                    stage: "model construction",
                    message: e.to_string(),
                })?
                .0
                .matrix
        }
    })
}

fn cmd_classify(
    matrix: Option<PathBuf>,
    model: Option<String>,
    config: Option<PathBuf>,
    tol_override: Option<f64>,
) -> Result<(), CliError> {
    let h = if let Some(path) = matrix {
        textio::parse_matrix(&read_to_string(&path)?)
            .map_err(|e| CliError::Config(e.to_string()))?
    } else if let Some(json) = model {
        let model: ModelConfig =
            serde_json::from_str(&json).map_err(|e| CliError::Config(e.to_string()))?;
        model_matrix(&model)?
    } else if let Some(path) = config {
        let scenario = ScenarioConfig::parse(&read_to_string(&path)?)?;
        model_matrix(&scenario.model)?
    } else {
        return Err(CliError::Config(
            "classify needs one of --matrix, --model, --config".into(),
        ));
    };
    let tolerance = tol_override.unwrap_or(tol::EIGEN_DEGENERACY);
    let region = classify_matrix(&h, tolerance);
    println!("region: {region}");
    let eigs = eigenvalues(&h).map_err(|e| CliError::Numerical {
        stage: "eigenvalues",
        message: e.to_string(),
    })?;
    for z in &eigs {
        println!("eigenvalue: re={} im={}", fmt_f64(z.re), fmt_f64(z.im));
    }
    match region {
        RegionLabel::NonHermitianReal => match biorthogonal_metric(&h) {
            Ok(metric) => {
                let r =
                    pseudo_hermiticity_residual(&h, &metric).map_err(|e| CliError::Numerical {
                        stage: "pseudo-hermiticity residual",
                        message: e.to_string(),
                    })?;
                println!(
                    "pseudo-hermiticity residual (biorthogonal metric): {}",
                    fmt_f64(r)
                );
            }
            Err(e) => println!("note: biorthogonal metric unavailable ({e})"),
        },
        RegionLabel::NonHermitianComplex => {
            println!("note: static biorthogonal metric unavailable (complex spectrum)");
        }
        RegionLabel::HermitianReal => {
            println!("note: Hermitian; the metric is the identity");
        }
    }
    Ok(())
}

fn cmd_run(
    config_path: &Path,
    out_dir: Option<PathBuf>,
    grid_points: Option<usize>,
    tol_override: Option<f64>,
) -> Result<(), CliError> {
    let mut config = ScenarioConfig::parse(&read_to_string(config_path)?)?;
    if let Some(points) = grid_points {
        config.grid.points = points;
    }
    if let Some(t) = tol_override {
        config.tolerances = Some(config::ToleranceConfig { region: Some(t) });
    }
    config.validate()?;
    let dir = resolve_out_dir(out_dir, config.out_dir.as_deref());
    let summary = run_scenario(&config, &dir)?;
    println!("region: {}", summary.region);
    println!("artifacts written to {}", dir.display());
    Ok(())
}

/// Baked-in parameter sets of the worked figures.
fn figure_config(figure: &str) -> Result<ScenarioConfig, CliError> {
    let gain_loss = ModelConfig::GainLoss {
        omega0: 0.0,
        g: 0.5,
        gamma: 0.4,
    };
    let decaying = ModelConfig::DecayingQubit {
        omega: 0.5,
        gamma: 0.4,
    };
    let all = vec![
        FormalismId::Metric,
        FormalismId::Norm,
        FormalismId::Nj,
        FormalismId::Me,
    ];
    let three = vec![FormalismId::Metric, FormalismId::Norm, FormalismId::Me];
    let config = match figure {
        "fig3" => ScenarioConfig {
            model: gain_loss,
            state: StateConfig {
                theta: 0.6,
                x: 0.24,
            },
            grid: GridConfig {
                t_max: 20.0,
                points: 2001,
            },
            formalisms: three,
            out_dir: None,
            tolerances: None,
            me_rate_scale: None,
        },
        "fig4" => ScenarioConfig {
            model: gain_loss,
            state: StateConfig {
                theta: 0.6,
                x: 0.24,
            },
            grid: GridConfig {
                t_max: 35.0,
                points: 1401,
            },
            formalisms: all,
            out_dir: None,
            tolerances: None,
            me_rate_scale: None,
        },
        "fig5" => ScenarioConfig {
            model: decaying,
            state: StateConfig {
                theta: 0.4,
                x: 0.24,
            },
            grid: GridConfig {
                t_max: 20.0,
                points: 2001,
            },
            formalisms: three,
            out_dir: None,
            tolerances: None,
            me_rate_scale: None,
        },
        "fig6" => ScenarioConfig {
            model: decaying,
            state: StateConfig { theta: 0.4, x: 0.0 },
            grid: GridConfig {
                t_max: 20.0,
                points: 1601,
            },
            formalisms: all,
            out_dir: None,
            tolerances: None,
            me_rate_scale: None,
        },
        other => {
            return Err(CliError::Config(format!(
                "unknown figure id {other:?}; expected fig3, fig4, fig5 or fig6"
            )))
        }
    };
    Ok(config)
}

fn cmd_reproduce(figure: &str, out_dir: Option<PathBuf>) -> Result<(), CliError> {
    let config = figure_config(figure)?;
    config.validate()?;
    let base = resolve_out_dir(out_dir, None);
    let dir = base.join(figure);
    run_scenario(&config, &dir)?;
    println!("{figure} data written to {}", dir.display());
    Ok(())
}

fn cmd_sweep(config_path: &Path, out_dir: Option<PathBuf>) -> Result<(), CliError> {
    let sweep = SweepConfig::parse(&read_to_string(config_path)?)?;
    let dir = resolve_out_dir(out_dir, sweep.base.out_dir.as_deref());
    let points = sweep.points();
    let keys: Vec<String> = sweep.sweep.keys().cloned().collect();
    let mut manifest = String::new();
    manifest.push_str("index,");
    manifest.push_str(&keys.join(","));
    manifest.push_str(",out_dir\n");
    for (index, assignment) in points.iter().enumerate() {
        let mut config = sweep.base.clone();
        for (key, value) in assignment {
            apply_override(&mut config, key, *value)?;
        }
        config.validate()?;
        let point_dir = dir.join(format!("point_{index:04}"));
        run_scenario(&config, &point_dir)?;
        let values: Vec<String> = assignment.iter().map(|(_, v)| fmt_f64(*v)).collect();
        manifest.push_str(&format!("{index},{},point_{index:04}\n", values.join(","),));
    }
    write_file(&dir.join("manifest.csv"), &manifest)?;
    println!(
        "swept {} points over {{{}}} into {}",
        points.len(),
        keys.join(", "),
        dir.display()
    );
    Ok(())
}
