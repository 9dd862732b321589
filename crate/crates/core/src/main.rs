use clap::{Parser, Subcommand};
use ins_align::config::{ConfigError, ExperimentConfig};
use ins_align::imu::write_csv;
use ins_align::runner::{
    error_record, export_monte_carlo, export_run, monte_carlo, run_experiment, Experiment, RunError,
};
use ins_align::shipped;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Strapdown INS alignment experiments: simulate, run observers, export results.
///
/// CONFIG is a path to a TOML file or the name of a shipped configuration
/// (see `list-scenarios`). INS_ALIGN_OUTPUT_DIR overrides the output
/// directory; results then go to `$INS_ALIGN_OUTPUT_DIR/<name>`.
#[derive(Parser)]
#[command(name = "ins-align", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every observer the configuration requests and write the summary.
    Run { config: String },
    /// Run the configured number of seeded filter runs.
    Montecarlo { config: String },
    /// List the shipped configurations.
    ListScenarios,
    /// Write the simulated IMU stream as CSV.
    DumpImu {
        config: String,
        /// Only this segment (index into the configuration), with derivative columns.
        #[arg(long)]
        segment: Option<usize>,
        /// Output file (default: <output dir>/imu.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(arg: &str) -> Result<ExperimentConfig, RunError> {
    let path = Path::new(arg);
    if path.exists() {
        return Ok(ExperimentConfig::from_path(path)?);
    }
    match shipped::get(arg) {
        Some(text) => Ok(ExperimentConfig::from_toml(text, arg)?),
        None => Err(ConfigError::Read {
            path: arg.to_string(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or shipped configuration"),
        }
        .into()),
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.display().to_string(), source }
}

fn run(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::ListScenarios => {
            for (name, text) in shipped::CONFIGS {
                let description = ExperimentConfig::from_toml(text, name).map(|c| c.description).unwrap_or_default();
                println!("{name:<32} {description}");
            }
        }
        Command::Run { config } => {
            let cfg = load(&config)?;
            let summary = run_experiment(&cfg)?;
            let written = export_run(&cfg, &summary, &cfg.output_dir())?;
            eprintln!("{}: done in {:.2} s", cfg.name, summary.wall_time_s);
            for row in &summary.residuals {
                println!("{:<20} {:<32} {:.6e}", row.source, row.quantity, row.value);
            }
            for p in written {
                eprintln!("wrote {}", p.display());
            }
        }
        Command::Montecarlo { config } => {
            let cfg = load(&config)?;
            let report = monte_carlo(&cfg)?;
            let written = export_monte_carlo(&cfg, &report, &cfg.output_dir())?;
            eprintln!("{}: {} runs ({} failed) in {:.2} s", cfg.name, report.runs, report.failed, report.wall_time_s);
            for (name, p) in [
                ("gyro_norm", &report.gyro_norm),
                ("accel_norm", &report.accel_norm),
                ("dot_product", &report.dot_product),
            ] {
                if let Some(p) = p {
                    println!("{name:<12} p50 {:.3e}  p95 {:.3e}  max {:.3e}", p.p50, p.p95, p.max);
                }
            }
            for p in written {
                eprintln!("wrote {}", p.display());
            }
        }
        Command::DumpImu { config, segment, out } => {
            let cfg = load(&config)?;
            let exp = Experiment::new(&cfg)?;
            let records = match segment {
                None => exp.records.clone(),
                Some(i) => {
                    let phase = exp.sim.segment_phase(i).copied().ok_or_else(|| {
                        RunError::Config(ConfigError::Validation(format!("no segment {i} in {}", cfg.name)))
                    })?;
                    if phase.is_rotation() {
                        exp.rotation_records(&phase)?
                    } else {
                        exp.records[phase.k_start..phase.k_end].to_vec()
                    }
                }
            };
            let path = out.unwrap_or_else(|| cfg.output_dir().join("imu.csv"));
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(io_err(dir))?;
            }
            let file = fs::File::create(&path).map_err(io_err(&path))?;
            let mut w = BufWriter::new(file);
            write_csv(&mut w, &records).and_then(|_| w.flush()).map_err(io_err(&path))?;
            eprintln!("wrote {} records to {}", records.len(), path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("{}", error_record(&e));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
