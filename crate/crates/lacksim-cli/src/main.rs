//! Batch frontend: run covert-channel call simulations and emit curve data
//! from a `key = value` experiment config or a named preset.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use lacksim::config::{self, example_config, parse_config, ExperimentConfig};
use lacksim::report;
use lacksim::simulator::{duration_distribution_check, run_batch, run_call};

#[derive(Parser)]
#[command(
    name = "lacksim",
    version,
    about = "Delay-based VoIP covert channel simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigSource {
    /// Experiment config file (see `lacksim validate-config --template`)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in preset name
    #[arg(long, global = true, value_parser = config::PRESETS.to_vec())]
    preset: Option<String>,
    /// Override the master seed
    #[arg(long, global = true)]
    seed: Option<u64>,
}

impl ConfigSource {
    fn load(&self) -> Result<ExperimentConfig> {
        let text = match (&self.config, &self.preset) {
            (Some(path), None) => fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?,
            (None, Some(name)) => config::preset(name).ok_or_else(|| anyhow!("unknown preset"))?,
            (None, None) => config::preset("g711-baseline").expect("builtin"),
            (Some(_), Some(_)) => bail!("--config and --preset are mutually exclusive"),
        };
        let mut experiment = parse_config(&text)?;
        if let Some(seed) = self.seed {
            experiment.seed = seed;
        }
        if let Some(file) = experiment.covert_file.clone() {
            let bytes = fs::read(&file).with_context(|| format!("reading covert file {file}"))?;
            config::with_covert_bytes(&mut experiment, bytes)?;
        }
        Ok(experiment)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo batch and write per-call CSV plus a JSON summary
    Simulate {
        #[command(flatten)]
        source: ConfigSource,
        /// Output directory for calls.csv and summary.json
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Also write per-call insertion-rate trajectories
        #[arg(long)]
        trajectories: bool,
        /// Write the extracted covert bitstream (single-call runs only)
        #[arg(long)]
        extract_out: Option<PathBuf>,
        /// Kolmogorov-Smirnov check of the simulated durations (>= 100 calls)
        #[arg(long)]
        check_durations: bool,
    },
    /// Density curves of the calibrated Weibull set
    EmitFig2 {
        #[command(flatten)]
        source: ConfigSource,
        #[arg(long, default_value = "fig2.csv")]
        out: PathBuf,
    },
    /// Conditional-mean curves E(D | D > t)
    EmitFig3 {
        #[command(flatten)]
        source: ConfigSource,
        #[arg(long, default_value = "fig3.csv")]
        out: PathBuf,
    },
    /// Insertion-rate curves (frozen and depleted budget)
    EmitFig4 {
        #[command(flatten)]
        source: ConfigSource,
        #[arg(long, default_value = "fig4.csv")]
        out: PathBuf,
    },
    /// Verify the calibrated parameter table (mean and cv tolerances)
    CheckTable1 {
        /// Also write the report CSV here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse a config and report every violation
    ValidateConfig {
        #[command(flatten)]
        source: ConfigSource,
        /// Print a commented template config instead
        #[arg(long)]
        template: bool,
    },
}

fn write_out(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn simulate(
    source: &ConfigSource,
    out: &Path,
    trajectories: bool,
    extract_out: Option<&Path>,
    check_durations: bool,
) -> Result<()> {
    let mut experiment = source.load()?;
    if extract_out.is_some() {
        if experiment.n_calls != 1 {
            bail!(
                "--extract-out needs n_calls = 1, got {}",
                experiment.n_calls
            );
        }
        experiment.sim.record_streams = true;
    }

    if let Some(extract_path) = extract_out {
        let outcome = run_call(&experiment.sim, experiment.seed, 0)?;
        let mut extracted = outcome.streams.expect("streams recorded").extracted;
        extracted.truncate_bits(experiment.sim.scheduler.covert_budget_bits);
        fs::write(extract_path, extracted.as_bytes())?;
        eprintln!(
            "wrote {} ({} covert bits)",
            extract_path.display(),
            extracted.len_bits()
        );
        let summary = report::summary_json(&run_batch(&experiment.sim, 1, experiment.seed)?.0);
        write_out(&out.join("summary.json"), &summary)?;
        return Ok(());
    }

    let (summary, metrics) = run_batch(&experiment.sim, experiment.n_calls, experiment.seed)?;
    fs::create_dir_all(out)?;
    write_out(&out.join("calls.csv"), &report::calls_csv(&metrics))?;
    write_out(&out.join("summary.json"), &report::summary_json(&summary))?;
    if trajectories {
        write_out(
            &out.join("trajectories.csv"),
            &report::trajectories_csv(&metrics),
        )?;
    }
    if check_durations {
        let durations: Vec<f64> = metrics.iter().map(|m| m.duration).collect();
        let check = duration_distribution_check(&durations, &experiment.sim.model)?;
        println!(
            "duration KS check: statistic {:.5}, p = {:.4} -> {}",
            check.statistic,
            check.p_value,
            if check.pass {
                "consistent with the model"
            } else {
                "REJECTED"
            }
        );
    }
    println!("{}", report::summary_json(&summary).trim_end());
    Ok(())
}

fn run() -> Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate {
            source,
            out,
            trajectories,
            extract_out,
            check_durations,
        } => {
            simulate(
                &source,
                &out,
                trajectories,
                extract_out.as_deref(),
                check_durations,
            )?;
            Ok(true)
        }
        Command::EmitFig2 { source, out } => {
            let experiment = source.load()?;
            write_out(
                &out,
                &report::fig2_csv(experiment.t_max, experiment.grid_step)?,
            )?;
            Ok(true)
        }
        Command::EmitFig3 { source, out } => {
            let experiment = source.load()?;
            write_out(
                &out,
                &report::fig3_csv(experiment.t_max, experiment.grid_step)?,
            )?;
            Ok(true)
        }
        Command::EmitFig4 { source, out } => {
            let experiment = source.load()?;
            write_out(&out, &report::fig4_csv(&experiment)?)?;
            Ok(true)
        }
        Command::CheckTable1 { out } => {
            let (table, all_pass) = report::calibration_report();
            print!("{table}");
            if let Some(path) = out {
                write_out(&path, &table)?;
            }
            println!(
                "{}",
                if all_pass {
                    "all rows pass"
                } else {
                    "TOLERANCE CHECK FAILED"
                }
            );
            Ok(all_pass)
        }
        Command::ValidateConfig { source, template } => {
            if template {
                print!("{}", example_config());
                return Ok(true);
            }
            match source.load() {
                Ok(_) => {
                    println!("config ok");
                    Ok(true)
                }
                Err(e) => {
                    eprintln!("{e:#}");
                    Ok(false)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
