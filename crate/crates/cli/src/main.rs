use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use holomimo_cli::commands::{cmd_capacity, cmd_gramian, cmd_sweep, GramianMode, Output};
use holomimo_cli::config::ScenarioConfig;
use holomimo_cli::output::write_outputs;
use holomimo_cli::validate::{lemma1_suite, quadrature_suite, riemann_suite, Suite};
use holomimo_cli::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "holomimo", version, about = "Polarized near-field MIMO capacity scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Scenario file (TOML).
    config: PathBuf,
    /// Override a config entry, e.g. `--set rx.theta_deg=40`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Directory for results.csv and summary.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the normalized Gramian and its eigenvalues.
    Gramian {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "finite")]
        mode: GramianMode,
    },
    /// Waterfilling spectral efficiency of the configured link.
    Capacity {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "finite")]
        mode: GramianMode,
    },
    /// Evaluate the [sweep] grid, locate the optimum and fraction targets.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Run an oracle suite and report the worst observed error.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        cases: usize,
    },
}

fn emit(common: &Common, out: Output) -> CliResult<()> {
    print!("{}", out.text);
    if let Some(dir) = &common.out {
        write_outputs(dir, &out.csv, &out.summary)?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Gramian { common, mode } => {
            let cfg = ScenarioConfig::load(&common.config, &common.overrides)?;
            emit(&common, cmd_gramian(&cfg, mode)?)
        }
        Command::Capacity { common, mode } => {
            let cfg = ScenarioConfig::load(&common.config, &common.overrides)?;
            emit(&common, cmd_capacity(&cfg, mode)?)
        }
        Command::Sweep { common } => {
            let cfg = ScenarioConfig::load(&common.config, &common.overrides)?;
            emit(&common, cmd_sweep(&cfg)?)
        }
        Command::Validate {
            common,
            suite,
            seed,
            cases,
        } => {
            let cfg = ScenarioConfig::load(&common.config, &common.overrides)?;
            let report = match suite {
                Suite::Lemma1 => lemma1_suite(seed, cases, cfg.constants.xi_abs.max(f64::MIN_POSITIVE))?,
                Suite::Quadrature => quadrature_suite(seed, cases)?,
                Suite::Riemann => riemann_suite()?,
            };
            print!("{}", report.render());
            if let Some(dir) = &common.out {
                let csv = report.checks.iter().fold(
                    String::from("check,max_error,tolerance,worst_case,advisory,failures\n"),
                    |mut s, c| {
                        s.push_str(&format!(
                            "{},{:e},{:e},{},{},{}\n",
                            c.name,
                            c.max_error,
                            c.tolerance,
                            c.worst_case,
                            c.advisory,
                            c.failures.len()
                        ));
                        s
                    },
                );
                write_outputs(dir, &csv, &report)?;
            }
            if report.passed() {
                Ok(())
            } else {
                Err(CliError::Validation(format!(
                    "suite {} has failing checks",
                    report.suite
                )))
            }
        }
    }
}


fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
