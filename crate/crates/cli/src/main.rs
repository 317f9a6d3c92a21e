use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use raremap_cli::config::ExperimentConfig;
use raremap_cli::scenario::{RunError, Setup};
use raremap_cli::{run_to_dir, selftest};
use raremap_core::grid::{write_kernel_csv, write_stationary_csv, KernelHeader};
use raremap_core::MapSpec;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "raremap",
    version,
    about = "Rare-event experiments for randomly perturbed maps"
)]
struct Cli {
    /// Override the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a config file.
    Run { config: PathBuf },
    /// Write the grid kernel and stationary density of a config.
    KernelExport { config: PathBuf },
    /// List the available maps.
    ListMaps,
    /// Check the statistical harness against known null laws.
    Selftest,
}

fn load(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig, ExitCode> {
    match ExperimentConfig::load(path) {
        Ok(mut cfg) => {
            if let Some(s) = seed {
                cfg.seed = s;
            }
            Ok(cfg)
        }
        Err(e) => {
            eprintln!("error: {e}");
            Err(ExitCode::from(EXIT_USAGE))
        }
    }
}

fn export(cfg: &ExperimentConfig, out: &Path) -> Result<(), RunError> {
    let setup = Setup::new(cfg)?;
    std::fs::create_dir_all(out)?;
    let header = KernelHeader::new(&setup.system, &setup.kernel);
    std::fs::write(out.join("kernel.json"), serde_json::to_string_pretty(&header)? + "\n")?;
    write_kernel_csv(
        &setup.kernel,
        std::io::BufWriter::new(std::fs::File::create(out.join("kernel.csv"))?),
    )?;
    write_stationary_csv(
        &setup.kernel,
        &setup.density,
        std::io::BufWriter::new(std::fs::File::create(out.join("stationary.csv"))?),
    )?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("thread pool is configured once");
    }
    match cli.command {
        Command::ListMaps => {
            for (id, about) in MapSpec::catalog() {
                println!("{id:<18} {about}");
            }
            ExitCode::SUCCESS
        }
        Command::Selftest => {
            let checks = selftest::run(cli.seed.unwrap_or(0));
            for c in &checks {
                println!(
                    "{} {} ({}: {})",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.requirement,
                    c.value
                );
            }
            if checks.iter().all(|c| c.pass) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAIL)
            }
        }
        Command::KernelExport { config } => {
            let cfg = match load(&config, cli.seed) {
                Ok(c) => c,
                Err(code) => return code,
            };
            match export(&cfg, &cli.out) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_FAIL)
                }
            }
        }
        Command::Run { config } => {
            let cfg = match load(&config, cli.seed) {
                Ok(c) => c,
                Err(code) => return code,
            };
            match run_to_dir(&cfg, &cli.out) {
                Ok(manifest) => {
                    for c in &manifest.criteria {
                        println!(
                            "{} {} ({}: {})",
                            if c.pass { "PASS" } else { "FAIL" },
                            c.name,
                            c.requirement,
                            c.value
                        );
                    }
                    if manifest.pass {
                        ExitCode::SUCCESS
                    } else {
                        let failing: Vec<&str> = manifest
                            .criteria
                            .iter()
                            .filter(|c| !c.pass)
                            .map(|c| c.name.as_str())
                            .collect();
                        eprintln!("failing criteria: {}", failing.join(", "));
                        ExitCode::from(EXIT_FAIL)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_FAIL)
                }
            }
        }
    }
}
