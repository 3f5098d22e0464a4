//! Suite runner: `leafwise verify` executes the full certification suite
//! and writes a stable-keyed report bundle; `leafwise profile` emits the
//! volume-coefficient CSV. Exit codes: 0 all checks pass, 1 check failure,
//! 2 configuration error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use leafwise::config::SuiteConfig;
use leafwise::suite::{self, CHECK_NAMES};

/// Thread-count cap honored when `--parallel` is set.
const THREADS_ENV: &str = "LEAFWISE_THREADS";

#[derive(Parser)]
#[command(name = "leafwise", about = "certification suite for the leafwise symplectic engine", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification suite and write the report bundle.
    Verify {
        /// Flat key = value configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Run a single check (one of the registered names).
        #[arg(long, value_parser = CHECK_NAMES.to_vec())]
        only: Option<String>,
        /// Enable per-check parallelism (capped by LEAFWISE_THREADS).
        #[arg(long)]
        parallel: bool,
        /// Output directory for report.txt and volume_profile.csv
        /// (defaults to the config's out_dir key).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the volume-coefficient profile CSV.
    Profile {
        #[arg(long)]
        config: PathBuf,
        /// CSV output path.
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(path: &Path, parallel: bool) -> Result<SuiteConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config `{}`: {e}", path.display()))?;
    let mut cfg = SuiteConfig::parse(&text).map_err(|e| e.to_string())?;
    if parallel {
        cfg.parallel = true;
    }
    Ok(cfg)
}

fn init_thread_pool(parallel: bool) {
    if !parallel {
        return;
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(n) = std::env::var(THREADS_ENV) {
        if let Ok(n) = n.parse::<usize>() {
            builder = builder.num_threads(n.max(1));
        }
    }
    // a failed build means a pool already exists, which is fine
    let _ = builder.build_global();
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify {
            config,
            only,
            parallel,
            out,
        } => {
            let cfg = match load_config(&config, parallel) {
                Ok(c) => c,
                Err(msg) => {
                    eprintln!("{msg}");
                    return ExitCode::from(2);
                }
            };
            init_thread_pool(cfg.parallel);
            let out = out.unwrap_or_else(|| PathBuf::from(&cfg.out_dir));
            let outcome = match suite::run_suite(&cfg, only.as_deref()) {
                Ok(o) => o,
                Err(e) => {
                    eprintln!("suite error: {e}");
                    return ExitCode::from(1);
                }
            };
            if let Err(e) = std::fs::create_dir_all(&out) {
                eprintln!("cannot create output directory `{}`: {e}", out.display());
                return ExitCode::from(2);
            }
            let report_path = out.join("report.txt");
            let profile_path = out.join("volume_profile.csv");
            if let Err(e) = std::fs::write(&report_path, &outcome.report_text) {
                eprintln!("cannot write `{}`: {e}", report_path.display());
                return ExitCode::from(2);
            }
            if let Err(e) = std::fs::write(&profile_path, &outcome.profile_csv) {
                eprintln!("cannot write `{}`: {e}", profile_path.display());
                return ExitCode::from(2);
            }
            for r in &outcome.reports {
                println!("{}", r.console_line());
            }
            println!(
                "{} checks, {} passed; bundle written to {}",
                outcome.reports.len(),
                outcome.reports.iter().filter(|r| r.passed).count(),
                out.display()
            );
            if outcome.all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Profile { config, out } => {
            let cfg = match load_config(&config, false) {
                Ok(c) => c,
                Err(msg) => {
                    eprintln!("{msg}");
                    return ExitCode::from(2);
                }
            };
            let csv = match suite::profile_volume(&cfg) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("profile error: {e}");
                    return ExitCode::from(1);
                }
            };
            if let Some(parent) = out.parent() {
                if !parent.as_os_str().is_empty() {
                    if let Err(e) = std::fs::create_dir_all(parent) {
                        eprintln!("cannot create `{}`: {e}", parent.display());
                        return ExitCode::from(2);
                    }
                }
            }
            if let Err(e) = std::fs::write(&out, csv) {
                eprintln!("cannot write `{}`: {e}", out.display());
                return ExitCode::from(2);
            }
            println!("profile written to {}", out.display());
            ExitCode::SUCCESS
        }
    }
}
