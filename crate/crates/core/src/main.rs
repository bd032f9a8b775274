use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use winocheck::harness::{
    cmd_aggregate, cmd_eval, cmd_ingest, cmd_pairs, cmd_report, cmd_splits, cmd_transform, RunConfig, ScorerMode,
    ENDPOINT_ENV,
};
use winocheck::scoring::{render_table, Setup};
use winocheck::transforms::Mode;
use winocheck::{Execution, Result};

/// Twin-aware evaluation for Winograd-schema style datasets.
#[derive(Debug, Parser)]
#[command(name = "winocheck", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Overrides `output_dir`.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Run data-parallel work on the current thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate the configured datasets.
    Ingest(Common),
    /// Reconstruct twin groups and apply exclusion lists.
    Pairs(Common),
    /// Build the ablation and zero-shot inputs.
    Transform {
        #[command(flatten)]
        common: Common,
        /// Restrict to these modes (repeatable).
        #[arg(long = "mode")]
        modes: Vec<Mode>,
    },
    /// Score each setup and write per-setup reports.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Restrict to these setups (repeatable).
        #[arg(long = "setup")]
        setups: Vec<Setup>,
        #[arg(long)]
        scorer: Option<ScorerMode>,
        #[arg(long, env = ENDPOINT_ENV)]
        endpoint: Option<String>,
        /// Directory of response files for the file scorer.
        #[arg(long)]
        responses: Option<PathBuf>,
        #[arg(long)]
        max_in_flight: Option<usize>,
        /// Re-query this many requests and fail if any answer changes.
        #[arg(long)]
        verify_determinism: Option<usize>,
    },
    /// Write nested learning-curve split manifests, or aggregate run scores.
    Splits {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long)]
        n_seeds: Option<usize>,
        #[arg(long)]
        holdout: Option<usize>,
        /// Aggregate a file of per-run scores instead of writing manifests.
        #[arg(long, value_name = "RUNS")]
        aggregate: Option<PathBuf>,
    },
    /// Render the result table from the evaluation reports.
    Report {
        #[command(flatten)]
        common: Common,
        /// Add reference scores and differences.
        #[arg(long, alias = "compare-paper")]
        compare_reference: bool,
        /// Model name to look up reference scores under.
        #[arg(long)]
        reference_model: Option<String>,
    },
}

fn load(common: &Common) -> Result<(RunConfig, Execution)> {
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(dir) = &common.output_dir {
        cfg.output_dir = std::env::current_dir()
            .map(|cwd| cwd.join(dir))
            .unwrap_or_else(|_| dir.clone());
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let exec = if common.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    Ok((cfg, exec))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest(common) => {
            let (cfg, _) = load(&common)?;
            for c in cmd_ingest(&cfg)? {
                println!("{}\t{} instances", c.dataset, c.instances);
            }
        }
        Command::Pairs(common) => {
            let (cfg, exec) = load(&common)?;
            for c in cmd_pairs(&cfg, exec)? {
                println!(
                    "{}\t{} paired instances\t{} groups\t{} orphans\t{} excluded",
                    c.dataset, c.paired_instances, c.groups, c.orphans, c.excluded
                );
            }
        }
        Command::Transform { common, modes } => {
            let (mut cfg, exec) = load(&common)?;
            if !modes.is_empty() {
                cfg.modes = modes;
            }
            for c in cmd_transform(&cfg, exec)? {
                let reasons: Vec<String> = c.reasons.iter().map(|(k, v)| format!("{k}={v}")).collect();
                println!(
                    "{}\t{}\t{} produced\t{} skipped\t{}",
                    c.dataset,
                    c.mode,
                    c.produced,
                    c.skipped,
                    reasons.join(" ")
                );
            }
        }
        Command::Eval {
            common,
            setups,
            scorer,
            endpoint,
            responses,
            max_in_flight,
            verify_determinism,
        } => {
            let (mut cfg, _) = load(&common)?;
            if !setups.is_empty() {
                cfg.setups = setups;
            }
            if let Some(m) = scorer {
                cfg.scorer.mode = m;
            }
            if endpoint.is_some() {
                cfg.scorer.endpoint = endpoint;
            }
            if let Some(r) = responses {
                cfg.scorer.responses = Some(std::env::current_dir().map(|c| c.join(&r)).unwrap_or(r));
            }
            if let Some(n) = max_in_flight {
                cfg.scorer.max_in_flight = n;
            }
            if let Some(n) = verify_determinism {
                cfg.scorer.verify_determinism = n;
            }
            cfg.check()?;
            print!("{}", render_table(&cmd_eval(&cfg)?));
        }
        Command::Splits {
            common,
            sizes,
            n_seeds,
            holdout,
            aggregate,
        } => {
            let (mut cfg, _) = load(&common)?;
            if let Some(s) = cfg.splits.as_mut() {
                if let Some(sizes) = sizes {
                    s.sizes = sizes;
                }
                if let Some(n) = n_seeds {
                    s.n_seeds = n;
                }
                if let Some(h) = holdout {
                    s.holdout = h;
                }
            }
            cfg.check()?;
            match aggregate {
                Some(runs) => {
                    let (table, _) = cmd_aggregate(&cfg, &runs)?;
                    print!("{table}");
                }
                None => {
                    for m in cmd_splits(&cfg)? {
                        println!(
                            "{}\treplicate {}\t{} sizes\tholdout {}",
                            m.dataset,
                            m.replicate,
                            m.sizes.len(),
                            m.holdout.len()
                        );
                    }
                }
            }
        }
        Command::Report {
            common,
            compare_reference,
            reference_model,
        } => {
            let (cfg, _) = load(&common)?;
            print!("{}", cmd_report(&cfg, compare_reference, reference_model.as_deref())?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
