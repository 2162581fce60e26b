use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use sigfs::bpso::Strategy;
use sigfs::harness::{
    cmd_baseline, cmd_eval, cmd_gen, cmd_optimize, cmd_report, Experiment, ExperimentConfig,
};
use sigfs::synthetic::GeneratorSpec;

/// Writer-independent signature verification with BPSO feature selection.
#[derive(Parser)]
#[command(name = "sigfs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML file: a generator spec for `gen`, an experiment config otherwise.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset (dataset.csv + manifest.json).
    Gen(Common),
    /// Evaluate the all-features baseline on every replication.
    Baseline(Common),
    /// Run feature selection; all configured strategies unless one is given.
    Optimize {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_strategy)]
        strategy: Option<Strategy>,
    },
    /// Evaluate a stored mask on the exploitation writers or another dataset.
    Eval {
        #[command(flatten)]
        common: Common,
        /// best_mask.json written by `optimize`.
        #[arg(long)]
        mask: PathBuf,
        /// Target dataset CSV; defaults to the exploitation split.
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Summarize a run directory into report.md and report.csv.
    Report {
        /// Run directory; defaults to the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e: sigfs::Error| e.to_string())
}

fn experiment(common: &Common) -> anyhow::Result<(Experiment, PathBuf)> {
    let mut config = ExperimentConfig::load(&common.config)
        .with_context(|| format!("loading config {}", common.config.display()))?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(out) = &common.out {
        config.output_dir = out.clone();
    }
    let out = config.output_dir.clone();
    let exp = Experiment::load(config).context("loading datasets")?;
    Ok((exp, out))
}

fn gen(common: &Common) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&common.config)
        .with_context(|| format!("reading generator spec {}", common.config.display()))?;
    let mut spec = GeneratorSpec::from_toml(&text)?;
    if let Some(seed) = common.seed {
        spec.seed = seed;
    }
    let out = common.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let ws = cmd_gen(&spec, &out)?;
    println!(
        "wrote {} writers x {} features to {}",
        ws.len(),
        ws.dim(),
        out.display()
    );
    Ok(())
}

fn report_dir(out: Option<PathBuf>, config: Option<&Path>) -> anyhow::Result<PathBuf> {
    match (out, config) {
        (Some(out), _) => Ok(out),
        (None, Some(c)) => Ok(ExperimentConfig::load(c)?.output_dir),
        (None, None) => bail!("report needs --out or --config"),
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Gen(common) => gen(&common)?,
        Command::Baseline(common) => {
            let (exp, out) = experiment(&common)?;
            for (r, e) in cmd_baseline(&exp, &out)?.iter().enumerate() {
                println!(
                    "rep {r}: baseline EER {:.4} ({} features)",
                    e.exploitation.mean_eer, e.features
                );
            }
        }
        Command::Optimize { common, strategy } => {
            let (exp, out) = experiment(&common)?;
            let strategies = strategy.map_or_else(|| exp.config.strategies.clone(), |s| vec![s]);
            for rep in cmd_optimize(&exp, &strategies, &out)? {
                for (s, res) in &rep.strategies {
                    println!(
                        "rep {} {s}: {} features, EER {:.4}, gap {:.4}",
                        rep.index,
                        res.outcome.mask.count(),
                        res.evaluation.exploitation.mean_eer,
                        res.outcome.gap
                    );
                }
            }
        }
        Command::Eval {
            common,
            mask,
            dataset,
        } => {
            let (exp, out) = experiment(&common)?;
            for (r, rep) in cmd_eval(&exp, &mask, dataset.as_deref(), &out)?
                .iter()
                .enumerate()
            {
                println!("rep {r}: EER {:.4} (std {:.4})", rep.mean_eer, rep.std_eer);
            }
        }
        Command::Report { out, config } => {
            let dir = report_dir(out, config.as_deref())?;
            for row in cmd_report(&dir)? {
                println!(
                    "{}: {:.1} features, EER {:.4} ({:.4})",
                    row.row, row.features_mean, row.eer_mean, row.eer_std
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
