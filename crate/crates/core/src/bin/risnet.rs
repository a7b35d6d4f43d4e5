use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use risnet::channel::{Regime, Scenario};
use risnet::harness::{
    evaluate, load_checkpoint, load_dataset, save_checkpoint, save_dataset, train, write_metrics, write_report,
    EvalOptions, PhaseSource, PowerBudget, RunConfig,
};
use risnet::risnet::CsiMode;
use risnet::{Error, Result};

#[derive(Parser)]
#[command(name = "risnet", about = "RIS phase optimization with a permutation-aware network")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a channel dataset.
    GenerateData {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        regime: Option<Regime>,
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a network on a dataset; the last `--held-out` samples are kept for testing.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "full")]
        csi: CsiMode,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        batch: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        metrics: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        held_out: Option<usize>,
    },
    /// Evaluate phases from a checkpoint, random draws or coordinate descent.
    Evaluate {
        #[arg(long)]
        data: PathBuf,
        /// `ckpt:<path>`, `random` or `bcd`.
        #[arg(long)]
        source: String,
        #[arg(long, default_value_t = 0)]
        quantize: u32,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn load_config(path: &Option<PathBuf>) -> Result<RunConfig> {
    path.as_ref().map_or_else(|| Ok(RunConfig::default()), RunConfig::load)
}

/// Uses the configured grid if it matches `n` elements, otherwise a square one.
fn grid_for(cfg: &mut RunConfig, n: usize, explicit: bool) -> Result<()> {
    if cfg.scenario.ris_elements() == n {
        return Ok(());
    }
    if explicit {
        return Err(Error::Config(format!(
            "config grid {}x{} does not match the dataset's {n} elements",
            cfg.scenario.ris_rows, cfg.scenario.ris_cols
        )));
    }
    let side = (n as f64).sqrt().round() as usize;
    if side * side != n {
        return Err(Error::Config(format!("{n} elements are not a square grid; pass --config")));
    }
    cfg.scenario.ris_rows = side;
    cfg.scenario.ris_cols = side;
    cfg.arch.ris_rows = side;
    cfg.arch.ris_cols = side;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenerateData {
            config,
            regime,
            samples,
            seed,
            out,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(r) = regime {
                cfg.scenario.regime = r;
            }
            let data = Scenario::new(cfg.scenario.clone())?.dataset(samples, seed);
            save_dataset(&out, &data)?;
            println!("wrote {samples} {} samples to {}", cfg.scenario.regime, out.display());
        }
        Command::Train {
            data,
            csi,
            iters,
            batch,
            lr,
            seed,
            out,
            metrics,
            config,
            held_out,
        } => {
            let mut cfg = load_config(&config)?;
            let samples = load_dataset(&data)?;
            let n = samples.first().map_or(0, |s| s.ris_elements());
            grid_for(&mut cfg, n, config.is_some())?;
            let t = &mut cfg.train;
            t.iterations = iters.unwrap_or(t.iterations);
            t.batch_size = batch.unwrap_or(t.batch_size);
            t.learning_rate = lr.unwrap_or(t.learning_rate);
            t.seed = seed.unwrap_or(t.seed);
            let held = held_out.unwrap_or((samples.len() / 10).min(100));
            if held >= samples.len() {
                return Err(Error::Config(format!("held-out size {held} leaves no training samples")));
            }
            let (train_set, test_set) = samples.split_at(samples.len() - held);
            let arch = cfg.arch_for(csi);
            let outcome = train(train_set, test_set, &arch, &PowerBudget::from(&cfg.scenario), &cfg.train)?;
            save_checkpoint(&out, &outcome.params)?;
            if let Some(path) = metrics {
                write_metrics(path, &outcome.metrics)?;
            }
            if let Some(last) = outcome.metrics.last() {
                println!(
                    "iteration {}: train {:.4}, test {} bit/s/Hz ({} skipped batches)",
                    last.iteration,
                    last.train_sum_rate,
                    last.test_sum_rate.map_or("-".into(), |v| format!("{v:.4}")),
                    outcome.skipped
                );
            }
        }
        Command::Evaluate {
            data,
            source,
            quantize,
            report,
            config,
            seed,
        } => {
            let cfg = load_config(&config)?;
            let samples = load_dataset(&data)?;
            let params;
            let src = match source.as_str() {
                "random" => PhaseSource::Random { seed },
                "bcd" => PhaseSource::Bcd(cfg.bcd.clone()),
                other => match other.strip_prefix("ckpt:") {
                    Some(path) => {
                        params = load_checkpoint(path)?;
                        PhaseSource::Network(&params)
                    }
                    None => return Err(Error::Config(format!("unknown source {other:?}"))),
                },
            };
            let opts = EvalOptions {
                quantize_levels: (quantize > 0).then_some(quantize),
                power: PowerBudget::from(&cfg.scenario),
                wmmse: cfg.train.wmmse.clone(),
                ..EvalOptions::default()
            };
            let rep = evaluate(&samples, &src, &opts)?;
            if let Some(path) = report {
                write_report(path, &rep)?;
            }
            println!(
                "{} over {} samples: mean {:.4} bit/s/Hz, stddev {:.4}",
                rep.source,
                rep.rates.len(),
                rep.mean,
                rep.stddev
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
