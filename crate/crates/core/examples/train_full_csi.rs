//! Trains the full-CSI network for a few iterations and compares it with
//! random phases. Usage: `train_full_csi [iterations] [batch]`.

use risnet::channel::{Scenario, ScenarioConfig};
use risnet::harness::{evaluate, train, EvalOptions, PhaseSource, PowerBudget, TrainConfig};
use risnet::risnet::ArchConfig;

fn main() -> risnet::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let iterations = args.next().unwrap_or(20);
    let batch_size = args.next().unwrap_or(8);

    let cfg = ScenarioConfig::default();
    let scenario = Scenario::new(cfg.clone())?;
    let (train_set, test_set) = (scenario.dataset(256, 1), scenario.dataset(20, 2));
    let power = PowerBudget::from(&cfg);
    let tc = TrainConfig {
        iterations,
        batch_size,
        eval_every: (iterations / 5).max(1),
        ..TrainConfig::default()
    };
    let out = train(&train_set, &test_set, &ArchConfig::full(cfg.ris_rows, cfg.ris_cols), &power, &tc)?;
    for row in &out.metrics {
        println!(
            "iter {:>4}: train {:.3}  test {:.3}",
            row.iteration,
            row.train_sum_rate,
            row.test_sum_rate.unwrap_or(f64::NAN)
        );
    }
    let opts = EvalOptions {
        power,
        ..EvalOptions::default()
    };
    let net = evaluate(&test_set, &PhaseSource::Network(&out.params), &opts)?;
    let random = evaluate(&test_set, &PhaseSource::Random { seed: 3 }, &opts)?;
    println!("network {:.3} vs random {:.3} bit/s/Hz", net.mean, random.mean);
    Ok(())
}
