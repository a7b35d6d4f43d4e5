//! Random phases against coordinate descent on a few samples.

use std::time::Instant;

use risnet::baselines::BcdConfig;
use risnet::channel::{Scenario, ScenarioConfig};
use risnet::harness::{evaluate, EvalOptions, PhaseSource, PowerBudget};

fn main() -> risnet::Result<()> {
    let cfg = ScenarioConfig::default();
    let samples = Scenario::new(cfg.clone())?.dataset(5, 4);
    let opts = EvalOptions {
        power: PowerBudget::from(&cfg),
        ..EvalOptions::default()
    };
    for source in [PhaseSource::Random { seed: 1 }, PhaseSource::Bcd(BcdConfig::default())] {
        let start = Instant::now();
        let report = evaluate(&samples, &source, &opts)?;
        println!(
            "{:>6}: mean {:.3} ± {:.3} bit/s/Hz ({:.2?} total)",
            report.source,
            report.mean,
            report.stddev,
            start.elapsed()
        );
    }
    Ok(())
}
