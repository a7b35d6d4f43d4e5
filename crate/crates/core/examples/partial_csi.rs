//! Partial-CSI training: the network sees only the 16 stage-0 anchors and
//! expands them to all elements. Usage: `partial_csi [iterations] [batch]`.

use risnet::channel::{Regime, Scenario, ScenarioConfig};
use risnet::harness::{evaluate, train, EvalOptions, PhaseSource, PowerBudget, TrainConfig};
use risnet::risnet::{anchor_grid, ArchConfig, ExpansionPlan};

fn main() -> risnet::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let iterations = args.next().unwrap_or(10);
    let batch_size = args.next().unwrap_or(8);

    let cfg = ScenarioConfig::default();
    for stage in 0..3 {
        println!("stage {stage}: {} anchors", anchor_grid(stage, cfg.ris_rows, cfg.ris_cols)?.len());
    }
    let plan = ExpansionPlan::new(0, cfg.ris_rows, cfg.ris_cols)?;
    println!("first expansion: {} -> {} anchors", plan.inputs(), plan.outputs());

    let arch = ArchConfig::partial(cfg.ris_rows, cfg.ris_cols);
    for regime in [Regime::Deterministic, Regime::Iid] {
        let cfg = ScenarioConfig { regime, ..cfg.clone() };
        let scenario = Scenario::new(cfg.clone())?;
        let (train_set, test_set) = (scenario.dataset(128, 1), scenario.dataset(10, 2));
        let power = PowerBudget::from(&cfg);
        let tc = TrainConfig {
            iterations,
            batch_size,
            eval_every: iterations.max(1),
            ..TrainConfig::default()
        };
        let out = train(&train_set, &test_set, &arch, &power, &tc)?;
        let opts = EvalOptions {
            power,
            ..EvalOptions::default()
        };
        let report = evaluate(&test_set, &PhaseSource::Network(&out.params), &opts)?;
        println!("{regime}: partial-CSI test mean {:.3} bit/s/Hz after {iterations} iterations", report.mean);
    }
    Ok(())
}
