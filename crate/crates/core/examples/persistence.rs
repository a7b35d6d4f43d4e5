//! Writes and reads back a dataset, a checkpoint and the CSV logs.

use risnet::channel::{Scenario, ScenarioConfig};
use risnet::harness::{
    evaluate, load_checkpoint, load_dataset, save_checkpoint, save_dataset, write_report, EvalOptions, PhaseSource,
    PowerBudget,
};
use risnet::risnet::{ArchConfig, RisnetParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("risnet-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let cfg = ScenarioConfig::default();
    let data = Scenario::new(cfg.clone())?.dataset(3, 0);
    save_dataset(dir.join("data.bin"), &data)?;
    assert_eq!(load_dataset(dir.join("data.bin"))?, data);

    let params = RisnetParams::init(&ArchConfig::full(cfg.ris_rows, cfg.ris_cols), 0)?;
    save_checkpoint(dir.join("model.ckpt"), &params)?;
    let back = load_checkpoint(dir.join("model.ckpt"))?;
    assert_eq!(back, params);

    let opts = EvalOptions {
        power: PowerBudget::from(&cfg),
        ..EvalOptions::default()
    };
    let report = evaluate(&data, &PhaseSource::Network(&back), &opts)?;
    write_report(dir.join("report.csv"), &report)?;
    println!("{}", std::fs::read_to_string(dir.join("report.csv"))?);
    for entry in std::fs::read_dir(&dir)? {
        let entry = entry?;
        println!("{:>10} bytes  {}", entry.metadata()?.len(), entry.file_name().to_string_lossy());
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
