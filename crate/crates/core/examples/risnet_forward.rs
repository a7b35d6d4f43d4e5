//! One forward pass of the full- and partial-CSI networks, with parameter
//! counts and timing.

use std::time::Instant;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use risnet::channel::{channel_feature, Scenario, ScenarioConfig};
use risnet::risnet::{ArchConfig, CsiMode, ForwardPlan, RisnetParams};

fn main() -> risnet::Result<()> {
    let cfg = ScenarioConfig::default();
    let sample = Scenario::new(cfg.clone())?.sample(&mut ChaCha20Rng::seed_from_u64(0));
    let feature = channel_feature(&sample)?;
    for mode in [CsiMode::Full, CsiMode::Partial] {
        let arch = ArchConfig::for_mode(mode, cfg.ris_rows, cfg.ris_cols);
        let params = RisnetParams::init(&arch, 1)?;
        let plan = ForwardPlan::new(&arch)?;
        let input = plan.network_input(&feature)?;
        let start = Instant::now();
        let psi = plan.phases(&input, &params)?;
        let elapsed = start.elapsed();
        println!(
            "{mode:>7}: {} parameters, input {:?}, {} phases in {elapsed:.2?} (first: {:.3?})",
            params.count(),
            input.gamma().shape(),
            psi.len(),
            &psi.psi[..4],
        );
    }
    Ok(())
}
