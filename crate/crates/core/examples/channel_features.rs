//! Draws channels in each regime and builds the network's feature tensor,
//! full and restricted to the first anchor stage.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use risnet::channel::{channel_feature, Regime, Scenario, ScenarioConfig};
use risnet::risnet::anchor_grid;

fn main() -> risnet::Result<()> {
    for regime in [Regime::Deterministic, Regime::DeterministicPlusIid, Regime::Iid] {
        let cfg = ScenarioConfig {
            regime,
            ..ScenarioConfig::default()
        };
        let scenario = Scenario::new(cfg.clone())?;
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let sample = scenario.sample(&mut rng);
        let feature = channel_feature(&sample)?;
        let anchors = anchor_grid(0, cfg.ris_rows, cfg.ris_cols)?;
        let partial = feature.restrict_to_anchors(&anchors)?;
        let mean_gain = sample.g.iter().map(|z| z.norm_sqr()).sum::<f64>() / sample.g.len() as f64;
        println!(
            "{regime:>7}: G {:?} H {:?} D {:?} | feature {:?} -> anchors {:?} | mean |g|^2 {mean_gain:.3}",
            sample.g.shape(),
            sample.h.shape(),
            sample.d.shape(),
            feature.gamma().shape(),
            partial.gamma().shape(),
        );
    }
    Ok(())
}
