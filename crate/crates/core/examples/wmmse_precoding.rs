//! WMMSE precoding for a fixed RIS configuration, with the sum-rate trace and
//! the effect of phase quantization.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use risnet::baselines::random_phases;
use risnet::channel::{Scenario, ScenarioConfig};
use risnet::rate::{effective_channel, quantize_phases, wmmse_precoder, WmmseConfig};

fn main() -> risnet::Result<()> {
    let cfg = ScenarioConfig::default();
    let scenario = Scenario::new(cfg.clone())?;
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let sample = scenario.sample(&mut rng);
    let psi = random_phases(cfg.ris_elements(), &mut rng);
    let a = effective_channel(&sample, &psi)?;
    let out = wmmse_precoder(&a, cfg.tx_power, cfg.noise_power, &WmmseConfig::default())?;
    println!("WMMSE trace ({} steps):", out.rates.len());
    for (i, r) in out.rates.iter().enumerate() {
        println!("  {i:>2}: {r:.4} bit/s/Hz");
    }
    println!("precoder power {:.3} of {}", out.precoder.power(), cfg.tx_power);
    for levels in [2, 4, 8] {
        let q = quantize_phases(&psi, levels)?;
        let a = effective_channel(&sample, &q)?;
        let rate = wmmse_precoder(&a, cfg.tx_power, cfg.noise_power, &WmmseConfig::default())?.rate();
        println!("{levels}-level phases: {rate:.4} bit/s/Hz");
    }
    Ok(())
}
