use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use risnet::baselines::{bcd_optimize, random_phases, BcdConfig};
use risnet::channel::ChannelSample;
use risnet::rate::{effective_channel, sum_rate, wmmse_precoder, PhaseConfig, WmmseConfig};
use risnet::{CMatrix, Error, C64};

fn gaussian(rng: &mut ChaCha20Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)) * (0.5f64).sqrt()
    })
}

fn sample(rng: &mut ChaCha20Rng, n: usize, m: usize, u: usize) -> ChannelSample {
    ChannelSample {
        h: gaussian(rng, n, m),
        g: gaussian(rng, u, n),
        d: gaussian(rng, u, m) * C64::new(0.5, 0.0),
    }
}

#[test]
fn single_element_single_user_matches_exhaustive_search() {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let cfg = BcdConfig {
        grid_points: 360,
        outer_iters: 50,
        tol: 1e-12,
    };
    for _ in 0..10 {
        let s = sample(&mut rng, 1, 4, 1);
        let (power, noise) = (2.0, 1.0);
        let rates: Vec<f64> = (0..360)
            .map(|k| {
                let a = effective_channel(&s, &PhaseConfig::new(vec![TAU * k as f64 / 360.0])).unwrap();
                (1.0 + power * a.norm_squared() / noise).log2()
            })
            .collect();
        let k_best = (0..360).max_by(|&i, &j| rates[i].total_cmp(&rates[j])).unwrap();
        // One grid step away from the optimum, in rate.
        let resolution = rates[k_best] - rates[(k_best + 1) % 360].min(rates[(k_best + 359) % 360]);
        let out = bcd_optimize(&s, &cfg, &WmmseConfig::default(), power, noise).unwrap();
        assert!(out.rate() <= rates[k_best] + 1e-9);
        assert!(
            rates[k_best] - out.rate() <= resolution + 1e-9,
            "{} vs {} (resolution {resolution})",
            out.rate(),
            rates[k_best]
        );
    }
}

#[test]
fn rate_trace_never_decreases() {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    for _ in 0..20 {
        let s = sample(&mut rng, 16, 4, 3);
        let out = bcd_optimize(&s, &BcdConfig::default(), &WmmseConfig::default(), 5.0, 1.0).unwrap();
        for w in out.rates.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "{:?}", out.rates);
        }
        assert!(out.precoder.power() <= 5.0 + 1e-9);
        let direct = sum_rate(&(effective_channel(&s, &out.phase).unwrap() * &out.precoder.v), 1.0);
        assert!((direct - out.rate()).abs() < 1e-9);
    }
}

#[test]
fn infinite_tolerance_runs_one_sweep() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let s = sample(&mut rng, 8, 4, 2);
    let cfg = BcdConfig {
        tol: f64::INFINITY,
        ..BcdConfig::default()
    };
    let out = bcd_optimize(&s, &cfg, &WmmseConfig::default(), 5.0, 1.0).unwrap();
    assert_eq!(out.sweeps, 1);
}

#[test]
fn one_sweep_picks_the_exhaustive_argmax() {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let cfg = BcdConfig {
        grid_points: 16,
        outer_iters: 1,
        tol: 0.0,
    };
    for _ in 0..10 {
        let s = sample(&mut rng, 1, 4, 2);
        let phase = |k: usize| PhaseConfig::new(vec![TAU * k as f64 / 16.0]);
        let aligned = (0..16)
            .max_by(|&i, &j| {
                let p = |k| effective_channel(&s, &phase(k)).unwrap().norm_squared();
                p(i).total_cmp(&p(j))
            })
            .unwrap();
        // Best single sweep from each start, with the start's WMMSE precoder.
        let best = [0, aligned]
            .iter()
            .map(|&start| {
                let a0 = effective_channel(&s, &phase(start)).unwrap();
                let v0 = wmmse_precoder(&a0, 5.0, 1.0, &WmmseConfig::default()).unwrap().precoder.v;
                (0..16)
                    .map(|k| sum_rate(&(effective_channel(&s, &phase(k)).unwrap() * &v0), 1.0))
                    .fold(f64::MIN, f64::max)
            })
            .fold(f64::MIN, f64::max);
        let out = bcd_optimize(&s, &cfg, &WmmseConfig::default(), 5.0, 1.0).unwrap();
        assert!((out.rate() - best).abs() < 1e-9);
    }
}

#[test]
fn bcd_beats_random_phases() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let wmmse = WmmseConfig::default();
    let (mut bcd, mut random) = (0.0, 0.0);
    for _ in 0..10 {
        let s = sample(&mut rng, 16, 4, 2);
        bcd += bcd_optimize(&s, &BcdConfig::default(), &wmmse, 5.0, 1.0).unwrap().rate();
        let psi = random_phases(16, &mut rng);
        let a = effective_channel(&s, &psi).unwrap();
        random += wmmse_precoder(&a, 5.0, 1.0, &wmmse).unwrap().rate();
    }
    assert!(bcd > random);
}

#[test]
fn invalid_settings_are_rejected() {
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let s = sample(&mut rng, 4, 2, 2);
    for cfg in [
        BcdConfig { grid_points: 1, ..BcdConfig::default() },
        BcdConfig { outer_iters: 0, ..BcdConfig::default() },
        BcdConfig { tol: f64::NAN, ..BcdConfig::default() },
    ] {
        assert!(matches!(
            bcd_optimize(&s, &cfg, &WmmseConfig::default(), 1.0, 1.0),
            Err(Error::Config(_))
        ));
    }
}
