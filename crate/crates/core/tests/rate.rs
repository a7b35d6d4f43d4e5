use std::f64::consts::PI;

use proptest::prelude::*;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use risnet::adgraph::{grad_check, Graph};
use risnet::channel::ChannelSample;
use risnet::rate::*;
use risnet::{CMatrix, Error, C64};

fn gaussian(rng: &mut ChaCha20Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)) * (0.5f64).sqrt()
    })
}

fn random_sample(rng: &mut ChaCha20Rng, n: usize, m: usize, u: usize) -> ChannelSample {
    ChannelSample {
        h: gaussian(rng, n, m),
        g: gaussian(rng, u, n),
        d: gaussian(rng, u, m) * C64::new(0.3, 0.0),
    }
}

#[test]
fn combined_channel_examples() {
    let n = 3;
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let s = ChannelSample {
        h: gaussian(&mut rng, n, 2),
        g: CMatrix::zeros(2, n),
        d: CMatrix::identity(2, 2),
    };
    let c = combined_channel(&s, &PhaseConfig::zeros(n), &Precoder { v: CMatrix::identity(2, 2) }).unwrap();
    assert!((c - CMatrix::identity(2, 2)).norm() < 1e-15);
    let s = random_sample(&mut rng, n, 2, 2);
    let zero = combined_channel(&s, &PhaseConfig::zeros(n), &Precoder { v: CMatrix::zeros(2, 2) }).unwrap();
    assert_eq!(zero.norm(), 0.0);
    assert!(matches!(
        combined_channel(&s, &PhaseConfig::zeros(n + 1), &Precoder { v: CMatrix::zeros(2, 2) }),
        Err(Error::Dimension(_))
    ));
}

#[test]
fn combined_channel_matches_explicit_diagonal() {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let s = random_sample(&mut rng, 5, 3, 2);
    let psi: Vec<f64> = (0..5).map(|_| rng.random_range(-4.0..4.0)).collect();
    let v = gaussian(&mut rng, 3, 2);
    let phi = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(5, psi.iter().map(|&p| C64::from_polar(1.0, p))));
    let naive = (&s.g * phi * &s.h + &s.d) * &v;
    let c = combined_channel(&s, &PhaseConfig::new(psi), &Precoder { v }).unwrap();
    assert!((c - naive).norm() < 1e-12);
}

#[test]
fn sum_rate_examples() {
    assert_eq!(sum_rate(&CMatrix::zeros(3, 3), 1.0), 0.0);
    let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_element(2, C64::new(2.0, 0.0)));
    assert!((sum_rate(&diag, 1.0) - 2.0 * 5f64.log2()).abs() < 1e-12);
    assert!((sum_rate(&diag, 1.0) - 4.6439).abs() < 1e-4);

    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let c = gaussian(&mut rng, 3, 3);
    let mut expected = 0.0;
    for u in 0..3 {
        let signal = c[(u, u)].norm_sqr();
        let interference: f64 = (0..3).filter(|&v| v != u).map(|v| c[(u, v)].norm_sqr()).sum();
        expected += (1.0 + signal / (interference + 0.7)).log2();
    }
    assert!((sum_rate(&c, 0.7) - expected).abs() < 1e-12);
    let per_user = user_rates(&c, 0.7);
    assert!((per_user.iter().sum::<f64>() - expected).abs() < 1e-12);
}

#[test]
fn graph_sum_rate_matches_value_and_gradient() {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let s = random_sample(&mut rng, 6, 3, 2);
    let v = Precoder { v: gaussian(&mut rng, 3, 2) };
    let psi: Vec<f64> = (0..6).map(|_| rng.random_range(0.0..6.0)).collect();
    let direct = sum_rate(&combined_channel(&s, &PhaseConfig::new(psi.clone()), &v).unwrap(), 1.0);
    let mut g = Graph::new();
    let p = g.constant(risnet::adgraph::Tensor::vector(psi.clone()));
    let c = combined_channel_graph(&mut g, &s, p, &v).unwrap();
    let r = sum_rate_graph(&mut g, c, 1.0).unwrap();
    assert!((g.value(r).item().unwrap() - direct).abs() < 1e-12);

    let report = grad_check(
        |g, p| {
            let c = combined_channel_graph(g, &s, p, &v)?;
            sum_rate_graph(g, c, 1.0)
        },
        &risnet::adgraph::Tensor::vector(psi),
        1e-6,
    )
    .unwrap();
    assert!(report.max_rel_error < 1e-4, "{}", report.max_rel_error);
}

#[test]
fn wmmse_is_monotone_on_random_instances() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let cfg = WmmseConfig { max_iters: 30, tol: 0.0 };
    for _ in 0..100 {
        let u = rng.random_range(1..=4);
        let m = rng.random_range(u..=6);
        let a = gaussian(&mut rng, u, m);
        let power = rng.random_range(0.5..50.0);
        let out = wmmse_precoder(&a, power, 1.0, &cfg).unwrap();
        for w in out.rates.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "{:?}", out.rates);
        }
        assert!(out.precoder.power() <= power + 1e-9);
    }
}

#[test]
fn single_user_gets_matched_filter() {
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    for _ in 0..10 {
        let a = gaussian(&mut rng, 1, 5);
        let (power, noise) = (rng.random_range(0.1..20.0), rng.random_range(0.5..2.0));
        let out = wmmse_precoder(&a, power, noise, &WmmseConfig::default()).unwrap();
        let expected = (1.0 + power * a.norm_squared() / noise).log2();
        assert!((out.rate() - expected).abs() < 1e-9);
        assert!((out.precoder.power() - power).abs() < 1e-6);
    }
    // ‖h‖² = 4, E = 1, σ² = 1.
    let h = CMatrix::from_row_slice(1, 2, &[C64::new(0.0, 2.0f64.sqrt()), C64::new(-(2.0f64.sqrt()), 0.0)]);
    let out = wmmse_precoder(&h, 1.0, 1.0, &WmmseConfig::default()).unwrap();
    assert!((out.rate() - 5f64.log2()).abs() < 1e-9);
    let mf = h.adjoint() * C64::new(1.0 / h.norm(), 0.0);
    let phase = out.precoder.v[(0, 0)] / mf[(0, 0)];
    assert!((out.precoder.v.clone() - mf * phase).norm() < 1e-9);
}

#[test]
fn wmmse_beats_random_feasible_precoders() {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    for _ in 0..10 {
        let a = gaussian(&mut rng, 2, 4);
        let power = 10.0;
        let best = wmmse_precoder(&a, power, 1.0, &WmmseConfig::default()).unwrap().rate();
        for _ in 0..10_000 {
            let mut v = gaussian(&mut rng, 4, 2);
            let p = power * rng.random::<f64>();
            v *= C64::new((p / v.norm_squared()).sqrt(), 0.0);
            assert!(sum_rate(&(&a * &v), 1.0) <= best + 1e-9);
        }
    }
}

#[test]
fn wmmse_rejects_bad_inputs() {
    assert!(matches!(
        wmmse_precoder(&CMatrix::zeros(2, 2), 1.0, 1.0, &WmmseConfig::default()),
        Err(Error::Contract(_))
    ));
    let a = CMatrix::identity(2, 2);
    assert!(wmmse_precoder(&a, 0.0, 1.0, &WmmseConfig::default()).is_err());
    assert!(wmmse_from(&a, CMatrix::zeros(3, 2), 1.0, 1.0, &WmmseConfig::default()).is_err());
}

#[test]
fn quantization_examples() {
    let q = |x: f64| quantize_phases(&PhaseConfig::new(vec![x]), 4).unwrap().psi[0];
    assert!((q(0.3 * PI) - 0.5 * PI).abs() < 1e-12);
    assert_eq!(q(1.9 * PI), 0.0);
    assert_eq!(q(PI / 4.0), 0.0);
    assert!(matches!(quantize_phases(&PhaseConfig::zeros(2), 1), Err(Error::Contract(_))));
}

#[test]
fn global_phase_offset_is_irrelevant_for_single_los_user() {
    let n = 16;
    let geom = risnet::channel::ArrayGeometry::Planar { rows: 4, cols: 4 };
    let d = [0.3, -0.2, (1.0f64 - 0.13).sqrt()];
    let a = risnet::channel::steering_vector(geom, d, 0.5).unwrap();
    let g = CMatrix::from_row_slice(1, n, a.as_slice());
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let s = ChannelSample {
        h: gaussian(&mut rng, n, 3),
        g,
        d: CMatrix::zeros(1, 3),
    };
    let psi: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..6.0)).collect();
    let shifted: Vec<f64> = psi.iter().map(|p| p + 1.234).collect();
    let rate = |p: Vec<f64>| {
        let a = effective_channel(&s, &PhaseConfig::new(p)).unwrap();
        wmmse_precoder(&a, 5.0, 1.0, &WmmseConfig::default()).unwrap().rate()
    };
    assert!((rate(psi) - rate(shifted)).abs() < 1e-9);
}

proptest! {
    #[test]
    fn quantization_is_idempotent_and_snaps_to_grid(psi in prop::collection::vec(-20.0f64..20.0, 1..16), levels in prop::sample::select(vec![2u32, 4, 8, 16])) {
        let step = 2.0 * PI / levels as f64;
        let q = quantize_phases(&PhaseConfig::new(psi.clone()), levels).unwrap();
        let qq = quantize_phases(&q, levels).unwrap();
        prop_assert_eq!(&q, &qq);
        for (orig, snapped) in psi.iter().zip(&q.psi) {
            let k = snapped / step;
            prop_assert!((k - k.round()).abs() < 1e-9 && k.round() >= 0.0 && k.round() < levels as f64);
            let diff = (orig - snapped).rem_euclid(2.0 * PI);
            let dist = diff.min(2.0 * PI - diff);
            prop_assert!(dist <= step / 2.0 + 1e-9);
        }
    }

    #[test]
    fn phasors_are_unit_modulus(psi in prop::collection::vec(-1e4f64..1e4, 1..32)) {
        for z in PhaseConfig::new(psi).phasors() {
            prop_assert!((z.norm() - 1.0).abs() < 1e-12);
        }
    }
}
