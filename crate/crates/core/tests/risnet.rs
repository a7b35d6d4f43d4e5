use proptest::prelude::*;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use risnet::adgraph::Tensor;
use risnet::channel::ChannelFeature;
use risnet::risnet::*;
use risnet::Error;

fn random_tensor(rng: &mut ChaCha20Rng, shape: &[usize]) -> Tensor {
    let len = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn random_layer(rng: &mut ChaCha20Rng, filters: usize, q: usize, p: usize) -> LayerParams {
    LayerParams {
        classes: std::array::from_fn(|_| {
            (0..filters)
                .map(|_| Filter {
                    weight: random_tensor(rng, &[q, p]),
                    bias: random_tensor(rng, &[q]),
                })
                .collect()
        }),
    }
}

/// relu(W f + b) for every (q, u, n) by plain loops.
fn filter_response(f: &Filter, x: &Tensor) -> Vec<Vec<Vec<f64>>> {
    let (q, p) = (f.weight.shape()[0], f.weight.shape()[1]);
    let (u, n) = (x.shape()[1], x.shape()[2]);
    let mut out = vec![vec![vec![0.0; n]; u]; q];
    for a in 0..q {
        for b in 0..u {
            for c in 0..n {
                let mut z = f.bias.at(&[a]);
                for k in 0..p {
                    z += f.weight.at(&[a, k]) * x.at(&[k, b, c]);
                }
                out[a][b][c] = z.max(0.0);
            }
        }
    }
    out
}

/// Class pooling of one response at (q, u, n).
fn pooled(r: &[Vec<Vec<f64>>], class: usize, q: usize, u: usize, n: usize) -> f64 {
    let users = r[q].len();
    let elems = r[q][u].len();
    let elem_mean = |uu: usize| r[q][uu].iter().sum::<f64>() / elems as f64;
    let others = |v: &dyn Fn(usize) -> f64| (0..users).filter(|&o| o != u).map(v).sum::<f64>() / (users - 1) as f64;
    match class {
        0 => r[q][u][n],
        1 => elem_mean(u),
        2 => others(&|o| r[q][o][n]),
        _ => others(&|o| elem_mean(o)),
    }
}

#[test]
fn standard_layer_matches_loop_oracle() {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let (p, q, u, n) = (4, 3, 3, 5);
    let x = random_tensor(&mut rng, &[p, u, n]);
    let layer = random_layer(&mut rng, 1, q, p);
    let out = standard_layer(&x, &layer).unwrap();
    assert_eq!(out.shape(), &[4 * q, u, n]);
    for c in 0..4 {
        let r = filter_response(&layer.classes[c][0], &x);
        for a in 0..q {
            for b in 0..u {
                for e in 0..n {
                    let want = pooled(&r, c, a, b, e);
                    assert!((out.at(&[c * q + a, b, e]) - want).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn two_users_swap_in_the_other_user_classes() {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let (p, q, n) = (4, 2, 3);
    let x = random_tensor(&mut rng, &[p, 2, n]);
    let mut layer = random_layer(&mut rng, 1, q, p);
    layer.classes[2][0] = layer.classes[0][0].clone();
    layer.classes[3][0] = layer.classes[1][0].clone();
    let out = standard_layer(&x, &layer).unwrap();
    for a in 0..2 * q {
        for e in 0..n {
            assert!((out.at(&[2 * q + a, 0, e]) - out.at(&[a, 1, e])).abs() < 1e-12);
            assert!((out.at(&[2 * q + a, 1, e]) - out.at(&[a, 0, e])).abs() < 1e-12);
        }
    }
}

#[test]
fn identical_users_and_elements_collapse_symmetrically() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let (p, q, u, n) = (4, 3, 3, 4);
    let column: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
    let x = Tensor::new(vec![p, u, n], (0..p * u * n).map(|i| column[i / (u * n)]).collect()).unwrap();
    let mut layer = random_layer(&mut rng, 1, q, p);
    for c in 1..4 {
        layer.classes[c][0] = layer.classes[0][0].clone();
    }
    let out = standard_layer(&x, &layer).unwrap();
    let first = out.at(&[0, 0, 0]);
    for a in 0..q {
        let v = out.at(&[a, 0, 0]);
        for c in 0..4 {
            for b in 0..u {
                for e in 0..n {
                    assert!((out.at(&[c * q + a, b, e]) - v).abs() < 1e-12);
                }
            }
        }
    }
    assert!(first.is_finite());
}

#[test]
fn single_user_layers_are_rejected() {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let x = random_tensor(&mut rng, &[4, 1, 3]);
    let layer = random_layer(&mut rng, 1, 2, 4);
    assert!(matches!(standard_layer(&x, &layer), Err(Error::Contract(_))));
}

#[test]
fn expansion_on_a_single_anchor_places_each_filter() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let plan = ExpansionPlan::new(0, 9, 9).unwrap();
    assert_eq!((plan.inputs(), plan.outputs()), (1, 9));
    let (p, q, u) = (4, 2, 3);
    let x = random_tensor(&mut rng, &[p, u, 1]);
    let layer = random_layer(&mut rng, 9, q, p);
    let out = expansion_layer(&x, &layer, &plan).unwrap();
    assert_eq!(out.shape(), &[4 * q, u, 9]);
    for c in 0..4 {
        for j in 0..9 {
            let r = filter_response(&layer.classes[c][j], &x);
            for a in 0..q {
                for b in 0..u {
                    let want = pooled(&r, c, a, b, 0);
                    assert!((out.at(&[c * q + a, b, j]) - want).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn expansion_with_equal_filters_replicates_blocks() {
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let plan = ExpansionPlan::new(0, 18, 18).unwrap();
    assert_eq!((plan.inputs(), plan.outputs()), (4, 36));
    let (p, q, u) = (4, 2, 2);
    let x = random_tensor(&mut rng, &[p, u, 4]);
    let mut layer = random_layer(&mut rng, 9, q, p);
    for c in 0..4 {
        let first = layer.classes[c][0].clone();
        layer.classes[c] = vec![first; 9];
    }
    let out = expansion_layer(&x, &layer, &plan).unwrap();
    // Output grid is 6×6; input anchor (i, k) covers the 3×3 block at rows 3i.., cols 3k...
    for row in 0..6 {
        for col in 0..6 {
            let m = row * 6 + col;
            let centre = (row / 3 * 3 + 1) * 6 + col / 3 * 3 + 1;
            for a in 0..4 * q {
                for b in 0..u {
                    assert!((out.at(&[a, b, m]) - out.at(&[a, b, centre])).abs() < 1e-12);
                }
            }
        }
    }
    let wrong = random_tensor(&mut rng, &[p, u, 5]);
    assert!(matches!(expansion_layer(&wrong, &layer, &plan), Err(Error::Config(_))));
}

#[test]
fn final_layer_examples() {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let (p, u, n) = (8, 3, 5);
    let x = random_tensor(&mut rng, &[p, u, n]);
    let beta = 0.7;
    let out = final_layer(&x, &Tensor::zeros(&[1, p]), &Tensor::vector(vec![beta]), n).unwrap();
    for &v in out.data() {
        assert!((v - u as f64 * beta).abs() < 1e-12);
    }
    let w = random_tensor(&mut rng, &[1, p]);
    let single = random_tensor(&mut rng, &[p, 1, n]);
    let out = final_layer(&single, &w, &Tensor::vector(vec![beta]), n).unwrap();
    for e in 0..n {
        let want: f64 = (0..p).map(|k| w.at(&[0, k]) * single.at(&[k, 0, e])).sum::<f64>() + beta;
        assert!((out.data()[e] - want).abs() < 1e-12);
    }
    assert!(matches!(
        final_layer(&x, &w, &Tensor::vector(vec![beta]), n + 1),
        Err(Error::Contract(_))
    ));
}

#[test]
fn nu_covers_every_interior_neighbourhood() {
    for cols in [12usize, 36] {
        let rows = cols;
        for n in 1..=rows * cols {
            let (r, c) = ((n - 1) / cols, (n - 1) % cols);
            for j in 1..=9 {
                let (dr, dc) = ((j - 1) / 3, (j - 1) % 3);
                let legal = r + dr >= 1 && c + dc >= 1 && c + dc <= cols;
                let got = nu(n, j, cols);
                if legal {
                    let want = (r + dr - 1) * cols + (c + dc - 1) + 1;
                    assert_eq!(got.unwrap(), want, "n={n} j={j} cols={cols}");
                } else {
                    assert!(got.is_err(), "n={n} j={j} cols={cols}");
                }
            }
        }
    }
    assert_eq!(nu(14, 5, 12).unwrap(), 14);
    assert!(nu(14, 0, 12).is_err());
    assert!(nu(14, 10, 12).is_err());
}

#[test]
fn parameter_counts() {
    for rows in [4, 36] {
        let arch = ArchConfig::full(rows, rows);
        assert_eq!(arch.parameter_count(), 25_345);
        assert_eq!(RisnetParams::init(&arch, 0).unwrap().count(), 25_345);
    }
    let p = ArchConfig::partial(36, 36);
    assert_eq!(p.parameter_count(), 91_905);
    assert_eq!(RisnetParams::init(&p, 0).unwrap().count(), 91_905);
}

#[test]
fn glorot_init_is_centred_and_bounded() {
    let params = RisnetParams::init(&ArchConfig::full(4, 4), 11).unwrap();
    let mut weights = Vec::new();
    for layer in &params.layers {
        for class in &layer.classes {
            for f in class {
                let (q, p) = (f.weight.shape()[0], f.weight.shape()[1]);
                let bound = (6.0 / (q + p) as f64).sqrt();
                for &w in f.weight.data() {
                    assert!(w.abs() <= bound);
                    weights.push(w / bound);
                }
                assert!(f.bias.data().iter().all(|&b| b == 0.0));
            }
        }
    }
    assert!(weights.len() >= 10_000);
    let mean = weights.iter().sum::<f64>() / weights.len() as f64;
    // Scaled draws are U(-1, 1) with variance 1/3.
    let se = (1.0 / 3.0 / weights.len() as f64).sqrt();
    assert!(mean.abs() < 3.0 * se, "{mean}");
    assert_eq!(params, RisnetParams::init(&ArchConfig::full(4, 4), 11).unwrap());
}

#[test]
fn partial_network_accepts_anchor_features() {
    let arch = ArchConfig::partial(9, 9);
    let params = RisnetParams::init(&arch, 3).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let gamma = random_tensor(&mut rng, &[4, 2, 1]);
    let anchors = anchor_grid(0, 9, 9).unwrap();
    let feature = ChannelFeature::new(gamma, Some(anchors)).unwrap();
    let psi = forward(&feature, &params).unwrap();
    assert_eq!(psi.len(), 81);
    assert!(psi.psi.iter().all(|v| v.is_finite()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn user_permutation_leaves_phases_unchanged(seed in 0u64..1000, shift in 1usize..3) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (u, n) = (3, 16);
        let params = RisnetParams::init(&ArchConfig::full(4, 4), seed).unwrap();
        let gamma = random_tensor(&mut rng, &[4, u, n]);
        let mut permuted = gamma.clone();
        for k in 0..4 {
            for b in 0..u {
                for e in 0..n {
                    permuted.data_mut()[(k * u + b) * n + e] = gamma.at(&[k, (b + shift) % u, e]);
                }
            }
        }
        let a = forward(&ChannelFeature::new(gamma, None).unwrap(), &params).unwrap();
        let b = forward(&ChannelFeature::new(permuted, None).unwrap(), &params).unwrap();
        for (x, y) in a.psi.iter().zip(&b.psi) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn flatten_round_trips(seed in 0u64..1000) {
        let arch = ArchConfig::full(4, 4);
        let params = RisnetParams::init(&arch, seed).unwrap();
        let back = RisnetParams::from_flat(&arch, &params.flatten()).unwrap();
        prop_assert_eq!(params, back);
    }
}
