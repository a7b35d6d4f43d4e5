use std::process::Command;

use risnet::channel::{Regime, Scenario, ScenarioConfig};
use risnet::harness::*;
use risnet::rate::quantize_phases;
use risnet::risnet::{ArchConfig, CsiMode, RisnetParams};
use risnet::Error;

fn small_scenario(regime: Regime) -> ScenarioConfig {
    ScenarioConfig {
        bs_antennas: 4,
        ris_rows: 9,
        ris_cols: 9,
        users: 2,
        tx_power: 10.0,
        regime,
        ris_link_gain: 1e-2,
        ..ScenarioConfig::default()
    }
}

fn small_train(iterations: usize, lr: f64) -> TrainConfig {
    TrainConfig {
        batch_size: 4,
        learning_rate: lr,
        iterations,
        eval_every: 2,
        seed: 7,
        ..TrainConfig::default()
    }
}

#[test]
fn zero_learning_rate_leaves_params_unchanged() {
    let cfg = small_scenario(Regime::Deterministic);
    let data = Scenario::new(cfg.clone()).unwrap().dataset(8, 1);
    let arch = ArchConfig::full(9, 9);
    let out = train(&data, &[], &arch, &PowerBudget::from(&cfg), &small_train(5, 0.0)).unwrap();
    assert_eq!(out.params, RisnetParams::init(&arch, 7).unwrap());
    assert_eq!(out.batch_rates.len(), 5);
    assert_eq!(out.metrics.iter().map(|m| m.iteration).collect::<Vec<_>>(), vec![2, 4, 5]);
}

#[test]
fn seeded_training_is_bit_identical() {
    let cfg = small_scenario(Regime::Deterministic);
    let scenario = Scenario::new(cfg.clone()).unwrap();
    let (data, test) = (scenario.dataset(8, 1), scenario.dataset(3, 2));
    let arch = ArchConfig::partial(9, 9);
    let run = || train(&data, &test, &arch, &PowerBudget::from(&cfg), &small_train(4, 1e-3)).unwrap();
    let (a, b) = (run(), run());
    assert_eq!(a.params, b.params);
    assert_eq!(metrics_csv(&a.metrics), metrics_csv(&b.metrics));
    assert!(a.metrics.iter().all(|m| m.wall_ms == 0.0 && m.test_sum_rate.is_some()));
}

#[test]
fn sample_gradient_points_uphill() {
    let cfg = small_scenario(Regime::Deterministic);
    let sample = &Scenario::new(cfg.clone()).unwrap().dataset(1, 3)[0];
    let arch = ArchConfig::full(9, 9);
    let plan = risnet::risnet::ForwardPlan::new(&arch).unwrap();
    let params = RisnetParams::init(&arch, 1).unwrap();
    let power = PowerBudget::from(&cfg);
    let wmmse = risnet::rate::WmmseConfig::default();
    let (rate, grads) = sample_gradient(&plan, &params, sample, &power, &wmmse).unwrap();
    let mut stepped = params.clone();
    for (t, g) in stepped.tensors_mut().into_iter().zip(&grads) {
        for (x, d) in t.data_mut().iter_mut().zip(g.data()) {
            *x += 1e-6 * d;
        }
    }
    let (after, _) = sample_gradient(&plan, &stepped, sample, &power, &wmmse).unwrap();
    assert!(after > rate, "{after} <= {rate}");
}

#[test]
fn empty_or_inconsistent_inputs_are_rejected() {
    let cfg = small_scenario(Regime::Deterministic);
    let data = Scenario::new(cfg.clone()).unwrap().dataset(2, 1);
    let power = PowerBudget::from(&cfg);
    assert!(train(&[], &[], &ArchConfig::full(9, 9), &power, &small_train(1, 1e-3)).is_err());
    assert!(train(&data, &[], &ArchConfig::full(6, 6), &power, &small_train(1, 1e-3)).is_err());
    let bad = TrainConfig {
        batch_size: 0,
        ..small_train(1, 1e-3)
    };
    assert!(matches!(train(&data, &[], &ArchConfig::full(9, 9), &power, &bad), Err(Error::Config(_))));
    assert!(evaluate(&[], &PhaseSource::Random { seed: 0 }, &EvalOptions::default()).is_err());

    let params = RisnetParams::init(&ArchConfig::full(9, 9), 0).unwrap();
    let opts = EvalOptions {
        csi_mode: Some(CsiMode::Partial),
        power,
        ..EvalOptions::default()
    };
    assert!(matches!(evaluate(&data, &PhaseSource::Network(&params), &opts), Err(Error::Config(_))));
    let other = RisnetParams::init(&ArchConfig::full(6, 6), 0).unwrap();
    let opts = EvalOptions { power, ..EvalOptions::default() };
    assert!(matches!(evaluate(&data, &PhaseSource::Network(&other), &opts), Err(Error::Config(_))));
}

#[test]
fn evaluation_reports() {
    let cfg = small_scenario(Regime::DeterministicPlusIid);
    let data = Scenario::new(cfg.clone()).unwrap().dataset(5, 4);
    let opts = EvalOptions {
        power: PowerBudget::from(&cfg),
        ..EvalOptions::default()
    };
    let random = evaluate(&data, &PhaseSource::Random { seed: 3 }, &opts).unwrap();
    assert!(random.mean > 0.0);
    assert_eq!(random.rates.len(), 5);
    let mean = random.rates.iter().sum::<f64>() / 5.0;
    assert!((random.mean - mean).abs() < 1e-12);
    assert_eq!(random.rates, evaluate(&data, &PhaseSource::Random { seed: 3 }, &opts).unwrap().rates);

    let q4 = EvalOptions {
        quantize_levels: Some(4),
        ..opts.clone()
    };
    let phases: Vec<_> = phases_for(&data, &PhaseSource::Random { seed: 3 }, &q4)
        .unwrap()
        .into_iter()
        .map(|(p, _)| quantize_phases(&p, 4).unwrap())
        .collect();
    let once = evaluate(&data, &PhaseSource::Given(&phases), &opts).unwrap();
    let twice = evaluate(&data, &PhaseSource::Given(&phases), &q4).unwrap();
    assert_eq!(once.rates, twice.rates);
    assert!(!twice.continuous());

    let bcd = evaluate(&data, &PhaseSource::Bcd(risnet::baselines::BcdConfig::default()), &opts).unwrap();
    assert!(bcd.mean > random.mean);

    let csv = report_csv(&random);
    assert!(csv.starts_with("sample_id,sum_rate,forward_ms\n"));
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn dataset_and_checkpoint_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let data = Scenario::new(small_scenario(Regime::Iid)).unwrap().dataset(3, 5);
    let path = dir.path().join("data.bin");
    save_dataset(&path, &data).unwrap();
    assert_eq!(load_dataset(&path).unwrap(), data);

    let params = RisnetParams::init(&ArchConfig::full(36, 36), 9).unwrap();
    let ckpt = dir.path().join("model.ckpt");
    save_checkpoint(&ckpt, &params).unwrap();
    let back = load_checkpoint(&ckpt).unwrap();
    assert_eq!(back.count(), 25_345);
    assert_eq!(back, params);

    let bytes = std::fs::read(&ckpt).unwrap();
    std::fs::write(&ckpt, &bytes[..bytes.len() / 2]).unwrap();
    assert!(matches!(load_checkpoint(&ckpt), Err(Error::Format { .. })));
}

#[test]
fn metrics_csv_layout() {
    let rows = vec![
        MetricsRow {
            iteration: 1,
            train_sum_rate: 2.5,
            test_sum_rate: None,
            wall_ms: 0.0,
        },
        MetricsRow {
            iteration: 2,
            train_sum_rate: 3.0,
            test_sum_rate: Some(2.75),
            wall_ms: 1.5,
        },
    ];
    let csv = metrics_csv(&rows);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "iteration,train_sum_rate,test_sum_rate,wall_ms");
    assert_eq!(lines[1], "1,2.5,,0");
    assert_eq!(lines[2], "2,3,2.75,1.5");
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_risnet")).args(args).output().unwrap()
}

#[test]
fn cli_generate_train_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    std::fs::write(
        p("run.cfg"),
        "# small deployment\nbs_antennas=4\nris_rows=9\nris_cols=9\nusers=2\ntx_power=10\nris_link_gain=0.01\neval_every=1\n",
    )
    .unwrap();
    let ok = |out: std::process::Output| {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap()
    };
    ok(cli(&["generate-data", "--config", &p("run.cfg"), "--regime", "det", "--samples", "12", "--seed", "3", "--out", &p("d.bin")]));
    ok(cli(&["generate-data", "--config", &p("run.cfg"), "--regime", "det", "--samples", "12", "--seed", "3", "--out", &p("d2.bin")]));
    assert_eq!(std::fs::read(p("d.bin")).unwrap(), std::fs::read(p("d2.bin")).unwrap());

    for (name, csi) in [("full", "full"), ("part", "partial")] {
        ok(cli(&[
            "train", "--data", &p("d.bin"), "--csi", csi, "--iters", "2", "--batch", "2", "--lr", "0.001", "--seed", "1",
            "--out", &p(&format!("{name}.ckpt")), "--metrics", &p(&format!("{name}.csv")), "--config", &p("run.cfg"),
            "--held-out", "2",
        ]));
        let metrics = std::fs::read_to_string(p(&format!("{name}.csv"))).unwrap();
        assert_eq!(metrics.lines().count(), 3);
        let out = ok(cli(&[
            "evaluate", "--data", &p("d.bin"), "--source", &format!("ckpt:{}", p(&format!("{name}.ckpt"))),
            "--quantize", "4", "--report", &p(&format!("{name}_report.csv")), "--config", &p("run.cfg"),
        ]));
        assert!(out.contains("mean"));
        assert_eq!(std::fs::read_to_string(p(&format!("{name}_report.csv"))).unwrap().lines().count(), 13);
    }
    ok(cli(&["evaluate", "--data", &p("d.bin"), "--source", "random", "--config", &p("run.cfg")]));

    let bad = cli(&["evaluate", "--data", &p("d.bin"), "--source", "oracle"]);
    assert!(!bad.status.success());
    let missing = cli(&["evaluate", "--data", &p("none.bin"), "--source", "random"]);
    assert!(!missing.status.success());
}
