use std::time::Instant;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use super::adam::{Adam, AdamConfig};
use super::evaluate::{evaluate, EvalOptions, PhaseSource, PowerBudget};
use crate::adgraph::{Graph, Tensor};
use crate::channel::{channel_feature, ChannelSample};
use crate::rate::{combined_channel_graph, effective_channel, sum_rate_graph, wmmse_precoder, PhaseConfig, WmmseConfig};
use crate::risnet::{ArchConfig, ForwardPlan, ParamVars, RisnetParams};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub iterations: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Seeds both the parameter initialization and the batch draws.
    pub seed: u64,
    /// Log a metrics row every this many iterations (and after the last).
    pub eval_every: usize,
    /// Single-threaded, wall-clock free run whose metrics are bit-reproducible.
    pub deterministic: bool,
    pub wmmse: WmmseConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 512,
            learning_rate: 1e-3,
            iterations: 500,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            seed: 0,
            eval_every: 50,
            deterministic: true,
            wmmse: WmmseConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.eval_every == 0 {
            return Err(Error::config("batch_size and eval_every must be at least 1"));
        }
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::config(format!("invalid learning rate {}", self.learning_rate)));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || !(self.eps > 0.0) {
            return Err(Error::config("Adam needs betas in [0, 1) and a positive epsilon"));
        }
        Ok(())
    }

    fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps,
        }
    }
}

/// One row of the training log.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    /// 1-based iteration after which the row was taken.
    pub iteration: usize,
    /// Mean sum-rate of the iteration's batch, before its update.
    pub train_sum_rate: f64,
    /// Mean sum-rate on the held-out set after the update, if one was given.
    pub test_sum_rate: Option<f64>,
    /// Milliseconds since training started; zero in deterministic mode.
    pub wall_ms: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: RisnetParams,
    pub metrics: Vec<MetricsRow>,
    /// Mean batch sum-rate of every iteration (NaN for skipped batches).
    pub batch_rates: Vec<f64>,
    /// Batches dropped after a numerical failure.
    pub skipped: usize,
}

/// Sum-rate of one sample and its gradient with respect to every parameter,
/// the precoder being the WMMSE solution for the network's current phases.
pub fn sample_gradient(
    plan: &ForwardPlan,
    params: &RisnetParams,
    sample: &ChannelSample,
    power: &PowerBudget,
    wmmse: &WmmseConfig,
) -> Result<(f64, Vec<Tensor>)> {
    let feature = channel_feature(sample)?;
    let mut graph = Graph::new();
    let vars = ParamVars::attach(&mut graph, params, true);
    let psi = plan.forward_graph(&mut graph, &feature, &vars)?;
    let phase = PhaseConfig::new(graph.value(psi).data().to_vec());
    if !graph.value(psi).all_finite() {
        return Err(Error::numeric("network produced non-finite phases"));
    }
    let a = effective_channel(sample, &phase)?;
    let precoder = wmmse_precoder(&a, power.tx_power, power.noise_power, wmmse)?.precoder;
    let c = combined_channel_graph(&mut graph, sample, psi, &precoder)?;
    let rate = sum_rate_graph(&mut graph, c, power.noise_power)?;
    let value = graph.value(rate).item()?;
    let mut grads = graph.backward(rate)?;
    let grads = vars
        .vars()
        .iter()
        .map(|&v| grads.take(v).ok_or_else(|| Error::contract("missing parameter gradient")))
        .collect::<Result<Vec<_>>>()?;
    if !value.is_finite() || grads.iter().any(|g| !g.all_finite()) {
        return Err(Error::numeric("non-finite sum-rate or gradient"));
    }
    Ok((value, grads))
}

/// Unsupervised training by alternating WMMSE precoding and gradient ascent
/// on the mean batch sum-rate.
pub fn train(
    dataset: &[ChannelSample],
    held_out: &[ChannelSample],
    arch: &ArchConfig,
    power: &PowerBudget,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let params = RisnetParams::init(arch, cfg.seed)?;
    train_from(params, dataset, held_out, power, cfg)
}

/// Continues training from existing parameters with fresh optimizer state.
pub fn train_from(
    mut params: RisnetParams,
    dataset: &[ChannelSample],
    held_out: &[ChannelSample],
    power: &PowerBudget,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(Error::contract("training needs a nonempty dataset"));
    }
    let arch = params.arch().clone();
    for s in dataset.iter().chain(held_out) {
        if s.ris_elements() != arch.ris_elements() {
            return Err(Error::config(format!(
                "architecture covers {} elements but a sample has {}",
                arch.ris_elements(),
                s.ris_elements()
            )));
        }
    }
    let plan = ForwardPlan::new(&arch)?;
    let mut adam = Adam::new(cfg.adam(), &params);
    // Stream 0 of the seed initializes parameters; batches use stream 1.
    let mut batch_rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    batch_rng.set_stream(1);
    let max_skips = cfg.iterations.div_ceil(100);
    let eval_opts = EvalOptions {
        power: *power,
        wmmse: cfg.wmmse.clone(),
        ..EvalOptions::default()
    };

    let start = Instant::now();
    let mut metrics = Vec::new();
    let mut batch_rates = Vec::with_capacity(cfg.iterations);
    let mut skipped = 0;
    for it in 1..=cfg.iterations {
        let batch: Vec<usize> = (0..cfg.batch_size)
            .map(|_| batch_rng.random_range(0..dataset.len()))
            .collect();
        let step = |&i: &usize| sample_gradient(&plan, &params, &dataset[i], power, &cfg.wmmse);
        let results: Vec<Result<(f64, Vec<Tensor>)>> = if cfg.deterministic {
            batch.iter().map(step).collect()
        } else {
            batch.par_iter().map(step).collect()
        };

        let mut total = 0.0;
        let mut sum: Option<Vec<Tensor>> = None;
        let mut failure = None;
        for r in results {
            match r {
                Ok((rate, grads)) => {
                    total += rate;
                    match &mut sum {
                        None => sum = Some(grads),
                        Some(acc) => {
                            for (a, g) in acc.iter_mut().zip(&grads) {
                                a.data_mut().iter_mut().zip(g.data()).for_each(|(x, y)| *x += y);
                            }
                        }
                    }
                }
                Err(e @ Error::Numeric(_)) => {
                    failure = Some(e);
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        let train_rate = if let Some(e) = failure {
            skipped += 1;
            if skipped > max_skips {
                return Err(Error::numeric(format!(
                    "{skipped} of {it} batches failed (limit {max_skips}); last: {e}"
                )));
            }
            f64::NAN
        } else {
            let scale = 1.0 / cfg.batch_size as f64;
            let mut grads = sum.expect("nonempty batch");
            grads
                .iter_mut()
                .for_each(|g| g.data_mut().iter_mut().for_each(|x| *x *= scale));
            adam.ascend(&mut params, &grads)?;
            total * scale
        };
        batch_rates.push(train_rate);

        if it % cfg.eval_every == 0 || it == cfg.iterations {
            let test_sum_rate = if held_out.is_empty() {
                None
            } else {
                Some(evaluate(held_out, &PhaseSource::Network(&params), &eval_opts)?.mean)
            };
            metrics.push(MetricsRow {
                iteration: it,
                train_sum_rate: train_rate,
                test_sum_rate,
                wall_ms: if cfg.deterministic {
                    0.0
                } else {
                    start.elapsed().as_secs_f64() * 1e3
                },
            });
        }
    }
    Ok(TrainOutcome {
        params,
        metrics,
        batch_rates,
        skipped,
    })
}
