use std::time::Instant;

use crate::baselines::{bcd_optimize, random_phases, BcdConfig};
use crate::channel::{channel_feature, sample_rng, ChannelSample, Regime, ScenarioConfig};
use crate::rate::{effective_channel, quantize_phases, wmmse_precoder, PhaseConfig, WmmseConfig};
use crate::risnet::{CsiMode, ForwardPlan, RisnetParams};
use crate::{Error, Result};

/// Transmit power budget and receiver noise power of a deployment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBudget {
    pub tx_power: f64,
    pub noise_power: f64,
}

impl Default for PowerBudget {
    fn default() -> Self {
        PowerBudget::from(&ScenarioConfig::default())
    }
}

impl From<&ScenarioConfig> for PowerBudget {
    fn from(c: &ScenarioConfig) -> Self {
        PowerBudget {
            tx_power: c.tx_power,
            noise_power: c.noise_power,
        }
    }
}

/// Where the phases of each evaluated sample come from.
#[derive(Debug, Clone)]
pub enum PhaseSource<'a> {
    Network(&'a RisnetParams),
    /// Uniform phases; sample `i` uses stream `i` of `seed`.
    Random { seed: u64 },
    Bcd(BcdConfig),
    /// One fixed configuration per sample.
    Given(&'a [PhaseConfig]),
}

impl PhaseSource<'_> {
    pub fn tag(&self) -> String {
        match self {
            PhaseSource::Network(p) => format!("risnet-{}", p.arch().csi_mode),
            PhaseSource::Random { .. } => "random".into(),
            PhaseSource::Bcd(_) => "bcd".into(),
            PhaseSource::Given(_) => "given".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalOptions {
    /// Round phases to this many uniform levels before evaluation.
    pub quantize_levels: Option<u32>,
    /// Expected CSI mode of a network source.
    pub csi_mode: Option<CsiMode>,
    /// Regime tag recorded in the report.
    pub regime: Option<Regime>,
    pub power: PowerBudget,
    pub wmmse: WmmseConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub source: String,
    pub csi_mode: Option<CsiMode>,
    pub regime: Option<Regime>,
    pub quantize_levels: Option<u32>,
    /// Sum-rate per sample (bit/s/Hz).
    pub rates: Vec<f64>,
    /// Wall-clock time to obtain each sample's phases.
    pub forward_ms: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation of `rates`.
    pub stddev: f64,
}

impl EvalReport {
    pub fn continuous(&self) -> bool {
        self.quantize_levels.is_none()
    }
}

/// Phases for every sample from `source`, with the time spent on each.
pub fn phases_for(samples: &[ChannelSample], source: &PhaseSource<'_>, opts: &EvalOptions) -> Result<Vec<(PhaseConfig, f64)>> {
    let plan = match source {
        PhaseSource::Network(p) => {
            if let Some(mode) = opts.csi_mode {
                if mode != p.arch().csi_mode {
                    return Err(Error::config(format!(
                        "checkpoint is a {} network but {mode} CSI was requested",
                        p.arch().csi_mode
                    )));
                }
            }
            Some(ForwardPlan::new(p.arch())?)
        }
        PhaseSource::Given(list) if list.len() != samples.len() => {
            return Err(Error::config(format!("{} phase sets for {} samples", list.len(), samples.len())));
        }
        _ => None,
    };
    let mut out = Vec::with_capacity(samples.len());
    for (i, s) in samples.iter().enumerate() {
        let n = s.ris_elements();
        let start = Instant::now();
        let phase = match source {
            PhaseSource::Network(p) => {
                if p.arch().ris_elements() != n {
                    return Err(Error::config(format!(
                        "checkpoint covers {} elements, sample has {n}",
                        p.arch().ris_elements()
                    )));
                }
                let plan = plan.as_ref().expect("network plan");
                plan.phases(&channel_feature(s)?, p)?
            }
            PhaseSource::Random { seed } => random_phases(n, &mut sample_rng(*seed, i as u64)),
            PhaseSource::Bcd(cfg) => {
                bcd_optimize(s, cfg, &opts.wmmse, opts.power.tx_power, opts.power.noise_power)?.phase
            }
            PhaseSource::Given(list) => list[i].clone(),
        };
        out.push((phase, start.elapsed().as_secs_f64() * 1e3));
    }
    Ok(out)
}

/// Sum-rate of each sample with phases from `source` (optionally quantized)
/// and a WMMSE precoder for the resulting effective channel.
pub fn evaluate(samples: &[ChannelSample], source: &PhaseSource<'_>, opts: &EvalOptions) -> Result<EvalReport> {
    if samples.is_empty() {
        return Err(Error::contract("evaluation needs at least one sample"));
    }
    let phases = phases_for(samples, source, opts)?;
    let mut rates = Vec::with_capacity(samples.len());
    let mut forward_ms = Vec::with_capacity(samples.len());
    for (s, (phase, ms)) in samples.iter().zip(phases) {
        let phase = match opts.quantize_levels {
            Some(levels) => quantize_phases(&phase, levels)?,
            None => phase,
        };
        let a = effective_channel(s, &phase)?;
        rates.push(wmmse_precoder(&a, opts.power.tx_power, opts.power.noise_power, &opts.wmmse)?.rate());
        forward_ms.push(ms);
    }
    let (mean, stddev) = mean_std(&rates);
    Ok(EvalReport {
        source: source.tag(),
        csi_mode: match source {
            PhaseSource::Network(p) => Some(p.arch().csi_mode),
            _ => opts.csi_mode,
        },
        regime: opts.regime,
        quantize_levels: opts.quantize_levels,
        rates,
        forward_ms,
        mean,
        stddev,
    })
}

pub(crate) fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}
