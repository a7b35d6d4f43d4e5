use std::fs;
use std::path::Path;
use std::str::FromStr;

use super::train::TrainConfig;
use crate::baselines::BcdConfig;
use crate::channel::ScenarioConfig;
use crate::risnet::{ArchConfig, CsiMode};
use crate::{Error, Result};

/// Everything a run can be configured with.
///
/// Text form: one `key = value` per line, `#` starts a comment. Keys are the
/// field names of [`ScenarioConfig`], [`ArchConfig`] (`csi_mode`,
/// `num_layers`, `hidden_q`, `expansion_layers` as a comma list) and
/// [`TrainConfig`]; WMMSE and BCD settings use the `wmmse_` and `bcd_`
/// prefixes.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub arch: ArchConfig,
    pub train: TrainConfig,
    pub bcd: BcdConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let scenario = ScenarioConfig::default();
        let arch = ArchConfig::full(scenario.ris_rows, scenario.ris_cols);
        RunConfig {
            scenario,
            arch,
            train: TrainConfig::default(),
            bcd: BcdConfig::default(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(format!("cannot parse {key} = {value:?}")))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        let mut explicit_expansions = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, v) = (key.trim(), value.trim());
            let s = &mut c.scenario;
            let t = &mut c.train;
            match key {
                "bs_antennas" => s.bs_antennas = parse(key, v)?,
                "ris_rows" => s.ris_rows = parse(key, v)?,
                "ris_cols" => s.ris_cols = parse(key, v)?,
                "users" => s.users = parse(key, v)?,
                "tx_power" => s.tx_power = parse(key, v)?,
                "noise_power" => s.noise_power = parse(key, v)?,
                "regime" => s.regime = v.parse()?,
                "mix_power_ratio" => s.mix_power_ratio = parse(key, v)?,
                "ris_link_gain" => s.ris_link_gain = parse(key, v)?,
                "rng_seed" => s.rng_seed = parse(key, v)?,
                "csi_mode" => c.arch.csi_mode = v.parse()?,
                "num_layers" => c.arch.num_layers = parse(key, v)?,
                "hidden_q" => c.arch.hidden_q = parse(key, v)?,
                "expansion_layers" => {
                    explicit_expansions = Some(
                        v.split(',')
                            .map(str::trim)
                            .filter(|x| !x.is_empty())
                            .map(|x| parse(key, x))
                            .collect::<Result<Vec<usize>>>()?,
                    )
                }
                "batch_size" => t.batch_size = parse(key, v)?,
                "learning_rate" => t.learning_rate = parse(key, v)?,
                "iterations" => t.iterations = parse(key, v)?,
                "beta1" => t.beta1 = parse(key, v)?,
                "beta2" => t.beta2 = parse(key, v)?,
                "eps" => t.eps = parse(key, v)?,
                "seed" => t.seed = parse(key, v)?,
                "eval_every" => t.eval_every = parse(key, v)?,
                "deterministic" => t.deterministic = parse(key, v)?,
                "wmmse_max_iters" => t.wmmse.max_iters = parse(key, v)?,
                "wmmse_tol" => t.wmmse.tol = parse(key, v)?,
                "bcd_grid_points" => c.bcd.grid_points = parse(key, v)?,
                "bcd_outer_iters" => c.bcd.outer_iters = parse(key, v)?,
                "bcd_tol" => c.bcd.tol = parse(key, v)?,
                other => return Err(Error::config(format!("line {}: unknown key {other:?}", lineno + 1))),
            }
        }
        c.arch.ris_rows = c.scenario.ris_rows;
        c.arch.ris_cols = c.scenario.ris_cols;
        c.arch.expansion_layers = match explicit_expansions {
            Some(list) => list,
            None => ArchConfig::for_mode(c.arch.csi_mode, 9, 9).expansion_layers,
        };
        c.scenario.validate()?;
        c.arch.validate()?;
        c.train.validate()?;
        c.bcd.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        RunConfig::parse(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    /// The architecture switched to `mode`, with that mode's default
    /// expansion layers.
    pub fn arch_for(&self, mode: CsiMode) -> ArchConfig {
        if mode == self.arch.csi_mode {
            self.arch.clone()
        } else {
            ArchConfig {
                csi_mode: mode,
                expansion_layers: ArchConfig::for_mode(mode, 9, 9).expansion_layers,
                ..self.arch.clone()
            }
        }
    }
}
