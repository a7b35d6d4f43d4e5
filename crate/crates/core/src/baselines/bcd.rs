use std::f64::consts::{LN_2, TAU};

use crate::channel::ChannelSample;
use crate::rate::{effective_channel, sum_rate, wmmse_from, wmmse_precoder, PhaseConfig, Precoder, WmmseConfig};
use crate::{CMatrix, Error, Result, C64};

/// Controls of the coordinate-descent baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct BcdConfig {
    /// Phase candidates per element, evenly spaced on `[0, 2π)`.
    pub grid_points: usize,
    /// Maximum number of (precoder, sweep) rounds.
    pub outer_iters: usize,
    /// Stop once a round improves the sum-rate by less than this.
    pub tol: f64,
}

impl Default for BcdConfig {
    fn default() -> Self {
        BcdConfig {
            grid_points: 16,
            outer_iters: 50,
            tol: 1e-4,
        }
    }
}

impl BcdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 2 || self.outer_iters == 0 || self.tol.is_nan() {
            return Err(Error::config(format!("invalid BCD settings {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BcdOutcome {
    pub phase: PhaseConfig,
    pub precoder: Precoder,
    /// Sum-rate after the initial precoder and after every accepted step.
    pub rates: Vec<f64>,
    pub sweeps: usize,
}

impl BcdOutcome {
    pub fn rate(&self) -> f64 {
        *self.rates.last().expect("initial rate recorded")
    }
}

/// Alternates a warm-started WMMSE precoder update with one sweep over the
/// elements, each set to its best grid phase with everything else fixed.
///
/// Runs from two starts, `ψ = 0` and one greedy sweep maximising the
/// effective channel power `‖A‖²`, and returns the better run (the `ψ = 0`
/// run on ties). Within a run a precoder update is kept only if it does not
/// lower the sum-rate, so each trace never decreases.
pub fn bcd_optimize(
    sample: &ChannelSample,
    cfg: &BcdConfig,
    wmmse: &WmmseConfig,
    tx_power: f64,
    noise_power: f64,
) -> Result<BcdOutcome> {
    cfg.validate()?;
    let grid: Vec<C64> = (0..cfg.grid_points)
        .map(|k| C64::from_polar(1.0, TAU * k as f64 / cfg.grid_points as f64))
        .collect();
    let zero = descend(sample, cfg, &grid, vec![0; sample.ris_elements()], wmmse, tx_power, noise_power)?;
    let aligned = descend(sample, cfg, &grid, power_sweep(sample, &grid)?, wmmse, tx_power, noise_power)?;
    Ok(if aligned.rate() > zero.rate() { aligned } else { zero })
}

fn descend(
    sample: &ChannelSample,
    cfg: &BcdConfig,
    grid: &[C64],
    mut choice: Vec<usize>,
    wmmse: &WmmseConfig,
    tx_power: f64,
    noise_power: f64,
) -> Result<BcdOutcome> {
    let n = sample.ris_elements();
    let phase_of = |choice: &[usize]| {
        PhaseConfig::new(choice.iter().map(|&k| TAU * k as f64 / cfg.grid_points as f64).collect())
    };

    let mut a = effective_channel(sample, &phase_of(&choice))?;
    let mut v = wmmse_precoder(&a, tx_power, noise_power, wmmse)?.precoder.v;
    let mut rate = sum_rate(&(&a * &v), noise_power);
    let mut rates = vec![rate];
    let mut sweeps = 0;

    for round in 0..cfg.outer_iters {
        let start = rate;
        if round > 0 {
            let next = wmmse_from(&a, v.clone(), tx_power, noise_power, wmmse)?;
            if next.rate() >= rate {
                rate = next.rate();
                v = next.precoder.v;
                rates.push(rate);
            }
        }

        // Element n contributes e^{jψ_n} g_n (h_nᵀ V) to C.
        let hv = &sample.h * &v;
        let mut c = &a * &v;
        let users = c.nrows();
        let mut term = CMatrix::zeros(users, users);
        for e in 0..n {
            for r in 0..users {
                for s in 0..users {
                    term[(r, s)] = sample.g[(r, e)] * hv[(e, s)];
                }
            }
            let current = grid[choice[e]];
            let base = &c - &term * current;
            let mut best = (choice[e], fast_sum_rate(&c, noise_power));
            for (k, &z) in grid.iter().enumerate() {
                if k == choice[e] {
                    continue;
                }
                let r = rate_with(&base, &term, z, noise_power);
                if r > best.1 {
                    best = (k, r);
                }
            }
            if best.0 != choice[e] {
                choice[e] = best.0;
                c = base + &term * grid[best.0];
            }
        }
        sweeps += 1;
        a = effective_channel(sample, &phase_of(&choice))?;
        rate = sum_rate(&(&a * &v), noise_power);
        rates.push(rate);
        if !(rate - start >= cfg.tol) {
            break;
        }
    }
    if !rate.is_finite() {
        return Err(Error::numeric("BCD produced a non-finite sum-rate"));
    }
    Ok(BcdOutcome {
        phase: phase_of(&choice),
        precoder: Precoder { v },
        rates,
        sweeps,
    })
}

/// Per-element grid argmax of `‖A‖_F²`, where element `e` adds `z g_e h_eᵀ`.
fn power_sweep(sample: &ChannelSample, grid: &[C64]) -> Result<Vec<usize>> {
    let n = sample.ris_elements();
    let mut a = effective_channel(sample, &PhaseConfig::zeros(n))?;
    let mut choice = vec![0usize; n];
    for e in 0..n {
        let g = sample.g.column(e);
        let h = sample.h.row(e);
        let term = g * h;
        let base = &a - &term;
        // ‖base + z T‖² = const + 2 Re(z ⟨base, T⟩).
        let s: C64 = base.iter().zip(term.iter()).map(|(b, t)| b.conj() * t).sum();
        let mut best = (0, (grid[0] * s).re);
        for (k, z) in grid.iter().enumerate().skip(1) {
            let v = (z * s).re;
            if v > best.1 {
                best = (k, v);
            }
        }
        choice[e] = best.0;
        a = base + term * grid[best.0];
    }
    Ok(choice)
}

fn fast_sum_rate(c: &CMatrix, noise: f64) -> f64 {
    let u = c.nrows();
    let mut total = 0.0;
    for r in 0..u {
        let mut all = 0.0;
        for s in 0..u {
            all += c[(r, s)].norm_sqr();
        }
        let sig = c[(r, r)].norm_sqr();
        total += (sig / (all - sig + noise)).ln_1p();
    }
    total / LN_2
}

/// Sum-rate of `base + z·term` without forming the matrix.
fn rate_with(base: &CMatrix, term: &CMatrix, z: C64, noise: f64) -> f64 {
    let u = base.nrows();
    let mut total = 0.0;
    for r in 0..u {
        let mut all = 0.0;
        let mut sig = 0.0;
        for s in 0..u {
            let p = (base[(r, s)] + term[(r, s)] * z).norm_sqr();
            all += p;
            if s == r {
                sig = p;
            }
        }
        total += (sig / (all - sig + noise)).ln_1p();
    }
    total / LN_2
}
