use super::combined::sum_rate;
use super::types::Precoder;
use crate::channel::hermitian_eigen;
use crate::{CMatrix, Error, Result, C64};

/// Iteration controls of the WMMSE precoder.
#[derive(Debug, Clone, PartialEq)]
pub struct WmmseConfig {
    pub max_iters: usize,
    /// Stop once the sum-rate changes by less than this (bit/s/Hz).
    pub tol: f64,
}

impl Default for WmmseConfig {
    fn default() -> Self {
        WmmseConfig {
            max_iters: 20,
            tol: 1e-5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct WmmseOutcome {
    pub precoder: Precoder,
    /// Sum-rate of the initial precoder followed by one entry per iteration.
    pub rates: Vec<f64>,
}

impl WmmseOutcome {
    pub fn rate(&self) -> f64 {
        *self.rates.last().expect("at least the initial rate")
    }
}

const MU_BISECTION_STEPS: usize = 50;
/// Eigenvalues below this fraction of the largest are treated as null.
const NULL_EIGEN_RATIO: f64 = 1e-12;

/// Sum-rate WMMSE precoder for the effective channel `a` (users × antennas),
/// started from the matched filter `aᴴ` scaled to the full power budget.
pub fn wmmse_precoder(a: &CMatrix, tx_power: f64, noise_power: f64, cfg: &WmmseConfig) -> Result<WmmseOutcome> {
    check_inputs(a, tx_power, noise_power)?;
    let mut v = a.adjoint();
    let scale = (tx_power / v.norm_squared()).sqrt();
    v *= C64::new(scale, 0.0);
    wmmse_from(a, v, tx_power, noise_power, cfg)
}

/// WMMSE iterations from an arbitrary feasible starting precoder.
pub fn wmmse_from(
    a: &CMatrix,
    init: CMatrix,
    tx_power: f64,
    noise_power: f64,
    cfg: &WmmseConfig,
) -> Result<WmmseOutcome> {
    check_inputs(a, tx_power, noise_power)?;
    if init.shape() != (a.ncols(), a.nrows()) {
        return Err(Error::dim(format!(
            "initial precoder {:?} for channel {:?}",
            init.shape(),
            a.shape()
        )));
    }
    let mut v = init;
    let mut rates = vec![sum_rate(&(a * &v), noise_power)];
    for _ in 0..cfg.max_iters {
        let next = wmmse_step(a, &v, tx_power, noise_power)?;
        let rate = sum_rate(&(a * &next), noise_power);
        let previous = *rates.last().expect("nonempty");
        v = next;
        rates.push(rate);
        if (rate - previous).abs() < cfg.tol {
            break;
        }
    }
    Ok(WmmseOutcome {
        precoder: Precoder { v },
        rates,
    })
}

fn check_inputs(a: &CMatrix, tx_power: f64, noise_power: f64) -> Result<()> {
    if !(tx_power > 0.0) || !(noise_power > 0.0) {
        return Err(Error::contract("tx_power and noise_power must be positive"));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::numeric("effective channel has non-finite entries"));
    }
    if a.norm_squared() == 0.0 {
        return Err(Error::contract("effective channel is zero"));
    }
    Ok(())
}

/// One receiver / weight / precoder update. Row `u` of `a` is `h_uᴴ`.
fn wmmse_step(a: &CMatrix, v: &CMatrix, tx_power: f64, noise_power: f64) -> Result<CMatrix> {
    let users = a.nrows();
    let hv = a * v;
    let mut rx = vec![C64::new(0.0, 0.0); users];
    let mut weight = vec![0.0; users];
    for u in 0..users {
        let total: f64 = hv.row(u).iter().map(|z| z.norm_sqr()).sum::<f64>() + noise_power;
        rx[u] = hv[(u, u)] / total;
        let mse = 1.0 - (rx[u].conj() * hv[(u, u)]).re;
        weight[u] = 1.0 / mse;
    }

    // X = Σ_u w_u |rx_u|² h_u h_uᴴ = Aᴴ diag(w|rx|²) A, rhs column u = w_u rx_u h_u.
    let mut weighted = a.clone();
    let mut rhs = a.adjoint();
    for u in 0..users {
        let mut row = weighted.row_mut(u);
        row *= C64::new(weight[u] * rx[u].norm_sqr(), 0.0);
        let mut col = rhs.column_mut(u);
        col *= rx[u] * weight[u];
    }
    let gram = a.adjoint() * weighted;
    let (lambda, basis) = hermitian_eigen(&gram)?;
    let lambda_max = lambda.iter().copied().fold(0.0, f64::max);
    if !(lambda_max > 0.0) || !lambda_max.is_finite() {
        return Err(Error::numeric("WMMSE inner system is singular"));
    }
    let projected = basis.adjoint() * rhs;
    let energy: Vec<f64> = (0..projected.nrows())
        .map(|i| projected.row(i).iter().map(|z| z.norm_sqr()).sum())
        .collect();
    let null = |i: usize| lambda[i] <= lambda_max * NULL_EIGEN_RATIO;

    let power_at = |mu: f64| -> f64 {
        (0..lambda.len())
            .filter(|&i| mu > 0.0 || !null(i))
            .map(|i| energy[i] / (lambda[i] + mu).powi(2))
            .sum()
    };

    let mu = if power_at(0.0) <= tx_power {
        0.0
    } else {
        let mut hi = lambda_max.max(f64::MIN_POSITIVE) * 1e-6;
        while power_at(hi) > tx_power {
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::numeric("power multiplier search diverged"));
            }
        }
        let mut lo = 0.0;
        for _ in 0..MU_BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if power_at(mid) > tx_power {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };

    let mut scaled = projected;
    for i in 0..lambda.len() {
        let factor = if mu == 0.0 && null(i) {
            0.0
        } else {
            1.0 / (lambda[i] + mu)
        };
        let mut row = scaled.row_mut(i);
        row *= C64::new(factor, 0.0);
    }
    let next = basis * scaled;
    if next.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::numeric("WMMSE precoder update is not finite"));
    }
    Ok(next)
}
