use std::f64::consts::LN_2;
use std::sync::Arc;

use super::types::{PhaseConfig, Precoder};
use crate::adgraph::{abs2, cadd, cmatmul, cmul, unit_phasor, ComplexTensor, ComplexVar, Graph, ReduceMode, Var};
use crate::channel::ChannelSample;
use crate::{CMatrix, Error, Result};

fn check_phase(sample: &ChannelSample, n: usize) -> Result<()> {
    if n != sample.ris_elements() || sample.h.nrows() != n {
        return Err(Error::dim(format!(
            "{n} phases for G {:?} and H {:?}",
            sample.g.shape(),
            sample.h.shape()
        )));
    }
    if sample.d.shape() != (sample.users(), sample.bs_antennas()) {
        return Err(Error::dim(format!("D has shape {:?}", sample.d.shape())));
    }
    Ok(())
}

/// `A = G·diag(e^{jψ})·H + D` (users × antennas), scaling the columns of G
/// rather than forming the N×N diagonal.
pub fn effective_channel(sample: &ChannelSample, phase: &PhaseConfig) -> Result<CMatrix> {
    check_phase(sample, phase.len())?;
    let mut g_phi = sample.g.clone();
    for (n, z) in phase.phasors().into_iter().enumerate() {
        let mut col = g_phi.column_mut(n);
        col *= z;
    }
    Ok(g_phi * &sample.h + &sample.d)
}

/// `C = (G·Φ·H + D)·V`.
pub fn combined_channel(sample: &ChannelSample, phase: &PhaseConfig, precoder: &Precoder) -> Result<CMatrix> {
    let a = effective_channel(sample, phase)?;
    if precoder.v.nrows() != a.ncols() {
        return Err(Error::dim(format!(
            "precoder {:?} for {} antennas",
            precoder.v.shape(),
            a.ncols()
        )));
    }
    Ok(a * &precoder.v)
}

/// `Σ_u log₂(1 + |c_uu|² / (Σ_{v≠u} |c_uv|² + σ²))` in bit/s/Hz.
pub fn sum_rate(c: &CMatrix, noise_power: f64) -> f64 {
    (0..c.nrows())
        .map(|u| {
            let row: Vec<f64> = c.row(u).iter().map(|z| z.norm_sqr()).collect();
            let signal = row[u];
            let total: f64 = row.iter().sum();
            (signal / (total - signal + noise_power)).ln_1p()
        })
        .sum::<f64>()
        / LN_2
}

/// Per-user rates in bit/s/Hz.
pub fn user_rates(c: &CMatrix, noise_power: f64) -> Vec<f64> {
    (0..c.nrows())
        .map(|u| {
            let row: Vec<f64> = c.row(u).iter().map(|z| z.norm_sqr()).collect();
            let signal = row[u];
            let total: f64 = row.iter().sum();
            (signal / (total - signal + noise_power)).ln_1p() / LN_2
        })
        .collect()
}

/// Records `C` on the graph as a differentiable function of `psi` with the
/// channels and the precoder held constant.
pub fn combined_channel_graph(
    graph: &mut Graph,
    sample: &ChannelSample,
    psi: Var,
    precoder: &Precoder,
) -> Result<ComplexVar> {
    let shape = graph.shape(psi).to_vec();
    if shape.len() != 1 {
        return Err(Error::dim(format!("phase vector has shape {shape:?}")));
    }
    check_phase(sample, shape[0])?;
    let users = sample.users();
    let phasor = unit_phasor(graph, psi);
    let phasor = ComplexVar {
        re: graph.expand(phasor.re, 0, users)?,
        im: graph.expand(phasor.im, 0, users)?,
    };
    let g = ComplexVar::constant(graph, &ComplexTensor::from_matrix(&sample.g));
    let h = ComplexVar::constant(graph, &ComplexTensor::from_matrix(&sample.h));
    let d = ComplexVar::constant(graph, &ComplexTensor::from_matrix(&sample.d));
    let v = ComplexVar::constant(graph, &ComplexTensor::from_matrix(&precoder.v));
    let g_phi = cmul(graph, g, phasor)?;
    let cascaded = cmatmul(graph, g_phi, h)?;
    let a = cadd(graph, cascaded, d)?;
    cmatmul(graph, a, v)
}

/// Differentiable sum-rate of a square combined channel.
pub fn sum_rate_graph(graph: &mut Graph, c: ComplexVar, noise_power: f64) -> Result<Var> {
    if !(noise_power > 0.0) {
        return Err(Error::contract("noise power must be positive"));
    }
    let shape = graph.shape(c.re).to_vec();
    if shape.len() != 2 || shape[0] != shape[1] {
        return Err(Error::dim(format!("combined channel must be square, got {shape:?}")));
    }
    let users = shape[0];
    let power = abs2(graph, c)?;
    let total = graph.reduce(power, 1, ReduceMode::Sum)?;
    let diag: Arc<[usize]> = (0..users).map(|u| u * users + u).collect();
    let signal = graph.gather(power, diag, vec![users])?;
    let interference = graph.sub(total, signal)?;
    let denom = graph.add_scalar(interference, noise_power);
    let sinr = graph.div(signal, denom)?;
    let nats = graph.ln_1p(sinr)?;
    let total_nats = graph.sum_all(nats)?;
    Ok(graph.scale(total_nats, 1.0 / LN_2))
}
