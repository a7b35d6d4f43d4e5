use super::{Graph, Tensor, Var};
use crate::{Error, Result};

/// Outcome of comparing reverse-mode gradients with central differences.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    /// Largest `|analytic − central| / max(|analytic|, |central|, 1e-12)`
    /// over the coordinates that were not flagged as kinks.
    pub max_rel_error: f64,
    /// Coordinate achieving `max_rel_error`.
    pub worst_coordinate: Option<usize>,
    /// Coordinates where the one-sided slopes disagree (e.g. a relu sitting
    /// exactly on its hinge); excluded from `max_rel_error`.
    pub kinks: Vec<usize>,
    pub checked: usize,
}

/// Relative slope disagreement above which a coordinate counts as a kink.
const KINK_TOLERANCE: f64 = 1e-3;

/// Checks the gradient of a scalar function at `x` on every coordinate.
///
/// `f` receives a fresh graph and the leaf holding `x` and must return a
/// scalar node.
pub fn grad_check<F>(f: F, x: &Tensor, eps: f64) -> Result<GradCheckReport>
where
    F: Fn(&mut Graph, Var) -> Result<Var>,
{
    let coords: Vec<usize> = (0..x.len()).collect();
    grad_check_coords(f, x, eps, &coords)
}

/// Like [`grad_check`] but only on the listed coordinates.
pub fn grad_check_coords<F>(f: F, x: &Tensor, eps: f64, coords: &[usize]) -> Result<GradCheckReport>
where
    F: Fn(&mut Graph, Var) -> Result<Var>,
{
    let mut graph = Graph::new();
    let leaf = graph.param(x.clone());
    let out = f(&mut graph, leaf)?;
    let f0 = finite(graph.value(out).item()?)?;
    let grads = graph.backward(out)?;
    let analytic = grads
        .get(leaf)
        .ok_or_else(|| Error::contract("gradient missing for checked leaf"))?
        .clone();

    let eval = |point: Tensor| -> Result<f64> {
        let mut g = Graph::new();
        let v = g.constant(point);
        let out = f(&mut g, v)?;
        finite(g.value(out).item()?)
    };

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_coordinate: None,
        kinks: Vec::new(),
        checked: 0,
    };
    for &i in coords {
        if i >= x.len() {
            return Err(Error::contract(format!("coordinate {i} out of {}", x.len())));
        }
        let mut plus = x.clone();
        plus.data_mut()[i] += eps;
        let mut minus = x.clone();
        minus.data_mut()[i] -= eps;
        let (fp, fm) = (eval(plus)?, eval(minus)?);
        let central = (fp - fm) / (2.0 * eps);
        let forward = (fp - f0) / eps;
        let backward = (f0 - fm) / eps;
        if (forward - backward).abs() > KINK_TOLERANCE * central.abs().max(1.0) {
            report.kinks.push(i);
            continue;
        }
        let a = analytic.data()[i];
        let rel = (a - central).abs() / a.abs().max(central.abs()).max(1e-12);
        report.checked += 1;
        if rel > report.max_rel_error || report.worst_coordinate.is_none() {
            report.max_rel_error = rel;
            report.worst_coordinate = Some(i);
        }
    }
    Ok(report)
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::numeric(format!("non-finite function value {v}")))
    }
}
