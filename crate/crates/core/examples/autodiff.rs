//! Reverse-mode gradients on a tiny tape, checked against finite differences.

use risnet::adgraph::{grad_check, Graph, ReduceMode, Tensor};

fn main() -> risnet::Result<()> {
    let mut g = Graph::new();
    let w = g.param(Tensor::matrix(2, 3, vec![0.5, 1.0, 0.25, 1.5, 0.0, -0.5])?);
    let x = g.constant(Tensor::new(vec![3, 2, 2], (0..12).map(|i| (i + 1) as f64 / 6.0).collect())?);
    let z = g.affine(w, x, None)?;
    let r = g.relu(z);
    let m = g.reduce(r, 2, ReduceMode::Mean)?;
    let loss = g.sum_all(m)?;
    println!("loss = {:.6}", g.value(loss).item()?);
    let grads = g.backward(loss)?;
    println!("d loss / d W = {:?}", grads.get(w).map(|t| t.data().to_vec()));

    let report = grad_check(
        |g, p| {
            let s = g.sin(p);
            let c = g.cos(p);
            let prod = g.mul(s, c)?;
            let l = g.ln_1p(prod)?;
            g.sum_all(l)
        },
        &Tensor::vector(vec![0.1, 0.7, 1.3, -0.4]),
        1e-6,
    )?;
    println!("finite-difference check: max relative error {:.2e}", report.max_rel_error);
    Ok(())
}
