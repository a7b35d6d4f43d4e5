use crate::adgraph::Tensor;
use crate::risnet::RisnetParams;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Adam moment estimates for one parameter set, stepping uphill.
#[derive(Debug, Clone)]
pub struct Adam {
    cfg: AdamConfig,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
}

impl Adam {
    pub fn new(cfg: AdamConfig, params: &RisnetParams) -> Self {
        let zeros: Vec<Vec<f64>> = params.tensors().iter().map(|t| vec![0.0; t.len()]).collect();
        Adam {
            cfg,
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }

    pub fn steps(&self) -> i32 {
        self.t
    }

    /// One ascent step `θ ← θ + lr·m̂/(√v̂ + ε)`; `grads` follow the
    /// canonical parameter order.
    pub fn ascend(&mut self, params: &mut RisnetParams, grads: &[Tensor]) -> Result<()> {
        let mut tensors = params.tensors_mut();
        if grads.len() != tensors.len() {
            return Err(Error::dim(format!(
                "{} gradients for {} parameter tensors",
                grads.len(),
                tensors.len()
            )));
        }
        self.t += 1;
        let AdamConfig {
            learning_rate: lr,
            beta1: b1,
            beta2: b2,
            eps,
        } = self.cfg;
        let c1 = 1.0 - b1.powi(self.t);
        let c2 = 1.0 - b2.powi(self.t);
        for (k, (theta, g)) in tensors.iter_mut().zip(grads).enumerate() {
            if theta.len() != g.len() {
                return Err(Error::dim(format!("gradient {k} has {} entries for {}", g.len(), theta.len())));
            }
            let (m, v) = (&mut self.m[k], &mut self.v[k]);
            for (i, (p, &gi)) in theta.data_mut().iter_mut().zip(g.data()).enumerate() {
                m[i] = b1 * m[i] + (1.0 - b1) * gi;
                v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
                *p += lr * (m[i] / c1) / ((v[i] / c2).sqrt() + eps);
            }
        }
        Ok(())
    }
}
