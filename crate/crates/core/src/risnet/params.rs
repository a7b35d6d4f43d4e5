use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::arch::{ArchConfig, CLASSES};
use crate::adgraph::Tensor;
use crate::{Error, Result};

/// Weight `[Q, P]` and bias `[Q]` of one filter.
#[derive(Debug, Clone, PartialEq)]
pub struct Filter {
    pub weight: Tensor,
    pub bias: Tensor,
}

/// Filters of one non-final layer, indexed `[class][filter]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub classes: [Vec<Filter>; CLASSES],
}

/// Trainable state of a RISnet. Parameters are always visited in one
/// canonical order: layers in sequence, then class (cc, ca, oc, oa), then
/// filter, each as weight followed by bias; the output layer comes last.
#[derive(Debug, Clone, PartialEq)]
pub struct RisnetParams {
    arch: ArchConfig,
    pub layers: Vec<LayerParams>,
    pub final_weight: Tensor,
    pub final_bias: Tensor,
}

impl RisnetParams {
    /// Glorot-uniform weights and zero biases drawn from a seeded ChaCha20 stream.
    pub fn init(arch: &ArchConfig, seed: u64) -> Result<Self> {
        arch.validate()?;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let q = arch.hidden_q;
        let uniform = |rows: usize, cols: usize, rng: &mut ChaCha20Rng| {
            let bound = (6.0 / (rows + cols) as f64).sqrt();
            let data = (0..rows * cols).map(|_| rng.random_range(-bound..bound)).collect();
            Tensor::new(vec![rows, cols], data).expect("shape matches data")
        };
        let mut layers = Vec::with_capacity(arch.num_layers - 1);
        for l in 1..arch.num_layers {
            let p = arch.input_width(l);
            let classes = std::array::from_fn(|_| {
                (0..arch.filters(l))
                    .map(|_| Filter {
                        weight: uniform(q, p, &mut rng),
                        bias: Tensor::zeros(&[q]),
                    })
                    .collect()
            });
            layers.push(LayerParams { classes });
        }
        let final_weight = uniform(1, arch.input_width(arch.num_layers), &mut rng);
        Ok(RisnetParams {
            arch: arch.clone(),
            layers,
            final_weight,
            final_bias: Tensor::zeros(&[1]),
        })
    }

    pub fn arch(&self) -> &ArchConfig {
        &self.arch
    }

    /// Every parameter tensor in canonical order.
    pub fn tensors(&self) -> Vec<&Tensor> {
        let mut out = Vec::new();
        for layer in &self.layers {
            for class in &layer.classes {
                for f in class {
                    out.push(&f.weight);
                    out.push(&f.bias);
                }
            }
        }
        out.push(&self.final_weight);
        out.push(&self.final_bias);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = Vec::new();
        for layer in &mut self.layers {
            for class in &mut layer.classes {
                for f in class {
                    out.push(&mut f.weight);
                    out.push(&mut f.bias);
                }
            }
        }
        out.push(&mut self.final_weight);
        out.push(&mut self.final_bias);
        out
    }

    pub fn count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.tensors().into_iter().flat_map(|t| t.data().iter().copied()).collect()
    }

    /// Rebuilds parameters for `arch` from a canonical flat vector.
    pub fn from_flat(arch: &ArchConfig, flat: &[f64]) -> Result<Self> {
        let mut params = RisnetParams::init(arch, 0)?;
        if flat.len() != params.count() {
            return Err(Error::dim(format!(
                "{} values for {} parameters",
                flat.len(),
                params.count()
            )));
        }
        let mut rest = flat;
        for t in params.tensors_mut() {
            let (head, tail) = rest.split_at(t.len());
            t.data_mut().copy_from_slice(head);
            rest = tail;
        }
        Ok(params)
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.all_finite())
    }
}
