use std::sync::Arc;

use super::arch::{ArchConfig, CsiMode, CLASSES, EXPANSION_FILTERS};
use super::grid::{anchor_grid, ExpansionPlan};
use super::params::{LayerParams, RisnetParams};
use crate::adgraph::{Graph, ReduceMode, Tensor, Var};
use crate::channel::ChannelFeature;
use crate::rate::PhaseConfig;
use crate::{Error, Result};

/// Graph handles of every parameter, in canonical order.
#[derive(Debug, Clone)]
pub struct ParamVars {
    vars: Vec<Var>,
}

impl ParamVars {
    /// Places the parameters into `graph`, trainable or frozen.
    pub fn attach(graph: &mut Graph, params: &RisnetParams, trainable: bool) -> Self {
        let vars = params
            .tensors()
            .into_iter()
            .map(|t| graph.leaf(t.clone(), trainable))
            .collect();
        ParamVars { vars }
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }
}

/// Precomputed index tables for one architecture.
#[derive(Debug, Clone)]
pub struct ForwardPlan {
    arch: ArchConfig,
    /// Expansion plan of each expansion layer, in order.
    expansions: Vec<ExpansionPlan>,
    input_anchors: Option<Vec<usize>>,
}

impl ForwardPlan {
    pub fn new(arch: &ArchConfig) -> Result<Self> {
        arch.validate()?;
        let (expansions, input_anchors) = match arch.csi_mode {
            CsiMode::Full => (Vec::new(), None),
            CsiMode::Partial => (
                (0..arch.expansion_layers.len())
                    .map(|s| ExpansionPlan::new(s, arch.ris_rows, arch.ris_cols))
                    .collect::<Result<_>>()?,
                Some(anchor_grid(0, arch.ris_rows, arch.ris_cols)?),
            ),
        };
        Ok(ForwardPlan {
            arch: arch.clone(),
            expansions,
            input_anchors,
        })
    }

    pub fn arch(&self) -> &ArchConfig {
        &self.arch
    }

    /// The feature the network consumes: every element for full CSI, the
    /// stage-0 anchors for partial CSI. A full feature is restricted on the fly.
    pub fn network_input(&self, feature: &ChannelFeature) -> Result<ChannelFeature> {
        let n = self.arch.ris_elements();
        match (&self.input_anchors, feature.anchors()) {
            (None, None) if feature.columns() == n => Ok(feature.clone()),
            (Some(want), Some(have)) if want.as_slice() == have => Ok(feature.clone()),
            (Some(want), None) if feature.columns() == n => feature.restrict_to_anchors(want),
            _ => Err(Error::config(format!(
                "{} feature with {} columns does not fit a {} network over {n} elements",
                if feature.anchors().is_some() { "anchored" } else { "dense" },
                feature.columns(),
                self.arch.csi_mode
            ))),
        }
    }

    /// Builds the forward pass in `graph` and returns the phase vector `[N]`.
    pub fn forward_graph(&self, graph: &mut Graph, feature: &ChannelFeature, params: &ParamVars) -> Result<Var> {
        let input = self.network_input(feature)?;
        let users = input.users();
        if users < 2 {
            return Err(Error::contract(format!(
                "RISnet aggregates over other users and needs at least 2, got {users}"
            )));
        }
        let arch = &self.arch;
        let mut x = graph.constant(input.gamma().clone());
        let mut cursor = params.vars.iter().copied();
        let mut expansions = self.expansions.iter();
        for layer in 1..arch.num_layers {
            let filters = (0..CLASSES * arch.filters(layer))
                .map(|_| Ok((next_var(&mut cursor)?, next_var(&mut cursor)?)))
                .collect::<Result<Vec<_>>>()?;
            let plan = if arch.is_expansion(layer) {
                Some(
                    expansions
                        .next()
                        .ok_or_else(|| Error::config("missing expansion plan"))?,
                )
            } else {
                None
            };
            x = layer_graph(graph, x, &filters, plan)?;
        }
        let w = next_var(&mut cursor)?;
        let b = next_var(&mut cursor)?;
        if cursor.next().is_some() {
            return Err(Error::config("parameter list longer than the architecture"));
        }
        final_layer_graph(graph, x, w, b, arch.ris_elements())
    }

    /// Phases for one feature without recording gradients.
    pub fn phases(&self, feature: &ChannelFeature, params: &RisnetParams) -> Result<PhaseConfig> {
        if params.arch() != &self.arch {
            return Err(Error::config("parameters belong to a different architecture"));
        }
        let mut graph = Graph::new();
        let vars = ParamVars::attach(&mut graph, params, false);
        let psi = self.forward_graph(&mut graph, feature, &vars)?;
        let out = graph.value(psi);
        if !out.all_finite() {
            return Err(Error::numeric("RISnet produced non-finite phases"));
        }
        Ok(PhaseConfig::new(out.data().to_vec()))
    }
}

/// One processing layer over `x: [P, U, N_in]`. `filters` holds `(W, b)`
/// pairs in class-major order (cc, ca, oc, oa), each class with one filter
/// for a standard layer or nine for an expansion layer.
pub fn layer_graph(
    graph: &mut Graph,
    x: Var,
    filters: &[(Var, Var)],
    expansion: Option<&ExpansionPlan>,
) -> Result<Var> {
    let per_class = if expansion.is_some() { EXPANSION_FILTERS } else { 1 };
    if filters.len() != CLASSES * per_class {
        return Err(Error::dim(format!(
            "{} filters for a layer needing {}",
            filters.len(),
            CLASSES * per_class
        )));
    }
    let users = graph.shape(x).get(1).copied().unwrap_or(0);
    if users < 2 {
        return Err(Error::contract(format!(
            "layers average over other users and need at least 2, got {users}"
        )));
    }
    let q = graph.shape(filters[0].0)[0];
    let weights: Vec<Var> = filters.iter().map(|f| f.0).collect();
    let biases: Vec<Var> = filters.iter().map(|f| f.1).collect();
    let w = graph.concat(&weights, 0)?;
    let b = graph.concat(&biases, 0)?;
    let z = graph.affine(w, x, Some(b))?;
    let r = graph.relu(z);
    let pooled = graph.class_aggregate(r, per_class * q)?;
    match expansion {
        None => Ok(pooled),
        Some(plan) => {
            if graph.shape(x)[2] != plan.inputs() {
                return Err(Error::config(format!(
                    "expansion expects {} anchors, got {}",
                    plan.inputs(),
                    graph.shape(x)[2]
                )));
            }
            let index: Arc<[usize]> = plan.gather_index(CLASSES, q, users).into();
            graph.gather(pooled, index, vec![CLASSES * q, users, plan.outputs()])
        }
    }
}

/// `ψ_n = Σ_u (w·f_un + b)` over a feature map covering all `elements`.
pub fn final_layer_graph(graph: &mut Graph, x: Var, w: Var, b: Var, elements: usize) -> Result<Var> {
    let shape = graph.shape(x).to_vec();
    if shape.len() != 3 || shape[2] != elements {
        return Err(Error::contract(format!(
            "output layer needs features of all {elements} elements, got shape {shape:?}"
        )));
    }
    let z = graph.affine(w, x, Some(b))?;
    let summed = graph.reduce(z, 1, ReduceMode::Sum)?;
    graph.reshape(summed, vec![elements])
}

fn layer_constants(graph: &mut Graph, layer: &LayerParams) -> Vec<(Var, Var)> {
    layer
        .classes
        .iter()
        .flatten()
        .map(|f| (graph.constant(f.weight.clone()), graph.constant(f.bias.clone())))
        .collect()
}

/// Standard layer on a feature map `[P, U, N]`, giving `[4Q, U, N]`.
pub fn standard_layer(features: &Tensor, layer: &LayerParams) -> Result<Tensor> {
    let mut graph = Graph::new();
    let x = graph.constant(features.clone());
    let filters = layer_constants(&mut graph, layer);
    let out = layer_graph(&mut graph, x, &filters, None)?;
    Ok(graph.value(out).clone())
}

/// Expansion layer from `plan.inputs()` to `plan.outputs()` anchors.
pub fn expansion_layer(features: &Tensor, layer: &LayerParams, plan: &ExpansionPlan) -> Result<Tensor> {
    let mut graph = Graph::new();
    let x = graph.constant(features.clone());
    let filters = layer_constants(&mut graph, layer);
    let out = layer_graph(&mut graph, x, &filters, Some(plan))?;
    Ok(graph.value(out).clone())
}

/// Output layer on `[P, U, elements]`.
pub fn final_layer(features: &Tensor, weight: &Tensor, bias: &Tensor, elements: usize) -> Result<Tensor> {
    let mut graph = Graph::new();
    let x = graph.constant(features.clone());
    let w = graph.constant(weight.clone());
    let b = graph.constant(bias.clone());
    let out = final_layer_graph(&mut graph, x, w, b, elements)?;
    Ok(graph.value(out).clone())
}

fn next_var(cursor: &mut impl Iterator<Item = Var>) -> Result<Var> {
    cursor
        .next()
        .ok_or_else(|| Error::config("parameter list shorter than the architecture"))
}

/// Convenience wrapper: phases of `params` for one channel feature.
pub fn forward(feature: &ChannelFeature, params: &RisnetParams) -> Result<PhaseConfig> {
    ForwardPlan::new(params.arch())?.phases(feature, params)
}
