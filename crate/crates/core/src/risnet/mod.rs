//! Permutation-aware RIS phase network.
//!
//! Every layer applies four filter classes to each (user, element) position:
//! the position's own feature, its mean over elements, its mean over other
//! users, and the mean over both. The output layer sums over users, so the
//! phase of an element does not depend on the order of the users.

mod arch;
mod forward;
mod grid;
mod params;

pub use arch::{ArchConfig, CsiMode, CLASSES, EXPANSION_FILTERS, INPUT_WIDTH};
pub use forward::{
    expansion_layer, final_layer, final_layer_graph, forward, layer_graph, standard_layer, ForwardPlan, ParamVars,
};
pub use grid::{anchor_grid, nu, ExpansionPlan};
pub use params::{Filter, LayerParams, RisnetParams};
