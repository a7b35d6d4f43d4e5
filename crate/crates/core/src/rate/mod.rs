//! Combined channel, sum-rate objective, WMMSE precoding and phase
//! quantization.

mod combined;
mod quantize;
mod types;
mod wmmse;

pub use combined::{
    combined_channel, combined_channel_graph, effective_channel, sum_rate, sum_rate_graph,
    user_rates,
};
pub use quantize::quantize_phases;
pub use types::{PhaseConfig, Precoder};
pub use wmmse::{wmmse_from, wmmse_precoder, WmmseConfig, WmmseOutcome};
