//! Synthetic geometric channels and the network input features.

mod config;
mod feature;
mod generate;
mod linalg;
mod steering;

pub use config::{Regime, ScenarioConfig, DEFAULT_RIS_LINK_GAIN};
pub use feature::{channel_feature, feature_from, ChannelFeature};
pub use generate::{
    generate_sample, sample_rng, ChannelSample, PathComponent, Scenario, UserPaths,
    DIRECT_LINK_POWER, ELEMENT_SPACING, MAX_USER_CORRELATION, MIN_LOS_DOMINANCE,
};
pub use linalg::{hermitian_eigen, pseudo_inverse, rank_truncated_pseudo_inverse, MAX_CONDITION};
pub use steering::{steering_vector, ArrayGeometry};
