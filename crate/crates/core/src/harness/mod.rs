//! Training, evaluation, persistence and run configuration.

mod adam;
mod config;
mod csv;
mod evaluate;
mod persist;
mod train;

pub use adam::{Adam, AdamConfig};
pub use config::RunConfig;
pub use csv::{metrics_csv, report_csv, write_metrics, write_report};
pub use evaluate::{evaluate, phases_for, EvalOptions, EvalReport, PhaseSource, PowerBudget};
pub use persist::{
    decode_checkpoint, decode_dataset, encode_checkpoint, encode_dataset, load_checkpoint, load_dataset, save_checkpoint,
    save_dataset, CHECKPOINT_MAGIC, DATASET_MAGIC, FORMAT_VERSION,
};
pub use train::{sample_gradient, train, train_from, MetricsRow, TrainConfig, TrainOutcome};
