//! The evidential classifier and the four uncertainty baselines.

mod checkpoint;
mod config;
mod log;
mod model;
mod record;
mod train;

pub use checkpoint::{checkpoint_from_str, checkpoint_to_string, load_checkpoint, save_checkpoint};
pub use config::{KlWeightMode, MethodConfig, MethodKind, Selection, TrainConfig};
pub use log::{log_header, log_row, log_table, parse_log, read_log, write_log};
pub use model::{average_probabilities, predict, ModelBody, TrainedModel};
pub use record::{confidences, correctness, PredictionRecord};
pub use train::{
    member_seed, train_bayes, train_bbb, train_ensemble, train_evidential, train_l2, train_mcdp,
    train_method, train_network, EpochStats, History, Objective,
};
