//! Dialogue datasets: synthetic cohorts, ingestion, augmentation and splits.

mod augment;
mod example;
mod io;
mod split;
mod synthetic;

pub use augment::{
    balance_augment, sample_span, sub_dialogue_shuffle, AugmentConfig, AugmentPreset,
};
pub use example::{Dataset, DialogueExample};
pub use io::{
    format_examples, load_examples, parse_examples, save_examples, DATASET_MAGIC, DATASET_VERSION,
};
pub use split::{split, SplitSpec, Splits};
pub use synthetic::{generate_synthetic, SyntheticSpec};
