//! Synthetic data, experiment orchestration and configuration.

mod experiment;
pub mod instance;
mod synth;

pub use experiment::{
    run_experiment, sweep, sweep_csv, Cell, ExperimentConfig, Report, SweepPoint, TuningConfig, FAILURE_BUDGET,
};
pub use synth::{synth_corpus, Corpus, SyntheticCorpusSpec};
