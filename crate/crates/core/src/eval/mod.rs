//! Scoring, timing and tuning utilities.

mod corpus;
mod rtf;
mod sharpness;
mod tune;
mod wer;

pub use corpus::{decode_corpus, CorpusDecode, Utterance, UtteranceOutcome};
pub use rtf::{rtf_measure, RtfAggregate, DEFAULT_FRAME_SHIFT};
pub use sharpness::{corpus_sharpness, posterior_sharpness};
pub use tune::{dev_objective, grid_2d, grid_csv, grid_optimum, tune_scales, two_stage, GridPoint, TuneGrids, TuneResult};
pub use wer::{levenshtein, EditCounts, WerReport};

/// `k,avg_mass` rows for `k = 1..`.
pub fn sharpness_csv(values: &[f64]) -> String {
    let mut out = String::from("k,avg_mass\n");
    for (k, v) in values.iter().enumerate() {
        out.push_str(&format!("{},{v:.9}\n", k + 1));
    }
    out
}
