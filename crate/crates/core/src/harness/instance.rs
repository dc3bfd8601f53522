//! Small random decoding problems for oracle comparisons.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{AcousticScores, FullHistoryLm, HmmTopology, Lexicon, Models, Transitions, WordId};

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceParams {
    pub vocab: usize,
    pub phonemes: usize,
    pub states_per_phoneme: usize,
    pub max_phones_per_word: usize,
    pub max_variants: usize,
    pub min_frames: usize,
    pub max_frames: usize,
    pub max_words: usize,
    /// Exponent shaping posterior rows; larger gives peakier frames.
    pub peakiness: f64,
}

impl Default for InstanceParams {
    fn default() -> Self {
        Self {
            vocab: 5,
            phonemes: 4,
            states_per_phoneme: 2,
            max_phones_per_word: 3,
            max_variants: 2,
            min_frames: 4,
            max_frames: 25,
            max_words: 4,
            peakiness: 3.0,
        }
    }
}

pub struct Instance {
    pub models: Models,
    pub am: AcousticScores,
    pub max_words: usize,
}

/// Random lexicon, topology, full-history LM and acoustic scores; a pure
/// function of `(seed, params)`.
pub fn random_instance(seed: u64, params: &InstanceParams) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phonemes: Vec<String> = (0..params.phonemes).map(|p| format!("p{p}")).collect();
    let chains = phonemes
        .iter()
        .map(|_| {
            (0..params.states_per_phoneme)
                .map(|_| Transitions::linear(rng.gen_range(0.2..0.8)))
                .collect()
        })
        .collect();
    let topology = HmmTopology::new(phonemes.clone(), chains).expect("valid topology");

    let mut entries = Vec::new();
    for w in 0..params.vocab {
        let variants = rng.gen_range(1..=params.max_variants);
        for _ in 0..variants {
            let len = rng.gen_range(1..=params.max_phones_per_word);
            let pron: Vec<String> = (0..len).map(|_| phonemes.choose(&mut rng).unwrap().clone()).collect();
            entries.push((format!("w{w}"), rng.gen_range(0.5..2.0), pron));
        }
    }
    let lexicon = Lexicon::from_entries(entries).expect("valid lexicon");

    let corpus: Vec<Vec<WordId>> = (0..12)
        .map(|_| {
            let len = rng.gen_range(1..=params.max_words);
            (0..len).map(|_| WordId(rng.gen_range(0..params.vocab as u32))).collect()
        })
        .collect();
    let lm = FullHistoryLm::build(&corpus, lexicon.len(), 0.7).expect("valid LM");
    let models = Models::new(lexicon, topology, Arc::new(lm)).expect("consistent models");

    let num_states = models.topology().num_states();
    let frames = rng.gen_range(params.min_frames..=params.max_frames);
    let posterior = (0..frames)
        .map(|_| {
            let raw: Vec<f64> = (0..num_states)
                .map(|_| rng.gen_range(0.0f64..1.0).powf(params.peakiness) + 1e-3)
                .collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / total).collect()
        })
        .collect();
    let raw_prior: Vec<f64> = (0..num_states).map(|_| rng.gen_range(0.5..1.5)).collect();
    let total: f64 = raw_prior.iter().sum();
    let prior = raw_prior.into_iter().map(|v| v / total).collect();
    let am = AcousticScores::new(posterior, prior).expect("normalized scores");
    Instance {
        models,
        am,
        max_words: params.max_words,
    }
}
