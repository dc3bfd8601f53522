//! Model data shared read-only by every decoder: lexicon, HMM topology,
//! acoustic scores and language models.

mod acoustic;
mod lexicon;
mod lm;
mod topology;

use std::sync::Arc;

pub use acoustic::AcousticScores;
pub use lexicon::{Lexicon, Pronunciation, WordId};
pub use lm::{parse_corpus, read_corpus, FullHistoryLm, LanguageModel, LmToken, UniformLm};
pub use topology::{HmmTopology, StateId, Transitions};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Acoustic scale `α` and LM scale `β`.
///
/// `α` multiplies every acoustic-side score (emission, transition and
/// pronunciation weight); `β` multiplies LM scores.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleConfig {
    pub acoustic: f64,
    pub lm: f64,
}

impl ScaleConfig {
    pub fn new(acoustic: f64, lm: f64) -> Result<Self> {
        let cfg = Self { acoustic, lm };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.acoustic.is_finite() && self.acoustic > 0.0 && self.lm.is_finite() && self.lm > 0.0) {
            return Err(Error::Config(format!(
                "scales must be positive and finite, got alpha={} beta={}",
                self.acoustic, self.lm
            )));
        }
        Ok(())
    }

    /// Both scales multiplied by `gamma`.
    pub fn scaled(&self, gamma: f64) -> Self {
        Self {
            acoustic: self.acoustic * gamma,
            lm: self.lm * gamma,
        }
    }
}

impl Default for ScaleConfig {
    fn default() -> Self {
        Self { acoustic: 1.0, lm: 1.0 }
    }
}

/// One pronunciation variant expanded to its acoustic state chain.
#[derive(Clone, Debug, PartialEq)]
pub struct VariantChain {
    pub states: Vec<StateId>,
    pub weight: f64,
}

/// Lexicon, topology and LM checked for mutual consistency.
#[derive(Clone)]
pub struct Models {
    lexicon: Lexicon,
    topology: HmmTopology,
    lm: Arc<dyn LanguageModel>,
    chains: Vec<Vec<VariantChain>>,
}

impl Models {
    pub fn new(lexicon: Lexicon, topology: HmmTopology, lm: Arc<dyn LanguageModel>) -> Result<Self> {
        lexicon.check()?;
        if lm.vocab_size() != lexicon.len() {
            return Err(Error::Data(format!(
                "LM vocabulary has {} words, lexicon has {}",
                lm.vocab_size(),
                lexicon.len()
            )));
        }
        let mut chains = Vec::with_capacity(lexicon.len());
        for id in lexicon.ids() {
            let mut per_word = Vec::new();
            for pron in lexicon.variants(id) {
                let states = topology
                    .chain(&pron.phonemes)
                    .map_err(|e| Error::Data(format!("word `{}`: {e}", lexicon.word(id))))?;
                per_word.push(VariantChain {
                    states,
                    weight: pron.weight,
                });
            }
            chains.push(per_word);
        }
        Ok(Self {
            lexicon,
            topology,
            lm,
            chains,
        })
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn topology(&self) -> &HmmTopology {
        &self.topology
    }

    pub fn lm(&self) -> &dyn LanguageModel {
        self.lm.as_ref()
    }

    pub fn chains(&self, word: WordId) -> &[VariantChain] {
        &self.chains[word.index()]
    }

    /// Fewest frames any variant of `word` can occupy.
    pub fn min_frames(&self, word: WordId) -> usize {
        let topo = &self.topology;
        self.chains(word)
            .iter()
            .map(|c| {
                // a skip consumes two chain positions in one frame
                let mut frames = 0;
                let mut i = 0;
                while i < c.states.len() {
                    frames += 1;
                    let skip = topo.transitions(c.states[i]).skip_prob > 0.0;
                    i += if skip && i + 2 < c.states.len() { 2 } else { 1 };
                }
                frames
            })
            .min()
            .unwrap_or(0)
    }

    pub fn check_acoustics(&self, am: &AcousticScores) -> Result<()> {
        if am.num_states() != self.topology.num_states() {
            return Err(Error::Data(format!(
                "acoustic scores have {} states, topology defines {}",
                am.num_states(),
                self.topology.num_states()
            )));
        }
        Ok(())
    }
}

impl std::fmt::Debug for Models {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Models")
            .field("words", &self.lexicon.len())
            .field("states", &self.topology.num_states())
            .field("lm", &self.lm.name())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_validation() {
        assert!(ScaleConfig::new(1.0, 0.0).is_err());
        assert!(ScaleConfig::new(-1.0, 1.0).is_err());
        assert_eq!(ScaleConfig::new(1.0, 2.0).unwrap().scaled(0.5), ScaleConfig { acoustic: 0.5, lm: 1.0 });
    }

    #[test]
    fn models_reject_missing_phonemes_and_vocab_mismatch() {
        let lex = Lexicon::uniform([("a", vec!["p"]), ("b", vec!["q"])]).unwrap();
        let topo = HmmTopology::uniform(["p"], 2, 0.5).unwrap();
        assert!(Models::new(lex.clone(), topo, Arc::new(UniformLm::new(2))).is_err());
        let topo = HmmTopology::uniform(["p", "q"], 2, 0.5).unwrap();
        assert!(Models::new(lex.clone(), topo.clone(), Arc::new(UniformLm::new(3))).is_err());
        let models = Models::new(lex, topo, Arc::new(UniformLm::new(2))).unwrap();
        assert_eq!(models.chains(WordId(1))[0].states, vec![2, 3]);
        assert_eq!(models.min_frames(WordId(0)), 2);
    }
}
