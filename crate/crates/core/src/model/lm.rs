//! Language models behind a common interface.

use std::collections::HashMap;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::lexicon::{Lexicon, WordId};
use crate::score::Score;

/// A predicted LM event: a vocabulary word or the end of the sentence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LmToken {
    Word(WordId),
    End,
}

/// Conditional word probabilities given a complete sentence-start-anchored history.
///
/// For every history the scores of all vocabulary words plus [`LmToken::End`]
/// exponentiate to a distribution summing to one.
pub trait LanguageModel: Send + Sync {
    fn name(&self) -> &str;

    fn vocab_size(&self) -> usize;

    fn score(&self, history: &[WordId], next: LmToken) -> Score;

    /// Opaque identity of the state the model conditions on. Two histories
    /// with equal signatures are interchangeable for this model.
    fn context_signature(&self, history: &[WordId]) -> u64;

    /// `-ln p(w_1^N </s>)`.
    fn sentence_score(&self, words: &[WordId]) -> Score {
        let mut total = Score::ZERO;
        for i in 0..words.len() {
            total = total + self.score(&words[..i], LmToken::Word(words[i]));
        }
        total + self.score(words, LmToken::End)
    }
}

/// Same probability for every event regardless of history.
#[derive(Clone, Debug)]
pub struct UniformLm {
    vocab_size: usize,
}

impl UniformLm {
    pub fn new(vocab_size: usize) -> Self {
        Self { vocab_size }
    }
}

impl LanguageModel for UniformLm {
    fn name(&self) -> &str {
        "uniform"
    }

    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn score(&self, _history: &[WordId], _next: LmToken) -> Score {
        Score(((self.vocab_size + 1) as f64).ln())
    }

    fn context_signature(&self, _history: &[WordId]) -> u64 {
        0
    }
}

#[derive(Clone, Debug, Default)]
struct ContextCounts {
    total: u64,
    next: HashMap<LmToken, u64>,
}

impl ContextCounts {
    fn observe(&mut self, token: LmToken) {
        self.total += 1;
        *self.next.entry(token).or_default() += 1;
    }

    fn count(&self, token: LmToken) -> u64 {
        self.next.get(&token).copied().unwrap_or(0)
    }
}

/// Count model conditioned on the entire history.
///
/// The distribution is built from the uniform distribution upwards: each
/// unanchored history suffix, shortest first, then the full sentence-anchored
/// history, interpolates its counts with the previous level as
/// `(c(h, w) + s · p_prev(w)) / (c(h) + s)`. Because the last level is keyed by
/// the whole history, histories sharing any number of trailing words can still
/// differ.
#[derive(Clone, Debug)]
pub struct FullHistoryLm {
    vocab_size: usize,
    smoothing: f64,
    anchored: HashMap<Vec<WordId>, ContextCounts>,
    unanchored: HashMap<Vec<WordId>, ContextCounts>,
}

impl FullHistoryLm {
    pub fn build(corpus: &[Vec<WordId>], vocab_size: usize, smoothing: f64) -> Result<Self> {
        if !(smoothing.is_finite() && smoothing > 0.0) {
            return Err(Error::Config(format!("LM smoothing must be positive, got {smoothing}")));
        }
        if corpus.is_empty() {
            return Err(Error::Data("LM corpus is empty".into()));
        }
        let mut anchored: HashMap<Vec<WordId>, ContextCounts> = HashMap::new();
        let mut unanchored: HashMap<Vec<WordId>, ContextCounts> = HashMap::new();
        for sentence in corpus {
            if let Some(w) = sentence.iter().find(|w| w.index() >= vocab_size) {
                return Err(Error::Data(format!("LM corpus word {w} outside vocabulary of {vocab_size}")));
            }
            for i in 0..=sentence.len() {
                let token = sentence.get(i).map_or(LmToken::End, |&w| LmToken::Word(w));
                anchored.entry(sentence[..i].to_vec()).or_default().observe(token);
                for j in 0..=i {
                    unanchored.entry(sentence[j..i].to_vec()).or_default().observe(token);
                }
            }
        }
        Ok(Self {
            vocab_size,
            smoothing,
            anchored,
            unanchored,
        })
    }

    /// Maps whitespace-tokenized sentences through the lexicon; OOV words are errors.
    pub fn from_sentences(sentences: &[Vec<String>], lexicon: &Lexicon, smoothing: f64) -> Result<Self> {
        let mut corpus = Vec::with_capacity(sentences.len());
        for (i, s) in sentences.iter().enumerate() {
            let ids = lexicon
                .words_to_ids(s)
                .map_err(|e| Error::Data(format!("LM corpus sentence {}: {e}", i + 1)))?;
            corpus.push(ids);
        }
        Self::build(&corpus, lexicon.len(), smoothing)
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn prob(&self, history: &[WordId], next: LmToken) -> f64 {
        let s = self.smoothing;
        let mut p = 1.0 / (self.vocab_size + 1) as f64;
        let interpolate = |p: f64, counts: Option<&ContextCounts>| match counts {
            Some(c) => (c.count(next) as f64 + s * p) / (c.total as f64 + s),
            None => p,
        };
        for start in (0..=history.len()).rev() {
            p = interpolate(p, self.unanchored.get(&history[start..]));
        }
        interpolate(p, self.anchored.get(history))
    }
}

impl LanguageModel for FullHistoryLm {
    fn name(&self) -> &str {
        "full-history"
    }

    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn score(&self, history: &[WordId], next: LmToken) -> Score {
        Score::from_prob(self.prob(history, next))
    }

    fn context_signature(&self, history: &[WordId]) -> u64 {
        let mut hasher = DefaultHasher::new();
        history.hash(&mut hasher);
        hasher.finish()
    }
}

/// Reads one whitespace-tokenized sentence per line; blank lines are skipped.
pub fn read_corpus(path: &Path) -> Result<Vec<Vec<String>>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    Ok(parse_corpus(&text))
}

pub fn parse_corpus(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.split_whitespace().map(str::to_string).collect::<Vec<_>>())
        .filter(|s| !s.is_empty())
        .collect()
}
