use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-9;

/// Index into the lexicon vocabulary. Ids follow lexicographic word order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WordId(pub u32);

impl WordId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for WordId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Pronunciation {
    pub phonemes: Vec<String>,
    /// Prior weight of this variant; normalized per word.
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lexicon {
    words: Vec<String>,
    index: HashMap<String, WordId>,
    variants: Vec<Vec<Pronunciation>>,
}

impl Lexicon {
    /// Builds a lexicon from `(word, weight, phonemes)` entries, one per variant.
    /// Weights are normalized per word.
    pub fn from_entries<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, f64, Vec<String>)>,
    {
        let mut grouped: BTreeMap<String, Vec<Pronunciation>> = BTreeMap::new();
        for (word, weight, phonemes) in entries {
            if word.is_empty() || word.chars().any(char::is_whitespace) {
                return Err(Error::Data(format!("invalid word `{word}`")));
            }
            if word == crate::SENTENCE_END || word == crate::decision::EPSILON {
                return Err(Error::Data(format!("`{word}` is reserved")));
            }
            if !(weight.is_finite() && weight > 0.0) {
                return Err(Error::Data(format!("word `{word}`: variant weight must be positive, got {weight}")));
            }
            if phonemes.is_empty() {
                return Err(Error::Data(format!("word `{word}`: empty pronunciation")));
            }
            grouped
                .entry(word)
                .or_default()
                .push(Pronunciation { phonemes, weight });
        }
        if grouped.is_empty() {
            return Err(Error::Data("lexicon is empty".into()));
        }
        let mut words = Vec::with_capacity(grouped.len());
        let mut variants = Vec::with_capacity(grouped.len());
        for (word, mut prons) in grouped {
            let total: f64 = prons.iter().map(|p| p.weight).sum();
            prons.iter_mut().for_each(|p| p.weight /= total);
            words.push(word);
            variants.push(prons);
        }
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), WordId(i as u32)))
            .collect();
        Ok(Self {
            words,
            index,
            variants,
        })
    }

    /// Uniform variant weights.
    pub fn uniform<I, W, P>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (W, Vec<P>)>,
        W: Into<String>,
        P: Into<String>,
    {
        Self::from_entries(
            entries
                .into_iter()
                .map(|(w, ps)| (w.into(), 1.0, ps.into_iter().map(Into::into).collect())),
        )
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn word(&self, id: WordId) -> &str {
        &self.words[id.index()]
    }

    pub fn id(&self, word: &str) -> Option<WordId> {
        self.index.get(word).copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = WordId> {
        (0..self.words.len() as u32).map(WordId)
    }

    pub fn variants(&self, id: WordId) -> &[Pronunciation] {
        &self.variants[id.index()]
    }

    pub fn phonemes(&self) -> impl Iterator<Item = &str> {
        self.variants
            .iter()
            .flatten()
            .flat_map(|p| p.phonemes.iter().map(String::as_str))
    }

    pub fn words_to_ids(&self, words: &[impl AsRef<str>]) -> Result<Vec<WordId>> {
        words
            .iter()
            .map(|w| {
                self.id(w.as_ref())
                    .ok_or_else(|| Error::Data(format!("word `{}` is not in the lexicon", w.as_ref())))
            })
            .collect()
    }

    pub fn ids_to_words(&self, ids: &[WordId]) -> Vec<String> {
        ids.iter().map(|&id| self.word(id).to_string()).collect()
    }

    /// Checks the weight invariant; only fails if a caller mutated weights by hand.
    pub fn check(&self) -> Result<()> {
        for (w, prons) in self.words.iter().zip(&self.variants) {
            let total: f64 = prons.iter().map(|p| p.weight).sum();
            if (total - 1.0).abs() > NORM_TOL {
                return Err(Error::Data(format!("variant weights of `{w}` sum to {total}")));
            }
        }
        Ok(())
    }

    /// Parses `word TAB weight TAB phoneme phoneme ...`, one variant per line.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        for (lno, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(Error::parse(origin, lno + 1, "expected `word<TAB>weight<TAB>phonemes`"));
            }
            let weight: f64 = fields[1]
                .trim()
                .parse()
                .map_err(|e| Error::parse(origin, lno + 1, format!("bad weight `{}`: {e}", fields[1])))?;
            let phonemes: Vec<String> = fields[2].split_whitespace().map(str::to_string).collect();
            entries.push((fields[0].trim().to_string(), weight, phonemes));
        }
        Self::from_entries(entries).map_err(|e| match e {
            Error::Data(msg) => Error::parse(origin, 0, msg),
            other => other,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::parse(&text, path)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (w, prons) in self.words.iter().zip(&self.variants) {
            for p in prons {
                out.push_str(&format!("{w}\t{}\t{}\n", p.weight, p.phonemes.join(" ")));
            }
        }
        out
    }
}
