//! Synthetic corpora with a controllable posterior sharpness.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::Utterance;
use crate::model::{parse_corpus, AcousticScores, FullHistoryLm, HmmTopology, Lexicon, Models, StateId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticCorpusSpec {
    pub seed: u64,
    pub vocab_size: usize,
    pub phonemes: usize,
    pub variants_min: usize,
    pub variants_max: usize,
    pub states_per_phoneme: usize,
    pub phones_min: usize,
    pub phones_max: usize,
    pub utterances: usize,
    pub length_min: usize,
    pub length_max: usize,
    pub frames_per_state: usize,
    pub frame_jitter: usize,
    /// Posterior mass placed on the aligned state, in (0, 1].
    pub sharpness: f64,
    pub noise_floor: f64,
    pub lm_sentences: usize,
}

impl Default for SyntheticCorpusSpec {
    fn default() -> Self {
        Self {
            seed: 42,
            vocab_size: 12,
            phonemes: 10,
            variants_min: 1,
            variants_max: 2,
            states_per_phoneme: 2,
            phones_min: 2,
            phones_max: 4,
            utterances: 100,
            length_min: 2,
            length_max: 8,
            frames_per_state: 2,
            frame_jitter: 1,
            sharpness: 0.8,
            noise_floor: 0.05,
            lm_sentences: 200,
        }
    }
}

impl SyntheticCorpusSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(format!("corpus spec: {msg}")));
        if self.vocab_size == 0 || self.phonemes == 0 || self.states_per_phoneme == 0 {
            return fail("vocab_size, phonemes and states_per_phoneme must be positive");
        }
        if self.variants_min == 0 || self.variants_min > self.variants_max {
            return fail("need 1 <= variants_min <= variants_max");
        }
        if self.phones_min == 0 || self.phones_min > self.phones_max {
            return fail("need 1 <= phones_min <= phones_max");
        }
        let distinct: f64 = (self.phones_min..=self.phones_max)
            .map(|n| (self.phonemes as f64).powi(n as i32))
            .sum();
        if distinct < self.variants_max as f64 {
            return fail("too few distinct pronunciations for variants_max");
        }
        if self.utterances == 0 || self.lm_sentences == 0 {
            return fail("utterances and lm_sentences must be positive");
        }
        if self.length_min == 0 || self.length_min > self.length_max {
            return fail("length range must satisfy 1 <= length_min <= length_max (zero-length utterances have no frames)");
        }
        if self.frames_per_state == 0 {
            return fail("frames_per_state must be positive");
        }
        if !(self.sharpness > 0.0 && self.sharpness <= 1.0) {
            return fail("sharpness must lie in (0, 1]");
        }
        if !(self.noise_floor.is_finite() && self.noise_floor >= 0.0) {
            return fail("noise_floor must be non-negative");
        }
        Ok(())
    }
}

/// Lexicon, topology, LM training text and utterances. Alignments are known
/// only for generated corpora.
#[derive(Clone, Debug)]
pub struct Corpus {
    pub lexicon: Lexicon,
    pub topology: HmmTopology,
    pub lm_sentences: Vec<Vec<String>>,
    pub utterances: Vec<Utterance>,
    pub alignments: Vec<Vec<StateId>>,
}

impl Corpus {
    pub fn models(&self, lm_smoothing: f64) -> Result<Models> {
        let lm = FullHistoryLm::from_sentences(&self.lm_sentences, &self.lexicon, lm_smoothing)?;
        Models::new(self.lexicon.clone(), self.topology.clone(), Arc::new(lm))
    }

    /// Writes `lexicon.txt`, `topology.txt`, `lm_corpus.txt`, `refs.txt` and
    /// one `am/<id>.txt` per utterance.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let am_dir = dir.join("am");
        fs::create_dir_all(&am_dir).map_err(|e| Error::io(am_dir.display().to_string(), e))?;
        let put = |path: &Path, text: String| fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e));
        put(&dir.join("lexicon.txt"), self.lexicon.to_text())?;
        put(&dir.join("topology.txt"), self.topology.to_text())?;
        put(&dir.join("lm_corpus.txt"), join_lines(self.lm_sentences.iter().map(|s| s.join(" "))))?;
        put(
            &dir.join("refs.txt"),
            join_lines(self.utterances.iter().map(|u| {
                let mut line = u.id.clone();
                for w in &u.reference {
                    line.push(' ');
                    line.push_str(w);
                }
                line
            })),
        )?;
        for u in &self.utterances {
            put(&am_dir.join(format!("{}.txt", u.id)), u.am.to_text())?;
        }
        Ok(())
    }

    /// Reads a directory written by [`Corpus::write`].
    pub fn load(dir: &Path) -> Result<Self> {
        let lexicon = Lexicon::load(&dir.join("lexicon.txt"))?;
        let topology = HmmTopology::load(&dir.join("topology.txt"))?;
        let lm_path = dir.join("lm_corpus.txt");
        let lm_text = fs::read_to_string(&lm_path).map_err(|e| Error::io(lm_path.display().to_string(), e))?;
        let refs_path = dir.join("refs.txt");
        let refs = fs::read_to_string(&refs_path).map_err(|e| Error::io(refs_path.display().to_string(), e))?;
        let mut utterances = Vec::new();
        for (i, line) in refs.lines().enumerate() {
            let mut fields = line.split_whitespace();
            let Some(id) = fields.next() else { continue };
            if utterances.iter().any(|u: &Utterance| u.id == id) {
                return Err(Error::parse(&refs_path, i + 1, format!("duplicate utterance id `{id}`")));
            }
            let reference: Vec<String> = fields.map(str::to_string).collect();
            lexicon.words_to_ids(&reference)?;
            let am = AcousticScores::load(&dir.join("am").join(format!("{id}.txt")))?;
            utterances.push(Utterance {
                id: id.to_string(),
                reference,
                am,
            });
        }
        utterances.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(Self {
            lexicon,
            topology,
            lm_sentences: parse_corpus(&lm_text),
            utterances,
            alignments: Vec::new(),
        })
    }
}

fn join_lines(lines: impl Iterator<Item = String>) -> String {
    let mut out = String::new();
    for line in lines {
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Word-level Markov source shared by the LM text and the references.
struct SentenceSource {
    start: WeightedIndex<f64>,
    next: Vec<WeightedIndex<f64>>,
    length_min: usize,
    length_max: usize,
}

impl SentenceSource {
    fn new(rng: &mut ChaCha8Rng, vocab: usize, length_min: usize, length_max: usize) -> Self {
        let dist = |rng: &mut ChaCha8Rng| {
            let w: Vec<f64> = (0..vocab).map(|_| rng.gen_range(0.0f64..1.0).powi(3) + 0.02).collect();
            WeightedIndex::new(w).expect("positive weights")
        };
        let start = dist(rng);
        let next = (0..vocab).map(|_| dist(rng)).collect();
        Self {
            start,
            next,
            length_min,
            length_max,
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let len = rng.gen_range(self.length_min..=self.length_max);
        let mut words = vec![self.start.sample(rng)];
        while words.len() < len {
            let prev = *words.last().unwrap();
            words.push(self.next[prev].sample(rng));
        }
        words
    }
}

fn word_name(i: usize, vocab: usize) -> String {
    let width = vocab.saturating_sub(1).to_string().len();
    format!("w{i:0width$}")
}

/// Generates a corpus; a pure function of the spec.
pub fn synth_corpus(spec: &SyntheticCorpusSpec) -> Result<Corpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let phonemes: Vec<String> = (0..spec.phonemes).map(|p| format!("p{p}")).collect();
    // loop probability matching the mean generated state duration
    let loop_prob = (1.0 - 1.0 / spec.frames_per_state as f64).clamp(0.05, 0.95);
    let topology = HmmTopology::uniform(phonemes.clone(), spec.states_per_phoneme, loop_prob)?;

    let mut entries = Vec::new();
    for w in 0..spec.vocab_size {
        let count = rng.gen_range(spec.variants_min..=spec.variants_max);
        let mut variants: Vec<Vec<String>> = Vec::new();
        while variants.len() < count {
            let len = rng.gen_range(spec.phones_min..=spec.phones_max);
            let pron: Vec<String> = (0..len).map(|_| phonemes.choose(&mut rng).unwrap().clone()).collect();
            if !variants.contains(&pron) {
                variants.push(pron);
            }
        }
        for pron in &variants {
            entries.push((word_name(w, spec.vocab_size), rng.gen_range(0.5..1.5), pron.clone()));
        }
    }
    let lexicon = Lexicon::from_entries(entries)?;

    let source = SentenceSource::new(&mut rng, spec.vocab_size, spec.length_min, spec.length_max);
    let names = |ws: &[usize]| -> Vec<String> { ws.iter().map(|&w| word_name(w, spec.vocab_size)).collect() };
    let lm_sentences: Vec<Vec<String>> = (0..spec.lm_sentences).map(|_| names(&source.sample(&mut rng))).collect();

    let num_states = topology.num_states();
    let mut references = Vec::new();
    let mut alignments = Vec::new();
    for _ in 0..spec.utterances {
        let words = source.sample(&mut rng);
        let mut alignment = Vec::new();
        for &w in &words {
            let variants = lexicon.variants(lexicon.id(&word_name(w, spec.vocab_size)).unwrap());
            let v = WeightedIndex::new(variants.iter().map(|p| p.weight))
                .expect("positive weights")
                .sample(&mut rng);
            for s in topology.chain(&variants[v].phonemes)? {
                let lo = spec.frames_per_state.saturating_sub(spec.frame_jitter).max(1);
                let dur = rng.gen_range(lo..=spec.frames_per_state + spec.frame_jitter);
                alignment.extend(std::iter::repeat_n(s, dur));
            }
        }
        references.push(names(&words));
        alignments.push(alignment);
    }

    let mut counts = vec![1.0; num_states];
    for &s in alignments.iter().flatten() {
        counts[s] += 1.0;
    }
    let total: f64 = counts.iter().sum();
    let prior: Vec<f64> = counts.iter().map(|c| c / total).collect();

    let mut utterances = Vec::new();
    for (i, (reference, alignment)) in references.into_iter().zip(&alignments).enumerate() {
        let posterior = alignment
            .iter()
            .map(|&aligned| posterior_row(&mut rng, num_states, aligned, spec.sharpness, spec.noise_floor))
            .collect();
        utterances.push(Utterance {
            id: format!("utt_{i:04}"),
            reference,
            am: AcousticScores::new(posterior, prior.clone())?,
        });
    }
    Ok(Corpus {
        lexicon,
        topology,
        lm_sentences,
        utterances,
        alignments,
    })
}

fn posterior_row(rng: &mut ChaCha8Rng, num_states: usize, aligned: StateId, sharpness: f64, noise: f64) -> Vec<f64> {
    let mut row = vec![0.0; num_states];
    if num_states == 1 {
        row[0] = 1.0;
        return row;
    }
    let rest = 1.0 - sharpness;
    let raw: Vec<f64> = (0..num_states)
        .map(|s| if s == aligned { 0.0 } else { noise + rng.gen_range(0.0f64..1.0).powi(4) })
        .collect();
    let total: f64 = raw.iter().sum();
    for (s, r) in raw.into_iter().enumerate() {
        row[s] = if s == aligned { sharpness } else { rest * r / total };
    }
    row
}
