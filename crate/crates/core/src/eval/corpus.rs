//! Decoding and scoring a set of utterances.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::decision::{decision_rules, PosteriorLattice};
use crate::error::{Error, Result};
use crate::eval::wer::{levenshtein, EditCounts, WerReport};
use crate::eval::RtfAggregate;
use crate::model::{AcousticScores, Models, ScaleConfig};
use crate::search::{combiners, BeamConfig, Decoder};

#[derive(Clone, Debug, PartialEq)]
pub struct Utterance {
    pub id: String,
    pub reference: Vec<String>,
    pub am: AcousticScores,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UtteranceOutcome {
    pub id: String,
    /// One hypothesis per decision rule, in request order; empty on failure.
    pub hypotheses: Vec<Vec<String>>,
    /// Final score of the best sequence.
    pub best_score: Option<f64>,
    pub elapsed: Duration,
    pub frames: usize,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct CorpusDecode {
    pub mode: String,
    pub decisions: Vec<String>,
    pub outcomes: Vec<UtteranceOutcome>,
}

impl CorpusDecode {
    pub fn failures(&self) -> usize {
        self.outcomes.iter().filter(|o| o.error.is_some()).count()
    }

    /// Fails when more than `budget` (a fraction) of the utterances failed.
    pub fn check_failures(&self, budget: f64) -> Result<()> {
        let failed = self.failures();
        if failed as f64 > budget * self.outcomes.len() as f64 {
            return Err(Error::FailureBudget {
                failed,
                total: self.outcomes.len(),
            });
        }
        Ok(())
    }

    /// Per-utterance edit counts for one decision rule; failures score as
    /// empty hypotheses.
    pub fn edit_counts(&self, decision: usize, utts: &[Utterance]) -> Vec<EditCounts> {
        self.outcomes
            .iter()
            .zip(utts)
            .map(|(o, u)| {
                let hyp: &[String] = o.hypotheses.get(decision).map_or(&[], Vec::as_slice);
                levenshtein(&u.reference, hyp).counts
            })
            .collect()
    }

    pub fn report(&self, decision: usize, utts: &[Utterance]) -> WerReport {
        WerReport::pooled(&self.edit_counts(decision, utts))
    }

    pub fn rtf(&self, frame_shift: Duration) -> f64 {
        let mut agg = RtfAggregate::default();
        for o in &self.outcomes {
            agg.add(o.elapsed, o.frames);
        }
        agg.rtf(frame_shift)
    }
}

fn decode_one(decoder: &Decoder<'_>, utt: &Utterance, decisions: &[String]) -> UtteranceOutcome {
    let frames = utt.am.num_frames();
    let started = Instant::now();
    let result = decoder.decode(&utt.am);
    let elapsed = started.elapsed();
    let outcome = |hypotheses, best_score, error| UtteranceOutcome {
        id: utt.id.clone(),
        hypotheses,
        best_score,
        elapsed,
        frames,
        error,
    };
    let out = match result {
        Ok(out) => out,
        Err(e) => return outcome(Vec::new(), None, Some(e.to_string())),
    };
    let best_score = Some(out.best().score);
    let decided = PosteriorLattice::new(out.lattice).and_then(|pl| {
        decisions
            .iter()
            .map(|d| decision_rules().get(d)?.decide(&pl))
            .collect::<Result<Vec<_>>>()
    });
    match decided {
        Ok(hyps) => outcome(hyps, best_score, None),
        Err(e) => outcome(Vec::new(), best_score, Some(e.to_string())),
    }
}

/// Decodes every utterance with one mode and applies each decision rule.
/// Results keep utterance order regardless of `workers`.
pub fn decode_corpus(
    models: &Models,
    utts: &[Utterance],
    mode: &str,
    scales: ScaleConfig,
    beam: BeamConfig,
    decisions: &[String],
    workers: usize,
) -> Result<CorpusDecode> {
    for d in decisions {
        decision_rules().get(d)?;
    }
    let decoder = Decoder::with_combiner(models, combiners().get(mode)?, scales, beam)?;
    let outcomes = if workers <= 1 {
        utts.iter().map(|u| decode_one(&decoder, u, decisions)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
        pool.install(|| utts.par_iter().map(|u| decode_one(&decoder, u, decisions)).collect())
    };
    Ok(CorpusDecode {
        mode: mode.to_string(),
        decisions: decisions.to_vec(),
        outcomes,
    })
}
