use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::search::history::{HistoryId, TraceId};
use crate::search::tree::NodeId;

/// One active search state: a full word history plus a position in the lexical tree.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchHypothesis {
    pub history: HistoryId,
    pub node: NodeId,
    /// Path-combined score (`Q`), summed or maximized depending on the mode.
    pub score: f64,
    /// Score of the single best path into this state.
    pub best_path_score: f64,
    /// Last word boundary on the best path.
    pub trace: TraceId,
    /// First frame of the current word on the best path.
    pub word_start: u32,
    /// Number of merged alignments (saturating).
    pub paths: u64,
}

impl SearchHypothesis {
    pub fn key(&self) -> (HistoryId, NodeId) {
        (self.history, self.node)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamConfig {
    /// Additive score offset from the frame-best hypothesis.
    pub threshold: f64,
    /// Histogram pruning limit, disabled when `None`.
    #[serde(default)]
    pub max_hyps: Option<usize>,
    /// Longest word sequence the search will extend to, unlimited when `None`.
    #[serde(default)]
    pub max_words: Option<usize>,
}

impl BeamConfig {
    pub fn new(threshold: f64) -> Self {
        Self {
            threshold,
            max_hyps: None,
            max_words: None,
        }
    }

    pub fn unpruned() -> Self {
        Self::new(f64::INFINITY)
    }

    pub fn with_max_words(mut self, max_words: usize) -> Self {
        self.max_words = Some(max_words);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.threshold.is_nan() || self.threshold < 0.0 {
            return Err(Error::Config(format!("beam threshold must be >= 0, got {}", self.threshold)));
        }
        if self.max_hyps == Some(0) || self.max_words == Some(0) {
            return Err(Error::Config("max_hyps and max_words must be positive".into()));
        }
        Ok(())
    }
}

impl Default for BeamConfig {
    fn default() -> Self {
        Self::new(12.0)
    }
}

/// Hypotheses active at one frame, sorted by key with unique keys.
#[derive(Clone, Debug, Default)]
pub struct Beam {
    pub hyps: Vec<SearchHypothesis>,
}

impl Beam {
    pub fn new(mut hyps: Vec<SearchHypothesis>) -> Self {
        hyps.sort_by_key(SearchHypothesis::key);
        debug_assert!(hyps.windows(2).all(|w| w[0].key() != w[1].key()));
        Self { hyps }
    }

    pub fn len(&self) -> usize {
        self.hyps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hyps.is_empty()
    }

    pub fn best_score(&self) -> f64 {
        self.hyps.iter().map(|h| h.score).fold(f64::INFINITY, f64::min)
    }

    /// Score-based pruning followed by optional histogram pruning.
    pub fn prune(&mut self, cfg: &BeamConfig) {
        prune(&mut self.hyps, cfg.threshold);
        if let Some(limit) = cfg.max_hyps {
            if self.hyps.len() > limit {
                let mut order: Vec<usize> = (0..self.hyps.len()).collect();
                order.sort_by(|&a, &b| {
                    self.hyps[a]
                        .score
                        .total_cmp(&self.hyps[b].score)
                        .then(a.cmp(&b))
                });
                let mut keep = vec![false; self.hyps.len()];
                order.iter().take(limit).for_each(|&i| keep[i] = true);
                let mut it = keep.into_iter();
                self.hyps.retain(|_| it.next().unwrap_or(false));
            }
        }
    }
}

/// Keeps every hypothesis within `threshold` of the minimum score (ties kept).
pub fn prune(hyps: &mut Vec<SearchHypothesis>, threshold: f64) {
    if threshold == f64::INFINITY {
        return;
    }
    let best = hyps.iter().map(|h| h.score).fold(f64::INFINITY, f64::min);
    let limit = best + threshold;
    hyps.retain(|h| h.score <= limit);
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hyp(node: NodeId, score: f64) -> SearchHypothesis {
        SearchHypothesis {
            history: 0,
            node,
            score,
            best_path_score: score,
            trace: 0,
            word_start: 0,
            paths: 1,
        }
    }

    fn scores(beam: &Beam) -> Vec<f64> {
        beam.hyps.iter().map(|h| h.score).collect()
    }

    #[test]
    fn threshold_examples() {
        let mut beam = Beam::new(vec![hyp(1, 1.0), hyp(2, 2.0), hyp(3, 9.0)]);
        beam.prune(&BeamConfig::new(f64::INFINITY));
        assert_eq!(scores(&beam), [1.0, 2.0, 9.0]);
        beam.prune(&BeamConfig::new(5.0));
        assert_eq!(scores(&beam), [1.0, 2.0]);
    }

    #[test]
    fn ties_at_the_boundary_are_kept() {
        let mut beam = Beam::new(vec![hyp(1, 1.0), hyp(2, 3.0), hyp(3, 3.0)]);
        beam.prune(&BeamConfig::new(2.0));
        assert_eq!(beam.len(), 3);
    }

    #[test]
    fn histogram_limit() {
        let mut beam = Beam::new(vec![hyp(1, 4.0), hyp(2, 1.0), hyp(3, 2.0), hyp(4, 2.0)]);
        let cfg = BeamConfig {
            max_hyps: Some(2),
            ..BeamConfig::unpruned()
        };
        beam.prune(&cfg);
        assert_eq!(scores(&beam), [1.0, 2.0]);
        assert_eq!(beam.hyps[1].node, 3);
    }

    #[test]
    fn config_validation() {
        assert!(BeamConfig::new(-1.0).validate().is_err());
        assert!(BeamConfig::new(f64::NAN).validate().is_err());
        assert!(BeamConfig::unpruned().with_max_words(0).validate().is_err());
        BeamConfig::unpruned().validate().unwrap();
    }

    proptest! {
        #[test]
        fn widening_never_removes(raw in prop::collection::vec(0.0f64..50.0, 1..40), a in 0.0f64..20.0, b in 0.0f64..20.0) {
            let (narrow, wide) = if a <= b { (a, b) } else { (b, a) };
            let hyps: Vec<_> = raw.iter().enumerate().map(|(i, &s)| hyp(i as NodeId, s)).collect();
            let mut n = hyps.clone();
            prune(&mut n, narrow);
            let mut w = hyps.clone();
            prune(&mut w, wide);
            for h in &n {
                prop_assert!(w.iter().any(|x| x.node == h.node));
            }
            let best = raw.iter().cloned().fold(f64::INFINITY, f64::min);
            prop_assert!(n.iter().all(|h| h.score <= best + narrow));
        }
    }
}
