//! Time-synchronous prefix-tree decoder without history recombination.
//!
//! Every hypothesis is keyed by its full word history and its lexical tree
//! node. The path combiner decides whether paths meeting in one key are summed
//! (full-sum) or maximized (Viterbi); a max recursion always runs alongside to
//! provide best-path word boundaries.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{AcousticScores, LmToken, Models, ScaleConfig, WordId};
use crate::score::add_costs;
use crate::search::beam::{Beam, BeamConfig, SearchHypothesis};
use crate::search::combine::{combiners, PathCombiner};
use crate::search::history::{
    HistoryArena, HistoryId, TraceArena, TraceId, WordTrace, EMPTY_HISTORY, ROOT_TRACE,
};
use crate::search::lattice::{Lattice, LATTICE_ROOT};
use crate::search::tree::{LexiconTree, NodeId};
use crate::SENTENCE_END;

/// Per-frame search-space sizes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SearchStats {
    /// Distinct keys after expansion, before pruning.
    pub active_keys: Vec<usize>,
    /// Hypotheses kept after pruning.
    pub retained: Vec<usize>,
    pub histories: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WordBoundary {
    pub word: WordId,
    pub start_frame: usize,
    pub end_frame: usize,
}

/// A word sequence that reached the last frame in a final HMM state.
#[derive(Clone, Debug, PartialEq)]
pub struct CompleteHypothesis {
    pub words: Vec<WordId>,
    /// Final joint score in the decoder's mode, sentence end included.
    pub score: f64,
    /// Score of the single best alignment.
    pub best_path_score: f64,
    /// Surviving alignments merged into `score` (saturating).
    pub paths: u64,
    /// Word boundaries of the best alignment.
    pub boundaries: Vec<WordBoundary>,
}

#[derive(Clone, Debug)]
pub struct DecodeOutput {
    /// Sorted by score, ties by word sequence.
    pub hypotheses: Vec<CompleteHypothesis>,
    pub lattice: Lattice,
    pub stats: SearchStats,
}

impl DecodeOutput {
    pub fn best(&self) -> &CompleteHypothesis {
        &self.hypotheses[0]
    }

    pub fn hypothesis(&self, words: &[WordId]) -> Option<&CompleteHypothesis> {
        self.hypotheses.iter().find(|h| h.words == words)
    }
}

/// Mutable search state of one utterance.
pub struct SearchState<'a> {
    am: &'a AcousticScores,
    emissions: Vec<f64>,
    frame: usize,
    beam: Beam,
    histories: HistoryArena,
    traces: TraceArena,
    lm_cache: HashMap<(HistoryId, LmToken), f64>,
    stats: SearchStats,
}

impl SearchState<'_> {
    pub fn frame(&self) -> usize {
        self.frame
    }

    pub fn beam(&self) -> &Beam {
        &self.beam
    }

    pub fn histories(&self) -> &HistoryArena {
        &self.histories
    }

    pub fn stats(&self) -> &SearchStats {
        &self.stats
    }

    fn emission(&self, t: usize, state: usize) -> f64 {
        self.emissions[t * self.am.num_states() + state]
    }
}

/// Accumulates candidate paths into unique keys.
#[derive(Default)]
struct Expansion {
    hyps: Vec<SearchHypothesis>,
    index: HashMap<(HistoryId, NodeId), usize>,
}

impl Expansion {
    fn add(&mut self, combiner: &dyn PathCombiner, cand: SearchHypothesis) {
        if cand.score == f64::INFINITY {
            return;
        }
        match self.index.get(&cand.key()) {
            Some(&i) => {
                let acc = &mut self.hyps[i];
                acc.score = combiner.combine(acc.score, cand.score);
                if cand.best_path_score < acc.best_path_score {
                    acc.best_path_score = cand.best_path_score;
                    acc.trace = cand.trace;
                    acc.word_start = cand.word_start;
                }
                acc.paths = acc.paths.saturating_add(cand.paths);
            }
            None => {
                self.index.insert(cand.key(), self.hyps.len());
                self.hyps.push(cand);
            }
        }
    }
}

/// Variants of one word ending in the same frame under the same history, merged.
#[derive(Clone, Debug)]
struct WordEndGroup {
    history: HistoryId,
    word: WordId,
    score: f64,
    best_path_score: f64,
    trace: TraceId,
    word_start: u32,
    paths: u64,
}

pub struct Decoder<'m> {
    models: &'m Models,
    tree: LexiconTree,
    combiner: Box<dyn PathCombiner>,
    scales: ScaleConfig,
    beam: BeamConfig,
}

impl<'m> Decoder<'m> {
    /// `mode` names a registered path combiner (`viterbi`, `fullsum`).
    pub fn new(models: &'m Models, mode: &str, scales: ScaleConfig, beam: BeamConfig) -> Result<Self> {
        Self::with_combiner(models, combiners().get(mode)?, scales, beam)
    }

    pub fn with_combiner(
        models: &'m Models,
        combiner: Box<dyn PathCombiner>,
        scales: ScaleConfig,
        beam: BeamConfig,
    ) -> Result<Self> {
        scales.validate()?;
        beam.validate()?;
        Ok(Self {
            models,
            tree: LexiconTree::build(models),
            combiner,
            scales,
            beam,
        })
    }

    pub fn mode(&self) -> &'static str {
        self.combiner.name()
    }

    pub fn decode(&self, am: &AcousticScores) -> Result<DecodeOutput> {
        let mut state = self.start(am)?;
        while state.frame + 1 < am.num_frames() {
            self.expand_frame(&mut state)?;
        }
        self.finish(state)
    }

    /// Hypotheses for frame 0: every tree root under the empty history.
    pub fn start<'a>(&self, am: &'a AcousticScores) -> Result<SearchState<'a>> {
        self.models.check_acoustics(am)?;
        let mut state = SearchState {
            am,
            emissions: am.emission_matrix(self.scales.acoustic),
            frame: 0,
            beam: Beam::default(),
            histories: HistoryArena::default(),
            traces: TraceArena::default(),
            lm_cache: HashMap::new(),
            stats: SearchStats::default(),
        };
        let mut next = Expansion::default();
        for &root in self.tree.roots() {
            let score = state.emission(0, self.tree.node(root).state);
            next.add(
                self.combiner.as_ref(),
                SearchHypothesis {
                    history: EMPTY_HISTORY,
                    node: root,
                    score,
                    best_path_score: score,
                    trace: ROOT_TRACE,
                    word_start: 0,
                    paths: 1,
                },
            );
        }
        self.install(&mut state, next.hyps)?;
        Ok(state)
    }

    /// Advances the beam from frame `t-1` to `t`.
    pub fn expand_frame(&self, state: &mut SearchState<'_>) -> Result<()> {
        let t = state.frame + 1;
        let alpha = self.scales.acoustic;
        let comb = self.combiner.as_ref();
        let mut next = Expansion::default();

        for h in &state.beam.hyps {
            let node = self.tree.node(h.node);
            let mut step = |target: NodeId, cost: f64| {
                let cost = alpha * cost;
                next.add(
                    comb,
                    SearchHypothesis {
                        node: target,
                        score: add_costs(h.score, cost),
                        best_path_score: add_costs(h.best_path_score, cost),
                        ..h.clone()
                    },
                );
            };
            step(h.node, node.loop_cost);
            for &child in &node.children {
                step(child, node.forward_cost);
            }
            if let Some(target) = node.skip_target {
                step(target, node.skip_cost);
            }
        }

        for group in self.collect_word_ends(&state.beam, false) {
            if let Some(max) = self.beam.max_words {
                if state.histories.len_of(group.history) + 1 >= max {
                    continue;
                }
            }
            let trace_id = self.close_word(state, &group, t);
            let trace = state.traces.get(trace_id).clone();
            for &root in self.tree.roots() {
                next.add(
                    comb,
                    SearchHypothesis {
                        history: trace.history,
                        node: root,
                        score: trace.score,
                        best_path_score: trace.best_path_score,
                        trace: trace_id,
                        word_start: t as u32,
                        paths: group.paths,
                    },
                );
            }
        }

        let mut hyps = next.hyps;
        for h in &mut hyps {
            let e = state.emission(t, self.tree.node(h.node).state);
            h.score = add_costs(h.score, e);
            h.best_path_score = add_costs(h.best_path_score, e);
        }
        hyps.retain(|h| h.score < f64::INFINITY);
        state.frame = t;
        self.install(state, hyps)
    }

    fn install(&self, state: &mut SearchState<'_>, hyps: Vec<SearchHypothesis>) -> Result<()> {
        let mut beam = Beam::new(hyps);
        state.stats.active_keys.push(beam.len());
        beam.prune(&self.beam);
        state.stats.retained.push(beam.len());
        if beam.is_empty() {
            return Err(Error::SearchCollapsed { frame: state.frame });
        }
        state.beam = beam;
        Ok(())
    }

    /// Merges all variants of each (history, word) ending in the current frame.
    /// Outside the last frame the exit transition of the final state is included.
    fn collect_word_ends(&self, beam: &Beam, last_frame: bool) -> Vec<WordEndGroup> {
        let alpha = self.scales.acoustic;
        let mut groups: Vec<WordEndGroup> = Vec::new();
        let mut index: HashMap<(HistoryId, WordId), usize> = HashMap::new();
        for h in &beam.hyps {
            let node = self.tree.node(h.node);
            let exit = if last_frame { 0.0 } else { node.forward_cost };
            for end in &node.ends {
                let cost = alpha * (end.pron_cost + exit);
                let score = add_costs(h.score, cost);
                let best = add_costs(h.best_path_score, cost);
                if score == f64::INFINITY {
                    continue;
                }
                match index.get(&(h.history, end.word)) {
                    Some(&i) => {
                        let g = &mut groups[i];
                        g.score = self.combiner.combine(g.score, score);
                        if best < g.best_path_score {
                            g.best_path_score = best;
                            g.trace = h.trace;
                            g.word_start = h.word_start;
                        }
                        g.paths = g.paths.saturating_add(h.paths);
                    }
                    None => {
                        index.insert((h.history, end.word), groups.len());
                        groups.push(WordEndGroup {
                            history: h.history,
                            word: end.word,
                            score,
                            best_path_score: best,
                            trace: h.trace,
                            word_start: h.word_start,
                            paths: h.paths,
                        });
                    }
                }
            }
        }
        groups.sort_by_key(|g| (g.history, g.word));
        groups
    }

    fn lm_score(&self, state: &mut SearchState<'_>, history: HistoryId, token: LmToken) -> f64 {
        if let Some(&s) = state.lm_cache.get(&(history, token)) {
            return s;
        }
        let words = state.histories.words(history);
        let s = self.scales.lm * self.models.lm().score(&words, token).value();
        state.lm_cache.insert((history, token), s);
        s
    }

    /// Applies the LM score of the completed word and records its boundary.
    fn close_word(&self, state: &mut SearchState<'_>, group: &WordEndGroup, end_frame: usize) -> TraceId {
        let lm = self.lm_score(state, group.history, LmToken::Word(group.word));
        let history = state.histories.extend(group.history, group.word);
        state.traces.push(WordTrace {
            history,
            word: Some(group.word),
            start_frame: group.word_start,
            end_frame: end_frame as u32,
            score: add_costs(group.score, lm),
            best_path_score: add_costs(group.best_path_score, lm),
            prev: group.trace,
        })
    }

    /// Scores complete hypotheses at the last frame and builds the lattice.
    pub fn finish(&self, mut state: SearchState<'_>) -> Result<DecodeOutput> {
        let num_frames = state.am.num_frames();
        let mut finals = Vec::new();
        for group in self.collect_word_ends(&state.beam, true) {
            let word_trace = self.close_word(&mut state, &group, num_frames);
            let wt = state.traces.get(word_trace).clone();
            let end = self.lm_score(&mut state, wt.history, LmToken::End);
            let final_trace = state.traces.push(WordTrace {
                history: wt.history,
                word: None,
                start_frame: num_frames as u32,
                end_frame: num_frames as u32,
                score: add_costs(wt.score, end),
                best_path_score: add_costs(wt.best_path_score, end),
                prev: word_trace,
            });
            finals.push((final_trace, group.paths));
        }
        if finals.is_empty() {
            return Err(Error::NoCompleteHypothesis { frames: num_frames });
        }

        let mut hypotheses: Vec<(TraceId, CompleteHypothesis)> = finals
            .into_iter()
            .map(|(id, paths)| {
                let tr = state.traces.get(id);
                let boundaries = state
                    .traces
                    .chain(tr.prev)
                    .into_iter()
                    .map(|w| {
                        let w = state.traces.get(w);
                        WordBoundary {
                            word: w.word.expect("word trace"),
                            start_frame: w.start_frame as usize,
                            end_frame: w.end_frame as usize,
                        }
                    })
                    .collect();
                let hyp = CompleteHypothesis {
                    words: state.histories.words(tr.history),
                    score: tr.score,
                    best_path_score: tr.best_path_score,
                    paths,
                    boundaries,
                };
                (id, hyp)
            })
            .collect();
        hypotheses.sort_by(|a, b| a.1.score.total_cmp(&b.1.score).then_with(|| a.1.words.cmp(&b.1.words)));

        let lattice = self.build_lattice(&state.traces, hypotheses.iter().map(|(id, _)| *id));
        state.stats.histories = state.histories.len();
        Ok(DecodeOutput {
            hypotheses: hypotheses.into_iter().map(|(_, h)| h).collect(),
            lattice,
            stats: state.stats,
        })
    }

    fn build_lattice(&self, traces: &TraceArena, finals: impl Iterator<Item = TraceId>) -> Lattice {
        let lexicon = self.models.lexicon();
        let mut lattice = Lattice::new();
        let mut nodes: HashMap<TraceId, usize> = HashMap::from([(ROOT_TRACE, LATTICE_ROOT)]);
        for fin in finals {
            let mut parent = LATTICE_ROOT;
            for id in traces.chain(fin) {
                parent = match nodes.get(&id) {
                    Some(&n) => n,
                    None => {
                        let tr = traces.get(id);
                        let word = tr.word.map_or(SENTENCE_END, |w| lexicon.word(w));
                        let n = lattice.add_child(
                            parent,
                            word,
                            tr.start_frame as usize,
                            tr.end_frame as usize,
                            tr.score,
                        );
                        nodes.insert(id, n);
                        n
                    }
                };
            }
        }
        lattice
    }
}

/// One-shot decode with a mode given by name.
pub fn decode(
    am: &AcousticScores,
    models: &Models,
    scales: ScaleConfig,
    mode: &str,
    beam: BeamConfig,
) -> Result<DecodeOutput> {
    Decoder::new(models, mode, scales, beam)?.decode(am)
}
