//! Brute-force reference scores.
//!
//! Every word sequence is scored on its own expanded state graph, with no
//! search, no pruning and no shared state. Two independent routes exist for the
//! acoustic part: a dense forward/max recursion and literal enumeration of
//! every alignment path.

use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{AcousticScores, LanguageModel, Models, ScaleConfig, WordId};
use crate::score::{add_costs, log_add, Score};

pub const ENUMERATION_LIMIT: u128 = 1_000_000;

/// How alignments of one word sequence are combined.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScoreRule {
    FullSum,
    BestPath,
}

impl ScoreRule {
    fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            ScoreRule::FullSum => log_add(a, b),
            ScoreRule::BestPath => a.min(b),
        }
    }
}

impl FromStr for ScoreRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fullsum" => Ok(ScoreRule::FullSum),
            "viterbi" => Ok(ScoreRule::BestPath),
            other => Err(Error::UnknownStrategy {
                kind: "oracle mode",
                name: other.to_string(),
                available: "fullsum, viterbi".into(),
            }),
        }
    }
}

/// All sequences of 1..=`max_len` words in lexicographic order.
pub fn enumerate_sequences(vocab_size: usize, max_len: usize) -> Result<Vec<Vec<WordId>>> {
    if max_len == 0 || vocab_size == 0 {
        return Err(Error::Config("enumeration needs a non-empty vocabulary and max length >= 1".into()));
    }
    let count = (vocab_size as u128).checked_pow(max_len as u32).unwrap_or(u128::MAX);
    if count > ENUMERATION_LIMIT {
        return Err(Error::EnumerationGuard {
            count,
            limit: ENUMERATION_LIMIT,
        });
    }
    fn visit(prefix: &mut Vec<WordId>, vocab: usize, max_len: usize, out: &mut Vec<Vec<WordId>>) {
        for w in 0..vocab {
            prefix.push(WordId(w as u32));
            out.push(prefix.clone());
            if prefix.len() < max_len {
                visit(prefix, vocab, max_len, out);
            }
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    visit(&mut Vec::new(), vocab_size, max_len, &mut out);
    Ok(out)
}

/// A node of one sequence's expanded state graph.
struct GraphNode {
    word_pos: usize,
    state: usize,
    last_in_word: bool,
    loop_cost: f64,
    forward_cost: f64,
    skip_cost: f64,
    /// `-ln` weight of the variant, charged on entry.
    entry_cost: Option<f64>,
}

fn neg_ln(p: f64) -> f64 {
    if p > 0.0 {
        -p.ln()
    } else {
        f64::INFINITY
    }
}

fn expand_graph(words: &[WordId], models: &Models) -> Vec<GraphNode> {
    let topo = models.topology();
    let mut nodes = Vec::new();
    for (pos, &w) in words.iter().enumerate() {
        for chain in models.chains(w) {
            let n = chain.states.len();
            for (j, &s) in chain.states.iter().enumerate() {
                let tr = topo.transitions(s);
                nodes.push(GraphNode {
                    word_pos: pos,
                    state: s,
                    last_in_word: j + 1 == n,
                    loop_cost: neg_ln(tr.loop_prob),
                    forward_cost: neg_ln(tr.forward_prob),
                    skip_cost: if j + 2 < n { neg_ln(tr.skip_prob) } else { f64::INFINITY },
                    entry_cost: (j == 0).then(|| neg_ln(chain.weight)),
                });
            }
        }
    }
    nodes
}

/// Acoustic-side score of `words` (no LM) by dense recursion.
fn acoustic_recursion(words: &[WordId], am: &AcousticScores, models: &Models, alpha: f64, rule: ScoreRule) -> f64 {
    if words.is_empty() {
        return f64::INFINITY;
    }
    let nodes = expand_graph(words, models);
    let emit = |t: usize, s: usize| am.emission_score(t, s, alpha).value();
    let mut cur = vec![f64::INFINITY; nodes.len()];
    for (i, n) in nodes.iter().enumerate() {
        if let (0, Some(entry)) = (n.word_pos, n.entry_cost) {
            cur[i] = add_costs(alpha * entry, emit(0, n.state));
        }
    }
    for t in 1..am.num_frames() {
        let mut next = vec![f64::INFINITY; nodes.len()];
        let push = |next: &mut Vec<f64>, to: usize, v: f64| next[to] = rule.combine(next[to], v);
        for (i, n) in nodes.iter().enumerate() {
            if cur[i] == f64::INFINITY {
                continue;
            }
            push(&mut next, i, add_costs(cur[i], alpha * n.loop_cost));
            if !n.last_in_word {
                push(&mut next, i + 1, add_costs(cur[i], alpha * n.forward_cost));
                if n.skip_cost.is_finite() {
                    push(&mut next, i + 2, add_costs(cur[i], alpha * n.skip_cost));
                }
            } else if n.word_pos + 1 < words.len() {
                for (k, m) in nodes.iter().enumerate() {
                    if let (true, Some(entry)) = (m.word_pos == n.word_pos + 1, m.entry_cost) {
                        push(&mut next, k, add_costs(cur[i], alpha * (n.forward_cost + entry)));
                    }
                }
            }
        }
        for (i, n) in nodes.iter().enumerate() {
            next[i] = add_costs(next[i], emit(t, n.state));
        }
        cur = next;
    }
    nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| n.word_pos + 1 == words.len() && n.last_in_word)
        .fold(f64::INFINITY, |acc, (i, _)| rule.combine(acc, cur[i]))
}

fn lm_total(words: &[WordId], lm: &dyn LanguageModel, beta: f64) -> f64 {
    beta * lm.sentence_score(words).value()
}

/// Joint score summed over all alignments and variant choices.
pub fn forward_full_sum(words: &[WordId], am: &AcousticScores, models: &Models, scales: ScaleConfig) -> Score {
    let ac = acoustic_recursion(words, am, models, scales.acoustic, ScoreRule::FullSum);
    Score(add_costs(ac, lm_total(words, models.lm(), scales.lm)))
}

/// Joint score of the single best alignment.
pub fn best_path_score(words: &[WordId], am: &AcousticScores, models: &Models, scales: ScaleConfig) -> Score {
    let ac = acoustic_recursion(words, am, models, scales.acoustic, ScoreRule::BestPath);
    Score(add_costs(ac, lm_total(words, models.lm(), scales.lm)))
}

pub fn sequence_score(words: &[WordId], am: &AcousticScores, models: &Models, scales: ScaleConfig, rule: ScoreRule) -> Score {
    match rule {
        ScoreRule::FullSum => forward_full_sum(words, am, models, scales),
        ScoreRule::BestPath => best_path_score(words, am, models, scales),
    }
}

/// Scores of every individual alignment path of `words` (LM included), by
/// explicit enumeration of variant choices and state durations. `None` once
/// more than `limit` paths exist.
pub fn enumerate_alignment_scores(
    words: &[WordId],
    am: &AcousticScores,
    models: &Models,
    scales: ScaleConfig,
    limit: usize,
) -> Option<Vec<f64>> {
    let topo = models.topology();
    let alpha = scales.acoustic;
    let lm = lm_total(words, models.lm(), scales.lm);
    let num_frames = am.num_frames();
    let mut out = Vec::new();

    // every combination of variants
    let mut choice = vec![0usize; words.len()];
    loop {
        let mut states = Vec::new();
        let mut word_last = Vec::new();
        let mut pron = 0.0;
        for (pos, &w) in words.iter().enumerate() {
            let chain = &models.chains(w)[choice[pos]];
            pron += -chain.weight.ln();
            states.extend_from_slice(&chain.states);
            word_last.push(states.len() - 1);
        }
        let is_word_last = |i: usize| word_last.contains(&i);
        let same_word = |a: usize, b: usize| word_last.iter().position(|&e| a <= e) == word_last.iter().position(|&e| b <= e);

        let can_skip = |i: usize| {
            i + 2 < states.len()
                && !is_word_last(i)
                && !is_word_last(i + 1)
                && same_word(i, i + 2)
                && topo.transitions(states[i]).skip_prob > 0.0
        };
        // fewest frames still needed from each chain position
        let mut min_steps = vec![0usize; states.len()];
        for i in (0..states.len().saturating_sub(1)).rev() {
            min_steps[i] = 1 + min_steps[i + 1];
            if can_skip(i) {
                min_steps[i] = min_steps[i].min(1 + min_steps[i + 2]);
            }
        }

        // (frame, chain position, accumulated score)
        let mut stack = vec![(0usize, 0usize, alpha * pron + am.emission_score(0, states[0], alpha).value())];
        while let Some((t, i, acc)) = stack.pop() {
            if acc == f64::INFINITY || min_steps[i] > num_frames - 1 - t {
                continue;
            }
            if t + 1 == num_frames {
                if i + 1 == states.len() {
                    out.push(acc + lm);
                    if out.len() > limit {
                        return None;
                    }
                }
                continue;
            }
            let tr = topo.transitions(states[i]);
            let mut moves = vec![(i, tr.loop_prob)];
            if i + 1 < states.len() {
                moves.push((i + 1, tr.forward_prob));
            }
            if can_skip(i) {
                moves.push((i + 2, tr.skip_prob));
            }
            for (j, p) in moves {
                if p <= 0.0 {
                    continue;
                }
                let e = am.emission_score(t + 1, states[j], alpha).value();
                stack.push((t + 1, j, acc + alpha * -p.ln() + e));
            }
        }

        // next variant combination
        let mut pos = 0;
        loop {
            if pos == words.len() {
                return Some(out);
            }
            choice[pos] += 1;
            if choice[pos] < models.chains(words[pos]).len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleEntry {
    pub words: Vec<WordId>,
    pub full_sum: Score,
    pub best_path: Score,
}

/// Both scores for every enumerated sequence, in enumeration order.
pub fn score_all(am: &AcousticScores, models: &Models, scales: ScaleConfig, max_len: usize) -> Result<Vec<OracleEntry>> {
    models.check_acoustics(am)?;
    let seqs = enumerate_sequences(models.lexicon().len(), max_len)?;
    Ok(seqs
        .into_par_iter()
        .map(|words| OracleEntry {
            full_sum: forward_full_sum(&words, am, models, scales),
            best_path: best_path_score(&words, am, models, scales),
            words,
        })
        .collect())
}

/// MAP decision over all sequences up to `max_len` words; the earliest
/// sequence in enumeration order wins ties.
pub fn oracle_map(
    am: &AcousticScores,
    models: &Models,
    scales: ScaleConfig,
    rule: ScoreRule,
    max_len: usize,
) -> Result<(Vec<WordId>, Score)> {
    models.check_acoustics(am)?;
    let seqs = enumerate_sequences(models.lexicon().len(), max_len)?;
    let scored: Vec<(Vec<WordId>, Score)> = seqs
        .into_par_iter()
        .map(|w| {
            let s = sequence_score(&w, am, models, scales, rule);
            (w, s)
        })
        .collect();
    let mut best: Option<(Vec<WordId>, Score)> = None;
    for (w, s) in scored {
        if best.as_ref().is_none_or(|(_, b)| s.value() < b.value()) {
            best = Some((w, s));
        }
    }
    match best {
        Some((w, s)) if s.is_finite() => Ok((w, s)),
        _ => Err(Error::NoCompleteHypothesis { frames: am.num_frames() }),
    }
}
