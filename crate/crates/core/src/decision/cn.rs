//! Confusion networks by pivot-arc clustering.
//!
//! The MAP path supplies the pivot slots. Every other path is aligned to them
//! monotonically with a small DP: an arc may join a pivot slot it overlaps in
//! time (cost `1 - overlap/union`, plus 1 if the words differ), a slot may be
//! left empty (epsilon, free), or an arc may open an inserted slot between
//! pivot slots (cost 2, more than any overlapping assignment). Inserted arcs in
//! the same gap share slots by their order within the gap.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::decision::posterior::PosteriorLattice;
use crate::decision::EPSILON;
use crate::error::{Error, Result};
use crate::search::LatticeArc;

const INSERT_COST: f64 = 2.0;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Slot {
    /// Word probabilities; epsilon is stored under [`EPSILON`].
    pub probs: BTreeMap<String, f64>,
    /// Lattice arcs clustered into this slot.
    pub arcs: Vec<usize>,
}

impl Slot {
    pub fn prob(&self, word: &str) -> f64 {
        self.probs.get(word).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Entries ordered by descending probability, ties by word with epsilon last.
    pub fn ranked(&self) -> Vec<(&str, f64)> {
        let mut out: Vec<(&str, f64)> = self.probs.iter().map(|(w, &p)| (w.as_str(), p)).collect();
        out.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| (a.0 == EPSILON).cmp(&(b.0 == EPSILON)))
                .then_with(|| a.0.cmp(b.0))
        });
        out
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfusionNetwork {
    pub slots: Vec<Slot>,
    /// Per lattice path (in [`PosteriorLattice::paths`] order), the slot of
    /// each word; strictly increasing. Empty for networks read from files.
    pub alignments: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Placement {
    Pivot(usize),
    /// Inserted before pivot slot `gap` (or at the end when `gap == K`).
    Gap(usize),
}

fn overlap_ratio(a: &LatticeArc, b: &LatticeArc) -> f64 {
    let inter = a.end_frame.min(b.end_frame) as f64 - a.start_frame.max(b.start_frame) as f64;
    let union = a.end_frame.max(b.end_frame) as f64 - a.start_frame.min(b.start_frame) as f64;
    if inter <= 0.0 || union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// `1 - overlap/union`, +1 when words differ; `None` without time overlap.
pub fn arc_distance(arc: &LatticeArc, pivot: &LatticeArc) -> Option<f64> {
    let ov = overlap_ratio(arc, pivot);
    (ov > 0.0).then(|| 1.0 - ov + if arc.word == pivot.word { 0.0 } else { 1.0 })
}

fn align(arcs: &[&LatticeArc], pivots: &[&LatticeArc]) -> Vec<Placement> {
    let (m, k) = (arcs.len(), pivots.len());
    let mut cost = vec![vec![f64::INFINITY; k + 1]; m + 1];
    // 0 = assign, 1 = skip slot, 2 = insert arc
    let mut back = vec![vec![0u8; k + 1]; m + 1];
    cost[0][0] = 0.0;
    for i in 0..=m {
        for j in 0..=k {
            if i == 0 && j == 0 {
                continue;
            }
            let mut best = (f64::INFINITY, 0u8);
            if i > 0 && j > 0 {
                if let Some(d) = arc_distance(arcs[i - 1], pivots[j - 1]) {
                    best = (cost[i - 1][j - 1] + d, 0);
                }
            }
            if j > 0 && cost[i][j - 1] < best.0 {
                best = (cost[i][j - 1], 1);
            }
            if i > 0 && cost[i - 1][j] + INSERT_COST < best.0 {
                best = (cost[i - 1][j] + INSERT_COST, 2);
            }
            cost[i][j] = best.0;
            back[i][j] = best.1;
        }
    }
    let mut out = vec![Placement::Gap(0); m];
    let (mut i, mut j) = (m, k);
    while i > 0 || j > 0 {
        match back[i][j] {
            0 => {
                out[i - 1] = Placement::Pivot(j - 1);
                i -= 1;
                j -= 1;
            }
            1 => j -= 1,
            _ => {
                out[i - 1] = Placement::Gap(j);
                i -= 1;
            }
        }
    }
    out
}

/// Clusters lattice arcs into slots around the MAP path.
pub fn build_cn(pl: &PosteriorLattice) -> ConfusionNetwork {
    let lattice = pl.lattice();
    let paths = pl.paths();
    let pivot_path = &paths[pl.map_index()];
    let pivots: Vec<&LatticeArc> = pivot_path.arcs.iter().map(|&a| lattice.arc(a)).collect();
    let k = pivots.len();

    let placements: Vec<Vec<Placement>> = paths
        .iter()
        .map(|p| {
            let arcs: Vec<&LatticeArc> = p.arcs.iter().map(|&a| lattice.arc(a)).collect();
            align(&arcs, &pivots)
        })
        .collect();

    // inserted slots needed per gap
    let mut gap_width = vec![0usize; k + 1];
    for pl in &placements {
        let mut counts = vec![0usize; k + 1];
        for p in pl {
            if let Placement::Gap(g) = *p {
                counts[g] += 1;
            }
        }
        for (w, c) in gap_width.iter_mut().zip(counts) {
            *w = (*w).max(c);
        }
    }
    // slot index layout: gap 0, pivot 0, gap 1, pivot 1, ..., gap k
    let mut gap_base = vec![0usize; k + 1];
    let mut pivot_index = vec![0usize; k];
    let mut next = 0;
    for g in 0..=k {
        gap_base[g] = next;
        next += gap_width[g];
        if g < k {
            pivot_index[g] = next;
            next += 1;
        }
    }
    let mut slots = vec![Slot::default(); next];
    let mut alignments = Vec::with_capacity(paths.len());

    for ((path, pl_row), &post) in paths.iter().zip(&placements).zip(pl.posteriors()) {
        let mut used = vec![false; slots.len()];
        let mut in_gap = vec![0usize; k + 1];
        let mut row = Vec::with_capacity(path.arcs.len());
        for (&arc_id, placement) in path.arcs.iter().zip(pl_row) {
            let s = match *placement {
                Placement::Pivot(j) => pivot_index[j],
                Placement::Gap(g) => {
                    in_gap[g] += 1;
                    gap_base[g] + in_gap[g] - 1
                }
            };
            used[s] = true;
            row.push(s);
            let slot = &mut slots[s];
            *slot.probs.entry(lattice.arc(arc_id).word.clone()).or_insert(0.0) += post;
            if !slot.arcs.contains(&arc_id) {
                slot.arcs.push(arc_id);
            }
        }
        for (s, u) in used.into_iter().enumerate() {
            if !u {
                *slots[s].probs.entry(EPSILON.to_string()).or_insert(0.0) += post;
            }
        }
        alignments.push(row);
    }
    for slot in &mut slots {
        slot.arcs.sort_unstable();
    }
    ConfusionNetwork { slots, alignments }
}

/// Slot-wise argmax with epsilon winners dropped. Ties go to the
/// lexicographically smallest word; epsilon loses ties.
pub fn cn_decide(cn: &ConfusionNetwork) -> Vec<String> {
    cn.slots
        .iter()
        .filter_map(|slot| slot.ranked().first().map(|(w, _)| w.to_string()))
        .filter(|w| w != EPSILON)
        .collect()
}

/// Expected Hamming cost `Σ_slots (1 - p(choice))` of a slot-wise hypothesis.
pub fn expected_hamming_cost(cn: &ConfusionNetwork, choice: &[&str]) -> f64 {
    cn.slots
        .iter()
        .zip(choice)
        .map(|(slot, w)| 1.0 - slot.prob(w))
        .sum()
}

impl ConfusionNetwork {
    /// One slot per line, `word:prob` pairs, epsilon as `<eps>`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for slot in &self.slots {
            let entries: Vec<String> = slot.ranked().iter().map(|(w, p)| format!("{w}:{p}")).collect();
            let _ = writeln!(out, "{}", entries.join(" "));
        }
        out
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut slots = Vec::new();
        for (lno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut slot = Slot::default();
            for entry in line.split_whitespace() {
                let (word, prob) = entry
                    .rsplit_once(':')
                    .ok_or_else(|| Error::parse(origin, lno + 1, format!("expected word:prob, got `{entry}`")))?;
                let prob: f64 = prob
                    .parse()
                    .map_err(|e| Error::parse(origin, lno + 1, format!("bad probability in `{entry}`: {e}")))?;
                if slot.probs.insert(word.to_string(), prob).is_some() {
                    return Err(Error::parse(origin, lno + 1, format!("word `{word}` repeated")));
                }
            }
            slots.push(slot);
        }
        Ok(Self {
            slots,
            alignments: Vec::new(),
        })
    }
}
