//! Word histories (a prefix tree over word sequences) and word-boundary traces.

use std::collections::HashMap;

use crate::model::WordId;

pub type HistoryId = u32;
pub type TraceId = u32;

pub const EMPTY_HISTORY: HistoryId = 0;
pub const ROOT_TRACE: TraceId = 0;

#[derive(Clone, Debug)]
struct HistoryNode {
    parent: HistoryId,
    word: Option<WordId>,
    len: u32,
}

/// Interned word histories; every distinct word sequence gets its own id, so
/// no two sequences ever share search states.
#[derive(Clone, Debug)]
pub struct HistoryArena {
    nodes: Vec<HistoryNode>,
    index: HashMap<(HistoryId, WordId), HistoryId>,
}

impl Default for HistoryArena {
    fn default() -> Self {
        Self {
            nodes: vec![HistoryNode {
                parent: EMPTY_HISTORY,
                word: None,
                len: 0,
            }],
            index: HashMap::new(),
        }
    }
}

impl HistoryArena {
    pub fn extend(&mut self, parent: HistoryId, word: WordId) -> HistoryId {
        if let Some(&id) = self.index.get(&(parent, word)) {
            return id;
        }
        let id = self.nodes.len() as HistoryId;
        let len = self.nodes[parent as usize].len + 1;
        self.nodes.push(HistoryNode {
            parent,
            word: Some(word),
            len,
        });
        self.index.insert((parent, word), id);
        id
    }

    pub fn len_of(&self, id: HistoryId) -> usize {
        self.nodes[id as usize].len as usize
    }

    pub fn words(&self, mut id: HistoryId) -> Vec<WordId> {
        let mut out = Vec::with_capacity(self.len_of(id));
        while let Some(w) = self.nodes[id as usize].word {
            out.push(w);
            id = self.nodes[id as usize].parent;
        }
        out.reverse();
        out
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() <= 1
    }
}

/// A word boundary on some best path: the word ending at `end_frame`
/// (exclusive) with the merged score of every path of `history` ending there.
#[derive(Clone, Debug, PartialEq)]
pub struct WordTrace {
    pub history: HistoryId,
    /// `None` for the root and for sentence-end traces.
    pub word: Option<WordId>,
    pub start_frame: u32,
    pub end_frame: u32,
    pub score: f64,
    pub best_path_score: f64,
    pub prev: TraceId,
}

#[derive(Clone, Debug)]
pub struct TraceArena {
    traces: Vec<WordTrace>,
}

impl Default for TraceArena {
    fn default() -> Self {
        Self {
            traces: vec![WordTrace {
                history: EMPTY_HISTORY,
                word: None,
                start_frame: 0,
                end_frame: 0,
                score: 0.0,
                best_path_score: 0.0,
                prev: ROOT_TRACE,
            }],
        }
    }
}

impl TraceArena {
    pub fn push(&mut self, trace: WordTrace) -> TraceId {
        self.traces.push(trace);
        (self.traces.len() - 1) as TraceId
    }

    pub fn get(&self, id: TraceId) -> &WordTrace {
        &self.traces[id as usize]
    }

    /// Traces from the first word to `id`, root excluded.
    pub fn chain(&self, mut id: TraceId) -> Vec<TraceId> {
        let mut out = Vec::new();
        while id != ROOT_TRACE {
            out.push(id);
            id = self.traces[id as usize].prev;
        }
        out.reverse();
        out
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.len() <= 1
    }
}
