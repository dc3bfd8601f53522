//! Tree-shaped word lattice.
//!
//! Node boundary scores are merged (per mode) scores of all partial paths at
//! that boundary; an arc carries the difference between its right and left
//! boundary, so arc scores accumulated from the root reproduce each complete
//! sequence's final score.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::SENTENCE_END;

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeNode {
    pub frame: usize,
    pub boundary_score: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeArc {
    pub parent: usize,
    pub child: usize,
    pub word: String,
    pub start_frame: usize,
    pub end_frame: usize,
    pub score: f64,
}

impl LatticeArc {
    pub fn is_sentence_end(&self) -> bool {
        self.word == SENTENCE_END
    }
}

/// One complete root-to-sentence-end path.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticePath {
    pub words: Vec<String>,
    /// Word arcs in order, sentence-end arc excluded.
    pub arcs: Vec<usize>,
    pub end_node: usize,
    /// Sum of arc scores along the path.
    pub score: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Lattice {
    nodes: Vec<LatticeNode>,
    arcs: Vec<LatticeArc>,
    /// Incoming arc per node; the root has none.
    incoming: Vec<Option<usize>>,
}

pub const LATTICE_ROOT: usize = 0;

impl Lattice {
    /// A lattice holding only the root node at frame 0 with score 0.
    pub fn new() -> Self {
        Self {
            nodes: vec![LatticeNode {
                frame: 0,
                boundary_score: 0.0,
            }],
            arcs: Vec::new(),
            incoming: vec![None],
        }
    }

    /// Adds a node under `parent`; the arc score is the boundary difference.
    pub fn add_child(
        &mut self,
        parent: usize,
        word: impl Into<String>,
        start_frame: usize,
        end_frame: usize,
        boundary_score: f64,
    ) -> usize {
        let child = self.nodes.len();
        let score = boundary_score - self.nodes[parent].boundary_score;
        self.nodes.push(LatticeNode {
            frame: end_frame,
            boundary_score,
        });
        self.incoming.push(Some(self.arcs.len()));
        self.arcs.push(LatticeArc {
            parent,
            child,
            word: word.into(),
            start_frame,
            end_frame,
            score,
        });
        child
    }

    pub fn nodes(&self) -> &[LatticeNode] {
        &self.nodes
    }

    pub fn arcs(&self) -> &[LatticeArc] {
        &self.arcs
    }

    pub fn arc(&self, id: usize) -> &LatticeArc {
        &self.arcs[id]
    }

    /// Nodes entered by a sentence-end arc.
    pub fn sentence_ends(&self) -> Vec<usize> {
        self.arcs
            .iter()
            .filter(|a| a.is_sentence_end())
            .map(|a| a.child)
            .collect()
    }

    pub fn paths(&self) -> Vec<LatticePath> {
        self.sentence_ends()
            .into_iter()
            .map(|end| {
                let mut arcs = Vec::new();
                let mut at = end;
                while let Some(a) = self.incoming[at] {
                    arcs.push(a);
                    at = self.arcs[a].parent;
                }
                arcs.reverse();
                let score = arcs.iter().map(|&a| self.arcs[a].score).sum();
                arcs.pop();
                let words = arcs.iter().map(|&a| self.arcs[a].word.clone()).collect();
                LatticePath {
                    words,
                    arcs,
                    end_node: end,
                    score,
                }
            })
            .collect()
    }

    /// Structural checks: single parent per node, non-decreasing times, arc
    /// scores equal boundary differences.
    pub fn validate(&self) -> Result<()> {
        for (i, a) in self.arcs.iter().enumerate() {
            if a.parent >= self.nodes.len() || a.child >= self.nodes.len() {
                return Err(Error::Data(format!("arc {i} references a missing node")));
            }
            if self.incoming[a.child] != Some(i) {
                return Err(Error::Data(format!("node {} has more than one incoming arc", a.child)));
            }
            if a.start_frame > a.end_frame || self.nodes[a.parent].frame > a.start_frame {
                return Err(Error::Data(format!("arc {i} has decreasing boundary times")));
            }
            if self.nodes[a.child].frame != a.end_frame {
                return Err(Error::Data(format!("arc {i} end does not match node {}", a.child)));
            }
        }
        if self.incoming.iter().skip(1).any(Option::is_none) {
            return Err(Error::Data("lattice has unreachable nodes".into()));
        }
        Ok(())
    }

    /// Text form: node lines `node id frame boundary_score`, then one arc per
    /// line `parent child word start end arc_score`, 9 fractional digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (id, n) in self.nodes.iter().enumerate() {
            let _ = writeln!(out, "node {id} {} {:.9}", n.frame, n.boundary_score);
        }
        for a in &self.arcs {
            let _ = writeln!(
                out,
                "{} {} {} {} {} {:.9}",
                a.parent, a.child, a.word, a.start_frame, a.end_frame, a.score
            );
        }
        out
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut nodes: Vec<Option<LatticeNode>> = Vec::new();
        let mut arcs = Vec::new();
        for (lno, line) in text.lines().enumerate() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            let err = |msg: String| Error::parse(origin, lno + 1, msg);
            let int = |s: &str| s.parse::<usize>().map_err(|e| err(format!("bad integer `{s}`: {e}")));
            let real = |s: &str| s.parse::<f64>().map_err(|e| err(format!("bad score `{s}`: {e}")));
            if fields[0] == "node" {
                let [_, id, frame, score] = fields[..] else {
                    return Err(err("expected `node id frame boundary_score`".into()));
                };
                let id = int(id)?;
                if nodes.len() <= id {
                    nodes.resize(id + 1, None);
                }
                if nodes[id].is_some() {
                    return Err(err(format!("node {id} defined twice")));
                }
                nodes[id] = Some(LatticeNode {
                    frame: int(frame)?,
                    boundary_score: real(score)?,
                });
            } else {
                let [parent, child, word, start, end, score] = fields[..] else {
                    return Err(err("expected `parent child word start end score`".into()));
                };
                arcs.push(LatticeArc {
                    parent: int(parent)?,
                    child: int(child)?,
                    word: word.to_string(),
                    start_frame: int(start)?,
                    end_frame: int(end)?,
                    score: real(score)?,
                });
            }
        }
        let nodes: Vec<LatticeNode> = nodes
            .into_iter()
            .enumerate()
            .map(|(i, n)| n.ok_or_else(|| Error::parse(origin, 0, format!("node {i} missing"))))
            .collect::<Result<_>>()?;
        if nodes.is_empty() {
            return Err(Error::parse(origin, 0, "lattice has no nodes"));
        }
        let mut incoming = vec![None; nodes.len()];
        for (i, a) in arcs.iter().enumerate() {
            if a.child >= nodes.len() || a.parent >= nodes.len() {
                return Err(Error::parse(origin, 0, format!("arc {i} references a missing node")));
            }
            if a.child == LATTICE_ROOT || incoming[a.child].replace(i).is_some() {
                return Err(Error::parse(origin, 0, format!("node {} is not a tree node", a.child)));
            }
        }
        let lattice = Self { nodes, arcs, incoming };
        lattice.validate().map_err(|e| Error::parse(origin, 0, e.to_string()))?;
        Ok(lattice)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::parse(&text, path)
    }
}
