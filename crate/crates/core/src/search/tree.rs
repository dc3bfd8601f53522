//! Lexical prefix tree over HMM state chains.

use crate::model::{Models, StateId, WordId};

pub type NodeId = u32;

/// Virtual root; carries no acoustic state.
pub const TREE_ROOT: NodeId = 0;

#[derive(Clone, Debug, PartialEq)]
pub struct WordEnd {
    pub word: WordId,
    pub variant: usize,
    /// `-ln` of the variant weight.
    pub pron_cost: f64,
}

#[derive(Clone, Debug)]
pub struct TreeNode {
    pub state: StateId,
    pub loop_cost: f64,
    pub forward_cost: f64,
    pub skip_cost: f64,
    pub children: Vec<NodeId>,
    pub skip_target: Option<NodeId>,
    /// Variants whose chain ends in this node.
    pub ends: Vec<WordEnd>,
}

/// Pronunciation variants sharing a state-chain prefix share tree nodes.
#[derive(Clone, Debug)]
pub struct LexiconTree {
    nodes: Vec<TreeNode>,
}

fn cost(p: f64) -> f64 {
    if p > 0.0 {
        -p.ln()
    } else {
        f64::INFINITY
    }
}

impl LexiconTree {
    pub fn build(models: &Models) -> Self {
        let topo = models.topology();
        let mut nodes = vec![TreeNode {
            state: usize::MAX,
            loop_cost: f64::INFINITY,
            forward_cost: 0.0,
            skip_cost: f64::INFINITY,
            children: Vec::new(),
            skip_target: None,
            ends: Vec::new(),
        }];
        for word in models.lexicon().ids() {
            for (variant, chain) in models.chains(word).iter().enumerate() {
                let mut at = TREE_ROOT;
                for &state in &chain.states {
                    let existing = nodes[at as usize]
                        .children
                        .iter()
                        .copied()
                        .find(|&c| nodes[c as usize].state == state);
                    at = match existing {
                        Some(c) => c,
                        None => {
                            let tr = topo.transitions(state);
                            let id = nodes.len() as NodeId;
                            nodes.push(TreeNode {
                                state,
                                loop_cost: cost(tr.loop_prob),
                                forward_cost: cost(tr.forward_prob),
                                skip_cost: cost(tr.skip_prob),
                                children: Vec::new(),
                                skip_target: None,
                                ends: Vec::new(),
                            });
                            nodes[at as usize].children.push(id);
                            id
                        }
                    };
                }
                nodes[at as usize].ends.push(WordEnd {
                    word,
                    variant,
                    pron_cost: cost(chain.weight),
                });
            }
        }
        // skips stay inside a phoneme, so the target is the unique
        // grandchild along states s+1, s+2
        for id in 1..nodes.len() {
            if nodes[id].skip_cost.is_finite() {
                let s = nodes[id].state;
                let child = nodes[id].children.iter().copied().find(|&c| nodes[c as usize].state == s + 1);
                nodes[id].skip_target = child.and_then(|c| {
                    nodes[c as usize]
                        .children
                        .iter()
                        .copied()
                        .find(|&g| nodes[g as usize].state == s + 2)
                });
            }
        }
        Self { nodes }
    }

    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id as usize]
    }

    pub fn roots(&self) -> &[NodeId] {
        &self.nodes[TREE_ROOT as usize].children
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() <= 1
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::model::{HmmTopology, Lexicon, UniformLm};

    #[test]
    fn shared_prefixes_share_nodes() {
        let lex = Lexicon::uniform([
            ("a", vec!["p"]),
            ("ab", vec!["p", "q"]),
            ("b", vec!["q"]),
        ])
        .unwrap();
        let topo = HmmTopology::uniform(["p", "q"], 2, 0.5).unwrap();
        let models = Models::new(lex, topo, Arc::new(UniformLm::new(3))).unwrap();
        let tree = LexiconTree::build(&models);
        // root + p0 p1 q0 q1 (under p) + q0 q1 (root)
        assert_eq!(tree.len(), 7);
        assert_eq!(tree.roots().len(), 2);
        let p1 = tree.node(tree.roots()[0]).children[0];
        assert_eq!(tree.node(p1).ends.len(), 1);
        assert_eq!(tree.node(p1).children.len(), 1);
    }
}
