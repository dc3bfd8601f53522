use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-9;

/// Index of an acoustic state column (`phoneme * states_per_phoneme + position`).
pub type StateId = usize;

/// Outgoing transition probabilities of one HMM state.
///
/// `forward` leaves the state for the next state of the chain (or the next word
/// for the last state of a word). `skip` jumps two states ahead and is only
/// allowed when that target lies in the same phoneme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transitions {
    pub loop_prob: f64,
    pub forward_prob: f64,
    pub skip_prob: f64,
}

impl Transitions {
    pub fn linear(loop_prob: f64) -> Self {
        Self {
            loop_prob,
            forward_prob: 1.0 - loop_prob,
            skip_prob: 0.0,
        }
    }
}

/// Linear left-to-right HMM per phoneme, all phonemes with the same length.
#[derive(Clone, Debug, PartialEq)]
pub struct HmmTopology {
    states_per_phoneme: usize,
    phonemes: Vec<String>,
    index: HashMap<String, usize>,
    transitions: Vec<Transitions>,
}

impl HmmTopology {
    /// `transitions[p][j]` holds state `j` of phoneme `phonemes[p]`.
    pub fn new(phonemes: Vec<String>, transitions: Vec<Vec<Transitions>>) -> Result<Self> {
        if phonemes.is_empty() || phonemes.len() != transitions.len() {
            return Err(Error::Data("topology needs one transition list per phoneme".into()));
        }
        let states_per_phoneme = transitions[0].len();
        if states_per_phoneme == 0 {
            return Err(Error::Data("phoneme chains need at least one state".into()));
        }
        let mut index = HashMap::with_capacity(phonemes.len());
        for (p, name) in phonemes.iter().enumerate() {
            if index.insert(name.clone(), p).is_some() {
                return Err(Error::Data(format!("phoneme `{name}` defined twice")));
            }
            let chain = &transitions[p];
            if chain.len() != states_per_phoneme {
                return Err(Error::Data(format!(
                    "phoneme `{name}` has {} states, expected {states_per_phoneme}",
                    chain.len()
                )));
            }
            for (j, tr) in chain.iter().enumerate() {
                let probs = [tr.loop_prob, tr.forward_prob, tr.skip_prob];
                if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
                    return Err(Error::Data(format!("phoneme `{name}` state {j}: negative probability")));
                }
                if tr.forward_prob <= 0.0 {
                    return Err(Error::Data(format!("phoneme `{name}` state {j}: forward probability must be positive")));
                }
                let sum: f64 = probs.iter().sum();
                if (sum - 1.0).abs() > NORM_TOL {
                    return Err(Error::Data(format!(
                        "phoneme `{name}` state {j}: transitions sum to {sum}"
                    )));
                }
                if tr.skip_prob > 0.0 && j + 2 >= states_per_phoneme {
                    return Err(Error::Data(format!(
                        "phoneme `{name}` state {j}: skip target outside the phoneme"
                    )));
                }
            }
        }
        Ok(Self {
            states_per_phoneme,
            phonemes,
            index,
            transitions: transitions.into_iter().flatten().collect(),
        })
    }

    /// Every phoneme gets `states_per_phoneme` states with the same loop probability.
    pub fn uniform<S: Into<String>>(
        phonemes: impl IntoIterator<Item = S>,
        states_per_phoneme: usize,
        loop_prob: f64,
    ) -> Result<Self> {
        let phonemes: Vec<String> = phonemes.into_iter().map(Into::into).collect();
        let chains = phonemes
            .iter()
            .map(|_| vec![Transitions::linear(loop_prob); states_per_phoneme])
            .collect();
        Self::new(phonemes, chains)
    }

    pub fn states_per_phoneme(&self) -> usize {
        self.states_per_phoneme
    }

    pub fn num_states(&self) -> usize {
        self.transitions.len()
    }

    pub fn phonemes(&self) -> &[String] {
        &self.phonemes
    }

    pub fn phoneme_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn state(&self, phoneme: usize, position: usize) -> StateId {
        phoneme * self.states_per_phoneme + position
    }

    pub fn transitions(&self, state: StateId) -> Transitions {
        self.transitions[state]
    }

    /// Acoustic state chain of a phoneme sequence.
    pub fn chain(&self, phonemes: &[String]) -> Result<Vec<StateId>> {
        let mut out = Vec::with_capacity(phonemes.len() * self.states_per_phoneme);
        for name in phonemes {
            let p = self
                .phoneme_index(name)
                .ok_or_else(|| Error::Data(format!("phoneme `{name}` has no topology entry")))?;
            out.extend((0..self.states_per_phoneme).map(|j| self.state(p, j)));
        }
        Ok(out)
    }

    /// Parses lines `phoneme state loop forward skip`.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut phonemes: Vec<String> = Vec::new();
        let mut chains: Vec<Vec<Transitions>> = Vec::new();
        for (lno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 5 {
                return Err(Error::parse(origin, lno + 1, "expected `phoneme state loop forward skip`"));
            }
            let num = |i: usize| {
                fields[i]
                    .parse::<f64>()
                    .map_err(|e| Error::parse(origin, lno + 1, format!("bad probability `{}`: {e}", fields[i])))
            };
            let position: usize = fields[1]
                .parse()
                .map_err(|e| Error::parse(origin, lno + 1, format!("bad state index: {e}")))?;
            let tr = Transitions {
                loop_prob: num(2)?,
                forward_prob: num(3)?,
                skip_prob: num(4)?,
            };
            let p = match phonemes.iter().position(|n| n == fields[0]) {
                Some(p) => p,
                None => {
                    phonemes.push(fields[0].to_string());
                    chains.push(Vec::new());
                    phonemes.len() - 1
                }
            };
            if position != chains[p].len() {
                return Err(Error::parse(origin, lno + 1, "state indices must be listed in order from 0"));
            }
            chains[p].push(tr);
        }
        Self::new(phonemes, chains)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::parse(&text, path)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (p, name) in self.phonemes.iter().enumerate() {
            for j in 0..self.states_per_phoneme {
                let tr = self.transitions(self.state(p, j));
                let _ = writeln!(
                    out,
                    "{name} {j} {} {} {}",
                    tr.loop_prob, tr.forward_prob, tr.skip_prob
                );
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_topology_layout() {
        let topo = HmmTopology::uniform(["a", "b"], 2, 0.5).unwrap();
        assert_eq!(topo.num_states(), 4);
        assert_eq!(topo.chain(&["b".into(), "a".into()]).unwrap(), vec![2, 3, 0, 1]);
        assert!(topo.chain(&["z".into()]).is_err());
    }

    #[test]
    fn rejects_bad_transitions() {
        let bad = Transitions {
            loop_prob: 0.5,
            forward_prob: 0.4,
            skip_prob: 0.0,
        };
        assert!(HmmTopology::new(vec!["a".into()], vec![vec![bad]]).is_err());
        let skip_out = Transitions {
            loop_prob: 0.4,
            forward_prob: 0.4,
            skip_prob: 0.2,
        };
        assert!(HmmTopology::new(vec!["a".into()], vec![vec![skip_out; 2]]).is_err());
        let ok = vec![skip_out, Transitions::linear(0.5), Transitions::linear(0.5)];
        assert!(HmmTopology::new(vec!["a".into()], vec![ok]).is_ok());
    }

    #[test]
    fn text_round_trip() {
        let topo = HmmTopology::new(
            vec!["x".into(), "y".into()],
            vec![
                vec![Transitions::linear(0.3), Transitions::linear(0.6)],
                vec![Transitions::linear(0.5), Transitions::linear(0.25)],
            ],
        )
        .unwrap();
        let back = HmmTopology::parse(&topo.to_text(), Path::new("topo")).unwrap();
        assert_eq!(topo, back);
    }
}
