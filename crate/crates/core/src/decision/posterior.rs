use crate::error::{Error, Result};
use crate::score::log_sum;
use crate::search::{Lattice, LatticePath};

/// A lattice with sequence posteriors `p(w|x) ∝ exp(-final score)`.
#[derive(Clone, Debug)]
pub struct PosteriorLattice {
    lattice: Lattice,
    paths: Vec<LatticePath>,
    posteriors: Vec<f64>,
}

impl PosteriorLattice {
    pub fn new(lattice: Lattice) -> Result<Self> {
        let paths = lattice.paths();
        if paths.is_empty() {
            return Err(Error::Data("lattice contains no complete word sequence".into()));
        }
        let total = log_sum(paths.iter().map(|p| p.score));
        if !total.is_finite() {
            return Err(Error::Data("lattice sequences all have zero probability".into()));
        }
        let posteriors = paths.iter().map(|p| (total - p.score).exp()).collect();
        Ok(Self {
            lattice,
            paths,
            posteriors,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn paths(&self) -> &[LatticePath] {
        &self.paths
    }

    pub fn posteriors(&self) -> &[f64] {
        &self.posteriors
    }

    pub fn posterior_of(&self, words: &[impl AsRef<str>]) -> Option<f64> {
        self.paths
            .iter()
            .position(|p| p.words.iter().map(String::as_str).eq(words.iter().map(AsRef::as_ref)))
            .map(|i| self.posteriors[i])
    }

    /// Index of the maximum-posterior path; ties go to the lexicographically
    /// smallest word sequence.
    pub fn map_index(&self) -> usize {
        let mut best = 0;
        for i in 1..self.paths.len() {
            let (a, b) = (self.paths[i].score, self.paths[best].score);
            if a < b || (a == b && self.paths[i].words < self.paths[best].words) {
                best = i;
            }
        }
        best
    }
}
