//! Path combination strategies: how scores of paths meeting in one search
//! state are merged.

use std::sync::OnceLock;

use crate::registry::Registry;
use crate::score::log_add;

pub trait PathCombiner: Send + Sync {
    fn name(&self) -> &'static str;

    /// Merges two path scores (negative log domain).
    fn combine(&self, a: f64, b: f64) -> f64;
}

/// Keeps the single best path.
#[derive(Clone, Copy, Debug, Default)]
pub struct Viterbi;

impl PathCombiner for Viterbi {
    fn name(&self) -> &'static str {
        "viterbi"
    }

    #[inline]
    fn combine(&self, a: f64, b: f64) -> f64 {
        a.min(b)
    }
}

/// Sums the probability of all paths.
#[derive(Clone, Copy, Debug, Default)]
pub struct FullSum;

impl PathCombiner for FullSum {
    fn name(&self) -> &'static str {
        "fullsum"
    }

    #[inline]
    fn combine(&self, a: f64, b: f64) -> f64 {
        log_add(a, b)
    }
}

pub fn combiners() -> &'static Registry<dyn PathCombiner> {
    static REGISTRY: OnceLock<Registry<dyn PathCombiner>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut reg: Registry<dyn PathCombiner> = Registry::new("search mode");
        reg.register("viterbi", || Box::new(Viterbi))
            .register("fullsum", || Box::new(FullSum));
        reg
    })
}
