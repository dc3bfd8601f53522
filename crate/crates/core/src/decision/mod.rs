//! Decision rules over the search lattice: MAP and confusion-network decoding.

mod cn;
mod posterior;

use std::sync::OnceLock;

pub use cn::{arc_distance, build_cn, cn_decide, expected_hamming_cost, ConfusionNetwork, Slot};
pub use posterior::PosteriorLattice;

use crate::error::Result;
use crate::registry::Registry;
use crate::search::Lattice;

/// Empty word in confusion-network slots.
pub const EPSILON: &str = "<eps>";

pub trait DecisionRule: Send + Sync {
    fn name(&self) -> &'static str;

    fn decide(&self, pl: &PosteriorLattice) -> Result<Vec<String>>;
}

/// Maximum posterior sequence (sentence-level 0-1 cost).
#[derive(Clone, Copy, Debug, Default)]
pub struct MapRule;

impl DecisionRule for MapRule {
    fn name(&self) -> &'static str {
        "map"
    }

    fn decide(&self, pl: &PosteriorLattice) -> Result<Vec<String>> {
        Ok(map_decide(pl))
    }
}

/// Slot-wise decisions on a confusion network (Hamming cost).
#[derive(Clone, Copy, Debug, Default)]
pub struct ConfusionNetworkRule;

impl DecisionRule for ConfusionNetworkRule {
    fn name(&self) -> &'static str {
        "cn"
    }

    fn decide(&self, pl: &PosteriorLattice) -> Result<Vec<String>> {
        Ok(cn_decide(&build_cn(pl)))
    }
}

pub fn decision_rules() -> &'static Registry<dyn DecisionRule> {
    static REGISTRY: OnceLock<Registry<dyn DecisionRule>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut reg: Registry<dyn DecisionRule> = Registry::new("decision rule");
        reg.register("map", || Box::new(MapRule))
            .register("cn", || Box::new(ConfusionNetworkRule));
        reg
    })
}

pub fn map_decide(pl: &PosteriorLattice) -> Vec<String> {
    pl.paths()[pl.map_index()].words.clone()
}

/// Applies the named rule to a lattice.
pub fn decide(rule: &str, lattice: Lattice) -> Result<Vec<String>> {
    let pl = PosteriorLattice::new(lattice)?;
    decision_rules().get(rule)?.decide(&pl)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::LATTICE_ROOT;
    use crate::SENTENCE_END;

    fn two_way(p_ab: f64) -> Lattice {
        let mut lat = Lattice::new();
        let a = lat.add_child(LATTICE_ROOT, "a", 0, 3, 1.0);
        let b = lat.add_child(a, "b", 3, 6, 2.0);
        lat.add_child(b, SENTENCE_END, 6, 6, -p_ab.ln());
        let c = lat.add_child(a, "c", 3, 6, 2.0);
        lat.add_child(c, SENTENCE_END, 6, 6, -(1.0 - p_ab).ln());
        lat
    }

    #[test]
    fn map_examples() {
        assert_eq!(decide("map", two_way(0.6)).unwrap(), ["a", "b"]);
        assert_eq!(decide("map", two_way(0.4)).unwrap(), ["a", "c"]);
        // exact tie -> lexicographic
        assert_eq!(decide("map", two_way(0.5)).unwrap(), ["a", "b"]);
        let pl = PosteriorLattice::new(two_way(0.6)).unwrap();
        let total: f64 = pl.posteriors().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((pl.posterior_of(&["a", "b"]).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn empty_lattice_is_an_error() {
        assert!(PosteriorLattice::new(Lattice::new()).is_err());
        assert!(decide("mbr", two_way(0.5)).is_err());
    }

    #[test]
    fn registry_lists_rules() {
        assert_eq!(decision_rules().names().collect::<Vec<_>>(), ["cn", "map"]);
    }
}
