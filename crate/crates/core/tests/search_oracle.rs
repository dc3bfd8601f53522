use fullsum::harness::instance::{random_instance, InstanceParams};
use fullsum::model::ScaleConfig;
use fullsum::oracle::{self, ScoreRule};
use fullsum::search::{decode, BeamConfig};

#[test]
fn unpruned_decode_matches_oracle_scores() {
    let params = InstanceParams::default();
    for seed in 0..40 {
        let inst = random_instance(seed, &params);
        let scales = ScaleConfig::new(1.0, 1.0).unwrap();
        let beam = BeamConfig::unpruned().with_max_words(inst.max_words);
        let entries = oracle::score_all(&inst.am, &inst.models, scales, inst.max_words).unwrap();
        for (mode, rule) in [("fullsum", ScoreRule::FullSum), ("viterbi", ScoreRule::BestPath)] {
            let out = match decode(&inst.am, &inst.models, scales, mode, beam) {
                Ok(out) => out,
                Err(e) => {
                    assert!(entries.iter().all(|e| !e.full_sum.is_finite()), "seed {seed}: {e}");
                    continue;
                }
            };
            let finite: Vec<_> = entries
                .iter()
                .filter(|e| e.full_sum.is_finite())
                .collect();
            assert_eq!(finite.len(), out.hypotheses.len(), "seed {seed} {mode}");
            for e in finite {
                let want = match rule {
                    ScoreRule::FullSum => e.full_sum.value(),
                    ScoreRule::BestPath => e.best_path.value(),
                };
                let got = out.hypothesis(&e.words).expect("sequence decoded").score;
                assert!((got - want).abs() < 1e-8, "seed {seed} {mode} {:?}: {got} vs {want}", e.words);
            }
            let (map, _) = oracle::oracle_map(&inst.am, &inst.models, scales, rule, inst.max_words).unwrap();
            assert_eq!(out.best().words, map, "seed {seed} {mode}");
        }
    }
}
