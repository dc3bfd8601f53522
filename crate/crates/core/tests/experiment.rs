use std::fs;

use fullsum::eval::{decode_corpus, levenshtein, Utterance, WerReport};
use fullsum::harness::{run_experiment, synth_corpus, Corpus, ExperimentConfig, SyntheticCorpusSpec, TuningConfig};
use fullsum::model::{AcousticScores, ScaleConfig};
use fullsum::oracle::{self, ScoreRule};
use fullsum::search::BeamConfig;
use fullsum::Error;

fn small_spec() -> SyntheticCorpusSpec {
    SyntheticCorpusSpec {
        seed: 7,
        vocab_size: 4,
        phonemes: 5,
        utterances: 50,
        length_min: 1,
        length_max: 3,
        sharpness: 0.55,
        ..SyntheticCorpusSpec::default()
    }
}

fn small_config(out: &std::path::Path) -> ExperimentConfig {
    ExperimentConfig {
        out_dir: out.to_path_buf(),
        corpus: Some(small_spec()),
        beam: BeamConfig::unpruned().with_max_words(3),
        ..ExperimentConfig::default()
    }
}

fn read(dir: &std::path::Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn map_cells_match_the_oracle() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.cells.len(), 4);

    let corpus = synth_corpus(&small_spec()).unwrap();
    let models = corpus.models(cfg.lm_smoothing).unwrap();
    let scales = cfg.scales();
    for (mode, rule) in [("fullsum", ScoreRule::FullSum), ("viterbi", ScoreRule::BestPath)] {
        let cell = report.cells.iter().find(|c| c.mode == mode && c.decision == "map").unwrap();
        assert_eq!(cell.failures, 0);
        let mut counts = Vec::new();
        for (u, (id, hyp)) in corpus.utterances.iter().zip(&cell.hypotheses) {
            assert_eq!(&u.id, id);
            let (map, _) = oracle::oracle_map(&u.am, &models, scales, rule, 3).unwrap();
            assert_eq!(hyp, &models.lexicon().ids_to_words(&map), "{mode} {id}");
            counts.push(levenshtein(&u.reference, hyp).counts);
        }
        let pooled = WerReport::pooled(&counts);
        assert_eq!(pooled.counts, cell.report.counts);
        assert!((pooled.wer - cell.report.wer).abs() < 1e-12);
    }
}

#[test]
fn reruns_write_identical_results() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut cfg = small_config(a.path());
    cfg.sweep = vec![2.0, 8.0];
    run_experiment(&cfg).unwrap().write(a.path()).unwrap();
    cfg.out_dir = b.path().to_path_buf();
    run_experiment(&cfg).unwrap().write(b.path()).unwrap();
    for name in ["results.csv", "summary.txt", "sharpness.csv", "hyps/fullsum_cn.txt", "hyps/viterbi_map.txt"] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
    let strip_rtf = |s: String| -> Vec<String> {
        s.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect()
    };
    let sweep = read(a.path(), "sweep.csv");
    assert!(sweep.starts_with("threshold,mode,wer,rtf\n"), "{sweep}");
    assert_eq!(strip_rtf(sweep), strip_rtf(read(b.path(), "sweep.csv")));
}

#[test]
fn empty_sweep_writes_no_sweep_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let report = run_experiment(&cfg).unwrap();
    report.write(tmp.path()).unwrap();
    assert!(!tmp.path().join("sweep.csv").exists());
    assert!(tmp.path().join("results.csv").exists());
    assert!(tmp.path().join("timing.csv").exists());
    let results = read(tmp.path(), "results.csv");
    assert_eq!(results.lines().count(), 5);
    assert!(results.starts_with("mode,decision,alpha,beta,wer,"));
}

#[test]
fn config_rejects_unknown_keys_and_bad_values() {
    let parse = |top: &str| ExperimentConfig::from_toml(&format!("{top}\n[corpus]\nutterances = 5\n"));
    let err = parse("modes = [\"fullsum\"]\nbeem = 3").unwrap_err();
    assert!(matches!(err, Error::Config(_)), "{err}");
    assert_eq!(err.exit_code(), 1);
    assert!(parse("").is_ok());
    assert!(ExperimentConfig::from_toml("[corpus]\nvocab = 3\n").is_err());
    assert!(ExperimentConfig::from_toml("").is_err());
    assert!(parse("modes = [\"sum\"]").is_err());
    assert!(parse("decisions = [\"mbr\"]").is_err());
    assert!(parse("alpha = -1.0").is_err());
    let ok = ExperimentConfig::from_toml("modes = [\"viterbi\"]\n[beam]\nthreshold = 8.0\nmax_words = 4\n[corpus]\nseed = 3\n").unwrap();
    assert_eq!(ok.beam.max_words, Some(4));
    assert_eq!(ok.corpus.unwrap().seed, 3);
}

#[test]
fn corpus_round_trips_through_files() {
    let corpus = synth_corpus(&small_spec()).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    corpus.write(tmp.path()).unwrap();
    let loaded = Corpus::load(tmp.path()).unwrap();
    assert_eq!(loaded.lexicon, corpus.lexicon);
    assert_eq!(loaded.lm_sentences, corpus.lm_sentences);
    assert_eq!(loaded.utterances.len(), corpus.utterances.len());
    for (a, b) in loaded.utterances.iter().zip(&corpus.utterances) {
        assert_eq!(a.id, b.id);
        assert_eq!(a.reference, b.reference);
        assert_eq!(a.am.num_frames(), b.am.num_frames());
        for t in 0..a.am.num_frames() {
            for (x, y) in a.am.frame(t).iter().zip(b.am.frame(t)) {
                assert!((x - y).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn synthesis_is_byte_reproducible() {
    let spec = SyntheticCorpusSpec {
        utterances: 10,
        ..SyntheticCorpusSpec::default()
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    synth_corpus(&spec).unwrap().write(a.path()).unwrap();
    synth_corpus(&spec).unwrap().write(b.path()).unwrap();
    for name in ["lexicon.txt", "topology.txt", "lm_corpus.txt", "refs.txt"] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
    for entry in fs::read_dir(a.path().join("am")).unwrap() {
        let name = entry.unwrap().file_name();
        let path = std::path::Path::new("am").join(&name);
        assert_eq!(read(a.path(), path.to_str().unwrap()), read(b.path(), path.to_str().unwrap()));
    }
}

#[test]
fn one_hot_posteriors_make_modes_agree() {
    let spec = SyntheticCorpusSpec {
        sharpness: 1.0,
        noise_floor: 0.0,
        utterances: 20,
        ..small_spec()
    };
    let corpus = synth_corpus(&spec).unwrap();
    let models = corpus.models(0.5).unwrap();
    let beam = BeamConfig::new(16.0);
    let decisions = ["map".to_string()];
    let s = ScaleConfig::default();
    let fs = decode_corpus(&models, &corpus.utterances, "fullsum", s, beam, &decisions, 1).unwrap();
    let vit = decode_corpus(&models, &corpus.utterances, "viterbi", s, beam, &decisions, 1).unwrap();
    for (a, b) in fs.outcomes.iter().zip(&vit.outcomes) {
        assert_eq!(a.hypotheses, b.hypotheses, "{}", a.id);
    }
    assert_eq!(fs.report(0, &corpus.utterances).wer, 0.0);
}

#[test]
fn parallel_decoding_matches_sequential() {
    let corpus = synth_corpus(&small_spec()).unwrap();
    let models = corpus.models(0.5).unwrap();
    let decisions = ["map".to_string(), "cn".to_string()];
    let beam = BeamConfig::new(10.0);
    let s = ScaleConfig::default();
    let one = decode_corpus(&models, &corpus.utterances, "fullsum", s, beam, &decisions, 1).unwrap();
    let four = decode_corpus(&models, &corpus.utterances, "fullsum", s, beam, &decisions, 4).unwrap();
    for (a, b) in one.outcomes.iter().zip(&four.outcomes) {
        assert_eq!(a.id, b.id);
        assert_eq!(a.hypotheses, b.hypotheses);
        assert_eq!(a.best_score, b.best_score);
    }
}

#[test]
fn failure_budget_is_enforced() {
    let corpus = synth_corpus(&small_spec()).unwrap();
    let models = corpus.models(0.5).unwrap();
    let states = corpus.topology.num_states();
    let mut utts = corpus.utterances[..10].to_vec();
    utts.push(Utterance {
        id: "short".into(),
        reference: vec!["w0".into()],
        am: AcousticScores::new(vec![vec![1.0 / states as f64; states]], vec![1.0 / states as f64; states]).unwrap(),
    });
    let decisions = ["map".to_string()];
    let out = decode_corpus(&models, &utts, "fullsum", ScaleConfig::default(), BeamConfig::new(16.0), &decisions, 1).unwrap();
    assert_eq!(out.failures(), 1);
    let err = out.check_failures(0.01).unwrap_err();
    assert!(matches!(err, Error::FailureBudget { failed: 1, total: 11 }), "{err}");
    assert!(out.check_failures(0.1).is_ok());
    // the failed utterance counts as one deletion
    let counts = out.edit_counts(0, &utts);
    assert_eq!(counts[10].deletions, 1);
}

#[test]
fn tuning_is_reproducible_and_holds_out_the_dev_set() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small_config(tmp.path());
    cfg.decisions = vec!["map".into()];
    cfg.beam = BeamConfig::new(10.0).with_max_words(3);
    cfg.tuning = Some(TuningConfig {
        dev_utterances: 10,
        beta: Some(vec![0.5, 1.0, 2.0]),
        gamma: Some(vec![0.8, 1.0]),
        decision: "map".into(),
    });
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    assert_eq!(a.tuning.len(), 2);
    for ((ma, ta), (mb, tb)) in a.tuning.iter().zip(&b.tuning) {
        assert_eq!(ma, mb);
        assert_eq!(ta.to_csv(), tb.to_csv());
        assert_eq!(ta.chosen, tb.chosen);
    }
    let (_, vit) = a.tuning.iter().find(|(m, _)| m == "viterbi").unwrap();
    assert_eq!(vit.gamma, 1.0);
    assert_eq!(vit.chosen.acoustic, 1.0);
    assert!(a.cells.iter().all(|c| c.hypotheses.len() == 40));

    cfg.tuning.as_mut().unwrap().dev_utterances = 50;
    assert!(matches!(run_experiment(&cfg).unwrap_err(), Error::Config(_)));
}
