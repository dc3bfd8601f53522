use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fullsum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fullsum")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = fullsum(args);
    assert!(
        out.status.success(),
        "{args:?} exited {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    fullsum(args).status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes a small synthetic corpus and returns its directory.
fn synth(root: &Path) -> PathBuf {
    let spec = root.join("spec.toml");
    fs::write(&spec, "seed = 3\nvocab_size = 5\nutterances = 6\nlength_min = 1\nlength_max = 3\n").unwrap();
    let dir = root.join("corpus");
    let stdout = ok(&["synth", "--spec", s(&spec), "--sharpness", "0.7", "--out-dir", s(&dir)]);
    assert!(stdout.contains("wrote 6 utterances"), "{stdout}");
    dir
}

fn first_am(corpus: &Path) -> PathBuf {
    let mut ams: Vec<_> = fs::read_dir(corpus.join("am")).unwrap().map(|e| e.unwrap().path()).collect();
    ams.sort();
    ams.remove(0)
}

#[test]
fn synth_decode_cn_oracle_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = synth(tmp.path());
    for f in ["lexicon.txt", "topology.txt", "lm_corpus.txt", "refs.txt"] {
        assert!(corpus.join(f).exists(), "{f}");
    }
    let am = first_am(&corpus);
    let out = tmp.path().join("decode");
    let stdout = ok(&[
        "decode", "--corpus-dir", s(&corpus), "--am", s(&am), "--mode", "fullsum",
        "--beam", "12", "--out-dir", s(&out),
    ]);
    let best = stdout.lines().find_map(|l| l.strip_prefix("best: ")).unwrap().to_string();
    assert!(stdout.contains("\nscore: ") && stdout.contains("\npath: "), "{stdout}");
    assert_eq!(stdout.lines().find_map(|l| l.strip_prefix("map: ")).unwrap(), best);

    let lattice = out.join("lattice.txt");
    assert!(lattice.exists());
    let cn_out = tmp.path().join("cn");
    let stdout = ok(&["cn", "--lattice", s(&lattice), "--out-dir", s(&cn_out)]);
    assert!(stdout.starts_with("cn: "), "{stdout}");
    assert!(!fs::read_to_string(cn_out.join("cn.txt")).unwrap().is_empty());
    let stdout = ok(&["cn", "--lattice", s(&lattice), "--decision", "map"]);
    assert_eq!(stdout.lines().last().unwrap(), format!("map: {best}"));

    let stdout = ok(&["oracle", "--corpus-dir", s(&corpus), "--am", s(&am), "--max-words", "3"]);
    assert!(stdout.starts_with("words\tfullsum\tviterbi\n"));
    assert_eq!(stdout.lines().filter(|l| l.contains('\t')).count(), 1 + 5 + 25 + 125);
    assert!(stdout.contains("map(fullsum): ") && stdout.contains("map(viterbi): "));
}

#[test]
fn decode_is_deterministic_across_modes_and_rules() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = synth(tmp.path());
    let am = first_am(&corpus);
    for mode in ["fullsum", "viterbi"] {
        let args = ["decode", "--corpus-dir", s(&corpus), "--am", s(&am), "--mode", mode, "--decision", "cn"];
        let a = ok(&args);
        assert_eq!(a, ok(&args));
        assert!(a.lines().last().unwrap().starts_with("cn: "));
    }
}

#[test]
fn experiment_writes_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("exp.toml");
    fs::write(
        &cfg,
        "modes = [\"viterbi\", \"fullsum\"]\nsweep = [4.0, 8.0]\n[beam]\nthreshold = 10.0\n\
         [corpus]\nvocab_size = 5\nutterances = 8\nlength_max = 3\n",
    )
    .unwrap();
    let out = tmp.path().join("out");
    let stdout = ok(&["experiment", s(&cfg), "--out-dir", s(&out), "--workers", "2", "--seed", "5"]);
    assert!(stdout.contains("fullsum") && stdout.contains("viterbi"), "{stdout}");
    for f in ["results.csv", "summary.txt", "timing.csv", "sharpness.csv", "sweep.csv", "hyps/fullsum_map.txt"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let results = fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(results.lines().count(), 5);
}

#[test]
fn tune_and_sweep_write_csvs() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = synth(tmp.path());
    let out = tmp.path().join("tune");
    let stdout = ok(&[
        "tune", "--corpus-dir", s(&corpus), "--mode", "fullsum", "--betas", "0.5,1,2", "--gammas", "0.8,1",
        "--beam", "10", "--grid", "--workers", "2", "--out-dir", s(&out),
    ]);
    assert!(stdout.starts_with("chosen: alpha="), "{stdout}");
    assert!(stdout.contains("grid optimum: "));
    let tune = fs::read_to_string(out.join("tune.csv")).unwrap();
    assert!(tune.starts_with("alpha,beta,wer\n"));
    assert_eq!(fs::read_to_string(out.join("grid.csv")).unwrap().lines().count(), 1 + 6);

    let out = tmp.path().join("sweep");
    ok(&[
        "sweep", "--corpus-dir", s(&corpus), "--thresholds", "2,6", "--mode", "viterbi", "--out-dir", s(&out),
    ]);
    let sweep = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 3);
    assert!(sweep.lines().skip(1).all(|l| l.contains(",viterbi,")));
}

#[test]
fn usage_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = synth(tmp.path());
    let am = first_am(&corpus);
    assert_eq!(code(&[]), 1);
    assert_eq!(code(&["decode", "--bogus"]), 1);
    assert_eq!(code(&["decode", "--corpus-dir", s(&corpus), "--am", s(&am), "--mode", "sum"]), 1);
    assert_eq!(code(&["decode", "--corpus-dir", s(&corpus), "--am", s(&am), "--decision", "mbr"]), 1);
    assert_eq!(code(&["decode", "--corpus-dir", s(&corpus), "--am", s(&am), "--alpha", "-2"]), 1);
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "modes = [\"fullsum\"]\nbeem = 2\n[corpus]\nutterances = 2\n").unwrap();
    assert_eq!(code(&["experiment", s(&cfg)]), 1);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn data_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = synth(tmp.path());
    let missing = tmp.path().join("nope.txt");
    assert_eq!(code(&["decode", "--corpus-dir", s(&corpus), "--am", s(&missing)]), 2);
    assert_eq!(code(&["cn", "--lattice", s(&missing)]), 2);
    let garbled = tmp.path().join("garbled.txt");
    fs::write(&garbled, "2 x\n").unwrap();
    assert_eq!(code(&["decode", "--corpus-dir", s(&corpus), "--am", s(&garbled)]), 2);
}

#[test]
fn impossible_utterance_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = synth(tmp.path());
    let header = fs::read_to_string(first_am(&corpus)).unwrap();
    let states: usize = header.split_whitespace().nth(1).unwrap().parse().unwrap();
    let row = vec![format!("{}", 1.0 / states as f64); states].join(" ");
    let am = tmp.path().join("short.txt");
    fs::write(&am, format!("1 {states}\n{row}\n{row}\n")).unwrap();
    let out = fullsum(&["decode", "--corpus-dir", s(&corpus), "--am", s(&am)]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}
