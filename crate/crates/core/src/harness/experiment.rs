//! Experiment configuration and the report bundle.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::decision::decision_rules;
use crate::error::{Error, Result};
use crate::eval::{
    corpus_sharpness, decode_corpus, sharpness_csv, tune_scales, CorpusDecode, TuneGrids, TuneResult, Utterance,
    WerReport,
};
use crate::harness::synth::{synth_corpus, Corpus, SyntheticCorpusSpec};
use crate::model::{Models, ScaleConfig};
use crate::search::{combiners, BeamConfig};

/// Fraction of utterances allowed to fail before a run is aborted.
pub const FAILURE_BUDGET: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningConfig {
    /// The first `dev_utterances` utterances form the dev set; the rest are
    /// scored with the tuned scales.
    pub dev_utterances: usize,
    #[serde(default = "default_decision")]
    pub decision: String,
    #[serde(default)]
    pub beta: Option<Vec<f64>>,
    #[serde(default)]
    pub gamma: Option<Vec<f64>>,
}

impl TuningConfig {
    pub fn grids(&self) -> TuneGrids {
        let default = TuneGrids::default();
        TuneGrids {
            beta: self.beta.clone().unwrap_or(default.beta),
            gamma: self.gamma.clone().unwrap_or(default.gamma),
        }
    }
}

fn default_decision() -> String {
    "map".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub out_dir: PathBuf,
    pub modes: Vec<String>,
    pub decisions: Vec<String>,
    pub alpha: f64,
    pub beta: f64,
    pub lm_smoothing: f64,
    pub workers: usize,
    pub frame_shift_ms: f64,
    pub beam: BeamConfig,
    /// Beam thresholds for the WER/RTF sweep; empty disables the sweep.
    pub sweep: Vec<f64>,
    pub sweep_decision: String,
    pub sharpness_k: usize,
    pub corpus: Option<SyntheticCorpusSpec>,
    pub corpus_dir: Option<PathBuf>,
    pub tuning: Option<TuningConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("results"),
            modes: vec!["viterbi".into(), "fullsum".into()],
            decisions: vec!["map".into(), "cn".into()],
            alpha: 1.0,
            beta: 1.0,
            lm_smoothing: 0.5,
            workers: 1,
            frame_shift_ms: 10.0,
            beam: BeamConfig::new(16.0),
            sweep: Vec::new(),
            sweep_decision: "map".into(),
            sharpness_k: 5,
            corpus: None,
            corpus_dir: None,
            tuning: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(format!("experiment config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(dir) = &cfg.corpus_dir {
            cfg.corpus_dir = Some(base.join(dir));
        }
        cfg.out_dir = base.join(&cfg.out_dir);
        Ok(cfg)
    }

    pub fn scales(&self) -> ScaleConfig {
        ScaleConfig {
            acoustic: self.alpha,
            lm: self.beta,
        }
    }

    pub fn frame_shift(&self) -> Duration {
        Duration::from_secs_f64(self.frame_shift_ms / 1000.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes.is_empty() || self.decisions.is_empty() {
            return Err(Error::Config("modes and decisions must be non-empty".into()));
        }
        for m in &self.modes {
            combiners().get(m)?;
        }
        for d in self.decisions.iter().chain([&self.sweep_decision]) {
            decision_rules().get(d)?;
        }
        self.scales().validate()?;
        self.beam.validate()?;
        if !(self.lm_smoothing.is_finite() && self.lm_smoothing > 0.0) {
            return Err(Error::Config("lm_smoothing must be positive".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if !(self.frame_shift_ms.is_finite() && self.frame_shift_ms > 0.0) {
            return Err(Error::Config("frame_shift_ms must be positive".into()));
        }
        if self.sweep.iter().any(|t| t.is_nan() || *t < 0.0) {
            return Err(Error::Config("sweep thresholds must be >= 0".into()));
        }
        if self.sharpness_k == 0 {
            return Err(Error::Config("sharpness_k must be positive".into()));
        }
        match (&self.corpus, &self.corpus_dir) {
            (Some(spec), None) => spec.validate()?,
            (None, Some(_)) => {}
            _ => return Err(Error::Config("exactly one of `corpus` and `corpus_dir` must be given".into())),
        }
        if let Some(t) = &self.tuning {
            decision_rules().get(&t.decision)?;
            t.grids().validate()?;
            if t.dev_utterances == 0 {
                return Err(Error::Config("tuning.dev_utterances must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn load_corpus(&self) -> Result<Corpus> {
        match (&self.corpus, &self.corpus_dir) {
            (Some(spec), _) => synth_corpus(spec),
            (None, Some(dir)) => Corpus::load(dir),
            (None, None) => Err(Error::Config("no corpus configured".into())),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Cell {
    pub mode: String,
    pub decision: String,
    pub scales: ScaleConfig,
    pub report: WerReport,
    pub failures: usize,
    /// One line per utterance: id followed by the decided words.
    pub hypotheses: Vec<(String, Vec<String>)>,
}

#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub threshold: f64,
    pub mode: String,
    pub wer: f64,
    pub rtf: f64,
    pub decode: CorpusDecode,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub cells: Vec<Cell>,
    /// RTF per mode for the main decode.
    pub timing: Vec<(String, f64)>,
    pub sweep: Vec<SweepPoint>,
    pub sharpness: Vec<f64>,
    pub tuning: Vec<(String, TuneResult)>,
}

/// Decodes `utts` at each threshold with every mode, in threshold order.
#[allow(clippy::too_many_arguments)]
pub fn sweep(
    models: &Models,
    utts: &[Utterance],
    modes: &[(String, ScaleConfig)],
    beam: BeamConfig,
    thresholds: &[f64],
    decision: &str,
    workers: usize,
    frame_shift: Duration,
) -> Result<Vec<SweepPoint>> {
    let decisions = [decision.to_string()];
    let mut points = Vec::new();
    for &threshold in thresholds {
        for (mode, scales) in modes {
            let decode = decode_corpus(models, utts, mode, *scales, BeamConfig { threshold, ..beam }, &decisions, workers)?;
            points.push(SweepPoint {
                threshold,
                mode: mode.clone(),
                wer: decode.report(0, utts).wer,
                rtf: decode.rtf(frame_shift),
                decode,
            });
        }
    }
    Ok(points)
}

pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("threshold,mode,wer,rtf\n");
    for p in points {
        let _ = writeln!(out, "{},{},{:.6},{:.6}", p.threshold, p.mode, p.wer, p.rtf);
    }
    out
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let corpus = cfg.load_corpus()?;
    let models = corpus.models(cfg.lm_smoothing)?;
    for u in &corpus.utterances {
        models.check_acoustics(&u.am)?;
    }

    let (dev, test) = match &cfg.tuning {
        Some(t) => {
            if t.dev_utterances >= corpus.utterances.len() {
                return Err(Error::Config(format!(
                    "tuning.dev_utterances ({}) leaves no test utterances out of {}",
                    t.dev_utterances,
                    corpus.utterances.len()
                )));
            }
            corpus.utterances.split_at(t.dev_utterances)
        }
        None => (&corpus.utterances[..0], &corpus.utterances[..]),
    };

    let mut tuning = Vec::new();
    let mut mode_scales = Vec::new();
    for mode in &cfg.modes {
        let scales = match &cfg.tuning {
            Some(t) => {
                let result = tune_scales(&models, dev, mode, &t.decision, cfg.beam, &t.grids())?;
                let chosen = result.chosen;
                tuning.push((mode.clone(), result));
                chosen
            }
            None => cfg.scales(),
        };
        mode_scales.push((mode.clone(), scales));
    }

    let mut cells = Vec::new();
    let mut timing = Vec::new();
    for (mode, scales) in &mode_scales {
        let decode = decode_corpus(&models, test, mode, *scales, cfg.beam, &cfg.decisions, cfg.workers)?;
        decode.check_failures(FAILURE_BUDGET)?;
        timing.push((mode.clone(), decode.rtf(cfg.frame_shift())));
        for (i, decision) in cfg.decisions.iter().enumerate() {
            cells.push(Cell {
                mode: mode.clone(),
                decision: decision.clone(),
                scales: *scales,
                report: decode.report(i, test),
                failures: decode.failures(),
                hypotheses: decode
                    .outcomes
                    .iter()
                    .map(|o| (o.id.clone(), o.hypotheses.get(i).cloned().unwrap_or_default()))
                    .collect(),
            });
        }
    }

    let sweep = sweep(
        &models,
        test,
        &mode_scales,
        cfg.beam,
        &cfg.sweep,
        &cfg.sweep_decision,
        cfg.workers,
        cfg.frame_shift(),
    )?;
    let ams: Vec<_> = test.iter().map(|u| u.am.clone()).collect();
    Ok(Report {
        cells,
        timing,
        sweep,
        sharpness: corpus_sharpness(&ams, cfg.sharpness_k),
        tuning,
    })
}

impl Report {
    pub fn results_csv(&self) -> String {
        let mut out = String::from("mode,decision,alpha,beta,wer,substitutions,deletions,insertions,ref_words,failures\n");
        for c in &self.cells {
            let k = c.report.counts;
            let _ = writeln!(
                out,
                "{},{},{},{},{:.6},{},{},{},{},{}",
                c.mode,
                c.decision,
                c.scales.acoustic,
                c.scales.lm,
                c.report.wer,
                k.substitutions,
                k.deletions,
                k.insertions,
                k.ref_len,
                c.failures
            );
        }
        out
    }

    /// WER table with modes as rows and decision rules as columns.
    pub fn summary(&self) -> String {
        let mut decisions: Vec<&str> = Vec::new();
        let mut modes: Vec<&str> = Vec::new();
        for c in &self.cells {
            if !decisions.contains(&c.decision.as_str()) {
                decisions.push(&c.decision);
            }
            if !modes.contains(&c.mode.as_str()) {
                modes.push(&c.mode);
            }
        }
        let mut out = String::from("WER (%)\n");
        let _ = write!(out, "{:<10}", "mode");
        for d in &decisions {
            let _ = write!(out, "{d:>10}");
        }
        out.push('\n');
        for m in &modes {
            let _ = write!(out, "{m:<10}");
            for d in &decisions {
                match self.cells.iter().find(|c| c.mode == *m && c.decision == *d) {
                    Some(c) => {
                        let _ = write!(out, "{:>10.2}", c.report.wer);
                    }
                    None => out.push_str(&format!("{:>10}", "-")),
                }
            }
            out.push('\n');
        }
        for c in self.cells.iter().filter(|c| c.decision == decisions[0]) {
            let _ = writeln!(
                out,
                "{}: alpha={} beta={} failures={} ref_words={}",
                c.mode, c.scales.acoustic, c.scales.lm, c.failures, c.report.counts.ref_len
            );
        }
        out
    }

    pub fn timing_csv(&self) -> String {
        let mut out = String::from("mode,rtf\n");
        for (mode, rtf) in &self.timing {
            let _ = writeln!(out, "{mode},{rtf:.6}");
        }
        out
    }

    /// Writes the bundle. Timing-dependent values go only to `timing.csv`
    /// and `sweep.csv`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let hyp_dir = dir.join("hyps");
        fs::create_dir_all(&hyp_dir).map_err(|e| Error::io(hyp_dir.display().to_string(), e))?;
        let put = |path: PathBuf, text: String| fs::write(&path, text).map_err(|e| Error::io(path.display().to_string(), e));
        put(dir.join("results.csv"), self.results_csv())?;
        put(dir.join("summary.txt"), self.summary())?;
        put(dir.join("timing.csv"), self.timing_csv())?;
        put(dir.join("sharpness.csv"), sharpness_csv(&self.sharpness))?;
        if !self.sweep.is_empty() {
            put(dir.join("sweep.csv"), sweep_csv(&self.sweep))?;
        }
        for (mode, result) in &self.tuning {
            put(dir.join(format!("tune_{mode}.csv")), result.to_csv())?;
        }
        for c in &self.cells {
            let mut text = String::new();
            for (id, words) in &c.hypotheses {
                let _ = writeln!(text, "{id} {}", words.join(" "));
            }
            put(hyp_dir.join(format!("{}_{}.txt", c.mode, c.decision)), text)?;
        }
        Ok(())
    }
}
