use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use fullsum::decision::{build_cn, decision_rules, PosteriorLattice};
use fullsum::eval::{grid_2d, grid_csv, dev_objective, grid_optimum, tune_scales, TuneGrids};
use fullsum::harness::{run_experiment, sweep, sweep_csv, synth_corpus, Corpus, ExperimentConfig, SyntheticCorpusSpec};
use fullsum::model::{AcousticScores, FullHistoryLm, HmmTopology, Lexicon, Models, ScaleConfig};
use fullsum::oracle::{oracle_map, score_all, ScoreRule};
use fullsum::search::{BeamConfig, Decoder, Lattice};
use fullsum::{Error, Result};

/// Full-sum and Viterbi word-sequence decoding over synthetic hybrid models.
#[derive(Parser)]
#[command(name = "fullsum", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus.
    Synth(SynthArgs),
    /// Decode one utterance.
    Decode(DecodeArgs),
    /// Run an experiment from a config file.
    Experiment(ExperimentArgs),
    /// Tune acoustic and LM scales on a corpus.
    Tune(TuneArgs),
    /// WER and RTF over a list of beam thresholds.
    Sweep(SweepArgs),
    /// Score every word sequence up to a length by enumeration.
    Oracle(OracleArgs),
    /// Build a confusion network from a lattice file.
    Cn(CnArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Directory holding lexicon.txt, topology.txt and lm_corpus.txt.
    #[arg(long)]
    corpus_dir: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    lm_smoothing: f64,
}

impl ModelArgs {
    fn models(&self) -> Result<Models> {
        let lexicon = Lexicon::load(&self.corpus_dir.join("lexicon.txt"))?;
        let topology = HmmTopology::load(&self.corpus_dir.join("topology.txt"))?;
        let sentences = fullsum::model::read_corpus(&self.corpus_dir.join("lm_corpus.txt"))?;
        let lm = FullHistoryLm::from_sentences(&sentences, &lexicon, self.lm_smoothing)?;
        Models::new(lexicon, topology, Arc::new(lm))
    }

    fn corpus(&self) -> Result<(Corpus, Models)> {
        let corpus = Corpus::load(&self.corpus_dir)?;
        let models = corpus.models(self.lm_smoothing)?;
        Ok((corpus, models))
    }
}

#[derive(Args)]
struct ScaleArgs {
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
}

impl ScaleArgs {
    fn scales(&self) -> Result<ScaleConfig> {
        ScaleConfig::new(self.alpha, self.beta)
    }
}

#[derive(Args)]
struct BeamArgs {
    /// Beam threshold relative to the frame-best score.
    #[arg(long, default_value_t = 16.0)]
    beam: f64,
    #[arg(long)]
    max_hyps: Option<usize>,
    #[arg(long)]
    max_words: Option<usize>,
}

impl BeamArgs {
    fn config(&self) -> Result<BeamConfig> {
        let cfg = BeamConfig {
            threshold: self.beam,
            max_hyps: self.max_hyps,
            max_words: self.max_words,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct SynthArgs {
    /// TOML corpus spec; defaults are used for missing keys.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sharpness: Option<f64>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct DecodeArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Acoustic score file.
    #[arg(long)]
    am: PathBuf,
    #[arg(long, default_value = "fullsum")]
    mode: String,
    #[arg(long, default_value = "map")]
    decision: String,
    #[command(flatten)]
    scales: ScaleArgs,
    #[command(flatten)]
    beam: BeamArgs,
    /// Where to write lattice.txt.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    config: PathBuf,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides the synthetic corpus seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct TuneArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value = "fullsum")]
    mode: String,
    #[arg(long, default_value = "map")]
    decision: String,
    #[command(flatten)]
    beam: BeamArgs,
    /// Use only the first N utterances.
    #[arg(long)]
    dev: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    betas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    gammas: Option<Vec<f64>>,
    /// Also evaluate the full 2-D grid and write grid.csv.
    #[arg(long)]
    grid: bool,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Comma-separated beam thresholds.
    #[arg(long, value_delimiter = ',', required = true)]
    thresholds: Vec<f64>,
    /// Repeatable; both modes when omitted.
    #[arg(long)]
    mode: Vec<String>,
    #[arg(long, default_value = "map")]
    decision: String,
    #[command(flatten)]
    scales: ScaleArgs,
    #[arg(long)]
    max_hyps: Option<usize>,
    #[arg(long, default_value_t = 10.0)]
    frame_shift_ms: f64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    am: PathBuf,
    /// Longest word sequence to enumerate.
    #[arg(long)]
    max_words: usize,
    /// Report the MAP sequence for one mode only.
    #[arg(long)]
    mode: Option<String>,
    #[command(flatten)]
    scales: ScaleArgs,
}

#[derive(Args)]
struct CnArgs {
    #[arg(long)]
    lattice: PathBuf,
    #[arg(long, default_value = "cn")]
    decision: String,
    /// Where to write cn.txt.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::Io {
            context: dir.display().to_string(),
            source: e,
        })?;
    }
    fs::write(path, text).map_err(|e| Error::Io {
        context: path.display().to_string(),
        source: e,
    })
}

fn synth(args: SynthArgs) -> Result<()> {
    let mut spec = match &args.spec {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Io {
                context: path.display().to_string(),
                source: e,
            })?;
            toml::from_str::<SyntheticCorpusSpec>(&text).map_err(|e| Error::Config(format!("corpus spec: {e}")))?
        }
        None => SyntheticCorpusSpec::default(),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(sharpness) = args.sharpness {
        spec.sharpness = sharpness;
    }
    let corpus = synth_corpus(&spec)?;
    corpus.write(&args.out_dir)?;
    println!(
        "wrote {} utterances, {} words to {}",
        corpus.utterances.len(),
        corpus.lexicon.len(),
        args.out_dir.display()
    );
    Ok(())
}

fn decode(args: DecodeArgs) -> Result<()> {
    let models = args.model.models()?;
    let am = AcousticScores::load(&args.am)?;
    let rule = decision_rules().get(&args.decision)?;
    let decoder = Decoder::new(&models, &args.mode, args.scales.scales()?, args.beam.config()?)?;
    let out = decoder.decode(&am)?;
    let best = out.best();
    let lexicon = models.lexicon();
    println!("best: {}", lexicon.ids_to_words(&best.words).join(" "));
    println!("score: {:.9}", best.score);
    let path: Vec<String> = best
        .boundaries
        .iter()
        .map(|b| format!("{}[{}-{}]", lexicon.word(b.word), b.start_frame, b.end_frame))
        .collect();
    println!("path: {}", path.join(" "));
    if let Some(dir) = &args.out_dir {
        write_file(&dir.join("lattice.txt"), &out.lattice.to_text())?;
    }
    let pl = PosteriorLattice::new(out.lattice)?;
    println!("{}: {}", rule.name(), rule.decide(&pl)?.join(" "));
    Ok(())
}

fn experiment(args: ExperimentArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(dir) = args.out_dir {
        cfg.out_dir = dir;
    }
    if let Some(workers) = args.workers {
        cfg.workers = workers;
    }
    if let Some(seed) = args.seed {
        match cfg.corpus.as_mut() {
            Some(spec) => spec.seed = seed,
            None => return Err(Error::Config("--seed needs a synthetic corpus in the config".into())),
        }
    }
    let report = run_experiment(&cfg)?;
    report.write(&cfg.out_dir)?;
    print!("{}", report.summary());
    Ok(())
}

fn tune(args: TuneArgs) -> Result<()> {
    let (corpus, models) = args.model.corpus()?;
    let n = args.dev.unwrap_or(corpus.utterances.len()).min(corpus.utterances.len());
    let dev = &corpus.utterances[..n];
    let default = TuneGrids::default();
    let grids = TuneGrids {
        beta: args.betas.unwrap_or(default.beta),
        gamma: args.gammas.unwrap_or(default.gamma),
    };
    let beam = args.beam.config()?;
    let pool = rayon_pool(args.workers)?;
    let result = pool.install(|| tune_scales(&models, dev, &args.mode, &args.decision, beam, &grids))?;
    write_file(&args.out_dir.join("tune.csv"), &result.to_csv())?;
    println!(
        "chosen: alpha={} beta={} gamma={} wer={:.4}",
        result.chosen.acoustic, result.chosen.lm, result.gamma, result.chosen_wer
    );
    if args.grid {
        let points = pool.install(|| grid_2d(dev_objective(&models, dev, &args.mode, &args.decision, beam), &grids))?;
        write_file(&args.out_dir.join("grid.csv"), &grid_csv(&points))?;
        if let Some(opt) = grid_optimum(&points) {
            println!(
                "grid optimum: alpha={} beta={} wer={:.4}",
                opt.scales.acoustic,
                opt.scales.lm,
                opt.wer.unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}

fn rayon_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))
}

fn sweep_cmd(args: SweepArgs) -> Result<()> {
    let (corpus, models) = args.model.corpus()?;
    let scales = args.scales.scales()?;
    let modes: Vec<String> = if args.mode.is_empty() {
        vec!["viterbi".into(), "fullsum".into()]
    } else {
        args.mode
    };
    let modes: Vec<(String, ScaleConfig)> = modes.into_iter().map(|m| (m, scales)).collect();
    if !(args.frame_shift_ms.is_finite() && args.frame_shift_ms > 0.0) {
        return Err(Error::Config("frame shift must be positive".into()));
    }
    let beam = BeamConfig {
        max_hyps: args.max_hyps,
        ..BeamConfig::default()
    };
    let points = sweep(
        &models,
        &corpus.utterances,
        &modes,
        beam,
        &args.thresholds,
        &args.decision,
        args.workers,
        std::time::Duration::from_secs_f64(args.frame_shift_ms / 1000.0),
    )?;
    let csv = sweep_csv(&points);
    write_file(&args.out_dir.join("sweep.csv"), &csv)?;
    print!("{csv}");
    Ok(())
}

fn oracle(args: OracleArgs) -> Result<()> {
    let models = args.model.models()?;
    let am = AcousticScores::load(&args.am)?;
    models.check_acoustics(&am)?;
    let scales = args.scales.scales()?;
    let lexicon = models.lexicon();
    let entries = score_all(&am, &models, scales, args.max_words)?;
    let mut out = String::from("words\tfullsum\tviterbi\n");
    for e in &entries {
        let _ = writeln!(
            out,
            "{}\t{:.9}\t{:.9}",
            lexicon.ids_to_words(&e.words).join(" "),
            e.full_sum,
            e.best_path
        );
    }
    print!("{out}");
    let modes: Vec<String> = match args.mode {
        Some(m) => vec![m],
        None => vec!["fullsum".into(), "viterbi".into()],
    };
    for mode in modes {
        let rule: ScoreRule = mode.parse()?;
        let (words, score) = oracle_map(&am, &models, scales, rule, args.max_words)?;
        println!("map({mode}): {} ({:.9})", lexicon.ids_to_words(&words).join(" "), score.value());
    }
    Ok(())
}

fn cn(args: CnArgs) -> Result<()> {
    let lattice = Lattice::load(&args.lattice)?;
    let pl = PosteriorLattice::new(lattice)?;
    let cn = build_cn(&pl);
    if let Some(dir) = &args.out_dir {
        write_file(&dir.join("cn.txt"), &cn.to_text())?;
    } else {
        print!("{}", cn.to_text());
    }
    let rule = decision_rules().get(&args.decision)?;
    println!("{}: {}", rule.name(), rule.decide(&pl)?.join(" "));
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Decode(a) => decode(a),
        Command::Experiment(a) => experiment(a),
        Command::Tune(a) => tune(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::Oracle(a) => oracle(a),
        Command::Cn(a) => cn(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
