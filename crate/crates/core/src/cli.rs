//! Command-line entry point.
//!
//! Settings resolve in three layers: built-in defaults, then an optional
//! `key = value` config file, then flags. `PAIRCLASS_CACHE` names the phrase
//! cache when no flag or config entry does.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::corpus::{build_index, CorpusIndex, DEFAULT_BYTE_BUDGET};
use crate::error::{Error, Result};
use crate::features::{FeatureFile, DEFAULT_K};
use crate::harvest::DEFAULT_MAX_PHRASES;
use crate::learner::smo::{DEFAULT_C, DEFAULT_GAMMA, DEFAULT_TOLERANCE};
use crate::learner::{argmax, KernelParams, LearnerConfig, SvmLearner, TrainedModel};
use crate::morphology::Morphology;
use crate::pair::{LabeledPair, WordPair};
use crate::tasks::eval::{DEFAULT_FOLDS, DEFAULT_TRIALS};
use crate::tasks::synthetic::{generate, SyntheticConfig};
use crate::tasks::{run_task, EvalResult, Pipeline, RunConfig, TaskData, TaskKind};

pub const CACHE_ENV: &str = "PAIRCLASS_CACHE";

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_SCHEMA: i32 = 4;
pub const EXIT_INVALID: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "pairclass", version, about = "Classify word-pair relations from corpus patterns")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// key = value settings applied before flags
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Morphology rule file replacing the shipped one
    #[arg(long, global = true, value_name = "FILE")]
    pub morph_rules: Option<PathBuf>,
    /// Directory for persisted phrase lists
    #[arg(long, global = true, value_name = "DIR")]
    pub phrase_cache: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct FeatureArgs {
    /// Patterns kept per pair
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub max_phrases: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct LearnerArgs {
    /// Soft-margin cost
    #[arg(long = "c")]
    pub c: Option<f64>,
    /// RBF width
    #[arg(long)]
    pub gamma: Option<f64>,
    /// KKT stopping tolerance
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Cross-fit calibration folds (default: fit on training decisions)
    #[arg(long)]
    pub calibration_folds: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a positional index from text files or directories
    Index {
        #[arg(required = true)]
        sources: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Refuse corpora larger than this many bytes
        #[arg(long)]
        byte_budget: Option<u64>,
    },
    /// Harvest, select features and write vectors for a pair list
    Extract {
        /// Lines of `a:b` or `a:b<TAB>label`
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        index: PathBuf,
        #[command(flatten)]
        features: FeatureArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a calibrated one-vs-one model from labeled vectors
    Train {
        #[arg(long)]
        features: PathBuf,
        #[command(flatten)]
        learner: LearnerArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print class probabilities for every vector in a feature file
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
    },
    /// Evaluate a task file
    Run {
        #[arg(long)]
        task: String,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        folds: Option<usize>,
        /// One feature set for the whole analogy task
        #[arg(long)]
        reuse_features: bool,
        #[command(flatten)]
        features: FeatureArgs,
        #[command(flatten)]
        learner: LearnerArgs,
        /// JSON report destination
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write a planted-relation corpus and matching analogy questions
    GenSynthetic {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        questions: usize,
        /// Fraction of sentences using another family's connective
        #[arg(long, default_value_t = 0.0)]
        leak: f64,
    },
}

/// Fully resolved settings, logged at the start of every command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    pub index: Option<PathBuf>,
    pub morph_rules: Option<PathBuf>,
    pub k: usize,
    pub max_phrases: usize,
    pub c: f64,
    pub gamma: f64,
    pub tolerance: f64,
    pub calibration_folds: Option<usize>,
    pub trials: usize,
    pub folds: usize,
    pub seed: u64,
    pub reuse_features: bool,
    pub cache_dir: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            index: None,
            morph_rules: None,
            k: DEFAULT_K,
            max_phrases: DEFAULT_MAX_PHRASES,
            c: DEFAULT_C,
            gamma: DEFAULT_GAMMA,
            tolerance: DEFAULT_TOLERANCE,
            calibration_folds: None,
            trials: DEFAULT_TRIALS,
            folds: DEFAULT_FOLDS,
            seed: 0,
            reuse_features: false,
            cache_dir: None,
            jobs: None,
        }
    }
}

impl Config {
    /// Apply `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn apply_file_text(&mut self, text: &str, path: &Path) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(path, i + 1, "expected key = value"))?;
            self.set(key.trim(), value.trim()).map_err(|m| Error::parse(path, i + 1, m))?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
            v.parse().map_err(|_| format!("bad value {v:?} for {key}"))
        }
        match key {
            "index" => self.index = Some(value.into()),
            "morph_rules" => self.morph_rules = Some(value.into()),
            "k" => self.k = num(key, value)?,
            "max_phrases" => self.max_phrases = num(key, value)?,
            "c" => self.c = num(key, value)?,
            "gamma" => self.gamma = num(key, value)?,
            "tolerance" => self.tolerance = num(key, value)?,
            "calibration_folds" => self.calibration_folds = Some(num(key, value)?),
            "trials" => self.trials = num(key, value)?,
            "folds" => self.folds = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "reuse_features" => self.reuse_features = num(key, value)?,
            "cache_dir" => self.cache_dir = Some(value.into()),
            "jobs" => self.jobs = Some(num(key, value)?),
            _ => return Err(format!("unknown setting {key:?}")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("k", self.k as f64),
            ("max_phrases", self.max_phrases as f64),
            ("c", self.c),
            ("gamma", self.gamma),
            ("tolerance", self.tolerance),
            ("trials", self.trials as f64),
            ("folds", self.folds as f64),
        ];
        for (name, v) in positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if self.jobs == Some(0) {
            return Err(Error::InvalidInput("jobs must be positive".into()));
        }
        if let Some(f) = self.calibration_folds {
            if f < 2 {
                return Err(Error::InvalidInput("calibration_folds must be at least 2".into()));
            }
        }
        Ok(())
    }

    fn apply_features(&mut self, a: &FeatureArgs) {
        if let Some(k) = a.k {
            self.k = k;
        }
        if let Some(m) = a.max_phrases {
            self.max_phrases = m;
        }
    }

    fn apply_learner(&mut self, a: &LearnerArgs) {
        if let Some(c) = a.c {
            self.c = c;
        }
        if let Some(g) = a.gamma {
            self.gamma = g;
        }
        if let Some(t) = a.tolerance {
            self.tolerance = t;
        }
        if a.calibration_folds.is_some() {
            self.calibration_folds = a.calibration_folds;
        }
    }

    pub fn learner_config(&self) -> LearnerConfig {
        LearnerConfig {
            kernel: KernelParams {
                gamma: self.gamma,
                c: self.c,
                tolerance: self.tolerance,
            },
            calibration_folds: self.calibration_folds,
        }
    }

    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            trials: self.trials,
            folds: self.folds,
            seed: self.seed,
            reuse_features: self.reuse_features,
        }
    }

    fn morphology(&self) -> Result<Morphology> {
        match &self.morph_rules {
            Some(p) => Morphology::load(p),
            None => Ok(Morphology::default()),
        }
    }
}

/// Resolve defaults, config file, environment and flags for `cli`.
pub fn resolve_config(cli: &Cli) -> Result<Config> {
    let mut cfg = Config::default();
    if let Some(path) = &cli.global.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        cfg.apply_file_text(&text, path)?;
    }
    if cfg.cache_dir.is_none() {
        if let Some(dir) = std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()) {
            cfg.cache_dir = Some(dir.into());
        }
    }
    if let Some(p) = &cli.global.morph_rules {
        cfg.morph_rules = Some(p.clone());
    }
    if let Some(p) = &cli.global.phrase_cache {
        cfg.cache_dir = Some(p.clone());
    }
    if cli.global.jobs.is_some() {
        cfg.jobs = cli.global.jobs;
    }
    match &cli.command {
        Command::Extract { index, features, .. } => {
            cfg.index = Some(index.clone());
            cfg.apply_features(features);
        }
        Command::Train { learner, .. } => cfg.apply_learner(learner),
        Command::Run {
            index,
            seed,
            trials,
            folds,
            reuse_features,
            features,
            learner,
            ..
        } => {
            cfg.index = Some(index.clone());
            if let Some(s) = seed {
                cfg.seed = *s;
            }
            if let Some(t) = trials {
                cfg.trials = *t;
            }
            if let Some(f) = folds {
                cfg.folds = *f;
            }
            cfg.reuse_features |= *reuse_features;
            cfg.apply_features(features);
            cfg.apply_learner(learner);
        }
        Command::Index { .. } | Command::Predict { .. } | Command::GenSynthetic { .. } => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } => EXIT_IO,
        Error::Parse { .. } | Error::IndexFormat(_) => EXIT_SCHEMA,
        Error::InvalidInput(_) | Error::DegenerateTraining(_) => EXIT_INVALID,
    }
}

fn category(e: &Error) -> &'static str {
    match e {
        Error::Io { .. } => "io error",
        Error::Parse { .. } | Error::IndexFormat(_) => "schema error",
        Error::InvalidInput(_) => "invalid input",
        Error::DegenerateTraining(_) => "training error",
    }
}

/// Parse `args`, run the command and return the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).try_init();
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("pairclass: {}: {e}", category(&e));
            exit_code(&e)
        }
    }
}

pub fn main() -> i32 {
    main_with_args(std::env::args_os())
}

fn execute(cli: &Cli) -> Result<()> {
    let cfg = resolve_config(cli)?;
    log::info!("config: {}", serde_json::to_string(&cfg).unwrap_or_default());
    if let Some(n) = cfg.jobs {
        // fails only if a pool already exists, as when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.command {
        Command::Index {
            sources,
            out,
            byte_budget,
        } => {
            let index = build_index(sources, byte_budget.unwrap_or(DEFAULT_BYTE_BUDGET))?;
            index.save(out)?;
            println!(
                "indexed {} documents, {} tokens, {} types; fingerprint {}",
                index.num_documents(),
                index.total_tokens(),
                index.vocabulary_size(),
                index.fingerprint()
            );
            Ok(())
        }
        Command::Extract { pairs, out, .. } => {
            let index = CorpusIndex::load(cfg.index.as_deref().expect("set from flag"))?;
            let morph = cfg.morphology()?;
            let learner = SvmLearner::default();
            let pipeline = build_pipeline(&cfg, &index, &morph, &learner);
            let labeled = read_pair_list(pairs)?;
            let word_pairs: Vec<WordPair> = labeled.iter().map(|p| p.pair.clone()).collect();
            let (spec, vectors) = pipeline.extract(&word_pairs)?;
            let file = FeatureFile {
                spec,
                rows: vectors.into_iter().zip(labeled.into_iter().map(|p| p.label)).collect(),
            };
            file.save(out)?;
            println!(
                "{} pairs, {} features (k={}, N={})",
                file.rows.len(),
                file.spec.len(),
                file.spec.k,
                file.spec.n
            );
            Ok(())
        }
        Command::Train { features, out, .. } => {
            let file = FeatureFile::load(features)?;
            let mut examples = Vec::new();
            for (v, label) in &file.rows {
                let l = label
                    .as_deref()
                    .ok_or_else(|| Error::InvalidInput(format!("training pair {} is unlabeled", v.pair)))?;
                examples.push((&v.weights, l));
            }
            let model = crate::learner::train(&examples, cfg.learner_config())?;
            model.save(out)?;
            println!("trained {} binary models over classes {}", model.binary.len(), model.classes.join(", "));
            Ok(())
        }
        Command::Predict { model, features } => {
            let model = TrainedModel::load(model)?;
            let file = FeatureFile::load(features)?;
            let mut table = String::new();
            let _ = writeln!(table, "pair\tpredicted\t{}", model.classes.join("\t"));
            for (v, _) in &file.rows {
                let p = model.predict_proba(&v.weights);
                let cells: Vec<String> = p.iter().map(|x| format!("{x:.4}")).collect();
                let _ = writeln!(table, "{}\t{}\t{}", v.pair, model.classes[argmax(&p)], cells.join("\t"));
            }
            print!("{table}");
            Ok(())
        }
        Command::Run { task, data, report, .. } => {
            let kind: TaskKind = task.parse()?;
            let data = TaskData::load(data)?;
            if data.kind != kind {
                return Err(Error::InvalidInput(format!("--task {kind} but the data file declares {}", data.kind)));
            }
            let index = CorpusIndex::load(cfg.index.as_deref().expect("set from flag"))?;
            let morph = cfg.morphology()?;
            let learner = SvmLearner {
                config: cfg.learner_config(),
            };
            let pipeline = build_pipeline(&cfg, &index, &morph, &learner);
            let result = run_task(&data, &pipeline, &cfg.run_config())?;
            print!("{}", render_table(kind, &result));
            if let Some(path) = report {
                let json = report_json(kind, &cfg, &result);
                std::fs::write(path, json).map_err(|e| Error::io(path, e))?;
            }
            Ok(())
        }
        Command::GenSynthetic {
            out,
            seed,
            questions,
            leak,
        } => {
            if !(0.0..=1.0).contains(leak) {
                return Err(Error::InvalidInput("leak must lie in [0, 1]".into()));
            }
            let task = generate(&SyntheticConfig {
                seed: *seed,
                questions: *questions,
                leak: *leak,
                ..Default::default()
            });
            task.write(out)?;
            println!(
                "wrote {} corpus documents and {} questions under {}",
                task.documents.len(),
                task.questions().len(),
                out.display()
            );
            Ok(())
        }
    }
}

fn build_pipeline<'a>(
    cfg: &Config,
    index: &'a CorpusIndex,
    morph: &'a Morphology,
    learner: &'a SvmLearner,
) -> Pipeline<'a> {
    let mut p = Pipeline::new(index, morph, learner)
        .with_k(cfg.k)
        .with_max_phrases(cfg.max_phrases);
    if let Some(dir) = &cfg.cache_dir {
        p = p.with_phrase_cache(dir);
    }
    p
}

/// Read `a:b` or `a:b<TAB>label` lines; `#` starts a comment line.
pub fn read_pair_list(path: &Path) -> Result<Vec<LabeledPair>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        let pair: WordPair = fields
            .next()
            .unwrap_or_default()
            .parse()
            .map_err(|e: Error| Error::parse(path, i + 1, e.to_string()))?;
        let label = fields.next().map(|s| s.to_string());
        if fields.next().is_some() {
            return Err(Error::parse(path, i + 1, "expected a:b or a:b<TAB>label"));
        }
        out.push(LabeledPair { pair, label });
    }
    Ok(out)
}

#[derive(Serialize)]
struct Report<'a> {
    task: &'a str,
    config: &'a Config,
    #[serde(flatten)]
    result: &'a EvalResult,
}

/// Machine-readable report; identical inputs give identical bytes.
pub fn report_json(kind: TaskKind, cfg: &Config, result: &EvalResult) -> String {
    let report = Report {
        task: kind.name(),
        config: cfg,
        result,
    };
    let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
    s.push('\n');
    s
}

pub fn render_table(kind: TaskKind, result: &EvalResult) -> String {
    let mut out = String::new();
    let width = result.items.iter().map(|i| i.id.len()).max().unwrap_or(4).max(4);
    let _ = writeln!(out, "{:<width$}  gold  predicted  correct", "item");
    for it in &result.items {
        let _ = writeln!(
            out,
            "{:<width$}  {:<4}  {:<9}  {}",
            it.id,
            it.gold,
            it.predicted,
            if it.correct { "yes" } else { "no" }
        );
    }
    let correct = result.items.iter().filter(|i| i.correct).count();
    let _ = writeln!(
        out,
        "{kind}: accuracy {:.1}% ({correct}/{}), baseline {:.1}%",
        100.0 * result.accuracy,
        result.items.len(),
        100.0 * result.baseline
    );
    for f in &result.flags {
        let _ = writeln!(out, "note: {f}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_exact() {
        let c = Config::default();
        assert_eq!((c.k, c.max_phrases, c.trials, c.folds), (20, 5000, 10, 10));
        assert_eq!((c.c, c.gamma, c.tolerance), (1.0, 0.01, 1e-3));
        c.validate().unwrap();
    }

    #[test]
    fn config_file_then_flags() {
        let cli = Cli::try_parse_from(["pairclass", "run", "--task", "sat", "--data", "d", "--index", "i", "--trials", "3"]).unwrap();
        let mut cfg = Config::default();
        cfg.apply_file_text("# settings\nk = 5\ntrials = 7\ngamma=0.5\n", Path::new("cfg")).unwrap();
        assert_eq!((cfg.k, cfg.trials, cfg.gamma), (5, 7, 0.5));
        let resolved = resolve_config(&cli).unwrap();
        assert_eq!(resolved.trials, 3);
        assert_eq!(resolved.index.as_deref(), Some(Path::new("i")));
    }

    #[test]
    fn bad_config_lines() {
        let mut cfg = Config::default();
        for text in ["k 5", "bogus = 1", "k = -1", "gamma = x"] {
            assert!(matches!(cfg.apply_file_text(text, Path::new("c")), Err(Error::Parse { line: 1, .. })), "{text}");
        }
        cfg.k = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn exit_codes_are_distinct() {
        let codes = [
            exit_code(&Error::io("x", std::io::Error::other("gone"))),
            exit_code(&Error::parse("x", 1, "bad")),
            exit_code(&Error::InvalidInput("x".into())),
        ];
        assert_eq!(codes, [EXIT_IO, EXIT_SCHEMA, EXIT_INVALID]);
        assert_eq!(main_with_args(["pairclass", "run", "--task", "sat", "--data", "x"]), EXIT_USAGE);
        assert_eq!(main_with_args(["pairclass", "frobnicate"]), EXIT_USAGE);
    }
}
