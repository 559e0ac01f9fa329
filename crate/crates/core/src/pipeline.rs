//! End-to-end run: dataset selection, vectors, word matrices, observables,
//! model fit and moment report, for one or more basis sizes.
//!
//! Output layout under `out_dir`:
//!
//! ```text
//! config.json            resolved configuration
//! dataset.json           retained targets and their arguments
//! pairs.tsv              extracted pairs, when no pairs file was given
//! d060/basis.txt
//! d060/nouns.vec
//! d060/compounds/<target>.vec
//! d060/matrices/<class>/ ensemble directory
//! d060/training_log.json
//! d060/<class>/averages.json, params.json, report.json, report.txt
//! stabilization.csv      normalized parameters per basis size
//! run_report.json
//! ```
//!
//! A failing stage leaves its predecessors' files in place and writes a
//! `FAILED` file naming the stage.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{
    build_compound_vectors, build_noun_vectors, build_vocab, count_cooccurrence, extract_pairs,
    select_basis, select_dataset, write_vectors, BasisSpec, CompoundVectors, DatasetSelection,
    DistVector, PairCounts, TargetClass, Thresholds, TokenizedCorpus, DEFAULT_STOPWORDS,
    DEFAULT_WINDOW,
};
use crate::error::{io_err, Error, Result};
use crate::invariants::{ensemble_averages, EnsembleAverages, InvariantId};
use crate::matrix::{write_ensemble, Ensemble, WordMatrix};
use crate::model::{fit, moment_report, GaussParams, MomentReport, NormalizedParams, ParamsBlock};
use crate::regression::{
    fit_closed_form, fit_gradient_descent, loss, select_lambda, RegressionConfig, TrainingSet,
    LAMBDA_GRID,
};

pub const TOOL: &str = concat!("wordmat ", env!("CARGO_PKG_VERSION"));
pub const FAILED_MARKER: &str = "FAILED";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(config_hash: impl Into<String>, seed: u64) -> Self {
        Self {
            tool: TOOL.to_string(),
            config_hash: config_hash.into(),
            seed,
        }
    }

    /// Provenance of an output built from `config` alone.
    pub fn of<T: Serialize>(config: &T, seed: u64) -> Result<Self> {
        Ok(Self::new(sha256_json(config)?, seed))
    }

    /// One-line form for text and CSV headers.
    pub fn line(&self) -> String {
        format!("tool={} config_hash={} seed={}", self.tool, self.config_hash, self.seed)
    }
}

pub fn sha256_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(hex::encode(Sha256::digest(serde_json::to_vec(value)?)))
}

/// A JSON document with a `provenance` field next to the payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stamped<T> {
    pub provenance: Provenance,
    #[serde(flatten)]
    pub body: T,
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(io_err(path))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    Ok(serde_json::from_str(&text)?)
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(io_err(path))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    ClosedForm,
    GradientDescent,
}

/// Regression settings; `lambda: None` picks λ per word by holdout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnSettings {
    pub lambda: Option<f64>,
    pub method: Method,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub convergence_tol: f64,
}

impl Default for LearnSettings {
    fn default() -> Self {
        let r = RegressionConfig::default();
        Self {
            lambda: None,
            method: Method::ClosedForm,
            learning_rate: r.learning_rate,
            max_epochs: r.max_epochs,
            convergence_tol: r.convergence_tol,
        }
    }
}

impl LearnSettings {
    fn regression_config(&self, lambda: f64, seed: u64) -> RegressionConfig {
        RegressionConfig {
            lambda,
            learning_rate: self.learning_rate,
            max_epochs: self.max_epochs,
            convergence_tol: self.convergence_tol,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.regression_config(self.lambda.unwrap_or(0.0), 0).validate()
    }
}

fn default_dims() -> Vec<usize> {
    vec![60, 80, 100]
}

fn default_window() -> usize {
    DEFAULT_WINDOW
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: PathBuf,
    /// Tab-separated `head argument count` file; extracted by adjacency when absent.
    #[serde(default)]
    pub pairs: Option<PathBuf>,
    /// Basis sizes to run.
    #[serde(default = "default_dims")]
    pub dims: Vec<usize>,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub learning: LearnSettings,
    /// Stopwords for untagged corpora; a built-in English list when absent.
    #[serde(default)]
    pub stopwords: Option<Vec<String>>,
    pub out_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    /// Worker cap; never affects outputs.
    #[serde(default)]
    pub threads: Option<usize>,
}

impl PipelineConfig {
    pub fn new(corpus: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            corpus: corpus.into(),
            pairs: None,
            dims: default_dims(),
            window: DEFAULT_WINDOW,
            thresholds: Thresholds::default(),
            learning: LearnSettings::default(),
            stopwords: None,
            out_dir: out_dir.into(),
            seed: 0,
            threads: None,
        }
    }

    /// Reads a JSON config; relative paths are taken relative to its directory.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg: Self = read_json(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.corpus);
        resolve(&mut cfg.out_dir);
        if let Some(p) = cfg.pairs.as_mut() {
            resolve(p);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() {
            return Err(Error::Config("dims must list at least one basis size".into()));
        }
        for (k, &d) in self.dims.iter().enumerate() {
            if d < 4 {
                return Err(Error::Config(format!(
                    "basis size {d} is below 4; every quadratic invariant needs four distinct indices"
                )));
            }
            if self.dims[..k].contains(&d) {
                return Err(Error::Config(format!("basis size {d} listed twice")));
            }
        }
        if self.window == 0 {
            return Err(Error::Config("window must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        self.learning.validate()?;
        if !self.corpus.is_file() {
            return Err(Error::Config(format!("corpus {} not found", self.corpus.display())));
        }
        if let Some(p) = &self.pairs {
            if !p.is_file() {
                return Err(Error::Config(format!("pairs file {} not found", p.display())));
            }
        }
        Ok(())
    }

    /// Hash of everything that can change results: `threads` and `out_dir` are left out.
    pub fn hash(&self) -> Result<String> {
        let mut c = self.clone();
        c.threads = None;
        c.out_dir = PathBuf::new();
        sha256_json(&c)
    }

    pub fn stopword_list(&self) -> Vec<String> {
        match &self.stopwords {
            Some(s) => s.clone(),
            None => DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStage {
    pub selection: DatasetSelection,
    pub pairs: PairCounts,
    /// True when the pairs came from adjacency extraction.
    pub extracted: bool,
}

pub fn select_dataset_stage(
    corpus: &TokenizedCorpus,
    pairs_file: Option<&Path>,
    window: usize,
    thresholds: &Thresholds,
) -> Result<DatasetStage> {
    let (pairs, extracted) = match pairs_file {
        Some(p) => (PairCounts::read(p)?, false),
        None => (extract_pairs(corpus, window), true),
    };
    let selection = select_dataset(corpus, &pairs, thresholds)?;
    Ok(DatasetStage {
        selection,
        pairs,
        extracted,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorBundle {
    pub basis: BasisSpec,
    pub nouns: Vec<DistVector>,
    /// In selection order.
    pub compounds: Vec<CompoundVectors>,
}

pub fn build_vectors_stage(
    corpus: &TokenizedCorpus,
    selection: &DatasetSelection,
    dim: usize,
    window: usize,
    stopwords: &[String],
) -> Result<VectorBundle> {
    let vocab = build_vocab(corpus)?;
    let basis = select_basis(&vocab, corpus, dim, stopwords)?;
    let nouns = selection.nouns();
    let table = count_cooccurrence(corpus, &nouns, &basis, window)?;
    let noun_vectors = build_noun_vectors(&table, &nouns)?;
    let compounds = selection
        .targets
        .par_iter()
        .map(|t| {
            let args: Vec<String> = t.arguments.iter().map(|a| a.noun.clone()).collect();
            build_compound_vectors(corpus, &table, &t.word, t.class, &args)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VectorBundle {
        basis,
        nouns: noun_vectors,
        compounds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingLogEntry {
    pub word: String,
    pub class: TargetClass,
    pub rows: usize,
    pub lambda: Option<f64>,
    pub method: Method,
    pub epochs: Option<usize>,
    pub final_loss: Option<f64>,
    pub converged: Option<bool>,
    /// Holdout errors over the λ grid when λ was chosen automatically.
    pub holdout_errors: Option<Vec<f64>>,
    pub skipped: Option<String>,
}

/// Learned matrices of one target class, in selection order.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassMatrices {
    pub class: TargetClass,
    pub matrices: Vec<WordMatrix>,
}

pub fn training_set(
    word: &str,
    nouns: &[DistVector],
    compounds: &CompoundVectors,
) -> Result<Option<TrainingSet>> {
    let by_word: BTreeMap<&str, &DistVector> = nouns.iter().map(|v| (v.word.as_str(), v)).collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for c in &compounds.vectors {
        let x = by_word
            .get(c.word.as_str())
            .ok_or_else(|| Error::UnknownWord(c.word.clone()))?;
        xs.push(x.values.clone());
        ys.push(c.values.clone());
    }
    if xs.is_empty() {
        return Ok(None);
    }
    TrainingSet::new(word, &xs, &ys).map(Some)
}

/// Trains one word; the seed only drives the λ holdout split.
pub fn train_word(
    ts: &TrainingSet,
    class: TargetClass,
    settings: &LearnSettings,
    seed: u64,
) -> Result<(WordMatrix, TrainingLogEntry)> {
    let (lambda, holdout_errors) = match settings.lambda {
        Some(l) => (l, None),
        None => {
            let choice = select_lambda(ts, &LAMBDA_GRID, seed)?;
            (choice.lambda, Some(choice.holdout_errors))
        }
    };
    let (matrix, epochs, final_loss, converged) = match settings.method {
        Method::ClosedForm => {
            let m = fit_closed_form(ts, lambda)?;
            let l = loss(&m, ts, lambda)?;
            (m, None, l, None)
        }
        Method::GradientDescent => {
            let out = fit_gradient_descent(ts, &settings.regression_config(lambda, seed))?;
            let m = out
                .matrix
                .ok_or_else(|| Error::Internal("gradient descent returned no matrix".into()))?;
            (m, Some(out.epochs), out.final_loss, Some(out.converged))
        }
    };
    let entry = TrainingLogEntry {
        word: ts.label().to_string(),
        class,
        rows: ts.rows(),
        lambda: Some(lambda),
        method: settings.method,
        epochs,
        final_loss: Some(final_loss),
        converged,
        holdout_errors,
        skipped: None,
    };
    Ok((matrix, entry))
}

pub fn learn_matrices_stage(
    bundle: &VectorBundle,
    selection: &DatasetSelection,
    settings: &LearnSettings,
    seed: u64,
) -> Result<(Vec<ClassMatrices>, Vec<TrainingLogEntry>)> {
    let results = selection
        .targets
        .par_iter()
        .zip(&bundle.compounds)
        .enumerate()
        .map(|(k, (t, cv))| {
            let Some(ts) = training_set(&t.word, &bundle.nouns, cv)? else {
                return Ok((
                    None,
                    TrainingLogEntry {
                        word: t.word.clone(),
                        class: t.class,
                        rows: 0,
                        lambda: None,
                        method: settings.method,
                        epochs: None,
                        final_loss: None,
                        converged: None,
                        holdout_errors: None,
                        skipped: Some("no compound occurrences".into()),
                    },
                ));
            };
            let (m, entry) = train_word(&ts, t.class, settings, seed.wrapping_add(k as u64))?;
            Ok((Some((t.class, m)), entry))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut by_class: BTreeMap<TargetClass, Vec<WordMatrix>> = BTreeMap::new();
    let mut log = Vec::with_capacity(results.len());
    for (learned, entry) in results {
        if let Some((class, m)) = learned {
            by_class.entry(class).or_default().push(m);
        }
        log.push(entry);
    }
    let classes = by_class
        .into_iter()
        .map(|(class, matrices)| ClassMatrices { class, matrices })
        .collect();
    Ok((classes, log))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassAnalysis {
    pub averages: EnsembleAverages,
    pub params: GaussParams,
    pub report: MomentReport,
}

pub fn analyze_ensemble(ensemble: &Ensemble) -> Result<ClassAnalysis> {
    let averages = ensemble_averages(ensemble, &InvariantId::ALL);
    let params = fit(&averages, ensemble.dim())?;
    let report = moment_report(&params, ensemble)?;
    Ok(ClassAnalysis {
        averages,
        params,
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub dim: usize,
    pub class: TargetClass,
    pub ensemble_size: usize,
    pub params: ParamsBlock,
    /// Report path relative to the output directory.
    pub report: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub provenance: Provenance,
    pub dims: Vec<usize>,
    pub targets: usize,
    pub results: Vec<RunResult>,
    /// Per class and normalized parameter, `(max - min) / min |value|` over the basis sizes.
    pub spread: BTreeMap<TargetClass, BTreeMap<String, f64>>,
}

impl RunReport {
    pub fn result(&self, dim: usize, class: TargetClass) -> Option<&RunResult> {
        self.results.iter().find(|r| r.dim == dim && r.class == class)
    }
}

/// `(max - min) / min |x|` of each normalized parameter across runs.
pub fn relative_spread(params: &[NormalizedParams]) -> [f64; 5] {
    let mut out = [0.0; 5];
    for (k, slot) in out.iter_mut().enumerate() {
        let xs: Vec<f64> = params.iter().map(|p| p.as_array()[k]).collect();
        let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let floor = xs.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
        *slot = (max - min) / floor;
    }
    out
}

pub fn dim_dir(out_dir: &Path, dim: usize) -> PathBuf {
    out_dir.join(format!("d{dim:03}"))
}

/// Runs every stage; on failure writes the `FAILED` marker and returns the error.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunReport> {
    cfg.validate()?;
    create_dir(&cfg.out_dir)?;
    let marker = cfg.out_dir.join(FAILED_MARKER);
    if marker.exists() {
        std::fs::remove_file(&marker).map_err(io_err(&marker))?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let result = pool.install(|| run_stages(cfg));
    if let Err(e) = &result {
        let _ = std::fs::write(&marker, format!("{e}\n"));
    }
    result
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage {
        stage: name,
        source: Box::new(e),
    })
}

fn run_stages(cfg: &PipelineConfig) -> Result<RunReport> {
    let prov = Provenance::new(cfg.hash()?, cfg.seed);
    let out = &cfg.out_dir;
    write_json(out.join("config.json"), &Stamped { provenance: prov.clone(), body: cfg })?;

    let corpus = stage("read-corpus", TokenizedCorpus::read(&cfg.corpus))?;
    let dataset = stage(
        "select-dataset",
        select_dataset_stage(&corpus, cfg.pairs.as_deref(), cfg.window, &cfg.thresholds),
    )?;
    write_json(
        out.join("dataset.json"),
        &Stamped {
            provenance: prov.clone(),
            body: &dataset.selection,
        },
    )?;
    if dataset.extracted {
        let path = out.join("pairs.tsv");
        let text = format!("# {}\n{}", prov.line(), dataset.pairs.to_tsv());
        std::fs::write(&path, text).map_err(io_err(&path))?;
    }
    if dataset.selection.targets.is_empty() {
        return stage(
            "select-dataset",
            Err(Error::Corpus("no target word passes the thresholds".into())),
        );
    }

    let stopwords = cfg.stopword_list();
    let mut results = Vec::new();
    let mut normalized: BTreeMap<TargetClass, Vec<NormalizedParams>> = BTreeMap::new();
    let mut csv = format!(
        "# {}\nclass,dim,ensemble_size,{}\n",
        prov.line(),
        NormalizedParams::NAMES.join(",")
    );
    for &dim in &cfg.dims {
        let dir = dim_dir(out, dim);
        let bundle = stage(
            "build-vectors",
            build_vectors_stage(&corpus, &dataset.selection, dim, cfg.window, &stopwords),
        )?;
        write_vector_bundle(&dir, &bundle, &prov)?;

        let (classes, log) = stage(
            "learn-matrices",
            learn_matrices_stage(&bundle, &dataset.selection, &cfg.learning, cfg.seed),
        )?;
        write_json(
            dir.join("training_log.json"),
            &Stamped {
                provenance: prov.clone(),
                body: TrainingLog { entries: log },
            },
        )?;

        for cm in classes {
            let name = cm.class.name();
            let ensemble = stage("learn-matrices", Ensemble::new(cm.matrices))?;
            write_ensemble(&ensemble, dir.join("matrices").join(name), Some(&prov.line()))?;
            let analysis = stage("fit", analyze_ensemble(&ensemble))?;
            let class_dir = dir.join(name);
            create_dir(&class_dir)?;
            write_json(
                class_dir.join("averages.json"),
                &Stamped {
                    provenance: prov.clone(),
                    body: &analysis.averages,
                },
            )?;
            write_json(
                class_dir.join("params.json"),
                &Stamped {
                    provenance: prov.clone(),
                    body: ParamsBlock::from(analysis.params),
                },
            )?;
            write_json(
                class_dir.join("report.json"),
                &Stamped {
                    provenance: prov.clone(),
                    body: &analysis.report,
                },
            )?;
            let table = format!("# {}\n# class {name}\n{}", prov.line(), analysis.report.to_table());
            let table_path = class_dir.join("report.txt");
            std::fs::write(&table_path, table).map_err(io_err(&table_path))?;

            let n = analysis.params.normalized();
            let _ = write!(csv, "{name},{dim},{}", ensemble.len());
            for v in n.as_array() {
                let _ = write!(csv, ",{v:?}");
            }
            csv.push('\n');
            normalized.entry(cm.class).or_default().push(n);
            results.push(RunResult {
                dim,
                class: cm.class,
                ensemble_size: ensemble.len(),
                params: analysis.params.into(),
                report: format!("d{dim:03}/{name}/report.json"),
            });
        }
    }
    let csv_path = out.join("stabilization.csv");
    std::fs::write(&csv_path, csv).map_err(io_err(&csv_path))?;

    let spread = normalized
        .iter()
        .map(|(class, ps)| {
            let s = relative_spread(ps);
            let named = NormalizedParams::NAMES
                .iter()
                .zip(s)
                .map(|(n, v)| (n.to_string(), v))
                .collect();
            (*class, named)
        })
        .collect();
    let report = RunReport {
        provenance: prov,
        dims: cfg.dims.clone(),
        targets: dataset.selection.targets.len(),
        results,
        spread,
    };
    write_json(out.join("run_report.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub entries: Vec<TrainingLogEntry>,
}

pub fn write_vector_bundle(dir: &Path, bundle: &VectorBundle, prov: &Provenance) -> Result<()> {
    let compounds = dir.join("compounds");
    create_dir(&compounds)?;
    let basis_path = dir.join("basis.txt");
    std::fs::write(&basis_path, format!("# {}\n{}", prov.line(), bundle.basis.to_text()))
        .map_err(io_err(&basis_path))?;
    let dim = bundle.basis.dim();
    write_vectors(dir.join("nouns.vec"), dim, &bundle.nouns, Some(&prov.line()))?;
    for cv in &bundle.compounds {
        let comment = format!("{}\ntarget {}", prov.line(), cv.target);
        write_vectors(
            compound_file(dir, &cv.target),
            dim,
            &cv.vectors,
            Some(&comment),
        )?;
    }
    Ok(())
}

/// Vector file of a target's compounds inside a `build-vectors` directory.
pub fn compound_file(dir: &Path, target: &str) -> PathBuf {
    let name: String = target
        .chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    dir.join("compounds").join(format!("{name}.vec"))
}
