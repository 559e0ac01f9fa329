//! `wordmat` command-line front end.
//!
//! Every subcommand accepts `--config <file.json>`; keys in the file use the
//! flag names with `_` for `-`, and flags given on the command line win.
//! Failures exit with status 1 and a JSON object on stderr.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use wordmat::corpus::synthetic::{generate, SyntheticConfig};
use wordmat::corpus::{
    read_vectors, BasisSpec, CompoundVectors, DatasetSelection, Thresholds, TokenizedCorpus,
    DEFAULT_STOPWORDS, DEFAULT_WINDOW,
};
use wordmat::counting::count_invariants;
use wordmat::invariants::{ensemble_averages, EnsembleAverages, InvariantId};
use wordmat::matrix::{read_ensemble, write_ensemble, Ensemble};
use wordmat::model::{fit, moment_report, predict_all, GaussParams, ParamsBlock};
use wordmat::pipeline::{
    build_vectors_stage, compound_file, learn_matrices_stage, read_json, run_pipeline, select_dataset_stage,
    sha256_json, write_json, write_vector_bundle, LearnSettings, Method, PipelineConfig,
    Provenance, Stamped, TrainingLog, VectorBundle,
};
use wordmat::sampler::{mc_records_to_csv, monte_carlo_check, sample, SampleSpec};
use wordmat::{Error, Result};

#[derive(Parser)]
#[command(name = "wordmat", version, about = "Word matrices and Gaussian matrix models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the whole pipeline from a JSON configuration.
    Run(RunArgs),
    /// Write the seeded synthetic corpus and its planted pairs.
    SynthCorpus(Flags<SynthArgs>),
    /// Choose target words and their arguments.
    SelectDataset(Flags<SelectArgs>),
    /// Noun and compound PPMI vectors over the top-D basis.
    BuildVectors(Flags<VectorArgs>),
    /// One ridge-regression matrix per target word.
    LearnMatrices(Flags<LearnArgs>),
    /// Ensemble averages of every catalog invariant.
    Observables(Flags<ObservablesArgs>),
    /// Fit the five Gaussian parameters to ensemble averages.
    Fit(Flags<FitArgs>),
    /// Predicted averages of every catalog invariant.
    Predict(Flags<PredictArgs>),
    /// Draw an ensemble from the Gaussian model.
    Sample(Flags<SampleArgs>),
    /// Compare sampled invariant means with predictions.
    McCheck(Flags<McArgs>),
    /// Number of degree-k permutation-invariant polynomials.
    CountInvariants(Flags<CountArgs>),
    /// Theory against experiment for a fitted ensemble.
    Report(Flags<ReportArgs>),
}

/// Subcommand flags plus the shared `--config`.
#[derive(Args)]
struct Flags<T: Args> {
    /// JSON file with defaults for any flag.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    args: T,
}

impl<T: Args + Serialize + DeserializeOwned> Flags<T> {
    /// Overlays the command-line flags on the config file.
    fn resolve(&self) -> Result<T> {
        let mut merged = match &self.config {
            Some(path) => match read_json::<Value>(path)? {
                Value::Object(m) => m,
                _ => return Err(Error::Config(format!("{} is not a JSON object", path.display()))),
            },
            None => Map::new(),
        };
        if let Value::Object(flags) = serde_json::to_value(&self.args)? {
            for (k, v) in flags {
                if !v.is_null() {
                    merged.insert(k, v);
                }
            }
        }
        Ok(serde_json::from_value(Value::Object(merged))?)
    }
}

fn need<T: Clone>(value: &Option<T>, flag: &str) -> Result<T> {
    value
        .clone()
        .ok_or_else(|| Error::Config(format!("missing required --{flag}")))
}

#[derive(Args)]
struct RunArgs {
    /// Pipeline configuration file.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated basis sizes.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
}

#[derive(Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SynthArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Corpus output file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Planted pairs output file.
    #[arg(long)]
    pairs_out: Option<PathBuf>,
    #[arg(skip)]
    #[serde(default)]
    generator: Option<SyntheticConfig>,
}

#[derive(Args, Serialize, Deserialize, Default)]
struct ThresholdFlags {
    #[arg(long)]
    min_target_freq: Option<u64>,
    #[arg(long)]
    drop_top: Option<usize>,
    #[arg(long)]
    min_pair_count: Option<u64>,
    #[arg(long)]
    min_args: Option<usize>,
}

impl ThresholdFlags {
    fn thresholds(&self) -> Thresholds {
        let d = Thresholds::default();
        Thresholds {
            min_target_freq: self.min_target_freq.unwrap_or(d.min_target_freq),
            drop_top: self.drop_top.unwrap_or(d.drop_top),
            min_pair_count: self.min_pair_count.unwrap_or(d.min_pair_count),
            min_args: self.min_args.unwrap_or(d.min_args),
        }
    }
}

#[derive(Args, Serialize, Deserialize)]
struct SelectArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Tab-separated head/argument/count file; extracted by adjacency when absent.
    #[arg(long)]
    pairs: Option<PathBuf>,
    #[arg(long)]
    window: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    thresholds: ThresholdFlags,
    /// Dataset JSON output file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VectorArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Dataset JSON from `select-dataset`.
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    basis_size: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LearnArgs {
    /// Dataset JSON from `select-dataset` listing targets, classes and arguments.
    #[arg(long)]
    pairs: Option<PathBuf>,
    /// Directory written by `build-vectors`.
    #[arg(long)]
    vectors: Option<PathBuf>,
    /// Ridge coefficient; chosen per word by holdout when absent.
    #[arg(long)]
    lambda: Option<f64>,
    /// `closed-form` or `gradient-descent`.
    #[arg(long, value_parser = parse_method)]
    method: Option<Method>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    match s {
        "closed-form" => Ok(Method::ClosedForm),
        "gradient-descent" => Ok(Method::GradientDescent),
        _ => Err(format!("unknown method {s:?}; use closed-form or gradient-descent")),
    }
}

#[derive(Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObservablesArgs {
    /// Ensemble directory.
    #[arg(long)]
    ensemble: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FitArgs {
    /// Averages JSON from `observables`.
    #[arg(long)]
    averages: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PredictArgs {
    #[arg(long)]
    params: Option<PathBuf>,
    /// Evaluate at another dimension with the same couplings.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleArgs {
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Ensemble output directory; only averages are printed when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct McArgs {
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// `json` (default) or `csv`.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CountArgs {
    #[arg(long)]
    k: Option<usize>,
    /// Matrix size; the large-dimension value `dim = 2k` when absent.
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportArgs {
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    ensemble: Option<PathBuf>,
    /// Report JSON output file; a text table is printed as well.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn provenance<T: Serialize>(args: &T, seed: Option<u64>) -> Result<Provenance> {
    Ok(Provenance::new(sha256_json(args)?, seed.unwrap_or(0)))
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes to `out` when given, stdout otherwise.
fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    match out {
        Some(p) => write_json(p, value),
        None => {
            println!("{}", serde_json::to_string_pretty(value)?);
            Ok(())
        }
    }
}

/// Loads a parameter file, with or without provenance and normalized fields.
fn read_params(path: &Path) -> Result<GaussParams> {
    let value: Value = read_json(path)?;
    #[derive(Deserialize)]
    struct Raw {
        dim: usize,
        lambda: f64,
        a: f64,
        b: f64,
        j0: f64,
        js: f64,
    }
    let r: Raw = serde_json::from_value(value)?;
    GaussParams::new(r.dim, r.lambda, r.a, r.b, r.j0, r.js)
}

fn run(args: &RunArgs) -> Result<()> {
    let mut cfg = PipelineConfig::read(&args.config)?;
    if let Some(o) = &args.out {
        cfg.out_dir = o.clone();
    }
    if args.threads.is_some() {
        cfg.threads = args.threads;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(d) = &args.dims {
        cfg.dims = d.clone();
    }
    let report = run_pipeline(&cfg)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn synth(flags: &Flags<SynthArgs>) -> Result<()> {
    let a = flags.resolve()?;
    let mut cfg = a.generator.unwrap_or_default();
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let out = need(&a.out, "out")?;
    let corpus = generate(&cfg)?;
    write_text(&out, &corpus.text)?;
    if let Some(p) = &a.pairs_out {
        write_text(p, &corpus.pairs.to_tsv())?;
    }
    let tokens = TokenizedCorpus::parse(&corpus.text).token_count();
    println!("{}", json!({"corpus": out, "tokens": tokens, "seed": cfg.seed}));
    Ok(())
}

fn select(flags: &Flags<SelectArgs>) -> Result<()> {
    let a = flags.resolve()?;
    let corpus = TokenizedCorpus::read(need(&a.corpus, "corpus")?)?;
    let stage = select_dataset_stage(
        &corpus,
        a.pairs.as_deref(),
        a.window.unwrap_or(DEFAULT_WINDOW),
        &a.thresholds.thresholds(),
    )?;
    let prov = provenance(&a, None)?;
    emit_json(
        a.out.as_deref(),
        &Stamped {
            provenance: prov,
            body: &stage.selection,
        },
    )
}

fn read_dataset(path: &Path) -> Result<DatasetSelection> {
    Ok(read_json::<Stamped<DatasetSelection>>(path)?.body)
}

fn build_vectors(flags: &Flags<VectorArgs>) -> Result<()> {
    let a = flags.resolve()?;
    let corpus = TokenizedCorpus::read(need(&a.corpus, "corpus")?)?;
    let selection = read_dataset(&need(&a.dataset, "dataset")?)?;
    let dim = need(&a.basis_size, "basis-size")?;
    let stopwords: Vec<String> = DEFAULT_STOPWORDS
        .iter()
        .map(|s| s.to_string())
        .collect();
    let bundle = build_vectors_stage(
        &corpus,
        &selection,
        dim,
        a.window.unwrap_or(DEFAULT_WINDOW),
        &stopwords,
    )?;
    let out = need(&a.out, "out")?;
    write_vector_bundle(&out, &bundle, &provenance(&a, None)?)?;
    let warnings: usize = bundle.compounds.iter().map(|c| c.warnings.len()).sum();
    println!(
        "{}",
        json!({"dim": dim, "nouns": bundle.nouns.len(), "targets": bundle.compounds.len(), "warnings": warnings})
    );
    Ok(())
}

/// Reassembles a vector bundle from a `build-vectors` directory.
fn read_bundle(dir: &Path, selection: &DatasetSelection) -> Result<VectorBundle> {
    let basis = BasisSpec::read(dir.join("basis.txt"))?;
    let (dim, nouns) = read_vectors(dir.join("nouns.vec"))?;
    if dim != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: dim,
        });
    }
    let compounds = selection
        .targets
        .iter()
        .map(|t| {
            let (d, vectors) = read_vectors(compound_file(dir, &t.word))?;
            if d != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: d });
            }
            Ok(CompoundVectors {
                target: t.word.clone(),
                occurrences: vec![0; vectors.len()],
                vectors,
                warnings: vec![],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VectorBundle {
        basis,
        nouns,
        compounds,
    })
}

fn learn(flags: &Flags<LearnArgs>) -> Result<()> {
    let a = flags.resolve()?;
    let selection = read_dataset(&need(&a.pairs, "pairs")?)?;
    let bundle = read_bundle(&need(&a.vectors, "vectors")?, &selection)?;
    let d = LearnSettings::default();
    let settings = LearnSettings {
        lambda: a.lambda,
        method: a.method.unwrap_or(d.method),
        learning_rate: a.learning_rate.unwrap_or(d.learning_rate),
        max_epochs: a.max_epochs.unwrap_or(d.max_epochs),
        convergence_tol: d.convergence_tol,
    };
    settings.validate()?;
    let seed = a.seed.unwrap_or(0);
    let (classes, log) = learn_matrices_stage(&bundle, &selection, &settings, seed)?;
    let out = need(&a.out, "out")?;
    create_dir(&out)?;
    let prov = provenance(&a, Some(seed))?;
    let mut written = Map::new();
    for cm in classes {
        let n = cm.matrices.len();
        let e = Ensemble::new(cm.matrices)?;
        write_ensemble(&e, out.join(cm.class.name()), Some(&prov.line()))?;
        written.insert(cm.class.name().into(), json!(n));
    }
    write_json(
        out.join("training_log.json"),
        &Stamped {
            provenance: prov,
            body: TrainingLog { entries: log },
        },
    )?;
    println!("{}", Value::Object(written));
    Ok(())
}

fn observables(flags: &Flags<ObservablesArgs>) -> Result<()> {
    let a = flags.resolve()?;
    let e = read_ensemble(need(&a.ensemble, "ensemble")?)?;
    let avgs = ensemble_averages(&e, &InvariantId::ALL);
    emit_json(
        a.out.as_deref(),
        &Stamped {
            provenance: provenance(&a, None)?,
            body: avgs,
        },
    )
}

fn fit_cmd(flags: &Flags<FitArgs>) -> Result<()> {
    let a = flags.resolve()?;
    // Output of `observables`, or a bare averages object without provenance.
    let avgs: EnsembleAverages = read_json(need(&a.averages, "averages")?)?;
    let p = fit(&avgs, avgs.dim)?;
    emit_json(
        a.out.as_deref(),
        &Stamped {
            provenance: provenance(&a, None)?,
            body: ParamsBlock::from(p),
        },
    )
}

fn predict(flags: &Flags<PredictArgs>) -> Result<()> {
    let a = flags.resolve()?;
    let mut p = read_params(&need(&a.params, "params")?)?;
    if let Some(d) = a.dim {
        p = p.with_dim(d)?;
    }
    emit_json(
        a.out.as_deref(),
        &Stamped {
            provenance: provenance(&a, None)?,
            body: predict_all(&p, &InvariantId::ALL),
        },
    )
}

fn sample_params(params: &Option<PathBuf>, dim: Option<usize>) -> Result<GaussParams> {
    let p = read_params(&need(params, "params")?)?;
    match dim {
        Some(d) => p.with_dim(d),
        None => Ok(p),
    }
}

fn sample_cmd(flags: &Flags<SampleArgs>) -> Result<()> {
    let a = flags.resolve()?;
    let p = sample_params(&a.params, a.dim)?;
    let seed = a.seed.unwrap_or(0);
    let spec = SampleSpec::new(p, need(&a.count, "count")?, seed)?;
    let e = sample(&spec);
    let prov = provenance(&a, Some(seed))?;
    if let Some(out) = &a.out {
        write_ensemble(&e, out, Some(&prov.line()))?;
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&Stamped {
            provenance: prov,
            body: ensemble_averages(&e, &InvariantId::ALL),
        })?
    );
    Ok(())
}

#[derive(Serialize)]
struct McTable {
    dim: usize,
    count: usize,
    records: Vec<wordmat::sampler::McRecord>,
}

fn mc_check(flags: &Flags<McArgs>) -> Result<()> {
    let a = flags.resolve()?;
    let p = sample_params(&a.params, a.dim)?;
    let seed = a.seed.unwrap_or(0);
    let count = need(&a.count, "count")?;
    let spec = SampleSpec::new(p, count, seed)?;
    let records = monte_carlo_check(&spec, &InvariantId::ALL);
    let prov = provenance(&a, Some(seed))?;
    match a.format.as_deref().unwrap_or("json") {
        "json" => emit_json(
            a.out.as_deref(),
            &Stamped {
                provenance: prov,
                body: McTable {
                    dim: p.dim(),
                    count,
                    records,
                },
            },
        ),
        "csv" => {
            let text = format!("# {}\n{}", prov.line(), mc_records_to_csv(&records));
            match &a.out {
                Some(o) => write_text(o, &text),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
        other => Err(Error::Config(format!("unknown format {other:?}; use json or csv"))),
    }
}

fn count_cmd(flags: &Flags<CountArgs>) -> Result<()> {
    let a = flags.resolve()?;
    let k = need(&a.k, "k")?;
    let dim = a.dim.unwrap_or(2 * k.max(1));
    println!("{}", count_invariants(dim, k)?);
    Ok(())
}

fn report(flags: &Flags<ReportArgs>) -> Result<()> {
    let a = flags.resolve()?;
    let p = read_params(&need(&a.params, "params")?)?;
    let e = read_ensemble(need(&a.ensemble, "ensemble")?)?;
    let r = moment_report(&p, &e)?;
    if let Some(out) = &a.out {
        write_json(
            out,
            &Stamped {
                provenance: provenance(&a, None)?,
                body: &r,
            },
        )?;
    }
    print!("{}", r.to_table());
    Ok(())
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidMatrix(_) => "invalid_matrix",
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::Parse { .. } => "parse",
        Error::InvalidParams(_) => "invalid_params",
        Error::IncompatibleAverages(_) => "incompatible_averages",
        Error::MissingAverage(_) => "missing_average",
        Error::Singular => "singular",
        Error::Diverged { .. } => "diverged",
        Error::Corpus(_) => "corpus",
        Error::UnknownWord(_) => "unknown_word",
        Error::Config(_) => "config",
        Error::Internal(_) => "internal",
        Error::Stage { .. } => "stage",
        Error::Io { .. } => "io",
        Error::Json(_) => "json",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => run(a),
        Command::SynthCorpus(f) => synth(f),
        Command::SelectDataset(f) => select(f),
        Command::BuildVectors(f) => build_vectors(f),
        Command::LearnMatrices(f) => learn(f),
        Command::Observables(f) => observables(f),
        Command::Fit(f) => fit_cmd(f),
        Command::Predict(f) => predict(f),
        Command::Sample(f) => sample_cmd(f),
        Command::McCheck(f) => mc_check(f),
        Command::CountInvariants(f) => count_cmd(f),
        Command::Report(f) => report(f),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut obj = json!({"error": error_kind(&e), "message": e.to_string()});
            if let Error::Stage { stage, .. } = &e {
                obj["stage"] = json!(stage);
            }
            eprintln!("{obj}");
            ExitCode::FAILURE
        }
    }
}
