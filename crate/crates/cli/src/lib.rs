//! Command implementations behind the `workbench` binary.
//!
//! Every command writes its primary output to `--out` when given and to the
//! supplied writer otherwise, so the pipeline can be driven in-process.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use workbench_core::cluster::{self, AlgorithmKind, ClusterError, ClusterParams, ClusterReport};
use workbench_core::features::{self, ExtractionConfig};
use workbench_core::fixtures::FixtureSpec;
use workbench_core::matrix::check::{verify_random, VerifyConfig};
use workbench_core::matrix::json::{self, AnyMatrix};
use workbench_core::matrix::sample::{random_matrix, random_unitriangular, SampleField};
use workbench_core::matrix::{
    cfast_invmx, fast_invmx, fast_mult_seqmx_with_cutoff, invmx, is_unitriangular, mul_seqmx, seqmx_of_mx,
    DEFAULT_CUTOFF,
};
use workbench_core::script::{self, Corpus, SOURCE_EXTENSION};
use workbench_core::{CountingField, PrimeField, Rationals};

pub const SEED_ENV: &str = "WORKBENCH_SEED";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Format(String),
    #[error("{0}")]
    Verification(String),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } | CliError::Format(_) => 3,
            CliError::Verification(_) => 4,
            CliError::Cluster(_) => 5,
        }
    }

    /// Stable identifier printed in the error line.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Format(_) => "format",
            CliError::Verification(_) => "verification",
            CliError::Cluster(e) => match e {
                ClusterError::BadGranularity(_) => "bad-granularity",
                ClusterError::TooFewPoints { .. } => "too-few-points",
                ClusterError::UnknownLemma(_) => "unknown-lemma",
                ClusterError::RaggedData { .. } | ClusterError::InvalidParams(_) => "cluster-params",
            },
        }
    }

    /// One line: `error[<code>]: <message>`.
    pub fn line(&self) -> String {
        let msg = self.to_string().replace('\n', " ");
        format!("error[{}]: {msg}", self.code())
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(io_err(path))
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(io_err(path)),
        None => stdout.write_all(text.as_bytes()).map_err(io_err(Path::new("<stdout>"))),
    }
}

#[derive(Debug, Parser)]
#[command(name = "workbench", version, about = "Exact matrix kernel and proof-pattern mining workbench")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse `.vp` proof scripts (files or directories) into corpus JSON.
    Parse(ParseArgs),
    /// Turn corpus JSON into a feature CSV.
    Extract(ExtractArgs),
    /// Cluster a feature CSV repeatedly and write a report.
    Cluster(ClusterArgs),
    /// List lemmas clustered with a query lemma.
    Suggest(SuggestArgs),
    /// Generate the synthetic fixture corpus.
    Fixtures(FixturesArgs),
    /// Matrix kernel checks and benchmarks.
    #[command(subcommand)]
    Matrix(MatrixCommand),
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    /// Source files or directories containing `.vp` files.
    pub inputs: Vec<PathBuf>,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    pub corpus: PathBuf,
    /// Number of proof steps encoded per lemma.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u16).range(1..))]
    pub steps: u16,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    pub features: PathBuf,
    #[arg(long, default_value = "kmeans-pp")]
    pub algorithm: AlgorithmKind,
    #[arg(long, default_value_t = 3)]
    pub granularity: u32,
    #[arg(long, default_value_t = 200)]
    pub runs: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.6)]
    pub freq_threshold: f64,
    #[arg(long, default_value_t = 0.5)]
    pub prox_threshold: f64,
    /// Worker threads for the independent runs; output does not depend on it.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SuggestArgs {
    pub report: PathBuf,
    #[arg(long)]
    pub lemma: String,
    /// Corpus JSON used to print each suggestion's statement.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FixturesArgs {
    #[arg(short, long)]
    pub out: PathBuf,
    /// Fixture spec JSON; the built-in spec is used when absent.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, env = SEED_ENV)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub noise_lemmas: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Q,
    Gfp,
}

#[derive(Debug, Subcommand)]
pub enum MatrixCommand {
    /// Check every kernel invariant on random matrices.
    Verify(VerifyArgs),
    /// Time kernel operations and count scalar multiplications.
    Bench(BenchArgs),
    /// Invert a matrix given in matrix JSON.
    Invert(InvertArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = FieldKind::Q)]
    pub field: FieldKind,
    #[arg(long, default_value_t = 101)]
    pub prime: u64,
    #[arg(long, default_value_t = 16)]
    pub max_size: usize,
    #[arg(long, default_value_t = 100)]
    pub cases: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 128, value_parser = clap::value_parser!(u64).range(1..))]
    pub size: u64,
    #[arg(long, value_enum, default_value_t = FieldKind::Gfp)]
    pub field: FieldKind,
    #[arg(long, default_value_t = 101)]
    pub prime: u64,
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    pub cutoff: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct InvertArgs {
    pub matrix: PathBuf,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Parse(a) => cmd_parse(&a, stdout),
        Command::Extract(a) => cmd_extract(&a, stdout),
        Command::Cluster(a) => cmd_cluster(&a, stdout),
        Command::Suggest(a) => cmd_suggest(&a, stdout),
        Command::Fixtures(a) => cmd_fixtures(&a, stdout),
        Command::Matrix(MatrixCommand::Verify(a)) => cmd_matrix_verify(&a, stdout),
        Command::Matrix(MatrixCommand::Bench(a)) => cmd_matrix_bench(&a, stdout),
        Command::Matrix(MatrixCommand::Invert(a)) => cmd_matrix_invert(&a, stdout),
    }
}

/// Expands directories to their `.vp` files, sorted by name.
fn source_files(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(input)
                .map_err(io_err(input))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == SOURCE_EXTENSION))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(input.clone());
        }
    }
    Ok(files)
}

pub fn parse_sources(inputs: &[PathBuf]) -> Result<Corpus, CliError> {
    if inputs.is_empty() {
        return Err(CliError::Usage("no input files given".into()));
    }
    let files = source_files(inputs)?;
    if files.is_empty() {
        return Err(CliError::Usage(format!("no .{SOURCE_EXTENSION} files found")));
    }
    let sources = files
        .iter()
        .map(|p| read(p).map(|text| (p.display().to_string(), text)))
        .collect::<Result<Vec<_>, _>>()?;
    script::parse_corpus(&sources).map_err(|e| CliError::Format(e.to_string()))
}

pub fn cmd_parse(a: &ParseArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let corpus = parse_sources(&a.inputs)?;
    let mut text = serde_json::to_string_pretty(&corpus).expect("corpus serializes");
    text.push('\n');
    emit(a.out.as_deref(), &text, stdout)
}

fn load_corpus(path: &Path) -> Result<Corpus, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Format(format!("{}: invalid corpus JSON: {e}", path.display())))
}

pub fn cmd_extract(a: &ExtractArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let corpus = load_corpus(&a.corpus)?;
    let table = features::extract_corpus(&corpus, &ExtractionConfig::with_steps(usize::from(a.steps)))
        .map_err(|e| CliError::Format(e.to_string()))?;
    emit(a.out.as_deref(), &features::write_features(&table), stdout)
}

pub fn cmd_cluster(a: &ClusterArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let table = features::read_features(&read(&a.features)?)
        .map_err(|e| CliError::Format(format!("{}: {e}", a.features.display())))?;
    let params = ClusterParams {
        algorithm: a.algorithm,
        granularity: a.granularity,
        runs: a.runs,
        master_seed: a.seed,
        freq_threshold: a.freq_threshold,
        prox_threshold: a.prox_threshold,
        ..ClusterParams::default()
    };
    let report = cluster::run_repeated(&table, &params, a.jobs)?;
    emit(a.out.as_deref(), &report.to_json(), stdout)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuggestionEntry {
    pub lemma: String,
    pub statement: Option<String>,
    pub frequency: f64,
    pub proximity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuggestionView {
    pub query: String,
    pub entries: Vec<SuggestionEntry>,
}

impl SuggestionView {
    /// One entry per suggested lemma, keeping the first (highest ranked)
    /// cluster a lemma appears in.
    pub fn build(report: &ClusterReport, query: &str, corpus: Option<&Corpus>) -> Result<Self, ClusterError> {
        let mut entries: Vec<SuggestionEntry> = Vec::new();
        for s in cluster::suggest(report, query)? {
            for lemma in s.lemmas {
                if entries.iter().any(|e| e.lemma == lemma) {
                    continue;
                }
                entries.push(SuggestionEntry {
                    statement: corpus.and_then(|c| c.lemma(&lemma)).map(|l| l.statement_text()),
                    lemma,
                    frequency: s.frequency,
                    proximity: s.proximity,
                });
            }
        }
        Ok(SuggestionView {
            query: query.to_string(),
            entries,
        })
    }

    pub fn render(&self) -> String {
        let mut s = format!("Suggestions for Lemma {}:\n", self.query);
        if self.entries.is_empty() {
            s.push_str("no suggestions pass thresholds\n");
        }
        for e in &self.entries {
            s.push_str(&format!(
                "  {}  frequency={:.3} proximity={:.3}",
                e.lemma, e.frequency, e.proximity
            ));
            if let Some(st) = &e.statement {
                s.push_str(&format!("  : {st}"));
            }
            s.push('\n');
        }
        s
    }
}

pub fn cmd_suggest(a: &SuggestArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let report: ClusterReport = serde_json::from_str(&read(&a.report)?)
        .map_err(|e| CliError::Format(format!("{}: invalid report JSON: {e}", a.report.display())))?;
    let corpus = a.corpus.as_deref().map(load_corpus).transpose()?;
    let view = SuggestionView::build(&report, &a.lemma, corpus.as_ref())?;
    emit(None, &view.render(), stdout)
}

pub fn cmd_fixtures(a: &FixturesArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut spec = match &a.spec {
        Some(path) => serde_json::from_str(&read(path)?)
            .map_err(|e| CliError::Format(format!("{}: invalid fixture spec: {e}", path.display())))?,
        None => FixtureSpec::default(),
    };
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    if let Some(n) = a.noise_lemmas {
        spec.noise_lemmas = n;
    }
    let files = spec.generate().map_err(|e| CliError::Usage(e.to_string()))?;
    fs::create_dir_all(&a.out).map_err(io_err(&a.out))?;
    for (name, text) in &files {
        let path = a.out.join(name);
        fs::write(&path, text).map_err(io_err(&path))?;
    }
    let summary = format!(
        "wrote {} lemmas in {} files to {}\n",
        spec.total_lemmas(),
        files.len(),
        a.out.display()
    );
    emit(None, &summary, stdout)
}

fn prime_field(p: u64) -> Result<PrimeField, CliError> {
    PrimeField::new(p).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn cmd_matrix_verify(a: &VerifyArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = VerifyConfig {
        max_size: a.max_size,
        cases: a.cases,
        seed: a.seed,
    };
    let (label, tally) = match a.field {
        FieldKind::Q => ("Q".to_string(), verify_random(&Rationals::new(), cfg)),
        FieldKind::Gfp => (format!("GF({})", a.prime), verify_random(&prime_field(a.prime)?, cfg)),
    };
    let width = tally.outcomes().iter().map(|o| o.name.len()).max().unwrap_or(0);
    let mut text = format!(
        "field {label}, {} cases, sizes 0..={}, seed {}\n",
        a.cases, a.max_size, a.seed
    );
    text.push_str(&format!("{:<width$}  {:>7}  {:>6}  status\n", "invariant", "checked", "failed"));
    for o in tally.outcomes() {
        let status = if o.passed() { "pass" } else { "FAIL" };
        text.push_str(&format!("{:<width$}  {:>7}  {:>6}  {status}\n", o.name, o.checked, o.failed));
    }
    emit(None, &text, stdout)?;
    if tally.all_passed() {
        Ok(())
    } else {
        let failed: Vec<&str> = tally.outcomes().iter().filter(|o| !o.passed()).map(|o| o.name).collect();
        Err(CliError::Verification(format!("invariants failed: {}", failed.join("; "))))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub operation: &'static str,
    pub millis: f64,
    pub multiplications: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub field: String,
    pub size: usize,
    pub cutoff: usize,
    pub seed: u64,
    pub results: Vec<BenchRow>,
}

fn measure<T>(operation: &'static str, f: impl FnOnce() -> (T, u64)) -> BenchRow {
    let start = Instant::now();
    let (_, multiplications) = f();
    BenchRow {
        operation,
        millis: start.elapsed().as_secs_f64() * 1e3,
        multiplications,
    }
}

fn bench_field<F: SampleField>(field: &F, n: usize, cutoff: usize, seed: u64) -> Vec<BenchRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_unitriangular(field, n, &mut rng);
    let a = random_matrix(field, n, &mut rng);
    let b = random_matrix(field, n, &mut rng);
    let (su, sa, sb) = (seqmx_of_mx(&u), seqmx_of_mx(&a), seqmx_of_mx(&b));
    vec![
        measure("cfast_invmx", || {
            let c = CountingField::new(field);
            (cfast_invmx(&c, &su).expect("unitriangular"), c.multiplications())
        }),
        measure("invmx", || {
            let c = CountingField::new(field);
            (invmx(&c, &u).expect("invertible"), c.multiplications())
        }),
        measure("mul_seqmx", || {
            let c = CountingField::new(field);
            (mul_seqmx(&c, &sa, &sb).expect("square"), c.multiplications())
        }),
        measure("fast_mult_seqmx", || {
            let c = CountingField::new(field);
            (fast_mult_seqmx_with_cutoff(&c, &sa, &sb, cutoff).expect("square"), c.multiplications())
        }),
    ]
}

pub fn bench(field: FieldKind, prime: u64, size: usize, cutoff: usize, seed: u64) -> Result<BenchReport, CliError> {
    let (label, results) = match field {
        FieldKind::Q => ("Q".to_string(), bench_field(&Rationals::new(), size, cutoff, seed)),
        FieldKind::Gfp => (format!("GF({prime})"), bench_field(&prime_field(prime)?, size, cutoff, seed)),
    };
    Ok(BenchReport {
        field: label,
        size,
        cutoff,
        seed,
        results,
    })
}

pub fn cmd_matrix_bench(a: &BenchArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let size = usize::try_from(a.size).map_err(|_| CliError::Usage("size too large".into()))?;
    let report = bench(a.field, a.prime, size, a.cutoff, a.seed)?;
    let text = if a.json {
        let mut s = serde_json::to_string_pretty(&report).expect("bench report serializes");
        s.push('\n');
        s
    } else {
        let mut s = format!("field {}, size {}, cutoff {}\n", report.field, report.size, report.cutoff);
        s.push_str(&format!("{:<16}  {:>12}  {:>16}\n", "operation", "time (ms)", "multiplications"));
        for r in &report.results {
            s.push_str(&format!("{:<16}  {:>12.3}  {:>16}\n", r.operation, r.millis, r.multiplications));
        }
        s
    };
    emit(None, &text, stdout)
}

pub fn cmd_matrix_invert(a: &InvertArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let m = json::from_json(&read(&a.matrix)?).map_err(|e| CliError::Format(format!("{}: {e}", a.matrix.display())))?;
    let singular = |e| CliError::Format(format!("{}: {e}", a.matrix.display()));
    let inverse = match m {
        AnyMatrix::Rational(m) => {
            let f = Rationals::new();
            let inv = if is_unitriangular(&f, &m) { fast_invmx(&f, &m) } else { invmx(&f, &m) };
            AnyMatrix::Rational(inv.map_err(singular)?)
        }
        AnyMatrix::PrimeField(f, m) => {
            let inv = if is_unitriangular(&f, &m) { fast_invmx(&f, &m) } else { invmx(&f, &m) };
            AnyMatrix::PrimeField(f, inv.map_err(singular)?)
        }
    };
    let mut text = json::to_json(&inverse);
    text.push('\n');
    emit(a.out.as_deref(), &text, stdout)
}
