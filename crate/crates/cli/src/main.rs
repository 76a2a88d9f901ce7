//! `qaconcur` command-line tool.
//!
//! Exit status: 0 on success, 1 on validation or runtime failure, 2 on
//! usage errors (bad flags, unknown config keys).

mod config;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qaconcur::concurrence::{concur, concurrence_matrix, scatter_csv, RunPolicy, ScoreTable, Subset};
use qaconcur::converters::{
    convert_babi, convert_cloze, normalize_nq_split, parse_cbt, parse_cloze_jsonl, parse_cnn_question,
    parse_lambada, parse_qamr_jsonl, qamr_reconstruct, read_babi, downsample_split, ClozeExample,
    ConversionReport, DEFAULT_MASK,
};
use qaconcur::fuzzypm::{
    generate_fuzzypm, load_neighbor_index, CorruptionConfig, FuzzyPmConfig, PassageSourceSpec, Vocabulary,
};
use qaconcur::metrics::{evaluate, PredictionSet};
use qaconcur::qa_dataset::{load_mrqa_jsonl, load_squad_json, save_squad_json, stats, ExtractiveBenchmark, Split};
use qaconcur::wikidata::{generate_wikidata_qa, load_graph, NeighborMode, PageRankConfig, QuestionConfig, WikidataConfig};

use manifest::{manifest_path_for, write_file, RunManifest};

#[derive(Parser, Debug)]
#[command(name = "qaconcur", version, about = "Benchmark concurrence and benchmark construction for extractive QA")]
struct Cli {
    /// `key = value` file; keys are namespaced by subcommand, e.g. `downsample.n`.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// More logging (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert a source dataset to SQuAD JSON.
    #[command(subcommand)]
    Convert(ConvertCmd),
    /// Generate a synthetic benchmark.
    #[command(subcommand)]
    Generate(GenerateCmd),
    /// Seeded subset of a training file.
    Downsample(DownsampleArgs),
    /// Exact match of predictions against a gold file.
    Evaluate(EvaluateArgs),
    /// Concurrence of two benchmarks from a score table.
    Concur(ConcurArgs),
    /// Pairwise concurrence matrix over score-table columns.
    Matrix(MatrixArgs),
    /// Corpus statistics of a dataset file.
    Stats(StatsArgs),
}

#[derive(Subcommand, Debug)]
enum ConvertCmd {
    Cloze(ClozeArgs),
    Babi(BabiArgs),
    Qamr(QamrArgs),
    NqHtml(NqArgs),
}

#[derive(Subcommand, Debug)]
enum GenerateCmd {
    Fuzzypm(FuzzyArgs),
    Wikidata(WikidataArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ClozeFormat {
    /// One JSON object per line.
    Jsonl,
    /// Children's Book Test text files.
    Cbt,
    /// One CNN `.question` file per input.
    Cnn,
    /// LAMBADA text, one passage per line.
    Lambada,
}

#[derive(Args, Debug, Serialize)]
struct ClozeArgs {
    #[arg(long = "in", required = true, action = clap::ArgAction::Append)]
    input: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "jsonl")]
    format: ClozeFormat,
    /// Mask literal; defaults to `@placeholder` for CNN and `XXXXX` otherwise.
    #[arg(long)]
    mask: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct BabiArgs {
    #[arg(long = "in", required = true, action = clap::ArgAction::Append)]
    input: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct QamrArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct NqArgs {
    /// SQuAD JSON, or MRQA JSONL when the name ends in `.jsonl`.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SourceKind {
    Uniform,
    Corpus,
    Ngram,
}

#[derive(Args, Debug, Serialize)]
struct FuzzyArgs {
    /// One token per line.
    #[arg(long)]
    vocab: PathBuf,
    /// Text embeddings: token followed by floats.
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long, value_enum, default_value = "uniform")]
    source: SourceKind,
    /// Paragraph file for the corpus and ngram sources.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    ngram_order: usize,
    #[arg(long, default_value_t = 2000)]
    n_passages: usize,
    #[arg(long, default_value_t = 5)]
    questions_per_passage: usize,
    #[arg(long, default_value_t = 150)]
    passage_len: usize,
    #[arg(long, default_value_t = 10)]
    window: usize,
    #[arg(long, default_value_t = 100)]
    k: usize,
    #[arg(long, default_value_t = 0.3)]
    replace_prob: f64,
    #[arg(long, default_value_t = 3)]
    permute_window: usize,
    #[arg(long, default_value_t = 0.2)]
    dropout: f64,
    #[arg(long, default_value = DEFAULT_MASK)]
    mask: String,
    #[arg(long, env = "QACONCUR_SEED", default_value_t = 0)]
    seed: u64,
    /// Receives train.json, dev.json and manifest.json.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Neighbors {
    Undirected,
    Outgoing,
}

#[derive(Args, Debug, Serialize)]
struct WikidataArgs {
    #[arg(long)]
    entities: PathBuf,
    #[arg(long)]
    properties: PathBuf,
    #[arg(long)]
    triples: PathBuf,
    #[arg(long, default_value_t = 10000)]
    n_train: usize,
    #[arg(long, default_value_t = 9835)]
    n_dev: usize,
    #[arg(long, default_value_t = 1)]
    train_min_questions: usize,
    #[arg(long, default_value_t = 5)]
    train_max_questions: usize,
    #[arg(long, default_value_t = 5)]
    dev_questions: usize,
    #[arg(long, default_value_t = 50)]
    n_triples: usize,
    #[arg(long, default_value_t = 10000)]
    pool: usize,
    #[arg(long, value_enum, default_value = "undirected")]
    neighbors: Neighbors,
    #[arg(long, default_value_t = 0.5)]
    inverse_prob: f64,
    #[arg(long, default_value_t = 0.5)]
    hypernym_prob: f64,
    #[arg(long, default_value_t = 0.85)]
    damping: f64,
    #[arg(long, default_value = ".")]
    delimiter: String,
    #[arg(long, default_value = DEFAULT_MASK)]
    mask: String,
    #[arg(long, env = "QACONCUR_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct DownsampleArgs {
    /// SQuAD JSON training file.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long, env = "QACONCUR_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct EvaluateArgs {
    /// SQuAD JSON or MRQA JSONL gold file.
    #[arg(long)]
    gold: PathBuf,
    /// JSON object mapping question id to predicted answer.
    #[arg(long)]
    predictions: PathBuf,
    /// Fail when a gold question has no prediction.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    per_example: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct ConcurArgs {
    #[arg(long)]
    scores: PathBuf,
    #[arg(long)]
    a: String,
    #[arg(long)]
    b: String,
    #[arg(long, default_value = "all")]
    subset: String,
    #[arg(long, default_value = "best")]
    policy: String,
    /// Per-approach scatter CSV.
    #[arg(long)]
    scatter: Option<PathBuf>,
    /// JSON report.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct MatrixArgs {
    #[arg(long)]
    scores: PathBuf,
    /// Columns to include (default: all).
    #[arg(long, action = clap::ArgAction::Append, value_delimiter = ',')]
    benchmarks: Vec<String>,
    #[arg(long, default_value = "all")]
    subset: String,
    #[arg(long, default_value = "best")]
    policy: String,
    /// Receives tau.csv, r.csv and manifest.json.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct StatsArgs {
    /// Training file (SQuAD JSON or MRQA JSONL).
    #[arg(long = "in")]
    input: PathBuf,
    /// Optional dev file.
    #[arg(long)]
    dev: Option<PathBuf>,
}

fn load_split(path: &Path) -> Result<Split> {
    let split = if path.extension().is_some_and(|e| e == "jsonl") {
        load_mrqa_jsonl(path)?
    } else {
        load_squad_json(path)?
    };
    Ok(split)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "input".into(), |s| s.to_string_lossy().into_owned())
}

/// Save a converted split, print the report, and write the manifest.
fn finish_conversion(
    command: &str,
    args: &impl Serialize,
    inputs: &[PathBuf],
    out: &Path,
    split: &Split,
    report: &ConversionReport,
) -> Result<()> {
    save_squad_json(split, out)?;
    eprintln!(
        "{command}: {} in, {} out, {} skipped",
        report.n_input,
        report.n_output,
        report.skipped.len()
    );
    let mut m = RunManifest::new(command, args, None).report(report);
    for p in inputs {
        m.input(p)?;
    }
    m.output(out)?;
    m.write(&manifest_path_for(out))
}

fn run_cloze(a: &ClozeArgs) -> Result<()> {
    let mask = a.mask.clone().unwrap_or_else(|| match a.format {
        ClozeFormat::Cnn => "@placeholder".into(),
        _ => DEFAULT_MASK.into(),
    });
    let mut examples: Vec<ClozeExample> = Vec::new();
    for p in &a.input {
        let text = read(p)?;
        let prefix = stem(p);
        match a.format {
            ClozeFormat::Jsonl => examples.extend(parse_cloze_jsonl(&text, p, &prefix)?),
            ClozeFormat::Cbt => examples.extend(parse_cbt(&text, p, &prefix)?),
            ClozeFormat::Cnn => examples.push(parse_cnn_question(&text, &prefix)?),
            ClozeFormat::Lambada => examples.extend(parse_lambada(&text, &prefix, &mask)),
        }
    }
    let (split, report) = convert_cloze(&examples, &mask);
    finish_conversion("convert cloze", a, &a.input, &a.out, &split, &report)
}

fn run_babi(a: &BabiArgs) -> Result<()> {
    let mut examples = Vec::new();
    for p in &a.input {
        examples.extend(read_babi(p, &stem(p))?);
    }
    let (split, report) = convert_babi(&examples);
    finish_conversion("convert babi", a, &a.input, &a.out, &split, &report)
}

fn run_qamr(a: &QamrArgs) -> Result<()> {
    let items = parse_qamr_jsonl(&read(&a.input)?, &a.input)?;
    let (split, report) = qamr_reconstruct(&items)?;
    finish_conversion("convert qamr", a, std::slice::from_ref(&a.input), &a.out, &split, &report)
}

fn run_nq(a: &NqArgs) -> Result<()> {
    let split = load_split(&a.input)?;
    let out = normalize_nq_split(&split);
    let n = out.num_qas();
    let report = ConversionReport {
        n_input: n,
        n_output: n,
        skipped: Vec::new(),
    };
    finish_conversion("convert nq-html", a, std::slice::from_ref(&a.input), &a.out, &out, &report)
}

fn save_benchmark(b: &ExtractiveBenchmark, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let (train, dev) = (dir.join("train.json"), dir.join("dev.json"));
    save_squad_json(&b.train, &train)?;
    save_squad_json(&b.dev, &dev)?;
    Ok((train, dev))
}

#[derive(Serialize)]
struct GenerationSummary {
    train_passages: usize,
    train_questions: usize,
    dev_passages: usize,
    dev_questions: usize,
}

fn summary(b: &ExtractiveBenchmark) -> GenerationSummary {
    GenerationSummary {
        train_passages: b.train.paragraphs.len(),
        train_questions: b.train.num_qas(),
        dev_passages: b.dev.paragraphs.len(),
        dev_questions: b.dev.num_qas(),
    }
}

fn run_fuzzypm(a: &FuzzyArgs) -> Result<()> {
    let vocab = Vocabulary::load(&a.vocab)?;
    let index = load_neighbor_index(&a.embeddings, &vocab, a.k)?;
    if !index.zero_vectors.is_empty() {
        log::warn!("{} tokens with zero vectors excluded", index.zero_vectors.len());
    }
    let corpus = || a.corpus.as_deref().context("--corpus is required for this source");
    let source = match a.source {
        SourceKind::Uniform => PassageSourceSpec::uniform(vocab.clone(), a.passage_len),
        SourceKind::Corpus => PassageSourceSpec::load_corpus(corpus()?, a.passage_len)?,
        SourceKind::Ngram => PassageSourceSpec::load_ngram(corpus()?, a.ngram_order, a.passage_len)?,
    };
    let config = FuzzyPmConfig {
        n_passages: a.n_passages,
        questions_per_passage: a.questions_per_passage,
        window: a.window,
        corruption: CorruptionConfig {
            replace_prob: a.replace_prob,
            neighbor_k: a.k,
            permute_window: a.permute_window,
            dropout_rate: a.dropout,
            mask_token: a.mask.clone(),
        },
        seed: a.seed,
    };
    let bench = generate_fuzzypm(&config, &source, &index)?;
    let (train, dev) = save_benchmark(&bench, &a.out_dir)?;
    let mut m = RunManifest::new("generate fuzzypm", a, Some(a.seed)).report(&summary(&bench));
    m.input(&a.vocab)?;
    m.input(&a.embeddings)?;
    if let Some(c) = &a.corpus {
        m.input(c)?;
    }
    m.output(&train)?;
    m.output(&dev)?;
    m.write(&a.out_dir.join("manifest.json"))?;
    eprintln!("generate fuzzypm: {} train / {} dev questions", bench.train.num_qas(), bench.dev.num_qas());
    Ok(())
}

fn run_wikidata(a: &WikidataArgs) -> Result<()> {
    let graph = load_graph(&a.entities, &a.properties, &a.triples)?;
    let config = WikidataConfig {
        n_train: a.n_train,
        n_dev: a.n_dev,
        train_questions: (a.train_min_questions, a.train_max_questions),
        dev_questions: (a.dev_questions, a.dev_questions),
        n_triples: a.n_triples,
        pool: a.pool,
        neighbors: match a.neighbors {
            Neighbors::Undirected => NeighborMode::Undirected,
            Neighbors::Outgoing => NeighborMode::Outgoing,
        },
        delimiter: a.delimiter.clone(),
        question: QuestionConfig {
            inverse_prob: a.inverse_prob,
            hypernym_prob: a.hypernym_prob,
            mask_token: a.mask.clone(),
        },
        pagerank: PageRankConfig {
            damping: a.damping,
            ..Default::default()
        },
        seed: a.seed,
        ..Default::default()
    };
    let bench = generate_wikidata_qa(&graph, &config)?;
    let (train, dev) = save_benchmark(&bench, &a.out_dir)?;
    let mut m = RunManifest::new("generate wikidata", a, Some(a.seed)).report(&serde_json::json!({
        "graph": graph.report,
        "generated": summary(&bench),
    }));
    m.input(&a.entities)?;
    m.input(&a.properties)?;
    m.input(&a.triples)?;
    m.output(&train)?;
    m.output(&dev)?;
    m.write(&a.out_dir.join("manifest.json"))?;
    eprintln!("generate wikidata: {} train / {} dev questions", bench.train.num_qas(), bench.dev.num_qas());
    Ok(())
}

fn run_downsample(a: &DownsampleArgs) -> Result<()> {
    let split = load_squad_json(&a.input)?;
    let out = downsample_split(&split, a.n, a.seed)?;
    save_squad_json(&out, &a.out)?;
    let mut m = RunManifest::new("downsample", a, Some(a.seed));
    m.input(&a.input)?;
    m.output(&a.out)?;
    m.write(&manifest_path_for(&a.out))?;
    eprintln!("downsample: kept {} of {} questions", out.num_qas(), split.num_qas());
    Ok(())
}

fn run_evaluate(a: &EvaluateArgs) -> Result<()> {
    let gold = load_split(&a.gold)?;
    let preds = PredictionSet::load(&a.predictions)?;
    let res = evaluate(&preds, &gold, a.strict, a.per_example)?;
    let text = serde_json::to_string_pretty(&res)? + "\n";
    print!("{text}");
    if let Some(out) = &a.out {
        write_file(out, &text)?;
        let mut m = RunManifest::new("evaluate", a, None);
        m.input(&a.gold)?;
        m.input(&a.predictions)?;
        m.output(out)?;
        m.write(&manifest_path_for(out))?;
    }
    Ok(())
}

fn run_concur(a: &ConcurArgs) -> Result<()> {
    let table = ScoreTable::load_csv(&a.scores)?;
    let subset: Subset = a.subset.parse()?;
    let policy: RunPolicy = a.policy.parse()?;
    let rep = concur(&table, &a.a, &a.b, subset, policy)?;
    println!("benchmark_a\t{}", rep.benchmark_a);
    println!("benchmark_b\t{}", rep.benchmark_b);
    println!("pearson_r\t{:.4}", rep.pearson_r);
    println!("kendall_tau\t{:.4}", rep.kendall_tau);
    println!("n\t{}", rep.n);
    let mut m = RunManifest::new("concur", a, None);
    m.input(&a.scores)?;
    let mut wrote = None;
    if let Some(p) = &a.scatter {
        write_file(p, &scatter_csv(&rep))?;
        m.output(p)?;
        wrote = Some(p);
    }
    if let Some(p) = &a.out {
        write_file(p, &(serde_json::to_string_pretty(&rep)? + "\n"))?;
        m.output(p)?;
        wrote = Some(p);
    }
    if let Some(p) = wrote {
        m.write(&manifest_path_for(p))?;
    }
    Ok(())
}

fn run_matrix(a: &MatrixArgs) -> Result<()> {
    let table = ScoreTable::load_csv(&a.scores)?;
    let subset: Subset = a.subset.parse()?;
    let policy: RunPolicy = a.policy.parse()?;
    let names = (!a.benchmarks.is_empty()).then_some(a.benchmarks.as_slice());
    let mat = concurrence_matrix(&table, names, subset, policy)?;
    let (tau, r) = (a.out_dir.join("tau.csv"), a.out_dir.join("r.csv"));
    write_file(&tau, &mat.tau_csv())?;
    write_file(&r, &mat.r_csv())?;
    let mut m = RunManifest::new("matrix", a, None);
    m.input(&a.scores)?;
    m.output(&tau)?;
    m.output(&r)?;
    m.write(&a.out_dir.join("manifest.json"))?;
    eprintln!("matrix: {} benchmarks", mat.benchmarks.len());
    Ok(())
}

fn run_stats(a: &StatsArgs) -> Result<()> {
    let train = load_split(&a.input)?;
    let dev = a.dev.as_deref().map(load_split).transpose()?.unwrap_or_default();
    let b = ExtractiveBenchmark::new(stem(&a.input), train, dev);
    println!("{}", serde_json::to_string_pretty(&stats(&b))?);
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Convert(ConvertCmd::Cloze(a)) => run_cloze(a),
        Command::Convert(ConvertCmd::Babi(a)) => run_babi(a),
        Command::Convert(ConvertCmd::Qamr(a)) => run_qamr(a),
        Command::Convert(ConvertCmd::NqHtml(a)) => run_nq(a),
        Command::Generate(GenerateCmd::Fuzzypm(a)) => run_fuzzypm(a),
        Command::Generate(GenerateCmd::Wikidata(a)) => run_wikidata(a),
        Command::Downsample(a) => run_downsample(a),
        Command::Evaluate(a) => run_evaluate(a),
        Command::Concur(a) => run_concur(a),
        Command::Matrix(a) => run_matrix(a),
        Command::Stats(a) => run_stats(a),
    }
}

fn parse_args() -> std::result::Result<Cli, ExitCode> {
    let cmd = Cli::command();
    let argv = match config::merge_config(&cmd, std::env::args_os().collect()) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e:#}");
            return Err(ExitCode::from(2));
        }
    };
    let matches = cmd.try_get_matches_from(argv).map_err(|e| {
        let code = e.exit_code();
        let _ = e.print();
        ExitCode::from(code as u8)
    })?;
    Cli::from_arg_matches(&matches).map_err(|e| {
        let _ = e.print();
        ExitCode::from(2)
    })
}

fn main() -> ExitCode {
    let cli = match parse_args() {
        Ok(c) => c,
        Err(code) => return code,
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if let Some(core) = e.downcast_ref::<qaconcur::Error>() {
                if core.is_validation() {
                    eprintln!("validation failed");
                }
            }
            ExitCode::from(1)
        }
    }
}
