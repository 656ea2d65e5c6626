//! Command implementations behind the `rumour` binary: memory building,
//! training, detection, evaluation, ablation, benchmarking, and synthetic
//! corpus generation.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, Context};

use rumour_core::config::{RunConfig, WindowLength};
use rumour_core::detect::{run_stream, DetectOptions, Detector, VERDICT_HEADER};
use rumour_core::eval::{
    self, AblationReport, BenchReport, DetCurve, GroupSpec, PreparedMessage, TrainSettings,
};
use rumour_core::features::{manifest_text, LexiconPack, PosTagger};
use rumour_core::ingest::{self, tokenize, Label, Message, NewsArticle, TokenizedDoc};
use rumour_core::model::{Model, TrainReport};
use rumour_core::novelty::{build_subdoc_index, KtermMemory, TrustedMemory};
use rumour_core::synth::{self, SynthConfig};
use rumour_core::textstats::{average_message_length, Vocabulary};

/// Errors split by exit code: usage errors exit 1, data errors exit 2.
#[derive(Debug)]
pub enum AppError {
    Usage(String),
    Data(anyhow::Error),
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Usage(msg) => write!(f, "{msg}"),
            AppError::Data(err) => write!(f, "{err:#}"),
        }
    }
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Data(_) => 2,
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for AppError {
    fn from(e: E) -> Self {
        AppError::Data(e.into())
    }
}

pub type AppResult<T> = Result<T, AppError>;

pub fn usage(msg: impl Into<String>) -> AppError {
    AppError::Usage(msg.into())
}

/// Lexicons and tagger from the configured directory; empty when unset.
fn load_lexicons(cfg: &RunConfig) -> AppResult<(LexiconPack, PosTagger)> {
    match &cfg.paths.lexicons {
        Some(dir) => Ok((LexiconPack::load(dir)?, PosTagger::load(dir)?)),
        None => Ok((LexiconPack::default(), PosTagger::default())),
    }
}

/// When a manifest path is configured, the file must match the built-in
/// feature manifest exactly.
fn check_manifest(cfg: &RunConfig) -> AppResult<()> {
    if let Some(path) = &cfg.paths.manifest {
        let on_disk = std::fs::read_to_string(path)
            .with_context(|| format!("reading manifest {}", path.display()))?;
        if on_disk != manifest_text() {
            return Err(AppError::Data(anyhow!(
                "feature manifest {} does not match this build; regenerate it",
                path.display()
            )));
        }
    }
    Ok(())
}

fn tokenize_article(article: &NewsArticle, cfg: &RunConfig) -> TokenizedDoc {
    let text = format!("{} {}", article.title, article.text);
    tokenize(&text, cfg.tokenizer, article.id.clone())
}

fn read_labeled_stream(path: &Path, strict: bool) -> AppResult<Vec<Message>> {
    let reader = ingest::open_stream(path, strict)?;
    let messages: Result<Vec<Message>, _> = reader.collect();
    Ok(messages?)
}

#[derive(Debug)]
pub struct BuildSummary {
    pub articles: usize,
    pub vocab_terms: usize,
    pub window_length: u32,
    pub windows: usize,
    pub inserted_kterms: [u64; 3],
}

/// Build the trusted memory (vocabulary, kterm Bloom filters, sub-document
/// index) from a news corpus and write it to one file. `stream` is only
/// needed when the window length is `auto`.
pub fn cmd_build_memory(
    cfg: &RunConfig,
    news: &Path,
    out: &Path,
    stream: Option<&Path>,
) -> AppResult<BuildSummary> {
    let articles = ingest::load_news_corpus(news)?;
    if articles.is_empty() {
        return Err(AppError::Data(anyhow!(
            "news corpus {} is empty",
            news.display()
        )));
    }
    let docs: Vec<TokenizedDoc> = articles.iter().map(|a| tokenize_article(a, cfg)).collect();
    let vocab = Vocabulary::build(&docs)?;

    let window_length = match cfg.window.length {
        WindowLength::Fixed(n) => n,
        WindowLength::Auto => {
            let stream = stream.ok_or_else(|| {
                usage("window.length = \"auto\" requires --stream to measure message length")
            })?;
            let messages = read_labeled_stream(stream, false)?;
            let docs: Vec<TokenizedDoc> = messages
                .iter()
                .map(|m| tokenize(&m.text, cfg.tokenizer, m.id.clone()))
                .collect();
            average_message_length(&docs)?
        }
    };

    let mut kterms = KtermMemory::new(cfg.bloom.m, cfg.bloom.h, cfg.bloom.seed_pair());
    for doc in &docs {
        kterms.insert_document(&doc.unique_terms);
    }
    let inserted_kterms = [
        kterms.filter(1).inserted_count(),
        kterms.filter(2).inserted_count(),
        kterms.filter(3).inserted_count(),
    ];
    let index = build_subdoc_index(
        &docs,
        &vocab,
        window_length,
        cfg.window.stride,
        cfg.window.keep_top_terms,
    );
    let summary = BuildSummary {
        articles: articles.len(),
        vocab_terms: vocab.len(),
        window_length,
        windows: index.windows().len(),
        inserted_kterms,
    };
    let memory = TrustedMemory {
        vocab,
        kterms,
        index,
    };
    memory.save(out)?;
    Ok(summary)
}

fn prepare_labeled(
    cfg: &RunConfig,
    memory: &TrustedMemory,
    lexicons: &LexiconPack,
    tagger: &PosTagger,
    path: &Path,
) -> AppResult<Vec<PreparedMessage>> {
    let messages = read_labeled_stream(path, true)?;
    for m in &messages {
        if m.label.is_none() {
            return Err(AppError::Data(anyhow!(
                "message {} in {} has no label",
                m.id,
                path.display()
            )));
        }
    }
    Ok(eval::prepare_messages(
        &messages,
        memory,
        lexicons,
        tagger,
        cfg.tokenizer,
        cfg.keyword_idf,
    )?)
}

fn train_settings(cfg: &RunConfig) -> TrainSettings {
    TrainSettings {
        pf_capacity: cfg.pf.k,
        pf_policy: cfg.pf.threshold.to_policy(),
        svm: cfg.svm,
        joint_round2: cfg.joint_round2,
    }
}

/// Two-round training over a labeled chronological stream; writes the
/// model file and optionally a human-readable weight export.
pub fn cmd_train(
    cfg: &RunConfig,
    memory_path: &Path,
    stream_path: &Path,
    model_out: &Path,
    weights_csv: Option<&Path>,
) -> AppResult<(Model, TrainReport)> {
    check_manifest(cfg)?;
    let memory = TrustedMemory::load(memory_path)?;
    let (lexicons, tagger) = load_lexicons(cfg)?;
    let prepared = prepare_labeled(cfg, &memory, &lexicons, &tagger, stream_path)?;
    let examples = eval::to_train_examples(&prepared)?;
    let settings = train_settings(cfg);
    let (model, report) = rumour_core::model::train_two_rounds(
        &examples,
        settings.pf_capacity,
        settings.pf_policy,
        &settings.svm,
        settings.joint_round2,
    )?;
    model.save(model_out)?;
    if let Some(path) = weights_csv {
        std::fs::write(path, model.weights_csv())?;
    }
    Ok((model, report))
}

#[derive(Debug)]
pub struct DetectSummary {
    pub verdicts: usize,
    pub rumours: usize,
    pub skipped: u64,
    pub disorder_warnings: u64,
}

/// Single-pass detection over a stream file, writing one verdict line per
/// message as it is scored.
pub fn cmd_detect(
    cfg: &RunConfig,
    memory_path: &Path,
    model_path: &Path,
    stream_path: &Path,
    out: &Path,
    debug_features: bool,
    strict_order: bool,
) -> AppResult<DetectSummary> {
    check_manifest(cfg)?;
    let memory = TrustedMemory::load(memory_path)?;
    let model = Model::load(model_path)?;
    let (lexicons, tagger) = load_lexicons(cfg)?;
    let opts = DetectOptions {
        tokenizer: cfg.tokenizer,
        on_error: cfg.on_error,
        debug_features,
        accumulate_stream: cfg.accumulate_stream,
        keyword_idf: cfg.keyword_idf,
    };
    let mut detector = Detector::new(&model, &memory, &lexicons, &tagger, opts);
    let mut reader = ingest::open_stream(stream_path, strict_order)?;
    let mut writer = BufWriter::new(File::create(out)?);
    writeln!(writer, "{VERDICT_HEADER}")?;
    let mut verdicts = 0usize;
    let mut rumours = 0usize;
    for verdict in run_stream(&mut detector, &mut reader) {
        let verdict = verdict?;
        rumour_core::detect::write_verdict(&mut writer, &verdict)?;
        verdicts += 1;
        rumours += usize::from(verdict.label == Label::Rumour);
    }
    writer.flush()?;
    Ok(DetectSummary {
        verdicts,
        rumours,
        skipped: detector.skipped(),
        disorder_warnings: reader.disorder_warnings(),
    })
}

#[derive(Debug)]
pub struct EvalSummary {
    pub accuracy: f64,
    pub evaluated: usize,
    pub det_points: usize,
}

/// Score a verdict file against the gold labels of its stream; writes the
/// DET curve as CSV when requested.
pub fn cmd_evaluate(
    stream_path: &Path,
    verdicts_path: &Path,
    det_out: Option<&Path>,
    num_thresholds: usize,
) -> AppResult<(EvalSummary, DetCurve)> {
    let messages = read_labeled_stream(stream_path, false)?;
    let verdicts = rumour_core::detect::read_verdicts(BufReader::new(File::open(verdicts_path)?))?;
    let joined = eval::join_gold(&verdicts, &messages)?;
    let pairs: Vec<(Label, Label)> = joined.iter().map(|(v, g)| (v.label, *g)).collect();
    let accuracy = eval::accuracy(&pairs)?;
    let scored: Vec<(f64, Label)> = joined.iter().map(|(v, g)| (v.rumour_score, *g)).collect();
    let curve = eval::det_curve(&scored, num_thresholds)?;
    if let Some(path) = det_out {
        std::fs::write(path, curve.to_csv())?;
    }
    Ok((
        EvalSummary {
            accuracy,
            evaluated: pairs.len(),
            det_points: curve.points.len(),
        },
        curve,
    ))
}

/// Feature-group ablation: retrain and re-detect with each group zeroed.
pub fn cmd_ablate(
    cfg: &RunConfig,
    memory_path: &Path,
    train_stream: &Path,
    test_stream: &Path,
    groups: &[String],
    out: Option<&Path>,
) -> AppResult<AblationReport> {
    check_manifest(cfg)?;
    let specs: Vec<GroupSpec> = groups
        .iter()
        .map(|g| GroupSpec::parse(g).map_err(usage))
        .collect::<Result<_, _>>()?;
    let memory = TrustedMemory::load(memory_path)?;
    let (lexicons, tagger) = load_lexicons(cfg)?;
    let train = prepare_labeled(cfg, &memory, &lexicons, &tagger, train_stream)?;
    let test = prepare_labeled(cfg, &memory, &lexicons, &tagger, test_stream)?;
    let report = eval::ablate(&train, &test, &specs, &train_settings(cfg))?;
    if let Some(path) = out {
        std::fs::write(path, report.to_csv())?;
    }
    Ok(report)
}

/// Throughput benchmark over a pre-generated stream file. Parsing and
/// tokenization happen up front; only the scoring pipeline is timed.
pub fn cmd_bench(
    cfg: &RunConfig,
    memory_path: &Path,
    model_path: &Path,
    stream_path: &Path,
    batch_size: usize,
    runs: usize,
    out: Option<&Path>,
) -> AppResult<BenchReport> {
    let memory = TrustedMemory::load(memory_path)?;
    let model = Model::load(model_path)?;
    let (lexicons, tagger) = load_lexicons(cfg)?;
    let docs: Vec<(Message, TokenizedDoc)> = read_labeled_stream(stream_path, false)?
        .into_iter()
        .map(|m| {
            let doc = tokenize(&m.text, cfg.tokenizer, m.id.clone());
            (m, doc)
        })
        .collect();
    let report = eval::bench(
        &model,
        &memory,
        &lexicons,
        &tagger,
        &docs,
        cfg.keyword_idf,
        batch_size,
        runs,
    )?;
    if let Some(path) = out {
        std::fs::write(path, report.to_csv())?;
    }
    Ok(report)
}

fn write_jsonl<T: serde::Serialize>(path: &Path, records: &[T]) -> AppResult<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(anyhow::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug)]
pub struct SynthSummary {
    pub articles: usize,
    pub train_messages: usize,
    pub test_messages: usize,
    pub bench_messages: usize,
}

/// Emit the seeded synthetic corpus: news articles, chronologically split
/// train/test streams (plain and duplicate-injected), lexicons, and
/// optionally a large unlabeled stream for benchmarking.
pub fn cmd_gen_synthetic(
    out_dir: &Path,
    seed: u64,
    articles: usize,
    messages: usize,
    bench_docs: usize,
) -> AppResult<SynthSummary> {
    if messages < 8 || messages % 4 != 0 {
        return Err(usage("--messages must be a multiple of 4, at least 8"));
    }
    let corpus = synth::generate(&SynthConfig {
        seed,
        articles,
        messages,
    });
    std::fs::create_dir_all(out_dir)?;
    write_jsonl(&out_dir.join("news.jsonl"), &corpus.articles)?;
    let half = corpus.stream.len() / 2;
    write_jsonl(&out_dir.join("train.jsonl"), &corpus.stream[..half])?;
    write_jsonl(&out_dir.join("test.jsonl"), &corpus.stream[half..])?;
    write_jsonl(&out_dir.join("train_dup.jsonl"), &corpus.stream_dup[..half])?;
    write_jsonl(&out_dir.join("test_dup.jsonl"), &corpus.stream_dup[half..])?;
    corpus.lexicons.write_dir(out_dir.join("lexicons"))?;
    if bench_docs > 0 {
        let bench = synth::bench_messages(&corpus, bench_docs, seed);
        write_jsonl(&out_dir.join("bench.jsonl"), &bench)?;
    }
    Ok(SynthSummary {
        articles: corpus.articles.len(),
        train_messages: half,
        test_messages: corpus.stream.len() - half,
        bench_messages: bench_docs,
    })
}

/// Count lines in a verdict/stream file, for smoke checks.
pub fn count_lines(path: &Path) -> AppResult<usize> {
    let reader = BufReader::new(File::open(path)?);
    Ok(reader.lines().count())
}
