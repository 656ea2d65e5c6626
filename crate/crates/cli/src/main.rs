use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rumour_cli::{usage, AppError, AppResult};
use rumour_core::config::{PfThresholdSetting, RunConfig, WindowLength};

#[derive(Parser)]
#[command(
    name = "rumour",
    version,
    about = "Streaming rumour detection: novelty against trusted news, context features, pseudo feedback"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Config file plus per-flag overrides. Flags win over the file, the file
/// over built-in defaults.
#[derive(Args, Default)]
struct ConfigOpts {
    /// TOML config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Tokenizer scheme: whitespace | pre_segmented | char_bigram
    #[arg(long, global = true)]
    tokenizer: Option<String>,
    /// Keyword idf source: news | uniform
    #[arg(long, global = true)]
    keyword_idf: Option<String>,
    /// Per-message error policy: skip | abort
    #[arg(long, global = true)]
    on_error: Option<String>,
    /// Insert scored messages into a copy of the kterm memory
    #[arg(long, global = true)]
    accumulate_stream: Option<bool>,
    /// Keep all round-two weights instead of splicing only the PF weight
    #[arg(long, global = true)]
    joint_round2: Option<bool>,
    /// Bloom filter bits per kterm length
    #[arg(long, global = true)]
    bloom_m: Option<u64>,
    /// Bloom filter hash count
    #[arg(long, global = true)]
    bloom_h: Option<u32>,
    /// Sub-document window length in terms, or "auto"
    #[arg(long, global = true)]
    window_length: Option<String>,
    /// Sub-document window stride
    #[arg(long, global = true)]
    stride: Option<u32>,
    /// Keep only the top-n tf-idf terms of each window (0 disables)
    #[arg(long, global = true)]
    keep_top_terms: Option<u32>,
    /// Pseudo-feedback buffer capacity
    #[arg(long, global = true)]
    pf_k: Option<usize>,
    /// Pseudo-feedback admission threshold: theta1 | fixed:<value>
    #[arg(long, global = true)]
    pf_threshold: Option<String>,
    /// SVM regularization constant C
    #[arg(long, global = true)]
    svm_c: Option<f64>,
    /// SVM epoch cap
    #[arg(long, global = true)]
    svm_epochs: Option<u32>,
    /// Seed for seeded operations
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Lexicon directory
    #[arg(long, global = true)]
    lexicons: Option<PathBuf>,
    /// Feature manifest file to verify against
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
}

impl ConfigOpts {
    fn resolve(&self) -> AppResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.tokenizer {
            cfg.tokenizer = v.parse().map_err(usage)?;
        }
        if let Some(v) = &self.keyword_idf {
            cfg.keyword_idf = match v.as_str() {
                "news" => rumour_core::textstats::KeywordIdf::News,
                "uniform" => rumour_core::textstats::KeywordIdf::Uniform,
                other => return Err(usage(format!("unknown keyword idf source {other:?}"))),
            };
        }
        if let Some(v) = &self.on_error {
            cfg.on_error = v.parse().map_err(usage)?;
        }
        if let Some(v) = self.accumulate_stream {
            cfg.accumulate_stream = v;
        }
        if let Some(v) = self.joint_round2 {
            cfg.joint_round2 = v;
        }
        if let Some(v) = self.bloom_m {
            cfg.bloom.m = v;
        }
        if let Some(v) = self.bloom_h {
            cfg.bloom.h = v;
        }
        if let Some(v) = &self.window_length {
            cfg.window.length = if v == "auto" {
                WindowLength::Auto
            } else {
                WindowLength::Fixed(
                    v.parse()
                        .map_err(|_| usage(format!("bad window length {v:?}")))?,
                )
            };
        }
        if let Some(v) = self.stride {
            cfg.window.stride = v;
        }
        if let Some(v) = self.keep_top_terms {
            cfg.window.keep_top_terms = if v == 0 { None } else { Some(v) };
        }
        if let Some(v) = self.pf_k {
            cfg.pf.k = v;
        }
        if let Some(v) = &self.pf_threshold {
            cfg.pf.threshold = v.parse::<PfThresholdSetting>().map_err(usage)?;
        }
        if let Some(v) = self.svm_c {
            cfg.svm.c = v;
        }
        if let Some(v) = self.svm_epochs {
            cfg.svm.epochs = v;
        }
        if let Some(v) = self.seed {
            cfg.svm.seed = v;
        }
        if let Some(v) = &self.lexicons {
            cfg.paths.lexicons = Some(v.clone());
        }
        if let Some(v) = &self.manifest {
            cfg.paths.manifest = Some(v.clone());
        }
        cfg.validate()?;
        eprintln!("# effective config");
        for line in cfg.to_toml().lines() {
            eprintln!("# {line}");
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build the trusted memory file from a news corpus
    BuildMemory {
        #[command(flatten)]
        config: ConfigOpts,
        /// News corpus (JSON lines)
        #[arg(long)]
        news: PathBuf,
        /// Output memory file
        #[arg(long)]
        out: PathBuf,
        /// Training stream used to size the window when length is "auto"
        #[arg(long)]
        stream: Option<PathBuf>,
    },
    /// Two-round training over a labeled chronological stream
    Train {
        #[command(flatten)]
        config: ConfigOpts,
        #[arg(long)]
        memory: PathBuf,
        /// Labeled training stream (JSON lines)
        #[arg(long)]
        stream: PathBuf,
        /// Output model file
        #[arg(long)]
        out: PathBuf,
        /// Also write a feature,weight CSV
        #[arg(long)]
        weights_csv: Option<PathBuf>,
    },
    /// Single-pass detection over a stream
    Detect {
        #[command(flatten)]
        config: ConfigOpts,
        #[arg(long)]
        memory: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        stream: PathBuf,
        /// Output verdict file (CSV)
        #[arg(long)]
        out: PathBuf,
        /// Append the full feature vector to every verdict line
        #[arg(long)]
        debug_features: bool,
        /// Tolerate out-of-order timestamps instead of aborting
        #[arg(long)]
        allow_disorder: bool,
    },
    /// Accuracy and DET curve of a verdict file against gold labels
    Evaluate {
        /// Labeled stream the verdicts were produced on
        #[arg(long)]
        stream: PathBuf,
        /// Verdict file from `detect`
        #[arg(long)]
        verdicts: PathBuf,
        /// Write the DET curve CSV here
        #[arg(long)]
        det_out: Option<PathBuf>,
        /// Cap the number of DET thresholds (0 = all)
        #[arg(long, default_value_t = 0)]
        num_thresholds: usize,
    },
    /// Retrain with feature groups removed and compare test accuracy
    Ablate {
        #[command(flatten)]
        config: ConfigOpts,
        #[arg(long)]
        memory: PathBuf,
        #[arg(long)]
        train_stream: PathBuf,
        #[arg(long)]
        test_stream: PathBuf,
        /// Groups to remove, e.g. novelty pf punctuation+urls
        #[arg(long, num_args = 1..)]
        groups: Vec<String>,
        /// Write the group,accuracy CSV here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure scoring throughput on a pre-generated stream
    Bench {
        #[command(flatten)]
        config: ConfigOpts,
        #[arg(long)]
        memory: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Stream file to score (parsing is excluded from timing)
        #[arg(long)]
        stream: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        batch_size: usize,
        /// Timed passes over the stream (after one warm-up pass)
        #[arg(long, default_value_t = 5)]
        runs: usize,
        /// Write the batch,mean_latency_us CSV here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit a seeded synthetic corpus: news, train/test streams, lexicons
    GenSynthetic {
        /// Output directory
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        articles: usize,
        /// Total stream messages (split chronologically in half)
        #[arg(long, default_value_t = 400)]
        messages: usize,
        /// Also write bench.jsonl with this many unlabeled messages
        #[arg(long, default_value_t = 0)]
        bench_docs: usize,
    },
}

fn run(cli: Cli) -> AppResult<()> {
    match cli.command {
        Command::BuildMemory {
            config,
            news,
            out,
            stream,
        } => {
            let cfg = config.resolve()?;
            let summary = rumour_cli::cmd_build_memory(&cfg, &news, &out, stream.as_deref())?;
            println!(
                "built memory from {} articles: {} vocabulary terms, window length {}, {} windows",
                summary.articles, summary.vocab_terms, summary.window_length, summary.windows
            );
            for (k, count) in summary.inserted_kterms.iter().enumerate() {
                println!("inserted kterms (k={}): {}", k + 1, count);
            }
        }
        Command::Train {
            config,
            memory,
            stream,
            out,
            weights_csv,
        } => {
            let cfg = config.resolve()?;
            let (_, report) =
                rumour_cli::cmd_train(&cfg, &memory, &stream, &out, weights_csv.as_deref())?;
            println!(
                "trained on {} rumours / {} non-rumours",
                report.rumour_count, report.non_rumour_count
            );
            println!(
                "round 1: train accuracy {:.4}, theta1 {:.6}",
                report.round1_train_accuracy, report.theta1
            );
            println!(
                "round 2: train accuracy {:.4}, theta {:.6}",
                report.round2_train_accuracy, report.theta
            );
        }
        Command::Detect {
            config,
            memory,
            model,
            stream,
            out,
            debug_features,
            allow_disorder,
        } => {
            let cfg = config.resolve()?;
            let summary = rumour_cli::cmd_detect(
                &cfg,
                &memory,
                &model,
                &stream,
                &out,
                debug_features,
                !allow_disorder,
            )?;
            println!(
                "scored {} messages: {} rumours, {} skipped, {} disorder warnings",
                summary.verdicts, summary.rumours, summary.skipped, summary.disorder_warnings
            );
        }
        Command::Evaluate {
            stream,
            verdicts,
            det_out,
            num_thresholds,
        } => {
            let (summary, _) =
                rumour_cli::cmd_evaluate(&stream, &verdicts, det_out.as_deref(), num_thresholds)?;
            println!(
                "accuracy {:.4} over {} messages ({} DET points)",
                summary.accuracy, summary.evaluated, summary.det_points
            );
        }
        Command::Ablate {
            config,
            memory,
            train_stream,
            test_stream,
            groups,
            out,
        } => {
            let cfg = config.resolve()?;
            let report = rumour_cli::cmd_ablate(
                &cfg,
                &memory,
                &train_stream,
                &test_stream,
                &groups,
                out.as_deref(),
            )?;
            print!("{}", report.to_csv());
        }
        Command::Bench {
            config,
            memory,
            model,
            stream,
            batch_size,
            runs,
            out,
        } => {
            let cfg = config.resolve()?;
            let report = rumour_cli::cmd_bench(
                &cfg,
                &memory,
                &model,
                &stream,
                batch_size,
                runs,
                out.as_deref(),
            )?;
            println!(
                "{} docs x {} runs: {:.0} docs/sec, mean latency {:.2} us, slope {:.4} us/batch",
                report.total_docs,
                report.runs,
                report.docs_per_second,
                report.mean_latency_us(),
                report.slope
            );
        }
        Command::GenSynthetic {
            out_dir,
            seed,
            articles,
            messages,
            bench_docs,
        } => {
            let summary =
                rumour_cli::cmd_gen_synthetic(&out_dir, seed, articles, messages, bench_docs)?;
            println!(
                "wrote {} articles, {}+{} train/test messages (plain and dup variants){}",
                summary.articles,
                summary.train_messages,
                summary.test_messages,
                if summary.bench_messages > 0 {
                    format!(", {} bench messages", summary.bench_messages)
                } else {
                    String::new()
                }
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                AppError::Usage(_) => 1u8,
                AppError::Data(_) => 2u8,
            })
        }
    }
}
