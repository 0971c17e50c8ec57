//! `jetr`: synthesize, validate, train, evaluate and inspect reranker runs.
//!
//! Exit codes: 0 success, 1 corpus validation failure, 2 runtime or numeric
//! failure, 3 bad arguments.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jetr_core::dataset::fuse_query_embedding;
use jetr_core::pipeline::{self, Checkpoint, TrainHistory};
use jetr_core::policy::describe_counts;
use jetr_core::synth::write_synthetic;
use jetr_core::{
    Corpus, Error, Evaluation, Modality, PolicyConfig, QuestionType, Scorer, Split,
    SyntheticConfig, TrainConfig,
};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "jetr", version, about = "Trainable embedding reranker")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded synthetic corpus.
    Synth(SynthArgs),
    /// Check a corpus directory for integrity errors.
    Validate {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Train the embedding enhancer.
    Train(TrainArgs),
    /// Compute retrieval metrics for the raw and enhanced scorers.
    Eval(EvalArgs),
    /// Show the ranked documents for one query.
    Rank(RankArgs),
    /// Print the context counts chosen for a question type.
    Policy {
        #[arg(long)]
        qtype: QuestionType,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, env = "JETR_SEED")]
    seed: Option<u64>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Training checkpoint to write (`.jetr-ckpt`).
    #[arg(long)]
    out: PathBuf,
    /// Per-step history CSV.
    #[arg(long)]
    history: Option<PathBuf>,
    /// Also write the bare enhancer (`.jetr`).
    #[arg(long)]
    enhancer: Option<PathBuf>,
    /// Write `epoch-NNNN.jetr-ckpt` into this directory after every epoch.
    #[arg(long)]
    epoch_checkpoints: Option<PathBuf>,
    /// Continue from a checkpoint; its stored config is used.
    #[arg(long)]
    resume: Option<PathBuf>,
    #[arg(long, env = "JETR_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Single-threaded numerics.
    #[arg(long)]
    deterministic: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    split: Split,
    /// Training checkpoint or bare enhancer file.
    #[arg(long)]
    ckpt: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// JSON report path; printed to stdout when omitted.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Per-query metrics CSV for significance testing.
    #[arg(long)]
    per_query: Option<PathBuf>,
}

#[derive(Args)]
struct RankArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    ckpt: PathBuf,
    #[arg(long)]
    query_id: String,
    #[arg(long, default_value_t = 10)]
    k: usize,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn args(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Dataset(_) => 1,
            Error::Config(_) | Error::OutOfRange(_) | Error::Unknown { .. } => 3,
            _ => 2,
        };
        let message = match &e {
            Error::Dataset(d) => format!("validation failed [{}]: {d}", d.rule()),
            other => other.to_string(),
        };
        Failure { code, message }
    }
}

type CmdResult = Result<(), Failure>;

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure {
        code: 3,
        message: format!("{}: {e}", path.display()),
    })?;
    serde_json::from_str(&text).map_err(|e| Failure::args(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> CmdResult {
    fs::write(path, contents).map_err(|e| Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    })
}

fn load_corpus(dir: &Path) -> Result<Corpus, Failure> {
    let (corpus, warnings) = Corpus::load(dir)?;
    for w in warnings {
        log::warn!("{w}");
    }
    Ok(corpus)
}

fn cmd_synth(a: SynthArgs) -> CmdResult {
    let mut cfg: SyntheticConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => SyntheticConfig::default(),
    };
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let corpus = write_synthetic(&cfg, &a.out)?;
    println!(
        "wrote {} docs, {} queries, {} logit records to {}",
        corpus.docs().len(),
        corpus.queries().len(),
        corpus.logits().len(),
        a.out.display()
    );
    Ok(())
}

fn cmd_validate(dir: &Path) -> CmdResult {
    let corpus = load_corpus(dir)?;
    let images = corpus
        .docs()
        .iter()
        .filter(|d| d.modality == Modality::Image)
        .count();
    let s = corpus.splits();
    println!(
        "docs={} (text={} image={images}) queries={} logits={} dim={}",
        corpus.docs().len(),
        corpus.docs().len() - images,
        corpus.queries().len(),
        corpus.logits().len(),
        corpus.dim().unwrap_or(0)
    );
    println!(
        "splits: train={} validation={} test={}",
        s.train.len(),
        s.validation.len(),
        s.test.len()
    );
    println!("ok");
    Ok(())
}

fn cmd_train(a: TrainArgs) -> CmdResult {
    let corpus = load_corpus(&a.corpus)?;
    let start = match &a.resume {
        Some(p) => {
            if a.config.is_some() || a.seed.is_some() {
                log::warn!(
                    "--resume uses the checkpoint's config; --config and --seed are ignored"
                );
            }
            let mut ck = Checkpoint::load(p)?;
            if a.deterministic {
                ck.config.deterministic = true;
            }
            ck
        }
        None => {
            let mut cfg: TrainConfig = match &a.config {
                Some(p) => read_json(p)?,
                None => TrainConfig::default(),
            };
            if let Some(seed) = a.seed {
                cfg.seed = seed;
            }
            if let Some(e) = a.epochs {
                cfg.epochs = e;
            }
            if a.deterministic {
                cfg.deterministic = true;
            }
            pipeline::init_checkpoint(&corpus, &cfg)?
        }
    };
    let epochs = a.epochs.unwrap_or(start.config.epochs);
    if let Some(dir) = &a.epoch_checkpoints {
        fs::create_dir_all(dir).map_err(|e| Failure {
            code: 2,
            message: format!("{}: {e}", dir.display()),
        })?;
    }
    let (ckpt, history) = pipeline::resume(&corpus, start, epochs, |epoch, ck| {
        if let Some(dir) = &a.epoch_checkpoints {
            ck.save(dir.join(format!("epoch-{epoch:04}.jetr-ckpt")))?;
        }
        Ok(())
    })?;
    ckpt.save(&a.out)?;
    if let Some(p) = &a.history {
        write_file(p, history.to_csv())?;
    }
    if let Some(p) = &a.enhancer {
        write_file(p, jetr_core::save_params(&ckpt.params))?;
    }
    print_summary(&ckpt, &history);
    Ok(())
}

fn print_summary(ckpt: &Checkpoint, history: &TrainHistory) {
    match history.steps.last() {
        Some(last) => println!(
            "step {}: rank_loss={:.6} gen_loss={:.6} total_loss={:.6} pairs={}",
            ckpt.step, last.rank_loss, last.gen_loss_mean, last.total_loss, last.contributing_pairs
        ),
        None => println!("step {}: no training steps run", ckpt.step),
    }
}

fn evaluation_json(ev: &Evaluation, split: Split, k: usize) -> Value {
    let mut v = json!({
        "split": split.as_str(),
        "k": k,
        "raw": ev.raw.report,
    });
    if let Some(e) = &ev.enhanced {
        v["enhanced"] = serde_json::to_value(&e.report).expect("report serializes");
    }
    v
}

fn cmd_eval(a: EvalArgs) -> CmdResult {
    if a.k == 0 {
        return Err(Failure::args("--k must be at least 1"));
    }
    let corpus = load_corpus(&a.corpus)?;
    let params = a
        .ckpt
        .as_ref()
        .map(pipeline::load_enhancer_file)
        .transpose()?;
    let ev = pipeline::evaluate(&corpus, a.split, params.as_ref(), a.k)?;
    let mut text = serde_json::to_string_pretty(&evaluation_json(&ev, a.split, a.k))
        .expect("report serializes");
    text.push('\n');
    match &a.json {
        Some(p) => write_file(p, &text)?,
        None => print!("{text}"),
    }
    if let Some(p) = &a.per_query {
        let mut csv = format!("scorer,{}\n", jetr_core::QueryMetrics::CSV_HEADER);
        let scorers =
            std::iter::once(("raw", &ev.raw)).chain(ev.enhanced.iter().map(|e| ("enhanced", e)));
        for (name, s) in scorers {
            for q in &s.per_query {
                let _ = writeln!(csv, "{name},{}", q.csv_row());
            }
        }
        write_file(p, csv)?;
    }
    if a.json.is_some() {
        let r = &ev.raw.report;
        println!(
            "raw: ndcg@{}={:.6} mrr={:.6} queries={}",
            a.k, r.ndcg_at_k, r.mrr, r.query_count
        );
        if let Some(e) = &ev.enhanced {
            let r = &e.report;
            println!(
                "enhanced: ndcg@{}={:.6} mrr={:.6} queries={}",
                a.k, r.ndcg_at_k, r.mrr, r.query_count
            );
        }
    }
    Ok(())
}

fn cmd_rank(a: RankArgs) -> CmdResult {
    if a.k == 0 {
        return Err(Failure::args("--k must be at least 1"));
    }
    let corpus = load_corpus(&a.corpus)?;
    let query = corpus
        .query(&a.query_id)
        .ok_or_else(|| Failure::args(format!("unknown query '{}'", a.query_id)))?;
    let params = pipeline::load_enhancer_file(&a.ckpt)?;
    let fused = fuse_query_embedding(&query.text_embedding, query.image_embedding.as_deref())?;
    let ranked = corpus
        .store()
        .topk(&fused, a.k, None, Scorer::Enhanced(&params))?;
    let width = ranked
        .entries
        .iter()
        .map(|e| e.doc_id.len())
        .max()
        .unwrap_or(6)
        .max(6);
    println!(
        "{:>4}  {:<width$}  {:>10}  {:>12}",
        "rank", "doc_id", "raw_cosine", "report_score"
    );
    for (i, e) in ranked.entries.iter().enumerate() {
        println!(
            "{:>4}  {:<width$}  {:>10.6}  {:>12.6}",
            i + 1,
            e.doc_id,
            e.raw_cosine,
            e.report_score.expect("enhanced scorer sets report score")
        );
    }
    Ok(())
}

fn cmd_policy(qtype: QuestionType, config: Option<PathBuf>) -> CmdResult {
    let cfg: PolicyConfig = match &config {
        Some(p) => read_json(p)?,
        None => PolicyConfig::default(),
    };
    println!("{}", describe_counts(qtype, &cfg));
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(3),
            };
        }
    };
    let result = match cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Validate { corpus } => cmd_validate(&corpus),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Rank(a) => cmd_rank(a),
        Command::Policy { qtype, config } => cmd_policy(qtype, config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
