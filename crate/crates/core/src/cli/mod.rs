//! Command-line front end. Every subcommand reads and writes plain files so
//! that runs can be chained and diffed.

mod chat;

pub use chat::{chat_loop, ChatSession};

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{
    build_vocab, load_cornell, preprocess_dialog, read_canonical, read_dailydialog, split_dialogs, to_context_windows,
    write_canonical, CanonicalFiles, Dialog, Split, Vocabulary, DEFAULT_WINDOW, MAX_SENTENCE_LEN,
};
use crate::lexicon::{extract_content_sequence, load_function_lexicon, ExtractionMode, FunctionLexicon};
use crate::metrics::{evaluate_corpus, load_embeddings};
use crate::models::{Architecture, Model, ModelConfig};
use crate::neural::AdamConfig;
use crate::pipeline::{
    build_training_triplets, generate, load_checkpoint, save_checkpoint, train_epoch, write_triplets, Checkpoint,
    DecodeMode, DecodeOptions, TrainConfig,
};

#[derive(Parser, Debug)]
#[command(name = "cword", version, about = "Content-word aware dialog response generation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tokenize a raw corpus and write canonical train/valid/test files.
    Preprocess(PreprocessArgs),
    /// Build a frequency-capped vocabulary from a canonical corpus.
    BuildVocab(BuildVocabArgs),
    /// Write the content sequence of each line of a tokenized file.
    Extract(ExtractArgs),
    /// Train a model, saving a checkpoint after every epoch.
    Train(TrainArgs),
    /// Generate responses for every context window of a canonical corpus.
    Generate(GenerateArgs),
    /// Score hypotheses against references.
    Evaluate(EvaluateArgs),
    /// Interactive loop over stdin.
    Chat(ChatArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CorpusFormat {
    Dailydialog,
    Cornell,
}

#[derive(Args, Debug)]
pub struct PreprocessArgs {
    #[arg(long, value_enum)]
    pub format: CorpusFormat,
    /// DailyDialog text file, or the Cornell movie_lines file.
    #[arg(long)]
    pub input: PathBuf,
    /// DailyDialog act file aligned with `--input`.
    #[arg(long)]
    pub acts: Option<PathBuf>,
    /// Cornell movie_conversations file.
    #[arg(long)]
    pub conversations: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = MAX_SENTENCE_LEN)]
    pub max_len: usize,
}

#[derive(Args, Debug)]
pub struct BuildVocabArgs {
    /// Canonical `.txt` file.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pub cap: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    #[value(alias = "train")]
    Training,
    #[value(alias = "eval")]
    Evaluation,
}

impl From<ModeArg> for ExtractionMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Training => ExtractionMode::Training,
            ModeArg::Evaluation => ExtractionMode::Evaluation,
        }
    }
}

#[derive(Args, Debug)]
pub struct ExtractArgs {
    /// One tokenized sentence per line.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub lexicon: LexiconArgs,
}

#[derive(Args, Debug)]
pub struct LexiconArgs {
    /// Function-word list; the built-in one when absent.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Canonical `.txt` training file.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(long, value_parser = parse_arch)]
    pub arch: Architecture,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub epochs: usize,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: usize,
    #[arg(long, default_value_t = 3e-4)]
    pub lr: f64,
    #[arg(long, default_value_t = 200)]
    pub emb_size: usize,
    #[arg(long, default_value_t = 300)]
    pub enc_hidden: usize,
    #[arg(long, default_value_t = 200)]
    pub dec_hidden: usize,
    /// Train the dialog-act head too; the corpus needs act labels.
    #[arg(long)]
    pub da_head: bool,
    /// Skip content-sequence noise injection.
    #[arg(long)]
    pub no_noise: bool,
    /// Pretrained vectors for the embedding table.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[command(flatten)]
    pub lexicon: LexiconArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct DecodeArgs {
    /// Beam width; greedy decoding when absent.
    #[arg(long)]
    pub beam: Option<usize>,
    #[arg(long, default_value_t = 40)]
    pub max_len: usize,
    #[arg(long, default_value_t = 20)]
    pub content_max_len: usize,
}

impl DecodeArgs {
    fn options(&self) -> DecodeOptions {
        DecodeOptions {
            mode: match self.beam {
                Some(k) if k > 1 => DecodeMode::Beam(k),
                _ => DecodeMode::Greedy,
            },
            content_max_len: self.content_max_len,
            sentence_max_len: self.max_len,
        }
    }
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    /// Canonical `.txt` file; one hypothesis per context window.
    #[arg(long)]
    pub contexts: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Decoded content sequences, for the content-decoder variants.
    #[arg(long)]
    pub content_out: Option<PathBuf>,
    /// The gold responses, aligned with `--out`.
    #[arg(long)]
    pub refs_out: Option<PathBuf>,
    /// Predicted dialog acts, when the model has the head.
    #[arg(long)]
    pub acts_out: Option<PathBuf>,
    #[command(flatten)]
    pub decode: DecodeArgs,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub refs: PathBuf,
    #[arg(long)]
    pub hyps: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[command(flatten)]
    pub lexicon: LexiconArgs,
}

#[derive(Args, Debug)]
pub struct ChatArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    #[command(flatten)]
    pub decode: DecodeArgs,
}

fn parse_arch(s: &str) -> Result<Architecture, String> {
    s.parse().map_err(|e: crate::models::ModelError| e.to_string())
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Preprocess(a) => preprocess(&a),
        Command::BuildVocab(a) => build_vocabulary(&a),
        Command::Extract(a) => extract(&a),
        Command::Train(a) => train(&a),
        Command::Generate(a) => generate_file(&a),
        Command::Evaluate(a) => evaluate(&a),
        Command::Chat(a) => {
            let (ck, vocab) = open_checkpoint(&a.checkpoint, &a.vocab)?;
            let session = ChatSession::new(&ck, &vocab, a.decode.options())?;
            let stdin = io::stdin();
            chat_loop(&session, stdin.lock(), io::stdout().lock())
        }
    }
}

fn write_lines<S: AsRef<str>>(path: &Path, lines: &[S]) -> Result<()> {
    let mut text = String::new();
    for l in lines {
        text.push_str(l.as_ref());
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read_token_lines(path: &Path) -> Result<Vec<Vec<String>>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text
        .lines()
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .collect())
}

fn lexicon(args: &LexiconArgs, vocab: Option<&Vocabulary>) -> Result<FunctionLexicon> {
    Ok(match (&args.lexicon, vocab) {
        (None, _) => FunctionLexicon::builtin(),
        (Some(p), Some(v)) => load_function_lexicon(p, v)?,
        (Some(p), None) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            FunctionLexicon::parse(&text)?
        }
    })
}

fn read_corpus(path: &Path) -> Result<Vec<Dialog>> {
    read_canonical(&CanonicalFiles::from_text_path(path)).with_context(|| format!("reading {}", path.display()))
}

fn preprocess(a: &PreprocessArgs) -> Result<()> {
    let parsed = match a.format {
        CorpusFormat::Dailydialog => read_dailydialog(&a.input, a.acts.as_deref())?,
        CorpusFormat::Cornell => {
            let conv = a
                .conversations
                .as_deref()
                .context("--conversations is required for the cornell format")?;
            load_cornell(&a.input, conv)?
        }
    };
    for w in &parsed.warnings {
        log::warn!("{w}");
    }
    let dialogs: Vec<Dialog> = parsed
        .items
        .iter()
        .map(|r| preprocess_dialog(r, a.max_len))
        .filter(|d| d.sentences().len() >= 2)
        .collect();
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let split = split_dialogs(dialogs.len(), a.seed);
    for s in Split::ALL {
        let part: Vec<Dialog> = split.get(s).iter().map(|&i| dialogs[i].clone()).collect();
        write_canonical(&CanonicalFiles::new(&a.out, s.name()), &part)?;
    }
    let manifest = a.out.join("split.tsv");
    fs::write(&manifest, split.manifest()).with_context(|| format!("writing {}", manifest.display()))?;
    log::info!("{} dialogs kept, {} skipped", dialogs.len(), parsed.warnings.len());
    Ok(())
}

fn build_vocabulary(a: &BuildVocabArgs) -> Result<()> {
    let dialogs = read_corpus(&a.corpus)?;
    let vocab = build_vocab(&dialogs, a.cap)?;
    vocab.save(&a.out)?;
    log::info!("{} entries, hash {}", vocab.len(), vocab.hash());
    Ok(())
}

fn extract(a: &ExtractArgs) -> Result<()> {
    let lex = lexicon(&a.lexicon, None)?;
    let lines: Vec<String> = read_token_lines(&a.input)?
        .iter()
        .map(|toks| extract_content_sequence(toks, &lex, a.mode.into()).to_string())
        .collect();
    write_lines(&a.out, &lines)
}

fn train(a: &TrainArgs) -> Result<()> {
    let vocab = Vocabulary::load(&a.vocab)?;
    let lex = lexicon(&a.lexicon, Some(&vocab))?;
    let dialogs = read_corpus(&a.corpus)?;
    let windows: Vec<_> = dialogs.iter().flat_map(|d| to_context_windows(d, a.window)).collect();
    if windows.is_empty() {
        bail!("{} has no dialog with two or more sentences", a.corpus.display());
    }
    let triplets = build_training_triplets(&windows, &lex, &vocab);
    if a.da_head && triplets.iter().any(|t| t.act.is_none()) {
        bail!("--da-head needs dialog-act labels for every sentence");
    }

    let mut config = ModelConfig::new(a.arch, vocab.len()).with_sizes(a.emb_size, a.enc_hidden, a.dec_hidden);
    config.window = a.window;
    config.da_head = a.da_head;
    config.validate()?;
    let (model, mut params) = Model::init(config.clone(), a.seed)?;
    if let Some(path) = &a.embeddings {
        let table = load_embeddings(path, Some(&vocab))?;
        let n = model.init_embeddings(&mut params, vocab.tokens(), |t| table.get(t))?;
        log::info!("{n} embedding rows initialized from {}", path.display());
    }

    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_triplets(&a.out.join("triplets.txt"), &triplets)?;
    let cfg = TrainConfig {
        batch_size: a.batch_size,
        adam: AdamConfig {
            lr: a.lr,
            ..AdamConfig::default()
        },
        noise: !a.no_noise,
    };
    let pool = lex.insert_pool(&vocab);
    // A separate stream keeps shuffling independent of initialization.
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    rng.set_stream(1);
    let log_path = a.out.join("loss.log");
    let mut log_text = String::new();
    let hash = vocab.hash();
    for epoch in 1..=a.epochs {
        let report = train_epoch(&model, &mut params, &triplets, &cfg, &pool, epoch, &mut rng)?;
        log_text.push_str(&report.log_line());
        log_text.push('\n');
        fs::write(&log_path, &log_text).with_context(|| format!("writing {}", log_path.display()))?;
        let mut metrics = BTreeMap::new();
        if let Some(c) = report.content_loss {
            metrics.insert("content_loss".to_string(), format!("{c:.6}"));
        }
        metrics.insert("sentence_loss".to_string(), format!("{:.6}", report.sentence_loss));
        metrics.insert("total_loss".to_string(), format!("{:.6}", report.total_loss));
        save_checkpoint(&a.out.join(format!("epoch-{epoch:02}")), &config, &params, &hash, epoch, &metrics)?;
        log::info!("{}", report.log_line());
    }
    Ok(())
}

fn open_checkpoint(dir: &Path, vocab: &Path) -> Result<(Checkpoint, Vocabulary)> {
    let vocab = Vocabulary::load(vocab)?;
    let ck = load_checkpoint(dir, Some(&vocab)).with_context(|| format!("loading {}", dir.display()))?;
    Ok((ck, vocab))
}

fn generate_file(a: &GenerateArgs) -> Result<()> {
    let (ck, vocab) = open_checkpoint(&a.checkpoint, &a.vocab)?;
    let model = ck.model()?;
    let opts = a.decode.options();
    let dialogs = read_corpus(&a.contexts)?;
    let (mut hyps, mut contents, mut refs, mut acts) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for w in dialogs.iter().flat_map(|d| to_context_windows(d, ck.config.window)) {
        let ctx: Vec<_> = w.context.iter().map(|s| vocab.encode_all(s.tokens())).collect();
        let g = generate(&model, &ck.params, &ctx, &opts)?;
        hyps.push(vocab.decode_all(&g.response).join(" "));
        contents.push(vocab.decode_all(&g.content).join(" "));
        refs.push(w.response.to_string());
        acts.push(g.act.map_or("-", |a| a.name()).to_string());
    }
    write_lines(&a.out, &hyps)?;
    if let Some(p) = &a.content_out {
        if !ck.config.architecture.has_content() {
            log::warn!("{} decodes no content sequence; writing empty lines", ck.config.architecture);
        }
        write_lines(p, &contents)?;
    }
    if let Some(p) = &a.refs_out {
        write_lines(p, &refs)?;
    }
    if let Some(p) = &a.acts_out {
        write_lines(p, &acts)?;
    }
    Ok(())
}

fn evaluate(a: &EvaluateArgs) -> Result<()> {
    let refs = read_token_lines(&a.refs)?;
    let hyps = read_token_lines(&a.hyps)?;
    let lex = lexicon(&a.lexicon, None)?;
    let table = a.embeddings.as_deref().map(|p| load_embeddings(p, None)).transpose()?;
    let report = evaluate_corpus(&refs, &hyps, &lex, table.as_ref())?;
    let text = report.to_string();
    fs::write(&a.out, &text).with_context(|| format!("writing {}", a.out.display()))?;
    io::stdout().write_all(text.as_bytes())?;
    Ok(())
}
