//! Subcommand definitions and dispatch.
//!
//! Every subcommand reads and writes the file formats of the library
//! module it fronts: tokenizers, lemmatizers, taggers, candidate
//! vocabularies, and n-gram scorers are versioned JSON; treebanks are
//! CoNLL-U; damaged and restored text is plain UTF-8, one sentence per
//! line. Effective settings are echoed so defaults are visible in logs.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use lacuna::charfill::{self, build_candidate_vocab, CandidateVocab, CharFillOptions};
use lacuna::corpus::{parse_conllu, serialize_conllu, Corpus};
use lacuna::embedding::{transfer_embeddings, EmbeddingMatrix, InitPolicy};
use lacuna::eval::{self, Task};
use lacuna::lemma::{train_lemmatizer, LemmaModel, TrainMode};
use lacuna::morphotag::{train_tagger, TagModel};
use lacuna::subword::{
    coverage_report, needs_custom_tokenizer, train_tokenizer, CoveragePolicy, SubwordModel,
    TokenizerConfig,
};
use lacuna::wordfill::{
    fill_word_masks, train_ngram_scorer, DecoderConfig, NGramScorer, DEFAULT_ALPHA, DEFAULT_ORDER,
};

use crate::service;

/// Environment variable consulted when `serve --models` is omitted.
pub const MODELS_ENV: &str = "LACUNA_MODELS";

#[derive(Parser)]
#[command(name = "lacuna", version, about = "Annotation and restoration for historical languages")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Report how well a tokenizer covers a corpus and whether the
    /// language needs its own.
    AnalyzeCoverage(AnalyzeCoverageArgs),
    /// Train a subword vocabulary from plain text.
    TrainTokenizer(TrainTokenizerArgs),
    /// Move embedding rows from an old vocabulary to a new one.
    TransferEmbeddings(TransferEmbeddingsArgs),
    /// Learn form-to-lemma rules (or a dictionary) from a treebank.
    TrainLemmatizer(TrainLemmatizerArgs),
    /// Fill the lemma column of a treebank.
    Lemmatize(AnnotateArgs),
    /// Learn combined part-of-speech and morphology labels.
    TrainTagger(TrainTaggerArgs),
    /// Fill the UPOS and FEATS columns of a treebank.
    Tag(AnnotateArgs),
    /// Count candidate words for character gap filling.
    BuildCharVocab(BuildCharVocabArgs),
    /// Restore lost characters marked [_] in damaged text.
    FillChars(FillCharsArgs),
    /// Count n-grams over tokenized text for word gap filling.
    TrainNgram(TrainNgramArgs),
    /// Restore lost words marked <mask> in damaged text.
    FillWords(FillWordsArgs),
    /// Score predictions against gold annotation for one task.
    Evaluate(EvaluateArgs),
    /// Serve loaded models over HTTP.
    Serve(ServeArgs),
}

#[derive(Args)]
pub struct AnalyzeCoverageArgs {
    /// Tokenizer model JSON.
    #[arg(long)]
    pub tokenizer: PathBuf,
    /// Plain text corpus, one sentence per line.
    #[arg(long)]
    pub input: PathBuf,
    /// Percent of unknown tokens above which coverage fails.
    #[arg(long, default_value_t = 5.0)]
    pub unknown_threshold: f64,
    /// Coverage also fails when the unknown piece ranks this high.
    #[arg(long, default_value_t = 10)]
    pub top_rank: usize,
}

#[derive(Args)]
pub struct TrainTokenizerArgs {
    /// Plain text corpus, one sentence per line.
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write the tokenizer JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Language code; sets the vocabulary cap when --vocab-size is
    /// omitted (10000 for lzh, 3000 otherwise).
    #[arg(long)]
    pub lang: Option<String>,
    /// Explicit vocabulary cap, overriding the per-language default.
    #[arg(long)]
    pub vocab_size: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitKind {
    Zero,
    Gaussian,
}

#[derive(Args)]
pub struct TransferEmbeddingsArgs {
    /// Tokenizer the matrix was trained against.
    #[arg(long)]
    pub old_tokenizer: PathBuf,
    /// Embedding matrix JSON for the old tokenizer.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Tokenizer to build a matrix for.
    #[arg(long)]
    pub new_tokenizer: PathBuf,
    /// Where to write the transferred matrix.
    #[arg(long)]
    pub out: PathBuf,
    /// How rows for new pieces are filled.
    #[arg(long, value_enum, default_value_t = InitKind::Gaussian)]
    pub init: InitKind,
    /// Standard deviation for gaussian initialization.
    #[arg(long, default_value_t = InitPolicy::DEFAULT_SIGMA)]
    pub sigma: f64,
    /// Seed for gaussian initialization.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeKind {
    Rules,
    Dictionary,
}

#[derive(Args)]
pub struct TrainLemmatizerArgs {
    /// Training treebank in CoNLL-U.
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write the lemmatizer JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Language code; selects dictionary mode for lzh when --mode is
    /// omitted.
    #[arg(long)]
    pub lang: Option<String>,
    /// Explicit training mode, overriding the per-language default.
    #[arg(long, value_enum)]
    pub mode: Option<ModeKind>,
}

#[derive(Args)]
pub struct AnnotateArgs {
    /// Model JSON produced by the matching train subcommand.
    #[arg(long)]
    pub model: PathBuf,
    /// Treebank to annotate in CoNLL-U.
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write the annotated treebank.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct TrainTaggerArgs {
    /// Training treebank in CoNLL-U.
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write the tagger JSON.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct BuildCharVocabArgs {
    /// Plain text corpus, one sentence per line.
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write the vocabulary JSON.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct FillCharsArgs {
    /// Candidate vocabulary JSON.
    #[arg(long)]
    pub vocab: PathBuf,
    /// Damaged text, one sentence per line, gaps marked [_].
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write the restored text, mirroring the input line for
    /// line.
    #[arg(long)]
    pub out: PathBuf,
    /// Language code; character restoration rejects lzh.
    #[arg(long)]
    pub lang: Option<String>,
    /// Accept a lost-space reading only when both parts are vocabulary
    /// words.
    #[arg(long)]
    pub require_both_parts: bool,
}

#[derive(Args)]
pub struct TrainNgramArgs {
    /// Tokenizer used to encode the corpus.
    #[arg(long)]
    pub tokenizer: PathBuf,
    /// Plain text corpus, one sentence per line.
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write the scorer JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// N-gram order.
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    pub order: usize,
    /// Additive smoothing constant.
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
}

#[derive(Args)]
pub struct FillWordsArgs {
    /// Tokenizer matching the scorer.
    #[arg(long)]
    pub tokenizer: PathBuf,
    /// N-gram scorer JSON.
    #[arg(long)]
    pub scorer: PathBuf,
    /// Damaged text, one sentence per line, lost words marked <mask>.
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write the restored text.
    #[arg(long)]
    pub out: PathBuf,
    /// Look-ahead budget per mask.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Language code; selects single-token decoding for lzh.
    #[arg(long)]
    pub lang: Option<String>,
    /// Commit exactly one piece per mask, chosen over the whole
    /// non-special vocabulary.
    #[arg(long)]
    pub single_token: bool,
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// One of: pos, feats, lemma, char_fill, word_fill.
    #[arg(long)]
    pub task: String,
    /// Gold annotation: CoNLL-U for token tasks, plain text for fill
    /// tasks.
    #[arg(long)]
    pub gold: PathBuf,
    /// Predictions in the same format as the gold file.
    #[arg(long)]
    pub pred: PathBuf,
    /// The damaged input the predictions were made from; required for
    /// char_fill and word_fill.
    #[arg(long)]
    pub damaged: Option<PathBuf>,
}

#[derive(Args)]
pub struct ServeArgs {
    /// Directory of per-language model directories. Falls back to the
    /// LACUNA_MODELS environment variable.
    #[arg(long)]
    pub models: Option<PathBuf>,
    /// Bind address.
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: String,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::AnalyzeCoverage(args) => analyze_coverage(args),
        Command::TrainTokenizer(args) => run_train_tokenizer(args),
        Command::TransferEmbeddings(args) => run_transfer_embeddings(args),
        Command::TrainLemmatizer(args) => run_train_lemmatizer(args),
        Command::Lemmatize(args) => run_lemmatize(args),
        Command::TrainTagger(args) => run_train_tagger(args),
        Command::Tag(args) => run_tag(args),
        Command::BuildCharVocab(args) => run_build_char_vocab(args),
        Command::FillChars(args) => run_fill_chars(args),
        Command::TrainNgram(args) => run_train_ngram(args),
        Command::FillWords(args) => run_fill_words(args),
        Command::Evaluate(args) => run_evaluate(args),
        Command::Serve(args) => run_serve(args),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read_corpus(path: &Path) -> Result<Corpus> {
    let text = read_text(path)?;
    parse_conllu(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_tokenizer(path: &Path) -> Result<SubwordModel> {
    SubwordModel::from_json(&read_text(path)?)
        .with_context(|| format!("loading tokenizer {}", path.display()))
}

fn analyze_coverage(args: AnalyzeCoverageArgs) -> Result<()> {
    let model = load_tokenizer(&args.tokenizer)?;
    let text = read_text(&args.input)?;
    let report = coverage_report(&model, text.lines());
    let policy = CoveragePolicy {
        unknown_threshold_percent: args.unknown_threshold,
        top_rank: args.top_rank,
    };
    println!("tokens:        {}", report.total_tokens);
    println!("unknown:       {:.2}%", 100.0 * report.unknown_fraction);
    match report.unk_rank {
        Some(rank) => println!("unknown rank:  {rank}"),
        None => println!("unknown rank:  none"),
    }
    println!(
        "policy:        >{}% unknown or rank <= {}",
        policy.unknown_threshold_percent, policy.top_rank
    );
    println!("needs custom tokenizer: {}", needs_custom_tokenizer(&report, &policy));
    Ok(())
}

fn run_train_tokenizer(args: TrainTokenizerArgs) -> Result<()> {
    let config = match (args.vocab_size, args.lang.as_deref()) {
        (Some(vocab_size), _) => TokenizerConfig { vocab_size },
        (None, Some(lang)) => TokenizerConfig::for_language(lang),
        (None, None) => TokenizerConfig::default(),
    };
    println!("vocab size cap: {}", config.vocab_size);
    let text = read_text(&args.input)?;
    let model = train_tokenizer(text.lines(), &config)?;
    println!("pieces: {}", model.vocab_size());
    write_text(&args.out, &model.to_json())
}

fn run_transfer_embeddings(args: TransferEmbeddingsArgs) -> Result<()> {
    let old_model = load_tokenizer(&args.old_tokenizer)?;
    let new_model = load_tokenizer(&args.new_tokenizer)?;
    let matrix = EmbeddingMatrix::from_json(&read_text(&args.matrix)?)
        .with_context(|| format!("loading matrix {}", args.matrix.display()))?;
    let policy = match args.init {
        InitKind::Zero => InitPolicy::Zero,
        InitKind::Gaussian => InitPolicy::Gaussian { sigma: args.sigma, seed: args.seed },
    };
    match policy {
        InitPolicy::Zero => println!("init: zero"),
        InitPolicy::Gaussian { sigma, seed } => println!("init: gaussian sigma={sigma} seed={seed}"),
    }
    let moved = transfer_embeddings(&old_model, &matrix, &new_model, policy)?;
    println!("rows: {} (dimension {})", moved.rows.len(), moved.dimension);
    write_text(&args.out, &moved.to_json())
}

fn run_train_lemmatizer(args: TrainLemmatizerArgs) -> Result<()> {
    let mode = match (args.mode, args.lang.as_deref()) {
        (Some(ModeKind::Rules), _) => TrainMode::Rules,
        (Some(ModeKind::Dictionary), _) => TrainMode::Dictionary,
        (None, Some("lzh")) => TrainMode::Dictionary,
        (None, _) => TrainMode::Rules,
    };
    println!("mode: {}", match mode {
        TrainMode::Rules => "rules",
        TrainMode::Dictionary => "dictionary",
    });
    let corpus = read_corpus(&args.input)?;
    let model = train_lemmatizer(&corpus, mode)?;
    match &model {
        LemmaModel::Rules(inventory) => println!(
            "rules: {} by form, {} by suffix",
            inventory.form_rules().len(),
            inventory.suffix_rules().len()
        ),
        LemmaModel::Dictionary(dict) => println!("entries: {}", dict.len()),
    }
    write_text(&args.out, &model.to_json())
}

fn run_lemmatize(args: AnnotateArgs) -> Result<()> {
    let model = LemmaModel::from_json(&read_text(&args.model)?)
        .with_context(|| format!("loading lemmatizer {}", args.model.display()))?;
    let mut corpus = read_corpus(&args.input)?;
    model.annotate_corpus(&mut corpus);
    println!("annotated {} tokens", corpus.token_count());
    write_text(&args.out, &serialize_conllu(&corpus))
}

fn run_train_tagger(args: TrainTaggerArgs) -> Result<()> {
    let corpus = read_corpus(&args.input)?;
    let model = train_tagger(&corpus)?;
    println!(
        "labels: {} by form, {} by suffix",
        model.form_labels().len(),
        model.suffix_labels().len()
    );
    write_text(&args.out, &model.to_json())
}

fn run_tag(args: AnnotateArgs) -> Result<()> {
    let model = TagModel::from_json(&read_text(&args.model)?)
        .with_context(|| format!("loading tagger {}", args.model.display()))?;
    let mut corpus = read_corpus(&args.input)?;
    model.annotate_corpus(&mut corpus)?;
    println!("annotated {} tokens", corpus.token_count());
    write_text(&args.out, &serialize_conllu(&corpus))
}

fn run_build_char_vocab(args: BuildCharVocabArgs) -> Result<()> {
    let text = read_text(&args.input)?;
    let vocab = build_candidate_vocab(text.lines());
    println!("word types: {}", vocab.len());
    write_text(&args.out, &vocab.to_json())
}

fn run_fill_chars(args: FillCharsArgs) -> Result<()> {
    if let Some(lang) = args.lang.as_deref() {
        if !charfill::supports_language(lang) {
            bail!("character gap filling is not applicable for {lang}");
        }
    }
    let vocab = CandidateVocab::from_json(&read_text(&args.vocab)?)
        .with_context(|| format!("loading vocabulary {}", args.vocab.display()))?;
    let options = CharFillOptions { split_requires_both: args.require_both_parts, reranker: None };
    println!("split reading requires both parts: {}", options.split_requires_both);
    let text = read_text(&args.input)?;
    let mut out = String::new();
    for line in text.lines() {
        out.push_str(&charfill::fill_sentence_chars_with(&vocab, line, &options));
        out.push('\n');
    }
    write_text(&args.out, &out)
}

fn run_train_ngram(args: TrainNgramArgs) -> Result<()> {
    let model = load_tokenizer(&args.tokenizer)?;
    let text = read_text(&args.input)?;
    println!("order: {}, alpha: {}", args.order, args.alpha);
    let sequences: Vec<Vec<u32>> = text.lines().map(|l| model.encode(l)).collect();
    let scorer = train_ngram_scorer(sequences, args.order, args.alpha, model.vocab_size())?;
    println!("vocabulary: {} pieces", model.vocab_size());
    write_text(&args.out, &scorer.to_json())
}

fn run_fill_words(args: FillWordsArgs) -> Result<()> {
    let model = load_tokenizer(&args.tokenizer)?;
    let scorer = NGramScorer::from_json(&read_text(&args.scorer)?)
        .with_context(|| format!("loading scorer {}", args.scorer.display()))?;
    let single_token = args.single_token || args.lang.as_deref() == Some("lzh");
    let config = DecoderConfig { k: args.k, single_token_mode: single_token };
    println!("look-ahead k: {}, single-token mode: {}", config.k, config.single_token_mode);
    let text = read_text(&args.input)?;
    let mut out = String::new();
    for line in text.lines() {
        out.push_str(&fill_word_masks(&scorer, &model, line, &config)?);
        out.push('\n');
    }
    write_text(&args.out, &out)
}

fn run_evaluate(args: EvaluateArgs) -> Result<()> {
    let task = Task::from_name(&args.task)
        .with_context(|| format!("unknown task {:?}", args.task))?;
    let score = match task {
        Task::Pos | Task::Feats | Task::Lemma => {
            let gold = read_corpus(&args.gold)?;
            let pred = read_corpus(&args.pred)?;
            match task {
                Task::Pos => eval::score_pos(&gold, &pred)?,
                Task::Feats => eval::score_feats(&gold, &pred)?,
                _ => eval::score_lemma(&gold, &pred)?,
            }
        }
        Task::CharFill | Task::WordFill => {
            let damaged_path = args
                .damaged
                .as_ref()
                .context("--damaged is required for the fill tasks")?;
            let damaged: Vec<String> = read_text(damaged_path)?.lines().map(String::from).collect();
            let gold: Vec<String> = read_text(&args.gold)?.lines().map(String::from).collect();
            let pred: Vec<String> = read_text(&args.pred)?.lines().map(String::from).collect();
            if task == Task::CharFill {
                eval::score_char_fill(&damaged, &gold, &pred)?
            } else {
                eval::score_word_fill(&damaged, &gold, &pred)?
            }
        }
    };
    println!(
        "{}: {}/{} = {:.2}",
        score.task.name(),
        score.correct,
        score.counted,
        eval::round2(score.accuracy())
    );
    Ok(())
}

fn run_serve(args: ServeArgs) -> Result<()> {
    let models = match args.models {
        Some(path) => path,
        None => match std::env::var_os(MODELS_ENV) {
            Some(path) => PathBuf::from(path),
            None => bail!("pass --models or set {MODELS_ENV}"),
        },
    };
    let state = service::load_models(&models)?;
    println!("models: {}", models.display());
    println!("languages loaded: {}", state.loaded_codes().join(" "));
    let runtime = tokio::runtime::Runtime::new().context("starting async runtime")?;
    runtime.block_on(service::serve(state, &args.addr))
}
