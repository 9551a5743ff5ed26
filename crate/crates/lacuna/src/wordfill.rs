//! Filling whole-word gaps with a masked-language-model interface.
//!
//! A damaged line arrives with `<mask>` standing for each lost word. Any
//! scorer that can turn (piece sequence, masked position) into a
//! distribution over the piece vocabulary can drive the decoder; this
//! module ships an n-gram scorer with additive smoothing, plus a scorer
//! that replays precomputed distributions produced by an external model.
//!
//! Decoding is greedy left to right. Each mask is first filled with the
//! best word-initial piece. Because a word may be longer than one piece,
//! the decoder then spends up to `k` look-ahead steps: it appends a fresh
//! mask, asks the scorer again, and commits the best piece unless that
//! piece would start a new word (or is a special), which ends the word.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::subword::{is_special_id, SubwordModel, BEGIN_ID, END_ID, MASK_ID, MASK_PIECE};
use crate::text::whitespace_spans;

#[derive(Debug, Error, PartialEq)]
pub enum WordFillError {
    #[error("n-gram order must be at least 2, got {0}")]
    InvalidOrder(usize),
    #[error("smoothing alpha must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("vocabulary size must cover at least the 5 special pieces, got {0}")]
    InvalidVocabSize(usize),
    #[error("no token sequences to train on")]
    EmptyTrainingData,
    #[error("piece id {id} is outside the vocabulary of size {vocab_size}")]
    PieceIdOutOfRange { id: u32, vocab_size: usize },
    #[error("mask position {pos} is outside the sequence of length {len}")]
    MaskPositionOutOfRange { pos: usize, len: usize },
    #[error("scorer vocabulary size {scorer} does not match model vocabulary size {model}")]
    VocabularyMismatch { scorer: usize, model: usize },
    #[error("the mask literal must stand alone as a word, found {0:?}")]
    MalformedMaskInput(String),
    #[error("the vocabulary has no word-initial piece")]
    NoWordInitialPiece,
    #[error("the vocabulary has no committable piece")]
    NoCandidatePiece,
    #[error("no stored distribution for the queried sequence and position")]
    MissingDistribution,
    #[error("line {line}: bad score record: {detail}")]
    MalformedRecord { line: usize, detail: String },
    #[error("malformed scorer file: {0}")]
    MalformedFile(String),
    #[error("unsupported scorer file version {0}; this build reads version 1")]
    UnsupportedVersion(u32),
}

/// A probability distribution over the piece vocabulary for one masked
/// position. Always normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskDistribution {
    probs: Vec<f64>,
}

impl MaskDistribution {
    /// Wraps raw probabilities; they must be finite, non-negative, and
    /// sum to 1 within 1e-9.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self, WordFillError> {
        if probs.is_empty() {
            return Err(WordFillError::InvalidVocabSize(0));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(WordFillError::MalformedFile(
                "probabilities must be finite and non-negative".to_string(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(WordFillError::MalformedFile(format!(
                "probabilities sum to {sum}, expected 1"
            )));
        }
        Ok(MaskDistribution { probs })
    }

    fn from_log_scores(mut scores: Vec<f64>) -> Self {
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for s in scores.iter_mut() {
            *s = (*s - max).exp();
            sum += *s;
        }
        for s in scores.iter_mut() {
            *s /= sum;
        }
        MaskDistribution { probs: scores }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, id: u32) -> Option<f64> {
        self.probs.get(id as usize).copied()
    }

    /// The most probable piece; ties go to the smaller id.
    pub fn argmax(&self) -> u32 {
        let mut best = 0u32;
        let mut best_prob = self.probs[0];
        for (id, &p) in self.probs.iter().enumerate().skip(1) {
            if p > best_prob {
                best = id as u32;
                best_prob = p;
            }
        }
        best
    }

    /// The most probable piece among `ids`; ties go to the smaller id.
    /// Ids outside the vocabulary are ignored.
    pub fn argmax_over<I>(&self, ids: I) -> Option<u32>
    where
        I: IntoIterator<Item = u32>,
    {
        let mut best: Option<(u32, f64)> = None;
        for id in ids {
            let Some(p) = self.prob(id) else { continue };
            best = match best {
                None => Some((id, p)),
                Some((bid, bp)) => {
                    if p > bp || (p == bp && id < bid) {
                        Some((id, p))
                    } else {
                        Some((bid, bp))
                    }
                }
            };
        }
        best.map(|(id, _)| id)
    }
}

/// Anything that can score a masked position over a piece vocabulary.
pub trait MaskScorer {
    fn vocab_size(&self) -> usize;

    /// Distribution over the vocabulary for the piece at `mask_pos` given
    /// the rest of `pieces` as context.
    fn score_mask(&self, pieces: &[u32], mask_pos: usize)
        -> Result<MaskDistribution, WordFillError>;
}

#[derive(Debug)]
struct ContextCounts {
    total: u64,
    counts: HashMap<u32, u64>,
}

/// An n-gram model with additive smoothing, queried pseudo-likelihood
/// style: the distribution for a masked position is the normalized
/// product of the conditional probabilities of every n-gram window that
/// covers it.
#[derive(Debug)]
pub struct NGramScorer {
    order: usize,
    alpha: f64,
    vocab_size: usize,
    contexts: HashMap<Vec<u32>, ContextCounts>,
}

pub const DEFAULT_ORDER: usize = 3;
pub const DEFAULT_ALPHA: f64 = 0.1;

/// Counts n-grams over the given piece sequences. Each sequence is padded
/// with `order - 1` begin markers and one end marker; empty sequences are
/// skipped.
pub fn train_ngram_scorer<I>(
    sequences: I,
    order: usize,
    alpha: f64,
    vocab_size: usize,
) -> Result<NGramScorer, WordFillError>
where
    I: IntoIterator,
    I::Item: AsRef<[u32]>,
{
    if order < 2 {
        return Err(WordFillError::InvalidOrder(order));
    }
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(WordFillError::InvalidAlpha(alpha));
    }
    if vocab_size <= END_ID as usize {
        return Err(WordFillError::InvalidVocabSize(vocab_size));
    }
    let mut contexts: HashMap<Vec<u32>, ContextCounts> = HashMap::new();
    let mut trained = false;
    for sequence in sequences {
        let pieces = sequence.as_ref();
        if pieces.is_empty() {
            continue;
        }
        for &id in pieces {
            if id as usize >= vocab_size {
                return Err(WordFillError::PieceIdOutOfRange { id, vocab_size });
            }
        }
        trained = true;
        let padded = pad(pieces, order);
        for window in padded.windows(order) {
            let entry = contexts
                .entry(window[..order - 1].to_vec())
                .or_insert_with(|| ContextCounts { total: 0, counts: HashMap::new() });
            entry.total += 1;
            *entry.counts.entry(window[order - 1]).or_insert(0) += 1;
        }
    }
    if !trained {
        return Err(WordFillError::EmptyTrainingData);
    }
    Ok(NGramScorer { order, alpha, vocab_size, contexts })
}

fn pad(pieces: &[u32], order: usize) -> Vec<u32> {
    let mut padded = Vec::with_capacity(pieces.len() + order);
    padded.extend(std::iter::repeat_n(BEGIN_ID, order - 1));
    padded.extend_from_slice(pieces);
    padded.push(END_ID);
    padded
}

impl NGramScorer {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Smoothed probability of `target` following `context`:
    /// (count + alpha) / (context total + alpha * vocab size).
    pub fn conditional(&self, context: &[u32], target: u32) -> f64 {
        let (count, total) = match self.contexts.get(context) {
            Some(c) => (c.counts.get(&target).copied().unwrap_or(0), c.total),
            None => (0, 0),
        };
        (count as f64 + self.alpha) / (total as f64 + self.alpha * self.vocab_size as f64)
    }

    /// The pseudo-likelihood distribution for the piece at `mask_pos`:
    /// per candidate, the log conditional probabilities of every window
    /// covering the position are summed, then the scores are normalized.
    pub fn mask_distribution(
        &self,
        pieces: &[u32],
        mask_pos: usize,
    ) -> Result<MaskDistribution, WordFillError> {
        if mask_pos >= pieces.len() {
            return Err(WordFillError::MaskPositionOutOfRange {
                pos: mask_pos,
                len: pieces.len(),
            });
        }
        for &id in pieces {
            if id as usize >= self.vocab_size {
                return Err(WordFillError::PieceIdOutOfRange { id, vocab_size: self.vocab_size });
            }
        }
        let n = self.order;
        let mut padded = pad(pieces, n);
        let p = mask_pos + n - 1;
        let s_max = p.min(padded.len() - n);
        let mut log_scores = vec![0.0f64; self.vocab_size];
        for s in (p + 1 - n)..=s_max {
            let t_idx = p - s;
            let original = padded[p];
            for t in 0..self.vocab_size as u32 {
                padded[s + t_idx] = t;
                let window = &padded[s..s + n];
                let cond = self.conditional(&window[..n - 1], window[n - 1]);
                log_scores[t as usize] += cond.ln();
            }
            padded[p] = original;
        }
        Ok(MaskDistribution::from_log_scores(log_scores))
    }

    pub fn to_json(&self) -> String {
        let mut contexts: Vec<(Vec<u32>, Vec<(u32, u64)>)> = self
            .contexts
            .iter()
            .map(|(ctx, cc)| {
                let mut counts: Vec<(u32, u64)> =
                    cc.counts.iter().map(|(t, c)| (*t, *c)).collect();
                counts.sort();
                (ctx.clone(), counts)
            })
            .collect();
        contexts.sort();
        let file = NGramFile {
            version: NGRAM_FILE_VERSION,
            order: self.order,
            alpha: self.alpha,
            vocab_size: self.vocab_size,
            contexts,
        };
        let mut text = serde_json::to_string_pretty(&file).expect("scorer serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, WordFillError> {
        let file: NGramFile =
            serde_json::from_str(text).map_err(|e| WordFillError::MalformedFile(e.to_string()))?;
        if file.version != NGRAM_FILE_VERSION {
            return Err(WordFillError::UnsupportedVersion(file.version));
        }
        if file.order < 2 {
            return Err(WordFillError::InvalidOrder(file.order));
        }
        if !file.alpha.is_finite() || file.alpha <= 0.0 {
            return Err(WordFillError::InvalidAlpha(file.alpha));
        }
        if file.vocab_size <= END_ID as usize {
            return Err(WordFillError::InvalidVocabSize(file.vocab_size));
        }
        let mut contexts = HashMap::new();
        for (ctx, counts) in file.contexts {
            if ctx.len() != file.order - 1 {
                return Err(WordFillError::MalformedFile(format!(
                    "context {ctx:?} does not have order-1 = {} pieces",
                    file.order - 1
                )));
            }
            let mut cc = ContextCounts { total: 0, counts: HashMap::new() };
            for (target, count) in counts {
                cc.total += count;
                if cc.counts.insert(target, count).is_some() {
                    return Err(WordFillError::MalformedFile(format!(
                        "target {target} repeats under context {ctx:?}"
                    )));
                }
            }
            if contexts.insert(ctx.clone(), cc).is_some() {
                return Err(WordFillError::MalformedFile(format!("context {ctx:?} repeats")));
            }
        }
        Ok(NGramScorer {
            order: file.order,
            alpha: file.alpha,
            vocab_size: file.vocab_size,
            contexts,
        })
    }
}

impl MaskScorer for NGramScorer {
    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn score_mask(
        &self,
        pieces: &[u32],
        mask_pos: usize,
    ) -> Result<MaskDistribution, WordFillError> {
        self.mask_distribution(pieces, mask_pos)
    }
}

const NGRAM_FILE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct NGramFile {
    version: u32,
    order: usize,
    alpha: f64,
    vocab_size: usize,
    contexts: Vec<(Vec<u32>, Vec<(u32, u64)>)>,
}

/// Replays distributions computed by an external model. The store is
/// keyed by the exact piece sequence and mask position.
#[derive(Debug)]
pub struct PrecomputedScorer {
    vocab_size: usize,
    records: HashMap<(Vec<u32>, usize), MaskDistribution>,
}

impl PrecomputedScorer {
    /// Parses JSON Lines records of the form
    /// `{"pieces": [...], "mask": <position>, "probs": [...]}`.
    pub fn from_jsonl(text: &str) -> Result<Self, WordFillError> {
        let mut vocab_size = None;
        let mut records = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let record: ScoreRecord = serde_json::from_str(raw)
                .map_err(|e| WordFillError::MalformedRecord { line, detail: e.to_string() })?;
            if record.mask >= record.pieces.len() {
                return Err(WordFillError::MalformedRecord {
                    line,
                    detail: format!(
                        "mask position {} outside sequence of length {}",
                        record.mask,
                        record.pieces.len()
                    ),
                });
            }
            match vocab_size {
                None => vocab_size = Some(record.probs.len()),
                Some(v) if v != record.probs.len() => {
                    return Err(WordFillError::MalformedRecord {
                        line,
                        detail: format!("expected {v} probabilities, found {}", record.probs.len()),
                    });
                }
                Some(_) => {}
            }
            let dist = MaskDistribution::from_probs(record.probs)
                .map_err(|e| WordFillError::MalformedRecord { line, detail: e.to_string() })?;
            records.insert((record.pieces, record.mask), dist);
        }
        let vocab_size = vocab_size.ok_or(WordFillError::EmptyTrainingData)?;
        Ok(PrecomputedScorer { vocab_size, records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[derive(Deserialize)]
struct ScoreRecord {
    pieces: Vec<u32>,
    mask: usize,
    probs: Vec<f64>,
}

impl MaskScorer for PrecomputedScorer {
    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn score_mask(
        &self,
        pieces: &[u32],
        mask_pos: usize,
    ) -> Result<MaskDistribution, WordFillError> {
        self.records
            .get(&(pieces.to_vec(), mask_pos))
            .cloned()
            .ok_or(WordFillError::MissingDistribution)
    }
}

/// Decoder settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecoderConfig {
    /// Look-ahead budget: how many extra pieces one mask may grow by.
    pub k: usize,
    /// Commit exactly one piece per mask, chosen over the whole
    /// non-special vocabulary. For Classical Chinese, where a lost slot
    /// is one piece and word-initial marking carries no signal.
    pub single_token_mode: bool,
}

pub const DEFAULT_LOOK_AHEAD: usize = 1;

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig { k: DEFAULT_LOOK_AHEAD, single_token_mode: false }
    }
}

/// Replaces every `<mask>` word in `line` with a decoded word.
///
/// Unmasked words and all whitespace pass through verbatim; the mask
/// literal must stand alone as a word. Masks fill left to right, and
/// pieces committed for one mask are context for the next. The output
/// never contains the mask literal.
pub fn fill_word_masks(
    scorer: &dyn MaskScorer,
    model: &SubwordModel,
    line: &str,
    config: &DecoderConfig,
) -> Result<String, WordFillError> {
    if scorer.vocab_size() != model.vocab_size() {
        return Err(WordFillError::VocabularyMismatch {
            scorer: scorer.vocab_size(),
            model: model.vocab_size(),
        });
    }
    let spans = whitespace_spans(line);
    for (is_word, span) in &spans {
        if *is_word && span.contains(MASK_PIECE) && *span != MASK_PIECE {
            return Err(WordFillError::MalformedMaskInput(span.to_string()));
        }
    }
    if !spans.iter().any(|(is_word, span)| *is_word && *span == MASK_PIECE) {
        return Ok(line.to_string());
    }
    let word_initial = model.word_initial_ids();
    if !config.single_token_mode && word_initial.is_empty() {
        return Err(WordFillError::NoWordInitialPiece);
    }

    let mut seq: Vec<u32> = Vec::new();
    let mut mask_slots: Vec<(usize, usize)> = Vec::new();
    for (span_idx, (is_word, span)) in spans.iter().enumerate() {
        if !*is_word {
            continue;
        }
        if *span == MASK_PIECE {
            mask_slots.push((span_idx, seq.len()));
            seq.push(MASK_ID);
        } else {
            seq.extend(model.encode_word(span));
        }
    }

    let mut committed: HashMap<usize, Vec<u32>> = HashMap::new();
    let mut shift = 0usize;
    for (span_idx, base_pos) in mask_slots {
        let pos = base_pos + shift;
        let mut word_pieces: Vec<u32> = Vec::new();
        if config.single_token_mode {
            let dist = scorer.score_mask(&seq, pos)?;
            let candidates =
                (0..model.vocab_size() as u32).filter(|&id| !is_special_id(id));
            let best = dist.argmax_over(candidates).ok_or(WordFillError::NoCandidatePiece)?;
            seq[pos] = best;
            word_pieces.push(best);
        } else {
            let dist = scorer.score_mask(&seq, pos)?;
            let best = dist
                .argmax_over(word_initial.iter().copied())
                .ok_or(WordFillError::NoWordInitialPiece)?;
            seq[pos] = best;
            word_pieces.push(best);
            for _ in 0..config.k {
                let insert_at = pos + word_pieces.len();
                seq.insert(insert_at, MASK_ID);
                let dist = scorer.score_mask(&seq, insert_at)?;
                let next = dist.argmax();
                if is_special_id(next) || model.is_word_initial(next) {
                    seq.remove(insert_at);
                    break;
                }
                seq[insert_at] = next;
                word_pieces.push(next);
            }
        }
        shift += word_pieces.len() - 1;
        committed.insert(span_idx, word_pieces);
    }

    let marker = model.boundary_marker();
    let mut out = String::new();
    for (span_idx, (_, span)) in spans.iter().enumerate() {
        match committed.get(&span_idx) {
            Some(pieces) => {
                for (i, &id) in pieces.iter().enumerate() {
                    let piece = model.piece(id).expect("committed ids are in the vocabulary");
                    let text = if i == 0 { piece.strip_prefix(marker).unwrap_or(piece) } else { piece };
                    out.push_str(text);
                }
            }
            None => out.push_str(span),
        }
    }
    Ok(out)
}
