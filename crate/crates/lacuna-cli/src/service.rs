//! Stateless HTTP annotation service.
//!
//! Models are loaded read-only at startup from one directory per
//! language (tokenizer.json, lemmatizer.json, tagger.json,
//! charvocab.json, ngram.json; each optional) and shared immutably
//! across requests. The annotation endpoints accept
//! `{"sentences": [...]}` and answer per sentence: lemmatize and tag
//! return one array of per-word strings per sentence, the fill endpoints
//! return one restored line per sentence.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use anyhow::{Context, Result};
use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Json, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::Deserialize;
use serde_json::json;

use lacuna::charfill::{self, CandidateVocab};
use lacuna::corpus::LANGUAGES;
use lacuna::lemma::LemmaModel;
use lacuna::morphotag::TagModel;
use lacuna::subword::SubwordModel;
use lacuna::wordfill::{fill_word_masks, DecoderConfig, NGramScorer, WordFillError};

/// Whatever subset of models one language directory holds.
#[derive(Default)]
pub struct ModelSet {
    pub tokenizer: Option<SubwordModel>,
    pub lemmatizer: Option<LemmaModel>,
    pub tagger: Option<TagModel>,
    pub charvocab: Option<CandidateVocab>,
    pub ngram: Option<NGramScorer>,
}

pub struct AppState {
    languages: HashMap<String, ModelSet>,
}

impl AppState {
    pub fn new(languages: HashMap<String, ModelSet>) -> Self {
        AppState { languages }
    }

    pub fn loaded_codes(&self) -> Vec<String> {
        let mut codes: Vec<String> = self.languages.keys().cloned().collect();
        codes.sort();
        codes
    }
}

/// Loads every language subdirectory of `dir`. A malformed model file
/// aborts startup; a missing one just leaves that capability off.
pub fn load_models(dir: &Path) -> Result<AppState> {
    let mut languages = HashMap::new();
    let entries =
        std::fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))?;
    for entry in entries {
        let entry = entry?;
        if !entry.file_type()?.is_dir() {
            continue;
        }
        let code = entry.file_name().to_string_lossy().into_owned();
        let lang_dir = entry.path();
        let mut set = ModelSet::default();
        if let Some(text) = read_optional(&lang_dir.join("tokenizer.json"))? {
            set.tokenizer = Some(
                SubwordModel::from_json(&text)
                    .with_context(|| format!("{code}: loading tokenizer.json"))?,
            );
        }
        if let Some(text) = read_optional(&lang_dir.join("lemmatizer.json"))? {
            set.lemmatizer = Some(
                LemmaModel::from_json(&text)
                    .with_context(|| format!("{code}: loading lemmatizer.json"))?,
            );
        }
        if let Some(text) = read_optional(&lang_dir.join("tagger.json"))? {
            set.tagger = Some(
                TagModel::from_json(&text)
                    .with_context(|| format!("{code}: loading tagger.json"))?,
            );
        }
        if let Some(text) = read_optional(&lang_dir.join("charvocab.json"))? {
            set.charvocab = Some(
                CandidateVocab::from_json(&text)
                    .with_context(|| format!("{code}: loading charvocab.json"))?,
            );
        }
        if let Some(text) = read_optional(&lang_dir.join("ngram.json"))? {
            set.ngram = Some(
                NGramScorer::from_json(&text)
                    .with_context(|| format!("{code}: loading ngram.json"))?,
            );
        }
        languages.insert(code, set);
    }
    Ok(AppState::new(languages))
}

fn read_optional(path: &Path) -> Result<Option<String>> {
    match std::fs::read_to_string(path) {
        Ok(text) => Ok(Some(text)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e).with_context(|| format!("reading {}", path.display())),
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/v1/languages", get(languages))
        .route("/v1/{lang}/lemmatize", post(lemmatize))
        .route("/v1/{lang}/tag", post(tag))
        .route("/v1/{lang}/fill-chars", post(fill_chars))
        .route("/v1/{lang}/fill-words", post(fill_words))
        .with_state(Arc::new(state))
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(state: AppState, addr: &str) -> Result<()> {
    let listener =
        tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
    println!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).await.context("serving")
}

async fn health() -> &'static str {
    "ok"
}

async fn languages(State(state): State<Arc<AppState>>) -> Json<serde_json::Value> {
    let registry: Vec<serde_json::Value> = LANGUAGES
        .iter()
        .map(|l| {
            json!({
                "code": l.code,
                "name": l.name,
                "train_sentences": l.train_sentences,
                "valid_sentences": l.valid_sentences,
                "test_sentences": l.test_sentences,
                "gap_fill_only": l.gap_fill_only,
            })
        })
        .collect();
    Json(json!({ "languages": registry, "loaded": state.loaded_codes() }))
}

#[derive(Deserialize)]
struct SentencesRequest {
    sentences: Vec<String>,
}

fn error_response(status: StatusCode, message: String) -> Response {
    (status, Json(json!({ "error": message }))).into_response()
}

fn parse_body(body: &Bytes) -> Result<SentencesRequest, Response> {
    serde_json::from_slice(body)
        .map_err(|e| error_response(StatusCode::BAD_REQUEST, format!("malformed body: {e}")))
}

fn models_for<'a>(state: &'a AppState, lang: &str) -> Result<&'a ModelSet, Response> {
    state.languages.get(lang).ok_or_else(|| {
        error_response(StatusCode::NOT_FOUND, format!("no models loaded for {lang}"))
    })
}

async fn lemmatize(
    State(state): State<Arc<AppState>>,
    UrlPath(lang): UrlPath<String>,
    body: Bytes,
) -> Response {
    let request = match parse_body(&body) {
        Ok(r) => r,
        Err(e) => return e,
    };
    let set = match models_for(&state, &lang) {
        Ok(s) => s,
        Err(e) => return e,
    };
    let Some(model) = &set.lemmatizer else {
        return error_response(StatusCode::NOT_FOUND, format!("no lemmatizer loaded for {lang}"));
    };
    let out: Vec<Vec<String>> = request
        .sentences
        .iter()
        .map(|s| s.split_whitespace().map(|w| model.predict_form(w)).collect())
        .collect();
    Json(json!({ "sentences": out })).into_response()
}

async fn tag(
    State(state): State<Arc<AppState>>,
    UrlPath(lang): UrlPath<String>,
    body: Bytes,
) -> Response {
    let request = match parse_body(&body) {
        Ok(r) => r,
        Err(e) => return e,
    };
    let set = match models_for(&state, &lang) {
        Ok(s) => s,
        Err(e) => return e,
    };
    let Some(model) = &set.tagger else {
        return error_response(StatusCode::NOT_FOUND, format!("no tagger loaded for {lang}"));
    };
    let out: Vec<Vec<String>> = request
        .sentences
        .iter()
        .map(|s| s.split_whitespace().map(|w| model.predict_label(w).to_string()).collect())
        .collect();
    Json(json!({ "sentences": out })).into_response()
}

async fn fill_chars(
    State(state): State<Arc<AppState>>,
    UrlPath(lang): UrlPath<String>,
    body: Bytes,
) -> Response {
    let request = match parse_body(&body) {
        Ok(r) => r,
        Err(e) => return e,
    };
    if !charfill::supports_language(&lang) {
        return error_response(
            StatusCode::BAD_REQUEST,
            format!("character gap filling is not applicable for {lang}"),
        );
    }
    let set = match models_for(&state, &lang) {
        Ok(s) => s,
        Err(e) => return e,
    };
    let Some(vocab) = &set.charvocab else {
        return error_response(
            StatusCode::NOT_FOUND,
            format!("no candidate vocabulary loaded for {lang}"),
        );
    };
    let out: Vec<String> =
        request.sentences.iter().map(|s| charfill::fill_sentence_chars(vocab, s)).collect();
    Json(json!({ "sentences": out })).into_response()
}

async fn fill_words(
    State(state): State<Arc<AppState>>,
    UrlPath(lang): UrlPath<String>,
    body: Bytes,
) -> Response {
    let request = match parse_body(&body) {
        Ok(r) => r,
        Err(e) => return e,
    };
    let set = match models_for(&state, &lang) {
        Ok(s) => s,
        Err(e) => return e,
    };
    let (Some(model), Some(scorer)) = (&set.tokenizer, &set.ngram) else {
        return error_response(
            StatusCode::NOT_FOUND,
            format!("no tokenizer and scorer loaded for {lang}"),
        );
    };
    // Classical Chinese slots hold exactly one piece.
    let config = DecoderConfig { single_token_mode: lang == "lzh", ..DecoderConfig::default() };
    let mut out = Vec::with_capacity(request.sentences.len());
    for sentence in &request.sentences {
        match fill_word_masks(scorer, model, sentence, &config) {
            Ok(restored) => out.push(restored),
            Err(e @ WordFillError::MalformedMaskInput(_)) => {
                return error_response(StatusCode::BAD_REQUEST, e.to_string());
            }
            Err(e) => {
                return error_response(StatusCode::INTERNAL_SERVER_ERROR, e.to_string());
            }
        }
    }
    Json(json!({ "sentences": out })).into_response()
}
