//! C ABI over the cword toolkit.
//!
//! Every fallible function returns a `CwordStatus`. On failure the message is
//! available from `cword_last_error()` on the same thread until the next
//! call. Strings handed out by the library must be released with
//! `cword_string_free`; handles with their matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use cword::corpus::{segment, tokenize, TokenId, Vocabulary, MAX_SENTENCE_LEN};
use cword::lexicon::{extract_content_sequence, lemmatize, ExtractionMode, FunctionLexicon};
use cword::metrics::{content_coverage, sentence_bleu};
use cword::models::Model;
use cword::pipeline::{generate, load_checkpoint, DecodeOptions};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CwordStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Io = 4,
    Model = 5,
    Panic = 6,
}

/// Extraction mode for `cword_extract`.
pub const CWORD_MODE_TRAINING: c_int = 0;
pub const CWORD_MODE_EVALUATION: c_int = 1;

/// Opaque function-word lexicon.
pub struct CwordLexicon {
    inner: FunctionLexicon,
}

/// Opaque trained model with its vocabulary.
pub struct CwordModel {
    model: Model,
    params: cword::neural::ParamSet<f32>,
    vocab: Vocabulary,
    window: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(CwordStatus, String);

impl Failure {
    fn new(status: CwordStatus, msg: impl std::fmt::Display) -> Self {
        Self(status, msg.to_string())
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CwordStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CwordStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            CwordStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(CwordStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(CwordStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// # Safety
/// `p` must be null or valid for writes for the caller-chosen lifetime.
unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure::new(CwordStatus::NullArgument, format!("{what} is null")))
}

fn to_c(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure::new(CwordStatus::InvalidArgument, "output contains a NUL byte"))
}

fn words(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

/// Message of the last failed call on this thread, or null. Owned by the
/// library.
#[no_mangle]
pub extern "C" fn cword_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cword_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn cword_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cword_lexicon_builtin(out: *mut *mut CwordLexicon) -> CwordStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = Box::into_raw(Box::new(CwordLexicon {
            inner: FunctionLexicon::builtin(),
        }));
        Ok(())
    })
}

/// Reads a lexicon file (`category: word word ...` lines).
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cword_lexicon_load(path: *const c_char, out: *mut *mut CwordLexicon) -> CwordStatus {
    guard(|| {
        let path = text(path, "path")?;
        let out = out_ptr(out, "out")?;
        let body = std::fs::read_to_string(path).map_err(|e| Failure::new(CwordStatus::Io, format!("{path}: {e}")))?;
        let inner = FunctionLexicon::parse(&body).map_err(|e| Failure::new(CwordStatus::InvalidArgument, e))?;
        *out = Box::into_raw(Box::new(CwordLexicon { inner }));
        Ok(())
    })
}

/// # Safety
/// `lex` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn cword_lexicon_free(lex: *mut CwordLexicon) {
    if !lex.is_null() {
        drop(Box::from_raw(lex));
    }
}

/// Content sequence of a space-tokenized sentence, space-joined.
///
/// # Safety
/// Pointers must be valid; `*out` receives a string for `cword_string_free`.
#[no_mangle]
pub unsafe extern "C" fn cword_extract(
    lex: *const CwordLexicon,
    sentence: *const c_char,
    mode: c_int,
    out: *mut *mut c_char,
) -> CwordStatus {
    guard(|| {
        let lex = lex
            .as_ref()
            .ok_or_else(|| Failure::new(CwordStatus::NullArgument, "lexicon is null"))?;
        let sentence = text(sentence, "sentence")?;
        let mode = match mode {
            CWORD_MODE_TRAINING => ExtractionMode::Training,
            CWORD_MODE_EVALUATION => ExtractionMode::Evaluation,
            m => return Err(Failure::new(CwordStatus::InvalidArgument, format!("unknown mode {m}"))),
        };
        let out = out_ptr(out, "out")?;
        *out = to_c(extract_content_sequence(&words(sentence), &lex.inner, mode).to_string())?;
        Ok(())
    })
}

/// # Safety
/// `word` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cword_lemmatize(word: *const c_char, out: *mut *mut c_char) -> CwordStatus {
    guard(|| {
        let word = text(word, "word")?;
        let out = out_ptr(out, "out")?;
        *out = to_c(lemmatize(word))?;
        Ok(())
    })
}

/// Sentence BLEU of order `n` (1 or 2) in percent, on space-tokenized text.
///
/// # Safety
/// String arguments must be NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn cword_sentence_bleu(
    reference: *const c_char,
    hypothesis: *const c_char,
    n: c_int,
    out: *mut c_double,
) -> CwordStatus {
    guard(|| {
        let (r, h) = (words(text(reference, "reference")?), words(text(hypothesis, "hypothesis")?));
        let out = out_ptr(out, "out")?;
        let n = usize::try_from(n).map_err(|_| Failure::new(CwordStatus::InvalidArgument, "negative order"))?;
        *out = sentence_bleu(&r, &h, n).map_err(|e| Failure::new(CwordStatus::InvalidArgument, e))?;
        Ok(())
    })
}

/// Share of reference content types found in the hypothesis, in percent.
/// Both arguments are space-joined content sequences.
///
/// # Safety
/// String arguments must be NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn cword_content_coverage(
    reference: *const c_char,
    hypothesis: *const c_char,
    out: *mut c_double,
) -> CwordStatus {
    guard(|| {
        let (r, h) = (words(text(reference, "reference")?), words(text(hypothesis, "hypothesis")?));
        let out = out_ptr(out, "out")?;
        *out = content_coverage(&r, &h).map_err(|e| Failure::new(CwordStatus::InvalidArgument, e))?;
        Ok(())
    })
}

/// Loads a checkpoint directory and the vocabulary it was trained with.
///
/// # Safety
/// String arguments must be NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn cword_model_load(
    checkpoint_dir: *const c_char,
    vocab_path: *const c_char,
    out: *mut *mut CwordModel,
) -> CwordStatus {
    guard(|| {
        let dir = text(checkpoint_dir, "checkpoint_dir")?;
        let vocab_path = text(vocab_path, "vocab_path")?;
        let out = out_ptr(out, "out")?;
        let vocab = Vocabulary::load(Path::new(vocab_path)).map_err(|e| Failure::new(CwordStatus::Io, e))?;
        let ck = load_checkpoint(Path::new(dir), Some(&vocab)).map_err(|e| Failure::new(CwordStatus::Model, e))?;
        let model = ck.model().map_err(|e| Failure::new(CwordStatus::Model, e))?;
        *out = Box::into_raw(Box::new(CwordModel {
            model,
            window: ck.config.window.max(1),
            params: ck.params,
            vocab,
        }));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn cword_model_free(model: *mut CwordModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Greedy two-step generation. `context` is raw text; it is tokenized and
/// split into sentences, and the last ones up to the model's window are
/// used. `*content` is empty for models without a content decoder.
///
/// # Safety
/// `model` must be a live handle, `context` NUL-terminated, and both output
/// pointers valid.
#[no_mangle]
pub unsafe extern "C" fn cword_model_generate(
    model: *const CwordModel,
    context: *const c_char,
    content: *mut *mut c_char,
    response: *mut *mut c_char,
) -> CwordStatus {
    guard(|| {
        let m = model
            .as_ref()
            .ok_or_else(|| Failure::new(CwordStatus::NullArgument, "model is null"))?;
        let context = text(context, "context")?;
        let content = out_ptr(content, "content")?;
        let response = out_ptr(response, "response")?;
        let mut ctx: Vec<Vec<TokenId>> = segment(tokenize(context))
            .into_iter()
            .map(|mut s| {
                s.truncate(MAX_SENTENCE_LEN);
                m.vocab.encode_all(&s)
            })
            .collect();
        if ctx.is_empty() {
            return Err(Failure::new(CwordStatus::InvalidArgument, "context has no tokens"));
        }
        let skip = ctx.len().saturating_sub(m.window);
        ctx.drain(..skip);
        let g = generate(&m.model, &m.params, &ctx, &DecodeOptions::default())
            .map_err(|e| Failure::new(CwordStatus::Model, e))?;
        let c = to_c(m.vocab.decode_all(&g.content).join(" "))?;
        let r = match to_c(m.vocab.decode_all(&g.response).join(" ")) {
            Ok(r) => r,
            Err(e) => {
                cword_string_free(c);
                return Err(e);
            }
        };
        *content = c;
        *response = r;
        Ok(())
    })
}
