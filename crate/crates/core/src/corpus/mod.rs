//! Dialog corpora: raw-format adapters, preprocessing, vocabularies and
//! fixed-window contexts.

mod canonical;
mod cornell;
mod dailydialog;
mod split;
mod tokenize;
mod vocab;
mod window;

use std::fmt;

pub use canonical::{read_canonical, write_canonical, CanonicalFiles};
pub use cornell::{load_cornell, parse_cornell_line, parse_cornell_movie, CornellUtterance};
pub use dailydialog::{parse_dailydialog, parse_dailydialog_with_acts, read_dailydialog};
pub use split::{split_dialogs, Split, SplitAssignment};
pub use tokenize::{preprocess_dialog, segment, tokenize, MAX_SENTENCE_LEN};
pub use vocab::{build_vocab, TokenId, Vocabulary, EOS, EOS_ID, PAD, PAD_ID, SOS, SOS_ID, SPECIALS, UNK, UNK_ID};
pub use window::{to_context_windows, DEFAULT_WINDOW};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("dialog has no non-empty turns")]
    EmptyDialog,
    #[error("sentence must contain at least one token")]
    EmptySentence,
    #[error("invalid token {0:?}")]
    InvalidToken(String),
    #[error("vocabulary cap must be at least 1")]
    InvalidCap,
    #[error("malformed vocabulary file: {0}")]
    MalformedVocab(String),
    #[error("malformed canonical corpus at line {line}: {reason}")]
    MalformedCanonical { line: usize, reason: String },
    #[error("unknown dialog act code {0:?}")]
    UnknownDialogAct(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CorpusError {
    pub(crate) fn io(path: impl fmt::Display, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_string(),
            source,
        }
    }
}

/// Items parsed from a corpus plus the records that were skipped.
#[derive(Clone, Debug)]
pub struct Parsed<T> {
    pub items: Vec<T>,
    pub warnings: Vec<String>,
}

impl<T> Default for Parsed<T> {
    fn default() -> Self {
        Self {
            items: Vec::new(),
            warnings: Vec::new(),
        }
    }
}

impl<T> Parsed<T> {
    pub(crate) fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }
}

/// A non-empty list of whitespace-free tokens.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sentence {
    tokens: Vec<String>,
}

impl Sentence {
    pub fn new(tokens: Vec<String>) -> Result<Self, CorpusError> {
        if tokens.is_empty() {
            return Err(CorpusError::EmptySentence);
        }
        if let Some(bad) = tokens
            .iter()
            .find(|t| t.is_empty() || t.chars().any(char::is_whitespace))
        {
            return Err(CorpusError::InvalidToken(bad.clone()));
        }
        Ok(Self { tokens })
    }

    /// Splits already-tokenized text on whitespace.
    pub fn from_tokenized(line: &str) -> Result<Self, CorpusError> {
        Self::new(line.split_whitespace().map(str::to_string).collect())
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tokens.join(" "))
    }
}

/// DailyDialog's four dialog-act labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DialogAct {
    Inform,
    Question,
    Directive,
    Commissive,
}

impl DialogAct {
    pub const ALL: [DialogAct; 4] = [Self::Inform, Self::Question, Self::Directive, Self::Commissive];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// DailyDialog numbers the acts 1–4.
    pub fn from_code(code: &str) -> Result<Self, CorpusError> {
        match code.trim() {
            "1" => Ok(Self::Inform),
            "2" => Ok(Self::Question),
            "3" => Ok(Self::Directive),
            "4" => Ok(Self::Commissive),
            other => Err(CorpusError::UnknownDialogAct(other.to_string())),
        }
    }

    pub fn code(self) -> u8 {
        self as u8 + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Inform => "inform",
            Self::Question => "question",
            Self::Directive => "directive",
            Self::Commissive => "commissive",
        }
    }
}

/// A dialog as read from a raw corpus: untokenized turns, speakers alternating.
#[derive(Clone, Debug, PartialEq)]
pub struct RawDialog {
    pub turns: Vec<String>,
    /// One act per turn, when the corpus provides them.
    pub acts: Option<Vec<DialogAct>>,
}

impl RawDialog {
    /// Turn indices where the speaker switches.
    pub fn turn_boundaries(&self) -> Vec<usize> {
        (1..self.turns.len()).collect()
    }
}

/// A preprocessed dialog: a flat list of sentences with turn structure.
#[derive(Clone, Debug, PartialEq)]
pub struct Dialog {
    sentences: Vec<Sentence>,
    turn_boundaries: Vec<usize>,
    acts: Option<Vec<DialogAct>>,
}

impl Dialog {
    pub fn new(
        sentences: Vec<Sentence>,
        turn_boundaries: Vec<usize>,
        acts: Option<Vec<DialogAct>>,
    ) -> Result<Self, CorpusError> {
        let increasing = turn_boundaries.windows(2).all(|w| w[0] < w[1]);
        let in_range = turn_boundaries.iter().all(|b| *b > 0 && *b < sentences.len());
        if !increasing || !in_range {
            return Err(CorpusError::MalformedCanonical {
                line: 0,
                reason: format!("bad turn boundaries {:?} for {} sentences", turn_boundaries, sentences.len()),
            });
        }
        if acts.as_ref().is_some_and(|a| a.len() != sentences.len()) {
            return Err(CorpusError::MalformedCanonical {
                line: 0,
                reason: "one dialog act per sentence required".into(),
            });
        }
        Ok(Self {
            sentences,
            turn_boundaries,
            acts,
        })
    }

    /// Treats each sentence as its own turn.
    pub fn from_sentences(sentences: Vec<Sentence>) -> Self {
        let turn_boundaries = (1..sentences.len()).collect();
        Self {
            sentences,
            turn_boundaries,
            acts: None,
        }
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn turn_boundaries(&self) -> &[usize] {
        &self.turn_boundaries
    }

    pub fn acts(&self) -> Option<&[DialogAct]> {
        self.acts.as_deref()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

/// Up to `window` preceding sentences and the sentence that follows them.
#[derive(Clone, Debug, PartialEq)]
pub struct ContextWindow {
    pub context: Vec<Sentence>,
    pub response: Sentence,
    pub response_act: Option<DialogAct>,
}
