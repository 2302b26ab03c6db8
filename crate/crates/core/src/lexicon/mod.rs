//! Function-word lexicon, lemmatizer, content-word extraction and the
//! training-time noise applied to content sequences.

mod lemma;
mod noise;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::corpus::{TokenId, Vocabulary};

pub use lemma::lemmatize;
pub use noise::{inject_noise, NoiseOp};

const BUILTIN: &str = include_str!("../../data/function_words.txt");

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("line {line}: unknown category `{tag}`")]
    UnknownCategory { line: usize, tag: String },
    #[error("line {line}: expected `category: word ...`")]
    MalformedLine { line: usize },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    Article,
    Pronoun,
    Preposition,
    Conjunction,
    Auxiliary,
    Interjection,
    Particle,
    Punctuation,
}

impl Category {
    pub const ALL: [Category; 8] = [
        Category::Article,
        Category::Pronoun,
        Category::Preposition,
        Category::Conjunction,
        Category::Auxiliary,
        Category::Interjection,
        Category::Particle,
        Category::Punctuation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Article => "article",
            Category::Pronoun => "pronoun",
            Category::Preposition => "preposition",
            Category::Conjunction => "conjunction",
            Category::Auxiliary => "auxiliary",
            Category::Interjection => "interjection",
            Category::Particle => "particle",
            Category::Punctuation => "punctuation",
        }
    }
}

impl FromStr for Category {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Category::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or(())
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which categories count as function words.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExtractionMode {
    /// Pronouns and punctuation are kept as content.
    Training,
    /// Every category is a function word.
    Evaluation,
}

impl ExtractionMode {
    pub fn is_active(self, category: Category) -> bool {
        match self {
            ExtractionMode::Evaluation => true,
            ExtractionMode::Training => {
                !matches!(category, Category::Pronoun | Category::Punctuation)
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FunctionLexicon {
    entries: BTreeMap<String, BTreeSet<Category>>,
}

impl FunctionLexicon {
    /// Parses `category: w1 w2 ...` lines. Blank lines and `#` comments are
    /// ignored; a word listed under several categories keeps all of them.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut entries: BTreeMap<String, BTreeSet<Category>> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (tag, words) = line
                .split_once(':')
                .ok_or(LexiconError::MalformedLine { line: i + 1 })?;
            let category: Category = tag.parse().map_err(|_| LexiconError::UnknownCategory {
                line: i + 1,
                tag: tag.trim().to_string(),
            })?;
            for w in words.split_whitespace() {
                entries.entry(w.to_lowercase()).or_default().insert(category);
            }
        }
        Ok(Self { entries })
    }

    /// The shipped word list.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("shipped lexicon parses")
    }

    /// Drops words that never occur in `vocab`.
    pub fn adapt(&self, vocab: &Vocabulary) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .filter(|(w, _)| vocab.contains(w))
                .map(|(w, c)| (w.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(&word.to_lowercase())
    }

    pub fn categories(&self, word: &str) -> Option<&BTreeSet<Category>> {
        self.entries.get(&word.to_lowercase())
    }

    pub fn words_in(&self, category: Category) -> impl Iterator<Item = &str> {
        self.entries
            .iter()
            .filter(move |(_, c)| c.contains(&category))
            .map(|(w, _)| w.as_str())
    }

    /// True when any category of `word` is active in `mode`.
    pub fn is_function(&self, word: &str, mode: ExtractionMode) -> bool {
        self.categories(word)
            .is_some_and(|cats| cats.iter().any(|c| mode.is_active(*c)))
    }

    /// Non-special vocabulary ids that are content words in training mode.
    pub fn insert_pool(&self, vocab: &Vocabulary) -> Vec<TokenId> {
        vocab
            .words()
            .iter()
            .filter(|w| !self.is_function(w, ExtractionMode::Training))
            .filter_map(|w| vocab.id(w))
            .collect()
    }
}

/// Reads a lexicon file and restricts it to words of `corpus_vocab`.
pub fn load_function_lexicon(path: &Path, corpus_vocab: &Vocabulary) -> Result<FunctionLexicon, LexiconError> {
    let text = fs::read_to_string(path).map_err(|e| LexiconError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let lex = FunctionLexicon::parse(&text)?;
    if lex.is_empty() {
        log::warn!("{}: lexicon is empty", path.display());
    }
    Ok(lex.adapt(corpus_vocab))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ContentSequence {
    pub lemmas: Vec<String>,
    /// Index of each lemma's token in the source sentence.
    pub source_positions: Vec<usize>,
}

impl ContentSequence {
    pub fn len(&self) -> usize {
        self.lemmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lemmas.is_empty()
    }
}

impl fmt::Display for ContentSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.lemmas.join(" "))
    }
}

/// Removes active function words and lemmatizes what remains.
///
/// Lexicon words kept as content (pronouns and punctuation in training mode)
/// are not lemmatized, and a lemma that would itself be a lexicon word falls
/// back to the surface form.
pub fn extract_content_sequence<S: AsRef<str>>(
    tokens: &[S],
    lex: &FunctionLexicon,
    mode: ExtractionMode,
) -> ContentSequence {
    let mut out = ContentSequence::default();
    for (i, tok) in tokens.iter().enumerate() {
        let tok = tok.as_ref().to_lowercase();
        if lex.is_function(&tok, mode) {
            continue;
        }
        let lemma = if lex.contains(&tok) {
            tok
        } else {
            let l = lemmatize(&tok);
            if lex.contains(&l) {
                tok
            } else {
                l
            }
        };
        out.lemmas.push(lemma);
        out.source_positions.push(i);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    fn eval(s: &str) -> Vec<String> {
        extract_content_sequence(&words(s), &FunctionLexicon::builtin(), ExtractionMode::Evaluation).lemmas
    }

    fn train(s: &str) -> Vec<String> {
        extract_content_sequence(&words(s), &FunctionLexicon::builtin(), ExtractionMode::Training).lemmas
    }

    #[test]
    fn builtin_has_every_category() {
        let lex = FunctionLexicon::builtin();
        for c in Category::ALL {
            assert!(lex.words_in(c).next().is_some(), "{c}");
        }
        assert!(lex.categories("the").unwrap().contains(&Category::Article));
        let that = lex.categories("that").unwrap();
        assert!(that.contains(&Category::Pronoun) && that.contains(&Category::Conjunction));
        assert_eq!(lex.words_in(Category::Article).collect::<Vec<_>>(), ["a", "an", "the"]);
    }

    #[test]
    fn duplicates_collapse() {
        let lex = FunctionLexicon::parse("pronoun: you you it\n").unwrap();
        assert_eq!(lex.len(), 2);
    }

    #[test]
    fn unknown_category_is_fatal() {
        let err = FunctionLexicon::parse("article: a\nadverb: very\n").unwrap_err();
        assert!(matches!(err, LexiconError::UnknownCategory { line: 2, .. }));
        assert!(FunctionLexicon::parse("no colon here").is_err());
    }

    #[test]
    fn adaptation_drops_unseen_words() {
        let vocab = Vocabulary::with_words(["the", "dog"]).unwrap();
        let lex = FunctionLexicon::builtin().adapt(&vocab);
        assert!(lex.contains("the"));
        assert!(!lex.contains("whereupon"));
        assert_eq!(lex.len(), 1);
    }

    #[test]
    fn reference_sentence_in_evaluation_mode() {
        assert_eq!(
            eval("do you have any skirt that will go with this sweater ?"),
            ["any", "skirt", "go", "sweater"]
        );
    }

    #[test]
    fn training_mode_keeps_pronouns_and_punctuation() {
        assert_eq!(train("i will take the dog for a walk ."), ["i", "take", "dog", "walk", "."]);
    }

    #[test]
    fn all_function_sentence_is_empty() {
        assert!(eval("of the .").is_empty());
    }

    #[test]
    fn pronouns_are_not_lemmatized() {
        assert_eq!(train("give them ideas"), ["give", "them", "idea"]);
    }

    #[test]
    fn lemma_colliding_with_lexicon_keeps_surface() {
        // "wills" would lemmatize to the auxiliary "will".
        assert_eq!(eval("wills"), ["wills"]);
    }

    #[test]
    fn positions_point_into_source() {
        let c = extract_content_sequence(
            &words("the skirts match well"),
            &FunctionLexicon::builtin(),
            ExtractionMode::Evaluation,
        );
        assert_eq!(c.lemmas, ["skirt", "match"]);
        assert_eq!(c.source_positions, [1, 2]);
    }

    #[test]
    fn insert_pool_excludes_training_function_words() {
        let vocab = Vocabulary::with_words(["the", "you", "dog", ".", "walk"]).unwrap();
        let pool = FunctionLexicon::builtin().insert_pool(&vocab);
        let names: Vec<_> = pool.iter().map(|&i| vocab.decode(i).unwrap()).collect();
        assert_eq!(names, ["you", "dog", ".", "walk"]);
    }
}
