use std::collections::HashMap;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{CorpusError, Dialog};

pub type TokenId = u32;

pub const PAD: &str = "<pad>";
pub const UNK: &str = "<unk>";
pub const SOS: &str = "<sos>";
pub const EOS: &str = "<eos>";
pub const SPECIALS: [&str; 4] = [PAD, UNK, SOS, EOS];
pub const PAD_ID: TokenId = 0;
pub const UNK_ID: TokenId = 1;
pub const SOS_ID: TokenId = 2;
pub const EOS_ID: TokenId = 3;

/// Bijection between tokens and ids. Ids 0–3 are the specials; the rest are
/// ordered by descending corpus frequency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, TokenId>,
}

impl Vocabulary {
    /// Builds from a full token list whose first four entries are the specials.
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self, CorpusError> {
        if tokens.len() < SPECIALS.len() || tokens.iter().zip(SPECIALS).any(|(t, s)| t != s) {
            return Err(CorpusError::MalformedVocab(format!(
                "first entries must be {}",
                SPECIALS.join(" ")
            )));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if t.is_empty() || t.chars().any(char::is_whitespace) {
                return Err(CorpusError::MalformedVocab(format!("invalid token {t:?} at entry {}", i + 1)));
            }
            if index.insert(t.clone(), i as TokenId).is_some() {
                return Err(CorpusError::MalformedVocab(format!("duplicate token {t:?}")));
            }
        }
        Ok(Self { tokens, index })
    }

    /// Specials followed by `words` in the given order.
    pub fn with_words<I, S>(words: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens = SPECIALS
            .iter()
            .map(|s| s.to_string())
            .chain(words.into_iter().map(Into::into))
            .collect();
        Self::from_tokens(tokens)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Non-special tokens in id order.
    pub fn words(&self) -> &[String] {
        &self.tokens[SPECIALS.len()..]
    }

    pub fn id(&self, token: &str) -> Option<TokenId> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn encode(&self, token: &str) -> TokenId {
        self.id(token).unwrap_or(UNK_ID)
    }

    pub fn encode_all<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<TokenId> {
        tokens.iter().map(|t| self.encode(t.as_ref())).collect()
    }

    pub fn decode(&self, id: TokenId) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn decode_all(&self, ids: &[TokenId]) -> Vec<String> {
        ids.iter()
            .map(|&i| self.decode(i).unwrap_or(UNK).to_string())
            .collect()
    }

    pub fn is_special(id: TokenId) -> bool {
        (id as usize) < SPECIALS.len()
    }

    /// Hex SHA-256 of the tokens joined by newlines.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.tokens.join("\n").as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// One token per line, specials included.
    pub fn save(&self, path: &Path) -> Result<(), CorpusError> {
        let mut text = self.tokens.join("\n");
        text.push('\n');
        fs::write(path, text).map_err(|e| CorpusError::io(path.display(), e))
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let text = fs::read_to_string(path).map_err(|e| CorpusError::io(path.display(), e))?;
        Self::from_tokens(text.lines().map(str::to_string).collect())
    }
}

/// The `cap` most frequent tokens, ties broken lexicographically.
pub fn build_vocab(dialogs: &[Dialog], cap: usize) -> Result<Vocabulary, CorpusError> {
    if cap < 1 {
        return Err(CorpusError::InvalidCap);
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for tok in dialogs
        .iter()
        .flat_map(|d| d.sentences())
        .flat_map(|s| s.tokens())
    {
        if !SPECIALS.contains(&tok.as_str()) {
            *counts.entry(tok).or_default() += 1;
        }
    }
    let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    ranked.truncate(cap);
    Vocabulary::with_words(ranked.into_iter().map(|(t, _)| t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Sentence;

    fn dialog(text: &str) -> Dialog {
        Dialog::from_sentences(vec![Sentence::from_tokenized(text).unwrap()])
    }

    #[test]
    fn frequency_cap() {
        let v = build_vocab(&[dialog("a b a c b a")], 2).unwrap();
        assert_eq!(v.tokens(), ["<pad>", "<unk>", "<sos>", "<eos>", "a", "b"]);
        assert_eq!(v.encode("c"), UNK_ID);
        assert_eq!(v.encode("a"), 4);
    }

    #[test]
    fn ties_are_lexicographic() {
        let v = build_vocab(&[dialog("z y x y z x w")], 3).unwrap();
        assert_eq!(v.words(), ["x", "y", "z"]);
    }

    #[test]
    fn empty_corpus_and_bad_cap() {
        assert_eq!(build_vocab(&[], 10).unwrap().len(), 4);
        assert!(matches!(build_vocab(&[], 0), Err(CorpusError::InvalidCap)));
    }

    #[test]
    fn round_trip() {
        let v = build_vocab(&[dialog("the cat sat on the mat .")], 100).unwrap();
        for (i, t) in v.tokens().iter().enumerate() {
            assert_eq!(v.encode(t), i as TokenId);
            assert_eq!(v.decode(i as TokenId), Some(t.as_str()));
        }
    }

    #[test]
    fn save_load_preserves_hash() {
        let v = build_vocab(&[dialog("one two two")], 100).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("vocab.txt");
        v.save(&p).unwrap();
        let back = Vocabulary::load(&p).unwrap();
        assert_eq!(back, v);
        assert_eq!(back.hash(), v.hash());
        assert_ne!(build_vocab(&[dialog("one")], 10).unwrap().hash(), v.hash());
    }

    #[test]
    fn rejects_missing_specials_and_duplicates() {
        assert!(Vocabulary::from_tokens(vec!["a".into()]).is_err());
        assert!(Vocabulary::with_words(["a", "a"]).is_err());
    }
}
