//! Rule-based tokenizer and sentence segmenter.
//!
//! Lowercases, splits on whitespace, detaches leading/trailing punctuation
//! and splits English clitics (`n't`, `'s`, `'re`, `'ve`, `'ll`, `'d`,
//! `'m`) into their own tokens, e.g. `can't` → `ca n't`.

use super::{Dialog, RawDialog, Sentence};

/// Default sentence length cap; longer sentences keep their first tokens.
pub const MAX_SENTENCE_LEN: usize = 40;

const DETACHABLE: &[char] = &[',', '.', '!', '?', '\'', '-', '"', ';', ':', '(', ')'];
const CLITIC_SUFFIXES: &[&str] = &["s", "re", "ve", "ll", "d", "m"];
const TERMINALS: &[&str] = &[".", "!", "?"];

fn normalize(text: &str) -> String {
    text.chars()
        .map(|c| match c {
            '\u{2018}' | '\u{2019}' | '`' | '\u{00b4}' => '\'',
            '\u{201c}' | '\u{201d}' => '"',
            '\u{2013}' | '\u{2014}' => '-',
            '\u{2026}' => '.',
            c => c,
        })
        .flat_map(char::to_lowercase)
        .collect()
}

/// Pops a punctuation token off the front (`from_end == false`) or back.
/// Runs of two or more dots become a single `...` token.
fn take_punct(chars: &[char], from_end: bool) -> (String, usize) {
    let edge = if from_end { chars[chars.len() - 1] } else { chars[0] };
    if edge == '.' {
        let run = if from_end {
            chars.iter().rev().take_while(|c| **c == '.').count()
        } else {
            chars.iter().take_while(|c| **c == '.').count()
        };
        if run >= 2 {
            return ("...".to_string(), run);
        }
    }
    (edge.to_string(), 1)
}

fn split_core(core: &str, out: &mut Vec<String>) {
    if core.len() > 3 && core.ends_with("n't") {
        out.push(core[..core.len() - 3].to_string());
        out.push("n't".to_string());
        return;
    }
    if let Some(pos) = core.rfind('\'') {
        let (prefix, suffix) = (&core[..pos], &core[pos + 1..]);
        if !prefix.is_empty() && CLITIC_SUFFIXES.contains(&suffix) {
            out.push(prefix.to_string());
            out.push(format!("'{suffix}"));
            return;
        }
    }
    out.push(core.to_string());
}

fn split_chunk(chunk: &str, out: &mut Vec<String>) {
    let mut chars: Vec<char> = chunk.chars().collect();
    let mut lead = Vec::new();
    while !chars.is_empty() && DETACHABLE.contains(&chars[0]) {
        let (tok, n) = take_punct(&chars, false);
        lead.push(tok);
        chars.drain(..n);
    }
    let mut trail = Vec::new();
    while !chars.is_empty() && DETACHABLE.contains(&chars[chars.len() - 1]) {
        // Keep the apostrophe of a trailing clitic-less `n'` etc. only when
        // it is the whole remainder; otherwise detach.
        let (tok, n) = take_punct(&chars, true);
        trail.push(tok);
        chars.truncate(chars.len() - n);
    }
    out.extend(lead);
    if !chars.is_empty() {
        let core: String = chars.into_iter().collect();
        split_core(&core, out);
    }
    out.extend(trail.into_iter().rev());
}

/// Re-joins clitics that arrive space-separated (`don ' t`, `it ' s`).
fn merge_spaced_clitics(tokens: Vec<String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        let tok = &tokens[i];
        let next = tokens.get(i + 1);
        let prev_is_word = out
            .last()
            .is_some_and(|p| p.chars().last().is_some_and(char::is_alphanumeric));
        if tok == "'" && prev_is_word {
            if let Some(next) = next {
                if next == "t" && out.last().is_some_and(|p| p.len() > 1 && p.ends_with('n')) {
                    let prev = out.last_mut().expect("checked");
                    prev.pop();
                    out.push("n't".to_string());
                    i += 2;
                    continue;
                }
                if CLITIC_SUFFIXES.contains(&next.as_str()) {
                    out.push(format!("'{next}"));
                    i += 2;
                    continue;
                }
            }
        }
        out.push(tok.clone());
        i += 1;
    }
    out
}

pub fn tokenize(text: &str) -> Vec<String> {
    let norm = normalize(text);
    let mut out = Vec::new();
    for chunk in norm.split_whitespace() {
        split_chunk(chunk, &mut out);
    }
    merge_spaced_clitics(out)
}

fn is_terminal(tok: &str) -> bool {
    TERMINALS.contains(&tok)
}

/// Splits after each run of terminal punctuation (`.`, `!`, `?`).
pub fn segment(tokens: Vec<String>) -> Vec<Vec<String>> {
    let mut sentences = Vec::new();
    let mut cur = Vec::new();
    let mut iter = tokens.into_iter().peekable();
    while let Some(tok) = iter.next() {
        let terminal = is_terminal(&tok);
        cur.push(tok);
        let next_terminal = iter.peek().is_some_and(|n| is_terminal(n));
        if terminal && !next_terminal {
            sentences.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        sentences.push(cur);
    }
    sentences
}

/// Tokenizes, segments and truncates every turn of a raw dialog.
pub fn preprocess_dialog(raw: &RawDialog, max_len: usize) -> Dialog {
    let mut sentences = Vec::new();
    let mut turn_boundaries = Vec::new();
    let mut acts = raw.acts.as_ref().map(|_| Vec::new());
    for (t, turn) in raw.turns.iter().enumerate() {
        let start = sentences.len();
        for mut toks in segment(tokenize(turn)) {
            toks.truncate(max_len);
            if let Ok(s) = Sentence::new(toks) {
                sentences.push(s);
                if let (Some(out), Some(src)) = (acts.as_mut(), raw.acts.as_ref()) {
                    out.push(src[t]);
                }
            }
        }
        if start > 0 && sentences.len() > start {
            turn_boundaries.push(start);
        }
    }
    Dialog {
        sentences,
        turn_boundaries,
        acts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        tokenize(s)
    }

    #[test]
    fn walk_the_dog() {
        assert_eq!(
            toks("I will take the dog for a walk."),
            ["i", "will", "take", "the", "dog", "for", "a", "walk", "."]
        );
    }

    #[test]
    fn clitics_split() {
        assert_eq!(toks("This can't be"), ["this", "ca", "n't", "be"]);
        assert_eq!(toks("it's fine, I'm sure"), ["it", "'s", "fine", ",", "i", "'m", "sure"]);
        assert_eq!(toks("we'll, they've, you're, he'd"), [
            "we", "'ll", ",", "they", "'ve", ",", "you", "'re", ",", "he", "'d"
        ]);
        assert_eq!(toks("don't."), ["do", "n't", "."]);
    }

    #[test]
    fn spaced_clitics_merge() {
        assert_eq!(toks("I ’ m sure it ’ s true"), ["i", "'m", "sure", "it", "'s", "true"]);
        assert_eq!(toks("I don ’ t know"), ["i", "do", "n't", "know"]);
    }

    #[test]
    fn punctuation_detaches() {
        assert_eq!(toks("stu...?"), ["stu", "...", "?"]);
        assert_eq!(toks("hey - i love gloves"), ["hey", "-", "i", "love", "gloves"]);
        assert_eq!(toks("bye-bye!"), ["bye-bye", "!"]);
        assert_eq!(toks("'quoted'"), ["'", "quoted", "'"]);
        assert_eq!(toks("3.5 dollars."), ["3.5", "dollars", "."]);
        assert_eq!(toks("c'mon"), ["c'mon"]);
    }

    #[test]
    fn tokens_are_lowercase_and_whitespace_free() {
        for t in toks("Hello THERE,\tFriend!  How's it going?") {
            assert!(!t.is_empty());
            assert!(!t.chars().any(char::is_whitespace));
            assert_eq!(t, t.to_lowercase());
        }
    }

    #[test]
    fn segmentation_keeps_terminal_punctuation() {
        assert_eq!(segment(toks("ok? sure!")), vec![vec!["ok", "?"], vec!["sure", "!"]]);
        assert_eq!(segment(toks("what?! no way")), vec![vec!["what", "?", "!"], vec!["no", "way"]]);
    }

    #[test]
    fn truncation_keeps_first_tokens() {
        let text: Vec<String> = (0..45).map(|i| format!("w{i}")).collect();
        let raw = RawDialog {
            turns: vec![text.join(" ")],
            acts: None,
        };
        let d = preprocess_dialog(&raw, MAX_SENTENCE_LEN);
        assert_eq!(d.sentences()[0].len(), 40);
        assert_eq!(d.sentences()[0].tokens()[39], "w39");
    }

    #[test]
    fn turn_boundaries_follow_sentences() {
        let raw = RawDialog {
            turns: vec!["hi . how are you ?".into(), "fine .".into(), "good".into()],
            acts: None,
        };
        let d = preprocess_dialog(&raw, 40);
        assert_eq!(d.sentences().len(), 4);
        assert_eq!(d.turn_boundaries(), &[2, 3]);
    }
}
