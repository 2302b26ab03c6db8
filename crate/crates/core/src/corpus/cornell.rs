//! Cornell Movie-Dialogs: `movie_lines.txt` and `movie_conversations.txt`,
//! fields separated by ` +++$+++ `. The distribution is latin-1 encoded.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use super::{CorpusError, Parsed, RawDialog};

const DELIM: &str = " +++$+++ ";
const LINE_FIELDS: usize = 5;
const CONVERSATION_FIELDS: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CornellUtterance {
    pub id: String,
    pub text: String,
}

/// `L1045 +++$+++ u0 +++$+++ m0 +++$+++ BIANCA +++$+++ They do not!`
pub fn parse_cornell_line(line: &str) -> Option<CornellUtterance> {
    let fields: Vec<&str> = line.splitn(LINE_FIELDS, DELIM).collect();
    if fields.len() != LINE_FIELDS {
        return None;
    }
    Some(CornellUtterance {
        id: fields[0].trim().to_string(),
        text: fields[4].trim().to_string(),
    })
}

/// `u0 +++$+++ u2 +++$+++ m0 +++$+++ ['L194', 'L195']` → `["L194", "L195"]`.
fn parse_conversation(line: &str) -> Option<Vec<String>> {
    let fields: Vec<&str> = line.split(DELIM).collect();
    if fields.len() != CONVERSATION_FIELDS {
        return None;
    }
    let list = fields[3].trim().strip_prefix('[')?.strip_suffix(']')?;
    Some(
        list.split(',')
            .map(|id| id.trim().trim_matches(|c| c == '\'' || c == '"').to_string())
            .filter(|id| !id.is_empty())
            .collect(),
    )
}

/// Assembles dialogs in conversation order. Malformed records and
/// unresolvable line ids are dropped with a warning.
pub fn parse_cornell_movie(lines: &str, conversations: &str) -> Parsed<RawDialog> {
    let mut out = Parsed::default();
    let mut utterances = HashMap::new();
    for (i, line) in lines.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match parse_cornell_line(line) {
            Some(u) => {
                utterances.insert(u.id, u.text);
            }
            None => out.warn(format!("movie lines {}: malformed record, skipped", i + 1)),
        }
    }
    for (i, line) in conversations.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let Some(ids) = parse_conversation(line) else {
            out.warn(format!("conversations {}: malformed record, skipped", i + 1));
            continue;
        };
        let mut turns = Vec::with_capacity(ids.len());
        for id in &ids {
            match utterances.get(id) {
                Some(text) if !text.trim().is_empty() => turns.push(text.clone()),
                Some(_) => {}
                None => out.warn(format!("conversations {}: unknown line id {id}, dropped", i + 1)),
            }
        }
        if turns.is_empty() {
            out.warn(format!("conversations {}: nothing to assemble, skipped", i + 1));
            continue;
        }
        out.items.push(RawDialog { turns, acts: None });
    }
    out
}

/// UTF-8 when valid, latin-1 otherwise.
fn read_text(path: &Path) -> Result<String, CorpusError> {
    let bytes = fs::read(path).map_err(|e| CorpusError::io(path.display(), e))?;
    Ok(match String::from_utf8(bytes) {
        Ok(s) => s,
        Err(e) => e.into_bytes().iter().map(|&b| b as char).collect(),
    })
}

pub fn load_cornell(lines_path: &Path, conversations_path: &Path) -> Result<Parsed<RawDialog>, CorpusError> {
    let lines = read_text(lines_path)?;
    let conversations = read_text(conversations_path)?;
    Ok(parse_cornell_movie(&lines, &conversations))
}
