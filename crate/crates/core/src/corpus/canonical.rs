//! Canonical preprocessed corpus: `<name>.txt` holds one dialog per line with
//! sentences joined by TAB and tokens by single spaces. `<name>.turns` holds
//! the turn boundaries of each dialog (space-separated sentence indices) and
//! the optional `<name>.acts` one act code per sentence, `-` when absent.

use std::fs;
use std::path::{Path, PathBuf};

use super::{CorpusError, Dialog, DialogAct, Sentence};

#[derive(Clone, Debug)]
pub struct CanonicalFiles {
    pub text: PathBuf,
    pub turns: PathBuf,
    pub acts: PathBuf,
}

impl CanonicalFiles {
    pub fn new(dir: &Path, name: &str) -> Self {
        Self {
            text: dir.join(format!("{name}.txt")),
            turns: dir.join(format!("{name}.turns")),
            acts: dir.join(format!("{name}.acts")),
        }
    }

    /// Companion files of an explicit `.txt` path.
    pub fn from_text_path(text: &Path) -> Self {
        Self {
            text: text.to_path_buf(),
            turns: text.with_extension("turns"),
            acts: text.with_extension("acts"),
        }
    }
}

fn join_lines(lines: impl Iterator<Item = String>) -> String {
    let mut s = String::new();
    for l in lines {
        s.push_str(&l);
        s.push('\n');
    }
    s
}

pub fn write_canonical(files: &CanonicalFiles, dialogs: &[Dialog]) -> Result<(), CorpusError> {
    let text = join_lines(dialogs.iter().map(|d| {
        d.sentences()
            .iter()
            .map(Sentence::to_string)
            .collect::<Vec<_>>()
            .join("\t")
    }));
    let turns = join_lines(dialogs.iter().map(|d| {
        d.turn_boundaries()
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(" ")
    }));
    let write = |p: &Path, s: &str| fs::write(p, s).map_err(|e| CorpusError::io(p.display(), e));
    write(&files.text, &text)?;
    write(&files.turns, &turns)?;
    if dialogs.iter().any(|d| d.acts().is_some()) {
        let acts = join_lines(dialogs.iter().map(|d| match d.acts() {
            Some(a) => a.iter().map(|a| a.code().to_string()).collect::<Vec<_>>().join(" "),
            None => "-".to_string(),
        }));
        write(&files.acts, &acts)?;
    }
    Ok(())
}

fn malformed(line: usize, reason: impl Into<String>) -> CorpusError {
    CorpusError::MalformedCanonical {
        line,
        reason: reason.into(),
    }
}

/// Reads a canonical corpus. The turns and acts files are optional; without
/// a turns file every sentence is its own turn.
pub fn read_canonical(files: &CanonicalFiles) -> Result<Vec<Dialog>, CorpusError> {
    let read = |p: &Path| fs::read_to_string(p).map_err(|e| CorpusError::io(p.display(), e));
    let text = read(&files.text)?;
    let turns = if files.turns.exists() { Some(read(&files.turns)?) } else { None };
    let acts = if files.acts.exists() { Some(read(&files.acts)?) } else { None };
    let turn_lines: Option<Vec<&str>> = turns.as_deref().map(|t| t.lines().collect());
    let act_lines: Option<Vec<&str>> = acts.as_deref().map(|t| t.lines().collect());

    let mut dialogs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let sentences = line
            .split('\t')
            .map(Sentence::from_tokenized)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| malformed(lineno, e.to_string()))?;
        let boundaries = match turn_lines.as_ref() {
            Some(t) => t
                .get(i)
                .ok_or_else(|| malformed(lineno, "turns file is shorter than the corpus"))?
                .split_whitespace()
                .map(|b| b.parse::<usize>().map_err(|_| malformed(lineno, format!("bad turn index {b:?}"))))
                .collect::<Result<Vec<_>, _>>()?,
            None => (1..sentences.len()).collect(),
        };
        let dialog_acts = match act_lines.as_ref().and_then(|a| a.get(i)) {
            Some(l) if l.trim() != "-" => Some(
                l.split_whitespace()
                    .map(DialogAct::from_code)
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| malformed(lineno, e.to_string()))?,
            ),
            _ => None,
        };
        let d = Dialog::new(sentences, boundaries, dialog_acts).map_err(|e| match e {
            CorpusError::MalformedCanonical { reason, .. } => malformed(lineno, reason),
            other => other,
        })?;
        dialogs.push(d);
    }
    Ok(dialogs)
}
