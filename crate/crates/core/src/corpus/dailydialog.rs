//! DailyDialog distribution files: one dialog per line, turns terminated by
//! `__eou__`; the optional act file holds one code (1–4) per turn.

use std::fs;
use std::path::Path;

use super::{CorpusError, DialogAct, Parsed, RawDialog};

const EOU: &str = "__eou__";

/// Splits one line into turns. Returns `None` when no turn has content.
pub fn parse_dailydialog(line: &str) -> Option<RawDialog> {
    let turns: Vec<String> = line
        .split(EOU)
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect();
    if turns.is_empty() {
        return None;
    }
    Some(RawDialog { turns, acts: None })
}

/// Like [`parse_dailydialog`], attaching the act codes of the matching line.
/// Acts are only attached when their count equals the turn count.
pub fn parse_dailydialog_with_acts(line: &str, act_line: &str) -> Result<Option<RawDialog>, CorpusError> {
    let Some(mut d) = parse_dailydialog(line) else {
        return Ok(None);
    };
    let acts = act_line
        .split_whitespace()
        .map(DialogAct::from_code)
        .collect::<Result<Vec<_>, _>>()?;
    if acts.len() == d.turns.len() {
        d.acts = Some(acts);
    }
    Ok(Some(d))
}

/// Reads a dialog file and, if given, its parallel act file.
pub fn read_dailydialog(path: &Path, acts: Option<&Path>) -> Result<Parsed<RawDialog>, CorpusError> {
    let text = fs::read_to_string(path).map_err(|e| CorpusError::io(path.display(), e))?;
    let act_text = acts
        .map(|p| fs::read_to_string(p).map_err(|e| CorpusError::io(p.display(), e)))
        .transpose()?;
    let act_lines: Option<Vec<&str>> = act_text.as_deref().map(|t| t.lines().collect());

    let mut out = Parsed::default();
    for (i, line) in text.lines().enumerate() {
        let parsed = match act_lines.as_ref().and_then(|a| a.get(i)) {
            Some(act_line) => match parse_dailydialog_with_acts(line, act_line) {
                Ok(d) => {
                    if d.as_ref().is_some_and(|d| d.acts.is_none()) {
                        out.warn(format!("{}:{}: act count differs from turn count; acts ignored", path.display(), i + 1));
                    }
                    d
                }
                Err(e) => {
                    out.warn(format!("{}:{}: {e}; acts ignored", path.display(), i + 1));
                    parse_dailydialog(line)
                }
            },
            None => parse_dailydialog(line),
        };
        match parsed {
            Some(d) => out.items.push(d),
            None => out.warn(format!("{}:{}: no non-empty turns, skipped", path.display(), i + 1)),
        }
    }
    Ok(out)
}
