use std::fs;
use std::path::Path;

use super::PipelineError;
use crate::corpus::{ContextWindow, DialogAct, TokenId, Vocabulary, EOS_ID};
use crate::lexicon::{extract_content_sequence, ExtractionMode, FunctionLexicon};

/// An id-encoded `(context, content, response)` sample. `content` is the
/// clean training-mode extraction of the response; noise is added per epoch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrainingTriplet {
    pub context: Vec<Vec<TokenId>>,
    pub content: Vec<TokenId>,
    pub response: Vec<TokenId>,
    pub act: Option<DialogAct>,
}

/// One triplet per window. Content lemmas missing from `vocab` encode as UNK.
pub fn build_training_triplets(
    windows: &[ContextWindow],
    lex: &FunctionLexicon,
    vocab: &Vocabulary,
) -> Vec<TrainingTriplet> {
    windows
        .iter()
        .map(|w| {
            let content = extract_content_sequence(w.response.tokens(), lex, ExtractionMode::Training);
            TrainingTriplet {
                context: w.context.iter().map(|s| vocab.encode_all(s.tokens())).collect(),
                content: vocab.encode_all(&content.lemmas),
                response: vocab.encode_all(w.response.tokens()),
                act: w.response_act,
            }
        })
        .collect()
}

fn ids(v: &[TokenId]) -> String {
    v.iter().map(TokenId::to_string).collect::<Vec<_>>().join(" ")
}

/// One triplet per line: context, content and response id lists separated by
/// TAB. Context sentences are each terminated by the EOS id. A fourth field
/// holds the act code when present.
pub fn write_triplets(path: &Path, triplets: &[TrainingTriplet]) -> Result<(), PipelineError> {
    let mut out = String::new();
    for t in triplets {
        let ctx: Vec<String> = t.context.iter().map(|s| format!("{} {EOS_ID}", ids(s))).collect();
        out.push_str(&ctx.join(" "));
        out.push('\t');
        out.push_str(&ids(&t.content));
        out.push('\t');
        out.push_str(&ids(&t.response));
        if let Some(a) = t.act {
            out.push('\t');
            out.push_str(&a.code().to_string());
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| PipelineError::io(path.display(), e))
}

pub fn read_triplets(path: &Path) -> Result<Vec<TrainingTriplet>, PipelineError> {
    let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path.display(), e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let bad = |reason: String| PipelineError::MalformedTriplet { line: i + 1, reason };
        let fields: Vec<&str> = line.split('\t').collect();
        if !(3..=4).contains(&fields.len()) {
            return Err(bad(format!("{} fields", fields.len())));
        }
        let parse = |f: &str| -> Result<Vec<TokenId>, PipelineError> {
            f.split_whitespace()
                .map(|x| x.parse().map_err(|_| bad(format!("bad id {x:?}"))))
                .collect()
        };
        let flat = parse(fields[0])?;
        let context: Vec<Vec<TokenId>> = flat
            .split(|&t| t == EOS_ID)
            .filter(|s| !s.is_empty())
            .map(<[TokenId]>::to_vec)
            .collect();
        let act = fields
            .get(3)
            .map(|c| DialogAct::from_code(c).map_err(|e| bad(e.to_string())))
            .transpose()?;
        out.push(TrainingTriplet {
            context,
            content: parse(fields[1])?,
            response: parse(fields[2])?,
            act,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{to_context_windows, Dialog, Sentence};

    fn sent(s: &str) -> Sentence {
        Sentence::from_tokenized(s).unwrap()
    }

    #[test]
    fn walk_the_dog_content() {
        let d = Dialog::from_sentences(vec![sent("what now ?"), sent("i will take the dog for a walk .")]);
        let vocab = Vocabulary::with_words(["i", "will", "take", "the", "dog", "for", "a", "walk", ".", "what", "now", "?"]).unwrap();
        let t = build_training_triplets(&to_context_windows(&d, 5), &FunctionLexicon::builtin(), &vocab);
        assert_eq!(t.len(), 1);
        assert_eq!(vocab.decode_all(&t[0].content), ["i", "take", "dog", "walk", "."]);
    }

    #[test]
    fn all_function_response_has_empty_content() {
        let d = Dialog::from_sentences(vec![sent("hi"), sent("of the .")]);
        let vocab = Vocabulary::with_words(["of", "the", ".", "hi"]).unwrap();
        let t = build_training_triplets(&to_context_windows(&d, 5), &FunctionLexicon::builtin(), &vocab);
        assert_eq!(vocab.decode_all(&t[0].content), ["."]);
        let d = Dialog::from_sentences(vec![sent("hi"), sent("of the")]);
        let t = build_training_triplets(&to_context_windows(&d, 5), &FunctionLexicon::builtin(), &vocab);
        assert!(t[0].content.is_empty());
    }

    #[test]
    fn cache_round_trip() {
        let t = vec![
            TrainingTriplet {
                context: vec![vec![4, 5], vec![6]],
                content: vec![],
                response: vec![7, 8],
                act: Some(DialogAct::Commissive),
            },
            TrainingTriplet {
                context: vec![vec![9]],
                content: vec![9, 9],
                response: vec![4],
                act: None,
            },
        ];
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.tsv");
        write_triplets(&p, &t).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap().lines().next().unwrap(), "4 5 3 6 3\t\t7 8\t4");
        assert_eq!(read_triplets(&p).unwrap(), t);
    }
}
