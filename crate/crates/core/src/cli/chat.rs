use std::collections::VecDeque;
use std::io::{BufRead, Write};

use anyhow::Result;

use crate::corpus::{segment, tokenize, TokenId, Vocabulary, MAX_SENTENCE_LEN};
use crate::models::Model;
use crate::neural::ParamSet;
use crate::pipeline::{generate, Checkpoint, DecodeOptions};

/// A loaded model plus a rolling context of the last `window` sentences.
pub struct ChatSession<'a> {
    model: Model,
    params: &'a ParamSet<f32>,
    vocab: &'a Vocabulary,
    opts: DecodeOptions,
    window: usize,
}

/// What one turn produced. `content` is `None` for the plain variants.
#[derive(Clone, Debug, PartialEq)]
pub struct Reply {
    pub content: Option<String>,
    pub response: String,
    pub act: Option<&'static str>,
}

impl<'a> ChatSession<'a> {
    pub fn new(ck: &'a Checkpoint, vocab: &'a Vocabulary, opts: DecodeOptions) -> Result<Self> {
        Ok(Self {
            model: ck.model()?,
            params: &ck.params,
            vocab,
            opts,
            window: ck.config.window.max(1),
        })
    }

    /// Appends the user's sentences to `history` and answers. Returns `None`
    /// when the input holds no tokens.
    pub fn respond(&self, history: &mut VecDeque<Vec<TokenId>>, input: &str) -> Result<Option<Reply>> {
        let sentences = segment(tokenize(input));
        if sentences.is_empty() {
            return Ok(None);
        }
        for mut s in sentences {
            s.truncate(MAX_SENTENCE_LEN);
            self.push(history, self.vocab.encode_all(&s));
        }
        let ctx: Vec<Vec<TokenId>> = history.iter().cloned().collect();
        let g = generate(&self.model, self.params, &ctx, &self.opts)?;
        if !g.response.is_empty() {
            self.push(history, g.response.clone());
        }
        Ok(Some(Reply {
            content: self
                .model
                .architecture()
                .has_content()
                .then(|| self.vocab.decode_all(&g.content).join(" ")),
            response: self.vocab.decode_all(&g.response).join(" "),
            act: g.act.map(|a| a.name()),
        }))
    }

    fn push(&self, history: &mut VecDeque<Vec<TokenId>>, s: Vec<TokenId>) {
        history.push_back(s);
        while history.len() > self.window {
            history.pop_front();
        }
    }
}

/// Reads user turns line by line until end of input.
pub fn chat_loop<R: BufRead, W: Write>(session: &ChatSession<'_>, input: R, mut out: W) -> Result<()> {
    let mut history = VecDeque::new();
    for line in input.lines() {
        match session.respond(&mut history, &line?)? {
            None => writeln!(out, "(nothing to answer)")?,
            Some(r) => {
                if let Some(c) = r.content {
                    writeln!(out, "content: {c}")?;
                }
                writeln!(out, "response: {}", r.response)?;
                if let Some(a) = r.act {
                    writeln!(out, "act: {a}")?;
                }
            }
        }
        out.flush()?;
    }
    Ok(())
}
