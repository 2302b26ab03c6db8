use super::PipelineError;
use crate::corpus::{DialogAct, TokenId, EOS_ID, PAD_ID, SOS_ID};
use crate::models::{Architecture, DecoderKind, Model};
use crate::neural::{AttentionKeys, Graph, ParamSet, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecodeMode {
    Greedy,
    /// Beam search of the given width, ranked by length-normalized log-prob.
    Beam(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecodeOptions {
    pub mode: DecodeMode,
    pub content_max_len: usize,
    pub sentence_max_len: usize,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        Self {
            mode: DecodeMode::Greedy,
            content_max_len: 20,
            sentence_max_len: 40,
        }
    }
}

/// Highest logit among tokens that may be emitted; ties go to the lowest id.
fn argmax_allowed(logits: &[f32]) -> TokenId {
    let mut best = EOS_ID as usize;
    for (i, &v) in logits.iter().enumerate() {
        if i == PAD_ID as usize || i == SOS_ID as usize {
            continue;
        }
        if v > logits[best] || (v == logits[best] && i < best) {
            best = i;
        }
    }
    best as TokenId
}

/// Emits the argmax token per step from SOS until EOS or `max_len` tokens.
/// EOS is not part of the output; PAD and SOS are never emitted.
pub fn decode_greedy(
    model: &Model,
    g: &mut Graph<'_, f32>,
    kind: DecoderKind,
    h0: Var,
    keys: Option<&AttentionKeys>,
    max_len: usize,
) -> Result<Vec<TokenId>, PipelineError> {
    let mut out = Vec::new();
    let mut h = h0;
    let mut prev = SOS_ID;
    while out.len() < max_len {
        let (h_next, logits) = model.decoder_step(g, kind, prev, h, keys)?;
        let tok = argmax_allowed(g.value(logits));
        if tok == EOS_ID {
            break;
        }
        out.push(tok);
        h = h_next;
        prev = tok;
    }
    Ok(out)
}

fn log_softmax(v: &[f32]) -> Vec<f64> {
    let m = v.iter().fold(f32::NEG_INFINITY, |a, &b| a.max(b)) as f64;
    let lse = m + v.iter().map(|&x| (x as f64 - m).exp()).sum::<f64>().ln();
    v.iter().map(|&x| x as f64 - lse).collect()
}

#[derive(Clone)]
struct Hyp {
    tokens: Vec<TokenId>,
    logp: f64,
    h: Var,
}

/// Beam search. Finished hypotheses are scored by total log-probability
/// divided by the number of scored steps (tokens plus EOS).
pub fn decode_beam(
    model: &Model,
    g: &mut Graph<'_, f32>,
    kind: DecoderKind,
    h0: Var,
    keys: Option<&AttentionKeys>,
    max_len: usize,
    width: usize,
) -> Result<Vec<TokenId>, PipelineError> {
    let width = width.max(1);
    let mut live = vec![Hyp {
        tokens: Vec::new(),
        logp: 0.0,
        h: h0,
    }];
    let mut finished: Vec<(f64, Vec<TokenId>)> = Vec::new();
    for step in 0..=max_len {
        let mut cands: Vec<(f64, usize, TokenId, Var)> = Vec::new();
        for (bi, hyp) in live.iter().enumerate() {
            let prev = *hyp.tokens.last().unwrap_or(&SOS_ID);
            let (h_next, logits) = model.decoder_step(g, kind, prev, hyp.h, keys)?;
            let lp = log_softmax(g.value(logits));
            for (tok, &l) in lp.iter().enumerate() {
                let tok = tok as TokenId;
                if tok == PAD_ID || tok == SOS_ID {
                    continue;
                }
                // At the length limit only EOS may follow.
                if step == max_len && tok != EOS_ID {
                    continue;
                }
                cands.push((hyp.logp + l, bi, tok, h_next));
            }
        }
        cands.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut next = Vec::new();
        for (logp, bi, tok, h) in cands {
            if next.len() >= width {
                break;
            }
            let mut tokens = live[bi].tokens.clone();
            if tok == EOS_ID {
                let norm = logp / (tokens.len() + 1) as f64;
                finished.push((norm, tokens));
                continue;
            }
            tokens.push(tok);
            next.push(Hyp { tokens, logp, h });
        }
        if next.is_empty() || finished.len() >= width {
            break;
        }
        live = next;
    }
    finished.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(finished.into_iter().next().map(|(_, t)| t).unwrap_or_default())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Generation {
    /// Empty for the plain variants.
    pub content: Vec<TokenId>,
    pub response: Vec<TokenId>,
    pub act: Option<DialogAct>,
    /// Sentence-decoder logits of the first step.
    pub first_step_logits: Vec<f32>,
}

fn run(
    model: &Model,
    g: &mut Graph<'_, f32>,
    kind: DecoderKind,
    h0: Var,
    keys: Option<&AttentionKeys>,
    max_len: usize,
    mode: DecodeMode,
) -> Result<Vec<TokenId>, PipelineError> {
    match mode {
        DecodeMode::Greedy => decode_greedy(model, g, kind, h0, keys, max_len),
        DecodeMode::Beam(k) => decode_beam(model, g, kind, h0, keys, max_len, k),
    }
}

fn decode_sentence(
    model: &Model,
    g: &mut Graph<'_, f32>,
    context: &[Vec<TokenId>],
    enc: &crate::models::EncodedDialog,
    content: Vec<TokenId>,
    opts: &DecodeOptions,
) -> Result<Generation, PipelineError> {
    let _ = context;
    let cond = model.condition(g, enc, &content)?;
    let (_, first) = model.decoder_step(g, DecoderKind::Sentence, SOS_ID, cond.h0, cond.keys.as_ref())?;
    let first_step_logits = g.value(first).to_vec();
    let response = run(
        model,
        g,
        DecoderKind::Sentence,
        cond.h0,
        cond.keys.as_ref(),
        opts.sentence_max_len,
        opts.mode,
    )?;
    let act = if model.config().da_head {
        let p = model.predict_dialog_act(g, cond.h0)?;
        let probs = g.value(p);
        let best = (0..probs.len()).fold(0, |b, i| if probs[i] > probs[b] { i } else { b });
        DialogAct::from_index(best)
    } else {
        None
    };
    Ok(Generation {
        content,
        response,
        act,
        first_step_logits,
    })
}

/// Two-step generation: decode a content sequence from the context, then the
/// sentence conditioned on it. Plain variants decode the sentence only.
pub fn generate(
    model: &Model,
    params: &ParamSet<f32>,
    context: &[Vec<TokenId>],
    opts: &DecodeOptions,
) -> Result<Generation, PipelineError> {
    let mut g = Graph::new(params);
    let enc = model.encode_context(&mut g, context)?;
    let content = match model.architecture() {
        Architecture::HedPlain | Architecture::HedAttn => Vec::new(),
        Architecture::HedCd | Architecture::HedCed => {
            let h0 = model.content_h0(&mut g, &enc)?;
            let keys = model.prepare_decoder_keys(&mut g, DecoderKind::Content, &enc.all_token_states())?;
            run(model, &mut g, DecoderKind::Content, h0, keys.as_ref(), opts.content_max_len, opts.mode)?
        }
    };
    decode_sentence(model, &mut g, context, &enc, content, opts)
}

/// Second step only, with a caller-supplied content sequence.
pub fn generate_with_content(
    model: &Model,
    params: &ParamSet<f32>,
    context: &[Vec<TokenId>],
    content: &[TokenId],
    opts: &DecodeOptions,
) -> Result<Generation, PipelineError> {
    let mut g = Graph::new(params);
    let enc = model.encode_context(&mut g, context)?;
    decode_sentence(model, &mut g, context, &enc, content.to_vec(), opts)
}
