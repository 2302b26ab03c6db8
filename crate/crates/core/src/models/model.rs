use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Architecture, ModelConfig, ModelError, MAX_RESPONSE_LEN};
use crate::corpus::{DialogAct, TokenId, EOS_ID, PAD_ID, SOS_ID};
use crate::neural::{
    encode_sequence, gru_step, mlp_bridge, prepare_keys, attend_prepared, sum_cross_entropy, AttentionKeys,
    AttentionParams, GruParams, MlpParams, ParamId, ParamSet, Scalar, SequenceEncoder, Graph, Var,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DecoderKind {
    Sentence,
    Content,
}

/// A GRU decoder whose output layer is tied to the shared embedding table:
///
/// ```text
/// o_t      = tanh(W_h h_t + W_c ctx_t + b)      (W_c only with attention)
/// logits_t = E o_t + bias
/// ```
#[derive(Clone, Debug)]
pub struct DecoderParams {
    pub gru: GruParams,
    pub attention: Option<AttentionParams>,
    pub out_h: ParamId,
    pub out_ctx: Option<ParamId>,
    pub out_b: ParamId,
    pub vocab_bias: ParamId,
}

impl DecoderParams {
    #[allow(clippy::too_many_arguments)]
    fn register<T: Scalar, R: Rng + ?Sized>(
        params: &mut ParamSet<T>,
        prefix: &str,
        cfg: &ModelConfig,
        key_size: Option<usize>,
        rng: &mut R,
    ) -> Result<Self, ModelError> {
        let (e, h) = (cfg.emb_size, cfg.dec_hidden);
        let gru = GruParams::register(params, &format!("{prefix}.gru"), e, h, rng)?;
        let attention = key_size
            .map(|k| AttentionParams::register(params, &format!("{prefix}.attn"), h, k, cfg.attn_size, rng))
            .transpose()?;
        let out_h = params.register_uniform(&format!("{prefix}.out_h"), &[e, h], rng)?;
        let out_ctx = key_size
            .map(|k| params.register_uniform(&format!("{prefix}.out_ctx"), &[e, k], rng))
            .transpose()?;
        let out_b = params.register_uniform(&format!("{prefix}.out_b"), &[e], rng)?;
        let vocab_bias = params.register_uniform(&format!("{prefix}.vocab_bias"), &[cfg.vocab_size], rng)?;
        Ok(Self {
            gru,
            attention,
            out_h,
            out_ctx,
            out_b,
            vocab_bias,
        })
    }
}

#[derive(Clone, Debug)]
pub struct EncodedDialog {
    /// Per context sentence, the per-token sentence-encoder states.
    pub sent_states: Vec<Vec<Var>>,
    pub sent_finals: Vec<Var>,
    pub dial_final: Var,
}

impl EncodedDialog {
    pub fn all_token_states(&self) -> Vec<Var> {
        self.sent_states.iter().flatten().copied().collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LossTerm {
    /// Summed token cross entropy.
    pub sum: Var,
    pub count: usize,
}

/// A decoder run with ground-truth inputs `[SOS, t_1..t_n]` and targets
/// `[t_1..t_n, EOS]`.
#[derive(Clone, Debug)]
pub struct TeacherForced {
    pub states: Vec<Var>,
    pub logits: Vec<Var>,
    pub targets: Vec<TokenId>,
    pub loss: LossTerm,
}

/// What the sentence decoder starts from.
#[derive(Clone, Debug)]
pub struct Conditioning {
    pub h0: Var,
    pub keys: Option<AttentionKeys>,
    pub content: Option<TeacherForced>,
    pub z_cont: Option<Var>,
}

#[derive(Clone, Debug)]
pub struct ForwardResult {
    /// `content mean + sentence mean + λ·da`.
    pub loss: Var,
    pub content: Option<LossTerm>,
    pub sentence: LossTerm,
    pub da: Option<Var>,
    pub sentence_logits: Vec<Var>,
    pub content_logits: Vec<Var>,
    pub h0_sent: Var,
}

/// Parameter handles of one architecture. Values live in a separate
/// [`ParamSet`], so the same model drives 32- and 64-bit sets.
#[derive(Clone, Debug)]
pub struct Model {
    config: ModelConfig,
    pub embedding: ParamId,
    sent_enc: SequenceEncoder,
    dial_enc: SequenceEncoder,
    cont_bridge: Option<MlpParams>,
    cont_dec: Option<DecoderParams>,
    cont_enc: Option<SequenceEncoder>,
    sent_bridge: MlpParams,
    sent_dec: DecoderParams,
    da_head: Option<MlpParams>,
}

impl Model {
    /// Registers every parameter, drawing initial values from `rng`.
    pub fn new<T: Scalar, R: Rng + ?Sized>(
        config: ModelConfig,
        params: &mut ParamSet<T>,
        rng: &mut R,
    ) -> Result<Self, ModelError> {
        config.validate()?;
        let c = &config;
        let embedding = params.register_uniform("embedding", &[c.vocab_size, c.emb_size], rng)?;
        let sent_enc = SequenceEncoder::register_bidirectional(params, "sent_enc", c.emb_size, c.enc_hidden, rng)?;
        let dial_enc =
            SequenceEncoder::register_unidirectional(params, "dial_enc", sent_enc.output_size(), c.enc_hidden, rng)?;
        let dial_size = dial_enc.output_size();
        let sent_key_size = sent_enc.output_size();

        let (cont_bridge, cont_dec, cont_enc) = if c.architecture.has_content() {
            let bridge = MlpParams::register(params, "cont_bridge", dial_size, c.dec_hidden, c.dec_hidden, rng)?;
            let dec = DecoderParams::register(params, "cont_dec", c, Some(sent_key_size), rng)?;
            let enc = if c.architecture == Architecture::HedCed {
                Some(SequenceEncoder::register_bidirectional(params, "cont_enc", c.emb_size, c.enc_hidden, rng)?)
            } else {
                None
            };
            (Some(bridge), Some(dec), enc)
        } else {
            (None, None, None)
        };

        let (bridge_in, sent_keys) = match c.architecture {
            Architecture::HedPlain => (dial_size, None),
            Architecture::HedAttn => (dial_size, Some(sent_key_size)),
            Architecture::HedCd => (dial_size + c.dec_hidden, Some(c.dec_hidden)),
            Architecture::HedCed => {
                let k = cont_enc.as_ref().expect("registered above").output_size();
                (dial_size + k, Some(k))
            }
        };
        let sent_bridge = MlpParams::register(params, "sent_bridge", bridge_in, c.dec_hidden, c.dec_hidden, rng)?;
        let sent_dec = DecoderParams::register(params, "sent_dec", c, sent_keys, rng)?;
        let da_head = if c.da_head {
            Some(MlpParams::register(params, "da_head", c.dec_hidden, c.dec_hidden, DialogAct::ALL.len(), rng)?)
        } else {
            None
        };
        Ok(Self {
            config,
            embedding,
            sent_enc,
            dial_enc,
            cont_bridge,
            cont_dec,
            cont_enc,
            sent_bridge,
            sent_dec,
            da_head,
        })
    }

    /// Fresh 32-bit parameters from a seeded generator.
    pub fn init(config: ModelConfig, seed: u64) -> Result<(Self, ParamSet<f32>), ModelError> {
        let mut params = ParamSet::new();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = Self::new(config, &mut params, &mut rng)?;
        Ok((model, params))
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn architecture(&self) -> Architecture {
        self.config.architecture
    }

    pub fn sentence_bridge(&self) -> &MlpParams {
        &self.sent_bridge
    }

    pub fn decoder(&self, kind: DecoderKind) -> Option<&DecoderParams> {
        match kind {
            DecoderKind::Sentence => Some(&self.sent_dec),
            DecoderKind::Content => self.cont_dec.as_ref(),
        }
    }

    fn decoder_or_err(&self, kind: DecoderKind) -> Result<&DecoderParams, ModelError> {
        self.decoder(kind).ok_or_else(|| {
            ModelError::InvalidConfig(format!("{} has no content decoder", self.config.architecture))
        })
    }

    /// Overwrites embedding rows with pretrained vectors. Returns how many
    /// rows were replaced.
    pub fn init_embeddings<'a, T: Scalar>(
        &self,
        params: &mut ParamSet<T>,
        tokens: &[String],
        lookup: impl Fn(&str) -> Option<&'a [f64]>,
    ) -> Result<usize, ModelError> {
        let e = self.config.emb_size;
        let table = params.value_mut(self.embedding).data_mut();
        let mut replaced = 0;
        for (i, tok) in tokens.iter().enumerate().take(self.config.vocab_size) {
            if let Some(v) = lookup(tok) {
                if v.len() != e {
                    return Err(ModelError::InvalidConfig(format!(
                        "pretrained vectors have {} dimensions, embedding size is {e}",
                        v.len()
                    )));
                }
                for (dst, src) in table[i * e..(i + 1) * e].iter_mut().zip(v) {
                    *dst = T::of(*src);
                }
                replaced += 1;
            }
        }
        Ok(replaced)
    }

    fn check_ids(&self, ids: &[TokenId]) -> Result<(), ModelError> {
        let vocab = self.config.vocab_size;
        match ids.iter().find(|&&i| i as usize >= vocab) {
            Some(&id) => Err(ModelError::TokenOutOfRange { id, vocab }),
            None => Ok(()),
        }
    }

    pub fn embed<T: Scalar>(&self, g: &mut Graph<'_, T>, ids: &[TokenId]) -> Result<Vec<Var>, ModelError> {
        self.check_ids(ids)?;
        let table = g.param(self.embedding);
        ids.iter()
            .map(|&i| g.row(table, i as usize).map_err(ModelError::from))
            .collect()
    }

    /// Bidirectional encoding of each sentence, then the dialog GRU over the
    /// sentence summaries.
    pub fn encode_context<T: Scalar>(
        &self,
        g: &mut Graph<'_, T>,
        context: &[Vec<TokenId>],
    ) -> Result<EncodedDialog, ModelError> {
        if context.is_empty() {
            return Err(ModelError::EmptyContext);
        }
        let mut sent_states = Vec::with_capacity(context.len());
        let mut sent_finals = Vec::with_capacity(context.len());
        for (index, s) in context.iter().enumerate() {
            if s.is_empty() {
                return Err(ModelError::EmptySentence { index });
            }
            let xs = self.embed(g, s)?;
            let enc = encode_sequence(g, &xs, &self.sent_enc)?;
            sent_states.push(enc.states);
            sent_finals.push(enc.last);
        }
        let dial = encode_sequence(g, &sent_finals, &self.dial_enc)?;
        Ok(EncodedDialog {
            sent_states,
            sent_finals,
            dial_final: dial.last,
        })
    }

    /// Projects attention keys for `kind`, or `None` if that decoder does not
    /// attend.
    pub fn prepare_decoder_keys<T: Scalar>(
        &self,
        g: &mut Graph<'_, T>,
        kind: DecoderKind,
        states: &[Var],
    ) -> Result<Option<AttentionKeys>, ModelError> {
        match &self.decoder_or_err(kind)?.attention {
            Some(a) => Ok(Some(prepare_keys(g, a, states)?)),
            None => Ok(None),
        }
    }

    /// One decoding step from `prev`; returns the new state and the logits.
    pub fn decoder_step<T: Scalar>(
        &self,
        g: &mut Graph<'_, T>,
        kind: DecoderKind,
        prev: TokenId,
        h: Var,
        keys: Option<&AttentionKeys>,
    ) -> Result<(Var, Var), ModelError> {
        let dec = self.decoder_or_err(kind)?;
        let x = self.embed(g, &[prev])?[0];
        let h_next = gru_step(g, &dec.gru, x, h)?;
        let (out_h, out_b) = (g.param(dec.out_h), g.param(dec.out_b));
        let mut pre = g.affine(out_h, h_next, Some(out_b))?;
        if let (Some(attn), Some(out_ctx), Some(keys)) = (&dec.attention, dec.out_ctx, keys) {
            let ctx = attend_prepared(g, attn, h_next, keys)?.context;
            let w = g.param(out_ctx);
            let proj = g.matvec(w, ctx)?;
            pre = g.add(pre, proj)?;
        }
        let out = g.tanh(pre);
        let (table, bias) = (g.param(self.embedding), g.param(dec.vocab_bias));
        let logits = g.affine(table, out, Some(bias))?;
        Ok((h_next, logits))
    }

    pub fn teacher_force<T: Scalar>(
        &self,
        g: &mut Graph<'_, T>,
        kind: DecoderKind,
        h0: Var,
        keys: Option<&AttentionKeys>,
        tokens: &[TokenId],
    ) -> Result<TeacherForced, ModelError> {
        self.check_ids(tokens)?;
        let mut inputs = Vec::with_capacity(tokens.len() + 1);
        inputs.push(SOS_ID);
        inputs.extend_from_slice(tokens);
        let mut targets = tokens.to_vec();
        targets.push(EOS_ID);

        let mut h = h0;
        let mut states = Vec::with_capacity(inputs.len());
        let mut logits = Vec::with_capacity(inputs.len());
        for &tok in &inputs {
            let (h_next, l) = self.decoder_step(g, kind, tok, h, keys)?;
            h = h_next;
            states.push(h);
            logits.push(l);
        }
        let (sum, count) = sum_cross_entropy(g, &logits, &targets, PAD_ID)?
            .ok_or(crate::neural::NeuralError::AllPadding)?;
        Ok(TeacherForced {
            states,
            logits,
            targets,
            loss: LossTerm { sum, count },
        })
    }

    /// Initial state of the content decoder.
    pub fn content_h0<T: Scalar>(&self, g: &mut Graph<'_, T>, enc: &EncodedDialog) -> Result<Var, ModelError> {
        let bridge = self.cont_bridge.as_ref().ok_or_else(|| {
            ModelError::InvalidConfig(format!("{} has no content decoder", self.config.architecture))
        })?;
        Ok(mlp_bridge(g, bridge, enc.dial_final)?)
    }

    /// Everything the sentence decoder is conditioned on. `content` is the
    /// content sequence (ground truth while training, decoded at inference);
    /// it is ignored by the plain variants.
    pub fn condition<T: Scalar>(
        &self,
        g: &mut Graph<'_, T>,
        enc: &EncodedDialog,
        content: &[TokenId],
    ) -> Result<Conditioning, ModelError> {
        let arch = self.config.architecture;
        if !arch.has_content() {
            let h0 = mlp_bridge(g, &self.sent_bridge, enc.dial_final)?;
            let keys = match arch {
                Architecture::HedAttn => {
                    self.prepare_decoder_keys(g, DecoderKind::Sentence, &enc.all_token_states())?
                }
                _ => None,
            };
            return Ok(Conditioning {
                h0,
                keys,
                content: None,
                z_cont: None,
            });
        }

        let h0_cont = self.content_h0(g, enc)?;
        let cont_keys = self.prepare_decoder_keys(g, DecoderKind::Content, &enc.all_token_states())?;
        let tf = self.teacher_force(g, DecoderKind::Content, h0_cont, cont_keys.as_ref(), content)?;
        let (z_cont, key_states) = match &self.cont_enc {
            None => (*tf.states.last().expect("at least one step"), tf.states.clone()),
            Some(cont_enc) => {
                let ids: &[TokenId] = if content.is_empty() { &[EOS_ID] } else { content };
                let xs = self.embed(g, ids)?;
                let e = encode_sequence(g, &xs, cont_enc)?;
                (e.last, e.states)
            }
        };
        let bridge_in = g.concat(&[enc.dial_final, z_cont])?;
        let h0 = mlp_bridge(g, &self.sent_bridge, bridge_in)?;
        let keys = self.prepare_decoder_keys(g, DecoderKind::Sentence, &key_states)?;
        Ok(Conditioning {
            h0,
            keys,
            content: Some(tf),
            z_cont: Some(z_cont),
        })
    }

    pub fn da_logits<T: Scalar>(&self, g: &mut Graph<'_, T>, h0_sent: Var) -> Result<Var, ModelError> {
        let head = self
            .da_head
            .as_ref()
            .ok_or_else(|| ModelError::InvalidConfig("dialog-act head is disabled".into()))?;
        Ok(head.logits(g, h0_sent)?)
    }

    /// Distribution over the four dialog acts.
    pub fn predict_dialog_act<T: Scalar>(&self, g: &mut Graph<'_, T>, h0_sent: Var) -> Result<Var, ModelError> {
        let logits = self.da_logits(g, h0_sent)?;
        Ok(g.softmax(logits)?)
    }

    fn check_response(response: &[TokenId]) -> Result<(), ModelError> {
        if response.len() > MAX_RESPONSE_LEN {
            return Err(ModelError::ResponseTooLong {
                len: response.len(),
                max: MAX_RESPONSE_LEN,
            });
        }
        Ok(())
    }

    fn finish<T: Scalar>(
        &self,
        g: &mut Graph<'_, T>,
        cond: Conditioning,
        sent: TeacherForced,
        da: Option<DialogAct>,
    ) -> Result<ForwardResult, ModelError> {
        let mean = |g: &mut Graph<'_, T>, t: &LossTerm| g.scale(t.sum, T::one() / T::of(t.count as f64));
        let mut total = mean(g, &sent.loss);
        let content = cond.content.as_ref().map(|c| c.loss);
        if let Some(c) = &content {
            let m = mean(g, c);
            total = g.add(total, m)?;
        }
        let da_loss = match (&self.da_head, da) {
            (None, _) => None,
            (Some(_), None) => return Err(ModelError::MissingDialogAct),
            (Some(_), Some(label)) => {
                let logits = self.da_logits(g, cond.h0)?;
                let l = g.cross_entropy(logits, label.index())?;
                let weighted = g.scale(l, T::of(self.config.da_weight));
                total = g.add(total, weighted)?;
                Some(l)
            }
        };
        Ok(ForwardResult {
            loss: total,
            content,
            sentence: sent.loss,
            da: da_loss,
            sentence_logits: sent.logits,
            content_logits: cond.content.map(|c| c.logits).unwrap_or_default(),
            h0_sent: cond.h0,
        })
    }

    /// Baseline objective. With `attn` false the sentence decoder ignores
    /// any attention parameters it has.
    pub fn hed_forward<T: Scalar>(
        &self,
        g: &mut Graph<'_, T>,
        context: &[Vec<TokenId>],
        response: &[TokenId],
        attn: bool,
        da: Option<DialogAct>,
    ) -> Result<ForwardResult, ModelError> {
        if self.config.architecture.has_content() {
            return Err(ModelError::InvalidConfig(format!(
                "hed_forward on {}",
                self.config.architecture
            )));
        }
        if attn && self.sent_dec.attention.is_none() {
            return Err(ModelError::InvalidConfig("model was built without attention".into()));
        }
        Self::check_response(response)?;
        let enc = self.encode_context(g, context)?;
        let mut cond = self.condition(g, &enc, &[])?;
        if !attn {
            cond.keys = None;
        }
        let sent = self.teacher_force(g, DecoderKind::Sentence, cond.h0, cond.keys.as_ref(), response)?;
        self.finish(g, cond, sent, da)
    }

    fn content_forward<T: Scalar>(
        &self,
        g: &mut Graph<'_, T>,
        context: &[Vec<TokenId>],
        content: &[TokenId],
        response: &[TokenId],
        da: Option<DialogAct>,
    ) -> Result<ForwardResult, ModelError> {
        Self::check_response(response)?;
        let enc = self.encode_context(g, context)?;
        let cond = self.condition(g, &enc, content)?;
        let sent = self.teacher_force(g, DecoderKind::Sentence, cond.h0, cond.keys.as_ref(), response)?;
        self.finish(g, cond, sent, da)
    }

    /// Content decoder plus a sentence decoder attending to its states.
    pub fn hed_cd_forward<T: Scalar>(
        &self,
        g: &mut Graph<'_, T>,
        context: &[Vec<TokenId>],
        content: &[TokenId],
        response: &[TokenId],
        da: Option<DialogAct>,
    ) -> Result<ForwardResult, ModelError> {
        if self.config.architecture != Architecture::HedCd {
            return Err(ModelError::InvalidConfig(format!("hed_cd_forward on {}", self.config.architecture)));
        }
        self.content_forward(g, context, content, response, da)
    }

    /// As [`Model::hed_cd_forward`], but the content summary and attention
    /// keys come from a bidirectional encoder over the content sequence.
    pub fn hed_ced_forward<T: Scalar>(
        &self,
        g: &mut Graph<'_, T>,
        context: &[Vec<TokenId>],
        content: &[TokenId],
        response: &[TokenId],
        da: Option<DialogAct>,
    ) -> Result<ForwardResult, ModelError> {
        if self.config.architecture != Architecture::HedCed {
            return Err(ModelError::InvalidConfig(format!("hed_ced_forward on {}", self.config.architecture)));
        }
        self.content_forward(g, context, content, response, da)
    }

    /// The training objective of whichever architecture this is.
    pub fn forward<T: Scalar>(
        &self,
        g: &mut Graph<'_, T>,
        context: &[Vec<TokenId>],
        content: &[TokenId],
        response: &[TokenId],
        da: Option<DialogAct>,
    ) -> Result<ForwardResult, ModelError> {
        match self.config.architecture {
            Architecture::HedPlain => self.hed_forward(g, context, response, false, da),
            Architecture::HedAttn => self.hed_forward(g, context, response, true, da),
            Architecture::HedCd | Architecture::HedCed => self.content_forward(g, context, content, response, da),
        }
    }
}
