use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::corpus::{DialogAct, TokenId, EOS_ID, SOS_ID};
use crate::neural::gradcheck::check_gradients;
use crate::neural::{adam_update, gru_step, AdamConfig, Graph, ParamSet, Tensor};

const V: usize = 9;

fn tiny(arch: Architecture) -> ModelConfig {
    let mut c = ModelConfig::new(arch, V).with_sizes(3, 2, 2);
    c.attn_size = 2;
    c
}

fn build(cfg: ModelConfig, seed: u64) -> (Model, ParamSet<f64>) {
    let mut ps = ParamSet::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = Model::new(cfg, &mut ps, &mut rng).unwrap();
    (m, ps)
}

/// Rescales every parameter to U[-0.5, 0.5] so that gradients are not tiny.
fn widen(ps: &mut ParamSet<f64>, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for p in ps.iter_mut() {
        p.value = Tensor::uniform(p.value.shape(), 0.5, &mut rng);
    }
}

fn ctx() -> Vec<Vec<TokenId>> {
    vec![vec![4, 5], vec![6]]
}

fn zero(ps: &mut ParamSet<f64>, name: &str) {
    let id = ps.id(name).unwrap_or_else(|| panic!("no {name}"));
    ps.value_mut(id).fill(0.0);
}

#[test]
fn every_architecture_passes_gradient_check() {
    for arch in Architecture::ALL {
        for seed in 0..3 {
            let mut cfg = tiny(arch);
            cfg.da_head = true;
            let (m, mut ps) = build(cfg, seed);
            widen(&mut ps, seed);
            let report = check_gradients(&ps, 1e-3, Some(6), |g| {
                Ok(m.forward(g, &ctx(), &[7, 8], &[4, 8], Some(DialogAct::Question))
                    .map_err(|e| match e {
                        ModelError::Neural(n) => n,
                        other => panic!("{other}"),
                    })?
                    .loss)
            })
            .unwrap();
            assert!(
                report.worst_relative_error <= 1e-4,
                "{arch} seed {seed}: {} in {}",
                report.worst_relative_error,
                report.worst_param
            );
        }
    }
}

#[test]
fn single_sentence_context_is_one_dialog_step() {
    let (m, ps) = build(tiny(Architecture::HedPlain), 1);
    let mut g = Graph::new(&ps);
    let enc = m.encode_context(&mut g, &[vec![4, 5, 6]]).unwrap();
    assert_eq!(enc.sent_finals.len(), 1);
    assert_eq!(g.size(enc.sent_finals[0]), 4);
    let dial = ps.id("dial_enc.w_x").unwrap();
    let cell = crate::neural::GruParams {
        w_x: dial,
        u_zr: ps.id("dial_enc.u_zr").unwrap(),
        u_h: ps.id("dial_enc.u_h").unwrap(),
        b: ps.id("dial_enc.b").unwrap(),
        input_size: 4,
        hidden_size: 2,
    };
    let h0 = g.zeros(2);
    let manual = gru_step(&mut g, &cell, enc.sent_finals[0], h0).unwrap();
    assert_eq!(g.value(manual), g.value(enc.dial_final));
}

#[test]
fn two_sentence_context_unrolls_twice() {
    let (m, ps) = build(tiny(Architecture::HedPlain), 2);
    let mut g = Graph::new(&ps);
    let enc = m.encode_context(&mut g, &ctx()).unwrap();
    let cell = crate::neural::GruParams {
        w_x: ps.id("dial_enc.w_x").unwrap(),
        u_zr: ps.id("dial_enc.u_zr").unwrap(),
        u_h: ps.id("dial_enc.u_h").unwrap(),
        b: ps.id("dial_enc.b").unwrap(),
        input_size: 4,
        hidden_size: 2,
    };
    let h0 = g.zeros(2);
    let h1 = gru_step(&mut g, &cell, enc.sent_finals[0], h0).unwrap();
    let h2 = gru_step(&mut g, &cell, enc.sent_finals[1], h1).unwrap();
    assert_eq!(g.value(h2), g.value(enc.dial_final));
}

#[test]
fn default_sizes_give_600_wide_sentence_summaries() {
    let cfg = ModelConfig::new(Architecture::HedAttn, 20);
    let (m, ps) = Model::init(cfg, 0).unwrap();
    let mut g = Graph::new(&ps);
    let enc = m.encode_context(&mut g, &[vec![4]]).unwrap();
    assert_eq!(g.size(enc.sent_finals[0]), 600);
    assert_eq!(g.size(enc.dial_final), 300);
    let cond = m.condition(&mut g, &enc, &[]).unwrap();
    assert_eq!(g.size(cond.h0), 200);
}

#[test]
fn empty_context_is_rejected() {
    let (m, ps) = build(tiny(Architecture::HedPlain), 0);
    let mut g = Graph::new(&ps);
    assert!(matches!(m.encode_context(&mut g, &[]), Err(ModelError::EmptyContext)));
    assert!(matches!(m.encode_context(&mut g, &[vec![]]), Err(ModelError::EmptySentence { index: 0 })));
    assert!(matches!(
        m.encode_context(&mut g, &[vec![99]]),
        Err(ModelError::TokenOutOfRange { id: 99, .. })
    ));
}

#[test]
fn uniform_logits_give_log_vocab() {
    let (m, mut ps) = build(tiny(Architecture::HedPlain), 3);
    zero(&mut ps, "sent_dec.out_h");
    zero(&mut ps, "sent_dec.out_b");
    zero(&mut ps, "sent_dec.vocab_bias");
    let mut g = Graph::new(&ps);
    let r = m.forward(&mut g, &ctx(), &[], &[5], None).unwrap();
    assert_eq!(r.sentence.count, 2);
    assert!((g.scalar(r.loss) - (V as f64).ln()).abs() < 1e-12);
}

#[test]
fn zeroed_context_projection_makes_attention_inert() {
    let (m, mut ps) = build(tiny(Architecture::HedAttn), 4);
    zero(&mut ps, "sent_dec.out_ctx");
    let mut g = Graph::new(&ps);
    let with = m.hed_forward(&mut g, &ctx(), &[4, 5], true, None).unwrap();
    let without = m.hed_forward(&mut g, &ctx(), &[4, 5], false, None).unwrap();
    assert!((g.scalar(with.loss) - g.scalar(without.loss)).abs() < 1e-15);
}

#[test]
fn hed_forward_rejects_long_responses() {
    let (m, ps) = build(tiny(Architecture::HedPlain), 0);
    let mut g = Graph::new(&ps);
    let long = vec![4; MAX_RESPONSE_LEN + 1];
    assert!(matches!(
        m.hed_forward(&mut g, &ctx(), &long, false, None),
        Err(ModelError::ResponseTooLong { .. })
    ));
}

/// Two decoding steps recomputed with plain loops.
#[test]
fn decoder_steps_match_scalar_oracle() {
    let (m, ps) = build(tiny(Architecture::HedPlain), 5);
    let mut g = Graph::new(&ps);
    let h0 = g.input(vec![0.3, -0.2]);
    let (h1, l1) = m.decoder_step(&mut g, DecoderKind::Sentence, SOS_ID, h0, None).unwrap();
    let (_, l2) = m.decoder_step(&mut g, DecoderKind::Sentence, 6, h1, None).unwrap();

    let val = |n: &str| ps.by_name(n).unwrap().value.data().to_vec();
    let (emb, wx, uzr, uh, b) = (
        val("embedding"),
        val("sent_dec.gru.w_x"),
        val("sent_dec.gru.u_zr"),
        val("sent_dec.gru.u_h"),
        val("sent_dec.gru.b"),
    );
    let (oh, ob, vb) = (val("sent_dec.out_h"), val("sent_dec.out_b"), val("sent_dec.vocab_bias"));
    let (e, h) = (3, 2);
    let sig = |x: f64| 1.0 / (1.0 + (-x).exp());
    let step = |tok: usize, hp: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let x = &emb[tok * e..(tok + 1) * e];
        let lin = |row: usize, w: &[f64], v: &[f64], n: usize| (0..n).map(|j| w[row * n + j] * v[j]).sum::<f64>();
        let mut hn = vec![0.0; h];
        for i in 0..h {
            let z = sig(lin(i, &wx, x, e) + lin(i, &uzr, hp, h) + b[i]);
            let r: Vec<f64> = (0..h)
                .map(|k| sig(lin(h + k, &wx, x, e) + lin(h + k, &uzr, hp, h) + b[h + k]) * hp[k])
                .collect();
            let cand = (lin(2 * h + i, &wx, x, e) + lin(i, &uh, &r, h) + b[2 * h + i]).tanh();
            hn[i] = (1.0 - z) * hp[i] + z * cand;
        }
        let o: Vec<f64> = (0..e).map(|i| (lin(i, &oh, &hn, h) + ob[i]).tanh()).collect();
        let logits = (0..V).map(|v| lin(v, &emb, &o, e) + vb[v]).collect();
        (hn, logits)
    };
    let (hn1, ol1) = step(SOS_ID as usize, &[0.3, -0.2]);
    let (_, ol2) = step(6, &hn1);
    for (a, b) in g.value(l1).iter().zip(&ol1).chain(g.value(l2).iter().zip(&ol2)) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn output_layer_is_tied_to_embedding() {
    let (m, mut ps) = build(tiny(Architecture::HedCd), 6);
    let run = |ps: &ParamSet<f64>| {
        let mut g = Graph::new(ps);
        let h0 = g.input(vec![0.1, 0.2]);
        let (_, l) = m.decoder_step(&mut g, DecoderKind::Sentence, SOS_ID, h0, None).unwrap();
        let (_, lc) = m.decoder_step(&mut g, DecoderKind::Content, SOS_ID, h0, None).unwrap();
        (g.value(l)[7], g.value(lc)[7])
    };
    let before = run(&ps);
    // Row 7 is never an input here, so only the output projection sees it.
    let row7 = &mut ps.value_mut(m.embedding).data_mut()[7 * 3..8 * 3];
    row7.iter_mut().for_each(|x| *x += 0.25);
    let after = run(&ps);
    assert_ne!(before.0, after.0);
    assert_ne!(before.1, after.1);
    assert!(ps.id("sent_dec.out_proj").is_none());
}

#[test]
fn content_bridge_widths() {
    let (m, _) = build(tiny(Architecture::HedCd), 0);
    assert_eq!(m.sentence_bridge().input_size, 2 + 2);
    let (m, ps) = build(tiny(Architecture::HedCed), 0);
    assert_eq!(m.sentence_bridge().input_size, 2 + 4);
    let mut g = Graph::new(&ps);
    let enc = m.encode_context(&mut g, &ctx()).unwrap();
    let cond = m.condition(&mut g, &enc, &[7]).unwrap();
    assert_eq!(g.size(cond.z_cont.unwrap()), 4);
}

#[test]
fn empty_content_scores_one_position() {
    for arch in [Architecture::HedCd, Architecture::HedCed] {
        let (m, ps) = build(tiny(arch), 7);
        let mut g = Graph::new(&ps);
        let r = m.forward(&mut g, &ctx(), &[], &[4], None).unwrap();
        assert_eq!(r.content.unwrap().count, 1);
        assert!(g.scalar(r.loss).is_finite());
    }
}

#[test]
fn zeroed_content_encoder_ignores_content() {
    let (m, mut ps) = build(tiny(Architecture::HedCed), 8);
    let names: Vec<String> = ps
        .iter()
        .filter(|(_, p)| p.name.starts_with("cont_enc."))
        .map(|(_, p)| p.name.clone())
        .collect();
    for n in &names {
        zero(&mut ps, n);
    }
    let mut g = Graph::new(&ps);
    let a = m.forward(&mut g, &ctx(), &[7], &[4, 5], None).unwrap();
    let b = m.forward(&mut g, &ctx(), &[8, 6, 6], &[4, 5], None).unwrap();
    assert_eq!(g.scalar(a.sentence.sum), g.scalar(b.sentence.sum));
}

#[test]
fn objective_decomposes_into_position_sums() {
    let (m, ps) = build(tiny(Architecture::HedCd), 9);
    let mut g = Graph::new(&ps);
    let r = m.forward(&mut g, &ctx(), &[7, 8], &[4, 5, 6], None).unwrap();
    let c = r.content.unwrap();
    assert_eq!((c.count, r.sentence.count), (3, 4));
    let nll = |logits: &[crate::neural::Var], targets: &[TokenId], g: &Graph<'_, f64>| -> f64 {
        logits
            .iter()
            .zip(targets)
            .map(|(l, t)| {
                let v = g.value(*l);
                let m = v.iter().cloned().fold(f64::MIN, f64::max);
                let lse = m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln();
                lse - v[*t as usize]
            })
            .sum()
    };
    let content_nll = nll(&r.content_logits, &[7, 8, EOS_ID], &g);
    let sentence_nll = nll(&r.sentence_logits, &[4, 5, 6, EOS_ID], &g);
    assert!((g.scalar(c.sum) - content_nll).abs() < 1e-12);
    assert!((g.scalar(r.sentence.sum) - sentence_nll).abs() < 1e-12);
    let mean = g.scalar(c.sum) / 3.0 + g.scalar(r.sentence.sum) / 4.0;
    assert!((g.scalar(r.loss) - mean).abs() < 1e-12);
}

#[test]
fn dialog_act_head() {
    let mut cfg = tiny(Architecture::HedAttn);
    cfg.da_head = true;
    let (m, ps) = build(cfg, 10);
    let mut g = Graph::new(&ps);
    let h0 = g.input(vec![0.4, -0.1]);
    let p = m.predict_dialog_act(&mut g, h0).unwrap();
    assert_eq!(g.size(p), 4);
    assert!((g.value(p).iter().sum::<f64>() - 1.0).abs() < 1e-6);
    assert!(matches!(
        m.forward(&mut g, &ctx(), &[], &[4], None),
        Err(ModelError::MissingDialogAct)
    ));
    let r = m.forward(&mut g, &ctx(), &[], &[4], Some(DialogAct::Inform)).unwrap();
    assert!(r.da.is_some());
}

#[test]
fn uniform_dialog_act_logits_give_log_four() {
    let mut cfg = tiny(Architecture::HedPlain);
    cfg.da_head = true;
    let (m, mut ps) = build(cfg, 11);
    zero(&mut ps, "da_head.w2");
    zero(&mut ps, "da_head.b2");
    let mut g = Graph::new(&ps);
    let r = m.forward(&mut g, &ctx(), &[], &[4], Some(DialogAct::Directive)).unwrap();
    assert!((g.scalar(r.da.unwrap()) - 4f64.ln()).abs() < 1e-12);
}

fn train_steps(m: &Model, ps: &mut ParamSet<f64>, steps: usize, lr: f64) -> Vec<f64> {
    let cfg = AdamConfig { lr, ..AdamConfig::default() };
    let mut losses = Vec::new();
    for _ in 0..steps {
        let (loss, grads) = {
            let mut g = Graph::new(ps);
            let r = m.forward(&mut g, &ctx(), &[7, 8], &[4, 5, 6], None).unwrap();
            (g.scalar(r.sentence.sum) / r.sentence.count as f64, g.backward(r.loss).unwrap())
        };
        ps.accumulate(&grads);
        adam_update(ps, &cfg).unwrap();
        losses.push(loss);
    }
    losses
}

#[test]
fn fixed_triplet_loss_decreases() {
    let (m, mut ps) = build(tiny(Architecture::HedCd), 12);
    let mut total = Vec::new();
    let cfg = AdamConfig { lr: 0.01, ..AdamConfig::default() };
    for _ in 0..50 {
        let (loss, grads) = {
            let mut g = Graph::new(&ps);
            let r = m.forward(&mut g, &ctx(), &[7, 8], &[4, 5, 6], None).unwrap();
            (g.scalar(r.loss), g.backward(r.loss).unwrap())
        };
        ps.accumulate(&grads);
        adam_update(&mut ps, &cfg).unwrap();
        total.push(loss);
    }
    assert!(total.windows(2).all(|w| w[1] < w[0]), "{total:?}");
}

/// Content components zeroed and frozen: the content-decoder model's
/// sentence loss follows the plain model step for step.
#[test]
fn frozen_zero_content_path_nests_plain_model() {
    let (cd, mut cd_ps) = build(tiny(Architecture::HedCd), 13);
    let (plain, mut plain_ps) = build(tiny(Architecture::HedPlain), 13);
    let cont: Vec<String> = cd_ps
        .iter()
        .filter(|(_, p)| p.name.starts_with("cont_") || p.name.starts_with("sent_dec.attn") || p.name == "sent_dec.out_ctx")
        .map(|(_, p)| p.name.clone())
        .collect();
    for n in &cont {
        zero(&mut cd_ps, n);
    }
    for n in cont.iter().filter(|n| n.starts_with("cont_")) {
        let id = cd_ps.id(n).unwrap();
        cd_ps.set_frozen(id, true);
    }
    // Share every common parameter; the plain bridge takes the dialog-only
    // columns of the wider one.
    let shared: Vec<(String, Tensor<f64>)> = plain_ps
        .iter()
        .map(|(_, p)| (p.name.clone(), p.value.clone()))
        .collect();
    for (name, _) in &shared {
        let src = cd_ps.by_name(name).unwrap().value.clone();
        let dst = plain_ps.id(name).unwrap();
        if name == "sent_bridge.w1" {
            let (rows, wide) = (src.shape()[0], src.shape()[1]);
            let narrow = plain_ps.value(dst).shape()[1];
            let data: Vec<f64> = (0..rows)
                .flat_map(|r| src.data()[r * wide..r * wide + narrow].to_vec())
                .collect();
            *plain_ps.value_mut(dst) = Tensor::from_vec(&[rows, narrow], data).unwrap();
        } else {
            *plain_ps.value_mut(dst) = src;
        }
    }
    let a = train_steps(&cd, &mut cd_ps, 5, 3e-4);
    let b = train_steps(&plain, &mut plain_ps, 5, 3e-4);
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-5, "{a:?} vs {b:?}");
    }
}

#[test]
fn all_architectures_accept_the_same_batch() {
    for arch in Architecture::ALL {
        let (m, ps) = build(tiny(arch), 14);
        let mut g = Graph::new(&ps);
        let r = m.forward(&mut g, &ctx(), &[7], &[4, 5], None).unwrap();
        assert!(g.scalar(r.loss).is_finite(), "{arch}");
        assert_eq!(r.content.is_some(), arch.has_content());
    }
}

