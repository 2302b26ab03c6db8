use rand::Rng;

use super::{Graph, NeuralError, ParamId, ParamSet, Scalar, Var};

/// Additive attention: `score_i = v · tanh(W_q q + W_k k_i)`.
#[derive(Clone, Debug)]
pub struct AttentionParams {
    pub w_query: ParamId,
    pub w_key: ParamId,
    pub v: ParamId,
    pub query_size: usize,
    pub key_size: usize,
}

impl AttentionParams {
    pub fn register<T: Scalar, R: Rng + ?Sized>(
        params: &mut ParamSet<T>,
        prefix: &str,
        query_size: usize,
        key_size: usize,
        attn_size: usize,
        rng: &mut R,
    ) -> Result<Self, NeuralError> {
        Ok(Self {
            w_query: params.register_uniform(&format!("{prefix}.w_query"), &[attn_size, query_size], rng)?,
            w_key: params.register_uniform(&format!("{prefix}.w_key"), &[attn_size, key_size], rng)?,
            v: params.register_uniform(&format!("{prefix}.v"), &[attn_size], rng)?,
            query_size,
            key_size,
        })
    }
}

/// Keys with their projections cached; reused across decoding steps.
#[derive(Clone, Debug)]
pub struct AttentionKeys {
    pub keys: Vec<Var>,
    projected: Vec<Var>,
}

impl AttentionKeys {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Attended {
    pub context: Var,
    /// Softmax over keys.
    pub weights: Var,
}

pub fn prepare_keys<T: Scalar>(
    g: &mut Graph<'_, T>,
    p: &AttentionParams,
    keys: &[Var],
) -> Result<AttentionKeys, NeuralError> {
    if keys.is_empty() {
        return Err(NeuralError::EmptySequence);
    }
    let w_key = g.param(p.w_key);
    let projected = keys
        .iter()
        .map(|k| g.matvec(w_key, *k))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AttentionKeys {
        keys: keys.to_vec(),
        projected,
    })
}

pub fn attend_prepared<T: Scalar>(
    g: &mut Graph<'_, T>,
    p: &AttentionParams,
    query: Var,
    keys: &AttentionKeys,
) -> Result<Attended, NeuralError> {
    let (w_query, v) = (g.param(p.w_query), g.param(p.v));
    let q = g.matvec(w_query, query)?;
    let mut scores = Vec::with_capacity(keys.len());
    for kp in &keys.projected {
        let pre = g.add(q, *kp)?;
        let act = g.tanh(pre);
        scores.push(g.dot(v, act)?);
    }
    let scores = g.stack(&scores)?;
    let weights = g.softmax(scores)?;
    let context = g.weighted_sum(weights, &keys.keys)?;
    Ok(Attended { context, weights })
}

pub fn attend<T: Scalar>(
    g: &mut Graph<'_, T>,
    p: &AttentionParams,
    query: Var,
    keys: &[Var],
) -> Result<Attended, NeuralError> {
    let prepared = prepare_keys(g, p, keys)?;
    attend_prepared(g, p, query, &prepared)
}
