use rand::Rng;

use super::{Graph, NeuralError, ParamId, ParamSet, Scalar, Var};

/// Weights of one GRU cell.
///
/// Gate blocks are stacked in the order update (z), reset (r), candidate:
/// `w_x` is `[3H, I]`, `u_zr` is `[2H, H]`, `u_h` is `[H, H]`, `b` is `[3H]`.
#[derive(Clone, Debug)]
pub struct GruParams {
    pub w_x: ParamId,
    pub u_zr: ParamId,
    pub u_h: ParamId,
    pub b: ParamId,
    pub input_size: usize,
    pub hidden_size: usize,
}

impl GruParams {
    pub fn register<T: Scalar, R: Rng + ?Sized>(
        params: &mut ParamSet<T>,
        prefix: &str,
        input_size: usize,
        hidden_size: usize,
        rng: &mut R,
    ) -> Result<Self, NeuralError> {
        let h = hidden_size;
        Ok(Self {
            w_x: params.register_uniform(&format!("{prefix}.w_x"), &[3 * h, input_size], rng)?,
            u_zr: params.register_uniform(&format!("{prefix}.u_zr"), &[2 * h, h], rng)?,
            u_h: params.register_uniform(&format!("{prefix}.u_h"), &[h, h], rng)?,
            b: params.register_uniform(&format!("{prefix}.b"), &[3 * h], rng)?,
            input_size,
            hidden_size,
        })
    }

    pub fn ids(&self) -> [ParamId; 4] {
        [self.w_x, self.u_zr, self.u_h, self.b]
    }
}

/// One GRU transition:
///
/// ```text
/// z  = σ(W_z x + U_z h + b_z)
/// r  = σ(W_r x + U_r h + b_r)
/// h~ = tanh(W_h x + U_h (r ⊙ h) + b_h)
/// h' = (1 - z) ⊙ h + z ⊙ h~
/// ```
pub fn gru_step<T: Scalar>(
    g: &mut Graph<'_, T>,
    p: &GruParams,
    x: Var,
    h_prev: Var,
) -> Result<Var, NeuralError> {
    let hs = p.hidden_size;
    let (w_x, u_zr, u_h, b) = (g.param(p.w_x), g.param(p.u_zr), g.param(p.u_h), g.param(p.b));
    let xp = g.affine(w_x, x, Some(b))?;
    let hp = g.matvec(u_zr, h_prev)?;

    let xz = g.slice(xp, 0, hs)?;
    let hz = g.slice(hp, 0, hs)?;
    let z_pre = g.add(xz, hz)?;
    let z = g.sigmoid(z_pre);

    let xr = g.slice(xp, hs, hs)?;
    let hr = g.slice(hp, hs, hs)?;
    let r_pre = g.add(xr, hr)?;
    let r = g.sigmoid(r_pre);

    let rh = g.mul(r, h_prev)?;
    let uh = g.matvec(u_h, rh)?;
    let xh = g.slice(xp, 2 * hs, hs)?;
    let cand_pre = g.add(xh, uh)?;
    let cand = g.tanh(cand_pre);

    // h + z ⊙ (h~ - h) == (1 - z) ⊙ h + z ⊙ h~
    let delta = g.sub(cand, h_prev)?;
    let step = g.mul(z, delta)?;
    g.add(h_prev, step)
}

/// Recurrent encoder over a sequence of input vectors.
#[derive(Clone, Debug)]
pub enum SequenceEncoder {
    Unidirectional(GruParams),
    Bidirectional { forward: GruParams, backward: GruParams },
}

impl SequenceEncoder {
    pub fn register_bidirectional<T: Scalar, R: Rng + ?Sized>(
        params: &mut ParamSet<T>,
        prefix: &str,
        input_size: usize,
        hidden_size: usize,
        rng: &mut R,
    ) -> Result<Self, NeuralError> {
        Ok(Self::Bidirectional {
            forward: GruParams::register(params, &format!("{prefix}.fwd"), input_size, hidden_size, rng)?,
            backward: GruParams::register(params, &format!("{prefix}.bwd"), input_size, hidden_size, rng)?,
        })
    }

    pub fn register_unidirectional<T: Scalar, R: Rng + ?Sized>(
        params: &mut ParamSet<T>,
        prefix: &str,
        input_size: usize,
        hidden_size: usize,
        rng: &mut R,
    ) -> Result<Self, NeuralError> {
        Ok(Self::Unidirectional(GruParams::register(
            params, prefix, input_size, hidden_size, rng,
        )?))
    }

    /// Extent of each per-position state and of the final state.
    pub fn output_size(&self) -> usize {
        match self {
            Self::Unidirectional(p) => p.hidden_size,
            Self::Bidirectional { forward, backward } => forward.hidden_size + backward.hidden_size,
        }
    }

    pub fn cells(&self) -> Vec<&GruParams> {
        match self {
            Self::Unidirectional(p) => vec![p],
            Self::Bidirectional { forward, backward } => vec![forward, backward],
        }
    }
}

#[derive(Clone, Debug)]
pub struct EncodedSequence {
    /// One state per input position.
    pub states: Vec<Var>,
    /// Unidirectional: `h_T`. Bidirectional: forward `h_T` ⊕ backward `h_1`.
    pub last: Var,
}

fn run_cell<T: Scalar>(
    g: &mut Graph<'_, T>,
    p: &GruParams,
    xs: impl Iterator<Item = Var>,
) -> Result<Vec<Var>, NeuralError> {
    let mut h = g.zeros(p.hidden_size);
    let mut out = Vec::new();
    for x in xs {
        h = gru_step(g, p, x, h)?;
        out.push(h);
    }
    Ok(out)
}

/// Runs the encoder from a zero initial state.
pub fn encode_sequence<T: Scalar>(
    g: &mut Graph<'_, T>,
    xs: &[Var],
    encoder: &SequenceEncoder,
) -> Result<EncodedSequence, NeuralError> {
    if xs.is_empty() {
        return Err(NeuralError::EmptySequence);
    }
    match encoder {
        SequenceEncoder::Unidirectional(p) => {
            let states = run_cell(g, p, xs.iter().copied())?;
            let last = *states.last().expect("non-empty");
            Ok(EncodedSequence { states, last })
        }
        SequenceEncoder::Bidirectional { forward, backward } => {
            let fwd = run_cell(g, forward, xs.iter().copied())?;
            let mut bwd = run_cell(g, backward, xs.iter().rev().copied())?;
            bwd.reverse();
            let states = fwd
                .iter()
                .zip(&bwd)
                .map(|(f, b)| g.concat(&[*f, *b]))
                .collect::<Result<Vec<_>, _>>()?;
            let last = g.concat(&[*fwd.last().expect("non-empty"), bwd[0]])?;
            Ok(EncodedSequence { states, last })
        }
    }
}
