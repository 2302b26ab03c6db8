use rand::Rng;

use super::{Graph, NeuralError, ParamId, ParamSet, Scalar, Var};

/// Two-layer perceptron: `W2 · tanh(W1 x + b1) + b2`.
#[derive(Clone, Debug)]
pub struct MlpParams {
    pub w1: ParamId,
    pub b1: ParamId,
    pub w2: ParamId,
    pub b2: ParamId,
    pub input_size: usize,
    pub output_size: usize,
}

impl MlpParams {
    pub fn register<T: Scalar, R: Rng + ?Sized>(
        params: &mut ParamSet<T>,
        prefix: &str,
        input_size: usize,
        hidden_size: usize,
        output_size: usize,
        rng: &mut R,
    ) -> Result<Self, NeuralError> {
        Ok(Self {
            w1: params.register_uniform(&format!("{prefix}.w1"), &[hidden_size, input_size], rng)?,
            b1: params.register_uniform(&format!("{prefix}.b1"), &[hidden_size], rng)?,
            w2: params.register_uniform(&format!("{prefix}.w2"), &[output_size, hidden_size], rng)?,
            b2: params.register_uniform(&format!("{prefix}.b2"), &[output_size], rng)?,
            input_size,
            output_size,
        })
    }

    pub fn ids(&self) -> [ParamId; 4] {
        [self.w1, self.b1, self.w2, self.b2]
    }

    /// Pre-activation output of the second layer.
    pub fn logits<T: Scalar>(&self, g: &mut Graph<'_, T>, input: Var) -> Result<Var, NeuralError> {
        if g.size(input) != self.input_size {
            return Err(NeuralError::Shape {
                op: "mlp",
                detail: format!("input of {} for in-size {}", g.size(input), self.input_size),
            });
        }
        let (w1, b1, w2, b2) = (g.param(self.w1), g.param(self.b1), g.param(self.w2), g.param(self.b2));
        let hidden_pre = g.affine(w1, input, Some(b1))?;
        let hidden = g.tanh(hidden_pre);
        g.affine(w2, hidden, Some(b2))
    }
}

/// Maps an encoder summary to an initial decoder state; the final tanh keeps
/// it inside the GRU state range.
pub fn mlp_bridge<T: Scalar>(g: &mut Graph<'_, T>, p: &MlpParams, input: Var) -> Result<Var, NeuralError> {
    let out = p.logits(g, input)?;
    Ok(g.tanh(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::Tensor;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_input_zero_bias_gives_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut ps = ParamSet::<f64>::new();
        let p = MlpParams::register(&mut ps, "m", 4, 5, 3, &mut rng).unwrap();
        ps.value_mut(p.b1).fill(0.0);
        ps.value_mut(p.b2).fill(0.0);
        let mut g = Graph::new(&ps);
        let x = g.zeros(4);
        let y = mlp_bridge(&mut g, &p, x).unwrap();
        assert_eq!(g.value(y), &[0.0; 3]);
    }

    #[test]
    fn matches_two_matrix_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut ps = ParamSet::<f64>::new();
        let p = MlpParams::register(&mut ps, "m", 2, 2, 2, &mut rng).unwrap();
        for id in p.ids() {
            let t = Tensor::uniform(ps.value(id).shape(), 1.0, &mut rng);
            *ps.value_mut(id) = t;
        }
        let x = [0.5, -1.25];
        let (w1, b1) = (ps.value(p.w1).data(), ps.value(p.b1).data());
        let (w2, b2) = (ps.value(p.w2).data(), ps.value(p.b2).data());
        let hid: Vec<f64> = (0..2)
            .map(|i| (w1[i * 2] * x[0] + w1[i * 2 + 1] * x[1] + b1[i]).tanh())
            .collect();
        let expect: Vec<f64> = (0..2)
            .map(|i| (w2[i * 2] * hid[0] + w2[i * 2 + 1] * hid[1] + b2[i]).tanh())
            .collect();
        let mut g = Graph::new(&ps);
        let xv = g.input(x.to_vec());
        let y = mlp_bridge(&mut g, &p, xv).unwrap();
        for (a, b) in g.value(y).iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn wrong_input_extent_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut ps = ParamSet::<f64>::new();
        let p = MlpParams::register(&mut ps, "m", 4, 5, 3, &mut rng).unwrap();
        let mut g = Graph::new(&ps);
        let x = g.zeros(3);
        assert!(mlp_bridge(&mut g, &p, x).is_err());
    }
}
