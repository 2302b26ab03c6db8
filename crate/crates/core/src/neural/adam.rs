use super::{NeuralError, ParamSet, Scalar};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 0.0003,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// One bias-corrected Adam step over every unfrozen parameter.
///
/// Gradients are validated before anything is modified, then cleared;
/// the step counter advances by one.
pub fn adam_update<T: Scalar>(params: &mut ParamSet<T>, cfg: &AdamConfig) -> Result<(), NeuralError> {
    if let Some((_, p)) = params.iter().find(|(_, p)| !p.frozen && !p.grad.is_finite()) {
        return Err(NeuralError::NonFiniteGradient(p.name.clone()));
    }
    let t = (params.step() + 1) as i32;
    let (b1, b2) = (T::of(cfg.beta1), T::of(cfg.beta2));
    let bias1 = T::one() - b1.powi(t);
    let bias2 = T::one() - b2.powi(t);
    let (lr, eps) = (T::of(cfg.lr), T::of(cfg.eps));

    for p in params.iter_mut() {
        if !p.frozen {
            let grads = p.grad.data();
            let m = p.first_moment.data_mut();
            for (mi, gi) in m.iter_mut().zip(grads) {
                *mi = b1 * *mi + (T::one() - b1) * *gi;
            }
            let v = p.second_moment.data_mut();
            for (vi, gi) in v.iter_mut().zip(grads) {
                *vi = b2 * *vi + (T::one() - b2) * *gi * *gi;
            }
            let (m, v) = (p.first_moment.data(), p.second_moment.data());
            for (k, w) in p.value.data_mut().iter_mut().enumerate() {
                let m_hat = m[k] / bias1;
                let v_hat = v[k] / bias2;
                *w = *w - lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        p.grad.fill(T::zero());
    }
    params.advance_step();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::Tensor;

    fn scalar_set(value: f64) -> ParamSet<f64> {
        let mut ps = ParamSet::new();
        ps.register("x", Tensor::vector(vec![value])).unwrap();
        ps
    }

    fn set_grad(ps: &mut ParamSet<f64>, g: f64) {
        let id = ps.id("x").unwrap();
        ps.get_mut(id).grad.data_mut()[0] = g;
    }

    fn value(ps: &ParamSet<f64>) -> f64 {
        ps.by_name("x").unwrap().value.data()[0]
    }

    #[test]
    fn first_step_moves_by_about_lr() {
        let cfg = AdamConfig::default();
        for g in [3.0, -0.02, 1e-3] {
            let mut ps = scalar_set(1.0);
            set_grad(&mut ps, g);
            adam_update(&mut ps, &cfg).unwrap();
            let delta = value(&ps) - 1.0;
            assert_eq!(delta.signum(), -g.signum());
            assert!(delta.abs() <= cfg.lr && delta.abs() >= cfg.lr * (1.0 - 1e-4), "{delta}");
        }
    }

    #[test]
    fn zero_gradient_leaves_parameter() {
        let mut ps = scalar_set(0.5);
        adam_update(&mut ps, &AdamConfig::default()).unwrap();
        assert_eq!(value(&ps), 0.5);
        assert_eq!(ps.step(), 1);
    }

    #[test]
    fn moments_decay_under_zero_gradient() {
        let mut ps = scalar_set(0.5);
        set_grad(&mut ps, 1.0);
        adam_update(&mut ps, &AdamConfig::default()).unwrap();
        let m1 = ps.by_name("x").unwrap().first_moment.data()[0];
        adam_update(&mut ps, &AdamConfig::default()).unwrap();
        let m2 = ps.by_name("x").unwrap().first_moment.data()[0];
        assert!((m2 - 0.9 * m1).abs() < 1e-15);
    }

    #[test]
    fn three_step_trace_matches_scalar_oracle() {
        let cfg = AdamConfig::default();
        let grads = [0.5, -1.5, 0.25];
        let mut ps = scalar_set(0.1);
        let (mut m, mut v, mut x) = (0.0f64, 0.0f64, 0.1f64);
        for (i, g) in grads.iter().enumerate() {
            set_grad(&mut ps, *g);
            adam_update(&mut ps, &cfg).unwrap();
            let t = (i + 1) as i32;
            m = 0.9 * m + 0.1 * g;
            v = 0.999 * v + 0.001 * g * g;
            let mh = m / (1.0 - 0.9f64.powi(t));
            let vh = v / (1.0 - 0.999f64.powi(t));
            x -= cfg.lr * mh / (vh.sqrt() + cfg.eps);
            let p = ps.by_name("x").unwrap();
            assert!((p.first_moment.data()[0] - m).abs() < 1e-15);
            assert!((p.second_moment.data()[0] - v).abs() < 1e-15);
            assert!((value(&ps) - x).abs() < 1e-15);
            assert_eq!(p.grad.data()[0], 0.0);
        }
        assert_eq!(ps.step(), 3);
    }

    #[test]
    fn non_finite_gradient_names_parameter() {
        let mut ps = scalar_set(0.1);
        set_grad(&mut ps, f64::NAN);
        match adam_update(&mut ps, &AdamConfig::default()) {
            Err(NeuralError::NonFiniteGradient(name)) => assert_eq!(name, "x"),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(value(&ps), 0.1);
    }

    #[test]
    fn frozen_parameters_do_not_move() {
        let mut ps = scalar_set(0.1);
        set_grad(&mut ps, 1.0);
        let id = ps.id("x").unwrap();
        ps.set_frozen(id, true);
        adam_update(&mut ps, &AdamConfig::default()).unwrap();
        assert_eq!(value(&ps), 0.1);
        assert_eq!(ps.get(id).grad.data()[0], 0.0);
    }
}
