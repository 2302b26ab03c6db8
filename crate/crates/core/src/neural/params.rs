use std::collections::BTreeMap;

use rand::Rng;

use super::{NeuralError, Scalar, Tensor};

/// Half-width of the uniform initializer for every non-embedding weight.
pub const INIT_BOUND: f64 = 0.08;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(pub(crate) usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A named trainable tensor together with its gradient and Adam moments.
#[derive(Clone, Debug)]
pub struct Param<T> {
    pub name: String,
    pub value: Tensor<T>,
    pub grad: Tensor<T>,
    pub first_moment: Tensor<T>,
    pub second_moment: Tensor<T>,
    pub frozen: bool,
}

/// Gradients produced by one backward pass, keyed by parameter.
#[derive(Clone, Debug, Default)]
pub struct Gradients<T> {
    pub(crate) entries: Vec<(ParamId, Vec<T>)>,
}

impl<T: Scalar> Gradients<T> {
    pub fn get(&self, id: ParamId) -> Option<&[T]> {
        self.entries
            .iter()
            .find(|(pid, _)| *pid == id)
            .map(|(_, g)| g.as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &[T])> {
        self.entries.iter().map(|(id, g)| (*id, g.as_slice()))
    }
}

/// Ordered, named collection of model parameters plus optimizer state.
#[derive(Clone, Debug)]
pub struct ParamSet<T> {
    params: Vec<Param<T>>,
    by_name: BTreeMap<String, ParamId>,
    step: u64,
}

impl<T: Scalar> Default for ParamSet<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> ParamSet<T> {
    pub fn new() -> Self {
        Self {
            params: Vec::new(),
            by_name: BTreeMap::new(),
            step: 0,
        }
    }

    pub fn register(&mut self, name: &str, value: Tensor<T>) -> Result<ParamId, NeuralError> {
        if self.by_name.contains_key(name) {
            return Err(NeuralError::DuplicateParam(name.to_string()));
        }
        let id = ParamId(self.params.len());
        let zeros = Tensor::zeros(value.shape());
        self.params.push(Param {
            name: name.to_string(),
            grad: zeros.clone(),
            first_moment: zeros.clone(),
            second_moment: zeros,
            value,
            frozen: false,
        });
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn register_uniform<R: Rng + ?Sized>(
        &mut self,
        name: &str,
        shape: &[usize],
        rng: &mut R,
    ) -> Result<ParamId, NeuralError> {
        self.register(name, Tensor::uniform(shape, INIT_BOUND, rng))
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.by_name.get(name).copied()
    }

    pub fn get(&self, id: ParamId) -> &Param<T> {
        &self.params[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Param<T> {
        &mut self.params[id.0]
    }

    pub fn by_name(&self, name: &str) -> Result<&Param<T>, NeuralError> {
        self.id(name)
            .map(|id| self.get(id))
            .ok_or_else(|| NeuralError::UnknownParam(name.to_string()))
    }

    pub fn value(&self, id: ParamId) -> &Tensor<T> {
        &self.params[id.0].value
    }

    pub fn value_mut(&mut self, id: ParamId) -> &mut Tensor<T> {
        &mut self.params[id.0].value
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &Param<T>)> {
        self.params.iter().enumerate().map(|(i, p)| (ParamId(i), p))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut Param<T>> {
        self.params.iter_mut()
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Total number of scalar entries across all parameters.
    pub fn num_scalars(&self) -> usize {
        self.params.iter().map(|p| p.value.len()).sum()
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub(crate) fn advance_step(&mut self) {
        self.step += 1;
    }

    pub fn set_frozen(&mut self, id: ParamId, frozen: bool) {
        self.params[id.0].frozen = frozen;
    }

    /// Freezes every parameter whose name starts with `prefix`; returns how many.
    pub fn freeze_prefix(&mut self, prefix: &str) -> usize {
        let mut n = 0;
        for p in self.params.iter_mut().filter(|p| p.name.starts_with(prefix)) {
            p.frozen = true;
            n += 1;
        }
        n
    }

    pub fn zero_grad(&mut self) {
        for p in &mut self.params {
            p.grad.fill(T::zero());
        }
    }

    /// Adds one backward pass worth of gradients into the gradient slots.
    pub fn accumulate(&mut self, grads: &Gradients<T>) {
        for (id, g) in &grads.entries {
            let slot = self.params[id.0].grad.data_mut();
            for (s, v) in slot.iter_mut().zip(g) {
                *s += *v;
            }
        }
    }

    /// Copies values (and optimizer state) into another precision.
    pub fn cast<U: Scalar>(&self) -> ParamSet<U> {
        ParamSet {
            params: self
                .params
                .iter()
                .map(|p| Param {
                    name: p.name.clone(),
                    value: p.value.cast(),
                    grad: p.grad.cast(),
                    first_moment: p.first_moment.cast(),
                    second_moment: p.second_moment.cast(),
                    frozen: p.frozen,
                })
                .collect(),
            by_name: self.by_name.clone(),
            step: self.step,
        }
    }
}
