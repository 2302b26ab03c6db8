//! Tape-based reverse-mode differentiation over vectors.
//!
//! A [`Graph`] records every operation of one forward pass. Parameters are
//! borrowed from a [`ParamSet`] rather than copied; [`Graph::backward`]
//! walks the tape in reverse and returns the parameter gradients, which the
//! caller folds into the set with [`ParamSet::accumulate`].
//!
//! Values are flat vectors. Matrices only appear as parameters and are
//! consumed by [`Graph::affine`] and [`Graph::row`].

use super::{Gradients, NeuralError, ParamId, ParamSet, Scalar, Tensor};

/// Handle to a node on the tape.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug)]
enum Op<T> {
    Input,
    Param(ParamId),
    Affine { w: Var, x: Var, b: Option<Var> },
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, T),
    Sigmoid(Var),
    Tanh(Var),
    Concat(Vec<Var>),
    Slice { x: Var, start: usize },
    Row { table: Var, row: usize },
    Dot(Var, Var),
    Stack(Vec<Var>),
    Softmax(Var),
    WeightedSum { weights: Var, items: Vec<Var> },
    CrossEntropy { logits: Var, target: usize },
    Sum(Vec<Var>),
}

#[derive(Debug)]
struct Node<T> {
    op: Op<T>,
    /// Empty for parameter nodes, whose values live in the borrowed set.
    value: Vec<T>,
    shape: Vec<usize>,
    needs_grad: bool,
}

pub struct Graph<'p, T> {
    params: &'p ParamSet<T>,
    nodes: Vec<Node<T>>,
    param_nodes: Vec<Option<Var>>,
}

fn shape_err(op: &'static str, detail: String) -> NeuralError {
    NeuralError::Shape { op, detail }
}

impl<'p, T: Scalar> Graph<'p, T> {
    pub fn new(params: &'p ParamSet<T>) -> Self {
        Self {
            params,
            nodes: Vec::new(),
            param_nodes: vec![None; params.len()],
        }
    }

    pub fn params(&self) -> &'p ParamSet<T> {
        self.params
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &[T] {
        let node = &self.nodes[v.0];
        match node.op {
            Op::Param(id) => self.params.value(id).data(),
            _ => &node.value,
        }
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        &self.nodes[v.0].shape
    }

    /// Length of a vector node (total entries for matrices).
    pub fn size(&self, v: Var) -> usize {
        self.nodes[v.0].shape.iter().product()
    }

    pub fn scalar(&self, v: Var) -> T {
        self.value(v)[0]
    }

    fn push(&mut self, op: Op<T>, value: Vec<T>, shape: Vec<usize>, parents: &[Var]) -> Var {
        let needs_grad = parents.iter().any(|p| self.nodes[p.0].needs_grad);
        self.nodes.push(Node {
            op,
            value,
            shape,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn vector_len(&self, v: Var, op: &'static str) -> Result<usize, NeuralError> {
        let shape = &self.nodes[v.0].shape;
        if shape.len() != 1 {
            return Err(shape_err(op, format!("expected a vector, got shape {:?}", shape)));
        }
        Ok(shape[0])
    }

    fn same_len(&self, a: Var, b: Var, op: &'static str) -> Result<usize, NeuralError> {
        let (la, lb) = (self.vector_len(a, op)?, self.vector_len(b, op)?);
        if la != lb {
            return Err(shape_err(op, format!("lengths {} and {} differ", la, lb)));
        }
        Ok(la)
    }

    /// Constant leaf; gradients never flow into it.
    pub fn input(&mut self, data: Vec<T>) -> Var {
        let n = data.len();
        self.nodes.push(Node {
            op: Op::Input,
            value: data,
            shape: vec![n],
            needs_grad: false,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn input_tensor(&mut self, t: Tensor<T>) -> Var {
        let shape = t.shape().to_vec();
        self.nodes.push(Node {
            op: Op::Input,
            value: t.into_data(),
            shape,
            needs_grad: false,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn zeros(&mut self, n: usize) -> Var {
        self.input(vec![T::zero(); n])
    }

    /// Leaf for a parameter. Repeated calls return the same node.
    pub fn param(&mut self, id: ParamId) -> Var {
        if let Some(v) = self.param_nodes[id.0] {
            return v;
        }
        let shape = self.params.value(id).shape().to_vec();
        self.nodes.push(Node {
            op: Op::Param(id),
            value: Vec::new(),
            shape,
            needs_grad: true,
        });
        let v = Var(self.nodes.len() - 1);
        self.param_nodes[id.0] = Some(v);
        v
    }

    /// `w · x (+ b)` for a matrix `w` of shape `[m, n]`.
    pub fn affine(&mut self, w: Var, x: Var, b: Option<Var>) -> Result<Var, NeuralError> {
        let ws = self.nodes[w.0].shape.clone();
        if ws.len() != 2 {
            return Err(shape_err("affine", format!("weight must be 2-D, got {:?}", ws)));
        }
        let (m, n) = (ws[0], ws[1]);
        let xn = self.vector_len(x, "affine")?;
        if xn != n {
            return Err(shape_err("affine", format!("weight {:?} times vector of {}", ws, xn)));
        }
        if let Some(b) = b {
            let bn = self.vector_len(b, "affine")?;
            if bn != m {
                return Err(shape_err("affine", format!("bias of {} for {} rows", bn, m)));
            }
        }
        let wv = self.value(w);
        let xv = self.value(x);
        let mut out = match b {
            Some(b) => self.value(b).to_vec(),
            None => vec![T::zero(); m],
        };
        for (i, o) in out.iter_mut().enumerate() {
            let row = &wv[i * n..(i + 1) * n];
            let mut acc = T::zero();
            for (a, c) in row.iter().zip(xv) {
                acc += *a * *c;
            }
            *o += acc;
        }
        let mut parents = vec![w, x];
        parents.extend(b);
        Ok(self.push(Op::Affine { w, x, b }, out, vec![m], &parents))
    }

    pub fn matvec(&mut self, w: Var, x: Var) -> Result<Var, NeuralError> {
        self.affine(w, x, None)
    }

    fn binary(&mut self, a: Var, b: Var, op: &'static str, f: impl Fn(T, T) -> T) -> Result<Vec<T>, NeuralError> {
        let n = self.same_len(a, b, op)?;
        let (av, bv) = (self.value(a), self.value(b));
        Ok((0..n).map(|i| f(av[i], bv[i])).collect())
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, NeuralError> {
        let out = self.binary(a, b, "add", |x, y| x + y)?;
        let n = out.len();
        Ok(self.push(Op::Add(a, b), out, vec![n], &[a, b]))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var, NeuralError> {
        let out = self.binary(a, b, "sub", |x, y| x - y)?;
        let n = out.len();
        Ok(self.push(Op::Sub(a, b), out, vec![n], &[a, b]))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, NeuralError> {
        let out = self.binary(a, b, "mul", |x, y| x * y)?;
        let n = out.len();
        Ok(self.push(Op::Mul(a, b), out, vec![n], &[a, b]))
    }

    pub fn scale(&mut self, a: Var, s: T) -> Var {
        let out: Vec<T> = self.value(a).iter().map(|x| *x * s).collect();
        let shape = self.nodes[a.0].shape.clone();
        self.push(Op::Scale(a, s), out, shape, &[a])
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let out: Vec<T> = self
            .value(a)
            .iter()
            .map(|x| T::one() / (T::one() + (-*x).exp()))
            .collect();
        let shape = self.nodes[a.0].shape.clone();
        self.push(Op::Sigmoid(a), out, shape, &[a])
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let out: Vec<T> = self.value(a).iter().map(|x| x.tanh()).collect();
        let shape = self.nodes[a.0].shape.clone();
        self.push(Op::Tanh(a), out, shape, &[a])
    }

    pub fn concat(&mut self, parts: &[Var]) -> Result<Var, NeuralError> {
        let mut out = Vec::new();
        for p in parts {
            self.vector_len(*p, "concat")?;
            out.extend_from_slice(self.value(*p));
        }
        let n = out.len();
        Ok(self.push(Op::Concat(parts.to_vec()), out, vec![n], parts))
    }

    pub fn slice(&mut self, x: Var, start: usize, len: usize) -> Result<Var, NeuralError> {
        let n = self.vector_len(x, "slice")?;
        if start + len > n {
            return Err(shape_err("slice", format!("{}..{} of {}", start, start + len, n)));
        }
        let out = self.value(x)[start..start + len].to_vec();
        Ok(self.push(Op::Slice { x, start }, out, vec![len], &[x]))
    }

    /// Row `row` of a 2-D table (embedding lookup).
    pub fn row(&mut self, table: Var, row: usize) -> Result<Var, NeuralError> {
        let ts = self.nodes[table.0].shape.clone();
        if ts.len() != 2 {
            return Err(shape_err("row", format!("table must be 2-D, got {:?}", ts)));
        }
        if row >= ts[0] {
            return Err(NeuralError::OutOfRange {
                what: "table rows",
                index: row,
                size: ts[0],
            });
        }
        let d = ts[1];
        let out = self.value(table)[row * d..(row + 1) * d].to_vec();
        Ok(self.push(Op::Row { table, row }, out, vec![d], &[table]))
    }

    pub fn dot(&mut self, a: Var, b: Var) -> Result<Var, NeuralError> {
        let n = self.same_len(a, b, "dot")?;
        let (av, bv) = (self.value(a), self.value(b));
        let mut acc = T::zero();
        for i in 0..n {
            acc += av[i] * bv[i];
        }
        Ok(self.push(Op::Dot(a, b), vec![acc], vec![1], &[a, b]))
    }

    /// Collects scalar nodes into one vector.
    pub fn stack(&mut self, scalars: &[Var]) -> Result<Var, NeuralError> {
        let mut out = Vec::with_capacity(scalars.len());
        for s in scalars {
            if self.size(*s) != 1 {
                return Err(shape_err("stack", format!("non-scalar of shape {:?}", self.shape(*s))));
            }
            out.push(self.value(*s)[0]);
        }
        let n = out.len();
        Ok(self.push(Op::Stack(scalars.to_vec()), out, vec![n], scalars))
    }

    pub fn softmax(&mut self, a: Var) -> Result<Var, NeuralError> {
        let n = self.vector_len(a, "softmax")?;
        if n == 0 {
            return Err(shape_err("softmax", "empty vector".into()));
        }
        let out = softmax(self.value(a));
        Ok(self.push(Op::Softmax(a), out, vec![n], &[a]))
    }

    /// `Σ weights[i] · items[i]`.
    pub fn weighted_sum(&mut self, weights: Var, items: &[Var]) -> Result<Var, NeuralError> {
        let k = self.vector_len(weights, "weighted_sum")?;
        if k != items.len() || items.is_empty() {
            return Err(shape_err("weighted_sum", format!("{} weights for {} items", k, items.len())));
        }
        let d = self.vector_len(items[0], "weighted_sum")?;
        let mut out = vec![T::zero(); d];
        for (i, item) in items.iter().enumerate() {
            if self.vector_len(*item, "weighted_sum")? != d {
                return Err(shape_err("weighted_sum", "items differ in length".into()));
            }
            let w = self.value(weights)[i];
            for (o, x) in out.iter_mut().zip(self.value(*item)) {
                *o += w * *x;
            }
        }
        let mut parents = vec![weights];
        parents.extend_from_slice(items);
        Ok(self.push(
            Op::WeightedSum {
                weights,
                items: items.to_vec(),
            },
            out,
            vec![d],
            &parents,
        ))
    }

    /// `-log softmax(logits)[target]` as a scalar node.
    pub fn cross_entropy(&mut self, logits: Var, target: usize) -> Result<Var, NeuralError> {
        let n = self.vector_len(logits, "cross_entropy")?;
        if target >= n {
            return Err(NeuralError::OutOfRange {
                what: "logits",
                index: target,
                size: n,
            });
        }
        let lv = self.value(logits);
        let loss = log_sum_exp(lv) - lv[target];
        Ok(self.push(Op::CrossEntropy { logits, target }, vec![loss], vec![1], &[logits]))
    }

    /// Elementwise sum of equally shaped nodes.
    pub fn sum(&mut self, parts: &[Var]) -> Result<Var, NeuralError> {
        let first = *parts
            .first()
            .ok_or_else(|| shape_err("sum", "nothing to sum".into()))?;
        let shape = self.nodes[first.0].shape.clone();
        let mut out = vec![T::zero(); self.size(first)];
        for p in parts {
            if self.nodes[p.0].shape != shape {
                return Err(shape_err("sum", format!("{:?} vs {:?}", self.shape(*p), shape)));
            }
            for (o, x) in out.iter_mut().zip(self.value(*p)) {
                *o += *x;
            }
        }
        Ok(self.push(Op::Sum(parts.to_vec()), out, shape, parts))
    }

    /// Back-propagates from the scalar `loss` and returns parameter gradients.
    pub fn backward(&self, loss: Var) -> Result<Gradients<T>, NeuralError> {
        if self.size(loss) != 1 {
            return Err(shape_err("backward", format!("loss has shape {:?}", self.shape(loss))));
        }
        let mut grads: Vec<Option<Vec<T>>> = (0..=loss.0).map(|_| None).collect();
        grads[loss.0] = Some(vec![T::one()]);
        let mut out = Vec::new();

        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            if !node.needs_grad {
                continue;
            }
            match &node.op {
                Op::Input => {}
                Op::Param(id) => out.push((*id, g)),
                Op::Affine { w, x, b } => {
                    let n = self.nodes[w.0].shape[1];
                    if self.nodes[w.0].needs_grad {
                        let xv = self.value(*x);
                        let dw = self.slot(&mut grads, *w);
                        for (r, gi) in g.iter().enumerate() {
                            if gi.is_zero() {
                                continue;
                            }
                            let row = &mut dw[r * n..(r + 1) * n];
                            for (d, xj) in row.iter_mut().zip(xv) {
                                *d += *gi * *xj;
                            }
                        }
                    }
                    if self.nodes[x.0].needs_grad {
                        let wv = self.value(*w);
                        let dx = self.slot(&mut grads, *x);
                        for (r, gi) in g.iter().enumerate() {
                            if gi.is_zero() {
                                continue;
                            }
                            let row = &wv[r * n..(r + 1) * n];
                            for (d, wj) in dx.iter_mut().zip(row) {
                                *d += *gi * *wj;
                            }
                        }
                    }
                    if let Some(b) = b {
                        self.add_into(&mut grads, *b, &g);
                    }
                }
                Op::Add(a, b) => {
                    self.add_into(&mut grads, *a, &g);
                    self.add_into(&mut grads, *b, &g);
                }
                Op::Sub(a, b) => {
                    self.add_into(&mut grads, *a, &g);
                    if self.nodes[b.0].needs_grad {
                        let db = self.slot(&mut grads, *b);
                        for (d, gi) in db.iter_mut().zip(&g) {
                            *d = *d - *gi;
                        }
                    }
                }
                Op::Mul(a, b) => {
                    let (av, bv) = (self.value(*a), self.value(*b));
                    if self.nodes[a.0].needs_grad {
                        let da = self.slot(&mut grads, *a);
                        for k in 0..g.len() {
                            da[k] += g[k] * bv[k];
                        }
                    }
                    if self.nodes[b.0].needs_grad {
                        let db = self.slot(&mut grads, *b);
                        for k in 0..g.len() {
                            db[k] += g[k] * av[k];
                        }
                    }
                }
                Op::Scale(a, s) => {
                    if self.nodes[a.0].needs_grad {
                        let da = self.slot(&mut grads, *a);
                        for (d, gi) in da.iter_mut().zip(&g) {
                            *d += *gi * *s;
                        }
                    }
                }
                Op::Sigmoid(a) => {
                    let y = &node.value;
                    if self.nodes[a.0].needs_grad {
                        let da = self.slot(&mut grads, *a);
                        for k in 0..g.len() {
                            da[k] += g[k] * y[k] * (T::one() - y[k]);
                        }
                    }
                }
                Op::Tanh(a) => {
                    let y = &node.value;
                    if self.nodes[a.0].needs_grad {
                        let da = self.slot(&mut grads, *a);
                        for k in 0..g.len() {
                            da[k] += g[k] * (T::one() - y[k] * y[k]);
                        }
                    }
                }
                Op::Concat(parts) => {
                    let mut offset = 0;
                    for p in parts {
                        let n = self.size(*p);
                        self.add_into(&mut grads, *p, &g[offset..offset + n]);
                        offset += n;
                    }
                }
                Op::Slice { x, start } => {
                    if self.nodes[x.0].needs_grad {
                        let dx = self.slot(&mut grads, *x);
                        for (d, gi) in dx[*start..*start + g.len()].iter_mut().zip(&g) {
                            *d += *gi;
                        }
                    }
                }
                Op::Row { table, row } => {
                    if self.nodes[table.0].needs_grad {
                        let d = g.len();
                        let dt = self.slot(&mut grads, *table);
                        for (t, gi) in dt[row * d..(row + 1) * d].iter_mut().zip(&g) {
                            *t += *gi;
                        }
                    }
                }
                Op::Dot(a, b) => {
                    let g0 = g[0];
                    let (av, bv) = (self.value(*a), self.value(*b));
                    if self.nodes[a.0].needs_grad {
                        let da = self.slot(&mut grads, *a);
                        for k in 0..bv.len() {
                            da[k] += g0 * bv[k];
                        }
                    }
                    if self.nodes[b.0].needs_grad {
                        let db = self.slot(&mut grads, *b);
                        for k in 0..av.len() {
                            db[k] += g0 * av[k];
                        }
                    }
                }
                Op::Stack(scalars) => {
                    for (s, gi) in scalars.iter().zip(&g) {
                        self.add_into(&mut grads, *s, std::slice::from_ref(gi));
                    }
                }
                Op::Softmax(a) => {
                    let y = &node.value;
                    let s: T = y.iter().zip(&g).map(|(p, q)| *p * *q).sum();
                    if self.nodes[a.0].needs_grad {
                        let da = self.slot(&mut grads, *a);
                        for k in 0..y.len() {
                            da[k] += y[k] * (g[k] - s);
                        }
                    }
                }
                Op::WeightedSum { weights, items } => {
                    let wv = self.value(*weights);
                    if self.nodes[weights.0].needs_grad {
                        let dots: Vec<T> = items
                            .iter()
                            .map(|it| self.value(*it).iter().zip(&g).map(|(a, b)| *a * *b).sum())
                            .collect();
                        self.add_into(&mut grads, *weights, &dots);
                    }
                    for (k, it) in items.iter().enumerate() {
                        if self.nodes[it.0].needs_grad {
                            let w = wv[k];
                            let di = self.slot(&mut grads, *it);
                            for (d, gi) in di.iter_mut().zip(&g) {
                                *d += w * *gi;
                            }
                        }
                    }
                }
                Op::CrossEntropy { logits, target } => {
                    if self.nodes[logits.0].needs_grad {
                        let p = softmax(self.value(*logits));
                        let g0 = g[0];
                        let dl = self.slot(&mut grads, *logits);
                        for (k, pk) in p.iter().enumerate() {
                            dl[k] += g0 * *pk;
                        }
                        dl[*target] = dl[*target] - g0;
                    }
                }
                Op::Sum(parts) => {
                    for p in parts {
                        self.add_into(&mut grads, *p, &g);
                    }
                }
            }
        }

        out.sort_by_key(|(id, _)| *id);
        Ok(Gradients { entries: out })
    }

    fn slot<'g>(&self, grads: &'g mut [Option<Vec<T>>], v: Var) -> &'g mut Vec<T> {
        let n = self.size(v);
        grads[v.0].get_or_insert_with(|| vec![T::zero(); n])
    }

    fn add_into(&self, grads: &mut [Option<Vec<T>>], v: Var, g: &[T]) {
        if !self.nodes[v.0].needs_grad {
            return;
        }
        let slot = self.slot(grads, v);
        for (d, gi) in slot.iter_mut().zip(g) {
            *d += *gi;
        }
    }
}

pub(crate) fn log_sum_exp<T: Scalar>(xs: &[T]) -> T {
    let max = xs.iter().copied().fold(T::neg_infinity(), T::max);
    let s: T = xs.iter().map(|x| (*x - max).exp()).sum();
    max + s.ln()
}

pub(crate) fn softmax<T: Scalar>(xs: &[T]) -> Vec<T> {
    let max = xs.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = xs.iter().map(|x| (*x - max).exp()).collect();
    let s: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / s).collect()
}
