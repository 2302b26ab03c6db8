//! One random Remove, Repeat or Insert edit per call, chosen uniformly.

use rand::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NoiseOp {
    Remove,
    Repeat,
    Insert,
}

/// Applies one edit to `c`. Insert draws its token uniformly from `pool`
/// and places it at any of the `|c| + 1` gaps; with an empty pool only
/// Remove and Repeat are possible. Empty input is returned unchanged.
///
/// Random draws, in order: the operation, then the position, then (for
/// Insert) the pool index.
pub fn inject_noise<T: Clone, R: Rng + ?Sized>(c: &[T], rng: &mut R, pool: &[T]) -> (Vec<T>, Option<NoiseOp>) {
    if c.is_empty() {
        return (Vec::new(), None);
    }
    let n_ops = if pool.is_empty() { 2 } else { 3 };
    let op = match rng.gen_range(0..n_ops) {
        0 => NoiseOp::Remove,
        1 => NoiseOp::Repeat,
        _ => NoiseOp::Insert,
    };
    let mut out = c.to_vec();
    match op {
        NoiseOp::Remove => {
            out.remove(rng.gen_range(0..c.len()));
        }
        NoiseOp::Repeat => {
            let i = rng.gen_range(0..c.len());
            out.insert(i, c[i].clone());
        }
        NoiseOp::Insert => {
            let i = rng.gen_range(0..=c.len());
            let tok = pool[rng.gen_range(0..pool.len())].clone();
            out.insert(i, tok);
        }
    }
    (out, Some(op))
}
