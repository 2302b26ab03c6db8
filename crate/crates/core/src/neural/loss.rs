use super::{Graph, NeuralError, Scalar, Var};

/// Summed token cross entropy, skipping `pad_id` targets.
///
/// Returns the summed node and the number of counted positions, or `None`
/// when every target is padding.
pub fn sum_cross_entropy<T: Scalar>(
    g: &mut Graph<'_, T>,
    logits: &[Var],
    targets: &[u32],
    pad_id: u32,
) -> Result<Option<(Var, usize)>, NeuralError> {
    if logits.len() != targets.len() {
        return Err(NeuralError::Shape {
            op: "cross_entropy_loss",
            detail: format!("{} logits for {} targets", logits.len(), targets.len()),
        });
    }
    let mut terms = Vec::with_capacity(logits.len());
    for (l, t) in logits.iter().zip(targets) {
        if *t != pad_id {
            terms.push(g.cross_entropy(*l, *t as usize)?);
        }
    }
    if terms.is_empty() {
        return Ok(None);
    }
    let n = terms.len();
    Ok(Some((g.sum(&terms)?, n)))
}

/// Mean over non-pad positions of `-log softmax(logit)[target]`.
///
/// `exp` of the result is the per-token perplexity.
pub fn cross_entropy_loss<T: Scalar>(
    g: &mut Graph<'_, T>,
    logits: &[Var],
    targets: &[u32],
    pad_id: u32,
) -> Result<Var, NeuralError> {
    let (sum, n) = sum_cross_entropy(g, logits, targets, pad_id)?.ok_or(NeuralError::AllPadding)?;
    Ok(g.scale(sum, T::one() / T::of(n as f64)))
}
