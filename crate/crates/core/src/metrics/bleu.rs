use std::collections::{HashMap, HashSet};
use std::hash::Hash;

use super::MetricsError;

fn counts<T: Eq + Hash>(tokens: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut m = HashMap::new();
    for w in tokens.windows(n) {
        *m.entry(w).or_insert(0) += 1;
    }
    m
}

/// Sentence BLEU of a single order: clipped n-gram precision times the
/// brevity penalty `min(1, exp(1 - |ref|/|hyp|))`, in percent. No smoothing
/// and no geometric mean across orders.
pub fn sentence_bleu<T: Eq + Hash>(reference: &[T], hyp: &[T], n: usize) -> Result<f64, MetricsError> {
    if !(1..=2).contains(&n) {
        return Err(MetricsError::UnsupportedOrder(n));
    }
    if reference.is_empty() {
        return Err(MetricsError::EmptyReference);
    }
    if hyp.len() < n {
        return Ok(0.0);
    }
    let r = counts(reference, n);
    let h = counts(hyp, n);
    let matched: usize = h.iter().map(|(g, &c)| c.min(r.get(g).copied().unwrap_or(0))).sum();
    let precision = matched as f64 / (hyp.len() + 1 - n) as f64;
    let bp = (1.0 - reference.len() as f64 / hyp.len() as f64).exp().min(1.0);
    Ok(precision * bp * 100.0)
}

/// Distinct n-gram types pooled over all hypotheses.
pub fn distinct_ngrams<T: Eq + Hash>(hyps: &[Vec<T>], n: usize) -> usize {
    if n == 0 {
        return 0;
    }
    hyps.iter().flat_map(|h| h.windows(n)).collect::<HashSet<_>>().len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<&str> {
        s.split(' ').collect()
    }

    const REF: &str = "do you have any skirt that will go with this sweater ?";
    const HYP1: &str = "he will leave tomorrow but he does not have any plan yet .";
    const HYP2: &str = "the skirts match well with these sweaters .";

    #[test]
    fn worked_example() {
        let (r, h1, h2) = (toks(REF), toks(HYP1), toks(HYP2));
        let round = |x: f64| (x * 100.0).round() / 100.0;
        assert_eq!(round(sentence_bleu(&r, &h1, 1).unwrap()), 23.08);
        assert_eq!(round(sentence_bleu(&r, &h1, 2).unwrap()), 8.33);
        // 1/8 * exp(1 - 12/8)
        let b1 = sentence_bleu(&r, &h2, 1).unwrap();
        assert!((b1 - 12.5 * (-0.5f64).exp()).abs() < 1e-12);
        assert_eq!(sentence_bleu(&r, &h2, 2).unwrap(), 0.0);
    }

    /// Content sequences of the same example: 2 of 3 unigrams match and
    /// BP = exp(1 - 4/3).
    #[test]
    fn content_sequence_bleu_without_smoothing() {
        let b = sentence_bleu(&["any", "skirt", "go", "sweater"], &["skirt", "match", "sweater"], 1).unwrap();
        assert!((b - 47.77).abs() < 0.005, "{b}");
    }

    #[test]
    fn identity_and_degenerate_inputs() {
        let r = toks(REF);
        assert_eq!(sentence_bleu(&r, &r, 1).unwrap(), 100.0);
        assert_eq!(sentence_bleu(&r, &r, 2).unwrap(), 100.0);
        assert_eq!(sentence_bleu(&r, &[], 1).unwrap(), 0.0);
        assert_eq!(sentence_bleu(&r, &["do"], 2).unwrap(), 0.0);
        assert!(matches!(sentence_bleu::<&str>(&[], &["a"], 1), Err(MetricsError::EmptyReference)));
        assert!(matches!(sentence_bleu(&r, &r, 3), Err(MetricsError::UnsupportedOrder(3))));
    }

    #[test]
    fn clipping() {
        // "the" appears once in the reference, so four copies count once.
        let b = sentence_bleu(&["the", "cat"], &["the", "the", "the", "the"], 1).unwrap();
        assert_eq!(b, 25.0);
    }

    #[test]
    fn distinct_counts() {
        let hyps = vec![toks("a b"), toks("b c")];
        assert_eq!(distinct_ngrams(&hyps, 1), 3);
        assert_eq!(distinct_ngrams(&hyps, 2), 2);
        assert_eq!(distinct_ngrams::<&str>(&[], 1), 0);
        let twice = vec![toks("a b"), toks("a b")];
        assert_eq!(distinct_ngrams(&twice, 2), distinct_ngrams(&twice[..1], 2));
    }
}
