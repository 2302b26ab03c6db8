use std::collections::HashMap;
use std::fs;
use std::path::Path;

use super::MetricsError;
use crate::corpus::Vocabulary;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmbeddingMode {
    Average,
    Extrema,
    Greedy,
}

#[derive(Clone, Debug, Default)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            vectors: HashMap::new(),
        }
    }

    /// Panics if `vector` has the wrong dimension.
    pub fn insert(&mut self, token: impl Into<String>, vector: Vec<f64>) {
        assert_eq!(vector.len(), self.dim, "embedding dimension");
        self.vectors.insert(token.into(), vector);
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Text format: a token followed by space-separated floats, one per
    /// line. Tokens rejected by `keep` are dropped. Lines with unparsable
    /// floats are skipped; a dimension other than the first line's is fatal.
    pub fn parse(text: &str, keep: impl Fn(&str) -> bool) -> Result<Self, MetricsError> {
        let mut table: Option<Self> = None;
        for (i, line) in text.lines().enumerate() {
            let mut fields = line.split_whitespace();
            let Some(token) = fields.next() else { continue };
            let values: Result<Vec<f64>, _> = fields.map(str::parse).collect();
            let Ok(values) = values else {
                log::warn!("embedding line {}: malformed float, skipped", i + 1);
                continue;
            };
            if values.is_empty() {
                log::warn!("embedding line {}: no values, skipped", i + 1);
                continue;
            }
            let t = table.get_or_insert_with(|| Self::new(values.len()));
            if values.len() != t.dim {
                return Err(MetricsError::DimensionMismatch {
                    line: i + 1,
                    expected: t.dim,
                    found: values.len(),
                });
            }
            if keep(token) {
                t.vectors.insert(token.to_string(), values);
            }
        }
        table.ok_or(MetricsError::NoVectors)
    }
}

/// Reads a pretrained table, keeping only tokens of `vocab` when given.
pub fn load_embeddings(path: &Path, vocab: Option<&Vocabulary>) -> Result<EmbeddingTable, MetricsError> {
    let text = fs::read_to_string(path).map_err(|e| MetricsError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    EmbeddingTable::parse(&text, |t| vocab.is_none_or(|v| v.contains(t)))
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

fn average(vs: &[&[f64]], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for v in vs {
        for (o, x) in out.iter_mut().zip(*v) {
            *o += x;
        }
    }
    out.iter_mut().for_each(|o| *o /= vs.len() as f64);
    out
}

/// Per dimension, the value of largest magnitude with its sign. Ties keep
/// the earlier token.
fn extrema(vs: &[&[f64]], dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|d| vs.iter().map(|v| v[d]).fold(0.0, |m: f64, x| if x.abs() > m.abs() { x } else { m }))
        .collect()
}

fn greedy_direction(from: &[&[f64]], to: &[&[f64]]) -> f64 {
    from.iter()
        .map(|a| to.iter().map(|b| cosine(a, b)).fold(f64::NEG_INFINITY, f64::max))
        .sum::<f64>()
        / from.len() as f64
}

/// Embedding-based similarity in percent. Tokens missing from the table
/// are skipped; if either side has none left the score is 0.
pub fn embedding_similarity<S: AsRef<str>>(
    reference: &[S],
    hyp: &[S],
    table: &EmbeddingTable,
    mode: EmbeddingMode,
) -> f64 {
    let lookup = |s: &[S]| -> Vec<&[f64]> { s.iter().filter_map(|t| table.get(t.as_ref())).collect() };
    let (r, h) = (lookup(reference), lookup(hyp));
    if r.is_empty() || h.is_empty() {
        log::warn!("no embeddable token on one side, similarity set to 0");
        return 0.0;
    }
    let dim = table.dim();
    let score = match mode {
        EmbeddingMode::Average => cosine(&average(&r, dim), &average(&h, dim)),
        EmbeddingMode::Extrema => cosine(&extrema(&r, dim), &extrema(&h, dim)),
        EmbeddingMode::Greedy => (greedy_direction(&r, &h) + greedy_direction(&h, &r)) / 2.0,
    };
    score * 100.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> EmbeddingTable {
        let mut t = EmbeddingTable::new(2);
        t.insert("a", vec![1.0, 0.0]);
        t.insert("b", vec![0.0, 1.0]);
        t.insert("c", vec![-3.0, 0.5]);
        t
    }

    #[test]
    fn hand_values() {
        let t = toy();
        assert_eq!(embedding_similarity(&["a"], &["b"], &t, EmbeddingMode::Average), 0.0);
        let g = embedding_similarity(&["a", "b"], &["a"], &t, EmbeddingMode::Greedy);
        assert!((g - 75.0).abs() < 1e-12);
        for mode in [EmbeddingMode::Average, EmbeddingMode::Extrema, EmbeddingMode::Greedy] {
            let s = embedding_similarity(&["a", "c", "b"], &["a", "c", "b"], &t, mode);
            assert!((s - 100.0).abs() < 1e-9, "{mode:?}");
        }
    }

    #[test]
    fn extrema_keeps_sign_of_largest_magnitude() {
        let t = toy();
        let v: Vec<&[f64]> = ["a", "c"].iter().map(|w| t.get(w).unwrap()).collect();
        assert_eq!(extrema(&v, 2), vec![-3.0, 0.5]);
        let single = embedding_similarity(&["c"], &["a"], &t, EmbeddingMode::Extrema);
        let avg = embedding_similarity(&["c"], &["a"], &t, EmbeddingMode::Average);
        assert_eq!(single, avg);
    }

    #[test]
    fn unknown_tokens_are_skipped() {
        let t = toy();
        assert_eq!(embedding_similarity(&["zz"], &["a"], &t, EmbeddingMode::Greedy), 0.0);
        let with = embedding_similarity(&["a", "zz"], &["a"], &t, EmbeddingMode::Average);
        assert!((with - 100.0).abs() < 1e-12);
    }

    #[test]
    fn parsing() {
        let t = EmbeddingTable::parse("dog 0.1 0.2\ncat 0.3 x\nemu 1 2\n", |w| w != "emu").unwrap();
        assert_eq!(t.dim(), 2);
        assert_eq!(t.get("dog"), Some(&[0.1, 0.2][..]));
        assert_eq!(t.len(), 1);
        assert!(matches!(
            EmbeddingTable::parse("a 1 2\nb 1 2 3\n", |_| true),
            Err(MetricsError::DimensionMismatch { line: 2, expected: 2, found: 3 })
        ));
    }

    #[test]
    fn load_filters_by_vocabulary() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.txt");
        fs::write(&path, "dog 0.1 0.2\ncat 0.3 0.4\nowl 0.5 0.6\n").unwrap();
        let vocab = Vocabulary::with_words(["dog", "owl"]).unwrap();
        let t = load_embeddings(&path, Some(&vocab)).unwrap();
        assert_eq!(t.len(), 2);
        assert!(t.get("cat").is_none());
        assert_eq!(load_embeddings(&path, None).unwrap().len(), 3);
    }
}
