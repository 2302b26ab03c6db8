use std::fmt;

use super::{content_coverage, distinct_ngrams, embedding_similarity, sentence_bleu, EmbeddingMode, EmbeddingTable, MetricsError};
use crate::lexicon::{extract_content_sequence, ExtractionMode, FunctionLexicon};

/// Corpus-level scores. Percentages are macro-averages over pairs; `None`
/// means no pair could be scored (or no embedding table was given).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricReport {
    pub pairs: usize,
    pub b1: Option<f64>,
    pub b2: Option<f64>,
    pub a_emb: Option<f64>,
    pub e_emb: Option<f64>,
    pub g_emb: Option<f64>,
    pub dist1: usize,
    pub dist2: usize,
    pub c_b1: Option<f64>,
    pub c_b2: Option<f64>,
    pub c_a_emb: Option<f64>,
    pub c_e_emb: Option<f64>,
    pub c_g_emb: Option<f64>,
    pub c_dist1: usize,
    pub c_dist2: usize,
    pub c_coverage: Option<f64>,
    /// Pairs whose reference has an empty content sequence; they are left
    /// out of every c-metric average.
    pub content_skipped: usize,
    /// Pairs with an empty reference sentence, left out of sentence averages.
    pub sentence_skipped: usize,
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |x| format!("{x:.2}"))
}

impl fmt::Display for MetricReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: [(&str, String); 18] = [
            ("pairs", self.pairs.to_string()),
            ("B1", pct(self.b1)),
            ("B2", pct(self.b2)),
            ("A-emb", pct(self.a_emb)),
            ("E-emb", pct(self.e_emb)),
            ("G-emb", pct(self.g_emb)),
            ("Dist-1", self.dist1.to_string()),
            ("Dist-2", self.dist2.to_string()),
            ("cB1", pct(self.c_b1)),
            ("cB2", pct(self.c_b2)),
            ("cA-emb", pct(self.c_a_emb)),
            ("cE-emb", pct(self.c_e_emb)),
            ("cG-emb", pct(self.c_g_emb)),
            ("cDist-1", self.c_dist1.to_string()),
            ("cDist-2", self.c_dist2.to_string()),
            ("cCoverage", pct(self.c_coverage)),
            ("content_skipped", self.content_skipped.to_string()),
            ("sentence_skipped", self.sentence_skipped.to_string()),
        ];
        for (k, v) in rows {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

#[derive(Default)]
struct Mean {
    sum: f64,
    n: usize,
}

impl Mean {
    fn add(&mut self, x: f64) {
        self.sum += x;
        self.n += 1;
    }

    fn get(&self) -> Option<f64> {
        (self.n > 0).then(|| self.sum / self.n as f64)
    }
}

#[derive(Default)]
struct Side {
    b1: Mean,
    b2: Mean,
    emb: [Mean; 3],
}

const MODES: [EmbeddingMode; 3] = [EmbeddingMode::Average, EmbeddingMode::Extrema, EmbeddingMode::Greedy];

impl Side {
    fn score(&mut self, r: &[String], h: &[String], table: Option<&EmbeddingTable>) -> Result<(), MetricsError> {
        self.b1.add(sentence_bleu(r, h, 1)?);
        self.b2.add(sentence_bleu(r, h, 2)?);
        if let Some(t) = table {
            for (m, mode) in self.emb.iter_mut().zip(MODES) {
                m.add(embedding_similarity(r, h, t, mode));
            }
        }
        Ok(())
    }
}

/// Scores tokenized hypotheses against references. Sentence metrics use the
/// tokens as given; c-metrics use evaluation-mode content sequences of both
/// sides. Pairs are reduced in input order.
pub fn evaluate_corpus<S: AsRef<str>>(
    refs: &[Vec<S>],
    hyps: &[Vec<S>],
    lex: &FunctionLexicon,
    table: Option<&EmbeddingTable>,
) -> Result<MetricReport, MetricsError> {
    if refs.len() != hyps.len() {
        return Err(MetricsError::LengthMismatch {
            refs: refs.len(),
            hyps: hyps.len(),
        });
    }
    if refs.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let owned = |s: &[S]| -> Vec<String> { s.iter().map(|t| t.as_ref().to_string()).collect() };
    let mut sent = Side::default();
    let mut cont = Side::default();
    let mut coverage = Mean::default();
    let mut report = MetricReport {
        pairs: refs.len(),
        ..MetricReport::default()
    };
    let mut hyp_tokens = Vec::with_capacity(hyps.len());
    let mut hyp_content = Vec::with_capacity(hyps.len());
    for (r, h) in refs.iter().zip(hyps) {
        let (r, h) = (owned(r), owned(h));
        let cr = extract_content_sequence(&r, lex, ExtractionMode::Evaluation).lemmas;
        let ch = extract_content_sequence(&h, lex, ExtractionMode::Evaluation).lemmas;
        if r.is_empty() {
            report.sentence_skipped += 1;
        } else {
            sent.score(&r, &h, table)?;
        }
        if cr.is_empty() {
            report.content_skipped += 1;
        } else {
            cont.score(&cr, &ch, table)?;
            coverage.add(content_coverage(&cr, &ch)?);
        }
        hyp_tokens.push(h);
        hyp_content.push(ch);
    }
    report.b1 = sent.b1.get();
    report.b2 = sent.b2.get();
    [report.a_emb, report.e_emb, report.g_emb] = [0, 1, 2].map(|i| sent.emb[i].get());
    report.dist1 = distinct_ngrams(&hyp_tokens, 1);
    report.dist2 = distinct_ngrams(&hyp_tokens, 2);
    report.c_b1 = cont.b1.get();
    report.c_b2 = cont.b2.get();
    [report.c_a_emb, report.c_e_emb, report.c_g_emb] = [0, 1, 2].map(|i| cont.emb[i].get());
    report.c_dist1 = distinct_ngrams(&hyp_content, 1);
    report.c_dist2 = distinct_ngrams(&hyp_content, 2);
    report.c_coverage = coverage.get();
    Ok(report)
}
