use rand::seq::SliceRandom;
use rand::Rng;

use super::{PipelineError, TrainingTriplet};
use crate::corpus::TokenId;
use crate::lexicon::inject_noise;
use crate::models::Model;
use crate::neural::{adam_update, AdamConfig, Graph, ParamSet};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub adam: AdamConfig,
    /// Perturb content sequences once per sample and epoch.
    pub noise: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 32,
            adam: AdamConfig::default(),
            noise: true,
        }
    }
}

/// Token-weighted mean losses over one epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochReport {
    pub epoch: usize,
    pub content_loss: Option<f64>,
    pub sentence_loss: f64,
    pub da_loss: Option<f64>,
    pub total_loss: f64,
    pub batches: usize,
    pub samples: usize,
}

impl EpochReport {
    /// `epoch<TAB>content<TAB>sentence<TAB>total`; `-` when there is no
    /// content decoder.
    pub fn log_line(&self) -> String {
        let content = self
            .content_loss
            .map_or_else(|| "-".to_string(), |c| format!("{c:.6}"));
        format!("{}\t{content}\t{:.6}\t{:.6}", self.epoch, self.sentence_loss, self.total_loss)
    }
}

#[derive(Default)]
struct Totals {
    content: f64,
    content_n: usize,
    sentence: f64,
    sentence_n: usize,
    da: f64,
    da_n: usize,
}

/// One pass over `triplets` in a seeded order. Each batch is one Adam step
/// on `content/N_c + sentence/N_y + λ·da/B`, where the `N` are the batch's
/// scored positions.
pub fn train_epoch<R: Rng + ?Sized>(
    model: &Model,
    params: &mut ParamSet<f32>,
    triplets: &[TrainingTriplet],
    config: &TrainConfig,
    insert_pool: &[TokenId],
    epoch: usize,
    rng: &mut R,
) -> Result<EpochReport, PipelineError> {
    if config.batch_size == 0 {
        return Err(PipelineError::Config("batch size must be positive".into()));
    }
    let has_content = model.architecture().has_content();
    let uses_da = model.config().da_head;
    let da_weight = model.config().da_weight;

    let mut order: Vec<usize> = (0..triplets.len()).collect();
    order.shuffle(rng);

    let mut totals = Totals::default();
    let mut batches = 0;
    for (b, chunk) in order.chunks(config.batch_size).enumerate() {
        let contents: Vec<Vec<TokenId>> = chunk
            .iter()
            .map(|&i| {
                let clean = &triplets[i].content;
                if has_content && config.noise {
                    inject_noise(clean, rng, insert_pool).0
                } else {
                    clean.clone()
                }
            })
            .collect();
        let n_content: usize = contents.iter().map(|c| c.len() + 1).sum();
        let n_sentence: usize = chunk.iter().map(|&i| triplets[i].response.len() + 1).sum();
        let n = chunk.len() as f32;

        for (&i, content) in chunk.iter().zip(&contents) {
            let t = &triplets[i];
            let grads = {
                let mut g = Graph::new(&*params);
                let r = model.forward(&mut g, &t.context, content, &t.response, t.act)?;
                let mut loss = g.scale(r.sentence.sum, 1.0 / n_sentence as f32);
                totals.sentence += f64::from(g.scalar(r.sentence.sum));
                totals.sentence_n += r.sentence.count;
                if let Some(c) = r.content {
                    let term = g.scale(c.sum, 1.0 / n_content as f32);
                    loss = g.add(loss, term)?;
                    totals.content += f64::from(g.scalar(c.sum));
                    totals.content_n += c.count;
                }
                if let Some(d) = r.da {
                    let term = g.scale(d, da_weight as f32 / n);
                    loss = g.add(loss, term)?;
                    totals.da += f64::from(g.scalar(d));
                    totals.da_n += 1;
                }
                if !g.scalar(loss).is_finite() {
                    return Err(PipelineError::NonFiniteLoss { epoch, batch: b });
                }
                g.backward(loss)?
            };
            params.accumulate(&grads);
        }
        adam_update(params, &config.adam)?;
        batches += 1;
    }

    let mean = |s: f64, n: usize| if n == 0 { 0.0 } else { s / n as f64 };
    let content_loss = has_content.then(|| mean(totals.content, totals.content_n));
    let sentence_loss = mean(totals.sentence, totals.sentence_n);
    let da_loss = uses_da.then(|| mean(totals.da, totals.da_n));
    let total_loss = sentence_loss + content_loss.unwrap_or(0.0) + da_weight * da_loss.unwrap_or(0.0);
    if !total_loss.is_finite() {
        return Err(PipelineError::NonFiniteLoss { epoch, batch: batches });
    }
    Ok(EpochReport {
        epoch,
        content_loss,
        sentence_loss,
        da_loss,
        total_loss,
        batches,
        samples: triplets.len(),
    })
}
