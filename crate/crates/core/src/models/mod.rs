//! The hierarchical encoder-decoder and its two content-word extensions,
//! assembled from the neural core.

mod config;
mod model;

pub use config::{Architecture, ModelConfig, DEFAULT_DA_WEIGHT, MAX_RESPONSE_LEN};
pub use model::{Conditioning, DecoderKind, DecoderParams, EncodedDialog, ForwardResult, LossTerm, Model, TeacherForced};

#[cfg(test)]
mod tests;

use crate::corpus::TokenId;
use crate::neural::NeuralError;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error("context must contain at least one sentence")]
    EmptyContext,
    #[error("sentence {index} of the context is empty")]
    EmptySentence { index: usize },
    #[error("response has {len} tokens, limit is {max}")]
    ResponseTooLong { len: usize, max: usize },
    #[error("token id {id} outside vocabulary of {vocab}")]
    TokenOutOfRange { id: TokenId, vocab: usize },
    #[error("dialog-act head is enabled but the sample has no act label")]
    MissingDialogAct,
    #[error("{0}")]
    InvalidConfig(String),
}
