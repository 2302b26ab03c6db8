//! Minimal dense numeric core: tensors, a reverse-mode tape, GRU cells,
//! additive attention, MLP bridges, token cross entropy and Adam.

mod adam;
mod attention;
pub mod gradcheck;
mod graph;
mod gru;
mod loss;
mod mlp;
mod params;
mod tensor;

pub use adam::{adam_update, AdamConfig};
pub use attention::{attend, attend_prepared, prepare_keys, AttentionKeys, AttentionParams, Attended};
pub use graph::{Graph, Var};
pub use gru::{encode_sequence, gru_step, EncodedSequence, GruParams, SequenceEncoder};
pub use loss::{cross_entropy_loss, sum_cross_entropy};
pub use mlp::{mlp_bridge, MlpParams};
pub use params::{Gradients, Param, ParamId, ParamSet, INIT_BOUND};
pub use tensor::{Scalar, Tensor};

#[derive(Debug, thiserror::Error)]
pub enum NeuralError {
    #[error("shape mismatch in {op}: {detail}")]
    Shape { op: &'static str, detail: String },
    #[error("index {index} out of range for {what} of size {size}")]
    OutOfRange {
        what: &'static str,
        index: usize,
        size: usize,
    },
    #[error("empty input sequence")]
    EmptySequence,
    #[error("duplicate parameter name `{0}`")]
    DuplicateParam(String),
    #[error("unknown parameter `{0}`")]
    UnknownParam(String),
    #[error("non-finite gradient in parameter `{0}`")]
    NonFiniteGradient(String),
    #[error("every target position is padding")]
    AllPadding,
}
