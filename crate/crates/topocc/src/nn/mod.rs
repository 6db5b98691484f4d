//! Tensor diagrams as executable DAGs: convolutional and attention
//! layers, higher-order message passing, reverse-mode gradients, and
//! gradient-descent training.

pub mod diagram;
pub mod homp;
pub mod layers;
pub mod tape;
pub mod train;

use thiserror::Error;

use crate::neighborhoods::NbrError;
use crate::nn::tape::TapeError;

#[derive(Debug, Error, PartialEq)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("diagram contains a cycle")]
    CycleDetected,
    #[error("unknown selector `{0}`")]
    UnknownSelector(String),
    #[error("missing input cochain for source node `{0}`")]
    MissingInput(String),
    #[error("attention row {0} has a non-finite or non-positive normalizer")]
    DegenerateRow(usize),
    #[error("tape already swept; run the forward pass again")]
    StaleTape,
    #[error("diagram spec parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Neighborhood(#[from] NbrError),
}

impl From<TapeError> for NnError {
    fn from(e: TapeError) -> Self {
        match e {
            TapeError::StaleTape => NnError::StaleTape,
            TapeError::SeedShape(id) => {
                NnError::ShapeMismatch(format!("gradient seed shape at node {id}"))
            }
        }
    }
}

pub use diagram::{
    classify_diagram, compile_diagram, CompiledDiagram, DiagramClass, DiagramSpec, EdgeKind,
    ForwardRun, LayerLabel, Mode, ParameterStore,
};
pub use homp::{
    attention_homp_step, homp_step, HompAlpha, HompAttention, HompBeta, HompConfig,
    InterAggregation,
};
pub use layers::{
    attention_cross_rank, attention_matrices_cross_rank, attention_matrix_same_rank,
    attention_same_rank, conv_merge, conv_push_forward, EdgeChannel,
};
pub use train::{train, Dataset, EpochStats, Loss, TrainConfig};
