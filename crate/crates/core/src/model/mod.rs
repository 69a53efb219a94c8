//! Reference embedding model: a free node-embedding table `Z` plus a linear
//! sign scorer `ψ` over an edge representation built from `z_u` and `z_v`.

mod linalg;
mod loss;
mod params;
mod spectral;

pub use loss::{
    score_edge, sign_loss, task_loss, LossValue, SignBatch, SignedProximity, SparseGradient, TaskLoss,
    LOG_CLAMP,
};
pub use params::{EdgeRepr, InitMode, ModelParams};
pub use spectral::{spectral_features, SpectralConfig, SpectralFeatures};
