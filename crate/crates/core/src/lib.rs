//! Link sign prediction on signed directed graphs from sparse and noisy labels.
//!
//! The crate is `no_std` (with `alloc`) and holds every algorithm of the
//! pipeline:
//!
//! - [`graph`] and [`split`]: the signed digraph, the train/val/test split
//!   protocol and label-noise injection.
//! - [`community`]: unsigned projection, Louvain and modularity.
//! - [`balance`]: transitive triads, microscale/mesoscale social-balance
//!   labeling, triad census and the signed degree-preserving null model.
//! - [`model`]: the reference embedding model, sign/task losses with analytic
//!   gradients and spectral feature initialization.
//! - [`reweight`]: one-step meta-gradient weights for pseudo-labeled samples.
//! - [`train`]: the reweighted training loop, the supervised and
//!   pseudo-labeling baselines and the adaptive-moment optimizer.
//! - [`metrics`] and [`stats`]: accuracy, Macro-F1 and the paired t-test.
//!
//! IO, file formats and the command line live in the companion `msb` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod balance;
pub mod community;
mod error;
pub mod graph;
pub(crate) mod hash;
pub mod math;
pub mod metrics;
pub mod model;
pub mod optim;
pub mod reweight;
pub(crate) mod rng;
pub mod split;
pub mod stats;
pub mod synth;
pub mod train;

pub use error::{Error, Result};
pub use graph::{binarize_rating, Edge, EdgeLabel, GraphBuilder, NodeId, Sign, SignedDigraph, SignedEdge};
