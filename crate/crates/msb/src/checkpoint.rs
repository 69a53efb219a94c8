//! Model checkpoints as JSON: a shape header, provenance and the flat tensor.

use std::path::Path;

use msb_core::model::{EdgeRepr, ModelParams};
use serde::{Deserialize, Serialize};

use crate::error::{MsbError, Result};
use crate::io::{read_json, write_json};

pub const CHECKPOINT_FORMAT: &str = "msb-checkpoint-v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub num_nodes: usize,
    pub dim: usize,
    pub repr: EdgeRepr,
    pub seed: u64,
    pub method: String,
    pub best_epoch: usize,
    pub params: ModelParams,
}

impl Checkpoint {
    pub fn new(params: ModelParams, seed: u64, method: &str, best_epoch: usize) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.to_owned(),
            num_nodes: params.num_nodes(),
            dim: params.dim(),
            repr: params.repr(),
            seed,
            method: method.to_owned(),
            best_epoch,
            params,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(self, path)
    }

    /// Loads and checks that the header matches the tensor.
    pub fn load(path: &Path) -> Result<Self> {
        let c: Checkpoint = read_json(path)?;
        if c.format != CHECKPOINT_FORMAT {
            return Err(MsbError::Data(format!("unknown checkpoint format `{}`", c.format)));
        }
        let p = &c.params;
        let expected = c.num_nodes * c.dim + c.repr.scorer_len(c.dim);
        if p.num_nodes() != c.num_nodes || p.dim() != c.dim || p.repr() != c.repr || p.len() != expected {
            return Err(MsbError::Data("checkpoint header does not match its parameters".into()));
        }
        if !p.is_finite() {
            return Err(MsbError::Data("checkpoint contains non-finite values".into()));
        }
        Ok(c)
    }
}
