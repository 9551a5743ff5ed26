//! Embedding matrices keyed by piece text, and vocabulary-to-vocabulary
//! transfer.
//!
//! Transfer copies the row of every piece the two vocabularies share,
//! bit for bit, and initializes the rest to zero or to seeded gaussian
//! noise. Rows are keyed by piece text rather than id, so ids may differ
//! freely between the two vocabularies.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::subword::{SubwordError, SubwordModel};

/// Dense rows, one per piece, all of the same length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingMatrix {
    pub dimension: usize,
    pub rows: BTreeMap<String, Vec<f32>>,
}

impl EmbeddingMatrix {
    pub fn new(dimension: usize) -> Self {
        EmbeddingMatrix { dimension, rows: BTreeMap::new() }
    }

    /// Checks that every row matches the declared dimension.
    pub fn validate(&self) -> Result<(), SubwordError> {
        for (piece, row) in &self.rows {
            if row.len() != self.dimension {
                return Err(SubwordError::DimensionMismatch {
                    piece: piece.clone(),
                    expected: self.dimension,
                    found: row.len(),
                });
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("matrix serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, SubwordError> {
        let matrix: EmbeddingMatrix =
            serde_json::from_str(text).map_err(|e| SubwordError::MalformedFile(e.to_string()))?;
        matrix.validate()?;
        Ok(matrix)
    }
}

/// How rows for pieces absent from the source vocabulary are filled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitPolicy {
    Zero,
    Gaussian { sigma: f64, seed: u64 },
}

impl InitPolicy {
    pub const DEFAULT_SIGMA: f64 = 0.02;
}

/// Builds a matrix for `new_model` from one trained against `old_model`.
///
/// Shared pieces keep their row unchanged. New pieces are initialized per
/// `policy`; gaussian draws come from one seeded stream consumed in new-
/// vocabulary id order, so the result is a pure function of its inputs.
pub fn transfer_embeddings(
    old_model: &SubwordModel,
    old_matrix: &EmbeddingMatrix,
    new_model: &SubwordModel,
    policy: InitPolicy,
) -> Result<EmbeddingMatrix, SubwordError> {
    old_matrix.validate()?;
    for (_, piece) in old_model.pieces() {
        if !old_matrix.rows.contains_key(piece) {
            return Err(SubwordError::MissingRow(piece.to_string()));
        }
    }
    let mut sampler = match policy {
        InitPolicy::Zero => None,
        InitPolicy::Gaussian { sigma, seed } => {
            let normal = Normal::new(0.0f32, sigma as f32)
                .map_err(|e| SubwordError::InvalidInit(e.to_string()))?;
            Some((ChaCha8Rng::seed_from_u64(seed), normal))
        }
    };
    let dimension = old_matrix.dimension;
    let mut out = EmbeddingMatrix::new(dimension);
    for (_, piece) in new_model.pieces() {
        let row = if old_model.piece_id(piece).is_some() {
            old_matrix.rows[piece].clone()
        } else {
            match &mut sampler {
                None => vec![0.0; dimension],
                Some((rng, normal)) => (0..dimension).map(|_| normal.sample(rng)).collect(),
            }
        };
        out.rows.insert(piece.to_string(), row);
    }
    Ok(out)
}
