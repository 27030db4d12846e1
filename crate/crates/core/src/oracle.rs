//! Oracle ensemble loss.
//!
//! For each text the oracle credits an ensemble with the lowest text-level
//! loss any member achieves under its own tokenizer. The expectation over
//! texts is a uniform mean, normalized by the pool-wide `n_bar`.

use serde::Serialize;

use crate::data::LossMatrix;
use crate::error::{Error, Result};

/// Per-text running minimum of text-level losses for an ensemble.
#[derive(Clone, Debug, PartialEq)]
pub struct MinLossVector {
    per_text_min: Vec<f64>,
    // model indices in canonical (model_id) order, never empty
    members: Vec<usize>,
}

impl MinLossVector {
    /// Builds the vector from model indices; repeats collapse.
    pub fn from_indices(matrix: &LossMatrix, members: &[usize]) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        if let Some(&bad) = members.iter().find(|&&m| m >= matrix.n_models()) {
            return Err(Error::UnknownModel(format!("index {bad}")));
        }
        let mut members = members.to_vec();
        matrix.canonicalize(&mut members);
        let mut per_text_min = matrix.loss_row(members[0]).to_vec();
        for &m in &members[1..] {
            min_into(&mut per_text_min, matrix.loss_row(m));
        }
        Ok(MinLossVector {
            per_text_min,
            members,
        })
    }

    /// Adds one model by index. O(texts).
    pub fn extend_index(&self, matrix: &LossMatrix, model: usize) -> Result<Self> {
        if model >= matrix.n_models() {
            return Err(Error::UnknownModel(format!("index {model}")));
        }
        let rank = matrix.canonical_rank(model);
        let pos = match self
            .members
            .binary_search_by_key(&rank, |&m| matrix.canonical_rank(m))
        {
            Ok(_) => {
                return Err(Error::DuplicateMember(
                    matrix.models()[model].model_id.clone(),
                ))
            }
            Err(pos) => pos,
        };
        let mut members = Vec::with_capacity(self.members.len() + 1);
        members.extend_from_slice(&self.members[..pos]);
        members.push(model);
        members.extend_from_slice(&self.members[pos..]);
        let mut per_text_min = self.per_text_min.clone();
        min_into(&mut per_text_min, matrix.loss_row(model));
        Ok(MinLossVector {
            per_text_min,
            members,
        })
    }

    pub fn per_text_min(&self) -> &[f64] {
        &self.per_text_min
    }

    /// Member indices in canonical order.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, model: usize) -> bool {
        self.members.contains(&model)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Member ids, sorted.
    pub fn member_ids(&self, matrix: &LossMatrix) -> Vec<String> {
        self.members
            .iter()
            .map(|&m| matrix.models()[m].model_id.clone())
            .collect()
    }
}

fn min_into(acc: &mut [f64], row: &[f64]) {
    for (a, &r) in acc.iter_mut().zip(row) {
        if r < *a {
            *a = r;
        }
    }
}

/// Uniform mean over texts divided by `n_bar`. Every loss in the crate goes
/// through this one expression so that equal inputs give equal bits.
pub fn normalized_mean(text_losses: &[f64], n_bar: f64) -> f64 {
    let sum: f64 = text_losses.iter().sum();
    sum / text_losses.len() as f64 / n_bar
}

/// Evaluated ensemble: members, aggregated budget, oracle loss.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleEval {
    /// Sorted model ids.
    pub member_ids: Vec<String>,
    pub total_params_billions: f64,
    /// Nats per token, normalized by `n_bar`.
    pub oracle_loss: f64,
}

/// Expected loss of a single model, normalized by `n_bar`.
pub fn single_model_loss(matrix: &LossMatrix, model_id: &str) -> Result<f64> {
    let m = matrix.model_index(model_id)?;
    Ok(normalized_mean(matrix.loss_row(m), matrix.n_bar()))
}

/// Per-text minimum over a set of model ids (set semantics: repeats collapse).
pub fn build_min_vector<S: AsRef<str>>(
    matrix: &LossMatrix,
    member_ids: &[S],
) -> Result<MinLossVector> {
    let members = member_ids
        .iter()
        .map(|id| matrix.model_index(id.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    MinLossVector::from_indices(matrix, &members)
}

/// Incremental form of [`build_min_vector`]; the result is identical to
/// building from the union directly.
pub fn extend_min_vector(
    base: &MinLossVector,
    matrix: &LossMatrix,
    new_model_id: &str,
) -> Result<MinLossVector> {
    let m = matrix.model_index(new_model_id)?;
    base.extend_index(matrix, m)
}

/// Oracle loss and aggregated parameter budget for an ensemble.
pub fn oracle_loss(matrix: &LossMatrix, vec: &MinLossVector) -> EnsembleEval {
    EnsembleEval {
        member_ids: vec.member_ids(matrix),
        total_params_billions: matrix.total_params(vec.members()),
        oracle_loss: oracle_loss_value(matrix, vec),
    }
}

/// Just the loss part of [`oracle_loss`], without materializing ids.
pub fn oracle_loss_value(matrix: &LossMatrix, vec: &MinLossVector) -> f64 {
    normalized_mean(vec.per_text_min(), matrix.n_bar())
}
