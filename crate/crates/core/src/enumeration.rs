//! Ensemble enumeration.
//!
//! [`enumerate_pruned`] grows ensembles one model at a time, extending only
//! the frontier ensembles of the previous size. It stays tractable on large
//! pools but can miss frontier ensembles whose smaller sub-ensembles were
//! dominated. [`brute_force_enumerate`] scans every subset and is used as the
//! exact reference on small pools.

use std::collections::HashSet;

use serde::Serialize;

use crate::data::LossMatrix;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::oracle::{oracle_loss_value, MinLossVector};
use crate::pareto::{
    merge_frontiers_with, pareto_indices, Dominance, EnsembleKey, Frontier, FrontierPoint,
};

/// Largest pool [`brute_force_enumerate`] accepts.
pub const BRUTE_FORCE_LIMIT: usize = 20;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EnumerationOptions {
    pub dominance: Dominance,
    pub exec: Exec,
}

/// Frontier of all explored ensembles of one size.
#[derive(Clone, Debug, PartialEq)]
pub struct Generation {
    pub k: usize,
    pub frontier: Frontier,
    /// Distinct candidates evaluated at this size.
    pub explored_count: usize,
}

/// One JSON line of per-generation statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GenerationStats {
    pub k: usize,
    pub candidates: usize,
    pub pareto: usize,
}

impl Generation {
    pub fn stats(&self) -> GenerationStats {
        GenerationStats {
            k: self.k,
            candidates: self.explored_count,
            pareto: self.frontier.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrunedEnumeration {
    pub generations: Vec<Generation>,
    /// Frontier over every generation's frontier.
    pub merged: Frontier,
    dominance: Dominance,
}

impl PrunedEnumeration {
    /// Merged frontier restricted to ensembles of at least `min_k` members.
    pub fn merged_from(&self, min_k: usize) -> Frontier {
        self.generations
            .iter()
            .filter(|g| g.k >= min_k)
            .fold(Frontier::empty(), |acc, g| {
                merge_frontiers_with(&acc, &g.frontier, self.dominance)
            })
    }

    pub fn total_explored(&self) -> usize {
        self.generations.iter().map(|g| g.explored_count).sum()
    }
}

pub fn enumerate_pruned(matrix: &LossMatrix, k_max: usize) -> Result<PrunedEnumeration> {
    enumerate_pruned_with(matrix, k_max, EnumerationOptions::default())
}

/// Generation 1 is the frontier over all single models. Generation k is the
/// frontier over the distinct ensembles obtained by adding one model to a
/// frontier ensemble of generation k - 1.
pub fn enumerate_pruned_with(
    matrix: &LossMatrix,
    k_max: usize,
    opts: EnumerationOptions,
) -> Result<PrunedEnumeration> {
    let n = matrix.n_models();
    if k_max < 1 || k_max > n {
        return Err(Error::InvalidKMax { k_max, pool: n });
    }
    let mut by_rank: Vec<usize> = (0..n).collect();
    by_rank.sort_by_key(|&m| matrix.canonical_rank(m));

    let singletons: Vec<MinLossVector> = by_rank
        .iter()
        .map(|&m| MinLossVector::from_indices(matrix, &[m]))
        .collect::<Result<_>>()?;
    let points: Vec<FrontierPoint> = opts.exec.map(&singletons, |v| evaluate(matrix, v));
    let keep = pareto_indices(&points, opts.dominance, opts.exec)?;
    let mut parents: Vec<MinLossVector> = keep.iter().map(|&i| singletons[i].clone()).collect();
    let mut generations = vec![Generation {
        k: 1,
        frontier: frontier_from(&points, &keep),
        explored_count: points.len(),
    }];

    for k in 2..=k_max {
        // Children in parent-then-model order, first occurrence wins.
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut children: Vec<(usize, usize)> = Vec::new();
        for (p, parent) in parents.iter().enumerate() {
            for &m in &by_rank {
                if parent.contains(m) {
                    continue;
                }
                let mut ranks: Vec<usize> = parent
                    .members()
                    .iter()
                    .map(|&x| matrix.canonical_rank(x))
                    .collect();
                let pos = ranks.partition_point(|&r| r < matrix.canonical_rank(m));
                ranks.insert(pos, matrix.canonical_rank(m));
                if seen.insert(ranks) {
                    children.push((p, m));
                }
            }
        }
        let points: Vec<FrontierPoint> = opts.exec.map(&children, |&(p, m)| {
            let child = parents[p]
                .extend_index(matrix, m)
                .expect("child model is not a member");
            evaluate(matrix, &child)
        });
        let keep = pareto_indices(&points, opts.dominance, opts.exec)?;
        let next: Vec<MinLossVector> = keep
            .iter()
            .map(|&i| {
                let (p, m) = children[i];
                parents[p].extend_index(matrix, m)
            })
            .collect::<Result<_>>()?;
        generations.push(Generation {
            k,
            frontier: frontier_from(&points, &keep),
            explored_count: points.len(),
        });
        parents = next;
    }

    let merged = generations.iter().fold(Frontier::empty(), |acc, g| {
        merge_frontiers_with(&acc, &g.frontier, opts.dominance)
    });
    Ok(PrunedEnumeration {
        generations,
        merged,
        dominance: opts.dominance,
    })
}

pub fn brute_force_enumerate(matrix: &LossMatrix, k_max: usize) -> Result<Frontier> {
    brute_force_enumerate_with(matrix, k_max, EnumerationOptions::default())
}

/// Exact frontier over every non-empty subset of at most `k_max` models.
pub fn brute_force_enumerate_with(
    matrix: &LossMatrix,
    k_max: usize,
    opts: EnumerationOptions,
) -> Result<Frontier> {
    let n = matrix.n_models();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::PoolTooLarge {
            pool: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    if k_max < 1 || k_max > n {
        return Err(Error::InvalidKMax { k_max, pool: n });
    }
    // bit i of a mask selects the model of canonical rank i
    let mut by_rank: Vec<usize> = (0..n).collect();
    by_rank.sort_by_key(|&m| matrix.canonical_rank(m));

    const CHUNK: u32 = 1 << 12;
    let total: u32 = 1 << n;
    let chunks = total.div_ceil(CHUNK) as usize;
    // Chunk-local frontiers merge to the global frontier: anything removed
    // locally stays dominated globally.
    let locals: Vec<Vec<FrontierPoint>> = opts.exec.map_range(chunks, |c| {
        let lo = (c as u32 * CHUNK).max(1);
        let hi = ((c as u32 + 1) * CHUNK).min(total);
        let points: Vec<FrontierPoint> = (lo..hi)
            .filter(|mask| mask.count_ones() as usize <= k_max)
            .map(|mask| {
                let members: Vec<usize> = (0..n)
                    .filter(|&i| mask >> i & 1 == 1)
                    .map(|i| by_rank[i])
                    .collect();
                let v = MinLossVector::from_indices(matrix, &members).expect("non-empty subset");
                evaluate(matrix, &v)
            })
            .collect();
        if points.is_empty() {
            return points;
        }
        let keep = pareto_indices(&points, opts.dominance, Exec::Sequential).expect("valid points");
        keep.into_iter().map(|i| points[i].clone()).collect()
    });
    let all: Vec<FrontierPoint> = locals.into_iter().flatten().collect();
    let keep = pareto_indices(&all, opts.dominance, opts.exec)?;
    Ok(frontier_from(&all, &keep))
}

fn evaluate(matrix: &LossMatrix, v: &MinLossVector) -> FrontierPoint {
    FrontierPoint::new(
        matrix.total_params(v.members()),
        oracle_loss_value(matrix, v),
        EnsembleKey::from_sorted(v.member_ids(matrix)),
    )
}

fn frontier_from(points: &[FrontierPoint], keep: &[usize]) -> Frontier {
    Frontier::from_canonical(keep.iter().map(|&i| points[i].clone()).collect())
}
