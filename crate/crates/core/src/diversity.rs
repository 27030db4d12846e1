//! Same-family vs. cross-family pair analysis.
//!
//! Every unordered model pair is evaluated exhaustively and routed to the
//! homogeneous (same family label) or heterogeneous side; each side then
//! gets its own frontier and power-law fit. No new math lives here.

use std::io::Write;
use std::path::Path;

use crate::data::LossMatrix;
use crate::enumeration::EnumerationOptions;
use crate::error::{Error, Result};
use crate::fitting::{fit_scaling_law, FitConfig, ScalingFit};
use crate::oracle::{oracle_loss_value, MinLossVector};
use crate::pareto::{pareto_front_with, EnsembleKey, Frontier, FrontierPoint};

pub const PAIR_REPORT_HEADER: [&str; 6] =
    ["side", "raw_pairs", "pareto_pairs", "L_inf", "A", "alpha"];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PairPartition {
    pub homogeneous: Vec<EnsembleKey>,
    pub heterogeneous: Vec<EnsembleKey>,
}

impl PairPartition {
    pub fn total(&self) -> usize {
        self.homogeneous.len() + self.heterogeneous.len()
    }
}

type PairLists = (Vec<(usize, usize)>, Vec<(usize, usize)>);

/// Pair index lists by canonical model order, split on exact family match.
fn pair_indices(matrix: &LossMatrix) -> Result<PairLists> {
    let n = matrix.n_models();
    if n < 2 {
        return Err(Error::InsufficientPool(n));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&m| matrix.canonical_rank(m));
    let models = matrix.models();
    let (mut same, mut cross) = (Vec::new(), Vec::new());
    for (x, &i) in order.iter().enumerate() {
        for &j in &order[x + 1..] {
            if models[i].family == models[j].family {
                same.push((i, j));
            } else {
                cross.push((i, j));
            }
        }
    }
    Ok((same, cross))
}

pub fn partition_pairs(matrix: &LossMatrix) -> Result<PairPartition> {
    let (same, cross) = pair_indices(matrix)?;
    let key = |&(i, j): &(usize, usize)| {
        EnsembleKey::new([
            matrix.models()[i].model_id.as_str(),
            matrix.models()[j].model_id.as_str(),
        ])
    };
    Ok(PairPartition {
        homogeneous: same.iter().map(key).collect(),
        heterogeneous: cross.iter().map(key).collect(),
    })
}

/// Frontier and fit for one side of the partition.
#[derive(Clone, Debug, PartialEq)]
pub struct PairSide {
    pub side: &'static str,
    /// Every evaluated pair, canonical pair order.
    pub points: Vec<FrontierPoint>,
    pub frontier: Frontier,
    pub fit: Result<ScalingFit, String>,
}

impl PairSide {
    pub fn raw_pairs(&self) -> usize {
        self.points.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairwiseReport {
    pub homogeneous: PairSide,
    pub heterogeneous: PairSide,
}

impl PairwiseReport {
    pub fn sides(&self) -> [&PairSide; 2] {
        [&self.homogeneous, &self.heterogeneous]
    }

    /// Report CSV: `side,raw_pairs,pareto_pairs,L_inf,A,alpha`; fit columns are
    /// empty when the side's fit was skipped.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let path = Path::new("<pairs report>");
        let mut w = csv::Writer::from_writer(out);
        w.write_record(PAIR_REPORT_HEADER)
            .map_err(|e| Error::csv(path, e))?;
        for s in self.sides() {
            let (l_inf, a, alpha) = match &s.fit {
                Ok(f) => (f.l_inf.to_string(), f.a.to_string(), f.alpha.to_string()),
                Err(_) => Default::default(),
            };
            w.write_record([
                s.side.to_string(),
                s.raw_pairs().to_string(),
                s.frontier.len().to_string(),
                l_inf,
                a,
                alpha,
            ])
            .map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

pub fn pairwise_frontiers_and_fits(
    matrix: &LossMatrix,
    config: &FitConfig,
) -> Result<PairwiseReport> {
    pairwise_frontiers_and_fits_with(matrix, config, EnumerationOptions::default())
}

/// Evaluates every pair, then builds a frontier and a fit per side. A side
/// with no pairs gets an empty frontier; a side with too few frontier points
/// keeps its frontier and records why the fit was skipped.
pub fn pairwise_frontiers_and_fits_with(
    matrix: &LossMatrix,
    config: &FitConfig,
    opts: EnumerationOptions,
) -> Result<PairwiseReport> {
    let (same, cross) = pair_indices(matrix)?;
    let side = |name: &'static str, pairs: &[(usize, usize)]| -> Result<PairSide> {
        let points: Vec<FrontierPoint> = opts.exec.map(pairs, |&(i, j)| {
            let v = MinLossVector::from_indices(matrix, &[i, j]).expect("valid pair");
            FrontierPoint::new(
                matrix.total_params(v.members()),
                oracle_loss_value(matrix, &v),
                EnsembleKey::from_sorted(v.member_ids(matrix)),
            )
        });
        if points.is_empty() {
            return Ok(PairSide {
                side: name,
                points,
                frontier: Frontier::empty(),
                fit: Err("no pairs".to_string()),
            });
        }
        let frontier = pareto_front_with(&points, opts.dominance, opts.exec)?;
        let fit = fit_scaling_law(frontier.points(), config).map_err(|e| e.to_string());
        Ok(PairSide {
            side: name,
            points,
            frontier,
            fit,
        })
    };
    Ok(PairwiseReport {
        homogeneous: side("homogeneous", &same)?,
        heterogeneous: side("heterogeneous", &cross)?,
    })
}
