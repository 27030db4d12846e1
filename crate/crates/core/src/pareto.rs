//! Two-objective (budget, loss) Pareto frontiers.
//!
//! Both objectives are minimized. Comparison is exact: no epsilon.
//!
//! Under [`Dominance::Weak`] a point `q` dominates `p` when it is no worse on
//! both axes and strictly better on at least one; exact duplicates collapse
//! to the point with the smallest ensemble key. The result is a strict
//! staircase. [`Dominance::Strict`] only removes points beaten on both axes
//! at once, which can leave equal-budget or equal-loss points side by side.

use std::cmp::Ordering;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;

pub const FRONTIER_HEADER: [&str; 4] = [
    "k",
    "total_params_billions",
    "oracle_loss_nats_per_token",
    "ensemble_key",
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dominance {
    #[default]
    Weak,
    /// Literal rule: removed only if another point is lower on both axes.
    Strict,
}

impl std::str::FromStr for Dominance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "weak" => Ok(Dominance::Weak),
            "strict" => Ok(Dominance::Strict),
            other => Err(format!(
                "unknown dominance rule `{other}` (expected weak|strict)"
            )),
        }
    }
}

/// Canonical sorted tuple of model ids.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EnsembleKey(Vec<String>);

impl EnsembleKey {
    pub fn new<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut ids: Vec<String> = ids.into_iter().map(Into::into).collect();
        ids.sort();
        ids.dedup();
        EnsembleKey(ids)
    }

    /// Wraps ids that are already sorted and unique.
    pub(crate) fn from_sorted(ids: Vec<String>) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        EnsembleKey(ids)
    }

    pub fn ids(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Parses the `+`-joined export form.
    pub fn parse(s: &str) -> Self {
        EnsembleKey::new(s.split('+').filter(|p| !p.is_empty()))
    }
}

impl fmt::Display for EnsembleKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join("+"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrontierPoint {
    pub total_params_billions: f64,
    /// Nats per token.
    pub loss: f64,
    pub ensemble_key: EnsembleKey,
}

impl FrontierPoint {
    pub fn new(total_params_billions: f64, loss: f64, ensemble_key: EnsembleKey) -> Self {
        FrontierPoint {
            total_params_billions,
            loss,
            ensemble_key,
        }
    }

    /// Ensemble size.
    pub fn k(&self) -> usize {
        self.ensemble_key.len()
    }

    fn validate(&self) -> Result<()> {
        if !(self.total_params_billions.is_finite() && self.total_params_billions > 0.0) {
            return Err(Error::InvalidPoint(format!(
                "{}: budget must be positive and finite, got {}",
                self.ensemble_key, self.total_params_billions
            )));
        }
        if !self.loss.is_finite() {
            return Err(Error::InvalidPoint(format!(
                "{}: loss must be finite, got {}",
                self.ensemble_key, self.loss
            )));
        }
        Ok(())
    }

    /// `self` weakly dominates `other`: no worse on both axes, better on one.
    pub fn weakly_dominates(&self, other: &FrontierPoint) -> bool {
        self.total_params_billions <= other.total_params_billions
            && self.loss <= other.loss
            && (self.total_params_billions < other.total_params_billions || self.loss < other.loss)
    }

    /// `self` is lower than `other` on both axes.
    pub fn strictly_dominates(&self, other: &FrontierPoint) -> bool {
        self.total_params_billions < other.total_params_billions && self.loss < other.loss
    }
}

/// Canonical point order: budget, then loss, then key.
pub fn canonical_cmp(a: &FrontierPoint, b: &FrontierPoint) -> Ordering {
    a.total_params_billions
        .total_cmp(&b.total_params_billions)
        .then(a.loss.total_cmp(&b.loss))
        .then_with(|| a.ensemble_key.cmp(&b.ensemble_key))
}

/// Non-dominated points, sorted by [`canonical_cmp`].
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Frontier {
    points: Vec<FrontierPoint>,
}

impl Frontier {
    pub fn empty() -> Self {
        Frontier::default()
    }

    /// Caller guarantees `points` is already a frontier in canonical order.
    pub(crate) fn from_canonical(points: Vec<FrontierPoint>) -> Self {
        Frontier { points }
    }

    pub fn points(&self) -> &[FrontierPoint] {
        &self.points
    }

    pub fn into_points(self) -> Vec<FrontierPoint> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Lowest loss reachable with budget at most `budget`.
    pub fn envelope_at(&self, budget: f64) -> Option<f64> {
        self.points
            .iter()
            .take_while(|p| p.total_params_billions <= budget)
            .map(|p| p.loss)
            .min_by(f64::total_cmp)
    }
}

/// Weak-dominance frontier of `points`.
pub fn pareto_front(points: &[FrontierPoint]) -> Result<Frontier> {
    pareto_front_with(points, Dominance::Weak, Exec::default())
}

pub fn pareto_front_with(
    points: &[FrontierPoint],
    rule: Dominance,
    exec: Exec,
) -> Result<Frontier> {
    let idx = pareto_indices(points, rule, exec)?;
    Ok(Frontier {
        points: idx.into_iter().map(|i| points[i].clone()).collect(),
    })
}

/// Indices of the frontier points within `points`, in canonical order.
pub fn pareto_indices(points: &[FrontierPoint], rule: Dominance, exec: Exec) -> Result<Vec<usize>> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    for p in points {
        p.validate()?;
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    exec.sort_unstable_by(&mut order, |&a, &b| {
        canonical_cmp(&points[a], &points[b]).then(a.cmp(&b))
    });

    let mut keep = Vec::new();
    match rule {
        Dominance::Weak => {
            let mut best = f64::INFINITY;
            for i in order {
                if points[i].loss < best {
                    best = points[i].loss;
                    keep.push(i);
                }
            }
        }
        Dominance::Strict => {
            // best loss among strictly smaller budgets
            let mut best_before = f64::INFINITY;
            let mut group_min = f64::INFINITY;
            let mut group_budget = f64::NAN;
            let mut last: Option<usize> = None;
            for i in order {
                let p = &points[i];
                if p.total_params_billions != group_budget {
                    best_before = best_before.min(group_min);
                    group_min = f64::INFINITY;
                    group_budget = p.total_params_billions;
                }
                group_min = group_min.min(p.loss);
                if p.loss <= best_before {
                    let duplicate =
                        last.is_some_and(|j| canonical_cmp(&points[j], p) == Ordering::Equal);
                    if !duplicate {
                        keep.push(i);
                        last = Some(i);
                    }
                }
            }
        }
    }
    Ok(keep)
}

/// Frontier of the union of two frontiers. An empty side acts as identity.
pub fn merge_frontiers(a: &Frontier, b: &Frontier) -> Frontier {
    merge_frontiers_with(a, b, Dominance::Weak)
}

pub fn merge_frontiers_with(a: &Frontier, b: &Frontier, rule: Dominance) -> Frontier {
    let union: Vec<FrontierPoint> = a.points.iter().chain(&b.points).cloned().collect();
    if union.is_empty() {
        return Frontier::empty();
    }
    pareto_front_with(&union, rule, Exec::Sequential).expect("frontier points are valid")
}

/// Writes points in the frontier export format, in the given order.
pub fn write_frontier_csv<W: Write>(points: &[FrontierPoint], out: W) -> Result<()> {
    let path = Path::new("<frontier>");
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FRONTIER_HEADER)
        .map_err(|e| Error::csv(path, e))?;
    for p in points {
        w.write_record([
            p.k().to_string(),
            format!("{}", p.total_params_billions),
            format!("{}", p.loss),
            p.ensemble_key.to_string(),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_frontier_csv<R: Read>(input: R, path: &Path) -> Result<Vec<FrontierPoint>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = rdr.headers().map_err(|e| Error::csv(path, e))?;
    if headers.iter().ne(FRONTIER_HEADER.iter().copied()) {
        return Err(Error::BadHeader {
            path: path.to_path_buf(),
            reason: format!("expected `{}`", FRONTIER_HEADER.join(",")),
        });
    }
    #[derive(Deserialize)]
    struct Row {
        k: usize,
        total_params_billions: f64,
        oracle_loss_nats_per_token: f64,
        ensemble_key: String,
    }
    let mut points = Vec::new();
    for row in rdr.deserialize::<Row>() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let key = EnsembleKey::parse(&row.ensemble_key);
        if key.len() != row.k {
            return Err(Error::InvalidFrontierFile {
                path: path.to_path_buf(),
                reason: format!(
                    "k = {} but key `{}` has {} members",
                    row.k,
                    row.ensemble_key,
                    key.len()
                ),
            });
        }
        let p = FrontierPoint::new(
            row.total_params_billions,
            row.oracle_loss_nats_per_token,
            key,
        );
        p.validate()?;
        points.push(p);
    }
    Ok(points)
}

pub fn load_frontier_csv(path: &Path) -> Result<Vec<FrontierPoint>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_frontier_csv(std::io::BufReader::new(f), path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(params: f64, loss: f64, key: &str) -> FrontierPoint {
        FrontierPoint::new(params, loss, EnsembleKey::parse(key))
    }

    fn pairs(f: &Frontier) -> Vec<(f64, f64)> {
        f.points()
            .iter()
            .map(|p| (p.total_params_billions, p.loss))
            .collect()
    }

    #[test]
    fn staircase_example() {
        let pts = vec![
            pt(1.0, 3.0, "a"),
            pt(2.0, 2.5, "b"),
            pt(3.0, 2.7, "c"),
            pt(4.0, 2.0, "d"),
        ];
        let f = pareto_front(&pts).unwrap();
        assert_eq!(pairs(&f), [(1.0, 3.0), (2.0, 2.5), (4.0, 2.0)]);
    }

    #[test]
    fn single_point_and_empty() {
        let f = pareto_front(&[pt(5.0, 1.0, "x")]).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(pareto_front(&[]).unwrap_err().kind(), "empty point set");
    }

    #[test]
    fn equal_budget_lower_loss_wins() {
        let f = pareto_front(&[pt(2.0, 2.5, "a"), pt(2.0, 2.4, "b")]).unwrap();
        assert_eq!(pairs(&f), [(2.0, 2.4)]);
        assert_eq!(f.points()[0].ensemble_key.to_string(), "b");
    }

    #[test]
    fn exact_tie_keeps_smallest_key() {
        let f =
            pareto_front(&[pt(2.0, 1.0, "b+c"), pt(2.0, 1.0, "a+z"), pt(2.0, 1.0, "b")]).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.points()[0].ensemble_key.to_string(), "a+z");
    }

    #[test]
    fn strict_rule_keeps_equal_axis_points() {
        let pts = vec![
            pt(2.0, 2.5, "a"),
            pt(2.0, 2.4, "b"),
            pt(3.0, 2.4, "c"),
            pt(4.0, 2.5, "d"),
        ];
        let strict = pareto_front_with(&pts, Dominance::Strict, Exec::Sequential).unwrap();
        assert_eq!(pairs(&strict), [(2.0, 2.4), (2.0, 2.5), (3.0, 2.4)]);
        let weak = pareto_front(&pts).unwrap();
        assert_eq!(pairs(&weak), [(2.0, 2.4)]);
    }

    #[test]
    fn merge_examples() {
        let a = pareto_front(&[pt(1.0, 3.0, "a")]).unwrap();
        let b = pareto_front(&[pt(1.0, 2.9, "b"), pt(2.0, 2.0, "c")]).unwrap();
        assert_eq!(pairs(&merge_frontiers(&a, &b)), [(1.0, 2.9), (2.0, 2.0)]);
        assert_eq!(merge_frontiers(&b, &b), b);
        assert_eq!(merge_frontiers(&b, &Frontier::empty()), b);
        assert_eq!(merge_frontiers(&a, &b), merge_frontiers(&b, &a));
    }

    #[test]
    fn rejects_non_positive_budget() {
        assert_eq!(
            pareto_front(&[pt(0.0, 1.0, "a")]).unwrap_err().kind(),
            "invalid point"
        );
        assert_eq!(
            pareto_front(&[pt(1.0, f64::NAN, "a")]).unwrap_err().kind(),
            "invalid point"
        );
    }

    #[test]
    fn envelope_lookup() {
        let f = pareto_front(&[pt(1.0, 3.0, "a"), pt(4.0, 2.0, "b")]).unwrap();
        assert_eq!(f.envelope_at(0.5), None);
        assert_eq!(f.envelope_at(3.9), Some(3.0));
        assert_eq!(f.envelope_at(4.0), Some(2.0));
    }

    #[test]
    fn csv_round_trip() {
        let f = pareto_front(&[pt(0.5, 3.25, "m1"), pt(7.5, 2.0, "m1+m2")]).unwrap();
        let mut buf = Vec::new();
        write_frontier_csv(f.points(), &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text,
            "k,total_params_billions,oracle_loss_nats_per_token,ensemble_key\n1,0.5,3.25,m1\n2,7.5,2,m1+m2\n"
        );
        let back = read_frontier_csv(buf.as_slice(), Path::new("mem")).unwrap();
        assert_eq!(back, f.points());
    }
}
