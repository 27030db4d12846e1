//! End-to-end pipeline runs and their on-disk artifacts.
//!
//! [`cmd_run`] computes every requested artifact in memory first and only
//! then writes them, each through a temp file and a rename. If any write
//! fails, the files already written by this run are removed.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::data::{load_loss_matrix, LossMatrix};
use crate::diversity::{pairwise_frontiers_and_fits_with, PairSide};
use crate::enumeration::{enumerate_pruned_with, EnumerationOptions};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fitting::{fit_scaling_law, FitConfig, ScalingFit};
use crate::oracle::normalized_mean;
use crate::pareto::{
    pareto_front_with, write_frontier_csv, Dominance, EnsembleKey, Frontier, FrontierPoint,
};
use crate::plot::{emit_svg_plot, PlotSeries};

pub const SUMMARY_HEADER: [&str; 6] = [
    "setting",
    "raw_points",
    "pareto_points",
    "L_inf",
    "A",
    "alpha",
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    Single,
    Ensemble,
    Pairs,
    #[default]
    All,
}

impl Mode {
    fn single(self) -> bool {
        matches!(self, Mode::Single | Mode::All)
    }

    fn ensemble(self) -> bool {
        matches!(self, Mode::Ensemble | Mode::All)
    }

    fn pairs(self) -> bool {
        matches!(self, Mode::Pairs | Mode::All)
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "single" => Ok(Mode::Single),
            "ensemble" => Ok(Mode::Ensemble),
            "pairs" => Ok(Mode::Pairs),
            "all" => Ok(Mode::All),
            other => Err(format!(
                "unknown mode `{other}` (expected single|ensemble|pairs|all)"
            )),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub metadata: PathBuf,
    pub matrix: PathBuf,
    pub out_dir: PathBuf,
    /// Largest ensemble size explored; `None` means the whole pool.
    pub k_max: Option<usize>,
    pub fit: FitConfig,
    pub mode: Mode,
    pub dominance: Dominance,
    pub exec: Exec,
}

impl RunConfig {
    pub fn new(
        metadata: impl Into<PathBuf>,
        matrix: impl Into<PathBuf>,
        out_dir: impl Into<PathBuf>,
    ) -> Self {
        RunConfig {
            metadata: metadata.into(),
            matrix: matrix.into(),
            out_dir: out_dir.into(),
            k_max: None,
            fit: FitConfig::default(),
            mode: Mode::All,
            dominance: Dominance::Weak,
            exec: Exec::default(),
        }
    }
}

/// A named output file held in memory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    fn new(name: &str, bytes: Vec<u8>) -> Self {
        Artifact {
            name: name.to_string(),
            bytes,
        }
    }
}

/// Fit result as written to `*_fit.json`: either the fit report or the
/// reason it was skipped.
pub fn fit_json(fit: &Result<ScalingFit, String>, n_points: usize) -> String {
    #[derive(Serialize)]
    struct Skipped<'a> {
        skipped: &'a str,
        n_points: usize,
    }
    match fit {
        Ok(f) => f.to_json(),
        Err(reason) => serde_json::to_string(&Skipped {
            skipped: reason,
            n_points,
        })
        .expect("serializes"),
    }
}

fn frontier_csv(points: &[FrontierPoint]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_frontier_csv(points, &mut buf)?;
    Ok(buf)
}

fn fit_frontier(frontier: &Frontier, config: &FitConfig) -> Result<ScalingFit, String> {
    fit_scaling_law(frontier.points(), config).map_err(|e| e.to_string())
}

struct Setting {
    name: &'static str,
    raw_points: usize,
    frontier: Frontier,
    fit: Result<ScalingFit, String>,
}

/// Single-model points: each model's normalized loss at its own budget.
pub fn single_model_points(matrix: &LossMatrix) -> Vec<FrontierPoint> {
    matrix
        .models()
        .iter()
        .enumerate()
        .map(|(m, meta)| {
            FrontierPoint::new(
                meta.params_billions,
                normalized_mean(matrix.loss_row(m), matrix.n_bar()),
                EnsembleKey::new([meta.model_id.as_str()]),
            )
        })
        .collect()
}

/// Computes every artifact for `config.mode` without touching the disk.
pub fn build_artifacts(matrix: &LossMatrix, config: &RunConfig) -> Result<Vec<Artifact>> {
    let n = matrix.n_models();
    let k_max = config.k_max.unwrap_or(n);
    if k_max < 1 || k_max > n {
        return Err(Error::InvalidKMax { k_max, pool: n });
    }
    let opts = EnumerationOptions {
        dominance: config.dominance,
        exec: config.exec,
    };
    let mut artifacts = Vec::new();
    let mut settings: Vec<Setting> = Vec::new();

    if config.mode.single() {
        let points = single_model_points(matrix);
        let frontier = pareto_front_with(&points, config.dominance, config.exec)?;
        let fit = fit_frontier(&frontier, &config.fit);
        artifacts.push(Artifact::new(
            "single_frontier.csv",
            frontier_csv(frontier.points())?,
        ));
        artifacts.push(Artifact::new(
            "single_fit.json",
            fit_json(&fit, frontier.len()).into_bytes(),
        ));
        settings.push(Setting {
            name: "single",
            raw_points: points.len(),
            frontier,
            fit,
        });
    }

    if config.mode.ensemble() {
        let run = enumerate_pruned_with(matrix, k_max, opts)?;
        let mut stats = String::new();
        for g in &run.generations {
            stats.push_str(&serde_json::to_string(&g.stats())?);
            stats.push('\n');
        }
        let per_generation: Vec<FrontierPoint> = run
            .generations
            .iter()
            .flat_map(|g| g.frontier.points().iter().cloned())
            .collect();
        // Multi-model setting: ensembles of two or more models.
        let frontier = run.merged_from(2);
        let fit = if frontier.is_empty() {
            Err("no ensembles of size >= 2".to_string())
        } else {
            fit_frontier(&frontier, &config.fit)
        };
        let raw_points = run
            .generations
            .iter()
            .filter(|g| g.k >= 2)
            .map(|g| g.explored_count)
            .sum();
        artifacts.push(Artifact::new(
            "ensemble_generations.jsonl",
            stats.into_bytes(),
        ));
        artifacts.push(Artifact::new(
            "ensemble_generation_frontiers.csv",
            frontier_csv(&per_generation)?,
        ));
        artifacts.push(Artifact::new(
            "ensemble_merged_frontier.csv",
            frontier_csv(run.merged.points())?,
        ));
        artifacts.push(Artifact::new(
            "ensemble_frontier.csv",
            frontier_csv(frontier.points())?,
        ));
        artifacts.push(Artifact::new(
            "ensemble_fit.json",
            fit_json(&fit, frontier.len()).into_bytes(),
        ));
        settings.push(Setting {
            name: "ensemble",
            raw_points,
            frontier,
            fit,
        });
    }

    if !settings.is_empty() {
        artifacts.push(Artifact::new(
            "scaling_summary.csv",
            summary_csv(&settings)?,
        ));
        let series: Vec<PlotSeries> = settings
            .iter()
            .map(|s| PlotSeries {
                label: s.name,
                points: s.frontier.points(),
                fit: s.fit.as_ref().ok(),
            })
            .collect();
        artifacts.push(Artifact::new(
            "scaling.svg",
            emit_svg_plot(&series)?.into_bytes(),
        ));
    }

    if config.mode.pairs() {
        let report = pairwise_frontiers_and_fits_with(matrix, &config.fit, opts)?;
        let mut table = Vec::new();
        report.write_csv(&mut table)?;
        artifacts.push(Artifact::new("pairs_report.csv", table));
        for side in report.sides() {
            artifacts.push(Artifact::new(
                &format!("pairs_{}_frontier.csv", side.side),
                frontier_csv(side.frontier.points())?,
            ));
            artifacts.push(Artifact::new(
                &format!("pairs_{}_fit.json", side.side),
                fit_json(&side.fit, side.frontier.len()).into_bytes(),
            ));
        }
        let series: Vec<PlotSeries> = report.sides().into_iter().map(pair_series).collect();
        artifacts.push(Artifact::new(
            "pairs.svg",
            emit_svg_plot(&series)?.into_bytes(),
        ));
    }
    Ok(artifacts)
}

fn pair_series(side: &PairSide) -> PlotSeries<'_> {
    PlotSeries {
        label: side.side,
        points: side.frontier.points(),
        fit: side.fit.as_ref().ok(),
    }
}

fn summary_csv(settings: &[Setting]) -> Result<Vec<u8>> {
    let path = Path::new("<summary>");
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(SUMMARY_HEADER)
            .map_err(|e| Error::csv(path, e))?;
        for s in settings {
            let (l_inf, a, alpha) = match &s.fit {
                Ok(f) => (f.l_inf.to_string(), f.a.to_string(), f.alpha.to_string()),
                Err(_) => Default::default(),
            };
            w.write_record([
                s.name.to_string(),
                s.raw_points.to_string(),
                s.frontier.len().to_string(),
                l_inf,
                a,
                alpha,
            ])
            .map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    Ok(buf)
}

/// Writes artifacts into `dir` (created if needed), each via temp file and
/// rename. On failure every file written by this call is removed.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        let target = dir.join(&a.name);
        let tmp = dir.join(format!(".{}.tmp", a.name));
        let res = std::fs::File::create(&tmp)
            .and_then(|mut f| {
                f.write_all(&a.bytes)?;
                f.sync_all()
            })
            .and_then(|_| std::fs::rename(&tmp, &target));
        if let Err(e) = res {
            let _ = std::fs::remove_file(&tmp);
            for p in &written {
                let _ = std::fs::remove_file(p);
            }
            return Err(Error::io(&target, e));
        }
        written.push(target);
    }
    Ok(written)
}

/// Loads the inputs, runs the requested pipelines and writes all artifacts.
/// Returns the written paths.
pub fn cmd_run(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let matrix = load_loss_matrix(&config.metadata, &config.matrix)?;
    let artifacts = build_artifacts(&matrix, config)?;
    write_artifacts(&config.out_dir, &artifacts)
}
