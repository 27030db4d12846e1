use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use collab_frontier::fitting::{fit_scaling_law, FitConfig};
use collab_frontier::pareto::load_frontier_csv;
use collab_frontier::plot::{emit_svg_plot, PlotSeries};
use collab_frontier::report::{fit_json, write_artifacts, Artifact};
use collab_frontier::{
    cmd_run, load_loss_matrix, synth_pool, Dominance, Error, Exec, Mode, RunConfig, SynthConfig,
};

#[derive(Parser)]
#[command(
    name = "collab-frontier",
    version,
    about = "Oracle ensemble frontiers and scaling-law fits for model pools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate a metadata + matrix pair; print a JSON summary.
    Validate(Inputs),
    /// Write a synthetic pool in the input CSV formats.
    Synth(SynthArgs),
    /// Run the frontier and fitting pipelines and write all artifacts.
    Run(RunArgs),
    /// Fit the power law to a frontier CSV and print the fit JSON.
    Fit(FitArgs),
    /// Same-family vs. cross-family pair analysis.
    Pairs(PairsArgs),
    /// Plot one or more frontier CSVs with their fitted curves.
    Plot(PlotArgs),
}

#[derive(Args)]
struct Inputs {
    #[arg(long)]
    metadata: PathBuf,
    #[arg(long)]
    matrix: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    families: usize,
    #[arg(long, default_value_t = 6)]
    models_per_family: usize,
    #[arg(long, default_value_t = 60)]
    texts: usize,
    /// Comma-separated parameter grid in billions.
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,4,8,16")]
    params: Vec<f64>,
    #[arg(long, default_value_t = 1.5)]
    floor: f64,
    #[arg(long, default_value_t = 1.0)]
    strength: f64,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    metadata: PathBuf,
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "weak")]
    dominance: Dominance,
    /// Run every loop on the calling thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long, default_value = "all")]
    mode: Mode,
}

#[derive(Args)]
struct PairsArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    frontier: PathBuf,
    /// Also write the fit JSON to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// `LABEL=PATH` of a frontier CSV; repeatable.
    #[arg(long = "series", required = true)]
    series: Vec<String>,
    #[arg(long)]
    out: PathBuf,
}

fn run_config(common: Common, k_max: Option<usize>, mode: Mode) -> RunConfig {
    let exec = if common.sequential {
        Exec::Sequential
    } else {
        Exec::default()
    };
    RunConfig {
        k_max,
        mode,
        dominance: common.dominance,
        exec,
        fit: FitConfig {
            exec,
            ..FitConfig::default()
        },
        ..RunConfig::new(common.metadata, common.matrix, common.out)
    }
}

fn print_written(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn write_single(path: &Path, bytes: Vec<u8>) -> Result<(), Error> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    write_artifacts(
        dir,
        &[Artifact {
            name: name.to_string(),
            bytes,
        }],
    )
    .map(|_| ())
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Validate(inputs) => {
            let m = load_loss_matrix(&inputs.metadata, &inputs.matrix)?;
            let mut families: Vec<&str> = m.models().iter().map(|x| x.family.as_str()).collect();
            families.sort();
            families.dedup();
            let summary = serde_json::json!({
                "models": m.n_models(),
                "texts": m.n_texts(),
                "cells": m.n_models() * m.n_texts(),
                "families": families.len(),
                "n_bar": m.n_bar(),
            });
            println!("{summary}");
        }
        Command::Synth(a) => {
            let cfg = SynthConfig {
                n_families: a.families,
                models_per_family: a.models_per_family,
                params_grid_billions: a.params,
                n_texts: a.texts,
                base_floor: a.floor,
                family_signature_strength: a.strength,
                noise_sigma: a.noise,
                seed: a.seed,
                ..SynthConfig::default()
            };
            let m = synth_pool(&cfg)?;
            let (mut meta, mut matrix) = (Vec::new(), Vec::new());
            m.write_metadata_csv(&mut meta)?;
            m.write_matrix_csv(&mut matrix)?;
            let description = serde_json::json!({
                "config": cfg,
                "equation": cfg.generative_equation(),
            });
            let artifacts = [
                Artifact {
                    name: "metadata.csv".into(),
                    bytes: meta,
                },
                Artifact {
                    name: "matrix.csv".into(),
                    bytes: matrix,
                },
                Artifact {
                    name: "synth.json".into(),
                    bytes: serde_json::to_vec_pretty(&description)?,
                },
            ];
            print_written(&write_artifacts(&a.out, &artifacts)?);
        }
        Command::Run(a) => print_written(&cmd_run(&run_config(a.common, a.k_max, a.mode))?),
        Command::Pairs(a) => print_written(&cmd_run(&run_config(a.common, None, Mode::Pairs))?),
        Command::Fit(a) => {
            let points = load_frontier_csv(&a.frontier)?;
            let fit = fit_scaling_law(&points, &FitConfig::default()).map_err(|e| e.to_string());
            let json = fit_json(&fit, points.len());
            if let Some(out) = &a.out {
                write_single(out, json.clone().into_bytes())?;
            }
            println!("{json}");
        }
        Command::Plot(a) => {
            let mut loaded = Vec::new();
            for arg in &a.series {
                let (label, path) =
                    arg.split_once('=')
                        .ok_or_else(|| Error::InvalidFrontierFile {
                            path: PathBuf::from(arg),
                            reason: "expected LABEL=PATH".into(),
                        })?;
                let points = load_frontier_csv(Path::new(path))?;
                let fit = fit_scaling_law(&points, &FitConfig::default()).ok();
                loaded.push((label.to_string(), points, fit));
            }
            let series: Vec<PlotSeries> = loaded
                .iter()
                .map(|(label, points, fit)| PlotSeries {
                    label,
                    points,
                    fit: fit.as_ref(),
                })
                .collect();
            write_single(&a.out, emit_svg_plot(&series)?.into_bytes())?;
            println!("{}", a.out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let report = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{report}");
            ExitCode::FAILURE
        }
    }
}
