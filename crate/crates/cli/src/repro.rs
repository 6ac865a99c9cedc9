//! End-to-end figure pipelines and replay of echoed configs.

use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Value};
use zeroloss_core::io::SCHEMA_VERSION;
use zeroloss_core::training::{joint_train, JointHyper};
use zeroloss_core::{Dataset, StepRule, TrainConfig, WeightDistribution};

use crate::args::{Command, Figure, Figure1Args, Figure2Args, Figure3Args, Figure4Args, ReproArgs};
use crate::commands::{self, LandweberJob, TrainJob};
use crate::output::{f, slug, CliResult, Failure, OutDir, Stage};
use crate::spec::DatasetSpec;

/// Reads `config.json` from an earlier run and executes its command again.
pub fn replay(path: &Path, out_dir: &Path) -> CliResult<()> {
    let text = std::fs::read_to_string(path)
        .stage("config")
        .map_err(|e| e.with("path", path.display().to_string()))?;
    let echo: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::new("config", e.to_string()).with("path", path.display().to_string()))?;
    let recorded = echo.get("rng_version").and_then(Value::as_str).unwrap_or("");
    if recorded != zeroloss_core::rng::RNG_VERSION {
        log::warn!(
            "config was produced with RNG {recorded:?}, this build uses {:?}; outputs will differ",
            zeroloss_core::rng::RNG_VERSION
        );
    }
    let cmd: Command = serde_json::from_value(echo.get("command").cloned().unwrap_or(Value::Null))
        .map_err(|e| Failure::new("config", format!("unreadable command: {e}")).with("path", path.display().to_string()))?;
    if let Command::Repro(ReproArgs { figure: None, .. }) = cmd {
        return Err(Failure::new("config", "a config cannot replay another config"));
    }
    commands::run(cmd, out_dir)
}

pub fn figure(fig: &Figure, out: &OutDir) -> CliResult<()> {
    match fig {
        Figure::Figure1(a) => figure1(a, out),
        Figure::Figure2(a) => figure2(a, out),
        Figure::Figure3(a) => figure3(a, out),
        Figure::Figure4(a) => figure4(a, out),
    }
}

fn metadata(out: &OutDir, figure: &str, spec: &DatasetSpec, ds: &Dataset) -> CliResult<()> {
    let note = match spec {
        DatasetSpec::ProstateStandin { .. } => {
            Some("synthetic stand-in with the shape of the prostate data (n=97, d=8, standardized); not the real data")
        }
        DatasetSpec::FashionStandin { .. } => Some(
            "synthetic stand-in with the shape of the two-class image subset (n=500, 784 features, PCA to 10); not the real data",
        ),
        _ => None,
    };
    out.json(
        "metadata.json",
        &json!({
            "schema_version": SCHEMA_VERSION,
            "figure": figure,
            "dataset": spec.to_string(),
            "dataset_name": ds.name(),
            "standin": spec.is_standin(),
            "note": note,
            "n": ds.n(),
            "d": ds.dim(),
        }),
    )
}

fn load(spec: &DatasetSpec) -> CliResult<Dataset> {
    commands::load(&Some(spec.clone()))
}

fn figure1(a: &Figure1Args, out: &OutDir) -> CliResult<()> {
    let ds = load(&a.dataset)?;
    metadata(out, "figure1", &a.dataset, &ds)?;
    let mut widths: Vec<usize> = Vec::new();
    for &mult in &a.width_mults {
        let m = commands::width_for(None, mult, ds.n())?;
        if !widths.contains(&m) {
            widths.push(m);
        }
    }
    for spec in &a.activations {
        log::info!("figure1: {spec} over widths {widths:?}");
        let table = commands::sweep(&ds, spec, &widths, a.trials, a.distribution, a.seed)?;
        commands::write_sweep(out, &format!("figure1_{}_", slug(&spec.to_string())), &table, true)?;
    }
    Ok(())
}

fn figure2(a: &Figure2Args, out: &OutDir) -> CliResult<()> {
    let ds = load(&a.dataset)?;
    metadata(out, "figure2", &a.dataset, &ds)?;
    let width = commands::width_for(None, a.width_mult, ds.n())?;
    let cfg = TrainConfig {
        step_rule: StepRule::LemmaOptimal,
        max_iters: a.max_iters,
        residual_tol: a.tol,
        ..TrainConfig::default()
    };
    a.activations
        .par_iter()
        .map(|spec| {
            let job = TrainJob {
                ds: &ds,
                activation: spec,
                width,
                distribution: WeightDistribution::UniformSphere,
                seed: a.seed,
                cfg,
            };
            commands::train_job(&job, out, &format!("figure2_{}_", slug(&spec.to_string())))
        })
        .collect::<CliResult<Vec<()>>>()?;
    Ok(())
}

fn figure3(a: &Figure3Args, out: &OutDir) -> CliResult<()> {
    let ds = load(&a.dataset)?;
    metadata(out, "figure3", &a.dataset, &ds)?;
    let width = commands::width_for(None, a.width_mult, ds.n())?;
    a.activations
        .par_iter()
        .map(|spec| {
            let job = LandweberJob {
                ds: &ds,
                activation: spec,
                width,
                distribution: WeightDistribution::UniformSphere,
                seed: a.seed,
                rule: StepRule::LemmaOptimal,
                ks: &a.ks,
                truncation: a.truncation,
            };
            commands::landweber_job(&job, out, &format!("figure3_{}_", slug(&spec.to_string())))
        })
        .collect::<CliResult<Vec<()>>>()?;
    Ok(())
}

fn figure4(a: &Figure4Args, out: &OutDir) -> CliResult<()> {
    let ds = load(&a.dataset)?;
    metadata(out, "figure4", &a.dataset, &ds)?;
    let act = commands::build_activation(&zeroloss_core::ActivationSpec::relu(), ds.dim())?;
    let m = commands::width_for(None, a.width_mult, ds.n())?;
    let hyper = JointHyper {
        epochs: a.epochs,
        lr: a.lr,
        precision: a.precision,
        ..JointHyper::default()
    };
    let traces = a
        .seeds
        .par_iter()
        .map(|&seed| {
            joint_train(&ds, ds.labels(), &act, m, &hyper, seed)
                .stage("joint_train")
                .map_err(|e| e.with("seed", seed))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut summary = out.csv("figure4_summary.csv", &["seed", "initial_kappa", "final_kappa", "increased"])?;
    for (seed, t) in a.seeds.iter().zip(&traces) {
        commands::write_joint(out, &format!("figure4_seed{seed}.csv"), &t.records)?;
        let (k0, k1) = (t.initial_kappa(), t.final_kappa());
        summary.row([seed.to_string(), f(k0), f(k1), (k1 >= k0).to_string()])?;
    }
    summary.finish()?;
    Ok(())
}
