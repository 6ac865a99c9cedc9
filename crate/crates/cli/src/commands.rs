use std::collections::HashMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use nalgebra::DVector;
use serde_json::json;
use zeroloss_core::data::{ingest_csv, Dataset, IngestOptions};
use zeroloss_core::features::{
    bernstein_value, chernoff_value, feature_matrix, gaussian_value, sample_weights, width_bound_bernstein,
    width_bound_chernoff, width_bound_gaussian, width_sweep,
};
use zeroloss_core::harmonics::certificate::certify_with_threshold;
use zeroloss_core::harmonics::expansion::{expand, funk_hecke, population_kernel_matrix, ClosedForm, RECONSTRUCTION_WARN};
use zeroloss_core::io::SCHEMA_VERSION;
use zeroloss_core::linalg::ReducedSvd;
use zeroloss_core::training::{joint_train, train_last_layer, JointHyper, Landweber};
use zeroloss_core::{
    Activation, ActivationKind, ActivationSpec, Kernel, SpectralReport, StepRule, SweepTable, TrainConfig,
    WeightDistribution, WidthBoundQuery,
};

use crate::args::*;
use crate::output::{f, print_json, CliResult, Failure, OutDir, Stage};
use crate::repro;
use crate::spec::DatasetSpec;

/// Fills in defaults that depend on the output directory, so the echoed
/// config is self-contained.
pub fn resolve(cmd: &mut Command, out: &Path) {
    let dataset = match cmd {
        Command::Spectra(a) => &mut a.dataset,
        Command::Population(a) => &mut a.dataset,
        Command::Train(a) => &mut a.dataset,
        Command::Landweber(a) => &mut a.dataset,
        _ => return,
    };
    if dataset.is_none() {
        *dataset = Some(DatasetSpec::in_dir(out));
    }
}

pub fn run(mut cmd: Command, out_dir: &Path) -> CliResult<()> {
    resolve(&mut cmd, out_dir);
    match &cmd {
        Command::Bounds(a) => return bounds(a),
        Command::Certify(a) => return certify(a),
        Command::Repro(ReproArgs { figure: None, config: Some(path) }) => return repro::replay(path, out_dir),
        Command::Repro(ReproArgs { figure: None, config: None }) => {
            return Err(Failure::usage("repro needs a figure (figure1..figure4) or --config <config.json>"))
        }
        _ => {}
    }
    let out = OutDir::create(out_dir)?;
    out.write_config(&cmd)?;
    match &cmd {
        Command::Dataset(DatasetCmd::Gen(a)) => dataset_gen(a, &out),
        Command::Dataset(DatasetCmd::Ingest(a)) => dataset_ingest(a, &out),
        Command::Spectra(a) => spectra(a, &out),
        Command::Population(a) => population(a, &out),
        Command::Train(a) => train(a, &out),
        Command::Landweber(a) => landweber(a, &out),
        Command::JointTrain(a) => joint(a, &out),
        Command::Repro(ReproArgs { figure: Some(fig), .. }) => repro::figure(fig, &out),
        Command::Bounds(_) | Command::Certify(_) | Command::Repro(_) => unreachable!(),
    }
}

pub fn load(spec: &Option<DatasetSpec>) -> CliResult<Dataset> {
    let spec = spec.as_ref().expect("dataset resolved before running");
    spec.load().stage("dataset").map_err(|e| {
        let e = e.with("dataset", spec.to_string());
        if let DatasetSpec::File(p) = spec {
            if !p.exists() {
                return Failure::new("dataset", format!("{} does not exist; run `dataset gen` first or pass --dataset", p.display()))
                    .with("dataset", spec.to_string());
            }
        }
        e
    })
}

pub fn build_activation(spec: &ActivationSpec, d: usize) -> CliResult<Activation> {
    spec.build(d).stage("activation").map_err(|e| e.with("activation", spec.to_string()))
}

/// `--width` if given, else `⌈mult · n⌉`.
pub fn width_for(width: Option<usize>, mult: f64, n: usize) -> CliResult<usize> {
    let m = match width {
        Some(m) => m,
        None => {
            if !(mult > 0.0 && mult.is_finite()) {
                return Err(Failure::usage(format!("--width-mult must be positive, got {mult}")));
            }
            (mult * n as f64).ceil() as usize
        }
    };
    if m == 0 {
        return Err(Failure::usage("width must be positive"));
    }
    Ok(m)
}

pub fn step_rule(choice: StepChoice, eta: Option<f64>) -> CliResult<StepRule> {
    match (choice, eta) {
        (StepChoice::LemmaOptimal, None) => Ok(StepRule::LemmaOptimal),
        (StepChoice::LemmaOptimal, Some(_)) => Err(Failure::usage(
            "--eta is not used with --step-rule lemma-optimal; use fixed or spectral-cap",
        )),
        (StepChoice::SpectralCap, e) => Ok(StepRule::SpectralCap(e)),
        (StepChoice::Fixed, Some(e)) => Ok(StepRule::Fixed(e)),
        (StepChoice::Fixed, None) => Err(Failure::usage("--step-rule fixed requires --eta")),
    }
}

fn write_dataset(ds: &Dataset, out: &OutDir) -> CliResult<()> {
    let path = out.path("dataset.csv");
    let mut w = BufWriter::new(File::create(&path).stage("output")?);
    ds.write_csv(&mut w).stage("output")?;
    log::info!("wrote {} ({} points in d={})", path.display(), ds.n(), ds.dim());
    Ok(())
}

fn dataset_gen(a: &GenArgs, out: &OutDir) -> CliResult<()> {
    let fixed = |what: &str| -> CliResult<()> {
        if a.n.is_some() || a.d.is_some() {
            return Err(Failure::usage(format!("{what} has a fixed shape; --n and --d are not accepted")));
        }
        Ok(())
    };
    let spec = match a.kind {
        DatasetKind::Uniform => DatasetSpec::Uniform {
            n: a.n.ok_or_else(|| Failure::usage("--kind uniform requires --n"))?,
            d: a.d.ok_or_else(|| Failure::usage("--kind uniform requires --d"))?,
            seed: a.seed,
        },
        DatasetKind::BadSet => {
            if a.n.is_some() {
                return Err(Failure::usage("the bad set always has 8 points; --n is not accepted"));
            }
            DatasetSpec::BadSet { d: a.d.unwrap_or(3) }
        }
        DatasetKind::Synthetic1 => {
            fixed("synthetic1")?;
            DatasetSpec::Synthetic1 { seed: a.seed }
        }
        DatasetKind::Synthetic2 => {
            fixed("synthetic2")?;
            DatasetSpec::Synthetic2 { seed: a.seed }
        }
        DatasetKind::ProstateStandin => {
            fixed("prostate-standin")?;
            DatasetSpec::ProstateStandin { seed: a.seed }
        }
        DatasetKind::FashionStandin => {
            fixed("fashion-standin")?;
            DatasetSpec::FashionStandin { seed: a.seed }
        }
    };
    let ds = load(&Some(spec))?;
    write_dataset(&ds, out)
}

fn dataset_ingest(a: &IngestArgs, out: &OutDir) -> CliResult<()> {
    let opts = IngestOptions {
        label_col: a.label_col.clone(),
        standardize: a.standardize,
        pca_dims: a.pca_dims,
    };
    let ds = ingest_csv(&a.input, &opts)
        .stage("ingest")
        .map_err(|e| e.with("input", a.input.display().to_string()))?;
    write_dataset(&ds, out)
}

/// `<prefix>spectra.csv`, `<prefix>seeds.csv` and, if asked, `<prefix>summary.csv`.
pub fn write_sweep(out: &OutDir, prefix: &str, table: &SweepTable, summary: bool) -> CliResult<()> {
    let mut w = out.csv(&format!("{prefix}spectra.csv"), &["width", "trial", "kappa", "lambda_min", "lambda_max", "singular"])?;
    for r in &table.rows {
        w.row([
            r.width.to_string(),
            r.trial.to_string(),
            f(r.kappa),
            f(r.lambda_min),
            f(r.lambda_max),
            r.singular.to_string(),
        ])?;
    }
    w.finish()?;
    let mut w = out.csv(&format!("{prefix}seeds.csv"), &["width", "trial", "seed"])?;
    for r in &table.rows {
        w.row([r.width.to_string(), r.trial.to_string(), r.seed.to_string()])?;
    }
    w.finish()?;
    if summary {
        let mut w = out.csv(
            &format!("{prefix}summary.csv"),
            &["width", "median_kappa", "q10", "q90", "singular_fraction"],
        )?;
        for s in table.summary() {
            w.row([s.width.to_string(), f(s.median_kappa), f(s.q10), f(s.q90), f(s.singular_fraction)])?;
        }
        w.finish()?;
    }
    Ok(())
}

pub fn sweep(
    ds: &Dataset,
    spec: &ActivationSpec,
    widths: &[usize],
    trials: usize,
    dist: WeightDistribution,
    seed: u64,
) -> CliResult<SweepTable> {
    let act = build_activation(spec, ds.dim())?;
    width_sweep(ds, &act, widths, trials, dist, seed)
        .stage("spectra")
        .map_err(|e| e.with("activation", spec.to_string()))
}

fn spectra(a: &SpectraArgs, out: &OutDir) -> CliResult<()> {
    let ds = load(&a.dataset)?;
    let table = sweep(&ds, &a.activation, &a.widths, a.trials, a.distribution, a.seed)?;
    write_sweep(out, "", &table, a.summary)
}

fn population(a: &PopulationArgs, out: &OutDir) -> CliResult<()> {
    let ds = load(&a.dataset)?;
    let d = ds.dim();
    let plain_relu = a.activation.kind == ActivationKind::Relu && a.activation.scale == 1.0;
    let (kernel, source, recon) = if a.closed_form || a.ntk {
        if !plain_relu {
            return Err(Failure::usage(format!(
                "closed-form kernels exist only for unscaled relu, got {}",
                a.activation
            )));
        }
        let form = if a.ntk { ClosedForm::Ntk } else { ClosedForm::Relu };
        (Kernel::Closed { form, d }, if a.ntk { "closed_form_ntk" } else { "closed_form_relu" }, None)
    } else {
        let act = build_activation(&a.activation, d)?;
        let exp = expand(&act, d, a.k).stage("expansion")?;
        if exp.reconstruction_error() > RECONSTRUCTION_WARN {
            log::warn!(
                "reconstruction error {:e} of {} at K={} exceeds {:e}",
                exp.reconstruction_error(),
                a.activation,
                a.k,
                RECONSTRUCTION_WARN
            );
        }
        let k = funk_hecke(&exp).stage("funk_hecke")?;
        (Kernel::Expansion(k), "quadrature", Some(exp.reconstruction_error()))
    };
    let h = population_kernel_matrix(&ds, &kernel).stage("kernel_matrix")?;
    let rep = SpectralReport::of_symmetric(&h).stage("eigenvalues")?;
    let n = ds.n();
    let mut w = out.csv("kernel.csv", &["i", "j", "value"])?;
    for i in 0..n {
        for j in 0..n {
            w.row([i.to_string(), j.to_string(), f(h[(i, j)])])?;
        }
    }
    w.finish()?;
    let mut w = out.csv("eigenvalues.csv", &["index", "eigenvalue"])?;
    for (i, v) in rep.eigenvalues.iter().enumerate() {
        w.row([i.to_string(), f(*v)])?;
    }
    w.finish()?;
    out.json(
        "population.json",
        &json!({
            "schema_version": SCHEMA_VERSION,
            "source": source,
            "n": n,
            "d": d,
            "lambda_min": rep.lambda_min,
            "lambda_max": rep.lambda_max,
            "kappa": rep.kappa,
            "singular": rep.singular,
            "reconstruction_error": recon,
            "bad_set_combination": kernel.bad_set_combination(),
        }),
    )
}

fn bounds(a: &BoundsArgs) -> CliResult<()> {
    let q = WidthBoundQuery {
        n: a.n,
        c: a.c,
        delta: a.delta,
        lambda_min_h: a.lambda_min,
        kappa_h: a.kappa,
        sigma1_x: a.sigma1,
        abs_const: a.abs_const,
    };
    let chernoff = width_bound_chernoff(&q).stage("bounds")?;
    let chernoff_v = chernoff_value(&q).stage("bounds")?;
    let (bernstein, bernstein_v) = match a.kappa {
        Some(_) => (Some(width_bound_bernstein(&q).stage("bounds")?), Some(bernstein_value(&q).stage("bounds")?)),
        None => (None, None),
    };
    let (gaussian, gaussian_v) = match a.sigma1 {
        Some(_) => (Some(width_bound_gaussian(&q).stage("bounds")?), Some(gaussian_value(&q).stage("bounds")?)),
        None => (None, None),
    };
    print_json(&json!({
        "schema_version": SCHEMA_VERSION,
        "query": q,
        "chernoff": chernoff,
        "bernstein": bernstein,
        "gaussian": gaussian,
        "chernoff_value": chernoff_v,
        "bernstein_value": bernstein_v,
        "gaussian_value": gaussian_v,
    }))
}

fn certify(a: &CertifyArgs) -> CliResult<()> {
    let act = build_activation(&a.activation, a.d)?;
    let exp = expand(&act, a.d, a.k).stage("expansion")?;
    let cert = certify_with_threshold(&exp, a.tol, a.threshold).stage("certify")?;
    print_json(&json!({
        "schema_version": SCHEMA_VERSION,
        "activation": a.activation.to_string(),
        "d": a.d,
        "status": cert.status,
        "odd_count": cert.odd_count,
        "even_count": cert.even_count,
        "K": cert.k,
        "tail_estimate": cert.tail_estimate,
        "tol": cert.tol,
        "threshold": cert.threshold,
        "reconstruction_error": exp.reconstruction_error(),
    }))
}

pub struct TrainJob<'a> {
    pub ds: &'a Dataset,
    pub activation: &'a ActivationSpec,
    pub width: usize,
    pub distribution: WeightDistribution,
    pub seed: u64,
    pub cfg: TrainConfig,
}

/// Runs last-layer gradient descent and writes `<prefix>train.csv` and
/// `<prefix>train_summary.json`.
pub fn train_job(job: &TrainJob, out: &OutDir, prefix: &str) -> CliResult<()> {
    let ds = job.ds;
    let act = build_activation(job.activation, ds.dim())?;
    let w = sample_weights(ds.dim(), job.width, job.distribution, job.seed).stage("weights")?;
    let trace = train_last_layer(ds, &act, &w, ds.labels(), &job.cfg)
        .stage("train")
        .map_err(|e| e.with("activation", job.activation.to_string()).with("width", job.width))?;
    let gaps: HashMap<u64, f64> = trace
        .recorded
        .iter()
        .filter_map(|r| r.least_norm_gap.map(|g| (r.k, g)))
        .collect();
    let mut csv = out.csv(&format!("{prefix}train.csv"), &["k", "residual", "least_norm_gap"])?;
    for (k, r) in trace.residuals.iter().enumerate() {
        let gap = gaps.get(&(k as u64)).map(|g| f(*g)).unwrap_or_default();
        csv.row([k.to_string(), f(*r), gap])?;
    }
    csv.finish()?;
    out.json(
        &format!("{prefix}train_summary.json"),
        &json!({
            "schema_version": SCHEMA_VERSION,
            "iters": trace.iterations,
            "final_residual": trace.final_residual(),
            "kappa": trace.kappa(),
            "eta": trace.eta,
            "converged": trace.converged,
            "n": ds.n(),
            "width": job.width,
            "activation": job.activation.to_string(),
        }),
    )
}

fn train(a: &TrainArgs, out: &OutDir) -> CliResult<()> {
    let rule = step_rule(a.step_rule, a.eta)?;
    let ds = load(&a.dataset)?;
    let cfg = TrainConfig {
        step_rule: rule,
        max_iters: a.max_iters,
        residual_tol: a.tol,
        dense_until: a.dense_until,
    };
    let job = TrainJob {
        ds: &ds,
        activation: &a.activation,
        width: width_for(a.width.width, a.width.width_mult, ds.n())?,
        distribution: a.distribution,
        seed: a.seed,
        cfg,
    };
    train_job(&job, out, "")
}

pub struct LandweberJob<'a> {
    pub ds: &'a Dataset,
    pub activation: &'a ActivationSpec,
    pub width: usize,
    pub distribution: WeightDistribution,
    pub seed: u64,
    pub rule: StepRule,
    pub ks: &'a [u64],
    pub truncation: usize,
}

/// Writes `<prefix>filters.csv`, `<prefix>spectrum.csv` and `<prefix>landweber.json`.
pub fn landweber_job(job: &LandweberJob, out: &OutDir, prefix: &str) -> CliResult<()> {
    let ds = job.ds;
    let (n, d) = (ds.n(), ds.dim());
    let act = build_activation(job.activation, d)?;
    let w = sample_weights(d, job.width, job.distribution, job.seed).stage("weights")?;
    let est = feature_matrix(ds, &w, &act).stage("features")?;
    let svd = ReducedSvd::auto(&est.z).stage("svd")?;
    let lw = Landweber::from_svd(svd, n)
        .stage("svd")
        .map_err(|e| e.with("activation", job.activation.to_string()))?;
    let sigma = lw.sigma();
    let (smax, smin) = (sigma[0], sigma[sigma.len() - 1]);
    let eta = job.rule.resolve(smin * smin, smax * smax).stage("step_rule")?;

    let mut csv = out.csv(&format!("{prefix}filters.csv"), &["k", "sigma_j", "filter_value"])?;
    for &k in job.ks {
        for (s, fv) in sigma.iter().zip(lw.filter_values(eta, k)) {
            csv.row([k.to_string(), f(*s), f(fv)])?;
        }
    }
    csv.finish()?;

    let exp = expand(&act, d, job.truncation).stage("expansion")?;
    let kernel = Kernel::Expansion(funk_hecke(&exp).stage("funk_hecke")?);
    let h = population_kernel_matrix(ds, &kernel).stage("kernel_matrix")?;
    let pop = SpectralReport::of_symmetric(&h).stage("eigenvalues")?;
    let mut csv = out.csv(&format!("{prefix}spectrum.csv"), &["j", "lambda_hat", "lambda_pop"])?;
    for (j, (s, lp)) in sigma.iter().zip(pop.eigenvalues.iter()).enumerate() {
        csv.row([j.to_string(), f(s * s), f(*lp)])?;
    }
    csv.finish()?;
    out.json(
        &format!("{prefix}landweber.json"),
        &json!({
            "schema_version": SCHEMA_VERSION,
            "eta": eta,
            "kappa_hat": (smax / smin).powi(2),
            "kappa_pop": pop.kappa,
            "n": n,
            "width": job.width,
            "activation": job.activation.to_string(),
            "reconstruction_error": exp.reconstruction_error(),
        }),
    )
}

fn landweber(a: &LandweberArgs, out: &OutDir) -> CliResult<()> {
    let rule = step_rule(a.step_rule, a.eta)?;
    let ds = load(&a.dataset)?;
    let job = LandweberJob {
        ds: &ds,
        activation: &a.activation,
        width: width_for(a.width.width, a.width.width_mult, ds.n())?,
        distribution: a.distribution,
        seed: a.seed,
        rule,
        ks: &a.ks,
        truncation: a.truncation,
    };
    landweber_job(&job, out, "")
}

pub fn write_joint(out: &OutDir, name: &str, records: &[zeroloss_core::training::EpochRecord]) -> CliResult<()> {
    let mut csv = out.csv(name, &["epoch", "kappa", "loss"])?;
    for r in records {
        csv.row([r.epoch.to_string(), f(r.kappa), f(r.loss)])?;
    }
    csv.finish()?;
    Ok(())
}

fn joint(a: &JointArgs, out: &OutDir) -> CliResult<()> {
    let ds = load(&Some(a.dataset.clone()))?;
    let act = build_activation(&a.activation, ds.dim())?;
    let m = width_for(a.width, a.width_mult, ds.n())?;
    let hyper = JointHyper {
        batch: a.batch,
        momentum: a.momentum,
        weight_decay: a.weight_decay,
        lr: a.lr,
        lr_decay: a.lr_decay,
        epochs: a.epochs,
        precision: a.precision,
    };
    let y: DVector<f64> = ds.labels().clone();
    let trace = joint_train(&ds, &y, &act, m, &hyper, a.seed).stage("joint_train")?;
    write_joint(out, "joint.csv", &trace.records)
}
