use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn zeroloss(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zeroloss"))
        .current_dir(dir)
        .env_remove("ZEROLOSS_OUT_DIR")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = zeroloss(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn bounds_prints_the_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(
        dir.path(),
        &["bounds", "--n", "8", "--c", "1", "--delta", "0.01", "--lambda-min", "0.1", "--kappa", "10"],
    );
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["chernoff"], 5903);
    assert_eq!(v["bernstein"], 12592);
    assert!(v["gaussian"].is_null());
    assert_eq!(v["schema_version"], 1);
}

#[test]
fn bad_set_population_is_singular() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["dataset", "gen", "--kind", "bad-set", "--d", "3"]);
    ok(dir.path(), &["population", "--activation", "relu", "--closed-form"]);
    let out = dir.path().join("zeroloss-out");
    assert_eq!(header(&out.join("dataset.csv")), "x_0,x_1,x_2,y");
    assert_eq!(header(&out.join("kernel.csv")), "i,j,value");
    assert_eq!(rows(&out.join("kernel.csv")).len(), 64);
    let eig: Vec<f64> = rows(&out.join("eigenvalues.csv")).iter().map(|r| r[1].parse().unwrap()).collect();
    let lmax = eig.iter().copied().fold(f64::MIN, f64::max);
    let lmin = eig.iter().copied().fold(f64::MAX, f64::min);
    assert!(lmin <= 1e-14 * lmax, "{lmin} vs {lmax}");
    let echo: Value = serde_json::from_str(&fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert!(echo["rng_version"].as_str().unwrap().contains("chacha"));
    assert_eq!(echo["schema_version"], 1);
}

#[test]
fn quadrature_population_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["--out-dir", "q", "population", "--dataset", "uniform:n=12:d=4:seed=2"]);
    ok(dir.path(), &["--out-dir", "c", "population", "--dataset", "uniform:n=12:d=4:seed=2", "--closed-form"]);
    let q = rows(&dir.path().join("q/kernel.csv"));
    let c = rows(&dir.path().join("c/kernel.csv"));
    for (a, b) in q.iter().zip(&c) {
        let (x, y): (f64, f64) = (a[2].parse().unwrap(), b[2].parse().unwrap());
        assert!((x - y).abs() <= 1e-6, "{x} vs {y}");
    }
}

#[test]
fn certify_reports_status() {
    let dir = tempfile::tempdir().unwrap();
    let v: Value = serde_json::from_str(&ok(dir.path(), &["certify", "--activation", "wendland2", "--d", "3"])).unwrap();
    assert_eq!(v["status"], "EMPIRICALLY_STRICT_PD");
    assert_eq!(v["K"], 500);
    for key in ["odd_count", "even_count", "tail_estimate"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    let v: Value = serde_json::from_str(&ok(dir.path(), &["certify", "--activation", "relu", "--d", "10"])).unwrap();
    assert_eq!(v["status"], "ODD_PART_POLYNOMIAL");
}

#[test]
fn spectra_headers_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["spectra", "--dataset", "synthetic2", "--activation", "relu", "--widths", "50,400", "--trials", "4", "--summary"],
    );
    let out = dir.path().join("zeroloss-out");
    assert_eq!(header(&out.join("spectra.csv")), "width,trial,kappa,lambda_min,lambda_max,singular");
    assert_eq!(header(&out.join("summary.csv")), "width,median_kappa,q10,q90,singular_fraction");
    let r = rows(&out.join("spectra.csv"));
    assert_eq!(r.len(), 8);
    assert!(r.iter().all(|row| row[5] == "true"));
}

#[test]
fn train_and_landweber_outputs() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["train", "--dataset", "prostate-standin", "--activation", "wendland2", "--width-mult", "5", "--max-iters", "300"],
    );
    let out = dir.path().join("zeroloss-out");
    assert_eq!(header(&out.join("train.csv")), "k,residual,least_norm_gap");
    let summary: Value = serde_json::from_str(&fs::read_to_string(out.join("train_summary.json")).unwrap()).unwrap();
    for key in ["iters", "final_residual", "kappa", "eta"] {
        assert!(summary.get(key).is_some(), "{key}");
    }
    let r = rows(&out.join("train.csv"));
    assert_eq!(r.len() as u64, summary["iters"].as_u64().unwrap() + 1);
    assert!(!r[20][2].is_empty());
    assert!(r[21][2].is_empty());

    ok(
        dir.path(),
        &["landweber", "--dataset", "uniform:n=15:d=5:seed=4", "--activation", "wendland2", "--width-mult", "10", "--ks", "1,20", "--truncation", "64"],
    );
    assert_eq!(header(&out.join("filters.csv")), "k,sigma_j,filter_value");
    assert_eq!(header(&out.join("spectrum.csv")), "j,lambda_hat,lambda_pop");
    assert_eq!(rows(&out.join("filters.csv")).len(), 30);
    assert_eq!(rows(&out.join("spectrum.csv")).len(), 15);
}

#[test]
fn joint_train_writes_epochs() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["joint-train", "--dataset", "uniform:n=20:d=4:seed=1", "--epochs", "3", "--precision", "f64"]);
    let path = dir.path().join("zeroloss-out/joint.csv");
    assert_eq!(header(&path), "epoch,kappa,loss");
    assert_eq!(rows(&path).len(), 4);
}

#[test]
fn ingest_pipeline_projects_to_sphere() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("raw.csv"), "a,b,target\n1,0,3\n0,2,4\n3,3,5\n").unwrap();
    ok(dir.path(), &["dataset", "ingest", "--input", "raw.csv", "--label-col", "target"]);
    let r = rows(&dir.path().join("zeroloss-out/dataset.csv"));
    let first: Vec<f64> = r[1].iter().map(|v| v.parse().unwrap()).collect();
    assert_eq!(first, vec![0.0, 1.0, 4.0]);
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_zeroloss"))
        .current_dir(dir.path())
        .env("ZEROLOSS_OUT_DIR", "from-env")
        .args(["dataset", "gen", "--kind", "uniform", "--n", "5", "--d", "3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("from-env/dataset.csv").exists());
    assert!(dir.path().join("from-env/config.json").exists());
}

#[test]
fn argument_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["frobnicate"],
        vec!["bounds", "--n", "8"],
        vec!["spectra", "--widths", "x"],
        vec!["train", "--step-rule", "fixed"],
        vec!["dataset", "gen", "--kind", "synthetic1", "--n", "4"],
        vec!["repro"],
    ] {
        let out = zeroloss(dir.path(), &args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"), "{args:?}");
    }
}

#[test]
fn numeric_failures_exit_with_one_and_a_record() {
    let dir = tempfile::tempdir().unwrap();
    let out = zeroloss(dir.path(), &["train", "--dataset", "synthetic2", "--activation", "relu", "--width-mult", "5"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(v["stage"], "train");
    assert!(v["message"].as_str().unwrap().contains("rank"));
    assert_eq!(v["context"]["command"], "train");

    let out = zeroloss(dir.path(), &["bounds", "--n", "8", "--c", "1", "--delta", "0.01", "--lambda-min", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(v["stage"], "bounds");
}

#[test]
fn figure1_on_synthetic2_is_singular_for_relu_and_swish() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["--out-dir", "f1", "repro", "figure1", "--dataset", "synthetic2", "--trials", "5", "--width-mults", "1,5,20"],
    );
    let out = dir.path().join("f1");
    for act in ["relu", "swish"] {
        let r = rows(&out.join(format!("figure1_{act}_summary.csv")));
        assert_eq!(r.len(), 3);
        for row in r {
            assert_eq!(row[4].parse::<f64>().unwrap(), 1.0, "{act}: {row:?}");
        }
    }
    let meta: Value = serde_json::from_str(&fs::read_to_string(out.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["standin"], false);
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["repro", "figure1", "--dataset", "uniform:n=30:d=5:seed=3", "--trials", "6", "--width-mults", "1,3"];
    let mut one = vec!["--threads", "1", "--out-dir", "one"];
    one.extend(args);
    let mut four = vec!["--threads", "4", "--out-dir", "four"];
    four.extend(args);
    ok(dir.path(), &one);
    ok(dir.path(), &four);
    for entry in fs::read_dir(dir.path().join("one")).unwrap() {
        let name = entry.unwrap().file_name();
        let a = fs::read(dir.path().join("one").join(&name)).unwrap();
        let b = fs::read(dir.path().join("four").join(&name)).unwrap();
        assert!(a == b, "{name:?} differs");
    }
}
