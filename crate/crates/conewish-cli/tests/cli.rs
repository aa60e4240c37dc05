//! End-to-end checks of the binary: formats, golden outputs, exit codes.
//!
//! Exit code contract: 0 success, 1 usage/parse, 2 domain, 3 statistics.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_conewish"))
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, content).unwrap();
    p
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("conewish-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).to_string()
}

const EX2: &str = "1 < 3\n2 < 3\n2 < 4\n";
const DIAMOND: &str = "i < k\ni < s\nk < j\ns < j\n";
const DECOMP: &str = "1 < 3\n1 < 4\n2 < 4\n";

#[test]
fn poset_check_reports_structure() {
    let dir = tempdir("poset-check");
    let poset = write(&dir, "ex2.poset", EX2);
    let out = bin()
        .args(["poset", "check", "--poset"])
        .arg(&poset)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let s = stdout(&out);
    assert!(s.contains("unique-path condition: ok"), "{s}");
    assert!(s.contains("sources: {2}"), "{s}");
    assert!(s.contains("minimal elements: {1, 2}"), "{s}");
    assert!(s.contains("minimal separators: {3}"), "{s}");
    assert!(
        s.contains("lambda_1 > 0, lambda_2 > 0, lambda_3 > 1, lambda_4 > 1/2"),
        "{s}"
    );
}

#[test]
fn poset_check_fails_on_non_unique_paths() {
    let dir = tempdir("poset-diamond");
    let poset = write(&dir, "diamond.poset", DIAMOND);
    let out = bin()
        .args(["poset", "check", "--poset"])
        .arg(&poset)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let s = stdout(&out);
    assert!(s.contains("VIOLATED"), "{s}");
    assert!(s.contains("path A:"), "{s}");
    assert!(s.contains("path B:"), "{s}");
    // describe reports without failing
    let out = bin()
        .args(["poset", "describe", "--poset"])
        .arg(&poset)
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn parse_errors_exit_one() {
    let dir = tempdir("poset-bad");
    let poset = write(&dir, "bad.poset", "1 < 2\n3 < \n");
    let out = bin()
        .args(["poset", "check", "--poset"])
        .arg(&poset)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
    // missing required flag is also exit 1
    let out = bin().args(["poset", "check"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn algebra_verify_passes_on_chain_and_fails_on_diamond() {
    let dir = tempdir("algebra");
    let chain = write(&dir, "chain.poset", "a < b\nb < c\n");
    let out = bin()
        .args(["algebra", "verify", "--trials", "50", "--poset"])
        .arg(&chain)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let s = stdout(&out);
    assert_eq!(s.matches("pass").count(), 6, "{s}");

    let diamond = write(&dir, "diamond.poset", DIAMOND);
    let out = bin()
        .args(["algebra", "verify", "--trials", "50", "--poset"])
        .arg(&diamond)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let s = stdout(&out);
    assert!(s.contains("FAIL"), "{s}");
    assert!(s.lines().filter(|l| l.contains("pass")).count() >= 5, "{s}");
}

#[test]
fn cone_decompose_identity_and_failure() {
    let dir = tempdir("cone");
    let poset = write(&dir, "ex2.poset", EX2);
    let id = write(
        &dir,
        "id.csv",
        "1,2,3,4\n1,0,0,0\n0,1,0,0\n0,0,1,0\n0,0,0,1\n",
    );
    let out = bin()
        .args(["cone", "decompose", "--poset"])
        .arg(&poset)
        .arg("--matrix")
        .arg(&id)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["diag"], serde_json::json!([1.0, 1.0, 1.0, 1.0]));

    // A negative pivot is a domain error naming the element.
    let bad = write(
        &dir,
        "bad.csv",
        "1,2,3,4\n1,0,0,0\n0,-1,0,0\n0,0,1,0\n0,0,0,1\n",
    );
    let out = bin()
        .args(["cone", "decompose", "--poset"])
        .arg(&poset)
        .arg("--matrix")
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("element `2`"), "{}", stderr(&out));
}

#[test]
fn cone_decompose_worked_example_values() {
    let dir = tempdir("cone-vals");
    let poset = write(&dir, "ex2.poset", EX2);
    // x1 = 2, x2 = 1, x13 = 0.6, x23 = 0.5, x24 = 0.4, x3 = 2, x4 = 1.5
    let m = write(
        &dir,
        "x.csv",
        "1,2,3,4\n2,0,0.6,0\n0,1,0.5,0.4\n0.6,0.5,2,0\n0,0.4,0,1.5\n",
    );
    let out = bin()
        .args(["cone", "decompose", "--poset"])
        .arg(&poset)
        .arg("--matrix")
        .arg(&m)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let d: Vec<f64> = v["diag"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert!((d[0] - 2.0).abs() < 1e-12);
    assert!((d[1] - 1.0).abs() < 1e-12);
    // d3 collects both predecessors: 2 - 0.36/2 - 0.25/1
    assert!((d[2] - (2.0 - 0.18 - 0.25)).abs() < 1e-12);
    assert!((d[3] - (1.5 - 0.16)).abs() < 1e-12);
}

#[test]
fn cone_components_on_decomposition_example() {
    let dir = tempdir("components");
    let poset = write(&dir, "decomp.poset", DECOMP);
    // A generic cone point: T T* for T = unit + strict entries.
    let m = write(
        &dir,
        "z.csv",
        "1,2,3,4\n1,0,0.5,0.4\n0,1,0,0.3\n0.5,0,1.25,0\n0.4,0.3,0,1.5\n",
    );
    let out = bin()
        .args(["cone", "components", "--poset"])
        .arg(&poset)
        .arg("--matrix")
        .arg(&m)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let elements: Vec<&str> = v["components"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["element"].as_str().unwrap())
        .collect();
    assert_eq!(elements, vec!["1", "2", "4"]);
}

#[test]
fn structural_zero_violation_is_domain_error() {
    let dir = tempdir("structural");
    let poset = write(&dir, "ex2.poset", EX2);
    let m = write(
        &dir,
        "bad.csv",
        "1,2,3,4\n1,0.5,0,0\n0.5,1,0,0\n0,0,1,0\n0,0,0,1\n",
    );
    let out = bin()
        .args(["cone", "decompose", "--poset"])
        .arg(&poset)
        .arg("--matrix")
        .arg(&m)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("(1, 2)"), "{}", stderr(&out));
}

#[test]
fn laplace_at_zero_is_one() {
    let dir = tempdir("laplace");
    let poset = write(&dir, "ex2.poset", EX2);
    let out = bin()
        .args([
            "wishart", "laplace", "--lambda", "1,1,2,1", "--theta", "0", "--poset",
        ])
        .arg(&poset)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "1");
}

#[test]
fn invalid_multiplier_names_the_constraint() {
    let dir = tempdir("lambda");
    let poset = write(&dir, "ex2.poset", EX2);
    let out = bin()
        .args([
            "wishart",
            "laplace",
            "--lambda",
            "1,1,0.5,1",
            "--theta",
            "0",
            "--poset",
        ])
        .arg(&poset)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let e = stderr(&out);
    assert!(e.contains("lambda[2] = 0.5 must exceed 1"), "{e}");
    assert!(e.contains("lambda_3 > 1"), "{e}");
}

#[test]
fn sampling_is_deterministic_per_seed() {
    let dir = tempdir("sample");
    let poset = write(&dir, "ex2.poset", EX2);
    let run = |seed: &str| {
        let out = bin()
            .args([
                "wishart", "sample", "--lambda", "1,1,2,1", "--draws", "5", "--seed", seed,
                "--poset",
            ])
            .arg(&poset)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
        stdout(&out)
    };
    let a = run("11");
    let b = run("11");
    let c = run("12");
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(a.starts_with("x[1,1],x[2,2],x[3,1],x[3,2],x[3,3],x[4,2],x[4,4]\n"));
    assert_eq!(a.lines().count(), 6);
}

#[test]
fn sample_manifest_embeds_poset_hash() {
    let dir = tempdir("manifest");
    let poset = write(&dir, "ex2.poset", EX2);
    let outdir = dir.join("run");
    let out = bin()
        .args([
            "wishart", "sample", "--lambda", "1,1,2,1", "--draws", "3", "--seed", "5",
        ])
        .arg("--poset")
        .arg(&poset)
        .arg("--out")
        .arg(&outdir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(outdir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["seed"], 5);
    assert_eq!(manifest["draws"], 3);
    assert_eq!(
        manifest["poset_hash"].as_str().unwrap().len(),
        64,
        "sha-256 hex"
    );
    let samples = std::fs::read_to_string(outdir.join("samples.csv")).unwrap();
    assert_eq!(samples.lines().count(), 4);
}

#[test]
fn sample_accepts_a_scale_matrix() {
    let dir = tempdir("sigma");
    let poset = write(&dir, "ex2.poset", EX2);
    let sigma = write(
        &dir,
        "sigma.csv",
        "1,2,3,4\n2,0,0.6,0\n0,1,0.5,0.4\n0.6,0.5,2,0\n0,0.4,0,1.5\n",
    );
    let out = bin()
        .args([
            "wishart", "sample", "--lambda", "1,1,2,1", "--draws", "4", "--seed", "3",
        ])
        .arg("--poset")
        .arg(&poset)
        .arg("--sigma")
        .arg(&sigma)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 5);

    // A scale outside the cone is a domain error.
    let bad = write(
        &dir,
        "bad.csv",
        "1,2,3,4\n1,0,0,0\n0,-1,0,0\n0,0,1,0\n0,0,0,1\n",
    );
    let out = bin()
        .args([
            "wishart", "sample", "--lambda", "1,1,2,1", "--draws", "1", "--seed", "3",
        ])
        .arg("--poset")
        .arg(&poset)
        .arg("--sigma")
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn density_reduces_to_gamma_in_one_dimension() {
    let dir = tempdir("density");
    let poset = write(&dir, "one.poset", "1\n");
    let sigma = write(&dir, "sigma.csv", "1\n2.0\n");
    let x = write(&dir, "x.csv", "1\n1.3\n");
    let out = bin()
        .args(["wishart", "density", "--lambda", "2"])
        .arg("--poset")
        .arg(&poset)
        .arg("--sigma")
        .arg(&sigma)
        .arg("--matrix")
        .arg(&x)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    // Gamma(shape 2, rate 1) density at 1.3: rate = lambda / sigma = 1.
    let want = 1.3f64 * (-1.3f64).exp();
    assert!((v["density"].as_f64().unwrap() - want).abs() < 1e-12);
}

#[test]
fn characterize_quick_suite_runs_green() {
    let dir = tempdir("characterize");
    let poset = write(&dir, "chain2.poset", "01 < 02\n");
    let outdir = dir.join("reports");
    let out = bin()
        .args([
            "characterize",
            "run",
            "--lambda",
            "2,2",
            "--suite",
            "quick",
            "--seed",
            "6",
        ])
        .arg("--poset")
        .arg(&poset)
        .arg("--out")
        .arg(&outdir)
        .env("CONEWISH_THREADS", "2")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stdout: {} stderr: {}",
        stdout(&out),
        stderr(&out)
    );
    let s = stdout(&out);
    assert!(s.contains("pass entry-independence"), "{s}");
    assert!(s.contains("pass uv-independence"), "{s}");
    assert!(s.contains("suite: pass"), "{s}");
    let reports: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(outdir.join("reports.json")).unwrap())
            .unwrap();
    assert_eq!(reports["passed"], true);
}
