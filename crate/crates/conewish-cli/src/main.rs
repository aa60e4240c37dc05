//! Command-line front end: poset reports, axiom verification, cone
//! factorizations, Wishart sampling and evaluation, and the Monte-Carlo
//! characterization suite.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 domain error (outside
//! the cone, inadmissible multiplier, non-unique Hasse paths), 3 statistical
//! suite failure.

use clap::{Args, Parser, Subcommand};
use conewish::algebra::verify_axioms;
use conewish::characterize::{run_suite, TestConfig};
use conewish::cone::{component_decomposition, ConeError, ConePoint, DualPoint};
use conewish::io;
use conewish::poset::Poset;
use conewish::wishart::{Multiplier, WishartModel};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Parser)]
#[command(
    name = "conewish",
    version,
    about = "Cones generated by finite posets and the Wishart family on them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect a poset: order structure, sources, separators, multiplier domain.
    Poset {
        #[command(subcommand)]
        action: PosetAction,
    },
    /// Verify the multiplication axioms on random matrices.
    Algebra {
        #[command(subcommand)]
        action: AlgebraAction,
    },
    /// Factor cone points and split them into components.
    Cone {
        #[command(subcommand)]
        action: ConeAction,
    },
    /// Sample from the Wishart family and evaluate its density and
    /// Laplace transform.
    Wishart {
        #[command(subcommand)]
        action: WishartAction,
    },
    /// Run the Monte-Carlo characterization suite.
    Characterize {
        #[command(subcommand)]
        action: CharacterizeAction,
    },
}

#[derive(Subcommand)]
enum PosetAction {
    /// Report and fail (exit 2) when Hasse paths are not unique.
    Check(PosetArgs),
    /// Report only.
    Describe(PosetArgs),
}

#[derive(Args)]
struct PosetArgs {
    /// Poset file (`a < b` lines or JSON).
    #[arg(long)]
    poset: PathBuf,
}

#[derive(Subcommand)]
enum AlgebraAction {
    /// Check the six multiplication axioms on random matrices.
    Verify {
        #[arg(long)]
        poset: PathBuf,
        /// Random triples per axiom.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Relative residual tolerance.
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
    },
}

#[derive(Subcommand)]
enum ConeAction {
    /// Factor a Hermitian matrix as T1 D T1*.
    Decompose {
        #[arg(long)]
        poset: PathBuf,
        /// Matrix file (CSV with label header, or JSON).
        #[arg(long)]
        matrix: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split a cone point into its up-set components.
    Components {
        #[arg(long)]
        poset: PathBuf,
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    poset: PathBuf,
    /// Comma-separated multiplier entries, one per element in layout order.
    #[arg(long)]
    lambda: String,
    /// Scale: `standard` for e^chi, or a matrix file.
    #[arg(long, default_value = "standard")]
    sigma: String,
}

#[derive(Subcommand)]
enum WishartAction {
    /// Draw samples; write CSV (and a manifest when --out is given).
    Sample {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1000)]
        draws: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Output directory for samples.csv and manifest.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the (log) density at a point.
    Density {
        #[command(flatten)]
        model: ModelArgs,
        /// The evaluation point, a matrix file.
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Evaluate the Laplace transform at a dual point.
    Laplace {
        #[command(flatten)]
        model: ModelArgs,
        /// `0` for the origin, or a matrix file.
        #[arg(long)]
        theta: String,
    },
}

#[derive(Subcommand)]
enum CharacterizeAction {
    /// Run the suite; exit 3 if any verdict fails.
    Run {
        #[arg(long)]
        poset: PathBuf,
        #[arg(long)]
        lambda: String,
        /// Second multiplier for the paired tests; defaults to --lambda.
        #[arg(long)]
        lambda2: Option<String>,
        /// `standard` (1e4 draws) or `quick` (2e3 draws).
        #[arg(long, default_value = "standard")]
        suite: String,
        #[arg(long)]
        draws: Option<usize>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Level for the KS and permutation verdicts.
        #[arg(long, default_value_t = 0.01)]
        tolerance: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Domain(String),
    Stats(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Domain(_) => 2,
            Failure::Stats(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Domain(m) | Failure::Stats(m) => m,
        }
    }
}

impl From<io::IoError> for Failure {
    fn from(e: io::IoError) -> Self {
        match e {
            io::IoError::StructuralZero { .. } => Failure::Domain(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<ConeError> for Failure {
    fn from(e: ConeError) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<conewish::wishart::WishartError> for Failure {
    fn from(e: conewish::wishart::WishartError) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<conewish::characterize::CharacterizeError> for Failure {
    fn from(e: conewish::characterize::CharacterizeError) -> Self {
        Failure::Domain(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not failures.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Poset { action } => match action {
            PosetAction::Check(args) => poset_report(&args.poset, true),
            PosetAction::Describe(args) => poset_report(&args.poset, false),
        },
        Command::Algebra { action } => match action {
            AlgebraAction::Verify {
                poset,
                trials,
                seed,
                tolerance,
            } => algebra_verify(&poset, trials, seed, tolerance),
        },
        Command::Cone { action } => match action {
            ConeAction::Decompose { poset, matrix, out } => cone_decompose(&poset, &matrix, out),
            ConeAction::Components { poset, matrix, out } => cone_components(&poset, &matrix, out),
        },
        Command::Wishart { action } => match action {
            WishartAction::Sample {
                model,
                draws,
                seed,
                out,
            } => wishart_sample(&model, draws, seed, out),
            WishartAction::Density { model, matrix } => wishart_density(&model, &matrix),
            WishartAction::Laplace { model, theta } => wishart_laplace(&model, &theta),
        },
        Command::Characterize { action } => match action {
            CharacterizeAction::Run {
                poset,
                lambda,
                lambda2,
                suite,
                draws,
                seed,
                tolerance,
                out,
            } => characterize_run(
                &poset,
                &lambda,
                lambda2.as_deref(),
                &suite,
                draws,
                seed,
                tolerance,
                out,
            ),
        },
    }
}

fn load_poset(path: &Path) -> Result<Arc<Poset>, Failure> {
    Ok(Arc::new(io::load_poset(path)?))
}

fn parse_lambda(s: &str, poset: &Poset) -> Result<Multiplier<f64>, Failure> {
    let values = s
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|e| Failure::Usage(format!("bad multiplier entry `{x}`: {e}")))
        })
        .collect::<Result<Vec<f64>, _>>()?;
    if values.len() != poset.len() {
        return Err(Failure::Usage(format!(
            "--lambda has {} entries but the poset has {} elements (order: {})",
            values.len(),
            poset.len(),
            poset.labels().join(", ")
        )));
    }
    let chi = Multiplier::new(values).map_err(|e| Failure::Domain(e.to_string()))?;
    chi.validate(poset)
        .map_err(|e| Failure::Domain(format!("{e}; domain: {}", domain_string(poset))))?;
    Ok(chi)
}

fn half_string(k: usize) -> String {
    if k % 2 == 0 {
        format!("{}", k / 2)
    } else {
        format!("{k}/2")
    }
}

fn domain_string(poset: &Poset) -> String {
    let dims = poset.dims();
    (0..poset.len())
        .map(|i| format!("lambda_{} > {}", poset.label(i), half_string(dims.preds[i])))
        .collect::<Vec<_>>()
        .join(", ")
}

fn set_string(poset: &Poset, set: &[usize]) -> String {
    let names: Vec<&str> = set.iter().map(|&i| poset.label(i)).collect();
    format!("{{{}}}", names.join(", "))
}

fn poset_report(path: &Path, check: bool) -> Result<(), Failure> {
    let poset = load_poset(path)?;
    println!("{poset}");
    println!("elements (layout order): {}", poset.labels().join(", "));
    let witness = poset.path_witness();
    match witness {
        None => println!("unique-path condition: ok"),
        Some(w) => {
            let path_str = |p: &[usize]| {
                p.iter()
                    .map(|&i| poset.label(i).to_string())
                    .collect::<Vec<_>>()
                    .join(" -> ")
            };
            println!(
                "unique-path condition: VIOLATED between {} and {}",
                poset.label(w.lower),
                poset.label(w.upper)
            );
            println!("  path A: {}", path_str(&w.path_a));
            println!("  path B: {}", path_str(&w.path_b));
        }
    }
    println!("sources: {}", set_string(&poset, &poset.sources()));
    println!(
        "minimal elements: {}",
        set_string(&poset, &poset.minimal_elements())
    );
    let seps = poset.separators();
    for i in 0..poset.len() {
        if !seps.per_element[i].is_empty() {
            println!(
                "separators above {}: {}",
                poset.label(i),
                set_string(&poset, &seps.per_element[i])
            );
        }
    }
    println!("minimal separators: {}", set_string(&poset, &seps.minimal));
    let dims = poset.dims();
    println!("element  preds  succs    n_i");
    for i in 0..poset.len() {
        println!(
            "{:>7} {:>6} {:>6} {:>6.1}",
            poset.label(i),
            dims.preds[i],
            dims.succs[i],
            dims.n_i[i]
        );
    }
    println!("total dimension weight: {}", dims.n_total);
    println!("multiplier domain: {}", domain_string(&poset));
    println!("content hash: {}", poset.content_hash());
    if check && witness.is_some() {
        return Err(Failure::Domain(
            "poset has non-unique Hasse paths".to_string(),
        ));
    }
    Ok(())
}

fn algebra_verify(path: &Path, trials: usize, seed: u64, tolerance: f64) -> Result<(), Failure> {
    let poset = load_poset(path)?;
    let reports = verify_axioms::<f64>(&poset, trials.max(1), seed, tolerance);
    println!("axiom  max residual  verdict");
    let mut all_pass = true;
    for r in &reports {
        println!(
            "{:>5}  {:>12.3e}  {}",
            r.axiom.roman(),
            r.max_residual,
            if r.pass { "pass" } else { "FAIL" }
        );
        if let Some(w) = &r.witness {
            if let Some((i, j)) = w.entry {
                println!(
                    "       worst at trial {}, entry ({}, {})",
                    w.trial,
                    poset.label(i),
                    poset.label(j)
                );
            }
        }
        all_pass &= r.pass;
    }
    if !all_pass {
        return Err(Failure::Domain("an axiom failed".to_string()));
    }
    Ok(())
}

fn emit(out: Option<PathBuf>, name: &str, content: &str) -> Result<(), Failure> {
    match out {
        None => {
            println!("{content}");
            Ok(())
        }
        Some(dir) => {
            std::fs::create_dir_all(&dir).map_err(|e| Failure::Usage(e.to_string()))?;
            let path = dir.join(name);
            std::fs::write(&path, content).map_err(|e| Failure::Usage(e.to_string()))?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn cone_decompose(
    poset_path: &Path,
    matrix_path: &Path,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let poset = load_poset(poset_path)?;
    let x = io::load_matrix::<f64>(matrix_path, &poset)?;
    let point = ConePoint::decompose(&x).map_err(|e| match e {
        ConeError::NotInCone { index } => Failure::Domain(format!(
            "not in the cone: pivot at element `{}` is not positive",
            poset.label(index)
        )),
        other => Failure::Domain(other.to_string()),
    })?;
    let t1 = point.factor().unit_lower();
    let report = json!({
        "labels": poset.labels(),
        "unit_lower": (0..poset.len())
            .map(|i| (0..poset.len()).map(|j| t1.get(i, j)).collect::<Vec<f64>>())
            .collect::<Vec<_>>(),
        "diag": point.generalized_powers(),
    });
    emit(
        out,
        "decomposition.json",
        &serde_json::to_string_pretty(&report).unwrap(),
    )
}

fn cone_components(
    poset_path: &Path,
    matrix_path: &Path,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let poset = load_poset(poset_path)?;
    let x = io::load_matrix::<f64>(matrix_path, &poset)?;
    let point = ConePoint::decompose(&x)?;
    let comps = component_decomposition(&point);
    let report = json!({
        "labels": poset.labels(),
        "components": comps
            .iter()
            .map(|c| {
                json!({
                    "element": poset.label(c.element),
                    "matrix": (0..poset.len())
                        .map(|i| (0..poset.len())
                            .map(|j| c.matrix.get(i, j))
                            .collect::<Vec<f64>>())
                        .collect::<Vec<_>>(),
                })
            })
            .collect::<Vec<_>>(),
    });
    emit(
        out,
        "components.json",
        &serde_json::to_string_pretty(&report).unwrap(),
    )
}

struct Model {
    model: WishartModel<f64>,
    sigma_desc: String,
}

fn build_model(args: &ModelArgs) -> Result<(Arc<Poset>, Model), Failure> {
    let poset = load_poset(&args.poset)?;
    let chi = parse_lambda(&args.lambda, &poset)?;
    let (model, sigma_desc) = if args.sigma == "standard" {
        (WishartModel::standard(chi, &poset)?, "standard".to_string())
    } else {
        let m = io::load_matrix::<f64>(Path::new(&args.sigma), &poset)?;
        let sigma = ConePoint::decompose(&m)?;
        (WishartModel::new(chi, sigma)?, args.sigma.clone())
    };
    Ok((poset, Model { model, sigma_desc }))
}

fn threads_from_env() -> Option<usize> {
    std::env::var("CONEWISH_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
}

fn wishart_sample(
    args: &ModelArgs,
    draws: usize,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let (poset, m) = build_model(args)?;
    let mut csv = io::sample_header(&poset);
    csv.push('\n');
    for k in 0..draws {
        let mut rng = conewish::rng::stream(seed, k as u64);
        let x = m.model.sample(&mut rng);
        csv.push_str(&io::sample_row(&x));
        csv.push('\n');
    }
    let manifest = json!({
        "command": "wishart sample",
        "poset": args.poset.display().to_string(),
        "poset_hash": poset.content_hash(),
        "labels": poset.labels(),
        "lambda": m.model.chi().lambdas(),
        "sigma": m.sigma_desc,
        "seed": seed,
        "draws": draws,
        "columns": io::sample_header(&poset),
        "version": env!("CARGO_PKG_VERSION"),
    });
    match out {
        None => {
            print!("{csv}");
            Ok(())
        }
        Some(dir) => {
            std::fs::create_dir_all(&dir).map_err(|e| Failure::Usage(e.to_string()))?;
            std::fs::write(dir.join("samples.csv"), &csv)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            std::fs::write(
                dir.join("manifest.json"),
                serde_json::to_string_pretty(&manifest).unwrap(),
            )
            .map_err(|e| Failure::Usage(e.to_string()))?;
            eprintln!("wrote {}/samples.csv and manifest.json", dir.display());
            Ok(())
        }
    }
}

fn wishart_density(args: &ModelArgs, matrix: &Path) -> Result<(), Failure> {
    let (poset, m) = build_model(args)?;
    let x = io::load_matrix::<f64>(matrix, &poset)?;
    let point = ConePoint::decompose(&x)?;
    let log_density = m.model.log_density(&point);
    let report = json!({
        "log_density": log_density,
        "density": log_density.exp(),
        "generalized_powers": point.generalized_powers(),
    });
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    Ok(())
}

fn wishart_laplace(args: &ModelArgs, theta: &str) -> Result<(), Failure> {
    let (poset, m) = build_model(args)?;
    let theta_matrix = if theta == "0" {
        conewish::StructuredMatrixF64::zeros(&poset)
    } else {
        let t = io::load_matrix::<f64>(Path::new(theta), &poset)?;
        // The transform needs theta + sigma^{-chi} inside the dual cone;
        // requiring theta itself to be dual-feasible (or zero) keeps the
        // query meaningful.
        DualPoint::decompose(&t)?;
        t
    };
    let value = m.model.laplace_transform(&theta_matrix)?;
    println!("{value}");
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn characterize_run(
    poset_path: &Path,
    lambda: &str,
    lambda2: Option<&str>,
    suite: &str,
    draws: Option<usize>,
    seed: u64,
    tolerance: f64,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let poset = load_poset(poset_path)?;
    let chi = parse_lambda(lambda, &poset)?;
    let chi2 = match lambda2 {
        Some(s) => parse_lambda(s, &poset)?,
        None => chi.clone(),
    };
    let default_draws = match suite {
        "standard" => 10_000,
        "quick" => 2_000,
        other => {
            return Err(Failure::Usage(format!(
                "unknown suite `{other}` (expected `standard` or `quick`)"
            )))
        }
    };
    if !(0.0..1.0).contains(&tolerance) {
        return Err(Failure::Usage("tolerance must be in (0, 1)".to_string()));
    }
    let cfg = TestConfig {
        n_draws: draws.unwrap_or(default_draws),
        seed,
        level: tolerance,
        threads: threads_from_env(),
        ..TestConfig::default()
    };
    let suite_report = run_suite(&chi, &chi2, &poset, &cfg)?;
    print!("{}", suite_report.text_summary());
    if let Some(dir) = out {
        std::fs::create_dir_all(&dir).map_err(|e| Failure::Usage(e.to_string()))?;
        std::fs::write(
            dir.join("reports.json"),
            serde_json::to_string_pretty(&suite_report).unwrap(),
        )
        .map_err(|e| Failure::Usage(e.to_string()))?;
        let manifest = json!({
            "command": "characterize run",
            "poset": poset_path.display().to_string(),
            "poset_hash": poset.content_hash(),
            "lambda": chi.lambdas(),
            "lambda2": chi2.lambdas(),
            "suite": suite,
            "seed": seed,
            "draws": cfg.n_draws,
            "version": env!("CARGO_PKG_VERSION"),
        });
        std::fs::write(
            dir.join("manifest.json"),
            serde_json::to_string_pretty(&manifest).unwrap(),
        )
        .map_err(|e| Failure::Usage(e.to_string()))?;
        eprintln!("wrote {}/reports.json and manifest.json", dir.display());
    }
    if !suite_report.passed {
        return Err(Failure::Stats("characterization suite failed".to_string()));
    }
    Ok(())
}
