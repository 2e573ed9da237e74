//! cevlab: build conditional extreme value models, run convergence studies,
//! evaluate spectral formulas, and test coordinate changes.
//!
//! Exit codes: 0 success, 1 usage error, 2 verification failure.
//! Reports are deterministic for a fixed config; wall-clock metadata goes
//! to a `.meta.json` side file so the main artifacts stay byte-identical.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use cev_core::models::{self, asymptotic_independence_check, parse_model_spec};
use cev_core::montecarlo::{convergence_study, density_scaling_check, random_norming_check};
use cev_core::rv::{self, parse_function_spec};
use cev_core::spectral::{list_spectral, parse_spectral_spec, MuStar};
use cev_core::transforms::{change_coordinates, standardize_x};

#[derive(Parser)]
#[command(name = "cevlab", version, about = "conditional extreme value limits lab")]
struct Cli {
    /// Worker threads (default: available parallelism). Results are
    /// independent of this value.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// List registered models, functions, or spectral measures.
    List {
        #[arg(value_parser = ["models", "functions", "spectral"])]
        what: String,
    },
    /// Evaluate a spectral-measure formula.
    Spectral(SpectralArgs),
    /// Run a convergence study for a model and emit a verification report.
    Verify(VerifyArgs),
    /// Test a change of measurement units X -> h(X) for admissibility.
    CoordChange(CoordChangeArgs),
    /// Report the standardizing maps of a model's norming pair.
    Standardize(StandardizeArgs),
    /// Compare the randomly normed X among exceedances to its limit law.
    RandomNorm(RandomNormArgs),
    /// Joint-tail statistics: asymptotic independence diagnostics.
    Asymp(AsympArgs),
    /// Density-scaling check for models with an analytic joint density.
    DensityCheck(DensityCheckArgs),
}

#[derive(Args)]
struct SpectralArgs {
    /// Spectral spec, e.g. "uniform" or "atoms:0.25:1,0.75:1".
    #[arg(long)]
    s: String,
    #[arg(long, value_parser = ["hstar", "rect", "fubini", "grandom", "normalize"])]
    op: String,
    #[arg(long, default_value_t = 1.0)]
    x: f64,
    #[arg(long, default_value_t = 1.0)]
    y: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct VerifyArgs {
    /// Model spec, e.g. "bvn:0.5" or "mix1:p=0.5,theta=0.5".
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated decreasing exceedance probabilities.
    #[arg(long)]
    probs: Option<String>,
    /// Mixture/logistic parameter overrides for bare model heads.
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    /// Fail (exit 2) when the final KS exceeds this bound.
    #[arg(long, default_value_t = 0.2)]
    ks_max: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// JSON config file mirroring these flags; explicit flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct CoordChangeArgs {
    #[arg(long)]
    model: String,
    /// Function spec for h, e.g. "exp" or "compose:log,normal_binv".
    #[arg(long)]
    h: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StandardizeArgs {
    #[arg(long)]
    model: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RandomNormArgs {
    #[arg(long)]
    model: String,
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.01)]
    prob: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AsympArgs {
    #[arg(long)]
    model: String,
    #[arg(long, default_value_t = 1_000_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    prob: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DensityCheckArgs {
    /// "bvn-pareto:<rho>" or "product-pareto".
    #[arg(long)]
    model: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// JSON config mirroring the verify flags.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
struct ExperimentConfig {
    model: Option<String>,
    n: Option<usize>,
    seed: Option<u64>,
    probs: Option<Vec<f64>>,
    theta: Option<f64>,
    p: Option<f64>,
    ks_max: Option<f64>,
    out: Option<PathBuf>,
    format: Option<String>,
    workers: Option<usize>,
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}

fn write_outputs(
    out: &Option<PathBuf>,
    json: &str,
    csv: Option<&str>,
) -> std::io::Result<()> {
    if let Some(path) = out {
        std::fs::write(path, json)?;
        if let Some(csv) = csv {
            std::fs::write(path.with_extension("csv"), csv)?;
        }
        // wall-clock metadata lives outside the deterministic artifacts
        let meta = serde_json::json!({
            "written_unix_ms": std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_millis() as u64)
                .unwrap_or(0),
        });
        std::fs::write(
            path.with_extension("meta.json"),
            serde_json::to_string_pretty(&meta).expect("meta serializes"),
        )?;
    }
    Ok(())
}

fn model_spec_with_overrides(spec: &str, theta: Option<f64>, p: Option<f64>) -> String {
    if spec.contains(':') {
        return spec.to_string();
    }
    match (spec, theta, p) {
        ("mix1" | "mix2", Some(t), Some(pp)) => format!("{spec}:p={pp},theta={t}"),
        ("mix3", Some(t), _) => format!("{spec}:theta={t}"),
        ("logistic", Some(t), _) => format!("{spec}:{t}"),
        _ => spec.to_string(),
    }
}

fn run_verify(args: VerifyArgs) -> ExitCode {
    // merge config file (flags win)
    let cfg: ExperimentConfig = match &args.config {
        Some(path) => match std::fs::read_to_string(path)
            .map_err(|e| e.to_string())
            .and_then(|s| serde_json::from_str(&s).map_err(|e| e.to_string()))
        {
            Ok(c) => c,
            Err(e) => return usage_error(&format!("config {}: {e}", path.display())),
        },
        None => ExperimentConfig::default(),
    };

    let spec = match args.model.clone().or(cfg.model.clone()) {
        Some(s) => s,
        None => return usage_error("--model (or a config file with \"model\") is required"),
    };
    let n = args.n.or(cfg.n).unwrap_or(2_000_000);
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let ks_max = if args.ks_max != 0.2 { args.ks_max } else { cfg.ks_max.unwrap_or(0.2) };
    let probs: Vec<f64> = match args.probs {
        Some(s) => {
            let parsed: Result<Vec<f64>, _> = s.split(',').map(|p| p.trim().parse()).collect();
            match parsed {
                Ok(v) => v,
                Err(_) => return usage_error("could not parse --probs"),
            }
        }
        None => cfg.probs.clone().unwrap_or_else(|| vec![1e-1, 1e-2, 1e-3]),
    };
    if n < 1_000 {
        return usage_error("n must be at least 1000");
    }
    if probs.is_empty() || probs.iter().any(|&p| p <= 20.0 / n as f64 || p >= 1.0) {
        return usage_error("each exceedance probability must lie in (20/n, 1)");
    }

    let spec = model_spec_with_overrides(&spec, args.theta.or(cfg.theta), args.p.or(cfg.p));
    let model = match parse_model_spec(&spec) {
        Ok(m) => m,
        Err(e) => return usage_error(&e.to_string()),
    };
    let report = match convergence_study(&model, &probs, n, seed) {
        Ok(r) => r,
        Err(e) => return usage_error(&e.to_string()),
    };

    let json = report.to_json();
    let csv = report.to_csv();
    match args.format {
        Format::Json => println!("{json}"),
        Format::Csv => print!("{csv}"),
    }
    let out = args.out.or(cfg.out);
    if let Err(e) = write_outputs(&out, &json, Some(&csv)) {
        return usage_error(&format!("writing outputs: {e}"));
    }
    if report.verification_failed(ks_max) {
        eprintln!("verification failed: {:?}", report.notes);
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}

fn run_spectral(args: SpectralArgs) -> ExitCode {
    if args.op != "normalize" && (args.x <= 0.0 || args.y <= 0.0) {
        return usage_error("--x and --y must be positive");
    }
    let s = match parse_spectral_spec(&args.s) {
        Ok(s) => s,
        Err(e) => return usage_error(&e.to_string()),
    };
    let mu = MuStar::new(s.clone());
    let value = match args.op.as_str() {
        "hstar" => mu.h_star(args.x),
        "rect" => mu.rect(args.x, args.y),
        "fubini" => mu.rect_fubini(args.x, args.y),
        "grandom" => mu.g_random_norm(args.x),
        "normalize" => Ok(s.first_moment_complement()),
        _ => unreachable!("clap validates op"),
    };
    let value = match value {
        Ok(v) => v,
        Err(e) => return usage_error(&e.to_string()),
    };
    let json = serde_json::json!({
        "schema": 1,
        "op": args.op,
        "s": args.s,
        "x": args.x,
        "y": args.y,
        "value": value,
        "spectral": s.to_json(),
    });
    let text = serde_json::to_string_pretty(&json).expect("serializes");
    println!("{text}");
    if let Err(e) = write_outputs(&args.out, &text, None) {
        return usage_error(&format!("writing outputs: {e}"));
    }
    ExitCode::SUCCESS
}

fn run_coord_change(args: CoordChangeArgs) -> ExitCode {
    let model = match parse_model_spec(&args.model) {
        Ok(m) => m,
        Err(e) => return usage_error(&e.to_string()),
    };
    let h = match parse_function_spec(&args.h) {
        Ok(h) => h,
        Err(e) => return usage_error(&e.to_string()),
    };
    let limit = model.limit_cdf.clone();
    let cc = match change_coordinates(&h, &model.norming, limit) {
        Ok(cc) => cc,
        Err(e) => return usage_error(&e.to_string()),
    };
    let mut report = cc.report();
    report["model"] = serde_json::json!(model.name);
    let text = serde_json::to_string_pretty(&report).expect("serializes");
    println!("{text}");
    if let Err(e) = write_outputs(&args.out, &text, None) {
        return usage_error(&format!("writing outputs: {e}"));
    }
    ExitCode::SUCCESS
}

fn run_standardize(args: StandardizeArgs) -> ExitCode {
    let model = match parse_model_spec(&args.model) {
        Ok(m) => m,
        Err(e) => return usage_error(&e.to_string()),
    };
    let x_result = standardize_x(&model.norming, model.norming.psi_class);
    let report = match x_result {
        Ok(s) => serde_json::json!({
            "schema": 1,
            "model": model.name,
            "y_map": model.y_standardizer.map.name(),
            "x_standardizable": true,
            "x_direction": format!("{:?}", s.direction),
            "x_map": s.map.name(),
            "provenance": s.provenance,
        }),
        Err(e) => serde_json::json!({
            "schema": 1,
            "model": model.name,
            "y_map": model.y_standardizer.map.name(),
            "x_standardizable": false,
            "reason": e.to_string(),
        }),
    };
    let text = serde_json::to_string_pretty(&report).expect("serializes");
    println!("{text}");
    if let Err(e) = write_outputs(&args.out, &text, None) {
        return usage_error(&format!("writing outputs: {e}"));
    }
    ExitCode::SUCCESS
}

fn run_random_norm(args: RandomNormArgs) -> ExitCode {
    let model = match parse_model_spec(&args.model) {
        Ok(m) => m,
        Err(e) => return usage_error(&e.to_string()),
    };
    match random_norming_check(&model, args.prob, args.n, args.seed) {
        Ok(rep) => {
            let text = serde_json::to_string_pretty(&rep).expect("serializes");
            println!("{text}");
            if let Err(e) = write_outputs(&args.out, &text, None) {
                return usage_error(&format!("writing outputs: {e}"));
            }
            ExitCode::SUCCESS
        }
        Err(e) => usage_error(&e.to_string()),
    }
}

fn run_asymp(args: AsympArgs) -> ExitCode {
    let model = match parse_model_spec(&args.model) {
        Ok(m) => m,
        Err(e) => return usage_error(&e.to_string()),
    };
    let rep = asymptotic_independence_check(&model, args.prob, args.n, args.seed);
    let text = serde_json::to_string_pretty(&rep).expect("serializes");
    println!("{text}");
    if let Err(e) = write_outputs(&args.out, &text, None) {
        return usage_error(&format!("writing outputs: {e}"));
    }
    ExitCode::SUCCESS
}

fn run_density_check(args: DensityCheckArgs) -> ExitCode {
    let dm = if args.model == "product-pareto" {
        models::product_pareto_density_model()
    } else if let Some(rest) = args.model.strip_prefix("bvn-pareto:") {
        match rest.parse::<f64>() {
            Ok(rho) => models::bvn_pareto_density_model(rho),
            Err(_) => return usage_error("could not parse rho in bvn-pareto:<rho>"),
        }
    } else {
        return usage_error("density models: bvn-pareto:<rho>, product-pareto");
    };
    let dm = match dm {
        Ok(dm) => dm,
        Err(e) => return usage_error(&e.to_string()),
    };
    let u_grid: Vec<f64> = (0..121).map(|i| -4.0 + i as f64 * 0.05).collect();
    let rep = match density_scaling_check(&dm, &[1e2, 1e3, 1e4], &u_grid, &[1.0, 2.0, 5.0]) {
        Ok(r) => r,
        Err(e) => return usage_error(&e.to_string()),
    };
    let text = serde_json::to_string_pretty(&rep).expect("serializes");
    println!("{text}");
    if let Err(e) = write_outputs(&args.out, &text, None) {
        return usage_error(&format!("writing outputs: {e}"));
    }
    ExitCode::SUCCESS
}

fn run_list(what: &str) -> ExitCode {
    let items: Vec<&str> = match what {
        "models" => models::list_models(),
        "functions" => rv::list_functions(),
        "spectral" => list_spectral(),
        _ => unreachable!("clap validates"),
    };
    for item in items {
        println!("{item}");
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are successes; bad flags are usage errors
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };

    if let Some(workers) = cli.workers {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .is_err()
        {
            // pool already initialized; results do not depend on it
        }
    }

    match cli.cmd {
        Cmd::List { what } => run_list(&what),
        Cmd::Spectral(args) => run_spectral(args),
        Cmd::Verify(args) => run_verify(args),
        Cmd::CoordChange(args) => run_coord_change(args),
        Cmd::Standardize(args) => run_standardize(args),
        Cmd::RandomNorm(args) => run_random_norm(args),
        Cmd::Asymp(args) => run_asymp(args),
        Cmd::DensityCheck(args) => run_density_check(args),
    }
}
