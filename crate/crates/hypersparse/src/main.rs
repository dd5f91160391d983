use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use hypersparse::balancing::{
    check_assignment, greedy_approx_balance, greedy_balance, separated_approx_balance,
    BalanceParams,
};
use hypersparse::generate::{generate, separated_weights, Model};
use hypersparse::hmtx;
use hypersparse::hypergraph::Hypergraph;
use hypersparse::sampling::{
    fast_sparsify, importance_sparsify, poly_size_sparsify, SamplingConfig, SparsifierOutput,
};
use hypersparse::verify::{cut_check, probe_check, VerificationReport, CUT_ENUM_MAX_VERTICES};

#[derive(Parser)]
#[command(
    name = "hypersparse",
    about = "Spectral sparsification of weighted hypergraphs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded instance and write it as .hmtx
    Gen(GenArgs),
    /// Construct a balanced weight assignment and report on it
    Balance(BalanceArgs),
    /// Sparsify an instance
    Sparsify(SparsifyArgs),
    /// Check a sparsifier against its source instance
    Verify(VerifyArgs),
    /// Print summary statistics of an instance
    Stats(StatsArgs),
}

#[derive(Args)]
struct GenArgs {
    /// uniform-random | planted-clique-union | path-plus-hyperedges | separated-weights
    #[arg(long)]
    model: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 4)]
    rank: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Class separation for separated-weights (default n^10)
    #[arg(long)]
    beta: Option<f64>,
    /// Number of weight classes for separated-weights
    #[arg(long, default_value_t = 2)]
    classes: usize,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the class manifest of separated-weights (JSON)
    #[arg(long)]
    classes_out: Option<PathBuf>,
}

#[derive(Args)]
struct BalanceArgs {
    #[arg(long)]
    input: PathBuf,
    /// exact | approx | separated
    #[arg(long, default_value = "approx")]
    mode: String,
    #[arg(long, default_value_t = 4.0)]
    gamma: f64,
    /// Balance threshold; defaults to 1/n²
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    max_rounds: Option<u64>,
    /// Class manifest (JSON list of lists) for --mode separated
    #[arg(long)]
    classes: Option<PathBuf>,
    /// Intra-class spread bound for --mode separated (default n^10)
    #[arg(long)]
    alpha: Option<f64>,
    /// Inter-class separation for --mode separated (default n^10)
    #[arg(long)]
    beta: Option<f64>,
    /// Write the assignment as "hyperedge u v weight" lines
    #[arg(long)]
    dump_assignment: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SparsifyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    /// full | importance | poly
    #[arg(long, default_value = "full")]
    pipeline: String,
    #[arg(long, default_value_t = 1.0)]
    lambda_scale: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4.0)]
    gamma: f64,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    max_rounds: Option<u64>,
    /// Output path for the sparsifier (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    sparsifier: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    /// Random probes per family (Gaussian, Rademacher, two-sparse)
    #[arg(long, default_value_t = 200)]
    probes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also run exhaustive cut enumeration and fold it into the verdict
    #[arg(long)]
    cuts: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Balance(args) => cmd_balance(args),
        Command::Sparsify(args) => cmd_sparsify(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Stats(args) => cmd_stats(args),
    }
}

fn load(path: &PathBuf) -> Result<Hypergraph, Box<dyn std::error::Error>> {
    let text = fs::read_to_string(path)?;
    let (h, diag) = hmtx::parse(&text)?;
    for w in &diag.warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(h)
}

fn emit(path: &Option<PathBuf>, text: &str) -> Result<(), Box<dyn std::error::Error>> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let model: Model = args.model.parse()?;
    let inst = match model {
        Model::SeparatedWeights => {
            let beta = args.beta.unwrap_or_else(|| (args.n as f64).powi(10));
            separated_weights(args.n, args.m, args.rank, beta, args.classes, args.seed)?
        }
        _ => generate(model, args.n, args.m, args.rank, args.seed)?,
    };
    emit(&args.out, &hmtx::serialize(&inst.hypergraph))?;
    if let Some(classes) = &inst.classes {
        let manifest = serde_json::to_string(classes)?;
        match &args.classes_out {
            Some(p) => fs::write(p, manifest)?,
            None => eprintln!("classes: {manifest}"),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_balance(args: BalanceArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let h = load(&args.input)?;
    let eta = args.eta.unwrap_or(1.0 / (h.n as f64 * h.n as f64));
    let params = BalanceParams {
        gamma: args.gamma,
        eta,
        max_rounds: args.max_rounds,
        rebuild_cadence: None,
    };
    let (run, check_gamma) = match args.mode.as_str() {
        "exact" => {
            let p = BalanceParams { eta: 0.0, ..params };
            (greedy_balance(&h, &p)?, args.gamma)
        }
        "approx" => (greedy_approx_balance(&h, &params)?, args.gamma),
        "separated" => {
            let path = args
                .classes
                .as_ref()
                .ok_or("--mode separated requires --classes <manifest.json>")?;
            let classes: Vec<Vec<usize>> = serde_json::from_str(&fs::read_to_string(path)?)?;
            let alpha = args.alpha.unwrap_or_else(|| (h.n as f64).powi(10));
            let beta = args.beta.unwrap_or_else(|| (h.n as f64).powi(10));
            (
                separated_approx_balance(&h, &classes, alpha, beta, &params)?,
                2.0 * args.gamma,
            )
        }
        other => return Err(format!("unknown mode '{other}'").into()),
    };
    let eta_check = if args.mode == "exact" { 0.0 } else { eta };
    let check = check_assignment(&run.assignment, check_gamma, eta_check)?;
    if let Some(path) = &args.dump_assignment {
        let mut out = String::new();
        for (e_idx, slots) in run.assignment.clique_index.iter().enumerate() {
            for &s in slots {
                let ge = run.assignment.graph.edges[s];
                out.push_str(&format!("{e_idx} {} {} {}\n", ge.u, ge.v, ge.weight));
            }
        }
        fs::write(path, out)?;
    }
    if args.json {
        println!(
            "{}",
            json!({
                "rounds": run.rounds,
                "psi_gain": run.psi_gain,
                "balanced": check.balanced,
                "check_gamma": check_gamma,
                "eta": eta_check,
                "worst_ratio": check.worst.as_ref().map(|v| v.ratio()),
            })
        );
    } else {
        println!("rounds = {}", run.rounds);
        println!("psi_gain = {}", run.psi_gain);
        println!(
            "balanced = {} (gamma = {check_gamma}, eta = {eta_check})",
            check.balanced
        );
        if let Some(v) = &check.worst {
            println!("worst_ratio = {}", v.ratio());
        }
    }
    Ok(if check.balanced {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn cmd_sparsify(args: SparsifyArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let h = load(&args.input)?;
    let mut cfg = SamplingConfig::new(args.eps, args.seed);
    cfg.lambda_scale = args.lambda_scale;
    cfg.c = args.c;
    cfg.gamma = args.gamma;
    cfg.eta = args.eta;
    cfg.max_rounds = args.max_rounds;
    let out: SparsifierOutput = match args.pipeline.as_str() {
        "full" => fast_sparsify(&h, &cfg)?,
        "poly" => poly_size_sparsify(&h, &cfg)?,
        "importance" => {
            let params = BalanceParams {
                gamma: cfg.gamma,
                eta: cfg.eta_for(h.n),
                max_rounds: cfg.max_rounds,
                rebuild_cadence: cfg.rebuild_cadence,
            };
            let run = greedy_approx_balance(&h, &params)?;
            importance_sparsify(&run.assignment, &cfg)?
        }
        other => return Err(format!("unknown pipeline '{other}'").into()),
    };
    emit(&args.out, &hmtx::serialize(&out.sparsifier))?;
    let report = json!({
        "input_edges": h.edges.len(),
        "kept_edges": out.kept_count(),
        "expected_size": out.expected_size(),
        "seed": out.seed,
    });
    if args.json {
        println!("{report}");
    } else {
        eprintln!(
            "kept {} of {} hyperedges (expected {:.2}), seed {}",
            out.kept_count(),
            h.edges.len(),
            out.expected_size(),
            out.seed
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn report_json(r: &VerificationReport, cuts: usize) -> serde_json::Value {
    json!({
        "worst_over": r.max_over_ratio,
        "worst_under": r.min_under_ratio,
        "probes": r.probes,
        "cuts": cuts,
        "pass": r.pass,
        "seed": r.seed,
    })
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let h = load(&args.input)?;
    let sp = load(&args.sparsifier)?;
    let mut report = probe_check(&h, &sp, args.eps, args.probes, args.seed)?;
    let mut cuts = report.cuts;
    if args.cuts && report.cuts == 0 {
        if h.n <= CUT_ENUM_MAX_VERTICES {
            let cc = cut_check(&h, &sp)?;
            cuts += cc.cuts;
            report.max_over_ratio = report.max_over_ratio.max(cc.max_ratio);
            report.min_under_ratio = report.min_under_ratio.min(cc.min_ratio);
            report.pass =
                report.min_under_ratio >= 1.0 - args.eps && report.max_over_ratio <= 1.0 + args.eps;
        } else {
            eprintln!(
                "warning: skipping cut enumeration, n = {} exceeds {}",
                h.n, CUT_ENUM_MAX_VERTICES
            );
        }
    }
    if args.json {
        println!("{}", report_json(&report, cuts));
    } else {
        println!("{}", report.summary());
    }
    Ok(if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn cmd_stats(args: StatsArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let h = load(&args.input)?;
    let mut size_histogram: Vec<(usize, usize)> = Vec::new();
    for e in &h.edges {
        match size_histogram.iter_mut().find(|(s, _)| *s == e.arity()) {
            Some((_, c)) => *c += 1,
            None => size_histogram.push((e.arity(), 1)),
        }
    }
    size_histogram.sort_unstable();
    if args.json {
        println!(
            "{}",
            json!({
                "n": h.n,
                "m": h.edges.len(),
                "rank": h.rank(),
                "total_weight": h.total_weight(),
                "connected": h.is_connected(),
                "sizes": size_histogram,
            })
        );
    } else {
        println!("n = {}", h.n);
        println!("m = {}", h.edges.len());
        println!("rank = {}", h.rank());
        println!("total_weight = {}", h.total_weight());
        println!("connected = {}", h.is_connected());
        for (s, c) in &size_histogram {
            println!("size[{s}] = {c}");
        }
    }
    Ok(ExitCode::SUCCESS)
}
