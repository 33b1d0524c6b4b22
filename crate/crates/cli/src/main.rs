//! Command-line entry points: seeded, reproducible experiments with JSON and
//! CSV outputs. Every run with identical flags produces byte-identical
//! output, independent of the worker count.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sketchlab_core::analysis::{self, PairSelection, SamplerSpec};
use sketchlab_core::decomposition::{
    check_balanced_path, expander_decompose, hierarchical_decompose, vertex_sample, LevelRule,
};
use sketchlab_core::error::Error as CoreError;
use sketchlab_core::graph::{load_graph, Graph, GraphFormat};
use sketchlab_core::instances::{ChainInstance, EndpointInstance, InstanceJson, ThetaInstance};
use sketchlab_core::recovery::spanning_forest;
use sketchlab_core::rng::derive_seed;
use sketchlab_core::spectral::{effective_resistance, Resistance};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_CONTRACT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "sketchlab",
    about = "Graph sketching laboratory: instances, decoders, decompositions, experiments",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a clique-chain instance and write it as instance JSON.
    Gen(GenArgs),
    /// Recover a spanning forest of a graph from l0 sketches.
    Forest(ForestArgs),
    /// Expander-decompose a graph with a minimum-degree floor.
    Decompose(DecomposeArgs),
    /// Hierarchical expander decomposition with the 1/(36 log n) schedule.
    Hierarchical(HierarchicalArgs),
    /// Effective resistance between a vertex pair.
    Resistance(ResistanceArgs),
    /// KL divergence report for removing one edge.
    Kl(KlArgs),
    /// Seeded Monte Carlo experiments.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Mu,
    MuPrime,
    MuDoublePrime,
}

impl Variant {
    fn name(&self) -> &'static str {
        match self {
            Variant::Mu => "mu",
            Variant::MuPrime => "mu-prime",
            Variant::MuDoublePrime => "mu-double-prime",
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "mu")]
    variant: Variant,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ForestArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecomposeArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    dmin: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HierarchicalArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Fixed number of levels; mutually exclusive with --auto.
    #[arg(long, conflicts_with = "auto")]
    t: Option<usize>,
    /// Derive the level count from (n, d, delta).
    #[arg(long, requires = "d", requires = "delta")]
    auto: bool,
    #[arg(long)]
    d: Option<u32>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ResistanceArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Vertex pair as `u,v`.
    #[arg(long)]
    pair: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct KlArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Edge as `u,v`.
    #[arg(long)]
    edge: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Scaling of E[min(1, KL)] against n for a fixed sampler and d.
    KlScaling(KlScalingArgs),
    /// Likelihood-ratio distinguishing success against sketch dimension.
    Distinguish(DistinguishArgs),
    /// Conductance certification rate of vertex-sampled cliques.
    VertexSample(VertexSampleArgs),
    /// Balanced-path conditions and resistance audit over chain instances.
    BalancedPath(BalancedPathArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    fn name(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Args)]
struct KlScalingArgs {
    /// Comma-separated vertex counts.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long)]
    d: u32,
    #[arg(long, default_value_t = 2000)]
    trials: usize,
    #[arg(long, default_value = "full")]
    sampler: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DistinguishArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: u32,
    /// Comma-separated sketch dimensions.
    #[arg(long, value_delimiter = ',')]
    s: Vec<usize>,
    #[arg(long, default_value_t = 2000)]
    trials: usize,
    #[arg(long, default_value = "full")]
    sampler: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VertexSampleArgs {
    /// Clique size to sample from.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    /// Conductance floor a trial must certify.
    #[arg(long)]
    phi: f64,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BalancedPathArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: u32,
    #[arg(long)]
    phi: f64,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Resistance-audit pairs sampled per trial.
    #[arg(long, default_value_t = 64)]
    audit_pairs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Failure {
        let code = match &e {
            CoreError::Contract(_) => EXIT_CONTRACT,
            CoreError::Numerical(_) => EXIT_NUMERICAL,
            CoreError::Parse { .. } | CoreError::Io(_) | CoreError::Json(_) => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn init_thread_pool() {
    if let Ok(value) = std::env::var("SKETCHLAB_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Forest(args) => cmd_forest(args),
        Command::Decompose(args) => cmd_decompose(args),
        Command::Hierarchical(args) => cmd_hierarchical(args),
        Command::Resistance(args) => cmd_resistance(args),
        Command::Kl(args) => cmd_kl(args),
        Command::Experiment(cmd) => match cmd {
            ExperimentCommand::KlScaling(args) => cmd_kl_scaling(args),
            ExperimentCommand::Distinguish(args) => cmd_distinguish(args),
            ExperimentCommand::VertexSample(args) => cmd_vertex_sample(args),
            ExperimentCommand::BalancedPath(args) => cmd_balanced_path(args),
        },
    }
}

/// 12 significant digits, deterministic.
fn fmt_float(v: f64) -> String {
    format!("{v:.11e}")
}

fn run_config(command: &str, seed: Option<u64>, params: Value) -> Value {
    let mut obj = serde_json::Map::new();
    obj.insert("command".into(), Value::String(command.into()));
    if let Some(seed) = seed {
        obj.insert("seed".into(), json!(seed));
    }
    obj.insert("params".into(), params);
    Value::Object(obj)
}

fn emit(out: Option<&PathBuf>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(|e| Failure {
            code: EXIT_USAGE,
            message: format!("cannot write {}: {e}", path.display()),
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn emit_json(out: Option<&PathBuf>, value: &Value) -> Result<(), Failure> {
    emit(
        out,
        &format!("{}\n", serde_json::to_string_pretty(value).unwrap()),
    )
}

fn load(path: &PathBuf) -> Result<Graph, Failure> {
    let format = match path.extension().and_then(|e| e.to_str()) {
        Some("txt") | Some("edges") => GraphFormat::EdgeList,
        _ => GraphFormat::Json,
    };
    Ok(load_graph(path, format)?)
}

fn parse_pair(text: &str, flag: &str) -> Result<(u32, u32), Failure> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(Failure::usage(format!(
            "--{flag} expects `u,v`, got `{text}`"
        )));
    }
    let u = parts[0]
        .trim()
        .parse()
        .map_err(|_| Failure::usage(format!("bad vertex `{}`", parts[0])))?;
    let v = parts[1]
        .trim()
        .parse()
        .map_err(|_| Failure::usage(format!("bad vertex `{}`", parts[1])))?;
    Ok((u, v))
}

fn cmd_gen(args: GenArgs) -> Result<(), Failure> {
    if args.d < 2 {
        return Err(Failure::usage("--d must be at least 2"));
    }
    if args.n < args.d as usize {
        return Err(Failure::usage("--n must be at least --d"));
    }
    let instance = match args.variant {
        Variant::Mu => InstanceJson::from_chain(&ChainInstance::sample(args.n, args.d, args.seed)?),
        Variant::MuPrime => {
            InstanceJson::from_theta(&ThetaInstance::sample(args.n, args.d, args.seed)?)
        }
        Variant::MuDoublePrime => {
            InstanceJson::from_endpoint(&EndpointInstance::sample(args.n, args.d, args.seed)?)
        }
    };
    let config = run_config(
        "gen",
        Some(args.seed),
        json!({"n": args.n, "d": args.d, "variant": args.variant.name()}),
    );
    let mut body: Value = serde_json::to_value(&instance).unwrap();
    body.as_object_mut()
        .unwrap()
        .insert("run_config".into(), config);
    emit_json(args.out.as_ref(), &body)
}

fn cmd_forest(args: ForestArgs) -> Result<(), Failure> {
    if !(0.0 < args.delta && args.delta < 1.0) {
        return Err(Failure::usage("--delta must be in (0, 1)"));
    }
    let graph = load(&args.graph)?;
    let result = spanning_forest(&graph, args.delta, args.seed);
    let value = json!({
        "run_config": run_config(
            "forest",
            Some(args.seed),
            json!({"graph": args.graph.display().to_string(), "delta": args.delta}),
        ),
        "n": graph.n(),
        "forest": result.forest,
        "spanning": result.spanning,
        "l0_failures": result.l0_failures,
        "rounds": result.rounds,
        "rows_per_round": result.rows_per_round,
    });
    emit_json(args.out.as_ref(), &value)
}

fn cmd_decompose(args: DecomposeArgs) -> Result<(), Failure> {
    if !(0.0 < args.eps && args.eps < 0.5) {
        return Err(Failure::usage("--eps must be in (0, 1/2)"));
    }
    if args.dmin <= 0.0 {
        return Err(Failure::usage("--dmin must be positive"));
    }
    let graph = load(&args.graph)?;
    let result = expander_decompose(&graph, args.eps, args.dmin)?;
    let value = json!({
        "run_config": run_config(
            "decompose",
            None,
            json!({
                "graph": args.graph.display().to_string(),
                "eps": args.eps,
                "dmin": args.dmin,
            }),
        ),
        "eps": result.eps,
        "d_min": result.d_min,
        "edge_bound": result.edge_bound,
        "parts": result.parts,
        "leftover": result.leftover,
    });
    emit_json(args.out.as_ref(), &value)
}

fn cmd_hierarchical(args: HierarchicalArgs) -> Result<(), Failure> {
    let rule = if args.auto {
        let d = args
            .d
            .ok_or_else(|| Failure::usage("--auto requires --d"))?;
        let delta = args
            .delta
            .ok_or_else(|| Failure::usage("--auto requires --delta"))?;
        if delta <= 0.0 {
            return Err(Failure::usage("--delta must be positive"));
        }
        LevelRule::Auto { d, delta }
    } else {
        let t = args
            .t
            .ok_or_else(|| Failure::usage("provide --t <levels> or --auto"))?;
        if t < 1 {
            return Err(Failure::usage("--t must be at least 1"));
        }
        LevelRule::Fixed(t)
    };
    let graph = load(&args.graph)?;
    let result = hierarchical_decompose(&graph, rule)?;
    let levels: Vec<Value> = result
        .levels
        .iter()
        .map(|level| {
            json!({
                "m_i": level.m_i,
                "degree_floor": level.degree_floor,
                "expanders": level.expanders,
            })
        })
        .collect();
    let value = json!({
        "run_config": run_config(
            "hierarchical",
            None,
            json!({
                "graph": args.graph.display().to_string(),
                "t": args.t,
                "auto": args.auto,
                "d": args.d,
                "delta": args.delta,
            }),
        ),
        "eps": result.eps,
        "t": result.t,
        "levels": levels,
        "terminal": result.terminal,
    });
    emit_json(args.out.as_ref(), &value)
}

fn cmd_resistance(args: ResistanceArgs) -> Result<(), Failure> {
    let graph = load(&args.graph)?;
    let (u, v) = parse_pair(&args.pair, "pair")?;
    if u as usize >= graph.n() || v as usize >= graph.n() {
        return Err(Failure::usage("pair endpoints out of range"));
    }
    let resistance = effective_resistance(&graph, u, v)?;
    let value = json!({
        "run_config": run_config(
            "resistance",
            None,
            json!({"graph": args.graph.display().to_string(), "pair": [u, v]}),
        ),
        "u": u,
        "v": v,
        "resistance": match resistance {
            Resistance::Finite(r) => json!(r),
            Resistance::Infinite => json!("infinite"),
        },
    });
    emit_json(args.out.as_ref(), &value)
}

fn cmd_kl(args: KlArgs) -> Result<(), Failure> {
    let graph = load(&args.graph)?;
    let (u, v) = parse_pair(&args.edge, "edge")?;
    let report = analysis::kl_edge_exact(&graph, (u, v))?;
    let value = json!({
        "run_config": run_config(
            "kl",
            None,
            json!({"graph": args.graph.display().to_string(), "edge": [u, v]}),
        ),
        "edge": [u, v],
        "r_eff": report.r_eff,
        "kl_exact": if report.kl_exact.is_finite() {
            json!(report.kl_exact)
        } else {
            json!("infinite")
        },
        "kl_bound_quarter": report.kl_bound_quarter,
        "kl_min1": report.kl_min1,
        "bridge": report.bridge,
    });
    emit_json(args.out.as_ref(), &value)
}

fn parse_sampler(text: &str) -> Result<SamplerSpec, Failure> {
    text.parse::<SamplerSpec>()
        .map_err(|e| Failure::usage(e.to_string()))
}

fn cmd_kl_scaling(args: KlScalingArgs) -> Result<(), Failure> {
    if args.n.is_empty() {
        return Err(Failure::usage("--n needs at least one value"));
    }
    if args.d < 2 {
        return Err(Failure::usage("--d must be at least 2"));
    }
    if args.trials < 1 {
        return Err(Failure::usage("--trials must be at least 1"));
    }
    let sampler = parse_sampler(&args.sampler)?;
    for &n in &args.n {
        if n < args.d as usize {
            return Err(Failure::usage(format!("n={n} below d={}", args.d)));
        }
    }
    let config = run_config(
        "experiment kl-scaling",
        Some(args.seed),
        json!({
            "n": args.n,
            "d": args.d,
            "trials": args.trials,
            "sampler": sampler.to_string(),
            "format": args.format.name(),
        }),
    );
    let mut rows = Vec::new();
    for &n in &args.n {
        let row_seed = derive_seed(args.seed, "kl-scaling-n", n as u64);
        rows.push(analysis::estimate_scaling(
            sampler,
            n,
            args.d,
            args.trials,
            row_seed,
        )?);
    }
    match args.format {
        OutputFormat::Csv => {
            let mut text = format!(
                "# run_config={}\nn,d,s,sampler,trials,mean_min1_kl,stderr\n",
                serde_json::to_string(&config).unwrap()
            );
            for row in &rows {
                text.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    row.n,
                    row.d,
                    row.s,
                    row.sampler,
                    row.trials,
                    fmt_float(row.mean_min1_kl),
                    fmt_float(row.stderr),
                ));
            }
            emit(args.out.as_ref(), &text)
        }
        OutputFormat::Json => emit_json(
            args.out.as_ref(),
            &json!({"run_config": config, "rows": rows}),
        ),
    }
}

fn cmd_distinguish(args: DistinguishArgs) -> Result<(), Failure> {
    if args.s.is_empty() {
        return Err(Failure::usage("--s needs at least one value"));
    }
    if args.d < 2 {
        return Err(Failure::usage("--d must be at least 2"));
    }
    if args.n < args.d as usize {
        return Err(Failure::usage("--n must be at least --d"));
    }
    if args.trials < 1 {
        return Err(Failure::usage("--trials must be at least 1"));
    }
    let sampler = parse_sampler(&args.sampler)?;
    let config = run_config(
        "experiment distinguish",
        Some(args.seed),
        json!({
            "n": args.n,
            "d": args.d,
            "s": args.s,
            "trials": args.trials,
            "sampler": sampler.to_string(),
        }),
    );
    let mut rows = Vec::new();
    for &s in &args.s {
        let row_seed = derive_seed(args.seed, "distinguish-s", s as u64);
        rows.push(
            analysis::distinguish_theta(args.n, args.d, s, sampler, args.trials, row_seed)?.row,
        );
    }
    match args.format {
        OutputFormat::Csv => {
            let mut text = format!(
                "# run_config={}\nn,d,s,trials,success_rate,tvd_lb\n",
                serde_json::to_string(&config).unwrap()
            );
            for row in &rows {
                text.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    row.n,
                    row.d,
                    row.s,
                    row.trials,
                    fmt_float(row.success_rate),
                    fmt_float(row.tvd_lb),
                ));
            }
            emit(args.out.as_ref(), &text)
        }
        OutputFormat::Json => emit_json(
            args.out.as_ref(),
            &json!({"run_config": config, "rows": rows}),
        ),
    }
}

fn cmd_vertex_sample(args: VertexSampleArgs) -> Result<(), Failure> {
    if !(0.0 < args.p && args.p <= 1.0) {
        return Err(Failure::usage("--p must be in (0, 1]"));
    }
    if args.trials < 1 {
        return Err(Failure::usage("--trials must be at least 1"));
    }
    let clique = Graph::complete(args.n);
    let mut certified = 0usize;
    let mut kept_total = 0usize;
    for t in 0..args.trials {
        let sample = vertex_sample(&clique, args.p, derive_seed(args.seed, "trial", t as u64));
        kept_total += sample.kept.len();
        if sample.kept.len() < 2 {
            continue;
        }
        let sub = sample.graph.compact_subgraph(&sample.kept);
        if let Ok(Some(cert)) = sketchlab_core::spectral::certify_expander(&sub, args.phi) {
            if cert.certified_conductance() >= args.phi {
                certified += 1;
            }
        }
    }
    let value = json!({
        "run_config": run_config(
            "experiment vertex-sample",
            Some(args.seed),
            json!({"n": args.n, "p": args.p, "phi": args.phi, "trials": args.trials}),
        ),
        "trials": args.trials,
        "certified": certified,
        "certified_rate": certified as f64 / args.trials as f64,
        "mean_kept": kept_total as f64 / args.trials as f64,
    });
    emit_json(args.out.as_ref(), &value)
}

fn cmd_balanced_path(args: BalancedPathArgs) -> Result<(), Failure> {
    if args.d < 2 {
        return Err(Failure::usage("--d must be at least 2"));
    }
    if args.n < args.d as usize {
        return Err(Failure::usage("--n must be at least --d"));
    }
    if args.trials < 1 {
        return Err(Failure::usage("--trials must be at least 1"));
    }
    let mut pass = [0usize; 3];
    let mut all_pass = 0usize;
    let mut worst_fitted: f64 = 0.0;
    for t in 0..args.trials {
        let inst =
            ChainInstance::sample(args.n, args.d, derive_seed(args.seed, "trial", t as u64))?;
        let report = check_balanced_path(&inst.graph, &inst.layers, args.d, args.phi);
        pass[0] += report.condition_expanders as usize;
        pass[1] += report.condition_volumes as usize;
        pass[2] += report.condition_layer_mass as usize;
        if report.all_pass() {
            all_pass += 1;
            let audit = analysis::resistance_audit_balanced_path(
                &inst.graph,
                &inst.layers,
                args.phi,
                PairSelection::Sampled(args.audit_pairs),
                derive_seed(args.seed, "audit", t as u64),
            )?;
            if !audit.disconnected {
                worst_fitted = worst_fitted.max(audit.max_fitted_constant);
            }
        }
    }
    let value = json!({
        "run_config": run_config(
            "experiment balanced-path",
            Some(args.seed),
            json!({
                "n": args.n,
                "d": args.d,
                "phi": args.phi,
                "trials": args.trials,
                "audit_pairs": args.audit_pairs,
            }),
        ),
        "trials": args.trials,
        "expander_condition_pass": pass[0],
        "volume_condition_pass": pass[1],
        "layer_mass_condition_pass": pass[2],
        "all_conditions_pass": all_pass,
        "all_pass_rate": all_pass as f64 / args.trials as f64,
        "worst_fitted_resistance_constant": worst_fitted,
    });
    emit_json(args.out.as_ref(), &value)
}
