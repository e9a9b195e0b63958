//! `advgap`: exact randomization-gap analysis of discrete labeled datasets.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use advgap::analysis::{check_perfect, decompose_gap, default_hole_cap, AnalysisOptions, GapAnalysis, Perfectness};
use advgap::classifier::{classifier_from_packing, packing_from_classifier, AttackSet};
use advgap::conflict::{build_conflict_hypergraph, Hypergraph};
use advgap::constructions::{
    canonical_basis, graph_to_distribution, iterate_fibration, named_graph, pentagon, random_dataset, random_graph,
    random_triangle_free_graph, seeded_rng, sup_norm_antihole, triangle_with_pendant, RandomDatasetSpec,
    FIBRATION_SIZE_CAP,
};
use advgap::dataset::{parse_dataset, serialize_dataset, Dataset, ParseOptions};
use advgap::geometry::DEFAULT_TOL;
use advgap::packing::{
    solve_fractional, solve_integral_exact, FractionalSolution, PackingInstance, DEFAULT_NODE_BUDGET,
};
use advgap::rational::{format_rational, parse_rational, to_f64, Rational};
use advgap::{Epsilon, Error, Graph, Norm};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Parser)]
#[command(name = "advgap", version, about = "Exact deterministic and randomized adversarial risk of discrete datasets")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Global {
    /// Tolerance for floating-point geometry verdicts.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Branch-and-bound node budget for integral packings.
    #[arg(long, global = true, default_value_t = DEFAULT_NODE_BUDGET)]
    node_budget: u64,
    /// Longest odd hole or anti-hole searched (default depends on the vertex count).
    #[arg(long, global = true)]
    hole_cap: Option<usize>,
    /// Search odd holes of every length, certifying perfectness.
    #[arg(long, global = true)]
    exhaustive: bool,
    /// Sum the weights of repeated (point, label) pairs instead of rejecting them.
    #[arg(long, global = true)]
    merge_duplicates: bool,
    /// Rescale weights to sum to one instead of rejecting other totals.
    #[arg(long, global = true)]
    normalize: bool,
    /// Seed for the random generators of `construct random` and `construct random-graph`.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Include wall-clock timings (makes reports non-reproducible).
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Build the conflict structures, solve both packings and split the gap.
    Analyze { input: String },
    /// Emit a dataset (or graph) from one of the built-in constructions.
    Construct {
        #[command(subcommand)]
        what: Construct,
    },
    /// Realize a graph as the conflict graph of a dataset.
    Embed(EmbedArgs),
    /// Solve fractional and integral packing on a hypergraph JSON.
    Solve { input: String },
    /// Look for odd holes and anti-holes in a graph.
    Check {
        /// Graph JSON file, `-`, or a name such as c7complement.
        #[arg(long)]
        graph: String,
    },
    /// Evaluate the classifier induced by a packing on a dataset.
    Classify {
        input: String,
        /// `fractional`, `integral`, or a JSON file with a list of rationals.
        #[arg(long, default_value = "fractional")]
        packing: String,
    },
}

#[derive(Subcommand)]
enum Construct {
    /// Uniform distribution on the canonical basis of R^K.
    Basis {
        #[arg(long)]
        k: usize,
    },
    /// Dataset realizing the t-fold fibration of a base graph.
    Fibration {
        #[arg(long, default_value = "c5")]
        base: String,
        #[arg(long, default_value_t = 1)]
        t: u32,
        #[arg(long, default_value = "inf")]
        norm: String,
        #[arg(long, default_value = "1/2")]
        epsilon: String,
        /// Emit the graph instead of a dataset.
        #[arg(long)]
        graph_only: bool,
    },
    /// Same as the top-level `embed`.
    Embed(EmbedArgs),
    /// One of the small worked examples.
    Figure { name: Figure },
    /// Random dataset on a rational grid in [0, 1]^dim.
    Random {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 3)]
        classes: usize,
        #[arg(long, default_value = "2")]
        norm: String,
        #[arg(long, default_value_t = 10)]
        grid: i64,
        #[arg(long, default_value = "1/5")]
        epsilon: String,
    },
    /// Random graph JSON.
    RandomGraph {
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 0.3)]
        density: f64,
        #[arg(long)]
        triangle_free: bool,
    },
}

#[derive(Args)]
struct EmbedArgs {
    /// Graph JSON file, `-`, or a name such as c5.
    #[arg(long)]
    graph: String,
    #[arg(long, default_value = "2")]
    norm: String,
    #[arg(long, default_value = "1/2")]
    epsilon: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Figure {
    Pentagon,
    Pendant,
    Antihole,
}

enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Core(e) => match e {
                Error::Parse(_) | Error::Validation(_) | Error::SizeCap(_) | Error::InfeasiblePacking(_) => 2,
                Error::Inconclusive { .. } => 3,
                Error::BudgetExceeded { .. } | Error::CliqueLimit { .. } => 4,
                Error::Invariant(_) => 1,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Core(e) => e.to_string(),
        }
    }
}

type Run<T> = std::result::Result<T, Failure>;

fn read_input(path: &str) -> Run<Vec<u8>> {
    let mut bytes = Vec::new();
    let res =
        if path == "-" { io::stdin().read_to_end(&mut bytes).map(|_| ()) } else { fs::read(path).map(|b| bytes = b) };
    res.map_err(|e| Failure::Usage(format!("cannot read {path}: {e}")))?;
    Ok(bytes)
}

fn read_text(path: &str) -> Run<(String, String)> {
    let bytes = read_input(path)?;
    let digest = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes).map_err(|_| Failure::Usage(format!("{path} is not UTF-8")))?;
    Ok((text, digest))
}

fn load_graph(spec: &str) -> Run<Graph> {
    if spec != "-" && !std::path::Path::new(spec).exists() {
        if let Ok(g) = named_graph(spec) {
            return Ok(g);
        }
    }
    let (text, _) = read_text(spec)?;
    Ok(Graph::from_json(&text)?)
}

fn parse_options(g: &Global) -> ParseOptions {
    ParseOptions { normalize: g.normalize, merge_duplicates: g.merge_duplicates }
}

fn rationals(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

fn input_block(path: &str, digest: &str) -> Value {
    json!({ "path": path, "sha256": digest })
}

fn parameters(g: &Global, d: &Dataset, hole_cap: usize) -> Value {
    json!({
        "epsilon": d.epsilon.to_string(),
        "epsilon_approx": d.epsilon.to_f64(),
        "norm": d.norm.to_string(),
        "tol": g.tol,
        "node_budget": g.node_budget,
        "hole_cap": hole_cap,
        "merge_duplicates": g.merge_duplicates,
        "normalize": g.normalize,
        "points": d.distribution.len(),
        "dim": d.distribution.dim(),
        "classes": d.distribution.num_classes(),
    })
}

fn hole_cap(g: &Global, n: usize) -> usize {
    if g.exhaustive {
        n
    } else {
        g.hole_cap.unwrap_or_else(|| default_hole_cap(n))
    }
}

fn fractional_certificate(s: &FractionalSolution) -> Value {
    json!({
        "q": rationals(&s.q),
        "value": format_rational(&s.value),
        "dual": rationals(&s.dual),
        "box_dual": rationals(&s.box_dual),
        "dual_value": format_rational(&s.dual_value),
    })
}

fn analysis_report(a: &GapAnalysis) -> Value {
    let h = &a.hypergraph;
    json!({
        "structures": {
            "conflict_edges": a.graph.edge_count(),
            "max_hyperedges": h.max_edges().len(),
            "maximal_cliques": a.cliques.max_edges().len(),
            "hyperedges": h.max_edges().iter().map(|e| one_based(e)).collect::<Vec<_>>(),
            "witnesses_approx": h.witnesses().iter().map(|w| w.iter().map(to_f64).collect::<Vec<_>>()).collect::<Vec<_>>(),
        },
        "report": a.report.to_json(),
        "certificates": {
            "fractional_h": fractional_certificate(&a.fp_h),
            "fractional_c": fractional_certificate(&a.fp_c),
            "integral": {
                "support": one_based(&a.ip_c.support()),
                "value": format_rational(&a.ip_c.value),
                "proven_optimal": a.ip_c.proven_optimal && a.ip_h.proven_optimal,
                "nodes_c": a.ip_c.nodes,
                "nodes_h": a.ip_h.nodes,
            },
        },
    })
}

fn analyze(g: &Global, input: &str) -> Run<Value> {
    let start = Instant::now();
    let (text, digest) = read_text(input)?;
    let d = parse_dataset(&text, parse_options(g))?;
    let parse_time = start.elapsed();
    let cap = hole_cap(g, d.distribution.len());
    let opts = AnalysisOptions {
        solve: advgap::packing::SolveOptions { tol: g.tol, node_budget: g.node_budget },
        hole_cap: Some(cap),
    };
    let a = decompose_gap(&d.distribution, &d.epsilon, &d.norm, opts)?;
    let mut report = json!({ "input": input_block(input, &digest), "parameters": parameters(g, &d, cap) });
    merge(&mut report, analysis_report(&a));
    if g.timings {
        let mut t = serde_json::Map::new();
        t.insert("parse".into(), json!(parse_time.as_secs_f64()));
        for (phase, d) in &a.timings {
            t.insert((*phase).into(), json!(d.as_secs_f64()));
        }
        report["timings_s"] = Value::Object(t);
    }
    Ok(report)
}

fn merge(into: &mut Value, from: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, from) {
        a.extend(b);
    }
}

fn construct(g: &Global, what: &Construct) -> Run<String> {
    let d = match what {
        Construct::Basis { k } => canonical_basis(*k)?,
        Construct::Fibration { base, t, norm, epsilon, graph_only } => {
            let graph = iterate_fibration(&load_graph(base)?, *t, FIBRATION_SIZE_CAP)?;
            if *graph_only {
                return Ok(graph.to_json());
            }
            graph_to_distribution(&graph, &Epsilon::parse(epsilon)?, &Norm::parse(norm)?)?
        }
        Construct::Embed(args) => return embed(args),
        Construct::Figure { name } => match name {
            Figure::Pentagon => pentagon(),
            Figure::Pendant => triangle_with_pendant(),
            Figure::Antihole => sup_norm_antihole(),
        },
        Construct::Random { n, dim, classes, norm, grid, epsilon } => {
            if *n == 0 || *classes == 0 || *grid < 1 {
                return Err(Failure::Usage("random datasets need n, classes and grid of at least 1".into()));
            }
            let spec = RandomDatasetSpec {
                n: *n,
                dim: *dim,
                classes: *classes,
                norm: Norm::parse(norm)?,
                grid: *grid,
                epsilon: Epsilon::parse(epsilon)?,
            };
            let cells = (*grid as u128 + 1).checked_pow(spec.dim as u32).unwrap_or(u128::MAX);
            if cells.saturating_mul(*classes as u128) < *n as u128 {
                return Err(Failure::Usage(format!("the grid only has room for {cells} points per class")));
            }
            random_dataset(&spec, &mut seeded_rng(g.seed))
        }
        Construct::RandomGraph { n, density, triangle_free } => {
            if !(0.0..=1.0).contains(density) {
                return Err(Failure::Usage(format!("density must lie in [0, 1], got {density}")));
            }
            let mut rng = seeded_rng(g.seed);
            let graph = if *triangle_free {
                random_triangle_free_graph(*n, *density, &mut rng)
            } else {
                random_graph(*n, *density, &mut rng)
            };
            return Ok(graph.to_json());
        }
    };
    Ok(serialize_dataset(&d))
}

fn embed(args: &EmbedArgs) -> Run<String> {
    let graph = load_graph(&args.graph)?;
    let d = graph_to_distribution(&graph, &Epsilon::parse(&args.epsilon)?, &Norm::parse(&args.norm)?)?;
    Ok(serialize_dataset(&d))
}

fn field<'a>(doc: &'a Value, key: &str) -> Option<&'a Value> {
    doc.get(key).filter(|v| !v.is_null())
}

fn rational_list(v: &Value, what: &str) -> Run<Vec<Rational>> {
    let bad = || Failure::Usage(format!("{what} must be a list of rational strings or integers"));
    v.as_array()
        .ok_or_else(bad)?
        .iter()
        .map(|x| match x {
            Value::String(s) => Ok(parse_rational(s)?),
            Value::Number(n) => Ok(parse_rational(&n.to_string())?),
            _ => Err(bad()),
        })
        .collect()
}

fn solve(g: &Global, input: &str) -> Run<Value> {
    let (text, digest) = read_text(input)?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    let h = Hypergraph::from_json(&text)?;
    let weights = match field(&doc, "weights") {
        Some(w) => rational_list(w, "weights")?,
        None => vec![Rational::new(1.into(), (h.n().max(1) as i64).into()); h.n()],
    };
    let inst = PackingInstance::from_hypergraph(&h, weights)?;
    let fp = solve_fractional(&inst);
    let ip = solve_integral_exact(&inst, g.node_budget)?;
    Ok(json!({
        "input": input_block(input, &digest),
        "parameters": { "node_budget": g.node_budget, "vertices": h.n(), "max_edges": h.max_edges().len() },
        "fp": format_rational(&fp.value),
        "ip": format_rational(&ip.value),
        "q_frac": rationals(&fp.q),
        "q_int": ip.q.iter().map(|&b| if b { "1" } else { "0" }).collect::<Vec<_>>(),
        "dual": rationals(&fp.dual),
        "box_dual": rationals(&fp.box_dual),
        "proven_optimal": ip.proven_optimal,
        "nodes": ip.nodes,
    }))
}

fn check(g: &Global, spec: &str) -> Run<Value> {
    let graph = load_graph(spec)?;
    let cap = hole_cap(g, graph.n());
    let perfectness = check_perfect(&graph, cap);
    let perfect = match &perfectness {
        Perfectness::Perfect => json!({ "status": "perfect" }),
        Perfectness::NotPerfect { kind, cycle } => {
            json!({ "status": "not_perfect", "kind": kind, "cycle": one_based(cycle) })
        }
        Perfectness::Inconclusive { max_len } => json!({ "status": "inconclusive", "max_len": max_len }),
    };
    Ok(json!({
        "graph": spec,
        "parameters": { "hole_cap": cap },
        "vertices": graph.n(),
        "edges": graph.edge_count(),
        "triangle_free": graph.is_triangle_free(),
        "perfect": perfect,
    }))
}

fn classify(g: &Global, input: &str, packing: &str) -> Run<Value> {
    let (text, digest) = read_text(input)?;
    let d = parse_dataset(&text, parse_options(g))?;
    let dist = &d.distribution;
    let h = build_conflict_hypergraph(dist, &d.epsilon, &d.norm, g.tol)?;
    let inst = PackingInstance::from_hypergraph(h.hypergraph(), dist.weights().to_vec())?;
    let q = match packing {
        "fractional" => solve_fractional(&inst).q,
        "integral" => solve_integral_exact(&inst, g.node_budget)?.as_rational(),
        path => {
            let (text, _) = read_text(path)?;
            let doc: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
            let list = field(&doc, "q").unwrap_or(&doc);
            rational_list(list, "packing")?
        }
    };
    if q.len() != dist.len() {
        return Err(Failure::Core(Error::InfeasiblePacking(format!(
            "packing has {} entries for {} support points",
            q.len(),
            dist.len()
        ))));
    }
    let f = classifier_from_packing(dist, &h, &d.epsilon, &d.norm, g.tol, q.clone())?;
    let attacks = AttackSet::from_hypergraph(dist, &h);
    let wp = packing_from_classifier(&f, &attacks)?;
    let points: Vec<Value> = (0..dist.len())
        .map(|i| {
            json!({
                "index": i + 1,
                "label": dist.point(i).label,
                "q": format_rational(&q[i]),
                "q_hat": format_rational(&wp.q[i]),
                "margin": format_rational(&(&wp.q[i] - &q[i])),
                "worst_attack": wp.worst_attack[i] + 1,
            })
        })
        .collect();
    let w = dist.weights();
    let dot = |v: &[Rational]| -> Rational { w.iter().zip(v).map(|(a, b)| a * b).sum() };
    Ok(json!({
        "input": input_block(input, &digest),
        "parameters": parameters(g, &d, 0).as_object().map(|o| {
            let mut o = o.clone();
            o.remove("hole_cap");
            o.insert("packing".into(), json!(packing));
            Value::Object(o)
        }),
        "attack_points": attacks.points.len(),
        "packing_value": format_rational(&dot(&q)),
        "witnessed_accuracy": format_rational(&dot(&wp.q)),
        "points": points,
    }))
}

fn run(cli: &Cli) -> Run<String> {
    let g = &cli.global;
    let value = match &cli.command {
        Command::Analyze { input } => analyze(g, input)?,
        Command::Construct { what } => return construct(g, what),
        Command::Embed(args) => return embed(args),
        Command::Solve { input } => solve(g, input)?,
        Command::Check { graph } => check(g, graph)?,
        Command::Classify { input, packing } => classify(g, input, packing)?,
    };
    Ok(serde_json::to_string_pretty(&value).expect("report serializes"))
}

fn configure_threads() -> Run<()> {
    let Ok(raw) = std::env::var("ADVGAP_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("ADVGAP_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Usage(e.to_string()))
}

fn emit(cli: &Cli, text: &str) -> Run<()> {
    let write = |out: &mut dyn Write| writeln!(out, "{text}");
    match &cli.global.output {
        Some(path) => fs::File::create(path).and_then(|mut f| write(&mut f)),
        None => write(&mut io::stdout().lock()),
    }
    .or_else(|e| if e.kind() == io::ErrorKind::BrokenPipe { Ok(()) } else { Err(e) })
    .map_err(|e| Failure::Usage(format!("cannot write output: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| run(&cli)).and_then(|text| emit(&cli, &text));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
