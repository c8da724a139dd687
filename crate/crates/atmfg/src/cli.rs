//! Command-line surface: generators, builders, evaluation, and the
//! benchmark presets, each writing a manifest for exact replay.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::ann::IndexParams;
use crate::dataset::{self, DataMatrix, MatrixFormat};
use crate::engine::{build_atmfg, AtmfgConfig, UniverseLimit};
use crate::error::{Error, Result};
use crate::exact_tmfg::{
    build_exact_tmfg, build_exact_tmfg_unbounded, face_location_stats, validate_tmfg,
};
use crate::graph::EdgeList;
use crate::metrics::{graph_audit, jaccard, weighted_intra_cluster_path, Partition};
use crate::synth::{gen_factor_model, gen_gmrf, gen_planar_ground_truth, FactorModelParams, GmrfParams};
use crate::util::derive_seed;

#[derive(Parser)]
#[command(
    name = "atmfg",
    version,
    about = "Build and evaluate (approximate) triangulated maximally filtered graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Build the approximate TMFG from a feature matrix.
    Build(BuildArgs),
    /// Build the exact TMFG baseline with a construction trace.
    BuildExact(BuildExactArgs),
    /// Generate synthetic datasets and ground-truth graphs.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Evaluate edge lists: Jaccard, intra-cluster paths, structural audit.
    Eval(EvalArgs),
    /// Run a benchmark preset over a parameter grid.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Auto,
    Csv,
    Binary,
}

fn resolve_format(fmt: FormatArg, path: &Path) -> MatrixFormat {
    match fmt {
        FormatArg::Csv => MatrixFormat::Csv,
        FormatArg::Binary => MatrixFormat::Binary,
        FormatArg::Auto => dataset::detect_format(path),
    }
}

fn parse_universe_limit(s: &str) -> std::result::Result<UniverseLimit, String> {
    match s.to_ascii_lowercase().as_str() {
        "auto" => Ok(UniverseLimit::Auto),
        "unbounded" | "inf" => Ok(UniverseLimit::Unbounded),
        other => other
            .parse::<usize>()
            .map(UniverseLimit::Fixed)
            .map_err(|_| format!("expected 'auto', 'unbounded', or an integer, got {s:?}")),
    }
}

#[derive(Args)]
pub struct BuildArgs {
    /// Input feature matrix (.csv or binary).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
    pub format: FormatArg,
    /// kNN neighborhood size.
    #[arg(long, default_value_t = 50)]
    pub k: usize,
    /// Face universe limit: 'auto', 'unbounded', or an integer.
    #[arg(long, value_parser = parse_universe_limit, default_value = "auto")]
    pub universe_limit: UniverseLimit,
    /// Neighbors fetched per centroid during global rescue.
    #[arg(long, default_value_t = 8)]
    pub rescue_k: usize,
    /// Root seed; all randomness derives from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Small-world index connectivity.
    #[arg(long, default_value_t = 16)]
    pub max_degree: usize,
    #[arg(long, default_value_t = 200)]
    pub ef_construction: usize,
    /// Search beam width; defaults to max(64, 2k) per query.
    #[arg(long)]
    pub ef_search: Option<usize>,
    /// Below this node count the index is an exact scan.
    #[arg(long, default_value_t = 2048)]
    pub exact_threshold: usize,
    /// Output edge list (TSV).
    #[arg(long)]
    pub out: PathBuf,
    /// Engine stats JSON; defaults to <out> with .stats.json.
    #[arg(long)]
    pub stats: Option<PathBuf>,
}

#[derive(Args)]
pub struct BuildExactArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
    pub format: FormatArg,
    /// Output edge list (TSV).
    #[arg(long)]
    pub out: PathBuf,
    /// Construction trace CSV; defaults to <out> with .trace.csv.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Face-location histogram CSV; defaults to <out> with .lhist.csv.
    #[arg(long)]
    pub histogram: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    /// Override the node-count guard on the quadratic builder.
    #[arg(long)]
    pub force: bool,
}

#[derive(Subcommand)]
pub enum GenCommand {
    /// 1-factor Gaussian mixture with contiguous cluster blocks.
    Factor(GenFactorArgs),
    /// GMRF sample over a ground-truth graph.
    Gmrf(GenGmrfArgs),
    /// Random maximal planar ground-truth graph.
    Planar(GenPlanarArgs),
}

#[derive(Args)]
pub struct GenFactorArgs {
    #[arg(long)]
    pub n: usize,
    /// Number of clusters.
    #[arg(long)]
    pub k: usize,
    /// Factor loading in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    pub g: f64,
    /// Samples per node (feature dimension).
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output matrix (.csv or binary by extension).
    #[arg(long)]
    pub out: PathBuf,
    /// Labels file; defaults to <out> with .labels.txt.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Args)]
pub struct GenGmrfArgs {
    /// Ground-truth graph (TSV edge list).
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct GenPlanarArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Edge list(s) to evaluate; repeat the flag for several.
    #[arg(long = "edgelist", required = true)]
    pub edgelists: Vec<PathBuf>,
    /// Ground-truth edge list for Jaccard scoring.
    #[arg(long)]
    pub ground_truth: Option<PathBuf>,
    /// Node labels for the intra-cluster path metric.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Emit the pairwise Jaccard distribution over the edge lists.
    #[arg(long)]
    pub pairwise: bool,
    /// Measure intra-cluster paths on cluster-induced subgraphs.
    #[arg(long)]
    pub induced: bool,
    #[arg(long, default_value_t = 10_000)]
    pub max_pairs: usize,
    /// Output JSON; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchPreset {
    /// Jaccard vs ground truth over an (N, alpha) grid.
    AlphaHeatmap,
    /// Jaccard and runtime as the kNN neighborhood size varies.
    KSweep,
    /// Jaccard and runtime as the face-universe limit varies.
    UniverseSweep,
    /// Wall time of both builders as N grows.
    Runtime,
}

/// Universe limit spec for sweeps: absolute, fraction of N, or unbounded.
#[derive(Debug, Clone, Copy)]
pub enum UniverseSpec {
    Abs(usize),
    FracN(f64),
    Unbounded,
}

impl UniverseSpec {
    fn resolve(&self, n: usize) -> UniverseLimit {
        match self {
            UniverseSpec::Abs(u) => UniverseLimit::Fixed(*u),
            UniverseSpec::FracN(f) => {
                UniverseLimit::Fixed(((*f * n as f64).ceil() as usize).max(1))
            }
            UniverseSpec::Unbounded => UniverseLimit::Unbounded,
        }
    }

    fn label(&self, n: usize) -> String {
        match self.resolve(n) {
            UniverseLimit::Fixed(u) => u.to_string(),
            UniverseLimit::Unbounded => "inf".into(),
            UniverseLimit::Auto => "auto".into(),
        }
    }
}

fn parse_universe_spec(s: &str) -> std::result::Result<UniverseSpec, String> {
    let lower = s.to_ascii_lowercase();
    if lower == "unbounded" || lower == "inf" {
        return Ok(UniverseSpec::Unbounded);
    }
    if let Some(frac) = lower.strip_suffix('n') {
        return frac
            .parse::<f64>()
            .map(UniverseSpec::FracN)
            .map_err(|_| format!("bad universe fraction {s:?}"));
    }
    lower
        .parse::<usize>()
        .map(UniverseSpec::Abs)
        .map_err(|_| format!("expected integer, '<frac>n', or 'unbounded', got {s:?}"))
}

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub preset: BenchPreset,
    /// Dataset sizes, comma separated; preset default when omitted.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// GMRF alpha values for the heatmap preset.
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// Neighborhood sizes for the k sweep.
    #[arg(long, value_delimiter = ',')]
    pub ks: Option<Vec<usize>>,
    /// Universe limits for the universe sweep: int, '<frac>n', 'unbounded'.
    #[arg(long, value_delimiter = ',', value_parser = parse_universe_spec)]
    pub universe_limits: Option<Vec<UniverseSpec>>,
    /// Repetitions per grid cell.
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    /// Samples per node; preset default when omitted.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Fixed alpha for non-heatmap presets.
    #[arg(long, default_value_t = 0.25)]
    pub alpha: f64,
    /// Fixed k for presets that do not sweep it.
    #[arg(long, default_value_t = 50)]
    pub k: usize,
    /// Include exact-TMFG rows in the runtime preset up to this N
    /// (0 disables them).
    #[arg(long, default_value_t = 5000)]
    pub exact_cap: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses argv and runs; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Build(args) => cmd_build(args),
        Command::BuildExact(args) => cmd_build_exact(args),
        Command::Gen(GenCommand::Factor(args)) => cmd_gen_factor(args),
        Command::Gen(GenCommand::Gmrf(args)) => cmd_gen_gmrf(args),
        Command::Gen(GenCommand::Planar(args)) => cmd_gen_planar(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

#[derive(Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    command: String,
    params: serde_json::Value,
    outputs: Vec<String>,
}

fn write_manifest(
    primary_out: &Path,
    command: &str,
    params: serde_json::Value,
    outputs: &[&Path],
) -> Result<()> {
    let manifest = Manifest {
        tool: "atmfg",
        version: env!("CARGO_PKG_VERSION"),
        command: command.to_string(),
        params,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    let path = sibling(primary_out, "manifest.json");
    let mut file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, &manifest)
        .map_err(|e| Error::Internal(format!("manifest serialization failed: {e}")))?;
    file.write_all(b"\n")?;
    Ok(())
}

/// `<out>` with its extension replaced by `ext`.
fn sibling(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}

fn load_input(path: &Path, fmt: FormatArg) -> Result<DataMatrix> {
    let format = resolve_format(fmt, path);
    let m = dataset::load_matrix(path, format)?;
    Ok(dataset::znormalize(m))
}

fn cmd_build(args: BuildArgs) -> Result<()> {
    let m = load_input(&args.input, args.format)?;
    let cfg = AtmfgConfig {
        k: args.k,
        universe_limit: args.universe_limit,
        clique_size: 4,
        rescue_k: args.rescue_k,
        seed: args.seed,
        index: IndexParams {
            max_degree: args.max_degree,
            ef_construction: args.ef_construction,
            ef_search: args.ef_search,
            exact_fallback_threshold: args.exact_threshold,
            rng_seed: 0, // engine derives the index seed from the root seed
        },
    };
    let (edges, stats) = build_atmfg(&m, &cfg)?;
    edges.write_tsv(&args.out)?;
    let stats_path = args.stats.unwrap_or_else(|| sibling(&args.out, "stats.json"));
    std::fs::write(
        &stats_path,
        serde_json::to_string_pretty(&stats)
            .map_err(|e| Error::Internal(format!("stats serialization failed: {e}")))?
            + "\n",
    )?;
    write_manifest(
        &args.out,
        "build",
        json!({
            "input": args.input.display().to_string(),
            "k": args.k,
            "universe_limit": format!("{:?}", args.universe_limit),
            "rescue_k": args.rescue_k,
            "seed": args.seed,
            "max_degree": args.max_degree,
            "ef_construction": args.ef_construction,
            "ef_search": args.ef_search,
            "exact_threshold": args.exact_threshold,
        }),
        &[&args.out, &stats_path],
    )?;
    eprintln!(
        "built a-TMFG: n={}, edges={}, rescues={}, pruned={}, {:.3}s",
        stats.n, stats.edges, stats.rescues, stats.faces_pruned, stats.wall_seconds
    );
    Ok(())
}

fn cmd_build_exact(args: BuildExactArgs) -> Result<()> {
    let m = load_input(&args.input, args.format)?;
    if args.bins == 0 {
        return Err(Error::Parameter("histogram needs at least 1 bin".into()));
    }
    let (edges, trace) = if args.force {
        build_exact_tmfg_unbounded(&m)?
    } else {
        build_exact_tmfg(&m)?
    };
    edges.write_tsv(&args.out)?;

    let trace_path = args.trace.unwrap_or_else(|| sibling(&args.out, "trace.csv"));
    let mut out = String::from("step,j,universe_size,node,gain\n");
    for (t, s) in trace.steps.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{:.6}\n",
            t + 1,
            s.face_rank,
            s.universe_size,
            s.node,
            s.gain
        ));
    }
    std::fs::write(&trace_path, out)?;

    let hist_path = args
        .histogram
        .unwrap_or_else(|| sibling(&args.out, "lhist.csv"));
    let stats = face_location_stats(&trace);
    let mut counts = vec![0usize; args.bins];
    let width = 1.0 / args.bins as f64;
    for &l in &stats {
        let idx = (((l + 1.0) / width).floor() as usize).min(args.bins - 1);
        counts[idx] += 1;
    }
    let mut out = String::from("bin_left,bin_right,count\n");
    for (i, c) in counts.iter().enumerate() {
        out.push_str(&format!(
            "{:.4},{:.4},{}\n",
            -1.0 + i as f64 * width,
            -1.0 + (i + 1) as f64 * width,
            c
        ));
    }
    std::fs::write(&hist_path, out)?;

    let report = validate_tmfg(&edges, &trace);
    if !report.passed() {
        return Err(Error::Internal(format!(
            "exact build failed self-validation: {report:?}"
        )));
    }
    write_manifest(
        &args.out,
        "build-exact",
        json!({
            "input": args.input.display().to_string(),
            "force": args.force,
            "bins": args.bins,
        }),
        &[&args.out, &trace_path, &hist_path],
    )?;
    eprintln!("built exact TMFG: n={}, edges={}", m.n_rows(), edges.len());
    Ok(())
}

fn cmd_gen_factor(args: GenFactorArgs) -> Result<()> {
    let params = FactorModelParams::uniform(args.n, args.k, args.g, args.samples, args.seed);
    let (m, labels) = gen_factor_model(&params)?;
    write_matrix(&m, &args.out)?;
    let labels_path = args
        .labels
        .unwrap_or_else(|| sibling(&args.out, "labels.txt"));
    Partition::from_labels(labels)?.write_labels(&labels_path)?;
    write_manifest(
        &args.out,
        "gen factor",
        json!({
            "n": args.n, "k": args.k, "g": args.g,
            "samples": args.samples, "seed": args.seed,
        }),
        &[&args.out, &labels_path],
    )?;
    Ok(())
}

fn cmd_gen_gmrf(args: GenGmrfArgs) -> Result<()> {
    let adjacency = EdgeList::read_tsv(&args.graph, None)?;
    let params = GmrfParams {
        adjacency,
        alpha: args.alpha,
        n_samples: args.samples,
        seed: args.seed,
    };
    if params.beyond_two_hop_regime() {
        eprintln!(
            "warning: alpha = {} leaves the 2-hop suppression regime (alpha^2/4 > 1)",
            args.alpha
        );
    }
    let m = gen_gmrf(&params)?;
    write_matrix(&m, &args.out)?;
    write_manifest(
        &args.out,
        "gen gmrf",
        json!({
            "graph": args.graph.display().to_string(),
            "alpha": args.alpha, "samples": args.samples, "seed": args.seed,
        }),
        &[&args.out],
    )?;
    Ok(())
}

fn cmd_gen_planar(args: GenPlanarArgs) -> Result<()> {
    let edges = gen_planar_ground_truth(args.n, args.seed)?;
    edges.write_tsv(&args.out)?;
    write_manifest(
        &args.out,
        "gen planar",
        json!({ "n": args.n, "seed": args.seed }),
        &[&args.out],
    )?;
    Ok(())
}

fn write_matrix(m: &DataMatrix, path: &Path) -> Result<()> {
    match dataset::detect_format(path) {
        MatrixFormat::Csv => dataset::save_csv(m, path),
        MatrixFormat::Binary => dataset::save_binary(m, path),
    }
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let lists: Vec<EdgeList> = args
        .edgelists
        .iter()
        .map(|p| EdgeList::read_tsv(p, None))
        .collect::<Result<_>>()?;
    let ground_truth = match &args.ground_truth {
        Some(p) => Some(EdgeList::read_tsv(p, None)?),
        None => None,
    };
    let partition = match &args.labels {
        Some(p) => Some(Partition::read_labels(p)?),
        None => None,
    };

    let n = lists[0].n_nodes();
    for (path, el) in args.edgelists.iter().zip(&lists) {
        if el.n_nodes() != n {
            return Err(Error::Inconsistent(format!(
                "{} covers {} nodes, expected {n}",
                path.display(),
                el.n_nodes()
            )));
        }
    }
    if let Some(gt) = &ground_truth {
        if gt.n_nodes() != n {
            return Err(Error::Inconsistent(format!(
                "ground truth covers {} nodes, edge lists cover {n}",
                gt.n_nodes()
            )));
        }
    }
    if let Some(p) = &partition {
        if p.n_nodes() != n {
            return Err(Error::Inconsistent(format!(
                "labels cover {} nodes, edge lists cover {n}",
                p.n_nodes()
            )));
        }
    }

    let mut per_list = Vec::new();
    for (path, el) in args.edgelists.iter().zip(&lists) {
        let jac = ground_truth.as_ref().map(|gt| jaccard(el, gt));
        let paths = match &partition {
            Some(p) => Some(weighted_intra_cluster_path(el, p, args.max_pairs, args.induced)?),
            None => None,
        };
        per_list.push(json!({
            "path": path.display().to_string(),
            "jaccard": jac,
            "l_weighted": paths.as_ref().map(|m| m.l_weighted),
            "per_cluster": paths.as_ref().map(|m| &m.per_cluster),
            "skipped_singletons": paths.as_ref().map(|m| &m.skipped_singletons),
            "audit": graph_audit(el),
        }));
    }

    let pairwise = if args.pairwise {
        if lists.len() < 2 {
            return Err(Error::Parameter(
                "--pairwise needs at least 2 edge lists".into(),
            ));
        }
        let mut values = Vec::new();
        for i in 0..lists.len() {
            for j in (i + 1)..lists.len() {
                values.push(jaccard(&lists[i], &lists[j]));
            }
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Some(json!({ "values": values, "mean": mean, "min": min, "max": max }))
    } else {
        None
    };

    let first = &per_list[0];
    let report = json!({
        "jaccard": first["jaccard"],
        "l_weighted": first["l_weighted"],
        "per_cluster": first["per_cluster"],
        "audit": first["audit"],
        "edgelists": per_list,
        "pairwise": pairwise,
    });
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Internal(format!("report serialization failed: {e}")))?
        + "\n";
    match &args.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

#[derive(Debug, Clone)]
struct BenchCell {
    ordinal: u64,
    builder: &'static str,
    n: usize,
    k: usize,
    universe: Option<UniverseSpec>,
    alpha: f64,
    samples: usize,
}

#[derive(Debug)]
struct BenchRow {
    ordinal: u64,
    builder: &'static str,
    n: usize,
    k_label: String,
    u_label: String,
    alpha: f64,
    jaccard: f64,
    wall_seconds: f64,
    peak_universe: usize,
}

fn run_bench_cell(cell: &BenchCell, root_seed: u64) -> Result<BenchRow> {
    let gt_seed = derive_seed(root_seed, "bench-gt", cell.ordinal);
    let data_seed = derive_seed(root_seed, "bench-data", cell.ordinal);
    let build_seed = derive_seed(root_seed, "bench-build", cell.ordinal);

    let gt = gen_planar_ground_truth(cell.n, gt_seed)?;
    let data = gen_gmrf(&GmrfParams {
        adjacency: gt.clone(),
        alpha: cell.alpha,
        n_samples: cell.samples,
        seed: data_seed,
    })?;
    let data = dataset::znormalize(data);

    match cell.builder {
        "atmfg" => {
            let cfg = AtmfgConfig {
                k: cell.k,
                universe_limit: cell
                    .universe
                    .map_or(UniverseLimit::Auto, |u| u.resolve(cell.n)),
                clique_size: 4,
                rescue_k: 8,
                seed: build_seed,
                index: IndexParams::default(),
            };
            let (edges, stats) = build_atmfg(&data, &cfg)?;
            Ok(BenchRow {
                ordinal: cell.ordinal,
                builder: "atmfg",
                n: cell.n,
                k_label: cell.k.to_string(),
                u_label: cell
                    .universe
                    .map_or("auto".to_string(), |u| u.label(cell.n)),
                alpha: cell.alpha,
                jaccard: jaccard(&edges, &gt),
                wall_seconds: stats.wall_seconds,
                peak_universe: stats.peak_universe,
            })
        }
        "exact" => {
            let started = std::time::Instant::now();
            let (edges, trace) = build_exact_tmfg(&data)?;
            let wall = started.elapsed().as_secs_f64();
            let peak = trace.steps.last().map_or(4, |s| s.universe_size + 2);
            Ok(BenchRow {
                ordinal: cell.ordinal,
                builder: "exact",
                n: cell.n,
                k_label: String::new(),
                u_label: String::new(),
                alpha: cell.alpha,
                jaccard: jaccard(&edges, &gt),
                wall_seconds: wall,
                peak_universe: peak,
            })
        }
        other => Err(Error::Internal(format!("unknown builder {other}"))),
    }
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    if args.repeats == 0 {
        return Err(Error::Parameter("repeats must be at least 1".into()));
    }
    let mut cells: Vec<BenchCell> = Vec::new();
    let mut next_ordinal = 0u64;
    let mut push = |cells: &mut Vec<BenchCell>,
                    builder: &'static str,
                    n: usize,
                    k: usize,
                    universe: Option<UniverseSpec>,
                    alpha: f64,
                    samples: usize| {
        cells.push(BenchCell {
            ordinal: next_ordinal,
            builder,
            n,
            k,
            universe,
            alpha,
            samples,
        });
        next_ordinal += 1;
    };

    match args.preset {
        BenchPreset::AlphaHeatmap => {
            let sizes = args.sizes.clone().unwrap_or_else(|| vec![1000, 2000, 5000]);
            let alphas = args
                .alphas
                .clone()
                .unwrap_or_else(|| vec![0.1, 0.2, 0.25, 0.3, 0.5, 1.0]);
            let samples = args.samples.unwrap_or(2000);
            for &n in &sizes {
                for &alpha in &alphas {
                    for _ in 0..args.repeats {
                        push(&mut cells, "atmfg", n, args.k, None, alpha, samples);
                    }
                }
            }
        }
        BenchPreset::KSweep => {
            let n = args.sizes.clone().unwrap_or_else(|| vec![5000])[0];
            let ks = args
                .ks
                .clone()
                .unwrap_or_else(|| vec![3, 15, 25, 50, 100, 150, 200]);
            let samples = args.samples.unwrap_or(2000);
            for &k in &ks {
                for _ in 0..args.repeats {
                    push(&mut cells, "atmfg", n, k, None, args.alpha, samples);
                }
            }
        }
        BenchPreset::UniverseSweep => {
            let n = args.sizes.clone().unwrap_or_else(|| vec![10_000])[0];
            let limits = args.universe_limits.clone().unwrap_or_else(|| {
                vec![
                    UniverseSpec::Abs(500),
                    UniverseSpec::Abs(1000),
                    UniverseSpec::FracN(0.1),
                    UniverseSpec::FracN(0.2),
                    UniverseSpec::FracN(0.3),
                    UniverseSpec::FracN(0.5),
                    UniverseSpec::Unbounded,
                ]
            });
            let samples = args.samples.unwrap_or(2000);
            for &u in &limits {
                for _ in 0..args.repeats {
                    push(&mut cells, "atmfg", n, args.k, Some(u), args.alpha, samples);
                }
            }
        }
        BenchPreset::Runtime => {
            let sizes = args
                .sizes
                .clone()
                .unwrap_or_else(|| vec![1000, 2000, 5000, 10_000, 20_000]);
            let samples = args.samples.unwrap_or(512);
            for &n in &sizes {
                for _ in 0..args.repeats {
                    push(
                        &mut cells,
                        "atmfg",
                        n,
                        args.k,
                        Some(UniverseSpec::FracN(0.3)),
                        args.alpha,
                        samples,
                    );
                    if args.exact_cap > 0 && n <= args.exact_cap {
                        push(&mut cells, "exact", n, args.k, None, args.alpha, samples);
                    }
                }
            }
        }
    }

    let threads = std::env::var("ATMFG_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(1)
        .max(1);
    let mut rows: Vec<BenchRow> = if threads > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
        pool.install(|| {
            cells
                .par_iter()
                .map(|c| run_bench_cell(c, args.seed))
                .collect::<Result<Vec<_>>>()
        })?
    } else {
        cells
            .iter()
            .map(|c| run_bench_cell(c, args.seed))
            .collect::<Result<Vec<_>>>()?
    };
    rows.sort_by_key(|r| r.ordinal);

    let mut out = String::from("builder,n,k,u,alpha,jaccard,wall_seconds,peak_universe\n");
    for r in &rows {
        out.push_str(&format!(
            "{},{},{},{},{},{:.6},{:.4},{}\n",
            r.builder, r.n, r.k_label, r.u_label, r.alpha, r.jaccard, r.wall_seconds, r.peak_universe
        ));
    }
    std::fs::write(&args.out, out)?;
    write_manifest(
        &args.out,
        "bench",
        json!({
            "preset": format!("{:?}", args.preset),
            "sizes": args.sizes,
            "alphas": args.alphas,
            "ks": args.ks,
            "repeats": args.repeats,
            "samples": args.samples,
            "alpha": args.alpha,
            "k": args.k,
            "exact_cap": args.exact_cap,
            "seed": args.seed,
            "rows": rows.len(),
        }),
        &[&args.out],
    )?;
    eprintln!("bench wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}
