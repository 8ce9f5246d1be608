//! Command-line front end.
//!
//! Every subcommand ends its standard output with a `key=value` block.
//! Timings are in milliseconds. Warnings go to standard error.
//!
//! `--config FILE` reads `key = value` lines whose keys are long flag names
//! of the chosen subcommand. They are applied before the command-line flags,
//! so flags given on the command line win.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dense::DenseMatrix;
use crate::eigen::{eigensolve, LanczosConfig, DEFAULT_MAX_RESTARTS, DEFAULT_TOL};
use crate::error::{Error, Result, Stage};
use crate::graph::{NegativePolicy, SimilarityMeasure};
use crate::io;
use crate::kmeans::{kmeans, KmeansConfig, KmeansInit};
use crate::laplacian::{degrees, handle_isolated, recover_row_eigvecs, sym_scale, IsolatedPolicy};
use crate::metrics::{adjusted_rand_index, cut, ncut, ratio_cut, Partition};
use crate::pipeline::{self, build_matrix, GraphPattern, PipelineConfig, PipelineInput};
use crate::sbm::{sbm_generate, SbmConfig};
use crate::sparse::{CooMatrix, DupPolicy};

#[derive(Debug, Parser)]
#[command(name = "speclust", version, about = "Spectral clustering toolkit")]
#[command(args_override_self = true)]
struct Cli {
    /// Worker threads; results do not depend on this value.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    /// File of `key = value` lines supplying defaults for the subcommand flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a planted-partition stochastic block model.
    GenSbm(GenSbmArgs),
    /// Build a similarity matrix from a point set.
    BuildGraph(BuildGraphArgs),
    /// Largest eigenpairs of a similarity matrix.
    Eigensolve(EigensolveArgs),
    /// Cluster the rows of a dense matrix.
    Kmeans(KmeansArgs),
    /// Full spectral clustering pipeline.
    Cluster(ClusterArgs),
    /// Cut objectives and agreement with a reference labeling.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
struct GenSbmArgs {
    /// Block sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true, action = clap::ArgAction::Set)]
    blocks: Vec<usize>,
    #[arg(long)]
    p_in: f64,
    #[arg(long)]
    p_out: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "sbm.mtx")]
    matrix_out: PathBuf,
    #[arg(long, default_value = "sbm.labels")]
    labels_out: PathBuf,
}

#[derive(Debug, Args)]
struct GraphArgs {
    /// Sparsity pattern: `eps:R`, `knn:K` or `threshold:L`.
    #[arg(long, value_parser = parse_pattern, default_value = "knn:10")]
    pattern: GraphPattern,
    /// Similarity: `cosine`, `xcorr` or `gauss:SIGMA`.
    #[arg(long, value_parser = parse_measure, default_value = "gauss:1")]
    measure: SimilarityMeasure,
    #[arg(long, value_enum, default_value_t = NegativeArg::Clamp)]
    negative: NegativeArg,
}

#[derive(Debug, Args)]
struct BuildGraphArgs {
    /// Dense point file.
    #[arg(long)]
    points: PathBuf,
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, default_value = "graph.mtx")]
    matrix_out: PathBuf,
}

#[derive(Debug, Args)]
struct EigenArgs {
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Lanczos subspace dimension.
    #[arg(long)]
    subspace: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_MAX_RESTARTS)]
    max_restarts: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Operator {
    /// `D^{-1/2} W D^{-1/2}`; vectors are written as eigenvectors of `D⁻¹W`.
    Normalized,
    /// The matrix itself.
    Raw,
}

#[derive(Debug, Args)]
struct EigensolveArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Operator::Normalized)]
    operator: Operator,
    #[command(flatten)]
    eigen: EigenArgs,
    /// Dense n×k file of eigenvectors, one per column.
    #[arg(long)]
    vectors_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InitArg {
    #[value(name = "kmeans++")]
    KmeansPlusPlus,
    Random,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum IsolatedArg {
    Error,
    Remove,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NegativeArg {
    Clamp,
    Abs,
    Keep,
}

#[derive(Debug, Args)]
struct KmeansOpts {
    #[arg(long, default_value_t = 300)]
    max_iters: usize,
    /// Independent seeded runs; the lowest SSE wins.
    #[arg(long, default_value_t = pipeline::DEFAULT_KMEANS_RESTARTS)]
    restarts: usize,
    #[arg(long, value_enum, default_value_t = InitArg::KmeansPlusPlus)]
    init: InitArg,
    /// Scale rows to unit length before clustering.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", default_value_t = false)]
    normalize_rows: bool,
}

#[derive(Debug, Args)]
struct KmeansArgs {
    /// Dense matrix whose rows are clustered.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    opts: KmeansOpts,
    #[arg(long, default_value = "kmeans.labels")]
    labels_out: PathBuf,
}

#[derive(Debug, Args)]
#[group(id = "source", required = true, multiple = false)]
struct SourceArgs {
    /// Dense point file; the graph is built with --pattern and --measure.
    #[arg(long, group = "source")]
    points: Option<PathBuf>,
    /// Edge list; every edge has weight 1.
    #[arg(long, group = "source")]
    edges: Option<PathBuf>,
    /// Sparse similarity matrix.
    #[arg(long, group = "source")]
    matrix: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ClusterArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Node count for --edges; defaults to the largest index plus one.
    #[arg(long)]
    nodes: Option<usize>,
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    k: usize,
    /// Seeds both the eigensolver and k-means.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    eigen: EigenArgs,
    #[command(flatten)]
    kmeans: KmeansOpts,
    #[arg(long, value_enum, default_value_t = IsolatedArg::Error)]
    isolated: IsolatedArg,
    /// One label per node; removed isolated nodes get -1.
    #[arg(long, default_value = "cluster.labels")]
    labels_out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    /// Reference labels for the adjusted Rand index.
    #[arg(long)]
    truth: Option<PathBuf>,
}

fn parse_pattern(s: &str) -> std::result::Result<GraphPattern, String> {
    let (kind, val) = s.split_once(':').ok_or("expected eps:R, knn:K or threshold:L")?;
    match kind {
        "eps" => val.parse().map(GraphPattern::Eps).map_err(|e| format!("{e}")),
        "knn" => val.parse().map(GraphPattern::Knn).map_err(|e| format!("{e}")),
        "threshold" => val.parse().map(GraphPattern::Threshold).map_err(|e| format!("{e}")),
        _ => Err(format!("unknown pattern {kind:?}")),
    }
}

fn parse_measure(s: &str) -> std::result::Result<SimilarityMeasure, String> {
    match s.split_once(':') {
        None if s == "cosine" => Ok(SimilarityMeasure::cosine()),
        None if s == "xcorr" => Ok(SimilarityMeasure::cross_correlation()),
        Some(("gauss", sigma)) => {
            let sigma: f64 = sigma.parse().map_err(|e| format!("{e}"))?;
            SimilarityMeasure::exp_decay(sigma).map_err(|e| e.to_string())
        }
        _ => Err("expected cosine, xcorr or gauss:SIGMA".into()),
    }
}

impl From<NegativeArg> for NegativePolicy {
    fn from(a: NegativeArg) -> Self {
        match a {
            NegativeArg::Clamp => NegativePolicy::ClampZero,
            NegativeArg::Abs => NegativePolicy::Abs,
            NegativeArg::Keep => NegativePolicy::Keep,
        }
    }
}

impl EigenArgs {
    fn config(&self, k: usize, seed: u64) -> LanczosConfig {
        LanczosConfig {
            k,
            m: self.subspace,
            tol: self.tol,
            max_restarts: self.max_restarts,
            seed,
        }
    }
}

impl KmeansOpts {
    fn config(&self, k: usize, seed: u64) -> KmeansConfig {
        KmeansConfig {
            k,
            max_iters: self.max_iters,
            seed,
            init: match self.init {
                InitArg::KmeansPlusPlus => KmeansInit::KmeansPlusPlus,
                InitArg::Random => KmeansInit::RandomPoints,
            },
            tol_changes: 0,
            n_init: self.restarts,
        }
    }
}

/// Ordered `key=value` report lines.
#[derive(Default)]
struct Report(String);

impl Report {
    fn put(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.0, "{key}={value}");
    }

    fn ms(&mut self, key: &str, d: std::time::Duration) {
        self.put(key, format!("{:.3}", d.as_secs_f64() * 1e3));
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(",")
}

fn input<T>(r: Result<T>) -> Result<T> {
    r.map_err(|e| e.at(Stage::Input))
}

fn output(r: Result<()>) -> Result<()> {
    r.map_err(|e| e.at(Stage::Output))
}

fn gen_sbm(a: &GenSbmArgs, out: &mut Report) -> Result<()> {
    let t = Instant::now();
    let cfg = SbmConfig::new(a.blocks.clone(), a.p_in, a.p_out, a.seed);
    let g = sbm_generate(&cfg).map_err(|e| e.at(Stage::Graph))?;
    output(io::save_coo(&a.matrix_out, &g.matrix))?;
    output(io::save_labels(&a.labels_out, &g.labels))?;
    out.put("n", g.labels.len());
    out.put("nnz", g.matrix.nnz());
    out.ms("time_total_ms", t.elapsed());
    Ok(())
}

fn build_graph(a: &BuildGraphArgs, out: &mut Report) -> Result<()> {
    let t = Instant::now();
    let points = input(io::load_dense(&a.points))?;
    let src = PipelineInput::Points {
        points,
        pattern: a.graph.pattern,
        measure: a.graph.measure,
    };
    let w = build_matrix(&src, a.graph.negative.into()).map_err(|e| e.at(Stage::Graph))?;
    let coo = w.to_coo();
    output(io::save_coo(&a.matrix_out, &coo))?;
    out.put("n", coo.n_rows());
    out.put("nnz", coo.nnz());
    out.ms("time_graph_ms", t.elapsed());
    Ok(())
}

fn load_square(path: &Path) -> Result<crate::sparse::CsrMatrix> {
    input((|| {
        let coo = io::load_coo(path)?.canonicalize(DupPolicy::Sum)?;
        if coo.n_rows() != coo.n_cols() {
            return Err(Error::NotSquare {
                n_rows: coo.n_rows(),
                n_cols: coo.n_cols(),
            });
        }
        coo.to_csr()
    })())
}

fn eigensolve_cmd(a: &EigensolveArgs, out: &mut Report) -> Result<()> {
    let w = load_square(&a.matrix)?;
    let cfg = a.eigen.config(a.k, a.seed);
    let t = Instant::now();
    let (basis, vectors) = match a.operator {
        Operator::Raw => {
            let b = eigensolve(&w, &cfg).map_err(|e| e.at(Stage::Eigen))?;
            let v = b.vectors.clone();
            (b, v)
        }
        Operator::Normalized => {
            let (op, deg) = (|| {
                let d = degrees(&w)?;
                let r = handle_isolated(&w, &d, IsolatedPolicy::Error)?;
                Ok((sym_scale(&r.matrix, &r.degrees)?, r.degrees))
            })()
            .map_err(|e: Error| e.at(Stage::Laplacian))?;
            let b = eigensolve(&op, &cfg).map_err(|e| e.at(Stage::Eigen))?;
            let v = recover_row_eigvecs(&b.vectors, &deg).map_err(|e| e.at(Stage::Eigen))?;
            (b, v)
        }
    };
    let elapsed = t.elapsed();
    if let Some(path) = &a.vectors_out {
        output(io::save_dense(path, &vectors))?;
    }
    out.put("eigenvalues", join(&basis.values));
    out.put("residuals", join(&basis.residuals));
    out.put("restarts", basis.stats.restarts);
    out.put("matvecs", basis.stats.matvecs);
    out.ms("time_eigen_ms", elapsed);
    Ok(())
}

fn kmeans_cmd(a: &KmeansArgs, out: &mut Report) -> Result<()> {
    let v = input(io::load_dense(&a.input))?;
    let v: DenseMatrix = if a.opts.normalize_rows { v.normalized_rows() } else { v };
    let t = Instant::now();
    let l = kmeans(&v, &a.opts.config(a.k, a.seed)).map_err(|e| e.at(Stage::Kmeans))?;
    let elapsed = t.elapsed();
    output(io::save_labels(&a.labels_out, &l.labels))?;
    out.put("sse", format!("{:?}", l.sse));
    out.put("iters", l.iters_run);
    out.ms("time_kmeans_ms", elapsed);
    Ok(())
}

fn cluster_cmd(a: &ClusterArgs, out: &mut Report, warn: &mut Vec<String>) -> Result<()> {
    let s = &a.source;
    let src = input(if let Some(p) = &s.points {
        io::load_dense(p).map(|points| PipelineInput::Points {
            points,
            pattern: a.graph.pattern,
            measure: a.graph.measure,
        })
    } else if let Some(p) = &s.edges {
        io::load_edges(p).map(|pairs| PipelineInput::Edges { pairs, n: a.nodes })
    } else {
        let p = s.matrix.as_ref().expect("clap enforces one source");
        io::load_coo(p).map(PipelineInput::Matrix)
    })?;
    let mut cfg = PipelineConfig::new(src, a.k);
    cfg.eigen = a.eigen.config(a.k, a.seed);
    cfg.kmeans = a.kmeans.config(a.k, a.seed);
    cfg.normalize_rows = a.kmeans.normalize_rows;
    cfg.negative_policy = a.graph.negative.into();
    cfg.isolated_policy = match a.isolated {
        IsolatedArg::Error => IsolatedPolicy::Error,
        IsolatedArg::Remove => IsolatedPolicy::Remove,
    };
    let r = pipeline::run(&cfg)?;
    output(io::save_labels_opt(&a.labels_out, &r.full_labels()))?;
    warn.extend(r.warnings.iter().cloned());
    out.put("n_nodes", r.n_nodes);
    out.put("n_clustered", r.kept.len());
    out.put("eigenvalues", join(&r.eigenvalues));
    out.put("ncut", format!("{:?}", r.ncut_value));
    out.put("sse", format!("{:?}", r.labeling.sse));
    out.put("kmeans_iters", r.labeling.iters_run);
    let t = r.timings;
    out.ms("time_graph_ms", t.graph);
    out.ms("time_laplacian_ms", t.laplacian);
    out.ms("time_eigen_ms", t.eigen);
    out.ms("time_kmeans_ms", t.kmeans);
    out.ms("time_metrics_ms", t.metrics);
    out.ms("time_total_ms", t.total());
    Ok(())
}

/// Keeps the nodes with a label; returns the induced matrix and labels.
fn assigned_part(w: &CooMatrix, labels: &[Option<usize>]) -> Result<(crate::sparse::CsrMatrix, Vec<usize>)> {
    let mut new_index = vec![usize::MAX; labels.len()];
    let mut kept_labels = Vec::new();
    for (i, l) in labels.iter().enumerate() {
        if let Some(l) = l {
            new_index[i] = kept_labels.len();
            kept_labels.push(*l);
        }
    }
    let m = kept_labels.len();
    let t: Vec<_> = w
        .triplets()
        .filter(|&(i, j, _)| new_index[i] != usize::MAX && new_index[j] != usize::MAX)
        .map(|(i, j, v)| (new_index[i], new_index[j], v))
        .collect();
    Ok((CooMatrix::from_triplets(m, m, &t)?.to_csr()?, kept_labels))
}

fn eval_cmd(a: &EvalArgs, out: &mut Report, warn: &mut Vec<String>) -> Result<()> {
    let w = load_square(&a.matrix)?.to_coo();
    let labels = input(io::load_labels_opt(&a.labels))?;
    if labels.len() != w.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: w.n_rows(),
            found: labels.len(),
        }
        .at(Stage::Input));
    }
    let unassigned = labels.iter().filter(|l| l.is_none()).count();
    if unassigned > 0 {
        warn.push(format!("{unassigned} node(s) without a label are left out"));
    }
    let (sub, kept) = assigned_part(&w, &labels).map_err(|e| e.at(Stage::Metrics))?;
    let p = Partition::from_labels(kept);
    let metric = |e: Error| e.at(Stage::Metrics);
    out.put("cut", format!("{:?}", cut(&sub, &p).map_err(metric)?));
    out.put("ratio_cut", format!("{:?}", ratio_cut(&sub, &p).map_err(metric)?));
    out.put("ncut", format!("{:?}", ncut(&sub, &p).map_err(metric)?));
    if let Some(path) = &a.truth {
        let truth = input(io::load_labels_opt(path))?;
        if truth.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                found: truth.len(),
            }
            .at(Stage::Input));
        }
        let (x, y): (Vec<usize>, Vec<usize>) = labels
            .iter()
            .zip(&truth)
            .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
            .unzip();
        out.put("ari", format!("{:?}", adjusted_rand_index(&x, &y).map_err(metric)?));
    }
    Ok(())
}

/// Turns a config file into `--key=value` arguments.
fn config_args(path: &Path) -> std::result::Result<Vec<String>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut args = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("{}:{}: expected key = value", path.display(), no + 1))?;
        let (k, v) = (k.trim(), v.trim());
        if k == "config" {
            return Err(format!("{}:{}: config files cannot nest", path.display(), no + 1));
        }
        args.push(format!("--{k}={v}"));
    }
    Ok(args)
}

/// Locates the global `--config` value and the subcommand token without a
/// full parse, so that required flags may come from the config file.
fn scan(argv: &[String]) -> (Option<String>, Option<usize>) {
    let mut config = None;
    let mut sub = None;
    let mut i = 1;
    while i < argv.len() {
        let a = argv[i].as_str();
        if a == "--" {
            break;
        }
        if let Some(v) = a.strip_prefix("--config=") {
            config = Some(v.to_string());
        } else if a == "--config" || a == "--threads" {
            if a == "--config" {
                config = argv.get(i + 1).cloned();
            }
            i += 1;
        } else if sub.is_none() && !a.starts_with('-') {
            sub = Some(i);
        }
        i += 1;
    }
    (config, sub)
}

fn parse(argv: &[String]) -> std::result::Result<Cli, clap::Error> {
    let (Some(path), Some(sub)) = scan(argv) else {
        return Cli::try_parse_from(argv);
    };
    let extra = config_args(Path::new(&path)).map_err(|m| {
        clap::Error::raw(clap::error::ErrorKind::Io, format!("{m}\n"))
    })?;
    // config values go first so that command-line flags override them
    let mut merged: Vec<String> = argv[..=sub].to_vec();
    merged.extend(extra);
    merged.extend_from_slice(&argv[sub + 1..]);
    Cli::try_parse_from(merged)
}

fn dispatch(cli: &Cli, out: &mut Report, warn: &mut Vec<String>) -> Result<()> {
    match &cli.command {
        Command::GenSbm(a) => gen_sbm(a, out),
        Command::BuildGraph(a) => build_graph(a, out),
        Command::Eigensolve(a) => eigensolve_cmd(a, out),
        Command::Kmeans(a) => kmeans_cmd(a, out),
        Command::Cluster(a) => cluster_cmd(a, out, warn),
        Command::Eval(a) => eval_cmd(a, out, warn),
    }
}

/// Runs one command and returns the process exit code: 0 on success, 1 on
/// a runtime error, 2 on a usage error.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = match parse(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut out = Report::default();
    let mut warn = Vec::new();
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n as usize).build() {
            Ok(pool) => pool.install(|| dispatch(&cli, &mut out, &mut warn)),
            Err(e) => {
                eprintln!("error: cannot start {n} threads: {e}");
                return 1;
            }
        },
        None => dispatch(&cli, &mut out, &mut warn),
    };
    for w in &warn {
        eprintln!("warning: {w}");
    }
    match result {
        Ok(()) => {
            print!("{}", out.0);
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
