//! The `pconductance` command-line harness.
//!
//! Every subcommand writes CSV (to `--out`, or stdout). Exit codes: 0
//! success, 1 usage error, 2 data error, 3 non-convergence or a failed
//! validation check.

pub mod config;
pub mod experiment;
pub mod synthetic;

use crate::assignment::{argmax_assign, mbo_refine, transport_assign, write_predictions_csv, MboConfig};
use crate::error::Error;
use crate::graph::{build_knn_graph, declared_node_count, read_features_csv, read_graph, write_graph, WeightedGraph};
use crate::measures::{one_vs_all, read_labels_csv, DiffusionMethod, HeatKernel, LabelMatrix};
use crate::solvers::{solve_multiclass, SolveMethod, SolverConfig};
use crate::validators::{lattice_benchmark, run_validation_suite, write_lattice_csv, write_validation_csv, SuiteOptions};
use clap::{Args, Parser, Subcommand};
use config::{ConfigError, ExperimentConfig};
use nalgebra::DMatrix;
use std::io::{BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(Error),
    /// Completed, but a solver stopped early or a check failed.
    Incomplete(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(e) => match e {
                Error::InvalidParameter(_) => 1,
                Error::NotConverged { .. } | Error::ProxNoConvergence { .. } | Error::CgBreakdown { .. } | Error::LineSearch { .. } => 3,
                _ => 2,
            },
            CliError::Incomplete(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Incomplete(m) => f.write_str(m),
            CliError::Data(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(Error::from(e))
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "pconductance", version, about = "p-conductance learning on graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Build a k-nearest-neighbor graph from a headerless feature CSV.
    BuildGraph {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the one-vs-all programs: graph + labeled nodes -> potentials CSV
    /// `node_id,class_0,...`.
    Solve(SolveArgs),
    /// Turn potentials into class predictions `node_id,predicted_class`.
    Assign(AssignArgs),
    /// Score predictions against ground truth; writes `metric,value`.
    Evaluate {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Labeled nodes to leave out of the score.
        #[arg(long)]
        labeled: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the randomized validation suites; writes
    /// `check,instance,value,reference,deviation,tolerance,passed`.
    Validate {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Scaled-down instance counts for a fast smoke run.
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// SSNAL vs ADMM residual traces on the 20x20 lattice; writes
    /// `method,iter,inner_iters,eta1,eta2,kkt,objective`.
    BenchLattice {
        #[arg(long, default_value_t = 5.0)]
        p: f64,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full experiment from a config file and/or flags; writes per-trial
    /// rows `trial,labeled,accuracy,converged`.
    Run(RunArgs),
    /// Sample well-separated Gaussian blobs (features + labels CSV).
    SynthBlobs {
        /// Points per class, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "100,100")]
        counts: Vec<usize>,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 3.0)]
        separation: f64,
        #[arg(long, default_value_t = 1.0)]
        spread: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        labels: PathBuf,
    },
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// `node_id,class` rows for the labeled nodes.
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 0.0)]
    pub t: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    /// Class count; defaults to one more than the largest label.
    #[arg(long)]
    pub classes: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-class solver summary `class,iterations,eta1,eta2,conductance`.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AssignArgs {
    #[arg(long)]
    pub potentials: PathBuf,
    /// Cardinality slack: a number, or `n` for the node count.
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Target class sizes, comma separated; defaults to an even split.
    #[arg(long, value_delimiter = ',')]
    pub class_sizes: Option<Vec<usize>>,
    /// MBO refinement weight; needs `--graph`.
    #[arg(long)]
    pub alpha_mbo: Option<f64>,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub t: Option<String>,
    #[arg(long)]
    pub labels_per_class: Option<String>,
    #[arg(long)]
    pub trials: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub epsilon: Option<String>,
    #[arg(long)]
    pub corrupt: Option<String>,
    #[arg(long)]
    pub partial_size: Option<String>,
    #[arg(long)]
    pub alpha_mbo: Option<String>,
    #[arg(long)]
    pub tol: Option<String>,
    #[arg(long)]
    pub workers: Option<String>,
    #[arg(long)]
    pub graph: Option<String>,
    #[arg(long)]
    pub features: Option<String>,
    #[arg(long)]
    pub labels: Option<String>,
    #[arg(long)]
    pub superclasses: Option<String>,
    /// Per-trial CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// One-row summary `nodes,dropped,classes,trials,mean_accuracy,std_accuracy`.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

impl RunArgs {
    /// The config file (or defaults) with flag overrides applied.
    pub fn config(&self) -> CliResult<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let overrides = [
            ("p", &self.p),
            ("t", &self.t),
            ("labels_per_class", &self.labels_per_class),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("epsilon", &self.epsilon),
            ("corrupt", &self.corrupt),
            ("partial_size", &self.partial_size),
            ("alpha_mbo", &self.alpha_mbo),
            ("tol", &self.tol),
            ("workers", &self.workers),
            ("graph", &self.graph),
            ("features", &self.features),
            ("labels", &self.labels),
            ("superclasses", &self.superclasses),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.set(key, v).map_err(|m| CliError::Usage(format!("--{}: {m}", key.replace('_', "-"))))?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn output(path: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(std::fs::File::create(p).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", p.display()))))?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn load_graph(path: &Path) -> CliResult<WeightedGraph> {
    Ok(read_graph(path, declared_node_count(path)?)?)
}

/// `node_id,class_0,...,class_{k-1}`; values round-trip exactly.
pub fn write_potentials_csv(mut out: impl Write, nodes: &[usize], phi: &DMatrix<f64>) -> std::io::Result<()> {
    write!(out, "node_id")?;
    for c in 0..phi.ncols() {
        write!(out, ",class_{c}")?;
    }
    writeln!(out)?;
    for (i, node) in nodes.iter().enumerate() {
        write!(out, "{node}")?;
        for c in 0..phi.ncols() {
            write!(out, ",{}", phi[(i, c)])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn read_potentials_csv(path: &Path) -> crate::error::Result<(Vec<usize>, DMatrix<f64>)> {
    let parse_err = |line: usize, msg: String| Error::Parse { path: path.display().to_string(), line, msg };
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut nodes = Vec::new();
    let mut values = Vec::new();
    let mut width = None;
    for (idx, line) in file.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || idx == 0 && line.starts_with("node_id") {
            continue;
        }
        let mut fields = line.split(',');
        let node = fields.next().unwrap_or("").trim().parse::<usize>().map_err(|_| parse_err(idx + 1, format!("bad node id in {line:?}")))?;
        let row = fields.map(|f| f.trim().parse::<f64>()).collect::<std::result::Result<Vec<_>, _>>().map_err(|_| parse_err(idx + 1, format!("bad potential in {line:?}")))?;
        if row.is_empty() || *width.get_or_insert(row.len()) != row.len() {
            return Err(parse_err(idx + 1, "inconsistent column count".into()));
        }
        nodes.push(node);
        values.extend(row);
    }
    let k = width.ok_or_else(|| parse_err(1, "no potentials".into()))?;
    Ok((nodes.clone(), DMatrix::from_row_slice(nodes.len(), k, &values)))
}

fn read_predictions_csv(path: &Path) -> crate::error::Result<Vec<(usize, usize)>> {
    read_labels_csv(path)
}

/// Even split of `n` into `k` sizes, larger parts first.
pub fn even_split(n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|c| n / k + usize::from(c < n % k)).collect()
}

fn solve(args: &SolveArgs) -> CliResult {
    let full = load_graph(&args.graph)?;
    let mut keep = full.largest_component();
    keep.sort_unstable();
    let g = if keep.len() == full.node_count() { full.clone() } else { full.subgraph(&keep) };
    if keep.len() < full.node_count() {
        eprintln!("restricted to the largest component: {} of {} nodes", keep.len(), full.node_count());
    }
    let mut local = vec![usize::MAX; full.node_count()];
    keep.iter().enumerate().for_each(|(i, &v)| local[v] = i);
    let mut labeled = Vec::new();
    for (node, class) in read_labels_csv(&args.labels)? {
        if node >= full.node_count() {
            return Err(Error::param(format!("{}: labeled node {node} is outside the graph", args.labels.display())).into());
        }
        match local[node] {
            usize::MAX => eprintln!("labeled node {node} is outside the largest component; ignored"),
            i => labeled.push((i, class)),
        }
    }
    let classes = args.classes.unwrap_or_else(|| labeled.iter().map(|l| l.1 + 1).max().unwrap_or(0));
    if classes < 2 {
        return Err(CliError::Usage("need labels from at least two classes".into()));
    }
    let mut y = LabelMatrix::from_labels(g.node_count(), classes, &labeled)?;
    if args.t > 0.0 {
        y = HeatKernel::new(&g).diffuse(&y, args.t, DiffusionMethod::Auto)?;
    }
    let r = one_vs_all(&y)?;
    let cfg = SolverConfig { tol: args.tol, ..Default::default() };
    let potential = solve_multiclass(&g, &r, args.p, SolveMethod::Auto, &cfg)?;
    let mut out = output(&args.out)?;
    write_potentials_csv(&mut out, &keep, potential.matrix())?;
    out.flush()?;
    if let Some(path) = &args.trace {
        let mut t = output(&Some(path.clone()))?;
        writeln!(t, "class,iterations,eta1,eta2,conductance")?;
        for c in 0..classes {
            let (e1, e2) = potential.residuals()[c];
            writeln!(t, "{c},{},{e1:e},{e2:e},{:.12e}", potential.iterations()[c], potential.conductances()[c])?;
        }
        t.flush()?;
    }
    if !potential.converged() {
        return Err(CliError::Incomplete("solver stopped at its iteration cap; potentials written".into()));
    }
    Ok(())
}

/// Parses `--epsilon`: a nonnegative number or `n`.
pub fn parse_epsilon(value: &str, n: usize) -> CliResult<f64> {
    if value.trim().eq_ignore_ascii_case("n") {
        return Ok(n as f64);
    }
    match value.trim().parse::<f64>() {
        Ok(e) if e >= 0.0 => Ok(e),
        _ => Err(CliError::Usage(format!("--epsilon must be a nonnegative number or `n`, got {value:?}"))),
    }
}

fn assign(args: &AssignArgs) -> CliResult {
    let (nodes, phi) = read_potentials_csv(&args.potentials)?;
    let (n, k) = phi.shape();
    let sizes = match &args.class_sizes {
        Some(s) if s.len() != k => return Err(CliError::Usage(format!("--class-sizes has {} entries for {k} classes", s.len()))),
        Some(s) if s.iter().sum::<usize>() != n => return Err(CliError::Usage(format!("--class-sizes must sum to {n}"))),
        Some(s) => s.clone(),
        None => even_split(n, k),
    };
    let labels = match (args.alpha_mbo, &args.epsilon) {
        (Some(alpha), _) => {
            let path = args.graph.as_ref().ok_or_else(|| CliError::Usage("--alpha-mbo needs --graph".into()))?;
            let full = load_graph(path)?;
            if nodes.iter().any(|&v| v >= full.node_count()) {
                return Err(Error::param("potentials name nodes outside the graph").into());
            }
            let g = full.subgraph(&nodes);
            mbo_refine(&g, &phi, &sizes, &MboConfig { alpha, ..Default::default() })?.labels()
        }
        (None, Some(eps)) => transport_assign(&phi, &sizes, parse_epsilon(eps, n)?)?.labels(),
        (None, None) => argmax_assign(&phi),
    };
    let mut out = output(&args.out)?;
    write_predictions_csv(&mut out, &nodes, &labels)?;
    out.flush()?;
    Ok(())
}

fn evaluate(predictions: &Path, truth: &Path, labeled: Option<&Path>, out: &Option<PathBuf>) -> CliResult {
    let truth: std::collections::HashMap<usize, usize> = read_labels_csv(truth)?.into_iter().collect();
    let skip: std::collections::HashSet<usize> = match labeled {
        Some(p) => read_labels_csv(p)?.into_iter().map(|l| l.0).collect(),
        None => Default::default(),
    };
    let (mut evaluated, mut correct, mut missing) = (0usize, 0usize, 0usize);
    for (node, class) in read_predictions_csv(predictions)? {
        if skip.contains(&node) {
            continue;
        }
        match truth.get(&node) {
            Some(&c) => {
                evaluated += 1;
                correct += usize::from(c == class);
            }
            None => missing += 1,
        }
    }
    if evaluated == 0 {
        return Err(Error::param("no predicted node has a ground-truth label").into());
    }
    let mut w = output(out)?;
    writeln!(w, "metric,value")?;
    writeln!(w, "accuracy,{}", correct as f64 / evaluated as f64)?;
    writeln!(w, "evaluated,{evaluated}")?;
    writeln!(w, "correct,{correct}")?;
    writeln!(w, "missing_truth,{missing}")?;
    w.flush()?;
    Ok(())
}

/// Smaller instance counts for `validate --quick`.
pub fn quick_suite(seed: u64) -> SuiteOptions {
    SuiteOptions {
        seed,
        resistance_graphs: 5,
        duality_graphs: 5,
        lp_instances: 10,
        cut_instances: 3,
        cut_samples: 20_000,
        robustness_draws: 100,
        prox_coordinates: 200,
    }
}

fn validate(seed: u64, quick: bool, out: &Option<PathBuf>) -> CliResult {
    let opts = if quick { quick_suite(seed) } else { SuiteOptions { seed, ..Default::default() } };
    let records = run_validation_suite(&opts)?;
    let mut w = output(out)?;
    write_validation_csv(&mut w, &records)?;
    w.flush()?;
    let failed = records.iter().filter(|r| !r.passed).count();
    eprintln!("{} checks, {failed} failed", records.len());
    if failed > 0 {
        return Err(CliError::Incomplete(format!("{failed} validation checks failed")));
    }
    Ok(())
}

fn bench_lattice(p: f64, tol: f64, out: &Option<PathBuf>) -> CliResult {
    let bench = lattice_benchmark(p, tol)?;
    let mut w = output(out)?;
    write_lattice_csv(&mut w, &bench)?;
    w.flush()?;
    let admm = bench.admm_iterations().map_or("n/a".to_string(), |k| k.to_string());
    eprintln!("p = {p}: SSNAL {} outer iterations, ADMM {admm}", bench.ssnal_iterations());
    if !bench.feasible() {
        return Err(CliError::Incomplete(format!("SSNAL did not reach tolerance {tol}")));
    }
    Ok(())
}

fn run(args: &RunArgs) -> CliResult {
    let cfg = args.config()?;
    let data = experiment::Dataset::load(&cfg)?;
    if data.dropped > 0 {
        eprintln!("restricted to the largest component: {} nodes ({} dropped)", data.graph.node_count(), data.dropped);
    }
    let report = experiment::run_experiment_on(&data, &cfg)?;
    let mut w = output(&args.out)?;
    experiment::write_trials_csv(&mut w, &report)?;
    w.flush()?;
    if let Some(path) = &args.summary {
        let mut s = output(&Some(path.clone()))?;
        experiment::write_summary_csv(&mut s, &report)?;
        s.flush()?;
    }
    eprintln!("mean accuracy {:.4} ± {:.4} over {} trials", report.mean_accuracy, report.std_accuracy, report.trials.len());
    if !report.converged() {
        return Err(CliError::Incomplete("some trials hit the solver iteration cap".into()));
    }
    Ok(())
}

fn synth_blobs(counts: &[usize], dim: usize, separation: f64, spread: f64, seed: u64, features: &Path, labels: &Path) -> CliResult {
    let (x, y) = synthetic::gaussian_blobs(counts, dim, separation, spread, seed)?;
    let mut f = output(&Some(features.to_path_buf()))?;
    for row in &x {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(f, "{}", cells.join(","))?;
    }
    f.flush()?;
    let mut l = output(&Some(labels.to_path_buf()))?;
    writeln!(l, "node_id,class")?;
    for (i, c) in y.iter().enumerate() {
        writeln!(l, "{i},{c}")?;
    }
    l.flush()?;
    Ok(())
}

pub fn execute(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::BuildGraph { features, k, out } => {
            let g = build_knn_graph(&read_features_csv(features)?, *k)?;
            write_graph(out, &g)?;
            let components = g.connected_components().len();
            eprintln!("{} nodes, {} edges, {components} component(s)", g.node_count(), g.edge_count());
            Ok(())
        }
        Command::Solve(args) => solve(args),
        Command::Assign(args) => assign(args),
        Command::Evaluate { predictions, truth, labeled, out } => evaluate(predictions, truth, labeled.as_deref(), out),
        Command::Validate { seed, quick, out } => validate(*seed, *quick, out),
        Command::BenchLattice { p, tol, out } => bench_lattice(*p, *tol, out),
        Command::Run(args) => run(args),
        Command::SynthBlobs { counts, dim, separation, spread, seed, features, labels } => synth_blobs(counts, *dim, *separation, *spread, *seed, features, labels),
    }
}

/// Parses `args` (including the program name), runs, and returns the exit
/// code after reporting any error on stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potentials_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("phi.csv");
        let phi = DMatrix::from_row_slice(3, 2, &[0.1, -2.5e-17, 1.0 / 3.0, 7.0, -0.0, 1e300]);
        write_potentials_csv(std::fs::File::create(&path).unwrap(), &[4, 8, 9], &phi).unwrap();
        let (nodes, back) = read_potentials_csv(&path).unwrap();
        assert_eq!(nodes, vec![4, 8, 9]);
        assert_eq!(back, phi);
    }

    #[test]
    fn epsilon_and_split() {
        assert_eq!(parse_epsilon("n", 12).unwrap(), 12.0);
        assert_eq!(parse_epsilon("2.5", 12).unwrap(), 2.5);
        assert!(parse_epsilon("-1", 12).is_err());
        assert!(parse_epsilon("lots", 12).is_err());
        assert_eq!(even_split(7, 3), vec![3, 2, 2]);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(main_with_args(["pconductance", "no-such-command"]), 1);
        assert_eq!(main_with_args(["pconductance", "bench-lattice", "--p", "0.5"]), 1);
        assert_eq!(main_with_args(["pconductance", "solve", "--graph", "/nonexistent/g.txt", "--labels", "/nonexistent/l.csv"]), 2);
        assert_eq!(CliError::Data(Error::NotConverged { iterations: 3, residual: 1.0 }).exit_code(), 3);
    }

    #[test]
    fn flag_overrides() {
        let cli = Cli::try_parse_from(["pconductance", "run", "--p", "3", "--epsilon", "none", "--labels-per-class", "4"]).unwrap();
        let Command::Run(args) = cli.command else { panic!() };
        let cfg = args.config().unwrap();
        assert_eq!((cfg.p, cfg.epsilon, cfg.labels_per_class), (3.0, None, 4));
        let cli = Cli::try_parse_from(["pconductance", "run", "--corrupt", "2"]).unwrap();
        let Command::Run(args) = cli.command else { panic!() };
        assert_eq!(args.config().unwrap_err().exit_code(), 1);
    }
}
