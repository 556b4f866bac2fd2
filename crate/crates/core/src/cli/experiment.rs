//! Trial orchestration: sample labels, perturb, diffuse, solve, assign and
//! score.

use super::config::ExperimentConfig;
use crate::assignment::{argmax_assign, mbo_refine, transport_assign, MboConfig};
use crate::error::{Error, Result};
use crate::graph::{build_knn_graph, read_features_csv, read_graph, WeightedGraph};
use crate::measures::{corrupt_labels, one_vs_all, partial_labels, read_labels_csv, read_superclasses_csv, DiffusionMethod, HeatKernel, LabelMatrix};
use crate::solvers::{solve_multiclass, SolveMethod, SolverConfig};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::io::Write;

/// A graph with a ground-truth class for every node, restricted to its
/// largest connected component.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub graph: WeightedGraph,
    pub truth: Vec<usize>,
    pub classes: usize,
    pub superclasses: Option<Vec<usize>>,
    /// Original index of each retained node.
    pub original_ids: Vec<usize>,
    /// Nodes outside the largest component.
    pub dropped: usize,
}

impl Dataset {
    pub fn new(graph: WeightedGraph, truth: Vec<usize>) -> Result<Self> {
        Error::check_len(graph.node_count(), truth.len())?;
        if graph.node_count() == 0 {
            return Err(Error::param("empty graph"));
        }
        let mut keep = graph.largest_component();
        keep.sort_unstable();
        let dropped = graph.node_count() - keep.len();
        let graph = if dropped == 0 { graph } else { graph.subgraph(&keep) };
        let truth: Vec<usize> = keep.iter().map(|&v| truth[v]).collect();
        let classes = truth.iter().max().map_or(0, |c| c + 1);
        Ok(Self { graph, truth, classes, superclasses: None, original_ids: keep, dropped })
    }

    pub fn with_superclasses(mut self, superclasses: Vec<usize>) -> Result<Self> {
        if superclasses.len() < self.classes {
            return Err(Error::param(format!("superclass map covers {} of {} classes", superclasses.len(), self.classes)));
        }
        self.superclasses = Some(superclasses);
        Ok(self)
    }

    /// Loads the graph (or builds it from features) and the labels named
    /// in `cfg`.
    pub fn load(cfg: &ExperimentConfig) -> Result<Self> {
        let graph = match (&cfg.graph, &cfg.features) {
            (Some(path), _) => read_graph(path, crate::graph::declared_node_count(path)?)?,
            (None, Some(path)) => build_knn_graph(&read_features_csv(path)?, cfg.knn)?,
            (None, None) => return Err(Error::param("the config needs `graph` or `features`")),
        };
        let path = cfg.labels.as_ref().ok_or_else(|| Error::param("the config needs `labels`"))?;
        let truth = dense_labels(&read_labels_csv(path)?, graph.node_count(), &path.display().to_string())?;
        let data = Self::new(graph, truth)?;
        match &cfg.superclasses {
            Some(path) => data.with_superclasses(read_superclasses_csv(path)?),
            None => Ok(data),
        }
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.classes];
        self.truth.iter().for_each(|&c| sizes[c] += 1);
        sizes
    }
}

/// Dense `node → class` vector from `(node, class)` pairs covering `0..n`.
pub fn dense_labels(pairs: &[(usize, usize)], n: usize, source: &str) -> Result<Vec<usize>> {
    let mut truth = vec![usize::MAX; n];
    for &(node, class) in pairs {
        if node >= n {
            return Err(Error::param(format!("{source}: node {node} is outside the graph (n = {n})")));
        }
        truth[node] = class;
    }
    if let Some(v) = truth.iter().position(|&c| c == usize::MAX) {
        return Err(Error::param(format!("{source}: node {v} has no label")));
    }
    Ok(truth)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial: usize,
    pub labeled: usize,
    pub accuracy: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub nodes: usize,
    pub dropped: usize,
    pub classes: usize,
    pub trials: Vec<TrialResult>,
    pub mean_accuracy: f64,
    /// Sample standard deviation over trials (0 for a single trial).
    pub std_accuracy: f64,
}

impl ExperimentReport {
    pub fn converged(&self) -> bool {
        self.trials.iter().all(|t| t.converged)
    }
}

/// `labels_per_class` nodes drawn uniformly from each class.
fn sample_labels(data: &Dataset, per_class: usize, rng: &mut ChaCha8Rng) -> Result<Vec<(usize, usize)>> {
    let mut members = vec![Vec::new(); data.classes];
    for (v, &c) in data.truth.iter().enumerate() {
        members[c].push(v);
    }
    let mut out = Vec::with_capacity(per_class * data.classes);
    for (c, nodes) in members.iter().enumerate() {
        if nodes.len() < per_class {
            return Err(Error::param(format!("class {c} has {} nodes, {per_class} labels requested", nodes.len())));
        }
        out.extend(rand::seq::index::sample(rng, nodes.len(), per_class).into_iter().map(|i| (nodes[i], c)));
    }
    Ok(out)
}

/// One-vs-all potentials. Corruption can strip a class of all its labels;
/// such a class gets a constant potential below every other entry, so argmax
/// never picks it and transport only fills it when cardinalities demand.
pub fn class_potentials(g: &WeightedGraph, y: &LabelMatrix, p: f64, solver: &SolverConfig) -> Result<(DMatrix<f64>, bool)> {
    let (n, k) = (y.node_count(), y.class_count());
    let present: Vec<usize> = (0..k).filter(|&c| y.column(c).iter().any(|&v| v > 0.0)).collect();
    if present.len() == k {
        let potential = solve_multiclass(g, &one_vs_all(y)?, p, SolveMethod::Auto, solver)?;
        return Ok((potential.matrix().clone(), potential.converged()));
    }
    let (solved, converged) = match present.len() {
        0 => return Err(Error::ZeroMeasure),
        1 => (DMatrix::from_element(n, 1, 1.0), true),
        _ => {
            let sub = DMatrix::from_fn(n, present.len(), |i, j| y.matrix()[(i, present[j])]);
            let reduced = LabelMatrix::from_matrix(sub, y.labeled().to_vec())?;
            let potential = solve_multiclass(g, &one_vs_all(&reduced)?, p, SolveMethod::Auto, solver)?;
            (potential.matrix().clone(), potential.converged())
        }
    };
    let floor = solved.min() - 1.0;
    let mut phi = DMatrix::from_element(n, k, floor);
    for (j, &c) in present.iter().enumerate() {
        phi.set_column(c, &solved.column(j));
    }
    Ok((phi, converged))
}

fn run_trial(data: &Dataset, kernel: &HeatKernel, cfg: &ExperimentConfig, trial: usize) -> Result<TrialResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial as u64);
    let n = data.graph.node_count();
    let labeled = sample_labels(data, cfg.labels_per_class, &mut rng)?;
    let mut y = LabelMatrix::from_labels(n, data.classes, &labeled)?;
    let stream_seed = cfg.seed ^ (trial as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    if cfg.corrupt > 0.0 {
        y = corrupt_labels(&y, cfg.corrupt, stream_seed)?;
    }
    if cfg.partial_size > 0 {
        let sup = data.superclasses.as_ref().ok_or_else(|| Error::param("partial labels need superclasses"))?;
        y = partial_labels(&y, sup, cfg.partial_size, stream_seed.rotate_left(17))?;
    }
    if cfg.t > 0.0 {
        y = kernel.diffuse(&y, cfg.t, DiffusionMethod::Auto)?;
    }
    let solver = SolverConfig { tol: cfg.tol, max_outer: cfg.max_outer, max_inner: cfg.max_inner, ..Default::default() };
    let (phi, converged) = class_potentials(&data.graph, &y, cfg.p, &solver)?;
    let sizes = data.class_sizes();
    let predicted = match (cfg.alpha_mbo, cfg.epsilon) {
        (Some(alpha), _) => mbo_refine(&data.graph, &phi, &sizes, &MboConfig { alpha, ..Default::default() })?.labels(),
        (None, Some(eps)) => transport_assign(&phi, &sizes, eps)?.labels(),
        (None, None) => argmax_assign(&phi),
    };
    let mut is_labeled = vec![false; n];
    labeled.iter().for_each(|&(v, _)| is_labeled[v] = true);
    let (mut hits, mut total) = (0usize, 0usize);
    for v in (0..n).filter(|&v| !is_labeled[v]) {
        total += 1;
        hits += usize::from(predicted[v] == data.truth[v]);
    }
    let accuracy = if total == 0 { 1.0 } else { hits as f64 / total as f64 };
    Ok(TrialResult { trial, labeled: labeled.len(), accuracy, converged })
}

/// Runs `cfg.trials` independent trials on `data`. Results depend only on
/// the config, not on scheduling.
pub fn run_experiment_on(data: &Dataset, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate().map_err(|e| Error::param(e.to_string()))?;
    if data.classes < 2 {
        return Err(Error::param("need at least two classes in the largest component"));
    }
    let kernel = HeatKernel::new(&data.graph);
    let go = || (0..cfg.trials).into_par_iter().map(|k| run_trial(data, &kernel, cfg, k)).collect::<Result<Vec<_>>>();
    let trials = if cfg.workers > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build().map_err(|e| Error::param(e.to_string()))?.install(go)?
    } else {
        go()?
    };
    let k = trials.len() as f64;
    let mean = trials.iter().map(|t| t.accuracy).sum::<f64>() / k;
    let var = if trials.len() > 1 { trials.iter().map(|t| (t.accuracy - mean).powi(2)).sum::<f64>() / (k - 1.0) } else { 0.0 };
    Ok(ExperimentReport {
        nodes: data.graph.node_count(),
        dropped: data.dropped,
        classes: data.classes,
        trials,
        mean_accuracy: mean,
        std_accuracy: var.sqrt(),
    })
}

/// Loads the dataset named in `cfg` and runs it.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate().map_err(|e| Error::param(e.to_string()))?;
    run_experiment_on(&Dataset::load(cfg)?, cfg)
}

/// `trial,labeled,accuracy,converged` followed by no summary; see
/// [`write_summary_csv`].
pub fn write_trials_csv(mut out: impl Write, report: &ExperimentReport) -> std::io::Result<()> {
    writeln!(out, "trial,labeled,accuracy,converged")?;
    for t in &report.trials {
        writeln!(out, "{},{},{},{}", t.trial, t.labeled, t.accuracy, t.converged)?;
    }
    Ok(())
}

/// `nodes,dropped,classes,trials,mean_accuracy,std_accuracy`.
pub fn write_summary_csv(mut out: impl Write, report: &ExperimentReport) -> std::io::Result<()> {
    writeln!(out, "nodes,dropped,classes,trials,mean_accuracy,std_accuracy")?;
    writeln!(out, "{},{},{},{},{},{}", report.nodes, report.dropped, report.classes, report.trials.len(), report.mean_accuracy, report.std_accuracy)
}
