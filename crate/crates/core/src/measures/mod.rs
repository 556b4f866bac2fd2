//! Label measures: per-class node measures, the one-vs-all signed matrix,
//! heat-kernel diffusion, and corrupted / partial label scenarios.

mod diffusion;
mod io;
mod scenarios;

pub use diffusion::{heat_diffuse, heat_diffuse_with, DiffusionMethod, HeatKernel};
pub use io::{read_labels_csv, read_superclasses_csv};
pub use scenarios::{corrupt_labels, partial_labels};

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Nonnegative measure on the nodes of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMeasure {
    values: Vec<f64>,
    mass: f64,
}

impl NodeMeasure {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::param(format!("measure entry {i} is negative or not finite")));
        }
        let mass = values.iter().sum();
        Ok(Self { values, mass })
    }

    pub fn dirac(n: usize, node: usize) -> Self {
        let mut values = vec![0.0; n];
        values[node] = 1.0;
        Self { values, mass: 1.0 }
    }

    pub fn uniform(n: usize) -> Self {
        Self { values: vec![1.0 / n as f64; n], mass: 1.0 }
    }

    /// Normalized indicator of `nodes`.
    pub fn uniform_on(n: usize, nodes: &[usize]) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::param("uniform measure on an empty set"));
        }
        let mut values = vec![0.0; n];
        for &v in nodes {
            values[v] += 1.0;
        }
        Self::new(values)?.normalized()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn is_probability(&self) -> bool {
        (self.mass - 1.0).abs() <= 1e-10
    }

    pub fn normalized(&self) -> Result<Self> {
        if self.mass <= 0.0 {
            return Err(Error::param("cannot normalize a zero measure"));
        }
        Ok(Self { values: self.values.iter().map(|v| v / self.mass).collect(), mass: 1.0 })
    }

    /// `self − other` as a plain signed vector.
    pub fn minus(&self, other: &NodeMeasure) -> Vec<f64> {
        self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect()
    }
}

/// Per-node class weights: column `ℓ` holds the (unnormalized) measure of
/// class `ℓ`. Freshly built label matrices have one distribution per labeled
/// row and zero rows elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMatrix {
    values: DMatrix<f64>,
    labeled: Vec<usize>,
}

impl LabelMatrix {
    /// One-hot rows from `(node, class)` pairs.
    pub fn from_labels(n: usize, classes: usize, labels: &[(usize, usize)]) -> Result<Self> {
        let candidates: Vec<(usize, Vec<usize>)> = labels.iter().map(|&(v, c)| (v, vec![c])).collect();
        Self::from_candidates(n, classes, &candidates)
    }

    /// Rows uniform over each node's candidate class set.
    pub fn from_candidates(n: usize, classes: usize, labels: &[(usize, Vec<usize>)]) -> Result<Self> {
        let mut values = DMatrix::zeros(n, classes);
        let mut labeled = Vec::with_capacity(labels.len());
        for (node, cands) in labels {
            if *node >= n {
                return Err(Error::param(format!("labeled node {node} out of range (n = {n})")));
            }
            if cands.is_empty() {
                return Err(Error::param(format!("node {node} has an empty candidate set")));
            }
            if values.row(*node).iter().any(|&x| x != 0.0) {
                return Err(Error::param(format!("node {node} labeled twice")));
            }
            let share = 1.0 / cands.len() as f64;
            for &c in cands {
                if c >= classes {
                    return Err(Error::param(format!("class {c} out of range (k = {classes})")));
                }
                values[(*node, c)] += share;
            }
            labeled.push(*node);
        }
        labeled.sort_unstable();
        Ok(Self { values, labeled })
    }

    /// Wraps an arbitrary nonnegative `n × k` matrix.
    pub fn from_matrix(values: DMatrix<f64>, mut labeled: Vec<usize>) -> Result<Self> {
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::param("label matrix entries must be finite and nonnegative"));
        }
        labeled.sort_unstable();
        labeled.dedup();
        Ok(Self { values, labeled })
    }

    pub fn node_count(&self) -> usize {
        self.values.nrows()
    }

    pub fn class_count(&self) -> usize {
        self.values.ncols()
    }

    pub fn labeled(&self) -> &[usize] {
        &self.labeled
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn column(&self, class: usize) -> &[f64] {
        let n = self.values.nrows();
        &self.values.as_slice()[class * n..(class + 1) * n]
    }

    pub fn row(&self, node: usize) -> Vec<f64> {
        self.values.row(node).iter().cloned().collect()
    }

    /// Class with the largest weight in `node`'s row (lowest index on ties).
    pub fn primary_class(&self, node: usize) -> usize {
        crate::assignment::argmax_row(self.values.row(node).iter().cloned())
    }

    /// Classes with positive weight in `node`'s row.
    pub fn candidates(&self, node: usize) -> Vec<usize> {
        (0..self.class_count()).filter(|&c| self.values[(node, c)] > 0.0).collect()
    }

    /// Column `class` as a probability measure.
    pub fn measure(&self, class: usize) -> Result<NodeMeasure> {
        let m = NodeMeasure::new(self.column(class).to_vec())?;
        if m.mass() <= 0.0 {
            return Err(Error::EmptyClass { class });
        }
        m.normalized()
    }

    /// Every column rescaled to unit mass.
    pub fn column_normalized(&self) -> Result<DMatrix<f64>> {
        let mut out = self.values.clone();
        for (c, mut col) in out.column_iter_mut().enumerate() {
            let mass: f64 = col.sum();
            if mass <= 0.0 {
                return Err(Error::EmptyClass { class: c });
            }
            col /= mass;
        }
        Ok(out)
    }

    /// True when every unlabeled row is zero (nothing has been diffused yet).
    pub fn is_undiffused(&self) -> bool {
        let mut is_labeled = vec![false; self.node_count()];
        for &v in &self.labeled {
            is_labeled[v] = true;
        }
        (0..self.node_count()).all(|v| is_labeled[v] || self.values.row(v).iter().all(|&x| x == 0.0))
    }
}

/// The one-vs-all matrix `R`, `R_ℓ = μ_ℓ − (k − 1)⁻¹ Σ_{j≠ℓ} μ_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedMeasureMatrix {
    values: DMatrix<f64>,
}

impl SignedMeasureMatrix {
    pub fn from_matrix(values: DMatrix<f64>) -> Self {
        Self { values }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn node_count(&self) -> usize {
        self.values.nrows()
    }

    pub fn class_count(&self) -> usize {
        self.values.ncols()
    }

    pub fn column(&self, class: usize) -> &[f64] {
        let n = self.values.nrows();
        &self.values.as_slice()[class * n..(class + 1) * n]
    }
}

/// Builds `R` from the column-normalized class measures of `y`.
pub fn one_vs_all(y: &LabelMatrix) -> Result<SignedMeasureMatrix> {
    let k = y.class_count();
    if k < 2 {
        return Err(Error::param(format!("one-vs-all needs at least 2 classes, got {k}")));
    }
    let mu = y.column_normalized()?;
    let total: nalgebra::DVector<f64> = mu.column_sum();
    let scale = 1.0 / (k - 1) as f64;
    let mut r = mu.clone();
    for (c, mut col) in r.column_iter_mut().enumerate() {
        let own = mu.column(c);
        for i in 0..col.len() {
            col[i] = own[i] - scale * (total[i] - own[i]);
        }
    }
    Ok(SignedMeasureMatrix { values: r })
}
