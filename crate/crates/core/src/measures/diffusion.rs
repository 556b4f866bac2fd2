use super::LabelMatrix;
use crate::dense::{laplacian_matrix, Spectrum};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use nalgebra::DMatrix;
use std::sync::OnceLock;

/// Largest graph diffused through a dense eigendecomposition under
/// [`DiffusionMethod::Auto`].
pub const SPECTRAL_LIMIT: usize = 2000;
const TAYLOR_ORDER: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiffusionMethod {
    #[default]
    Auto,
    Spectral,
    /// Truncated Taylor series with substeps `t / 2^s`, `‖tL‖₁ / 2^s ≤ 1`.
    Taylor,
}

/// `e^{−tL}` for one graph. The eigendecomposition is computed on first use
/// and shared by later calls.
pub struct HeatKernel<'g> {
    graph: &'g WeightedGraph,
    spectrum: OnceLock<Spectrum>,
}

impl<'g> HeatKernel<'g> {
    pub fn new(graph: &'g WeightedGraph) -> Self {
        Self { graph, spectrum: OnceLock::new() }
    }

    pub fn diffuse(&self, y: &LabelMatrix, t: f64, method: DiffusionMethod) -> Result<LabelMatrix> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::param(format!("diffusion time must be finite and nonnegative, got {t}")));
        }
        let n = self.graph.node_count();
        Error::check_len(n, y.node_count())?;
        if t == 0.0 {
            return Ok(y.clone());
        }
        let spectral = match method {
            DiffusionMethod::Auto => n <= SPECTRAL_LIMIT,
            DiffusionMethod::Spectral => true,
            DiffusionMethod::Taylor => false,
        };
        let mut out = DMatrix::zeros(n, y.class_count());
        for c in 0..y.class_count() {
            let col = y.column(c);
            let mut diffused = if spectral {
                let spectrum = self.spectrum.get_or_init(|| Spectrum::of(laplacian_matrix(self.graph)));
                spectrum.apply(col, |lam| (-t * lam).exp())
            } else {
                self.taylor(col, t)
            };
            clamp_and_rescale(&mut diffused, col.iter().sum());
            out.set_column(c, &nalgebra::DVector::from_vec(diffused));
        }
        LabelMatrix::from_matrix(out, y.labeled().to_vec())
    }

    fn taylor(&self, x: &[f64], t: f64) -> Vec<f64> {
        let norm = self.graph.laplacian_norm1();
        let mut steps = 1usize;
        while t * norm / steps as f64 > 1.0 {
            steps *= 2;
        }
        let h = t / steps as f64;
        let n = x.len();
        let mut cur = x.to_vec();
        let mut term = vec![0.0; n];
        let mut next = vec![0.0; n];
        for _ in 0..steps {
            term.copy_from_slice(&cur);
            let mut acc = cur.clone();
            for k in 1..=TAYLOR_ORDER {
                self.graph.laplacian_apply_into(&term, &mut next);
                let scale = -h / k as f64;
                for (t, nx) in term.iter_mut().zip(&next) {
                    *t = scale * nx;
                }
                for (a, t) in acc.iter_mut().zip(&term) {
                    *a += t;
                }
            }
            cur = acc;
        }
        cur
    }
}

// Floating-point diffusion can leave tiny negative entries; clamp them and
// restore the column's mass.
fn clamp_and_rescale(x: &mut [f64], mass: f64) {
    for v in x.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let total: f64 = x.iter().sum();
    if total > 0.0 {
        let s = mass / total;
        x.iter_mut().for_each(|v| *v *= s);
    }
}

/// `Y_diffused = e^{−tL} Y`.
pub fn heat_diffuse(g: &WeightedGraph, y: &LabelMatrix, t: f64) -> Result<LabelMatrix> {
    HeatKernel::new(g).diffuse(y, t, DiffusionMethod::Auto)
}

pub fn heat_diffuse_with(g: &WeightedGraph, y: &LabelMatrix, t: f64, method: DiffusionMethod) -> Result<LabelMatrix> {
    HeatKernel::new(g).diffuse(y, t, method)
}
