use super::{check_signed_measure, conductance_objective, kkt_residuals, SolverConfig, SolverState, TraceRow};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::linalg::{cg_solve_with, project_mean_zero, CgOptions, HessianOperator};
use crate::prox::ProxSpec;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `f(φ) = min_u 𝓛_σ(φ, u; z̃, ỹ)`, the inner problem of the augmented
/// Lagrangian method:
///
/// `f(φ) = s(ū) + σ₁/2 ‖ū − w‖² − ‖z̃‖²/(2σ₁) + ỹ c + σ₂/2 c²`, where
/// `w = Bᵀφ + z̃/σ₁`, `ū = prox_{s/σ₁}(w)` and `c = φᵀr − 1`.
#[derive(Debug, Clone)]
pub struct AugmentedSubproblem<'g> {
    graph: &'g WeightedGraph,
    spec: ProxSpec,
    r: Vec<f64>,
    z: Vec<f64>,
    y: f64,
    sigma1: f64,
    sigma2: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Evaluation {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub w: Vec<f64>,
    pub u_bar: Vec<f64>,
    /// Magnitude of the summands of `value`, for roundoff-aware comparisons.
    pub scale: f64,
}

impl<'g> AugmentedSubproblem<'g> {
    pub fn new(graph: &'g WeightedGraph, p: f64, r: Vec<f64>, z: Vec<f64>, y: f64, sigma1: f64, sigma2: f64) -> Result<Self> {
        Error::check_len(graph.node_count(), r.len())?;
        Error::check_len(graph.edge_count(), z.len())?;
        if !(sigma1 > 0.0 && sigma2 > 0.0) {
            return Err(Error::param("penalties must be positive"));
        }
        let spec = ProxSpec::new(p, graph.weights(), 1.0 / sigma1)?;
        Ok(Self { graph, spec, r, z, y, sigma1, sigma2 })
    }

    pub(crate) fn evaluate(&self, phi: &[f64]) -> Result<Evaluation> {
        Error::check_len(self.graph.node_count(), phi.len())?;
        let mut w = vec![0.0; self.graph.edge_count()];
        self.graph.incidence_t_into(phi, &mut w);
        for (wi, zi) in w.iter_mut().zip(&self.z) {
            *wi += zi / self.sigma1;
        }
        let u_bar = self.spec.prox(&w)?;
        let c = dot(phi, &self.r) - 1.0;
        let moreau: f64 = u_bar.iter().zip(&w).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() * 0.5 * self.sigma1;
        let penalty = self.spec.penalty(&u_bar);
        let z_term = dot(&self.z, &self.z) / (2.0 * self.sigma1);
        let value = penalty + moreau - z_term + self.y * c + 0.5 * self.sigma2 * c * c;
        let scale = penalty + moreau + z_term + (self.y * c).abs() + 0.5 * self.sigma2 * c * c;

        let flow: Vec<f64> = w.iter().zip(&u_bar).map(|(a, b)| self.sigma1 * (a - b)).collect();
        let mut gradient = vec![0.0; phi.len()];
        self.graph.incidence_into(&flow, &mut gradient);
        let coef = self.y + self.sigma2 * c;
        for (gi, ri) in gradient.iter_mut().zip(&self.r) {
            *gi += coef * ri;
        }
        Ok(Evaluation { value, gradient, w, u_bar, scale })
    }

    pub fn value(&self, phi: &[f64]) -> Result<f64> {
        Ok(self.evaluate(phi)?.value)
    }

    /// `∇f = B z̃ + σ₁ B(Bᵀφ − ū) + ỹ r + σ₂(φᵀr − 1) r`.
    pub fn gradient(&self, phi: &[f64]) -> Result<Vec<f64>> {
        Ok(self.evaluate(phi)?.gradient)
    }

    /// `ū = prox_{s/σ₁}(Bᵀφ + z̃/σ₁)`.
    pub fn u_bar(&self, phi: &[f64]) -> Result<Vec<f64>> {
        Ok(self.evaluate(phi)?.u_bar)
    }
}

#[derive(Debug, Clone)]
pub struct InnerOutcome {
    pub phi: Vec<f64>,
    pub u_bar: Vec<f64>,
    pub iterations: usize,
    pub grad_norm: f64,
    /// `‖φ_t − φ̄‖` for every Newton iterate before the last.
    pub newton_errors: Vec<f64>,
}

/// Semismooth Newton-CG on the inner problem, iterating while `‖∇f‖ > tol`.
pub fn ssncg_inner(sub: &AugmentedSubproblem, phi0: &[f64], tol: f64, cfg: &SolverConfig) -> Result<InnerOutcome> {
    let g = sub.graph;
    let mut phi = phi0.to_vec();
    Error::check_len(g.node_count(), phi.len())?;
    // f is invariant along the constant vector; stay in its complement.
    project_mean_zero(&mut phi);
    let mut iterates = vec![phi.clone()];
    let mut ev = sub.evaluate(&phi)?;
    let mut gnorm = norm(&ev.gradient);
    let mut iterations = 0;
    while gnorm > tol {
        if iterations == cfg.max_inner {
            break;
        }
        iterations += 1;
        let jac = sub.spec.jacobian(&ev.w, &ev.u_bar)?;
        let mut h = HessianOperator::new(g, jac.diag, sub.r.clone(), sub.sigma1, sub.sigma2)?
            .with_shift(cfg.tau1 * cfg.tau2.min(gnorm));
        if let Some((beta, a)) = jac.rank_one {
            h = h.with_rank_one(beta, a)?;
        }
        let jacobi = h.diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
        let opts = CgOptions {
            tol: 0.5f64.min(gnorm.sqrt()),
            max_iter: cfg.cg_max_iter,
            deflate_constant: true,
            jacobi: Some(jacobi),
        };
        let rhs: Vec<f64> = ev.gradient.iter().map(|v| -v).collect();
        let mut d = match cg_solve_with(&h, &rhs, &opts) {
            Ok(out) => out.x,
            Err(Error::CgBreakdown { iterate, .. }) => iterate,
            Err(e) => return Err(e),
        };
        let mut slope = dot(&ev.gradient, &d);
        if !(slope < 0.0) {
            d = rhs;
            slope = -gnorm * gnorm;
        }

        let mut step = cfg.armijo_step;
        let mut halvings = 0;
        let next = loop {
            let trial: Vec<f64> = phi.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            let cand = sub.evaluate(&trial)?;
            let slack = 1e-13 * (1.0 + ev.scale);
            if cand.value <= ev.value + cfg.armijo_sigma * step * slope + slack {
                break (trial, cand);
            }
            halvings += 1;
            if halvings > cfg.max_halvings {
                return Err(Error::LineSearch { halvings: cfg.max_halvings, grad_norm: gnorm });
            }
            step *= cfg.armijo_eta;
        };
        phi = next.0;
        ev = next.1;
        gnorm = norm(&ev.gradient);
        iterates.push(phi.clone());
    }
    let newton_errors = iterates[..iterates.len() - 1]
        .iter()
        .map(|it| norm(&it.iter().zip(&phi).map(|(a, b)| a - b).collect::<Vec<_>>()))
        .collect();
    Ok(InnerOutcome { u_bar: ev.u_bar, phi, iterations, grad_norm: gnorm, newton_errors })
}

/// Semismooth Newton augmented Lagrangian method for
/// `min s(u)  s.t.  Bᵀφ = u, φᵀr = 1`.
///
/// Returns the final state; `converged` is false when `max_outer` was hit
/// before `max(η₁, η₂) ≤ tol`.
pub fn ssnal_solve(g: &WeightedGraph, r: &[f64], p: f64, cfg: &SolverConfig) -> Result<SolverState> {
    check_signed_measure(g, r)?;
    cfg.validate()?;
    ProxSpec::new(p, g.weights(), 1.0)?;
    let r_norm = norm(r);
    let phi: Vec<f64> = r.iter().map(|v| v / (r_norm * r_norm)).collect();
    let mut u = vec![0.0; g.edge_count()];
    g.incidence_t_into(&phi, &mut u);
    let mut state = SolverState {
        p,
        phi,
        u,
        z: vec![0.0; g.edge_count()],
        y: 0.0,
        sigma1: cfg.sigma_init,
        sigma2: cfg.sigma_init,
        trace: Vec::new(),
        converged: false,
        newton_errors: Vec::new(),
    };
    let mut eta1_prev = f64::INFINITY;
    for k in 0..cfg.max_outer {
        let sub = AugmentedSubproblem::new(g, p, r.to_vec(), state.z.clone(), state.y, state.sigma1, state.sigma2)?;
        let inner_tol = (1.0 + r_norm) * 1e-12f64.max((0.1 * cfg.tol).min(0.5f64.powi(k as i32)));
        let inner = ssncg_inner(&sub, &state.phi, inner_tol, cfg)?;
        let mut bt = vec![0.0; g.edge_count()];
        g.incidence_t_into(&inner.phi, &mut bt);
        for ((z, b), u) in state.z.iter_mut().zip(&bt).zip(&inner.u_bar) {
            *z += state.sigma1 * (b - u);
        }
        state.y += state.sigma2 * (dot(&inner.phi, r) - 1.0);
        state.phi = inner.phi;
        state.u = inner.u_bar;
        state.newton_errors.push(inner.newton_errors);

        let (eta1, eta2) = kkt_residuals(g, &state, r)?;
        state.trace.push(TraceRow {
            outer_iter: k + 1,
            inner_iters: inner.iterations,
            eta1,
            eta2,
            objective: conductance_objective(g, p, &state.phi, r),
            sigma1: state.sigma1,
            sigma2: state.sigma2,
        });
        if eta1.max(eta2) <= cfg.tol {
            state.converged = true;
            break;
        }
        if eta1 > 0.5 * eta1_prev {
            state.sigma1 = (2.0 * state.sigma1).min(cfg.sigma_max);
            state.sigma2 = (2.0 * state.sigma2).min(cfg.sigma_max);
        }
        eta1_prev = eta1;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::solve_p2_signed;
    use crate::validators::random_connected_graph;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn path3() -> WeightedGraph {
        WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    fn tight() -> SolverConfig {
        SolverConfig { tol: 1e-9, ..Default::default() }
    }

    #[test]
    fn path_values_for_each_p() {
        let g = path3();
        let r = [1.0, 0.0, -1.0];
        for (p, expected) in [(2.0, 0.5f64.sqrt()), (1.0, 1.0), (f64::INFINITY, 0.5), (3.0, 2f64.powf(-2.0 / 3.0))] {
            let st = ssnal_solve(&g, &r, p, &tight()).unwrap();
            assert!(st.converged, "p {p}");
            let obj = st.objective(&g, &r);
            assert!((obj - expected).abs() < 1e-6, "p {p}: {obj} vs {expected}");
        }
        let st = ssnal_solve(&g, &r, 2.0, &tight()).unwrap();
        for (a, b) in st.phi.iter().zip([0.5, 0.0, -0.5]) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn matches_closed_form_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let n = rng.random_range(5..30);
            let g = random_connected_graph(&mut rng, n, 0.15);
            let mut r: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            project_mean_zero(&mut r);
            let (exact, _) = solve_p2_signed(&g, &r, 1e-14).unwrap();
            let st = ssnal_solve(&g, &r, 2.0, &tight()).unwrap();
            let err: f64 = norm(&st.phi.iter().zip(&exact).map(|(a, b)| a - b).collect::<Vec<_>>());
            assert!(err / norm(&exact) < 1e-5);
        }
    }

    #[test]
    fn quadratic_inner_solve_converges_fast() {
        let g = path3();
        let sub = AugmentedSubproblem::new(&g, 2.0, vec![1.0, 0.0, -1.0], vec![0.1, -0.2], 0.3, 1.0, 1.0).unwrap();
        let out = ssncg_inner(&sub, &[0.0; 3], 1e-12, &SolverConfig::default()).unwrap();
        assert!(out.iterations <= 6, "{} iterations", out.iterations);
        assert!(out.grad_norm <= 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let g = random_connected_graph(&mut rng, 10, 0.3);
        let mut r: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
        project_mean_zero(&mut r);
        let z: Vec<f64> = (0..g.edge_count()).map(|_| rng.random_range(-0.5..0.5)).collect();
        let sub = AugmentedSubproblem::new(&g, 3.0, r, z, 0.4, 2.0, 3.0).unwrap();
        let phi: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
        let grad = sub.gradient(&phi).unwrap();
        let h = 1e-5;
        for i in 0..10 {
            let (mut a, mut b) = (phi.clone(), phi.clone());
            a[i] += h;
            b[i] -= h;
            let fd = (sub.value(&a).unwrap() - sub.value(&b).unwrap()) / (2.0 * h);
            assert!((fd - grad[i]).abs() < 1e-5);
        }
    }

    #[test]
    fn trace_and_errors() {
        let g = path3();
        assert!(matches!(ssnal_solve(&g, &[1.0, 0.0, 0.0], 2.0, &tight()), Err(Error::NotMeanZero { .. })));
        assert!(ssnal_solve(&g, &[1.0, 0.0, -1.0], 0.5, &tight()).is_err());
        let st = ssnal_solve(&g, &[1.0, 0.0, -1.0], 3.0, &SolverConfig { max_outer: 1, tol: 1e-14, ..Default::default() })
            .unwrap();
        assert!(!st.converged);
        assert_eq!(st.trace.len(), 1);
    }
}
