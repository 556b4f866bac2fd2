use super::ORACLE_MAX_NODES;
use crate::assignment::simplex::{LinearProgram, Sense};
use crate::dense::{incidence_matrix, Spectrum};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::measures::NodeMeasure;
use nalgebra::{DMatrix, DVector};

/// Exponent and flow weights of the norm dual to `‖·‖_{p,w}`:
/// `p = 1 ↦ (∞, 1/w)`, `p = ∞ ↦ (1, 1/w)`, otherwise `(q, w^{1−q})` with
/// `1/p + 1/q = 1`.
pub fn dual_norm_weights(p: f64, w: &[f64]) -> (f64, Vec<f64>) {
    if p == 1.0 {
        (f64::INFINITY, w.iter().map(|w| 1.0 / w).collect())
    } else if p == f64::INFINITY {
        (1.0, w.iter().map(|w| 1.0 / w).collect())
    } else {
        let q = p / (p - 1.0);
        (q, w.iter().map(|w| w.powf(1.0 - q)).collect())
    }
}

/// `‖J‖_{q,c}`: `Σ c|J|` for `q = 1`, `max c|J|` for `q = ∞`, otherwise
/// `(Σ c|J|^q)^{1/q}`.
pub fn weighted_norm(j: &[f64], q: f64, c: &[f64]) -> f64 {
    if q == f64::INFINITY {
        j.iter().zip(c).map(|(j, c)| c * j.abs()).fold(0.0, f64::max)
    } else {
        j.iter().zip(c).map(|(j, c)| c * j.abs().powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// Beckmann cost `min { ‖J‖_{p_B, c} : BJ = μ − ν }`.
pub fn beckmann_oracle(g: &WeightedGraph, mu: &NodeMeasure, nu: &NodeMeasure, p_b: f64, weights: &[f64]) -> Result<f64> {
    Error::check_len(g.node_count(), mu.values().len())?;
    Error::check_len(g.node_count(), nu.values().len())?;
    beckmann_signed(g, &mu.minus(nu), p_b, weights)
}

/// [`beckmann_oracle`] for a mean-zero right-hand side.
pub fn beckmann_signed(g: &WeightedGraph, r: &[f64], p_b: f64, weights: &[f64]) -> Result<f64> {
    if g.node_count() > ORACLE_MAX_NODES {
        return Err(Error::TooLarge(format!("Beckmann oracle handles n ≤ {ORACLE_MAX_NODES}, got {}", g.node_count())));
    }
    g.require_connected()?;
    Error::check_len(g.node_count(), r.len())?;
    Error::check_len(g.edge_count(), weights.len())?;
    if weights.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
        return Err(Error::param("Beckmann weights must be positive"));
    }
    let sum: f64 = r.iter().sum();
    if sum.abs() > 1e-10 {
        return Err(Error::NotMeanZero { sum });
    }
    if !(p_b >= 1.0) {
        return Err(Error::param(format!("Beckmann exponent must be ≥ 1, got {p_b}")));
    }
    if p_b == 1.0 {
        beckmann_l1(g, r, weights)
    } else if p_b == f64::INFINITY {
        beckmann_max(g, r, weights)
    } else if p_b == 2.0 {
        // min Σ c J² s.t. BJ = r is solved by J = C⁻¹Bᵀψ with (BC⁻¹Bᵀ)ψ = r.
        let b = incidence_matrix(g);
        let inv = DVector::from_iterator(weights.len(), weights.iter().map(|c| 1.0 / c));
        let l = &b * DMatrix::from_diagonal(&inv) * b.transpose();
        let x = Spectrum::of(l).pinv_apply(r);
        Ok(x.iter().zip(r).map(|(a, b)| a * b).sum::<f64>().sqrt())
    } else {
        beckmann_smooth(g, r, p_b, weights)
    }
}

fn flow_rows(g: &WeightedGraph, lp: &mut LinearProgram, r: &[f64]) -> Result<()> {
    // Node balance of J = J⁺ − J⁻; J⁺ and J⁻ are the first 2m variables.
    let m = g.edge_count();
    let mut rows = vec![Vec::new(); g.node_count()];
    for (k, e) in g.edges().iter().enumerate() {
        rows[e.i].extend([(k, 1.0), (m + k, -1.0)]);
        rows[e.j].extend([(k, -1.0), (m + k, 1.0)]);
    }
    for (terms, &ri) in rows.iter().zip(r) {
        lp.constrain_sparse(terms, Sense::Eq, ri)?;
    }
    Ok(())
}

fn beckmann_l1(g: &WeightedGraph, r: &[f64], c: &[f64]) -> Result<f64> {
    let mut cost = c.to_vec();
    cost.extend_from_slice(c);
    let mut lp = LinearProgram::minimize(cost);
    flow_rows(g, &mut lp, r)?;
    Ok(lp.solve()?.objective)
}

fn beckmann_max(g: &WeightedGraph, r: &[f64], c: &[f64]) -> Result<f64> {
    let m = g.edge_count();
    let mut cost = vec![0.0; 2 * m + 1];
    cost[2 * m] = 1.0;
    let mut lp = LinearProgram::minimize(cost);
    flow_rows(g, &mut lp, r)?;
    for (k, &ck) in c.iter().enumerate() {
        lp.constrain_sparse(&[(k, ck), (m + k, ck), (2 * m, -1.0)], Sense::Le, 0.0)?;
    }
    Ok(lp.solve()?.objective)
}

/// Damped Newton on `Σ c|J₀ + Nx|^q` over the cycle space `range(N) = ker B`.
fn beckmann_smooth(g: &WeightedGraph, r: &[f64], q: f64, c: &[f64]) -> Result<f64> {
    let b = incidence_matrix(g);
    let unweighted = Spectrum::of(&b * b.transpose());
    let j0 = b.tr_mul(&DVector::from_vec(unweighted.pinv_apply(r)));
    let cycles = Spectrum::of(b.tr_mul(&b));
    let tol = cycles.null_tolerance();
    let basis: Vec<usize> = (0..cycles.values.len()).filter(|&k| cycles.values[k] <= tol).collect();
    if basis.is_empty() {
        // A tree: the flow is unique.
        return Ok(weighted_norm(j0.as_slice(), q, c));
    }
    let nb = DMatrix::from_fn(j0.len(), basis.len(), |e, k| cycles.vectors[(e, basis[k])]);
    let value = |j: &DVector<f64>| j.iter().zip(c).map(|(j, c)| c * j.abs().powf(q)).sum::<f64>();

    let mut x = DVector::zeros(basis.len());
    let mut j = j0.clone();
    let mut f = value(&j);
    for _ in 0..500 {
        let top = j.amax();
        let floor = 1e-12 * top.max(1e-300);
        let grad_e = DVector::from_iterator(j.len(), j.iter().zip(c).map(|(j, c)| c * q * j.abs().powf(q - 1.0) * j.signum()));
        let hess_e = DVector::from_iterator(j.len(), j.iter().zip(c).map(|(j, c)| c * q * (q - 1.0) * j.abs().max(floor).powf(q - 2.0)));
        let grad = nb.tr_mul(&grad_e);
        if grad.norm() <= 1e-14 * (1.0 + grad_e.norm()) {
            break;
        }
        let mut h = nb.tr_mul(&DMatrix::from_diagonal(&hess_e)) * &nb;
        let reg = 1e-14 * h.trace().max(1e-300);
        for k in 0..h.nrows() {
            h[(k, k)] += reg;
        }
        let dir = match h.cholesky() {
            Some(ch) => -ch.solve(&grad),
            None => -grad.clone(),
        };
        let slope = grad.dot(&dir);
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let xt = &x + &dir * step;
            let jt = &j0 + &nb * &xt;
            let ft = value(&jt);
            if ft <= f + 1e-4 * step * slope {
                accepted = ft < f || (f - ft).abs() <= 1e-16 * f;
                x = xt;
                j = jt;
                f = ft;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok(f.powf(1.0 / q))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> WeightedGraph {
        WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    #[test]
    fn path_transport_costs() {
        let g = path3();
        let (mu, nu) = (NodeMeasure::dirac(3, 0), NodeMeasure::dirac(3, 2));
        let ones = [1.0, 1.0];
        assert!((beckmann_oracle(&g, &mu, &nu, 1.0, &ones).unwrap() - 2.0).abs() < 1e-12);
        assert!((beckmann_oracle(&g, &mu, &nu, f64::INFINITY, &ones).unwrap() - 1.0).abs() < 1e-12);
        assert!((beckmann_oracle(&g, &mu, &nu, 2.0, &ones).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!((beckmann_oracle(&g, &mu, &nu, 3.0, &ones).unwrap() - 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn square_splits_flow() {
        // Opposite corners of a unit 4-cycle: two parallel two-edge routes.
        let g = WeightedGraph::new(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)]).unwrap();
        let r = [1.0, 0.0, -1.0, 0.0];
        let c = [1.0; 4];
        assert!((beckmann_signed(&g, &r, 1.0, &c).unwrap() - 2.0).abs() < 1e-12);
        assert!((beckmann_signed(&g, &r, f64::INFINITY, &c).unwrap() - 0.5).abs() < 1e-12);
        assert!((beckmann_signed(&g, &r, 2.0, &c).unwrap() - 1.0).abs() < 1e-12);
        for q in [1.5, 3.0] {
            let expected = (4.0 * 0.5f64.powf(q)).powf(1.0 / q);
            assert!((beckmann_signed(&g, &r, q, &c).unwrap() - expected).abs() < 1e-10, "q {q}");
        }
    }

    #[test]
    fn smooth_route_matches_closed_form_at_two() {
        let g = WeightedGraph::new(5, [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 0.5), (3, 4, 1.0), (0, 4, 1.5), (1, 3, 1.0)]).unwrap();
        let r = [0.6, -0.2, 0.1, -0.4, -0.1];
        let c = [1.0, 0.5, 2.0, 1.0, 0.7, 1.3];
        let exact = beckmann_signed(&g, &r, 2.0, &c).unwrap();
        let newton = beckmann_smooth(&g, &r, 2.0, &c).unwrap();
        assert!((exact - newton).abs() < 1e-10);
    }

    #[test]
    fn dual_weights() {
        let w = [2.0, 0.5];
        assert_eq!(dual_norm_weights(1.0, &w), (f64::INFINITY, vec![0.5, 2.0]));
        assert_eq!(dual_norm_weights(f64::INFINITY, &w), (1.0, vec![0.5, 2.0]));
        let (q, c) = dual_norm_weights(3.0, &w);
        assert!((q - 1.5).abs() < 1e-15 && (c[0] - 2f64.powf(-0.5)).abs() < 1e-15);
    }

    #[test]
    fn oracle_errors() {
        let g = path3();
        assert!(beckmann_signed(&g, &[1.0, 0.0, 0.0], 1.0, &[1.0, 1.0]).is_err());
        assert!(beckmann_signed(&g, &[1.0, 0.0, -1.0], 0.5, &[1.0, 1.0]).is_err());
        assert!(beckmann_signed(&g, &[1.0, 0.0, -1.0], 1.0, &[1.0]).is_err());
        let big = WeightedGraph::lattice(5, 5);
        let mut r = vec![0.0; 25];
        r[0] = 1.0;
        r[24] = -1.0;
        assert!(matches!(beckmann_signed(&big, &r, 2.0, &vec![1.0; big.edge_count()]), Err(Error::TooLarge(_))));
    }
}
