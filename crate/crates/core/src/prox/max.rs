use super::{ProxJacobian, ProxSpec};
use crate::error::{Error, Result};

/// Euclidean projection onto `{z : Σ_e c_e |z_e| ≤ radius}`.
///
/// Returns the projection and the soft-threshold level `θ` (zero when `v`
/// already lies in the ball).
pub fn project_weighted_l1_ball(v: &[f64], c: &[f64], radius: f64) -> Result<(Vec<f64>, f64)> {
    Error::check_len(c.len(), v.len())?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::param("projection input must be finite"));
    }
    let norm: f64 = v.iter().zip(c).map(|(x, ci)| ci * x.abs()).sum();
    if norm <= radius {
        return Ok((v.to_vec(), 0.0));
    }
    // Breakpoints |v_e| / c_e in decreasing order; θ lies between consecutive
    // breakpoints once the active set is right.
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| (v[b].abs() / c[b]).total_cmp(&(v[a].abs() / c[a])));
    let (mut num, mut den) = (-radius, 0.0);
    let mut theta = 0.0;
    for (k, &e) in order.iter().enumerate() {
        num += c[e] * v[e].abs();
        den += c[e] * c[e];
        theta = num / den;
        let next = order.get(k + 1).map_or(0.0, |&f| v[f].abs() / c[f]);
        if theta >= next {
            break;
        }
    }
    let z = v.iter().zip(c).map(|(&x, &ci)| x.signum() * (x.abs() - theta * ci).max(0.0)).collect();
    Ok((z, theta))
}

/// `prox_{λ max_e w_e|·|}` through the Moreau decomposition: the dual ball is
/// `{z : Σ_e |z_e| / w_e ≤ λ}`.
pub fn prox_weighted_max(spec: &ProxSpec, v: &[f64]) -> Result<Vec<f64>> {
    if !spec.is_max() {
        return Err(Error::param("prox_weighted_max needs p = ∞"));
    }
    let c: Vec<f64> = spec.weights().iter().map(|w| 1.0 / w).collect();
    let (proj, _) = project_weighted_l1_ball(v, &c, spec.lambda())?;
    Ok(v.iter().zip(&proj).map(|(a, b)| a - b).collect())
}

/// `I − J_proj`, where `J_proj = diag(1_A) − a aᵀ / ‖c_A‖²` on the active set
/// `A = {e : |v_e| > θ c_e}` and `a = sgn(v) c` on `A`. Breakpoint ties are
/// taken as inactive.
pub(super) fn jacobian(spec: &ProxSpec, v: &[f64]) -> Result<ProxJacobian> {
    let c: Vec<f64> = spec.weights().iter().map(|w| 1.0 / w).collect();
    let (_, theta) = project_weighted_l1_ball(v, &c, spec.lambda())?;
    if theta == 0.0 {
        return Ok(ProxJacobian { diag: vec![0.0; v.len()], rank_one: None });
    }
    let active: Vec<bool> = v.iter().zip(&c).map(|(x, ci)| x.abs() > theta * ci).collect();
    let diag = active.iter().map(|&a| if a { 0.0 } else { 1.0 }).collect();
    let a: Vec<f64> = v.iter().zip(&c).zip(&active).map(|((x, ci), &on)| if on { x.signum() * ci } else { 0.0 }).collect();
    let norm2: f64 = a.iter().map(|x| x * x).sum();
    let rank_one = (norm2 > 0.0).then(|| (1.0 / norm2, a));
    Ok(ProxJacobian { diag, rank_one })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_spec(w: Vec<f64>, lambda: f64) -> ProxSpec {
        ProxSpec::new(f64::INFINITY, w, lambda).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(prox_weighted_max(&max_spec(vec![1.0, 1.0], 1.0), &[2.0, 1.0]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(prox_weighted_max(&max_spec(vec![1.0, 1.0], 2.0), &[1.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        let out = prox_weighted_max(&max_spec(vec![1.0, 2.0], 1e-12), &[0.3, -0.8]).unwrap();
        assert!((out[0] - 0.3).abs() < 1e-11 && (out[1] + 0.8).abs() < 1e-11);
    }

    #[test]
    fn projection_lands_on_sphere() {
        let v = [3.0, -1.0, 0.5, 2.0];
        let c = [1.0, 2.0, 0.5, 1.5];
        let (z, theta) = project_weighted_l1_ball(&v, &c, 1.0).unwrap();
        assert!(theta > 0.0);
        let norm: f64 = z.iter().zip(&c).map(|(x, ci)| ci * x.abs()).sum();
        assert!((norm - 1.0).abs() < 1e-14);
        let (z, theta) = project_weighted_l1_ball(&[0.1, 0.1], &[1.0, 1.0], 1.0).unwrap();
        assert_eq!((z, theta), (vec![0.1, 0.1], 0.0));
    }

    #[test]
    fn jacobian_matches_finite_difference() {
        let spec = max_spec(vec![1.0, 0.5, 2.0, 1.0], 0.7);
        let v = [1.3, -0.4, 0.9, 0.05];
        let jac = jacobian(&spec, &v).unwrap();
        let h = 1e-7;
        for f in 0..4 {
            let mut vp = v;
            let mut vm = v;
            vp[f] += h;
            vm[f] -= h;
            let (pp, pm) = (prox_weighted_max(&spec, &vp).unwrap(), prox_weighted_max(&spec, &vm).unwrap());
            for e in 0..4 {
                let fd = (pp[e] - pm[e]) / (2.0 * h);
                let mut entry = if e == f { jac.diag[e] } else { 0.0 };
                if let Some((beta, a)) = &jac.rank_one {
                    entry += beta * a[e] * a[f];
                }
                assert!((fd - entry).abs() < 1e-6, "({e},{f}) {fd} vs {entry}");
            }
        }
    }

    #[test]
    fn inside_ball_jacobian_is_zero() {
        let jac = jacobian(&max_spec(vec![1.0, 1.0], 5.0), &[0.5, -0.5]).unwrap();
        assert_eq!(jac.diag, vec![0.0, 0.0]);
        assert!(jac.rank_one.is_none());
    }
}
