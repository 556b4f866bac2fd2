//! Proximal maps of `s(u) = Σ_e w_e |u_e|^p` (finite `p ≥ 1`) and
//! `s(u) = max_e w_e |u_e|` (`p = ∞`), with generalized Jacobians.

mod max;
mod power;

pub use max::{project_weighted_l1_ball, prox_weighted_max};
pub use power::{prox_scalar, prox_weighted_power};

use crate::error::{Error, Result};

/// `prox_{λs}` for one weight vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxSpec {
    p: f64,
    weights: Vec<f64>,
    lambda: f64,
}

impl ProxSpec {
    /// `p = f64::INFINITY` selects the weighted max.
    pub fn new(p: f64, weights: Vec<f64>, lambda: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::param(format!("p must be at least 1, got {p}")));
        }
        if let Some(e) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::param(format!("weight {e} must be positive and finite")));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::param(format!("prox scale must be positive, got {lambda}")));
        }
        Ok(Self { p, weights, lambda })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn is_max(&self) -> bool {
        self.p.is_infinite()
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.p, self.weights.clone(), lambda)
    }

    /// `s(u)` (without the `λ` factor).
    pub fn penalty(&self, u: &[f64]) -> f64 {
        if self.is_max() {
            u.iter().zip(&self.weights).map(|(x, w)| w * x.abs()).fold(0.0, f64::max)
        } else {
            u.iter().zip(&self.weights).map(|(x, w)| w * x.abs().powf(self.p)).sum()
        }
    }

    /// The weighted norm `s(u)^{1/p}` (`s(u)` itself for `p = ∞`).
    pub fn gauge(&self, u: &[f64]) -> f64 {
        if self.is_max() {
            self.penalty(u)
        } else {
            self.penalty(u).powf(1.0 / self.p)
        }
    }

    pub fn prox(&self, v: &[f64]) -> Result<Vec<f64>> {
        if self.is_max() {
            prox_weighted_max(self, v)
        } else {
            prox_weighted_power(self, v)
        }
    }

    /// An element of `∂prox_{λs}` at `v`, where `u_bar = prox_{λs}(v)`.
    pub fn jacobian(&self, v: &[f64], u_bar: &[f64]) -> Result<ProxJacobian> {
        if self.is_max() {
            max::jacobian(self, v)
        } else {
            Ok(ProxJacobian { diag: generalized_jacobian_diag(self, u_bar)?, rank_one: None })
        }
    }
}

/// `diag(d) + β a aᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxJacobian {
    pub diag: Vec<f64>,
    pub rank_one: Option<(f64, Vec<f64>)>,
}

/// Diagonal generalized Jacobian of the finite-`p` prox at output `u_bar`:
/// `1 / (1 + λ p (p − 1) w |ū|^{p−2})`, with `0` at `ū = 0` when `p < 2`.
pub fn generalized_jacobian_diag(spec: &ProxSpec, u_bar: &[f64]) -> Result<Vec<f64>> {
    if spec.is_max() {
        return Err(Error::param("the p = ∞ Jacobian is not diagonal; use ProxSpec::jacobian"));
    }
    Error::check_len(spec.weights.len(), u_bar.len())?;
    let p = spec.p;
    Ok(u_bar
        .iter()
        .zip(&spec.weights)
        .map(|(&u, &w)| {
            if u == 0.0 && p < 2.0 {
                0.0
            } else if p == 1.0 {
                1.0
            } else {
                1.0 / (1.0 + spec.lambda * p * (p - 1.0) * w * u.abs().powf(p - 2.0))
            }
        })
        .collect())
}

const SUBGRADIENT_TOL: f64 = 1e-6;

/// Whether `z ∈ ∂s(u)` within a tolerance of `1e−6`.
pub fn fenchel_subgradient_check(spec: &ProxSpec, u: &[f64], z: &[f64]) -> bool {
    let w = &spec.weights;
    if u.len() != w.len() || z.len() != w.len() || u.iter().chain(z).any(|x| !x.is_finite()) {
        return false;
    }
    let tol = SUBGRADIENT_TOL;
    if !spec.is_max() {
        let p = spec.p;
        return u.iter().zip(z).zip(w).all(|((&ui, &zi), &wi)| {
            if p == 1.0 {
                if ui == 0.0 {
                    zi.abs() <= wi + tol
                } else {
                    (zi - wi * ui.signum()).abs() <= tol * wi.max(1.0)
                }
            } else {
                let g = wi * p * ui.abs().powf(p - 1.0) * ui.signum();
                (zi - g).abs() <= tol * g.abs().max(1.0)
            }
        });
    }
    let dual: f64 = z.iter().zip(w).map(|(zi, wi)| zi.abs() / wi).sum();
    let top = spec.penalty(u);
    if top == 0.0 {
        return dual <= 1.0 + tol;
    }
    if (dual - 1.0).abs() > tol {
        return false;
    }
    u.iter().zip(z).zip(w).all(|((&ui, &zi), &wi)| {
        if zi.abs() <= tol {
            return true;
        }
        let on_max = wi * ui.abs() >= top - tol * top.max(1.0);
        on_max && zi * ui > 0.0
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(ProxSpec::new(0.5, vec![1.0], 1.0).is_err());
        assert!(ProxSpec::new(2.0, vec![0.0], 1.0).is_err());
        assert!(ProxSpec::new(2.0, vec![1.0], 0.0).is_err());
        assert!(ProxSpec::new(f64::NAN, vec![1.0], 1.0).is_err());
        assert!(ProxSpec::new(f64::INFINITY, vec![1.0], 1.0).unwrap().is_max());
    }

    #[test]
    fn jacobian_diag_examples() {
        let spec = ProxSpec::new(2.0, vec![1.0, 3.0], 0.5).unwrap();
        assert_eq!(generalized_jacobian_diag(&spec, &[7.0, 0.0]).unwrap(), vec![0.5, 0.25]);
        let spec = ProxSpec::new(1.0, vec![1.0, 1.0], 0.5).unwrap();
        assert_eq!(generalized_jacobian_diag(&spec, &[0.5, 0.0]).unwrap(), vec![1.0, 0.0]);
        let spec = ProxSpec::new(3.0, vec![1.0], 1.0 / 3.0).unwrap();
        let u = (5f64.sqrt() - 1.0) / 2.0;
        let d = generalized_jacobian_diag(&spec, &[u]).unwrap()[0];
        assert!((d - 1.0 / 5f64.sqrt()).abs() < 1e-12);
        let spec = ProxSpec::new(1.5, vec![1.0], 1.0).unwrap();
        assert_eq!(generalized_jacobian_diag(&spec, &[0.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn jacobian_diag_matches_finite_difference() {
        for &p in &[1.5, 2.0, 3.0, 5.0] {
            let spec = ProxSpec::new(p, vec![0.7], 0.4).unwrap();
            for &v in &[-2.0, -0.3, 0.8, 1.7] {
                let h = 1e-6;
                let fd = (prox_scalar(v + h, p, 0.28).unwrap() - prox_scalar(v - h, p, 0.28).unwrap()) / (2.0 * h);
                let u = spec.prox(&[v]).unwrap();
                let d = generalized_jacobian_diag(&spec, &u).unwrap()[0];
                assert!((d - fd).abs() < 1e-6, "p {p} v {v}: {d} vs {fd}");
            }
        }
    }

    #[test]
    fn subgradient_examples() {
        let two = ProxSpec::new(2.0, vec![1.0], 1.0).unwrap();
        assert!(fenchel_subgradient_check(&two, &[1.0], &[2.0]));
        assert!(!fenchel_subgradient_check(&two, &[1.0], &[2.1]));
        let one = ProxSpec::new(1.0, vec![1.0], 1.0).unwrap();
        for z in [-1.0, -0.3, 0.0, 0.9, 1.0] {
            assert!(fenchel_subgradient_check(&one, &[0.0], &[z]));
        }
        assert!(!fenchel_subgradient_check(&one, &[0.0], &[1.1]));
        assert!(!fenchel_subgradient_check(&one, &[2.0], &[0.5]));

        let inf = ProxSpec::new(f64::INFINITY, vec![1.0; 3], 1.0).unwrap();
        let u = [1.0, 1.0, 0.5];
        assert!(fenchel_subgradient_check(&inf, &u, &[0.5, 0.5, 0.0]));
        assert!(fenchel_subgradient_check(&inf, &u, &[1.0, 0.0, 0.0]));
        assert!(!fenchel_subgradient_check(&inf, &u, &[0.5, 0.4, 0.1]));
        assert!(!fenchel_subgradient_check(&inf, &u, &[1.5, -0.5, 0.0]));
        assert!(!fenchel_subgradient_check(&inf, &u, &[0.3, 0.3, 0.0]));
        assert!(fenchel_subgradient_check(&inf, &[0.0; 3], &[0.3, -0.3, 0.0]));
    }

    #[test]
    fn penalty_and_gauge() {
        let spec = ProxSpec::new(2.0, vec![1.0, 4.0], 1.0).unwrap();
        assert_eq!(spec.penalty(&[3.0, 1.0]), 13.0);
        assert!((spec.gauge(&[3.0, 1.0]) - 13f64.sqrt()).abs() < 1e-15);
        let spec = ProxSpec::new(f64::INFINITY, vec![1.0, 4.0], 1.0).unwrap();
        assert_eq!(spec.gauge(&[3.0, -1.0]), 4.0);
    }
}
