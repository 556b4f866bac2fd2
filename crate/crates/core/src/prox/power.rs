use super::ProxSpec;
use crate::error::{Error, Result};

const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 100;

/// `argmin_u ½(u − v)² + a|u|^p` for a single coordinate.
pub fn prox_scalar(v: f64, p: f64, a: f64) -> Result<f64> {
    if !v.is_finite() {
        return Err(Error::param(format!("prox input must be finite, got {v}")));
    }
    if p == 1.0 {
        return Ok(v.signum() * (v.abs() - a).max(0.0));
    }
    if p == 2.0 {
        return Ok(v / (1.0 + 2.0 * a));
    }
    let target = v.abs();
    if target == 0.0 {
        return Ok(0.0);
    }
    // x − |v| + a p x^{p−1} = 0 is increasing in x with a root in (0, |v|).
    let g = |x: f64| x - target + a * p * x.powf(p - 1.0);
    // Where the penalty term alone reaches |v|, g ≥ 0: an upper bracket that is
    // tight when the root is tiny.
    let (mut lo, mut hi) = (0.0, target.min((target / (a * p)).powf(1.0 / (p - 1.0))));
    if hi == 0.0 {
        return Ok(0.0);
    }
    let mut x = hi;
    for _ in 0..NEWTON_MAX_ITER {
        let gx = g(x);
        if gx == 0.0 {
            return Ok(v.signum() * x);
        }
        if gx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let slope = 1.0 + a * p * (p - 1.0) * x.powf(p - 2.0);
        let mut next = x - gx / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= NEWTON_TOL * next || hi - lo <= NEWTON_TOL * hi {
            return Ok(v.signum() * next);
        }
        x = next;
    }
    Err(Error::ProxNoConvergence { v, p })
}

/// Coordinatewise `prox_{λs}` for `s(u) = Σ w_e |u_e|^p`, finite `p`.
pub fn prox_weighted_power(spec: &ProxSpec, v: &[f64]) -> Result<Vec<f64>> {
    if spec.is_max() {
        return Err(Error::param("prox_weighted_power needs a finite p"));
    }
    Error::check_len(spec.weights().len(), v.len())?;
    v.iter().zip(spec.weights()).map(|(&vi, &w)| prox_scalar(vi, spec.p(), spec.lambda() * w)).collect()
}
