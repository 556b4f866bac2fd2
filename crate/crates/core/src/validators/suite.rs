//! Randomized fuzz suites. Each instance draws from its own seed so results
//! do not depend on scheduling.

use super::{
    beckmann_signed, dual_norm_weights, exhaustive_st_mincut, label_flip_perturbation, mincut_maxflow_lp, monte_carlo_cuts,
    random_connected_graph, random_graph_with, random_measure_pair, randomized_cut_check, robustness_bound_check,
};
use crate::dense::{laplacian_matrix, Spectrum};
use crate::error::Result;
use crate::measures::NodeMeasure;
use crate::prox::ProxSpec;
use crate::solvers::{solve_p2_closed_form, ssnal_solve, SolverConfig};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::io::Write;

/// One checked quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationRecord {
    pub check: String,
    pub instance: usize,
    pub value: f64,
    pub reference: f64,
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl ValidationRecord {
    pub fn new(check: impl Into<String>, instance: usize, value: f64, reference: f64, tolerance: f64) -> Self {
        let deviation = (value - reference).abs();
        Self { check: check.into(), instance, value, reference, deviation, tolerance, passed: deviation <= tolerance }
    }

    /// A boolean check; `value` and `reference` are 1/0.
    pub fn flag(check: impl Into<String>, instance: usize, passed: bool) -> Self {
        let value = if passed { 1.0 } else { 0.0 };
        Self { check: check.into(), instance, value, reference: 1.0, deviation: 1.0 - value, tolerance: 0.0, passed }
    }
}

pub fn write_validation_csv(mut out: impl Write, records: &[ValidationRecord]) -> std::io::Result<()> {
    writeln!(out, "check,instance,value,reference,deviation,tolerance,passed")?;
    for r in records {
        writeln!(out, "{},{},{:e},{:e},{:e},{:e},{}", r.check, r.instance, r.value, r.reference, r.deviation, r.tolerance, r.passed)?;
    }
    Ok(())
}

fn instance_rng(seed: u64, check: u64, instance: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(check << 32 | instance as u64);
    rng
}

fn run<F>(count: usize, f: F) -> Result<Vec<ValidationRecord>>
where
    F: Fn(usize) -> Result<Vec<ValidationRecord>> + Sync + Send,
{
    let nested: Vec<Vec<ValidationRecord>> = (0..count).into_par_iter().map(f).collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

/// Product of the p-conductance and its dual Beckmann cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityReport {
    pub p: f64,
    pub primal: f64,
    pub oracle: f64,
    pub product: f64,
    pub deviation: f64,
}

/// Solves `C_p(μ, ν)` with SSNAL at `tol` and pairs it with the Beckmann
/// oracle under the dual norm.
pub fn duality_report(g: &crate::graph::WeightedGraph, mu: &NodeMeasure, nu: &NodeMeasure, p: f64, tol: f64) -> Result<DualityReport> {
    let r = mu.minus(nu);
    let cfg = SolverConfig { tol, max_outer: 1000, ..Default::default() };
    let state = ssnal_solve(g, &r, p, &cfg)?;
    let primal = state.objective(g, &r);
    let (q, c) = dual_norm_weights(p, &g.weights());
    let oracle = beckmann_signed(g, &r, q, &c)?;
    let product = primal * oracle;
    Ok(DualityReport { p, primal, oracle, product, deviation: (product - 1.0).abs() })
}

/// `C₂(μ, ν)² (μ − ν)ᵀL†(μ − ν) = 1` against a dense pseudoinverse.
pub fn check_effective_resistance(seed: u64, count: usize) -> Result<Vec<ValidationRecord>> {
    run(count, |k| {
        let mut rng = instance_rng(seed, 1, k);
        let n = rng.random_range(2..=50);
        let density = rng.random_range(0.05..0.4);
        let g = random_connected_graph(&mut rng, n, density);
        let (mu, nu) = random_measure_pair(&mut rng, n);
        let (_, c2) = solve_p2_closed_form(&g, &mu, &nu, 1e-13)?;
        let r = mu.minus(&nu);
        let x = Spectrum::of(laplacian_matrix(&g)).pinv_apply(&r);
        let resistance: f64 = x.iter().zip(&r).map(|(a, b)| a * b).sum();
        Ok(vec![ValidationRecord::new("effective_resistance", k, c2 * c2 * resistance, 1.0, 1e-8)])
    })
}

pub fn check_gauge_duality(seed: u64, count: usize, ps: &[f64]) -> Result<Vec<ValidationRecord>> {
    run(count, |k| {
        let mut rng = instance_rng(seed, 2, k);
        let n = rng.random_range(3..=12);
        let density = rng.random_range(0.1..0.5);
        let g = random_connected_graph(&mut rng, n, density);
        let (mu, nu) = random_measure_pair(&mut rng, n);
        ps.iter()
            .map(|&p| {
                let rep = duality_report(&g, &mu, &nu, p, 1e-10)?;
                Ok(ValidationRecord::new(format!("gauge_duality_p{p}"), k, rep.product, 1.0, 1e-5))
            })
            .collect()
    })
}

/// Mincut and maxflow LP values agree.
pub fn check_lp_duality(seed: u64, count: usize) -> Result<Vec<ValidationRecord>> {
    run(count, |k| {
        let mut rng = instance_rng(seed, 3, k);
        let n = rng.random_range(3..=14);
        let density = rng.random_range(0.1..0.5);
        let g = random_connected_graph(&mut rng, n, density);
        let (mu, nu) = random_measure_pair(&mut rng, n);
        let rep = mincut_maxflow_lp(&g, &mu, &nu)?;
        Ok(vec![ValidationRecord::new("lp_duality", k, rep.mincut, rep.maxflow, 1e-7)])
    })
}

/// Dirac pairs on integer weights: the LP value is the classical s–t mincut.
pub fn check_exhaustive_mincut(seed: u64, count: usize) -> Result<Vec<ValidationRecord>> {
    run(count, |k| {
        let mut rng = instance_rng(seed, 4, k);
        let n = rng.random_range(3..=14);
        let density = rng.random_range(0.1..0.5);
        let g = random_graph_with(&mut rng, n, density, |rng| rng.random_range(1..=3) as f64);
        let s = rng.random_range(0..n);
        let t = (s + rng.random_range(1..n)) % n;
        let rep = mincut_maxflow_lp(&g, &NodeMeasure::dirac(n, s), &NodeMeasure::dirac(n, t))?;
        let exact = exhaustive_st_mincut(&g, s, t)?;
        Ok(vec![
            ValidationRecord::new("exhaustive_mincut", k, rep.mincut, exact, 1e-9),
            ValidationRecord::flag("exhaustive_mincut_integral", k, rep.mincut.round() == exact),
        ])
    })
}

/// Threshold cuts: at a random feasible potential the closed-form ratio is
/// the `C₁` objective and the Monte-Carlo means sit within three standard
/// errors; at the LP-optimal potential the ratio is the mincut value.
pub fn check_randomized_cuts(seed: u64, count: usize, samples: usize) -> Result<Vec<ValidationRecord>> {
    run(count, |k| {
        let mut rng = instance_rng(seed, 5, k);
        let n = rng.random_range(3..=12);
        let density = rng.random_range(0.1..0.5);
        let g = random_connected_graph(&mut rng, n, density);
        let (mu, nu) = random_measure_pair(&mut rng, n);
        let r = mu.minus(&nu);
        let variation = |phi: &[f64]| g.edges().iter().map(|e| e.w * (phi[e.i] - phi[e.j]).abs()).sum::<f64>();

        let mut phi: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let mut dot: f64 = phi.iter().zip(&r).map(|(a, b)| a * b).sum();
        if dot < 0.0 {
            phi.iter_mut().for_each(|v| *v = 1.0 - *v);
            dot = -dot;
        }
        phi.iter_mut().for_each(|v| *v /= dot);
        let exact = randomized_cut_check(&g, &mu, &nu, &phi)?;
        let objective = variation(&phi);
        let mc = monte_carlo_cuts(&g, &mu, &nu, &phi, samples, seed ^ (k as u64).wrapping_mul(0x9e37_79b9))?;

        let rep = mincut_maxflow_lp(&g, &mu, &nu)?;
        let low = rep.potentials.iter().cloned().fold(f64::INFINITY, f64::min);
        let opt: Vec<f64> = rep.potentials.iter().map(|v| (v - low).max(0.0)).collect();
        let at_opt = randomized_cut_check(&g, &mu, &nu, &opt)?;
        Ok(vec![
            ValidationRecord::new("randomized_cut_objective", k, exact.ratio, objective, 1e-6 * objective.max(1.0)),
            ValidationRecord::flag("randomized_cut_monte_carlo", k, mc.agrees_with(&exact, 3.0)),
            ValidationRecord::new("randomized_cut_mincut", k, at_opt.ratio, rep.mincut, 1e-6 * rep.mincut.max(1.0)),
        ])
    })
}

/// Random graphs, measures, noise and times; the bound holds at every time
/// and the improvement interval behaves as claimed.
pub fn check_robustness(seed: u64, draws: usize) -> Result<Vec<ValidationRecord>> {
    run(draws, |k| {
        let mut rng = instance_rng(seed, 6, k);
        let n = rng.random_range(3..=if k % 10 == 0 { 200 } else { 40 });
        let density = rng.random_range(0.02f64..0.3).min(6.0 / n as f64 + 0.02);
        let g = random_connected_graph(&mut rng, n, density);
        let (mu, nu, eta) = if k % 4 == 0 && n >= 8 {
            // Label-flip noise: m labels per class, some flipped.
            let m = rng.random_range(1..=n / 4);
            let nodes = rand::seq::index::sample(&mut rng, n, 2 * m).into_vec();
            let (a, b) = nodes.split_at(m);
            let flips = rng.random_range(0..m);
            label_flip_perturbation(n, a, b, &a[..flips], &b[..flips])?
        } else {
            let (mu, nu) = random_measure_pair(&mut rng, n);
            let scale = 10f64.powf(rng.random_range(-2.0..1.0));
            let mut eta: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0) * scale).collect();
            let mean = eta.iter().sum::<f64>() / n as f64;
            eta.iter_mut().for_each(|v| *v -= mean);
            (mu, nu, eta)
        };
        let mut grid: Vec<f64> = (0..8).map(|_| 10f64.powf(rng.random_range(-3.0..1.0))).collect();
        grid.push(0.0);
        let table = robustness_bound_check(&g, &mu, &nu, &eta, &grid)?;
        let mut records = vec![ValidationRecord::new("robustness_violations", k, table.violations(1e-9) as f64, 0.0, 0.0)];
        if let Some((_, hi)) = table.improvement_interval() {
            let inside: Vec<f64> = (1..20).map(|j| hi * j as f64 / 20.0).collect();
            let dense = robustness_bound_check(&g, &mu, &nu, &eta, &inside)?;
            records.push(ValidationRecord::flag("robustness_improvement", k, dense.improvement_holds()));
        }
        Ok(records)
    })
}

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..300 {
        if hi - lo <= 1e-15 * hi.abs().max(1e-300) {
            break;
        }
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}

/// Scalar prox `argmin_x ½(x − v)² + a|x|^p` by golden section on `[0, |v|]`.
pub fn prox_scalar_oracle(v: f64, p: f64, a: f64) -> f64 {
    let s = v.abs();
    if s == 0.0 {
        return 0.0;
    }
    let h = |x: f64| 0.5 * (x - s).powi(2) + a * x.powf(p);
    let mut x = golden_section(h, 0.0, s);
    if h(0.0) <= h(x) {
        x = 0.0;
    }
    x * v.signum()
}

/// `prox_{λ max_e w_e|·|}(v)` via its one-dimensional level problem:
/// `u_e = sign(v_e) min(|v_e|, s/w_e)` with `s` minimizing
/// `½ Σ (|v_e| − s/w_e)₊² + λs`.
pub fn prox_max_oracle(v: &[f64], w: &[f64], lambda: f64) -> Vec<f64> {
    let top = v.iter().zip(w).map(|(v, w)| w * v.abs()).fold(0.0, f64::max);
    let slope = |s: f64| lambda - v.iter().zip(w).map(|(v, w)| (v.abs() - s / w).max(0.0) / w).sum::<f64>();
    let s = if slope(0.0) >= 0.0 {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0, top);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if slope(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    v.iter().zip(w).map(|(v, w)| v.signum() * v.abs().min(s / w)).collect()
}

/// Finite-p prox against golden section; `p = ∞` against the level-set
/// oracle plus the Moreau decomposition `v = prox(v) + λ Π(v/λ)` onto the
/// dual ball `{Σ |x|/w ≤ 1}`.
pub fn check_prox_oracles(seed: u64, coordinates: usize) -> Result<Vec<ValidationRecord>> {
    let mut records = Vec::new();
    for (slot, p) in [1.0, 1.5, 2.0, 3.0, 5.0].into_iter().enumerate() {
        let mut rng = instance_rng(seed, 7, slot);
        let mut worst: f64 = 0.0;
        for _ in 0..coordinates {
            let v = rng.random_range(-5.0..5.0);
            let w = rng.random_range(0.1..3.0);
            let lambda = rng.random_range(0.01..2.0);
            let got = ProxSpec::new(p, vec![w], lambda)?.prox(&[v])?[0];
            let oracle = prox_scalar_oracle(v, p, lambda * w);
            worst = worst.max((got - oracle).abs() / v.abs().max(1.0));
        }
        records.push(ValidationRecord::new(format!("prox_oracle_p{p}"), 0, worst, 0.0, 1e-6));
    }
    let mut rng = instance_rng(seed, 7, 99);
    let (mut worst_oracle, mut worst_moreau): (f64, f64) = (0.0, 0.0);
    let mut done = 0;
    while done < coordinates {
        let len = rng.random_range(1..=10);
        let v: Vec<f64> = (0..len).map(|_| rng.random_range(-5.0..5.0)).collect();
        let w: Vec<f64> = (0..len).map(|_| rng.random_range(0.1..3.0)).collect();
        let lambda = rng.random_range(0.01..5.0);
        let spec = ProxSpec::new(f64::INFINITY, w.clone(), lambda)?;
        let u = spec.prox(&v)?;
        let oracle = prox_max_oracle(&v, &w, lambda);
        let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        worst_oracle = worst_oracle.max(u.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale);
        // Moreau: x = (v − u)/λ is the dual-ball projection of v/λ, i.e.
        // Σ|x|/w ≤ 1 and ⟨u, x⟩ = max_e w_e|u_e| (Fenchel equality).
        let x: Vec<f64> = v.iter().zip(&u).map(|(v, u)| (v - u) / lambda).collect();
        let dual: f64 = x.iter().zip(&w).map(|(x, w)| x.abs() / w).sum();
        let pairing: f64 = u.iter().zip(&x).map(|(u, x)| u * x).sum();
        let gauge = spec.gauge(&u);
        worst_moreau = worst_moreau.max((dual - 1.0).max(0.0)).max((pairing - gauge).abs() / scale);
        done += len;
    }
    records.push(ValidationRecord::new("prox_oracle_pinf", 0, worst_oracle, 0.0, 1e-6));
    records.push(ValidationRecord::new("prox_moreau_pinf", 0, worst_moreau, 0.0, 1e-12));
    Ok(records)
}

/// Sizes for [`run_validation_suite`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    pub resistance_graphs: usize,
    pub duality_graphs: usize,
    pub lp_instances: usize,
    pub cut_instances: usize,
    pub cut_samples: usize,
    pub robustness_draws: usize,
    pub prox_coordinates: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seed: 2024,
            resistance_graphs: 20,
            duality_graphs: 50,
            lp_instances: 50,
            cut_instances: 10,
            cut_samples: 100_000,
            robustness_draws: 1000,
            prox_coordinates: 1000,
        }
    }
}

pub fn run_validation_suite(opts: &SuiteOptions) -> Result<Vec<ValidationRecord>> {
    let mut all = check_effective_resistance(opts.seed, opts.resistance_graphs)?;
    all.extend(check_gauge_duality(opts.seed, opts.duality_graphs, &[1.0, 2.0, 3.0, f64::INFINITY])?);
    all.extend(check_lp_duality(opts.seed, opts.lp_instances)?);
    all.extend(check_exhaustive_mincut(opts.seed, opts.lp_instances)?);
    all.extend(check_randomized_cuts(opts.seed, opts.cut_instances, opts.cut_samples)?);
    all.extend(check_robustness(opts.seed, opts.robustness_draws)?);
    all.extend(check_prox_oracles(opts.seed, opts.prox_coordinates)?);
    Ok(all)
}
