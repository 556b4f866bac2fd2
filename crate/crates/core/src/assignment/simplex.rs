//! Dense two-phase tableau simplex with Bland's rule. Intended for
//! desk-scale problems (a few hundred variables).

use crate::error::{Error, Result};

const TOL: f64 = 1e-9;
const PIVOT_LIMIT: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

/// `min/max cᵀx  s.t.  a_i x (≤ | = | ≥) b_i,  x ≥ 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    objective: Vec<f64>,
    maximize: bool,
    rows: Vec<(Vec<f64>, Sense, f64)>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

impl LinearProgram {
    pub fn minimize(objective: Vec<f64>) -> Self {
        Self { objective, maximize: false, rows: Vec::new() }
    }

    pub fn maximize(objective: Vec<f64>) -> Self {
        Self { objective, maximize: true, rows: Vec::new() }
    }

    pub fn variable_count(&self) -> usize {
        self.objective.len()
    }

    pub fn constrain(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) -> Result<()> {
        Error::check_len(self.objective.len(), coeffs.len())?;
        self.rows.push((coeffs, sense, rhs));
        Ok(())
    }

    /// Sparse form of [`constrain`](Self::constrain).
    pub fn constrain_sparse(&mut self, terms: &[(usize, f64)], sense: Sense, rhs: f64) -> Result<()> {
        let mut coeffs = vec![0.0; self.objective.len()];
        for &(j, a) in terms {
            if j >= coeffs.len() {
                return Err(Error::param(format!("variable {j} out of range")));
            }
            coeffs[j] += a;
        }
        self.constrain(coeffs, sense, rhs)
    }

    pub fn solve(&self) -> Result<LpSolution> {
        let nv = self.objective.len();
        let mut rows: Vec<(Vec<f64>, Sense, f64)> = self.rows.clone();
        for (a, sense, b) in rows.iter_mut() {
            if *b < 0.0 {
                a.iter_mut().for_each(|v| *v = -*v);
                *b = -*b;
                *sense = match sense {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                    Sense::Eq => Sense::Eq,
                };
            }
        }
        let ns = rows.iter().filter(|r| r.1 != Sense::Eq).count();
        let na = rows.iter().filter(|r| r.1 != Sense::Le).count();
        let total = nv + ns + na;
        let mut t = Tableau { rows: Vec::with_capacity(rows.len()), basis: Vec::with_capacity(rows.len()), obj: vec![0.0; total + 1], pivots: 0 };
        let (mut s, mut a) = (nv, nv + ns);
        for (coeffs, sense, b) in &rows {
            let mut row = vec![0.0; total + 1];
            row[..nv].copy_from_slice(coeffs);
            row[total] = *b;
            match sense {
                Sense::Le => {
                    row[s] = 1.0;
                    t.basis.push(s);
                    s += 1;
                }
                Sense::Ge => {
                    row[s] = -1.0;
                    s += 1;
                    row[a] = 1.0;
                    t.basis.push(a);
                    a += 1;
                }
                Sense::Eq => {
                    row[a] = 1.0;
                    t.basis.push(a);
                    a += 1;
                }
            }
            t.rows.push(row);
        }
        let scale = 1.0 + rows.iter().map(|r| r.2).fold(0.0, f64::max);

        let artificial = nv + ns;
        if na > 0 {
            let mut cost = vec![0.0; total];
            cost[artificial..].iter_mut().for_each(|c| *c = 1.0);
            t.set_objective(&cost);
            t.optimize(total)?;
            if -t.obj[total] > TOL * scale {
                return Err(Error::Infeasible);
            }
            // Pivot zero-level artificials out of the basis; rows where that
            // is impossible are redundant.
            let mut i = 0;
            while i < t.rows.len() {
                if t.basis[i] >= artificial {
                    match (0..artificial).find(|&j| t.rows[i][j].abs() > TOL) {
                        Some(j) => t.pivot(i, j),
                        None => {
                            t.rows.remove(i);
                            t.basis.remove(i);
                            continue;
                        }
                    }
                }
                i += 1;
            }
        }
        let mut cost = vec![0.0; total];
        for (j, &c) in self.objective.iter().enumerate() {
            cost[j] = if self.maximize { -c } else { c };
        }
        t.set_objective(&cost);
        t.optimize(artificial)?;
        let mut x = vec![0.0; nv];
        for (i, &b) in t.basis.iter().enumerate() {
            if b < nv {
                x[b] = t.rows[i][total];
            }
        }
        let objective = self.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution { x, objective, pivots: t.pivots })
    }
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    /// Reduced costs, with `−c_Bᵀ x_B` in the last slot.
    obj: Vec<f64>,
    pivots: usize,
}

impl Tableau {
    fn set_objective(&mut self, cost: &[f64]) {
        let width = self.obj.len();
        self.obj[..width - 1].copy_from_slice(cost);
        self.obj[width - 1] = 0.0;
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = cost[b];
            if cb != 0.0 {
                for (o, v) in self.obj.iter_mut().zip(row) {
                    *o -= cb * v;
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        self.pivots += 1;
        let inv = 1.0 / self.rows[r][c];
        self.rows[r].iter_mut().for_each(|v| *v *= inv);
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                if f != 0.0 {
                    for (v, p) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * p;
                    }
                    row[c] = 0.0;
                }
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (v, p) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Bland's rule over columns `< allowed`.
    fn optimize(&mut self, allowed: usize) -> Result<()> {
        let rhs = self.obj.len() - 1;
        loop {
            if self.pivots >= PIVOT_LIMIT {
                return Err(Error::PivotLimit(self.pivots));
            }
            let Some(c) = (0..allowed).find(|&j| self.obj[j] < -TOL) else {
                return Ok(());
            };
            let mut best: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c] > TOL {
                    let ratio = row[rhs] / row[c];
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - TOL || (ratio <= br + TOL && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return Err(Error::Unbounded),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), 36.
        let mut lp = LinearProgram::maximize(vec![3.0, 5.0]);
        lp.constrain(vec![1.0, 0.0], Sense::Le, 4.0).unwrap();
        lp.constrain(vec![0.0, 2.0], Sense::Le, 12.0).unwrap();
        lp.constrain(vec![3.0, 2.0], Sense::Le, 18.0).unwrap();
        let s = lp.solve().unwrap();
        assert!((s.objective - 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + 2y + 3z, x + y + z = 1, y + z ≥ 0.5 → x = 0.5, y = 0.5.
        let mut lp = LinearProgram::minimize(vec![1.0, 2.0, 3.0]);
        lp.constrain(vec![1.0, 1.0, 1.0], Sense::Eq, 1.0).unwrap();
        lp.constrain(vec![0.0, 1.0, 1.0], Sense::Ge, 0.5).unwrap();
        let s = lp.solve().unwrap();
        assert!((s.objective - 1.5).abs() < 1e-9);
    }

    #[test]
    fn negative_rhs_and_redundant_rows() {
        let mut lp = LinearProgram::minimize(vec![1.0, 1.0]);
        lp.constrain(vec![-1.0, -1.0], Sense::Le, -2.0).unwrap();
        lp.constrain(vec![1.0, 1.0], Sense::Eq, 2.0).unwrap();
        lp.constrain(vec![2.0, 2.0], Sense::Eq, 4.0).unwrap();
        assert!((lp.solve().unwrap().objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::minimize(vec![1.0]);
        lp.constrain(vec![1.0], Sense::Le, 1.0).unwrap();
        lp.constrain(vec![1.0], Sense::Ge, 2.0).unwrap();
        assert!(matches!(lp.solve(), Err(Error::Infeasible)));
        let mut lp = LinearProgram::maximize(vec![1.0, 0.0]);
        lp.constrain(vec![1.0, -1.0], Sense::Le, 1.0).unwrap();
        assert!(matches!(lp.solve(), Err(Error::Unbounded)));
        let mut lp = LinearProgram::maximize(vec![1.0]);
        assert!(lp.constrain(vec![1.0, 2.0], Sense::Le, 1.0).is_err());
        assert!(lp.constrain_sparse(&[(3, 1.0)], Sense::Le, 1.0).is_err());
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example cycles under the textbook largest-coefficient rule.
        let mut lp = LinearProgram::minimize(vec![-0.75, 150.0, -0.02, 6.0]);
        lp.constrain(vec![0.25, -60.0, -0.04, 9.0], Sense::Le, 0.0).unwrap();
        lp.constrain(vec![0.5, -90.0, -0.02, 3.0], Sense::Le, 0.0).unwrap();
        lp.constrain(vec![0.0, 0.0, 1.0, 0.0], Sense::Le, 1.0).unwrap();
        assert!((lp.solve().unwrap().objective + 0.05).abs() < 1e-9);
    }
}
