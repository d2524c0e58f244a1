//! Dense two-phase simplex for the small envelope linear programs.
//!
//! Maximizes `c . x` over `x >= 0` subject to equality and `<=` rows. Bland's
//! rule (lowest-index entering column, lowest basis index on ratio ties)
//! makes the pivot sequence deterministic and cycle-free; feasibility is
//! judged at 1e-9. Desk-scale only: a few hundred variables.

use crate::error::{Error, Result};

/// Feasibility and pivot tolerance.
pub const FEAS_TOL: f64 = 1e-9;

const PIVOT_CAP: usize = 1_000_000;

/// `maximize objective . x` subject to `eq` rows `a.x = b`, `le` rows
/// `a.x <= b`, and `x >= 0`.
#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub n_vars: usize,
    pub objective: Vec<f64>,
    pub eq: Vec<(Vec<f64>, f64)>,
    pub le: Vec<(Vec<f64>, f64)>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n_cols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.n_cols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = 1.0 / self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v *= inv;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[c];
            if factor == 0.0 {
                continue;
            }
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
            row[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Reduced costs `c_j - c_B . (B^-1 A)_j` for the current basis.
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut r = cost.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb == 0.0 {
                continue;
            }
            for (rj, aj) in r.iter_mut().zip(self.rows[i].iter()) {
                *rj -= cb * aj;
            }
        }
        r
    }

    /// Runs simplex pivots maximizing `cost . x`, restricted to `allowed`
    /// entering columns.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) -> Result<()> {
        for _ in 0..PIVOT_CAP {
            let reduced = self.reduced_costs(cost);
            let entering = (0..self.n_cols)
                .find(|&j| allowed[j] && reduced[j] > FEAS_TOL);
            let Some(col) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][col];
                if a <= FEAS_TOL {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br - FEAS_TOL
                            || (ratio < br + FEAS_TOL && self.basis[i] < self.basis[bi])
                        {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            match leave {
                Some((row, _)) => self.pivot(row, col),
                None => return Err(Error::Unbounded),
            }
        }
        Err(Error::IterationCapExceeded {
            cap: PIVOT_CAP,
            residual: f64::NAN,
        })
    }
}

/// Solves the program; returns the optimal value and an optimizer.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    let n = lp.n_vars;
    assert_eq!(lp.objective.len(), n, "objective length");
    let n_slack = lp.le.len();
    let m = lp.eq.len() + lp.le.len();

    // Column layout: decision | slack | artificial.
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut needs_artificial: Vec<bool> = Vec::with_capacity(m);
    let mut basis: Vec<usize> = Vec::with_capacity(m);

    for (i, (a, b)) in lp.le.iter().enumerate() {
        assert_eq!(a.len(), n, "le row {i} length");
        let mut row = vec![0.0; n + n_slack];
        row[..n].copy_from_slice(a);
        row[n + i] = 1.0;
        let mut rhs = *b;
        if rhs < 0.0 {
            row.iter_mut().for_each(|v| *v = -*v);
            rhs = -rhs;
            needs_artificial.push(true);
        } else {
            needs_artificial.push(false);
            basis.push(n + i);
        }
        row.push(rhs);
        rows.push(row);
    }
    for (i, (a, b)) in lp.eq.iter().enumerate() {
        assert_eq!(a.len(), n, "eq row {i} length");
        let mut row = vec![0.0; n + n_slack];
        row[..n].copy_from_slice(a);
        let mut rhs = *b;
        if rhs < 0.0 {
            row.iter_mut().for_each(|v| *v = -*v);
            rhs = -rhs;
        }
        row.push(rhs);
        rows.push(row);
        needs_artificial.push(true);
    }

    // Insert artificial columns where no slack can start basic.
    let n_art = needs_artificial.iter().filter(|&&x| x).count();
    let n_cols = n + n_slack + n_art;
    let mut art_ix = 0;
    let mut basis_full = Vec::with_capacity(m);
    let mut slack_basis_iter = basis.into_iter();
    for (i, row) in rows.iter_mut().enumerate() {
        let rhs = row.pop().expect("rhs present");
        row.resize(n_cols, 0.0);
        if needs_artificial[i] {
            let col = n + n_slack + art_ix;
            row[col] = 1.0;
            basis_full.push(col);
            art_ix += 1;
        } else {
            basis_full.push(slack_basis_iter.next().expect("slack basis"));
        }
        row.push(rhs);
    }

    let mut tab = Tableau {
        rows,
        basis: basis_full,
        n_cols,
    };

    if n_art > 0 {
        let mut phase1 = vec![0.0; n_cols];
        for c in phase1.iter_mut().skip(n + n_slack) {
            *c = -1.0;
        }
        let allowed = vec![true; n_cols];
        tab.optimize(&phase1, &allowed)?;
        let infeasibility: f64 = tab
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= n + n_slack)
            .map(|(i, _)| tab.rhs(i))
            .sum();
        if infeasibility > FEAS_TOL * 10.0 {
            return Err(Error::Infeasible);
        }
        // Pivot remaining artificials out of the basis where possible.
        for i in 0..m {
            if tab.basis[i] >= n + n_slack {
                if let Some(col) = (0..n + n_slack).find(|&j| tab.rows[i][j].abs() > FEAS_TOL) {
                    tab.pivot(i, col);
                }
            }
        }
    }

    let mut cost = vec![0.0; n_cols];
    cost[..n].copy_from_slice(&lp.objective);
    let mut allowed = vec![true; n_cols];
    for a in allowed.iter_mut().skip(n + n_slack) {
        *a = false;
    }
    tab.optimize(&cost, &allowed)?;

    let mut x = vec![0.0; n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.rhs(i);
        }
    }
    let value = x.iter().zip(&lp.objective).map(|(xi, ci)| xi * ci).sum();
    Ok(LpSolution { value, x })
}
