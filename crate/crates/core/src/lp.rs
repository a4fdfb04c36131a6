//! Dense two-phase simplex method with Bland's anti-cycling rule.
//!
//! Solves `minimize c·x` subject to linear constraints and `x >= 0`. Sized
//! for the small, highly degenerate programs produced by the minimax
//! denoiser (a few hundred columns at most).

use thiserror::Error;

/// Entries smaller than this in magnitude are treated as zero when pricing
/// and pivoting.
pub const PIVOT_TOL: f64 = 1e-9;
/// Upper bound on the number of pivots across both phases.
pub const MAX_ITERATIONS: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    LessEq,
    Equal,
    GreaterEq,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("linear program is infeasible (phase one residual {0:e})")]
    Infeasible(f64),
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("iteration limit of {0} pivots reached")]
    IterationLimit(usize),
}

#[derive(Clone, Debug)]
struct Row {
    coeffs: Vec<f64>,
    relation: Relation,
    rhs: f64,
}

/// `minimize objective·x` over `x >= 0` and the added constraints.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    objective: Vec<f64>,
    rows: Vec<Row>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        LinearProgram {
            objective,
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }

    /// Adds `coeffs·x (relation) rhs`.
    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        assert_eq!(coeffs.len(), self.num_vars(), "constraint width");
        self.rows.push(Row {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        Tableau::build(self).solve(&self.objective)
    }
}

struct Tableau {
    /// `rows × (cols + 1)`, last column is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n_orig: usize,
    cols: usize,
    artificial_start: usize,
    iterations: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let mut rows: Vec<Row> = lp.rows.clone();
        for r in rows.iter_mut() {
            if r.rhs < 0.0 {
                r.rhs = -r.rhs;
                r.coeffs.iter_mut().for_each(|c| *c = -*c);
                r.relation = match r.relation {
                    Relation::LessEq => Relation::GreaterEq,
                    Relation::GreaterEq => Relation::LessEq,
                    Relation::Equal => Relation::Equal,
                };
            }
        }
        let n_slack = rows
            .iter()
            .filter(|r| r.relation != Relation::Equal)
            .count();
        let n_art = rows
            .iter()
            .filter(|r| r.relation != Relation::LessEq)
            .count();
        let artificial_start = n + n_slack;
        let cols = artificial_start + n_art;
        let mut t = Vec::with_capacity(rows.len());
        let mut basis = Vec::with_capacity(rows.len());
        let (mut slack, mut art) = (n, artificial_start);
        for r in &rows {
            let mut line = vec![0.0; cols + 1];
            line[..n].copy_from_slice(&r.coeffs);
            line[cols] = r.rhs;
            match r.relation {
                Relation::LessEq => {
                    line[slack] = 1.0;
                    basis.push(slack);
                    slack += 1;
                }
                Relation::GreaterEq => {
                    line[slack] = -1.0;
                    slack += 1;
                    line[art] = 1.0;
                    basis.push(art);
                    art += 1;
                }
                Relation::Equal => {
                    line[art] = 1.0;
                    basis.push(art);
                    art += 1;
                }
            }
            t.push(line);
        }
        Tableau {
            t,
            basis,
            n_orig: n,
            cols,
            artificial_start,
            iterations: 0,
        }
    }

    fn solve(mut self, objective: &[f64]) -> Result<LpSolution, LpError> {
        if self.cols > self.artificial_start {
            let mut phase_one = vec![0.0; self.cols];
            phase_one[self.artificial_start..]
                .iter_mut()
                .for_each(|c| *c = 1.0);
            self.optimize(&phase_one, self.cols)?;
            let residual: f64 = self
                .basis
                .iter()
                .zip(&self.t)
                .filter(|(&b, _)| b >= self.artificial_start)
                .map(|(_, row)| row[self.cols])
                .sum();
            let scale = 1.0
                + self
                    .t
                    .iter()
                    .map(|r| r[self.cols].abs())
                    .fold(0.0, f64::max);
            if residual > PIVOT_TOL * scale {
                return Err(LpError::Infeasible(residual));
            }
            self.evict_artificials();
        }
        let mut cost = vec![0.0; self.cols];
        cost[..self.n_orig].copy_from_slice(objective);
        self.optimize(&cost, self.artificial_start)?;

        let mut x = vec![0.0; self.n_orig];
        for (row, &b) in self.t.iter().zip(&self.basis) {
            if b < self.n_orig {
                x[b] = row[self.cols].max(0.0);
            }
        }
        let value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution {
            x,
            objective: value,
            iterations: self.iterations,
        })
    }

    /// Pivots artificial variables sitting at zero out of the basis, dropping
    /// rows that turn out to be redundant.
    fn evict_artificials(&mut self) {
        let mut i = 0;
        while i < self.t.len() {
            if self.basis[i] < self.artificial_start {
                i += 1;
                continue;
            }
            let entering = (0..self.artificial_start).find(|&j| self.t[i][j].abs() > PIVOT_TOL);
            match entering {
                Some(j) => {
                    self.pivot(i, j, None);
                    i += 1;
                }
                None => {
                    self.t.remove(i);
                    self.basis.remove(i);
                }
            }
        }
    }

    /// Primal simplex on columns `0..allowed` with Bland's rule.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<(), LpError> {
        let rhs = self.cols;
        // reduced costs d_j = c_j - c_B · column_j
        let mut reduced: Vec<f64> = cost.to_vec();
        for (row, &b) in self.t.iter().zip(&self.basis) {
            let cb = cost[b];
            if cb != 0.0 {
                for j in 0..self.cols {
                    reduced[j] -= cb * row[j];
                }
            }
        }
        loop {
            if self.iterations >= MAX_ITERATIONS {
                return Err(LpError::IterationLimit(MAX_ITERATIONS));
            }
            let Some(entering) = (0..allowed).find(|&j| reduced[j] < -PIVOT_TOL) else {
                return Ok(());
            };
            let mut leaving: Option<(usize, f64)> = None;
            for (i, row) in self.t.iter().enumerate() {
                let a = row[entering];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = row[rhs].max(0.0) / a;
                leaving = match leaving {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br - 1e-12
                            || ((ratio - br).abs() <= 1e-12 && self.basis[i] < self.basis[bi])
                        {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((pivot_row, _)) = leaving else {
                return Err(LpError::Unbounded);
            };
            self.pivot(pivot_row, entering, Some(&mut reduced));
            self.iterations += 1;
        }
    }

    fn pivot(&mut self, r: usize, c: usize, reduced: Option<&mut Vec<f64>>) {
        let width = self.cols + 1;
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for j in 0..width {
                    row[j] -= f * pivot_row[j];
                }
                row[c] = 0.0;
            }
        }
        if let Some(d) = reduced {
            let f = d[c];
            if f != 0.0 {
                for j in 0..self.cols {
                    d[j] -= f * pivot_row[j];
                }
                d[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  -> (2, 6), 36
        let mut lp = LinearProgram::new(vec![-3.0, -5.0]);
        lp.add_constraint(vec![1.0, 0.0], Relation::LessEq, 4.0);
        lp.add_constraint(vec![0.0, 2.0], Relation::LessEq, 12.0);
        lp.add_constraint(vec![3.0, 2.0], Relation::LessEq, 18.0);
        let s = lp.solve().unwrap();
        assert_abs_diff_eq!(s.objective, -36.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.x[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.x[1], 6.0, epsilon = 1e-12);
    }

    #[test]
    fn equality_and_greater_constraints() {
        // min x + 2y + 3z s.t. x + y + z = 1, y + z >= 0.5
        let mut lp = LinearProgram::new(vec![1.0, 2.0, 3.0]);
        lp.add_constraint(vec![1.0, 1.0, 1.0], Relation::Equal, 1.0);
        lp.add_constraint(vec![0.0, 1.0, 1.0], Relation::GreaterEq, 0.5);
        let s = lp.solve().unwrap();
        assert_abs_diff_eq!(s.objective, 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.x[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn negative_rhs_is_normalized() {
        // min x s.t. -x <= -2
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_constraint(vec![-1.0], Relation::LessEq, -2.0);
        assert_abs_diff_eq!(lp.solve().unwrap().objective, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.add_constraint(vec![1.0, 1.0], Relation::Equal, 1.0);
        lp.add_constraint(vec![2.0, 2.0], Relation::Equal, 2.0);
        assert_abs_diff_eq!(lp.solve().unwrap().objective, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_constraint(vec![1.0], Relation::LessEq, 1.0);
        lp.add_constraint(vec![1.0], Relation::GreaterEq, 2.0);
        assert!(matches!(lp.solve(), Err(LpError::Infeasible(_))));

        let mut lp = LinearProgram::new(vec![-1.0, 0.0]);
        lp.add_constraint(vec![1.0, -1.0], Relation::LessEq, 1.0);
        assert_eq!(lp.solve(), Err(LpError::Unbounded));
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example, which cycles under the largest-coefficient rule.
        let mut lp = LinearProgram::new(vec![-0.75, 150.0, -0.02, 6.0]);
        lp.add_constraint(vec![0.25, -60.0, -0.04, 9.0], Relation::LessEq, 0.0);
        lp.add_constraint(vec![0.5, -90.0, -0.02, 3.0], Relation::LessEq, 0.0);
        lp.add_constraint(vec![0.0, 0.0, 1.0, 0.0], Relation::LessEq, 1.0);
        let s = lp.solve().unwrap();
        assert_abs_diff_eq!(s.objective, -0.05, epsilon = 1e-12);
    }

    #[test]
    fn matching_pennies_game() {
        // value of [[1, -1], [-1, 1]] shifted by +1: 1, mixed (1/2, 1/2)
        // min t s.t. A^T p <= t, sum p = 1
        let mut lp = LinearProgram::new(vec![0.0, 0.0, 1.0]);
        lp.add_constraint(vec![2.0, 0.0, -1.0], Relation::LessEq, 0.0);
        lp.add_constraint(vec![0.0, 2.0, -1.0], Relation::LessEq, 0.0);
        lp.add_constraint(vec![1.0, 1.0, 0.0], Relation::Equal, 1.0);
        let s = lp.solve().unwrap();
        assert_abs_diff_eq!(s.objective, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.x[0], 0.5, epsilon = 1e-12);
    }
}
