//! Exact dense simplex for `max c·x  s.t.  A x <= b, x >= 0` with `b >= 0`.
//!
//! Because `b >= 0` the origin is feasible and no phase one is needed. The
//! tableau is kept in condensed (Tucker) form: one row per constraint, one
//! column per nonbasic variable, and a pivot swaps a row label with a
//! column label. Entering and leaving choices follow Bland's rule, so the
//! method terminates on degenerate problems.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("right-hand side must be non-negative (row {0})")]
    NegativeRhs(usize),
    #[error("constraint matrix is ragged")]
    Ragged,
    #[error("objective is unbounded")]
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub c: Vec<BigRational>,
    pub a: Vec<Vec<BigRational>>,
    pub b: Vec<BigRational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: BigRational,
    pub primal: Vec<BigRational>,
    /// Optimal multipliers for the rows of `A`.
    pub dual: Vec<BigRational>,
    pub pivots: usize,
}

// Variable labels: `0..n` are structural, `n..n+m` slacks.
struct Tableau {
    t: Vec<Vec<BigRational>>,
    row_label: Vec<usize>,
    col_label: Vec<usize>,
    m: usize,
    n: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, k: usize) {
        let p = self.t[r][k].clone();
        let inv = p.recip();
        let pivot_row: Vec<BigRational> = self.t[r].iter().map(|v| v * &inv).collect();
        for i in 0..=self.m {
            if i == r {
                continue;
            }
            let factor = self.t[i][k].clone();
            if factor.is_zero() {
                continue;
            }
            for j in 0..=self.n {
                if j == k {
                    continue;
                }
                if !pivot_row[j].is_zero() {
                    let delta = &factor * &pivot_row[j];
                    self.t[i][j] -= delta;
                }
            }
            self.t[i][k] = -(&factor * &inv);
        }
        for j in 0..=self.n {
            if j != k {
                self.t[r][j] = pivot_row[j].clone();
            }
        }
        self.t[r][k] = inv;
        std::mem::swap(&mut self.row_label[r], &mut self.col_label[k]);
    }
}

impl LinearProgram {
    pub fn solve(&self) -> Result<LpSolution, LpError> {
        let m = self.a.len();
        let n = self.c.len();
        if self.b.len() != m || self.a.iter().any(|row| row.len() != n) {
            return Err(LpError::Ragged);
        }
        if let Some(i) = self.b.iter().position(|v| v.is_negative()) {
            return Err(LpError::NegativeRhs(i));
        }
        let mut t = Vec::with_capacity(m + 1);
        for i in 0..m {
            let mut row = self.a[i].clone();
            row.push(self.b[i].clone());
            t.push(row);
        }
        let mut obj: Vec<BigRational> = self.c.iter().map(|v| -v).collect();
        obj.push(BigRational::zero());
        t.push(obj);
        let mut tab = Tableau {
            t,
            row_label: (n..n + m).collect(),
            col_label: (0..n).collect(),
            m,
            n,
        };
        let mut pivots = 0;
        loop {
            // Bland: entering variable with the smallest label among
            // improving columns.
            let entering = (0..n)
                .filter(|&j| tab.t[m][j].is_negative())
                .min_by_key(|&j| tab.col_label[j]);
            let Some(k) = entering else { break };
            let mut best: Option<(usize, BigRational)> = None;
            for i in 0..m {
                if !tab.t[i][k].is_positive() {
                    continue;
                }
                let ratio = &tab.t[i][n] / &tab.t[i][k];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && tab.row_label[i] < tab.row_label[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((r, _)) = best else {
                return Err(LpError::Unbounded);
            };
            tab.pivot(r, k);
            pivots += 1;
        }
        let mut primal = vec![BigRational::zero(); n];
        for i in 0..m {
            if tab.row_label[i] < n {
                primal[tab.row_label[i]] = tab.t[i][n].clone();
            }
        }
        let mut dual = vec![BigRational::zero(); m];
        for j in 0..n {
            if tab.col_label[j] >= n {
                dual[tab.col_label[j] - n] = tab.t[m][j].clone();
            }
        }
        Ok(LpSolution {
            value: tab.t[m][n].clone(),
            primal,
            dual,
            pivots,
        })
    }

    /// Exact optimality certificate: primal feasibility, dual feasibility
    /// and equal objective values.
    pub fn certify(&self, sol: &LpSolution) -> bool {
        let m = self.a.len();
        let n = self.c.len();
        if sol.primal.len() != n || sol.dual.len() != m {
            return false;
        }
        if sol.primal.iter().any(|v| v.is_negative()) || sol.dual.iter().any(|v| v.is_negative()) {
            return false;
        }
        for i in 0..m {
            let lhs: BigRational = (0..n).map(|j| &self.a[i][j] * &sol.primal[j]).sum();
            if lhs > self.b[i] {
                return false;
            }
        }
        for j in 0..n {
            let lhs: BigRational = (0..m).map(|i| &self.a[i][j] * &sol.dual[i]).sum();
            if lhs < self.c[j] {
                return false;
            }
        }
        let primal_value: BigRational = (0..n).map(|j| &self.c[j] * &sol.primal[j]).sum();
        let dual_value: BigRational = (0..m).map(|i| &self.b[i] * &sol.dual[i]).sum();
        primal_value == sol.value && dual_value == sol.value
    }
}

#[cfg(test)]
fn big(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub(crate) fn big_one() -> BigRational {
    BigRational::one()
}
