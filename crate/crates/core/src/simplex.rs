//! Dense two-phase simplex with Bland's rule for small standard-form LPs:
//! minimise `c·x` subject to `A x = b`, `x >= 0`.
//!
//! Sized for convex-combination problems (a handful of rows, at most a few
//! hundred columns). Bland's rule rules out cycling on the degenerate
//! vertices that collinear or coincident sample points produce.

use crate::error::{CcxError, Result};

/// Feasibility and optimality tolerance on normalised data.
pub const LP_TOL: f64 = 1e-9;

const MAX_PIVOTS: usize = 100_000;

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.rows[r][self.width]
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let p = self.rows[r][j];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                let factor = row[j];
                if factor != 0.0 {
                    for (v, pv) in row.iter_mut().zip(&pivot_row) {
                        *v -= factor * pv;
                    }
                }
            }
        }
        let factor = self.obj[j];
        if factor != 0.0 {
            for (v, pv) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= factor * pv;
            }
        }
        self.basis[r] = j;
    }

    /// Bland's rule iterations over columns `< allowed`.
    fn run(&mut self, allowed: usize) -> Result<()> {
        for _ in 0..MAX_PIVOTS {
            let Some(j) = (0..allowed).find(|&j| self.obj[j] < -LP_TOL) else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][j];
                if a > LP_TOL {
                    let ratio = self.rhs(r) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((br, bratio)) => {
                            if ratio < bratio - LP_TOL
                                || (ratio <= bratio + LP_TOL && self.basis[r] < self.basis[br])
                            {
                                Some((r, ratio))
                            } else {
                                Some((br, bratio))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, j),
                None => {
                    return Err(CcxError::InvalidParameter(
                        "linear program is unbounded".into(),
                    ))
                }
            }
        }
        Err(CcxError::TooLarge("simplex pivot limit reached".into()))
    }
}

/// Solves `min c·x, A x = b, x >= 0`. Rows of `a` must all have `c.len()` entries.
pub fn solve(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<LpSolution> {
    let m = a.len();
    let n = c.len();
    if b.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(CcxError::InvalidParameter("LP dimensions disagree".into()));
    }
    let width = n + m;
    let mut rows = Vec::with_capacity(m);
    for (row, &rhs) in a.iter().zip(b) {
        let sign = if rhs < 0.0 { -1.0 } else { 1.0 };
        let mut r = vec![0.0; width + 1];
        for (dst, &v) in r.iter_mut().zip(row) {
            *dst = sign * v;
        }
        r[width] = sign * rhs;
        rows.push(r);
    }
    for (i, r) in rows.iter_mut().enumerate() {
        r[n + i] = 1.0;
    }

    // Phase I: minimise the sum of artificials.
    let mut obj = vec![0.0; width + 1];
    for r in &rows {
        for j in 0..n {
            obj[j] -= r[j];
        }
        obj[width] -= r[width];
    }
    let mut t = Tableau {
        rows,
        obj,
        basis: (n..n + m).collect(),
        width,
    };
    t.run(n)?;
    let scale = 1.0 + b.iter().fold(0.0f64, |s, v| s + v.abs());
    if -t.obj[width] > LP_TOL * scale {
        return Err(CcxError::Infeasible);
    }

    // Drive remaining artificials out of the basis; drop redundant rows.
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= n {
            match (0..n).find(|&j| t.rows[r][j].abs() > LP_TOL) {
                Some(j) => t.pivot(r, j),
                None => {
                    t.rows.remove(r);
                    t.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    // Phase II.
    let mut obj = vec![0.0; width + 1];
    obj[..n].copy_from_slice(c);
    for (r, &bj) in t.basis.iter().enumerate() {
        let cb = c[bj];
        if cb != 0.0 {
            for (v, rv) in obj.iter_mut().zip(&t.rows[r]) {
                *v -= cb * rv;
            }
        }
    }
    t.obj = obj;
    t.run(n)?;

    let mut x = vec![0.0; n];
    for (r, &bj) in t.basis.iter().enumerate() {
        x[bj] = t.rhs(r).max(0.0);
    }
    let objective = x.iter().zip(c).map(|(xi, ci)| xi * ci).sum();
    Ok(LpSolution { x, objective })
}

/// Whether `A x = b, x >= 0` has a solution.
pub fn feasible(a: &[Vec<f64>], b: &[f64]) -> bool {
    let n = a.first().map_or(0, Vec::len);
    solve(a, b, &vec![0.0; n]).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lp() {
        // min -x - y, x + 2y + s1 = 4, 3x + y + s2 = 6 -> x = 1.6, y = 1.2
        let a = vec![vec![1.0, 2.0, 1.0, 0.0], vec![3.0, 1.0, 0.0, 1.0]];
        let sol = solve(&a, &[4.0, 6.0], &[-1.0, -1.0, 0.0, 0.0]).unwrap();
        assert!((sol.x[0] - 1.6).abs() < 1e-12);
        assert!((sol.x[1] - 1.2).abs() < 1e-12);
        assert!((sol.objective + 2.8).abs() < 1e-12);
    }

    #[test]
    fn infeasible_detected() {
        let a = vec![vec![1.0, 1.0]];
        assert!(matches!(solve(&a, &[-1.0], &[0.0, 0.0]), Err(CcxError::Infeasible)));
        assert!(!feasible(&a, &[-1.0]));
    }

    #[test]
    fn redundant_rows_dropped() {
        // Two identical equality rows.
        let a = vec![vec![1.0, 1.0, 1.0], vec![1.0, 1.0, 1.0]];
        let sol = solve(&a, &[1.0, 1.0], &[3.0, 1.0, 2.0]).unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-12);
        assert_eq!(sol.x, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn degenerate_convex_combination() {
        // Collinear points in the plane; target on the line.
        let xs = [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]];
        let a = vec![
            xs.iter().map(|p| p[0]).collect(),
            xs.iter().map(|p| p[1]).collect(),
            vec![1.0; 4],
        ];
        let sol = solve(&a, &[1.5, 1.5, 1.0], &[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(sol.objective.abs() < 1e-12);
    }
}
