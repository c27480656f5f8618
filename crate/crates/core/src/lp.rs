//! Dense two-phase simplex for `min cᵀx` subject to `Ax = b`, `x ≥ 0`.
//!
//! Sized for a handful of rows and thousands of columns. The basis inverse is
//! kept explicitly and rebuilt from scratch after the final pivot. Pricing is
//! Dantzig's rule with lowest-index ties; after a run of degenerate pivots
//! the solver switches to Bland's rule, which cannot cycle. Every choice
//! depends only on the input, so results are reproducible bit for bit.

use nalgebra::{DMatrix, DVector};

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-11;
const FEAS_TOL: f64 = 1e-9;

/// Equality-form linear program with `rows.len() == b.len()` and every row of
/// length `c.len()`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub c: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64, iterations: usize },
    Infeasible,
    Unbounded,
}

struct Tableau<'a> {
    cols: &'a [Vec<f64>],
    b: Vec<f64>,
    basis: Vec<usize>,
    binv: Vec<Vec<f64>>,
    xb: Vec<f64>,
    iterations: usize,
}

impl Tableau<'_> {
    fn m(&self) -> usize {
        self.b.len()
    }

    fn column(&self, j: usize) -> Vec<f64> {
        let col = &self.cols[j];
        (0..self.m()).map(|i| self.binv[i].iter().zip(col).map(|(a, c)| a * c).sum()).collect()
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m();
        (0..m).map(|k| (0..m).map(|i| cost[self.basis[i]] * self.binv[i][k]).sum()).collect()
    }

    fn reduced(&self, cost: &[f64], y: &[f64], j: usize) -> f64 {
        cost[j] - self.cols[j].iter().zip(y).map(|(a, y)| a * y).sum::<f64>()
    }

    fn pivot(&mut self, row: usize, entering: usize, dir: &[f64]) {
        let m = self.m();
        let p = dir[row];
        let pivot_row: Vec<f64> = self.binv[row].iter().map(|v| v / p).collect();
        let ratio = self.xb[row] / p;
        for (i, &f) in dir.iter().enumerate().take(m) {
            if i == row {
                continue;
            }
            if f != 0.0 {
                for (v, pr) in self.binv[i].iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
                self.xb[i] -= f * ratio;
            }
        }
        self.binv[row] = pivot_row;
        self.xb[row] = ratio;
        self.basis[row] = entering;
        self.iterations += 1;
    }

    /// Minimizes `cost` over columns `allowed`. Returns `false` if unbounded.
    fn optimize(&mut self, cost: &[f64], allowed: &dyn Fn(usize) -> bool) -> bool {
        let n = self.cols.len();
        let mut degenerate_run = 0usize;
        let max_iter = 50 * (n + self.m()) + 1000;
        for _ in 0..max_iter {
            let y = self.duals(cost);
            let bland = degenerate_run > 2 * self.m() + 10;
            let mut entering = None;
            let mut best = -COST_TOL;
            for j in 0..n {
                if !allowed(j) || self.basis.contains(&j) {
                    continue;
                }
                let d = self.reduced(cost, &y, j);
                if d < best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(e) = entering else { return true };
            let dir = self.column(e);
            let mut leave: Option<(usize, f64)> = None;
            for (i, &di) in dir.iter().enumerate() {
                if di > PIVOT_TOL {
                    let r = self.xb[i].max(0.0) / di;
                    let better = match leave {
                        None => true,
                        Some((li, lr)) => r < lr - 1e-15 || (r <= lr + 1e-15 && self.basis[i] < self.basis[li]),
                    };
                    if better {
                        leave = Some((i, r));
                    }
                }
            }
            let Some((row, ratio)) = leave else { return false };
            degenerate_run = if ratio <= 1e-15 { degenerate_run + 1 } else { 0 };
            self.pivot(row, e, &dir);
        }
        true
    }

    /// Recomputes `B⁻¹` and `x_B` from the basis columns.
    fn refactor(&mut self) {
        let m = self.m();
        let bmat = DMatrix::from_fn(m, m, |i, k| self.cols[self.basis[k]][i]);
        if let Some(inv) = bmat.try_inverse() {
            self.binv = (0..m).map(|i| (0..m).map(|k| inv[(i, k)]).collect()).collect();
            let xb = inv * DVector::from_column_slice(&self.b);
            self.xb = xb.iter().copied().collect();
        }
    }
}

/// Solves the program with the two-phase method.
pub fn solve(lp: &LinearProgram) -> LpOutcome {
    let m = lp.b.len();
    let n = lp.c.len();
    debug_assert!(lp.rows.iter().all(|r| r.len() == n));

    let sign: Vec<f64> = lp.b.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
    let b: Vec<f64> = lp.b.iter().zip(&sign).map(|(v, s)| v * s).collect();
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| lp.rows[i][j] * sign[i]).collect()).collect();
    for i in 0..m {
        let mut e = vec![0.0; m];
        e[i] = 1.0;
        cols.push(e);
    }
    let mut t = Tableau {
        cols: &cols,
        b: b.clone(),
        basis: (n..n + m).collect(),
        binv: (0..m).map(|i| (0..m).map(|k| if i == k { 1.0 } else { 0.0 }).collect()).collect(),
        xb: b,
        iterations: 0,
    };

    let phase1: Vec<f64> = (0..n + m).map(|j| if j < n { 0.0 } else { 1.0 }).collect();
    t.optimize(&phase1, &|_| true);
    t.refactor();
    let infeasibility: f64 = (0..m).filter(|&i| t.basis[i] >= n).map(|i| t.xb[i]).sum();
    let scale = 1.0 + lp.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if infeasibility > FEAS_TOL * scale {
        return LpOutcome::Infeasible;
    }
    // Drive zero-level artificials out of the basis where possible.
    for i in 0..m {
        if t.basis[i] < n {
            continue;
        }
        if let Some(j) = (0..n).find(|&j| !t.basis.contains(&j) && t.column(j)[i].abs() > 1e-9) {
            let dir = t.column(j);
            t.pivot(i, j, &dir);
        }
    }

    let mut phase2 = lp.c.clone();
    phase2.extend(std::iter::repeat_n(0.0, m));
    if !t.optimize(&phase2, &|j| j < n) {
        return LpOutcome::Unbounded;
    }
    t.refactor();

    let mut x = vec![0.0; n];
    for (i, &j) in t.basis.iter().enumerate() {
        if j < n {
            x[j] = t.xb[i].max(0.0);
        }
    }
    let objective = x.iter().zip(&lp.c).map(|(a, c)| a * c).sum();
    LpOutcome::Optimal { x, objective, iterations: t.iterations }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimal(o: LpOutcome) -> (Vec<f64>, f64) {
        match o {
            LpOutcome::Optimal { x, objective, .. } => (x, objective),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn small_program() {
        // min −x − 2y  s.t. x + y + s1 = 4, x + 3y + s2 = 6
        let lp = LinearProgram {
            c: vec![-1.0, -2.0, 0.0, 0.0],
            rows: vec![vec![1.0, 1.0, 1.0, 0.0], vec![1.0, 3.0, 0.0, 1.0]],
            b: vec![4.0, 6.0],
        };
        let (x, obj) = optimal(solve(&lp));
        assert!((x[0] - 3.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        assert!((obj + 5.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let inf = LinearProgram { c: vec![1.0, 1.0], rows: vec![vec![1.0, 1.0]], b: vec![-1.0] };
        assert_eq!(solve(&inf), LpOutcome::Infeasible);
        let unb = LinearProgram { c: vec![-1.0, 0.0], rows: vec![vec![1.0, -1.0]], b: vec![1.0] };
        assert_eq!(solve(&unb), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_rows() {
        let lp = LinearProgram {
            c: vec![1.0, 2.0, 3.0],
            rows: vec![vec![1.0, 1.0, 1.0], vec![2.0, 2.0, 2.0], vec![0.0, 1.0, 1.0]],
            b: vec![1.0, 2.0, 0.5],
        };
        let (x, obj) = optimal(solve(&lp));
        assert!((obj - 1.5).abs() < 1e-12, "{x:?}");
    }

    #[test]
    fn degenerate_convex_combination() {
        // Barycentric weights of the centre of a square with a duplicated vertex.
        let pts = [(1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)];
        let lp = LinearProgram {
            c: vec![0.0, 0.0, 1.0, 1.0, 0.5],
            rows: vec![pts.iter().map(|p| p.0).collect(), pts.iter().map(|p| p.1).collect(), vec![1.0; 5]],
            b: vec![0.0, 0.0, 1.0],
        };
        let (x, obj) = optimal(solve(&lp));
        assert!(obj.abs() < 1e-12);
        assert!((x[0] + x[4] - 0.5).abs() < 1e-12 && (x[1] - 0.5).abs() < 1e-12);
    }
}
