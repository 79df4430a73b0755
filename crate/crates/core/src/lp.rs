//! Small dense linear programs over column-stochastic matrices.
//!
//! Both problems optimize over `m(j|i) >= 0` with `sum_j m(j|i) = 1`; the
//! simplex work is delegated to `minilp`.

use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};
use nalgebra::DMatrix;

use crate::error::{Error, Result};

const COEFF_FLOOR: f64 = 1e-14;

struct Stochastic {
    problem: Problem,
    vars: Vec<Vec<Variable>>,
}

impl Stochastic {
    fn new(direction: OptimizationDirection, rows: usize, cols: usize, objective: impl Fn(usize, usize) -> f64) -> Self {
        let mut problem = Problem::new(direction);
        let vars: Vec<Vec<Variable>> = (0..rows)
            .map(|j| (0..cols).map(|i| problem.add_var(objective(j, i), (0.0, 1.0))).collect())
            .collect();
        for i in 0..cols {
            let column: Vec<(Variable, f64)> = vars.iter().map(|row| (row[i], 1.0)).collect();
            problem.add_constraint(column.as_slice(), ComparisonOp::Eq, 1.0);
        }
        Self { problem, vars }
    }

    fn extract(&self, solution: &minilp::Solution) -> Vec<Vec<f64>> {
        let rows = self.vars.len();
        let cols = self.vars.first().map_or(0, Vec::len);
        let mut m: Vec<Vec<f64>> = self
            .vars
            .iter()
            .map(|row| row.iter().map(|&v| solution[v].max(0.0)).collect())
            .collect();
        for i in 0..cols {
            let s: f64 = (0..rows).map(|j| m[j][i]).sum();
            if s > 0.0 {
                for row in m.iter_mut() {
                    row[i] /= s;
                }
            }
        }
        m
    }
}

/// Minimizes `t = max_{j,k} |sum_i m(j|i) a[i][k] - b[j][k]|` over
/// column-stochastic `m` (rows = `b.len()`, cols = `a.len()`).
///
/// Returns the optimal `m` and the optimal value of `t`, which lower-bounds
/// the residual of every stochastic matrix.
pub(crate) fn min_max_residual(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, f64)> {
    let cols = a.len();
    let rows = b.len();
    let k_dim = a.first().map_or(0, Vec::len);
    let mut lp = Stochastic::new(OptimizationDirection::Minimize, rows, cols, |_, _| 0.0);
    let t = lp.problem.add_var(1.0, (0.0, f64::INFINITY));
    for (j, bj) in b.iter().enumerate() {
        for k in 0..k_dim {
            let mut expr: Vec<(Variable, f64)> = (0..cols)
                .filter(|&i| a[i][k].abs() > COEFF_FLOOR)
                .map(|i| (lp.vars[j][i], a[i][k]))
                .collect();
            expr.push((t, -1.0));
            lp.problem.add_constraint(expr.as_slice(), ComparisonOp::Le, bj[k]);
            expr.last_mut().expect("t term").1 = 1.0;
            lp.problem.add_constraint(expr.as_slice(), ComparisonOp::Ge, b[j][k]);
        }
    }
    let solution = lp.problem.solve().map_err(|e| Error::Solver(e.to_string()))?;
    let m = lp.extract(&solution);
    Ok((m, solution[t].max(0.0)))
}

/// Maximizes `sum_{j,i} w[j][i] m(j|i)` over column-stochastic `m` with
/// `rows` outputs subject to `sum_i m(j|i) c[i] ⟂` the rows of `constraint`
/// for every output `j` (`constraint` is K×N, one column per input).
pub(crate) fn max_weight_with_nullspace(
    rows: usize,
    weights: &[Vec<f64>],
    constraint: &DMatrix<f64>,
    rel_cutoff: f64,
) -> Result<(Vec<Vec<f64>>, f64)> {
    let cols = constraint.ncols();
    let objective = |j: usize, i: usize| weights.get(j).map_or(0.0, |w| w[i]);
    let mut lp = Stochastic::new(OptimizationDirection::Maximize, rows, cols, objective);
    // Replace the constraint rows by an orthonormal basis of their span so
    // the equality system has no redundant rows.
    let independent = if constraint.nrows() == 0 {
        DMatrix::zeros(0, cols)
    } else {
        let dec = crate::hs::svd(constraint);
        let keep = dec.above(rel_cutoff.max(1e-12) * dec.max());
        dec.v.columns(0, keep).transpose()
    };
    for j in 0..rows {
        for r in 0..independent.nrows() {
            let expr: Vec<(Variable, f64)> = (0..cols)
                .filter(|&i| independent[(r, i)].abs() > COEFF_FLOOR)
                .map(|i| (lp.vars[j][i], independent[(r, i)]))
                .collect();
            if !expr.is_empty() {
                lp.problem.add_constraint(expr.as_slice(), ComparisonOp::Eq, 0.0);
            }
        }
    }
    let solution = lp.problem.solve().map_err(|e| Error::Solver(e.to_string()))?;
    let m = lp.extract(&solution);
    let value = (0..rows)
        .map(|j| (0..cols).map(|i| objective(j, i) * m[j][i]).sum::<f64>())
        .sum();
    Ok((m, value))
}
