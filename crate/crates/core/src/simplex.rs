//! Dense two-phase simplex for the small feasibility programs this crate
//! generates.
//!
//! Problems arrive as `minimize c·x` over `x ≥ 0` subject to dense equality
//! and inequality rows. Phase one drives an artificial basis to zero, phase
//! two optimizes the real objective. Pivoting follows Bland's rule (smallest
//! eligible index enters, smallest basic index breaks ratio ties), which
//! cannot cycle; an iteration cap converts any numerical stall into an error.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;

/// Row sense of one constraint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

/// One dense constraint row `coefficients · x (=|≤|≥) rhs`.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub coefficients: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `minimize objective · x` subject to `constraints`, `x ≥ 0`.
#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

/// Optimal point and value.
#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

const RC_EPS: f64 = 1e-9;
const PIVOT_EPS: f64 = 1e-9;
const PHASE1_EPS: f64 = 1e-8;

struct Tableau {
    ncols: usize,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    iterations: usize,
    max_iterations: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let factor = self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v /= factor;
        }
        self.rhs[row] /= factor;
        for i in 0..self.rows.len() {
            if i == row {
                continue;
            }
            let scale = self.rows[i][col];
            if scale == 0.0 {
                continue;
            }
            for j in 0..self.ncols {
                let delta = scale * self.rows[row][j];
                self.rows[i][j] -= delta;
            }
            self.rhs[i] -= scale * self.rhs[row];
            // Ratio tests keep the rhs nonnegative in exact arithmetic;
            // clamp the roundoff dust so later ratios stay meaningful.
            if self.rhs[i] < 0.0 && self.rhs[i] > -1e-11 {
                self.rhs[i] = 0.0;
            }
        }
        self.basis[row] = col;
    }

    /// Bland-rule simplex iterations for the given cost vector. Columns at or
    /// past `ban_from` never enter the basis.
    fn optimize(&mut self, cost: &[f64], ban_from: usize) -> Result<(), Error> {
        loop {
            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(Error::LpNumericalFailure { reason: "iteration cap exceeded" });
            }
            let basic_cost: Vec<f64> = self.basis.iter().map(|&b| cost[b]).collect();
            let mut entering = None;
            for j in 0..self.ncols.min(ban_from) {
                let mut reduced = cost[j];
                for (i, row) in self.rows.iter().enumerate() {
                    reduced -= basic_cost[i] * row[j];
                }
                if reduced < -RC_EPS {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else {
                return Ok(());
            };
            let mut leaving: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[col] > PIVOT_EPS {
                    let ratio = self.rhs[i] / row[col];
                    match leaving {
                        None => leaving = Some((i, ratio)),
                        Some((best_row, best_ratio)) => {
                            if ratio < best_ratio - 1e-12
                                || ((ratio - best_ratio).abs() <= 1e-12
                                    && self.basis[i] < self.basis[best_row])
                            {
                                leaving = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            let Some((row, _)) = leaving else {
                return Err(Error::LpNumericalFailure { reason: "unbounded" });
            };
            self.pivot(row, col);
        }
    }
}

/// Solves the program, or reports infeasibility, unboundedness, or an
/// iteration stall as `LpNumericalFailure`.
pub fn solve(lp: &LinearProgram, max_iterations: usize) -> Result<LpSolution, Error> {
    let nvars = lp.objective.len();
    for c in &lp.constraints {
        assert_eq!(c.coefficients.len(), nvars, "constraint width must match objective");
    }
    let m = lp.constraints.len();

    // Normalize rows to nonnegative rhs, count the extra columns.
    let mut rows_data: Vec<(Vec<f64>, Relation, f64)> = Vec::with_capacity(m);
    for c in &lp.constraints {
        if c.rhs < 0.0 {
            let flipped: Vec<f64> = c.coefficients.iter().map(|v| -v).collect();
            let relation = match c.relation {
                Relation::Eq => Relation::Eq,
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
            };
            rows_data.push((flipped, relation, -c.rhs));
        } else {
            rows_data.push((c.coefficients.clone(), c.relation, c.rhs));
        }
    }
    let n_slack = rows_data.iter().filter(|(_, r, _)| *r != Relation::Eq).count();
    let n_artificial = rows_data.iter().filter(|(_, r, _)| *r != Relation::Le).count();
    let ncols = nvars + n_slack + n_artificial;
    let artificial_start = nvars + n_slack;

    let mut tableau = Tableau {
        ncols,
        rows: Vec::with_capacity(m),
        rhs: Vec::with_capacity(m),
        basis: Vec::with_capacity(m),
        iterations: 0,
        max_iterations,
    };
    let mut slack_cursor = nvars;
    let mut artificial_cursor = artificial_start;
    for (coeffs, relation, rhs) in rows_data {
        let mut row = vec![0.0; ncols];
        row[..nvars].copy_from_slice(&coeffs);
        let basic;
        match relation {
            Relation::Le => {
                row[slack_cursor] = 1.0;
                basic = slack_cursor;
                slack_cursor += 1;
            }
            Relation::Ge => {
                row[slack_cursor] = -1.0;
                slack_cursor += 1;
                row[artificial_cursor] = 1.0;
                basic = artificial_cursor;
                artificial_cursor += 1;
            }
            Relation::Eq => {
                row[artificial_cursor] = 1.0;
                basic = artificial_cursor;
                artificial_cursor += 1;
            }
        }
        tableau.rows.push(row);
        tableau.rhs.push(rhs);
        tableau.basis.push(basic);
    }

    // Phase one: minimize the artificial sum down to zero.
    if n_artificial > 0 {
        let mut phase1_cost = vec![0.0; ncols];
        for c in phase1_cost.iter_mut().skip(artificial_start) {
            *c = 1.0;
        }
        tableau.optimize(&phase1_cost, ncols)?;
        let infeasibility: f64 = tableau
            .basis
            .iter()
            .zip(tableau.rhs.iter())
            .filter(|(&b, _)| b >= artificial_start)
            .map(|(_, &v)| v)
            .sum();
        if infeasibility > PHASE1_EPS {
            return Err(Error::LpNumericalFailure { reason: "infeasible" });
        }
        // Pivot leftover zero-valued artificials out of the basis; rows with
        // no real coefficient left are redundant and dropped.
        let mut row = 0;
        while row < tableau.rows.len() {
            if tableau.basis[row] >= artificial_start {
                let col = (0..artificial_start)
                    .find(|&j| tableau.rows[row][j].abs() > PIVOT_EPS);
                match col {
                    Some(col) => tableau.pivot(row, col),
                    None => {
                        tableau.rows.remove(row);
                        tableau.rhs.remove(row);
                        tableau.basis.remove(row);
                        continue;
                    }
                }
            }
            row += 1;
        }
    }

    // Phase two: the real objective, artificial columns banned.
    let mut phase2_cost = vec![0.0; ncols];
    phase2_cost[..nvars].copy_from_slice(&lp.objective);
    tableau.optimize(&phase2_cost, artificial_start)?;

    let mut x = vec![0.0; nvars];
    for (i, &b) in tableau.basis.iter().enumerate() {
        if b < nvars {
            x[b] = tableau.rhs[i];
        }
    }
    let objective = lp.objective.iter().zip(x.iter()).map(|(c, v)| c * v).sum();
    Ok(LpSolution { x, objective })
}
