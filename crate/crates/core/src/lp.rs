//! Dense linear programs and a deterministic two-phase simplex solver.
//!
//! Every model in this crate reduces to small dense programs, so the solver
//! optimizes for reproducibility over speed: Bland's anti-cycling rule on both
//! the entering and leaving choices, fixed iteration order everywhere, and row
//! equilibration so tolerances behave uniformly across datasets with very
//! different magnitudes. Identical input bits produce identical output bits.

use serde::Serialize;

use crate::error::{DeaError, Result};

/// Absolute feasibility tolerance, checked on equilibrated rows.
pub const FEAS_TOL: f64 = 1e-9;
/// Reduced-cost optimality tolerance.
const COST_TOL: f64 = 1e-9;
/// Smallest admissible pivot element.
const PIVOT_TOL: f64 = 1e-9;
/// Phase-1 residual above which the program is declared infeasible.
const PHASE1_TOL: f64 = 1e-7;
const MAX_PIVOTS: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Sense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl Sense {
    fn flipped(self) -> Self {
        match self {
            Sense::Le => Sense::Ge,
            Sense::Ge => Sense::Le,
            Sense::Eq => Sense::Eq,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

/// Domain of a single decision variable. `Boxed` requires a finite lower
/// bound; the upper bound may be `f64::INFINITY`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bound {
    NonNegative,
    Free,
    Boxed { lo: f64, hi: f64 },
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub direction: Direction,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<Bound>,
}

impl LinearProgram {
    pub fn new(direction: Direction, objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            direction,
            objective,
            constraints: Vec::new(),
            bounds: vec![Bound::NonNegative; n],
        }
    }

    pub fn push(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) {
        self.constraints.push(Constraint { coeffs, sense, rhs });
    }

    pub fn set_bound(&mut self, var: usize, bound: Bound) {
        self.bounds[var] = bound;
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if n == 0 {
            return Err(DeaError::MalformedProgram("no variables".into()));
        }
        if self.bounds.len() != n {
            return Err(DeaError::MalformedProgram(format!(
                "{} bounds for {} variables",
                self.bounds.len(),
                n
            )));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(DeaError::MalformedProgram(format!(
                    "constraint {} has {} coefficients, expected {}",
                    i,
                    c.coeffs.len(),
                    n
                )));
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite()) {
                return Err(DeaError::MalformedProgram(format!(
                    "constraint {i} has non-finite entries"
                )));
            }
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(DeaError::MalformedProgram("non-finite objective".into()));
        }
        for (k, b) in self.bounds.iter().enumerate() {
            if let Bound::Boxed { lo, hi } = b {
                if !lo.is_finite() || hi.is_nan() || lo > hi {
                    return Err(DeaError::MalformedProgram(format!(
                        "variable {k} has invalid box [{lo}, {hi}]"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Textual form of the program, one constraint per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let dir = match self.direction {
            Direction::Minimize => "minimize",
            Direction::Maximize => "maximize",
        };
        out.push_str(dir);
        out.push(' ');
        out.push_str(&linear_expr(&self.objective));
        out.push_str("\nsubject to\n");
        for c in &self.constraints {
            out.push_str("  ");
            out.push_str(&linear_expr(&c.coeffs));
            out.push_str(&format!(" {} {}\n", c.sense.symbol(), c.rhs));
        }
        out.push_str("bounds\n");
        for (k, b) in self.bounds.iter().enumerate() {
            match b {
                Bound::NonNegative => out.push_str(&format!("  x{} >= 0\n", k + 1)),
                Bound::Free => out.push_str(&format!("  x{} free\n", k + 1)),
                Bound::Boxed { lo, hi } => {
                    if hi.is_finite() {
                        out.push_str(&format!("  {} <= x{} <= {}\n", lo, k + 1, hi));
                    } else {
                        out.push_str(&format!("  x{} >= {}\n", k + 1, lo));
                    }
                }
            }
        }
        out
    }

    /// Largest constraint or bound violation of `x`, measured on rows scaled
    /// by their largest absolute coefficient.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.constraints {
            let scale = c
                .coeffs
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()))
                .max(1e-12);
            let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
            let resid = match c.sense {
                Sense::Le => lhs - c.rhs,
                Sense::Ge => c.rhs - lhs,
                Sense::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(resid / scale);
        }
        for (k, b) in self.bounds.iter().enumerate() {
            match b {
                Bound::NonNegative => worst = worst.max(-x[k]),
                Bound::Free => {}
                Bound::Boxed { lo, hi } => {
                    worst = worst.max(lo - x[k]);
                    if hi.is_finite() {
                        worst = worst.max(x[k] - hi);
                    }
                }
            }
        }
        worst
    }
}

fn linear_expr(coeffs: &[f64]) -> String {
    let mut s = String::new();
    for (k, v) in coeffs.iter().enumerate() {
        if k > 0 {
            s.push_str(" + ");
        }
        s.push_str(&format!("{} x{}", v, k + 1));
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective in the original direction; `NAN` unless optimal.
    pub objective: f64,
    /// Variable values in the original variable space; empty unless optimal.
    pub x: Vec<f64>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    fn non_optimal(status: LpStatus) -> Self {
        LpSolution {
            status,
            objective: f64::NAN,
            x: Vec::new(),
        }
    }
}

struct ColMap {
    pos: usize,
    neg: Option<usize>,
    shift: f64,
}

/// Solve `lp` to a basic optimal solution.
///
/// Deterministic: same program bits, same answer bits. Infeasible and
/// unbounded programs come back as statuses, never panics.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.num_vars();

    // Expand variables: free ones split into a difference of two nonnegative
    // columns, boxed ones shift so the lower bound sits at zero.
    let mut cols = Vec::with_capacity(n);
    let mut nexp = 0usize;
    let mut ub_rows: Vec<(usize, f64)> = Vec::new();
    for b in &lp.bounds {
        match *b {
            Bound::NonNegative => {
                cols.push(ColMap {
                    pos: nexp,
                    neg: None,
                    shift: 0.0,
                });
                nexp += 1;
            }
            Bound::Free => {
                cols.push(ColMap {
                    pos: nexp,
                    neg: Some(nexp + 1),
                    shift: 0.0,
                });
                nexp += 2;
            }
            Bound::Boxed { lo, hi } => {
                cols.push(ColMap {
                    pos: nexp,
                    neg: None,
                    shift: lo,
                });
                if hi.is_finite() {
                    ub_rows.push((nexp, hi - lo));
                }
                nexp += 1;
            }
        }
    }

    let sign = match lp.direction {
        Direction::Minimize => 1.0,
        Direction::Maximize => -1.0,
    };
    // Internal form minimizes; the tableau below maximizes -c.
    let mut cost = vec![0.0; nexp];
    for (k, cm) in cols.iter().enumerate() {
        cost[cm.pos] = sign * lp.objective[k];
        if let Some(ncol) = cm.neg {
            cost[ncol] = -sign * lp.objective[k];
        }
    }

    // Assemble rows in expanded columns, fold in shifts, equilibrate.
    struct Row {
        coeffs: Vec<f64>,
        sense: Sense,
        rhs: f64,
    }
    let mut rows: Vec<Row> = Vec::with_capacity(lp.constraints.len() + ub_rows.len());
    for c in &lp.constraints {
        let mut coeffs = vec![0.0; nexp];
        let mut rhs = c.rhs;
        for (k, cm) in cols.iter().enumerate() {
            let a = c.coeffs[k];
            if a != 0.0 {
                coeffs[cm.pos] = a;
                if let Some(ncol) = cm.neg {
                    coeffs[ncol] = -a;
                }
                rhs -= a * cm.shift;
            }
        }
        rows.push(Row {
            coeffs,
            sense: c.sense,
            rhs,
        });
    }
    for &(col, ub) in &ub_rows {
        let mut coeffs = vec![0.0; nexp];
        coeffs[col] = 1.0;
        rows.push(Row {
            coeffs,
            sense: Sense::Le,
            rhs: ub,
        });
    }

    let mut scaled: Vec<Row> = Vec::with_capacity(rows.len());
    for mut row in rows {
        let scale = row.coeffs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale <= 0.0 {
            // Constant row: either vacuous or structurally infeasible.
            let ok = match row.sense {
                Sense::Le => row.rhs >= -FEAS_TOL,
                Sense::Ge => row.rhs <= FEAS_TOL,
                Sense::Eq => row.rhs.abs() <= FEAS_TOL,
            };
            if !ok {
                return Ok(LpSolution::non_optimal(LpStatus::Infeasible));
            }
            continue;
        }
        for v in &mut row.coeffs {
            *v /= scale;
        }
        row.rhs /= scale;
        if row.rhs < 0.0 {
            for v in &mut row.coeffs {
                *v = -*v;
            }
            row.rhs = -row.rhs;
            row.sense = row.sense.flipped();
        }
        scaled.push(row);
    }

    let m = scaled.len();
    let n_slack = scaled.iter().filter(|r| r.sense != Sense::Eq).count();
    let n_art = scaled.iter().filter(|r| r.sense != Sense::Le).count();
    let total = nexp + n_slack + n_art;

    // Tableau: m constraint rows plus the reduced-cost row; last column rhs.
    let mut t = vec![vec![0.0f64; total + 1]; m + 1];
    let mut basis = vec![0usize; m];
    let art_offset = nexp + n_slack;
    let mut slack_at = nexp;
    let mut art_at = art_offset;
    for (i, row) in scaled.iter().enumerate() {
        t[i][..nexp].copy_from_slice(&row.coeffs);
        t[i][total] = row.rhs;
        match row.sense {
            Sense::Le => {
                t[i][slack_at] = 1.0;
                basis[i] = slack_at;
                slack_at += 1;
            }
            Sense::Ge => {
                t[i][slack_at] = -1.0;
                slack_at += 1;
                t[i][art_at] = 1.0;
                basis[i] = art_at;
                art_at += 1;
            }
            Sense::Eq => {
                t[i][art_at] = 1.0;
                basis[i] = art_at;
                art_at += 1;
            }
        }
    }

    let mut pivots = 0usize;

    if n_art > 0 {
        // Phase 1: maximize -(sum of artificials). Canonicalize by adding the
        // rows whose basic variable is artificial.
        for col in art_offset..total {
            t[m][col] = -1.0;
        }
        for i in 0..m {
            if basis[i] >= art_offset {
                for col in 0..=total {
                    let v = t[i][col];
                    t[m][col] += v;
                }
            }
        }
        match iterate(&mut t, &mut basis, total, &mut pivots, |_| true)? {
            IterExit::Optimal => {}
            IterExit::Unbounded => {
                return Err(DeaError::Numerics(
                    "phase-1 program reported unbounded".into(),
                ));
            }
        }
        if t[m][total] > PHASE1_TOL {
            return Ok(LpSolution::non_optimal(LpStatus::Infeasible));
        }
        // Drive leftover artificials out of the basis where a structural or
        // slack pivot exists; rows without one are redundant and inert.
        for i in 0..m {
            if basis[i] >= art_offset {
                let col = (0..art_offset).find(|&j| t[i][j].abs() > PIVOT_TOL);
                if let Some(j) = col {
                    pivot(&mut t, &mut basis, i, j, total);
                    pivots += 1;
                }
            }
        }
    }

    // Phase 2: install the real objective (maximize -cost) and canonicalize
    // with respect to the current basis. Artificial columns never re-enter.
    for col in 0..total {
        t[m][col] = if col < nexp { -cost[col] } else { 0.0 };
    }
    t[m][total] = 0.0;
    for i in 0..m {
        let b = basis[i];
        if b < nexp {
            let f = t[m][b];
            if f.abs() > 0.0 {
                for col in 0..=total {
                    let v = t[i][col];
                    t[m][col] -= f * v;
                }
            }
        }
    }
    let status = match iterate(&mut t, &mut basis, total, &mut pivots, |col| {
        col < art_offset
    })? {
        IterExit::Optimal => LpStatus::Optimal,
        IterExit::Unbounded => return Ok(LpSolution::non_optimal(LpStatus::Unbounded)),
    };

    let mut xe = vec![0.0f64; total];
    for i in 0..m {
        xe[basis[i]] = t[i][total];
    }
    let mut x = vec![0.0f64; n];
    for (k, cm) in cols.iter().enumerate() {
        let mut v = xe[cm.pos];
        if let Some(ncol) = cm.neg {
            v -= xe[ncol];
        }
        x[k] = v + cm.shift;
    }
    let objective: f64 = lp.objective.iter().zip(&x).map(|(a, b)| a * b).sum();
    Ok(LpSolution {
        status,
        objective,
        x,
    })
}

enum IterExit {
    Optimal,
    Unbounded,
}

/// Bland's rule on an "entering when positive" reduced-cost row.
fn iterate<F: Fn(usize) -> bool>(
    t: &mut [Vec<f64>],
    basis: &mut [usize],
    total: usize,
    pivots: &mut usize,
    allowed: F,
) -> Result<IterExit> {
    let m = basis.len();
    loop {
        if *pivots > MAX_PIVOTS {
            return Err(DeaError::Numerics("pivot limit exceeded".into()));
        }
        let mut entering = None;
        for col in 0..total {
            if allowed(col) && t[m][col] > COST_TOL {
                entering = Some(col);
                break;
            }
        }
        let Some(entering) = entering else {
            return Ok(IterExit::Optimal);
        };

        let mut leaving: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            let a = t[i][entering];
            if a > PIVOT_TOL {
                let ratio = t[i][total] / a;
                let better = match leaving {
                    None => true,
                    Some(cur) => {
                        ratio < best - 1e-12 || (ratio <= best + 1e-12 && basis[i] < basis[cur])
                    }
                };
                if better {
                    best = ratio;
                    leaving = Some(i);
                }
            }
        }
        let Some(leaving) = leaving else {
            return Ok(IterExit::Unbounded);
        };
        pivot(t, basis, leaving, entering, total);
        *pivots += 1;
    }
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize, total: usize) {
    let m = basis.len();
    let p = t[row][col];
    for v in t[row].iter_mut() {
        *v /= p;
    }
    for i in 0..=m {
        if i == row {
            continue;
        }
        let f = t[i][col];
        if f.abs() <= 1e-13 {
            t[i][col] = 0.0;
            continue;
        }
        for j in 0..=total {
            let v = t[row][j];
            t[i][j] -= f * v;
        }
        t[i][col] = 0.0;
    }
    basis[row] = col;
}
