//! Two-phase dense simplex.
//!
//! Determinism matters more than speed for the subproblems this serves
//! (search-direction LPs with a handful of variables and up to a few thousand
//! rows), so this is a full-tableau implementation with Dantzig pricing and a
//! Bland's-rule fallback once stalling is detected.

use super::{SolveReport, SolveStatus, SolverError};

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-8;

/// min c^T x subject to `ineq` rows a^T x <= b, `eq` rows a^T x = b, and
/// optional per-variable bounds. Variables without bounds are free.
#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub ineq: Vec<(Vec<f64>, f64)>,
    pub eq: Vec<(Vec<f64>, f64)>,
    /// One entry per variable; empty means all variables free.
    pub bounds: Vec<(Option<f64>, Option<f64>)>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        LinearProgram {
            objective,
            ..Default::default()
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_ineq(&mut self, row: Vec<f64>, rhs: f64) {
        debug_assert_eq!(row.len(), self.num_vars());
        self.ineq.push((row, rhs));
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) {
        debug_assert_eq!(row.len(), self.num_vars());
        self.eq.push((row, rhs));
    }

    fn validate(&self) -> Result<(), SolverError> {
        let n = self.num_vars();
        if n == 0 {
            return Err(SolverError::BadProblem("no variables".into()));
        }
        if n > 200 {
            return Err(SolverError::TooLarge(format!("{n} variables > 200")));
        }
        let rows = self.ineq.len() + self.eq.len();
        if rows > 10_000 {
            return Err(SolverError::TooLarge(format!("{rows} constraints > 10^4")));
        }
        if !self.bounds.is_empty() && self.bounds.len() != n {
            return Err(SolverError::BadProblem("bounds length mismatch".into()));
        }
        for (row, _) in self.ineq.iter().chain(self.eq.iter()) {
            if row.len() != n {
                return Err(SolverError::BadProblem("constraint row length mismatch".into()));
            }
        }
        Ok(())
    }
}

// Standard-form column bookkeeping: each original variable maps to one or two
// nonnegative columns plus a constant shift.
enum VarMap {
    // x = shift + y
    Shifted { col: usize, shift: f64 },
    // x = shift - y  (upper bound only)
    Negated { col: usize, shift: f64 },
    // x = y_plus - y_minus
    Split { plus: usize, minus: usize },
}

struct Tableau {
    m: usize,
    n: usize,
    a: Vec<f64>, // m x n row-major
    b: Vec<f64>, // m, kept nonnegative
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    fn pivot(&mut self, row: usize, col: usize, cost: &mut [f64], obj: &mut f64) {
        let n = self.n;
        let piv = self.a[row * n + col];
        let inv = 1.0 / piv;
        for j in 0..n {
            self.a[row * n + j] *= inv;
        }
        self.b[row] *= inv;
        for i in 0..self.m {
            if i == row {
                continue;
            }
            let f = self.a[i * n + col];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                self.a[i * n + j] -= f * self.a[row * n + j];
            }
            self.a[i * n + col] = 0.0; // cancel exactly
            self.b[i] -= f * self.b[row];
        }
        let f = cost[col];
        if f != 0.0 {
            for j in 0..n {
                cost[j] -= f * self.a[row * n + j];
            }
            cost[col] = 0.0;
            *obj -= f * self.b[row];
        }
        self.basis[row] = col;
    }
}

enum PhaseExit {
    Optimal,
    Unbounded,
    IterLimit,
}

/// Runs simplex iterations on the tableau for the given reduced-cost row.
/// `cost` and `obj` are updated in place; `obj` tracks c_B^T x_B.
fn run_simplex(
    tab: &mut Tableau,
    cost: &mut [f64],
    obj: &mut f64,
    allowed_cols: usize,
    iter_budget: usize,
    iterations: &mut usize,
) -> PhaseExit {
    let mut stall = 0usize;
    let mut bland = false;
    let stall_limit = 2 * (tab.m + tab.n) + 10;

    for _ in 0..iter_budget {
        // Entering column: most negative reduced cost (Dantzig), or the first
        // negative one under Bland's rule after stalling.
        let mut enter: Option<usize> = None;
        if bland {
            for j in 0..allowed_cols {
                if cost[j] < -PIVOT_TOL {
                    enter = Some(j);
                    break;
                }
            }
        } else {
            let mut best = -PIVOT_TOL;
            for j in 0..allowed_cols {
                if cost[j] < best {
                    best = cost[j];
                    enter = Some(j);
                }
            }
        }
        let Some(col) = enter else {
            return PhaseExit::Optimal;
        };

        // Ratio test; ties broken by smallest basis index for determinism
        // (and cycle-freedom once Bland is active).
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..tab.m {
            let aij = tab.at(i, col);
            if aij > PIVOT_TOL {
                let ratio = tab.b[i] / aij;
                let better = ratio < best_ratio - 1e-12
                    || (ratio < best_ratio + 1e-12
                        && leave.map(|l| tab.basis[i] < tab.basis[l]).unwrap_or(false));
                if better {
                    best_ratio = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(row) = leave else {
            return PhaseExit::Unbounded;
        };

        let before = *obj;
        tab.pivot(row, col, cost, obj);
        *iterations += 1;
        if *obj > before - 1e-13 {
            stall += 1;
            if stall > stall_limit {
                bland = true;
            }
        } else {
            stall = 0;
        }
    }
    PhaseExit::IterLimit
}

/// Solve a linear program. Returns the optimizer and a report; infeasible
/// problems surface as `SolverError::Infeasible` with the phase-1 residual,
/// and unbounded problems return status `Infeasible` (the dual is infeasible)
/// through the report of an `Err`.
pub fn solve_lp(lp: &LinearProgram) -> Result<(Vec<f64>, SolveReport), SolverError> {
    lp.validate()?;
    let nvars = lp.num_vars();
    let bounds = if lp.bounds.is_empty() {
        vec![(None, None); nvars]
    } else {
        lp.bounds.clone()
    };

    // Map variables onto nonnegative standard-form columns.
    let mut maps: Vec<VarMap> = Vec::with_capacity(nvars);
    let mut ncols = 0usize;
    let mut upper_rows: Vec<(usize, f64)> = Vec::new(); // column y <= value
    for (lo, hi) in &bounds {
        match (lo, hi) {
            (Some(l), Some(u)) => {
                maps.push(VarMap::Shifted { col: ncols, shift: *l });
                upper_rows.push((ncols, u - l));
                ncols += 1;
            }
            (Some(l), None) => {
                maps.push(VarMap::Shifted { col: ncols, shift: *l });
                ncols += 1;
            }
            (None, Some(u)) => {
                maps.push(VarMap::Negated { col: ncols, shift: *u });
                ncols += 1;
            }
            (None, None) => {
                maps.push(VarMap::Split { plus: ncols, minus: ncols + 1 });
                ncols += 2;
            }
        }
    }

    // Rewrite a row over original variables into standard-form columns and a
    // constant moved to the right-hand side.
    let expand = |row: &[f64]| -> (Vec<f64>, f64) {
        let mut out = vec![0.0; ncols];
        let mut shift = 0.0;
        for (v, coeff) in row.iter().enumerate() {
            if *coeff == 0.0 {
                continue;
            }
            match &maps[v] {
                VarMap::Shifted { col, shift: s } => {
                    out[*col] += coeff;
                    shift += coeff * s;
                }
                VarMap::Negated { col, shift: s } => {
                    out[*col] -= coeff;
                    shift += coeff * s;
                }
                VarMap::Split { plus, minus } => {
                    out[*plus] += coeff;
                    out[*minus] -= coeff;
                }
            }
        }
        (out, shift)
    };

    struct StdRow {
        coeffs: Vec<f64>,
        rhs: f64,
        is_eq: bool,
    }
    let mut rows: Vec<StdRow> = Vec::new();
    for (row, rhs) in &lp.ineq {
        let (coeffs, shift) = expand(row);
        rows.push(StdRow { coeffs, rhs: rhs - shift, is_eq: false });
    }
    for (col, ub) in &upper_rows {
        let mut coeffs = vec![0.0; ncols];
        coeffs[*col] = 1.0;
        rows.push(StdRow { coeffs, rhs: *ub, is_eq: false });
    }
    for (row, rhs) in &lp.eq {
        let (coeffs, shift) = expand(row);
        rows.push(StdRow { coeffs, rhs: rhs - shift, is_eq: true });
    }

    let m = rows.len();
    // Column layout: structural | slack/surplus | artificial.
    let mut need_artificial = vec![false; m];
    let mut nslack = 0usize;
    for (i, r) in rows.iter().enumerate() {
        let neg = r.rhs < 0.0;
        if r.is_eq {
            need_artificial[i] = true;
        } else {
            nslack += 1;
            // "<=" with negative rhs flips to ">=", whose surplus column
            // cannot start basic.
            if neg {
                need_artificial[i] = true;
            }
        }
    }
    let nart = need_artificial.iter().filter(|x| **x).count();
    let total = ncols + nslack + nart;

    let mut tab = Tableau {
        m,
        n: total,
        a: vec![0.0; m * total],
        b: vec![0.0; m],
        basis: vec![usize::MAX; m],
    };

    let mut slack_cursor = ncols;
    let mut art_cursor = ncols + nslack;
    for (i, r) in rows.iter().enumerate() {
        let sign = if r.rhs < 0.0 { -1.0 } else { 1.0 };
        for j in 0..ncols {
            tab.a[i * total + j] = sign * r.coeffs[j];
        }
        tab.b[i] = sign * r.rhs;
        if !r.is_eq {
            tab.a[i * total + slack_cursor] = sign;
            if sign > 0.0 {
                tab.basis[i] = slack_cursor;
            }
            slack_cursor += 1;
        }
        if need_artificial[i] {
            tab.a[i * total + art_cursor] = 1.0;
            tab.basis[i] = art_cursor;
            art_cursor += 1;
        }
    }

    let mut iterations = 0usize;
    let iter_budget = 50 * (m + total) + 200;

    // Phase 1: drive artificials to zero.
    if nart > 0 {
        let mut cost = vec![0.0; total];
        for j in (ncols + nslack)..total {
            cost[j] = 1.0;
        }
        let mut obj = 0.0;
        // Reduce cost row against the starting basis.
        for i in 0..m {
            let bcol = tab.basis[i];
            if cost[bcol] != 0.0 {
                let f = cost[bcol];
                for j in 0..total {
                    cost[j] -= f * tab.at(i, j);
                }
                obj -= f * tab.b[i];
            }
        }
        // obj now equals -(sum of artificial values); phase-1 value is -obj.
        match run_simplex(&mut tab, &mut cost, &mut obj, total, iter_budget, &mut iterations) {
            PhaseExit::Optimal | PhaseExit::IterLimit => {}
            PhaseExit::Unbounded => unreachable!("phase 1 objective is bounded below"),
        }
        let phase1 = -obj;
        if phase1 > FEAS_TOL * (1.0 + tab.b.iter().fold(0.0f64, |s, v| s.max(v.abs()))) {
            return Err(SolverError::Infeasible { residual: phase1 });
        }
        // Pivot any artificial still in the basis out. A row where no
        // structural or slack column can pivot is numerically redundant and
        // must be REMOVED: leaving its zero artificial basic would let it
        // grow during phase 2 and silently relax the constraint.
        let mut drop_rows: Vec<usize> = Vec::new();
        for i in 0..m {
            if tab.basis[i] >= ncols + nslack {
                let mut swapped = false;
                for j in 0..(ncols + nslack) {
                    if tab.at(i, j).abs() > PIVOT_TOL {
                        let mut dummy_cost = vec![0.0; total];
                        let mut dummy_obj = 0.0;
                        tab.pivot(i, j, &mut dummy_cost, &mut dummy_obj);
                        swapped = true;
                        break;
                    }
                }
                if !swapped {
                    drop_rows.push(i);
                }
            }
        }
        if !drop_rows.is_empty() {
            let keep: Vec<usize> = (0..tab.m).filter(|i| !drop_rows.contains(i)).collect();
            let mut a = Vec::with_capacity(keep.len() * total);
            let mut b = Vec::with_capacity(keep.len());
            let mut basis = Vec::with_capacity(keep.len());
            for &i in &keep {
                a.extend_from_slice(&tab.a[i * total..(i + 1) * total]);
                b.push(tab.b[i]);
                basis.push(tab.basis[i]);
            }
            tab = Tableau { m: keep.len(), n: total, a, b, basis };
        }
    }
    let m = tab.m;

    // Phase 2 over structural + slack columns only.
    let allowed = ncols + nslack;
    let mut cost = vec![0.0; total];
    for (v, coeff) in lp.objective.iter().enumerate() {
        match &maps[v] {
            VarMap::Shifted { col, .. } => cost[*col] += coeff,
            VarMap::Negated { col, .. } => cost[*col] -= coeff,
            VarMap::Split { plus, minus } => {
                cost[*plus] += coeff;
                cost[*minus] -= coeff;
            }
        }
    }
    let mut obj = 0.0;
    for i in 0..m {
        let bcol = tab.basis[i];
        if bcol != usize::MAX && cost[bcol] != 0.0 {
            let f = cost[bcol];
            for j in 0..total {
                cost[j] -= f * tab.at(i, j);
            }
            obj -= f * tab.b[i];
        }
    }

    let exit = run_simplex(&mut tab, &mut cost, &mut obj, allowed, iter_budget, &mut iterations);

    // Recover standard-form solution, then original variables.
    let mut y = vec![0.0; total];
    for i in 0..m {
        if tab.basis[i] != usize::MAX {
            y[tab.basis[i]] = tab.b[i];
        }
    }
    let mut x = vec![0.0; nvars];
    for (v, map) in maps.iter().enumerate() {
        x[v] = match map {
            VarMap::Shifted { col, shift } => shift + y[*col],
            VarMap::Negated { col, shift } => shift - y[*col],
            VarMap::Split { plus, minus } => y[*plus] - y[*minus],
        };
    }

    // KKT residuals in the original formulation.
    let mut primal = 0.0f64;
    for (row, rhs) in &lp.ineq {
        primal = primal.max(crate::linalg::dot(row, &x) - rhs);
    }
    for (row, rhs) in &lp.eq {
        primal = primal.max((crate::linalg::dot(row, &x) - rhs).abs());
    }
    for (v, (lo, hi)) in bounds.iter().enumerate() {
        if let Some(l) = lo {
            primal = primal.max(l - x[v]);
        }
        if let Some(u) = hi {
            primal = primal.max(x[v] - u);
        }
    }
    let dual = cost[..allowed].iter().fold(0.0f64, |s, c| s.max(-c));
    let objective = crate::linalg::dot(&lp.objective, &x);

    let status = match exit {
        PhaseExit::Optimal => SolveStatus::Optimal,
        PhaseExit::IterLimit => SolveStatus::MaxIter,
        PhaseExit::Unbounded => SolveStatus::Infeasible,
    };
    let report = SolveReport {
        status,
        iterations,
        objective: if matches!(exit, PhaseExit::Unbounded) {
            f64::NEG_INFINITY
        } else {
            objective
        },
        kkt_residual: primal.max(dual).max(0.0),
    };
    Ok((x, report))
}
