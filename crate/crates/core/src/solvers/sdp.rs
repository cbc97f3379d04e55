//! Feasible-start log-barrier interior point method for
//!
//! ```text
//!   minimize    Trace(H)
//!   subject to  h_i^T H h_i >= c_i          (scalar constraints)
//!               g_k g_k^T  <=  H             (matrix constraints, PSD order)
//!               H symmetric positive semidefinite
//! ```
//!
//! The variable is the packed lower triangle of H (m(m+1)/2 parameters), and
//! each barrier stage runs damped Newton steps. Scalar constraints are linear
//! in H, so the whole problem is a linear SDP; iterates stay strictly feasible
//! throughout, which means even early exits return a usable H.
//!
//! Large matrix-constraint families go through constraint generation: the
//! binding set at an optimum cannot exceed the variable count, so the barrier
//! runs on a working subset and violated g g^T <= H rows are pulled in until
//! none remain.

use crate::linalg::{self, Matrix};

use super::{SolveReport, SolveStatus, SolverError};

/// Tolerances and iteration limits for the barrier method.
#[derive(Clone, Debug)]
pub struct SdpOptions {
    /// Total Newton-step budget across all barrier stages.
    pub max_iter: usize,
    /// Initial and final barrier parameters; reduced by `mu_factor` per stage.
    pub mu_init: f64,
    pub mu_final: f64,
    pub mu_factor: f64,
    /// Newton decrement threshold that ends a stage.
    pub newton_tol: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions {
            max_iter: 500,
            mu_init: 1.0,
            mu_final: 1e-10,
            mu_factor: 0.25,
            newton_tol: 1e-11,
        }
    }
}

/// Constraint container for the trace-minimization SDP.
#[derive(Clone, Debug)]
pub struct SdpProblem {
    dim: usize,
    scalar: Vec<(Vec<f64>, f64)>,
    matrix: Vec<Vec<f64>>,
}

impl SdpProblem {
    pub fn new(dim: usize) -> Self {
        SdpProblem {
            dim,
            scalar: Vec::new(),
            matrix: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scalar_constraints(&self) -> &[(Vec<f64>, f64)] {
        &self.scalar
    }

    pub fn matrix_constraints(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    /// Add h^T H h >= c. Vacuous constraints (c <= 0, implied by PSD-ness) are
    /// dropped; a zero direction with positive c is infeasible and rejected.
    pub fn add_scalar(&mut self, h: Vec<f64>, c: f64) -> Result<(), SolverError> {
        if h.len() != self.dim {
            return Err(SolverError::BadProblem("scalar constraint dimension mismatch".into()));
        }
        if c < 0.0 {
            return Err(SolverError::BadProblem("negative scalar constraint bound".into()));
        }
        let norm = linalg::norm2(&h);
        if norm == 0.0 {
            if c > 0.0 {
                return Err(SolverError::BadProblem(
                    "zero direction with positive bound is infeasible".into(),
                ));
            }
            return Ok(());
        }
        if c == 0.0 {
            return Ok(()); // implied by H >= 0
        }
        self.scalar.push((h, c));
        Ok(())
    }

    /// Add g g^T <= H. A zero gradient is implied by PSD-ness and dropped.
    pub fn add_matrix(&mut self, g: Vec<f64>) -> Result<(), SolverError> {
        if g.len() != self.dim {
            return Err(SolverError::BadProblem("matrix constraint dimension mismatch".into()));
        }
        if linalg::norm2(&g) == 0.0 {
            return Ok(());
        }
        self.matrix.push(g);
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.scalar.is_empty() && self.matrix.is_empty()
    }
}

// Packed lower-triangle parametrization of symmetric matrices.
fn packed_len(m: usize) -> usize {
    m * (m + 1) / 2
}

fn packed_pairs(m: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(packed_len(m));
    for a in 0..m {
        for b in 0..=a {
            pairs.push((a, b));
        }
    }
    pairs
}

fn unpack(p: &[f64], m: usize) -> Matrix {
    let mut h = Matrix::zeros(m, m);
    let mut idx = 0;
    for a in 0..m {
        for b in 0..=a {
            h[(a, b)] = p[idx];
            h[(b, a)] = p[idx];
            idx += 1;
        }
    }
    h
}

/// SPD inverse via Cholesky; falls back to eigen clipping for near-singular
/// input (only reachable from degenerate line-search probes).
fn inverse_spd(a: &Matrix) -> Option<Matrix> {
    let n = a.rows();
    let _l = a.cholesky()?;
    let mut inv = Matrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = a.solve_spd(&e)?;
        for i in 0..n {
            inv[(i, j)] = col[i];
        }
    }
    Some(inv.symmetrize())
}

struct BarrierState {
    m: usize,
    pairs: Vec<(usize, usize)>,
    // Cached per-constraint data for the current iterate.
    scalar_slack: Vec<f64>,
    matrix_inv: Vec<Matrix>,
    h_inv: Matrix,
}

/// Strict feasibility check: every slack positive, every matrix slack and H
/// itself positive definite.
fn strictly_feasible(h: &Matrix, prob: &SdpProblem) -> bool {
    for (hv, c) in &prob.scalar {
        if h.quad_form(hv, hv) - c <= 0.0 {
            return false;
        }
    }
    if h.cholesky().is_none() {
        return false;
    }
    for g in &prob.matrix {
        let s = h.sub(&Matrix::outer(g, g));
        if s.cholesky().is_none() {
            return false;
        }
    }
    true
}

/// Barrier value Trace(H) + mu * phi(H); `None` if infeasible.
fn barrier_value(h: &Matrix, prob: &SdpProblem, mu: f64) -> Option<f64> {
    let mut phi = 0.0;
    for (hv, c) in &prob.scalar {
        let s = h.quad_form(hv, hv) - c;
        if s <= 0.0 {
            return None;
        }
        phi -= s.ln();
    }
    let log_det = |a: &Matrix| -> Option<f64> {
        let l = a.cholesky()?;
        let mut acc = 0.0;
        for i in 0..a.rows() {
            acc += l[(i, i)].ln();
        }
        Some(2.0 * acc)
    };
    phi -= log_det(h)?;
    for g in &prob.matrix {
        let s = h.sub(&Matrix::outer(g, g));
        phi -= log_det(&s)?;
    }
    Some(h.trace() + mu * phi)
}

impl BarrierState {
    fn refresh(h: &Matrix, prob: &SdpProblem) -> Option<BarrierState> {
        let m = h.rows();
        let mut scalar_slack = Vec::with_capacity(prob.scalar.len());
        for (hv, c) in &prob.scalar {
            let s = h.quad_form(hv, hv) - c;
            if s <= 0.0 {
                return None;
            }
            scalar_slack.push(s);
        }
        let h_inv = inverse_spd(h)?;
        let mut matrix_inv = Vec::with_capacity(prob.matrix.len());
        for g in &prob.matrix {
            let s = h.sub(&Matrix::outer(g, g));
            matrix_inv.push(inverse_spd(&s)?);
        }
        Some(BarrierState {
            m,
            pairs: packed_pairs(m),
            scalar_slack,
            matrix_inv,
            h_inv,
        })
    }

    /// Gradient and Hessian of Trace(H) + mu*phi(H) in packed coordinates.
    fn newton_system(&self, prob: &SdpProblem, mu: f64) -> (Vec<f64>, Matrix) {
        let np = self.pairs.len();
        let mut grad = vec![0.0; np];
        let mut hess = Matrix::zeros(np, np);

        // Trace term.
        for (idx, &(a, b)) in self.pairs.iter().enumerate() {
            if a == b {
                grad[idx] += 1.0;
            }
        }

        // Scalar barrier terms: s = h^T H h - c is linear in H with packed
        // gradient v, contributing -mu/s * v and +mu/s^2 * v v^T.
        for (k, (hv, _)) in prob.scalar.iter().enumerate() {
            let s = self.scalar_slack[k];
            let mut v = vec![0.0; np];
            for (idx, &(a, b)) in self.pairs.iter().enumerate() {
                let f = if a == b { 1.0 } else { 2.0 };
                v[idx] = f * hv[a] * hv[b];
            }
            let gs = mu / s;
            for idx in 0..np {
                grad[idx] -= gs * v[idx];
            }
            let hs = mu / (s * s);
            for i in 0..np {
                if v[i] == 0.0 {
                    continue;
                }
                for j in 0..=i {
                    let val = hs * v[i] * v[j];
                    hess[(i, j)] += val;
                    if i != j {
                        hess[(j, i)] += val;
                    }
                }
            }
        }

        // log det terms: gradient -mu * K, Hessian mu * K (x) K in the
        // symmetrized packed basis.
        let mut logdet_term = |k: &Matrix| {
            for (idx, &(a, b)) in self.pairs.iter().enumerate() {
                let f = if a == b { 1.0 } else { 2.0 };
                grad[idx] -= mu * f * k[(a, b)];
            }
            for (i, &(a, b)) in self.pairs.iter().enumerate() {
                let fa = if a == b { 1.0 } else { 2.0 };
                for (j, &(c, d)) in self.pairs.iter().enumerate().take(i + 1) {
                    let fc = if c == d { 1.0 } else { 2.0 };
                    let t = k[(a, c)] * k[(b, d)] + k[(a, d)] * k[(b, c)];
                    let val = mu * 0.5 * fa * fc * t;
                    hess[(i, j)] += val;
                    if i != j {
                        hess[(j, i)] += val;
                    }
                }
            }
        };
        let h_inv = self.h_inv.clone();
        logdet_term(&h_inv);
        let matrix_invs = self.matrix_inv.clone();
        for k in &matrix_invs {
            logdet_term(k);
        }
        let _ = self.m;
        (grad, hess)
    }
}

/// Inflate H0 along the identity until every constraint holds strictly.
fn make_strictly_feasible(h0: &Matrix, prob: &SdpProblem) -> Matrix {
    let m = h0.rows();
    let mut need = 0.0f64;
    for (hv, c) in &prob.scalar {
        let slack = h0.quad_form(hv, hv) - c;
        let hn2 = linalg::dot(hv, hv);
        if slack <= 0.0 {
            need = need.max(-slack / hn2);
        }
    }
    need = need.max(-linalg::min_eig_sym(h0));
    for g in &prob.matrix {
        let s = h0.sub(&Matrix::outer(g, g));
        need = need.max(-linalg::min_eig_sym(&s));
    }
    let margin = 1e-6 * (1.0 + h0.trace().abs() + need);
    let mut h = h0.clone();
    let bump = need + margin;
    for i in 0..m {
        h[(i, i)] += bump;
    }
    // Tighten: the eigen estimates above can be slightly optimistic, so bump
    // again until the Cholesky-based strict check passes.
    let mut extra = margin;
    while !strictly_feasible(&h, prob) {
        for i in 0..m {
            h[(i, i)] += extra;
        }
        extra *= 10.0;
    }
    h
}

/// Thresholds past which a constraint family goes through constraint
/// generation: clusters of near-active constraints force the barrier into
/// long boundary walks, while the binding set at an optimum has at most
/// m(m+1)/2 members.
const MATRIX_GENERATION_THRESHOLD: usize = 64;
const SCALAR_GENERATION_THRESHOLD: usize = 512;

/// Solve the trace-minimization SDP. `start` optionally provides a feasible
/// warm start (it is inflated to strict feasibility if needed); `None` starts
/// from a scaled identity. Problems with many matrix constraints are solved
/// by constraint generation over that family.
pub fn solve_sdp_tracemin(
    prob: &SdpProblem,
    opts: &SdpOptions,
    start: Option<&Matrix>,
) -> Result<(Matrix, SolveReport), SolverError> {
    let m = prob.dim;
    if m == 0 || m > 32 {
        return Err(SolverError::TooLarge(format!("SDP dimension {m} outside 1..=32")));
    }
    if prob.is_empty() {
        // The PSD cone's trace minimum with no other constraints.
        return Ok((
            Matrix::zeros(m, m),
            SolveReport {
                status: SolveStatus::Optimal,
                iterations: 0,
                objective: 0.0,
                kkt_residual: 0.0,
            },
        ));
    }

    let h0 = match start {
        Some(h) => h.symmetrize(),
        None => {
            // lambda I with lambda dominating every constraint.
            let mut lam = 0.0f64;
            for (hv, c) in &prob.scalar {
                lam = lam.max(c / linalg::dot(hv, hv));
            }
            for g in &prob.matrix {
                lam = lam.max(linalg::dot(g, g));
            }
            Matrix::identity(m).scale(lam.max(1.0))
        }
    };

    if prob.matrix.len() <= MATRIX_GENERATION_THRESHOLD
        && prob.scalar.len() <= SCALAR_GENERATION_THRESHOLD
    {
        return Ok(barrier_solve(prob, opts, &h0));
    }

    // Constraint generation: seed each family with its most demanding rows
    // (largest normalized bound / largest gradient norm), solve, pull in the
    // worst violated constraints, repeat. Constraints only accumulate, so
    // the loop terminates.
    let mut scalar_working: Vec<usize>;
    let mut scalar_in = vec![false; prob.scalar.len()];
    if prob.scalar.len() > SCALAR_GENERATION_THRESHOLD {
        let mut order: Vec<usize> = (0..prob.scalar.len()).collect();
        order.sort_by(|&a, &b| {
            let (ha, ca) = &prob.scalar[a];
            let (hb, cb) = &prob.scalar[b];
            let ra = ca / linalg::dot(ha, ha);
            let rb = cb / linalg::dot(hb, hb);
            rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
        });
        scalar_working = order[..SCALAR_GENERATION_THRESHOLD / 4].to_vec();
        scalar_working.sort_unstable();
    } else {
        scalar_working = (0..prob.scalar.len()).collect();
    }
    for &k in &scalar_working {
        scalar_in[k] = true;
    }

    let mut matrix_working: Vec<usize>;
    let mut matrix_in = vec![false; prob.matrix.len()];
    if prob.matrix.len() > MATRIX_GENERATION_THRESHOLD {
        let mut order: Vec<usize> = (0..prob.matrix.len()).collect();
        order.sort_by(|&a, &b| {
            let na = linalg::dot(&prob.matrix[a], &prob.matrix[a]);
            let nb = linalg::dot(&prob.matrix[b], &prob.matrix[b]);
            nb.partial_cmp(&na).unwrap().then(a.cmp(&b))
        });
        matrix_working = order[..MATRIX_GENERATION_THRESHOLD / 2].to_vec();
        matrix_working.sort_unstable();
    } else {
        matrix_working = (0..prob.matrix.len()).collect();
    }
    for &k in &matrix_working {
        matrix_in[k] = true;
    }

    let mut h = h0;
    let mut iterations = 0usize;
    let mut last_report;
    loop {
        let mut sub = SdpProblem::new(m);
        sub.scalar = scalar_working.iter().map(|&k| prob.scalar[k].clone()).collect();
        sub.matrix = matrix_working.iter().map(|&k| prob.matrix[k].clone()).collect();
        let (h_new, report) = barrier_solve(&sub, opts, &h);
        iterations += report.iterations;
        h = h_new;
        last_report = report;

        let mut added = 0usize;
        // Worst violated scalar rows, by relative violation.
        let mut s_viol: Vec<(f64, usize)> = Vec::new();
        for (k, (hv, c)) in prob.scalar.iter().enumerate() {
            if scalar_in[k] {
                continue;
            }
            let rel = (c - h.quad_form(hv, hv)) / c.max(1e-300);
            if rel > 1e-9 {
                s_viol.push((-rel, k));
            }
        }
        s_viol.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        for &(_, k) in s_viol.iter().take(32) {
            scalar_working.push(k);
            scalar_in[k] = true;
            added += 1;
        }
        // Worst violated matrix rows, by slack eigenvalue.
        let tol = -1e-9 * (1.0 + h.trace());
        let mut m_viol: Vec<(f64, usize)> = Vec::new();
        for (k, g) in prob.matrix.iter().enumerate() {
            if matrix_in[k] {
                continue;
            }
            let slack = h.sub(&Matrix::outer(g, g));
            let eig = linalg::min_eig_sym(&slack);
            if eig < tol {
                m_viol.push((eig, k));
            }
        }
        m_viol.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        for &(_, k) in m_viol.iter().take(16) {
            matrix_working.push(k);
            matrix_in[k] = true;
            added += 1;
        }
        if added == 0 {
            break;
        }
        if iterations >= 20 * opts.max_iter {
            last_report.status = SolveStatus::MaxIter;
            break;
        }
    }

    // Early exits can leave excluded constraints slightly violated; inflate
    // along the identity to restore the feasible-path contract.
    let mut bump = 0.0f64;
    for (hv, c) in &prob.scalar {
        let q = h.quad_form(hv, hv);
        if q < *c {
            bump = bump.max((c - q) / linalg::dot(hv, hv));
        }
    }
    let (_, min_eig) = constraint_violations(&h, prob);
    bump = bump.max(-min_eig);
    if bump > 0.0 {
        let bump = bump * (1.0 + 1e-9);
        for i in 0..m {
            h[(i, i)] += bump;
        }
    }
    let h_final = linalg::clip_psd(&h);
    last_report.iterations = iterations;
    last_report.objective = h_final.trace();
    Ok((h_final, last_report))
}

/// The feasible-start barrier ladder on an explicit constraint set.
fn barrier_solve(prob: &SdpProblem, opts: &SdpOptions, h0: &Matrix) -> (Matrix, SolveReport) {
    let m = prob.dim;
    let mut h = make_strictly_feasible(h0, prob);

    let mut iterations = 0usize;
    let mut status = SolveStatus::Optimal;
    let mut mu = opts.mu_init;

    enum StageEnd {
        Converged,
        Budget,
        /// Every inner iteration ran without reaching the stage tolerance.
        Exhausted,
        /// The line search found no improving step: the barrier cannot be
        /// decreased further in f64, which at the final stage means the
        /// iterate sits at the numerical central point.
        NoProgress,
        /// Unfixable Newton system or an infeasible refresh.
        Broken,
    }

    'outer: loop {
        let mut stage_end = StageEnd::Exhausted;
        let mut stagnant = 0usize;
        for _ in 0..250 {
            if iterations >= opts.max_iter {
                stage_end = StageEnd::Budget;
                break;
            }
            let Some(state) = BarrierState::refresh(&h, prob) else {
                stage_end = StageEnd::Broken;
                break;
            };
            let (grad, hess) = state.newton_system(prob, mu);

            // Regularized Newton solve; regularization is relative to the
            // largest Hessian diagonal so it stays meaningful when barrier
            // curvature blows up near the boundary.
            let max_diag = (0..hess.rows())
                .map(|i| hess[(i, i)])
                .fold(0.0f64, f64::max)
                .max(1e-300);
            let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
            let mut reg_rel = 0.0f64;
            let dir = loop {
                let sys = if reg_rel > 0.0 {
                    let mut s = hess.clone();
                    for i in 0..s.rows() {
                        s[(i, i)] += reg_rel * max_diag;
                    }
                    s
                } else {
                    hess.clone()
                };
                match sys.solve_spd(&rhs) {
                    Some(d) => break Some(d),
                    None => {
                        reg_rel = if reg_rel == 0.0 { 1e-14 } else { reg_rel * 100.0 };
                        if reg_rel > 1e-1 {
                            break None;
                        }
                    }
                }
            };
            let Some(dir) = dir else {
                stage_end = StageEnd::Broken;
                break; // abandon the stage; the mu ladder continues
            };

            let decrement = -linalg::dot(&grad, &dir);
            let stage_tol = (opts.newton_tol * (1.0 + h.trace().abs())).max(0.05 * mu);
            if decrement.abs() < stage_tol {
                stage_end = StageEnd::Converged;
                break;
            }

            // Backtracking line search with Armijo parameter 0.01, shrink 0.5;
            // feasibility enforced through the barrier value itself.
            let Some(f0) = barrier_value(&h, prob, mu) else {
                stage_end = StageEnd::Broken;
                break;
            };
            let step = unpack(&dir, m);
            let mut alpha = 1.0;
            let mut accepted = false;
            while alpha > 1e-14 {
                let trial = h.add(&step.scale(alpha));
                if let Some(f1) = barrier_value(&trial, prob, mu) {
                    if f1 <= f0 - 0.01 * alpha * decrement {
                        // Forward tracking: when the unit step is accepted,
                        // keep doubling while the barrier strictly improves.
                        // Newton steps systematically undershoot while a
                        // slack walks back open (each unit step only doubles
                        // it), and expansion turns that O(log) crawl into a
                        // couple of iterations.
                        let mut best_f = f1;
                        let mut best_trial = trial;
                        if alpha == 1.0 {
                            let mut a2 = 2.0;
                            for _ in 0..40 {
                                let t2 = h.add(&step.scale(a2));
                                match barrier_value(&t2, prob, mu) {
                                    Some(f2) if f2 < best_f => {
                                        best_f = f2;
                                        best_trial = t2;
                                        a2 *= 2.0;
                                    }
                                    _ => break,
                                }
                            }
                        }
                        // Track f64-floor stagnation: consecutive accepted
                        // steps that barely move the barrier mean the
                        // remaining decrement is rounding noise.
                        if f0 - best_f <= 1e-13 * (1.0 + f0.abs()) {
                            stagnant += 1;
                        } else {
                            stagnant = 0;
                        }
                        h = best_trial;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            iterations += 1;
            if !accepted || stagnant >= 3 {
                stage_end = StageEnd::NoProgress;
                break;
            }
        }
        match stage_end {
            StageEnd::Budget => {
                status = SolveStatus::MaxIter;
                break 'outer;
            }
            StageEnd::Converged | StageEnd::Exhausted | StageEnd::NoProgress | StageEnd::Broken => {
                if mu <= opts.mu_final * 1.001 {
                    status = match stage_end {
                        // NoProgress at the final stage is the f64 floor of
                        // the barrier, i.e. numerical convergence.
                        StageEnd::Converged | StageEnd::NoProgress => status,
                        StageEnd::Exhausted => SolveStatus::MaxIter,
                        StageEnd::Broken => SolveStatus::Numerical,
                        StageEnd::Budget => unreachable!(),
                    };
                    break 'outer;
                }
                mu = (mu * opts.mu_factor).max(opts.mu_final);
            }
        }
    }

    // Duality-gap bound from the barrier degree.
    let degree = prob.scalar.len() + m * (prob.matrix.len() + 1);
    let gap = mu * degree as f64;
    let h_final = linalg::clip_psd(&h);
    let report = SolveReport {
        status,
        iterations,
        objective: h_final.trace(),
        kkt_residual: gap,
    };
    (h_final, report)
}

/// Worst constraint violations of H against a problem: positive values mean
/// violation. Returns (max scalar violation relative to c, most negative
/// eigenvalue over matrix slacks and H itself).
pub fn constraint_violations(h: &Matrix, prob: &SdpProblem) -> (f64, f64) {
    let mut scalar = f64::NEG_INFINITY;
    if prob.scalar.is_empty() {
        scalar = 0.0;
    }
    for (hv, c) in &prob.scalar {
        let s = h.quad_form(hv, hv);
        scalar = scalar.max((c - s) / c.max(1e-300));
    }
    let mut min_eig = linalg::min_eig_sym(h);
    for g in &prob.matrix {
        let s = h.sub(&Matrix::outer(g, g));
        min_eig = min_eig.min(linalg::min_eig_sym(&s));
    }
    (scalar, min_eig)
}
