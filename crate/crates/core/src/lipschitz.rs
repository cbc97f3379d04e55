//! Estimation of the squared Lipschitz matrix H = L^T L from data.
//!
//! Samples contribute linear constraints |f(x_i) - f(x_j)|^2 <= h^T H h with
//! h = x_i - x_j; gradients contribute the semidefinite constraints
//! g g^T <= H. Minimizing Trace(H) over the PSD cone subject to both families
//! picks the total-order-minimal Lipschitz matrix, and the principal square
//! root of the solution is the Lipschitz matrix L itself.
//!
//! The epsilon variant replaces the sample bound with the clamped
//! (|df| - eps)_+^2, which drops every pair whose variation is explained by
//! noise alone; gradients are rejected in that mode because the epsilon class
//! does not constrain derivatives.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::linalg::{self, Matrix};
use crate::solvers::{
    self, solve_sdp_tracemin, SdpOptions, SdpProblem, SolveReport, SolverError,
};

/// Tolerance under which two sample points count as duplicates.
pub const DUPLICATE_TOL: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum EstimateError {
    #[error("duplicate points (rows {i}, {j}) carry different values: no finite Lipschitz matrix exists")]
    DuplicateWithDifferentValues { i: usize, j: usize },
    #[error("epsilon > 0 cannot be combined with gradient observations")]
    EpsilonWithGradients,
    #[error("estimation needs at least one sample or gradient")]
    Empty,
    #[error("dimension mismatch in sample data")]
    DimensionMismatch,
    #[error("negative epsilon")]
    NegativeEpsilon,
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Paired input points and function values, plus optional gradient
/// observations at their own locations.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    points: Matrix,
    values: Vec<f64>,
    grad_points: Option<Matrix>,
    grads: Option<Matrix>,
}

impl SampleSet {
    pub fn from_samples(points: Matrix, values: Vec<f64>) -> Result<Self, EstimateError> {
        if points.rows() != values.len() {
            return Err(EstimateError::DimensionMismatch);
        }
        Ok(SampleSet {
            points,
            values,
            grad_points: None,
            grads: None,
        })
    }

    pub fn gradients_only(grad_points: Matrix, grads: Matrix) -> Result<Self, EstimateError> {
        let dim = grads.cols();
        if grad_points.rows() != grads.rows() || grad_points.cols() != dim {
            return Err(EstimateError::DimensionMismatch);
        }
        Ok(SampleSet {
            points: Matrix::zeros(0, dim),
            values: Vec::new(),
            grad_points: Some(grad_points),
            grads: Some(grads),
        })
    }

    pub fn with_gradients(mut self, grad_points: Matrix, grads: Matrix) -> Result<Self, EstimateError> {
        if grad_points.rows() != grads.rows()
            || grads.cols() != self.dim()
            || grad_points.cols() != self.dim()
        {
            return Err(EstimateError::DimensionMismatch);
        }
        self.grad_points = Some(grad_points);
        self.grads = Some(grads);
        Ok(self)
    }

    pub fn empty(dim: usize) -> Self {
        SampleSet {
            points: Matrix::zeros(0, dim),
            values: Vec::new(),
            grad_points: None,
            grads: None,
        }
    }

    pub fn push_sample(&mut self, point: &[f64], value: f64) {
        self.points.push_row(point);
        self.values.push(value);
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }

    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0 && self.num_gradients() == 0
    }

    pub fn num_gradients(&self) -> usize {
        self.grads.as_ref().map_or(0, |g| g.rows())
    }

    pub fn has_gradients(&self) -> bool {
        self.num_gradients() > 0
    }

    pub fn point(&self, i: usize) -> &[f64] {
        self.points.row(i)
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn points(&self) -> &Matrix {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn gradient(&self, k: usize) -> &[f64] {
        self.grads.as_ref().expect("no gradients").row(k)
    }

    pub fn gradients(&self) -> Option<&Matrix> {
        self.grads.as_ref()
    }

    pub fn gradient_points(&self) -> Option<&Matrix> {
        self.grad_points.as_ref()
    }

    /// Restriction to a subset of the sample rows (gradients dropped).
    pub fn sample_subset(&self, idx: &[usize]) -> SampleSet {
        let mut points = Matrix::zeros(0, self.dim());
        let mut values = Vec::with_capacity(idx.len());
        for &i in idx {
            points.push_row(self.point(i));
            values.push(self.value(i));
        }
        SampleSet {
            points,
            values,
            grad_points: None,
            grads: None,
        }
    }
}

/// The estimated Lipschitz matrix: H (PSD), its principal square root L,
/// the noise level used for estimation, and solver diagnostics.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "LipschitzMatrixJson", into = "LipschitzMatrixJson")]
pub struct LipschitzMatrix {
    h: Matrix,
    l: Matrix,
    epsilon: f64,
    report: SolveReport,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct LipschitzMatrixJson {
    m: usize,
    #[serde(rename = "H")]
    h: Vec<Vec<f64>>,
    #[serde(rename = "L")]
    l: Vec<Vec<f64>>,
    epsilon: f64,
    trace: f64,
    eigenvalues: Vec<f64>,
    report: SolveReport,
}

impl From<LipschitzMatrix> for LipschitzMatrixJson {
    fn from(lm: LipschitzMatrix) -> Self {
        let unpack = |m: &Matrix| (0..m.rows()).map(|i| m.row(i).to_vec()).collect();
        LipschitzMatrixJson {
            m: lm.dim(),
            trace: lm.h.trace(),
            eigenvalues: lm.eigenvalues(),
            h: unpack(&lm.h),
            l: unpack(&lm.l),
            epsilon: lm.epsilon,
            report: lm.report,
        }
    }
}

impl TryFrom<LipschitzMatrixJson> for LipschitzMatrix {
    type Error = String;
    fn try_from(j: LipschitzMatrixJson) -> Result<Self, String> {
        let m = j.m;
        let rows = |v: &Vec<Vec<f64>>| -> Result<Matrix, String> {
            if v.len() != m || v.iter().any(|r| r.len() != m) {
                return Err("matrix shape mismatch".into());
            }
            let refs: Vec<&[f64]> = v.iter().map(|r| r.as_slice()).collect();
            Ok(Matrix::from_row_slices(&refs))
        };
        let h = rows(&j.h)?.symmetrize();
        let l = rows(&j.l)?.symmetrize();
        if j.epsilon < 0.0 {
            return Err("negative epsilon".into());
        }
        Ok(LipschitzMatrix {
            h,
            l,
            epsilon: j.epsilon,
            report: j.report,
        })
    }
}

impl LipschitzMatrix {
    /// Wrap an externally produced PSD matrix H; L is recomputed as the
    /// principal square root.
    pub fn from_h(h: Matrix, epsilon: f64, report: SolveReport) -> Self {
        let h = linalg::clip_psd(&h);
        let l = linalg::sqrtm_psd(&h);
        LipschitzMatrix { h, l, epsilon, report }
    }

    /// Scalar constant embedded as L * I.
    pub fn from_scalar(l_scalar: f64, dim: usize) -> Self {
        let h = Matrix::identity(dim).scale(l_scalar * l_scalar);
        let l = Matrix::identity(dim).scale(l_scalar.abs());
        LipschitzMatrix {
            h,
            l,
            epsilon: 0.0,
            report: SolveReport {
                status: solvers::SolveStatus::Optimal,
                iterations: 0,
                objective: h_trace(dim, l_scalar),
                kkt_residual: 0.0,
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.h.rows()
    }

    pub fn h(&self) -> &Matrix {
        &self.h
    }

    pub fn l(&self) -> &Matrix {
        &self.l
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn report(&self) -> &SolveReport {
        &self.report
    }

    pub fn trace(&self) -> f64 {
        self.h.trace()
    }

    /// Eigenvalues of H, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::sym_eigen(&self.h).values
    }

    /// Rank of H at relative eigenvalue tolerance `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        let ev = self.eigenvalues();
        let top = ev.first().copied().unwrap_or(0.0);
        if top <= 0.0 {
            return 0;
        }
        ev.iter().filter(|&&v| v > tol * top).count()
    }

    /// The metric distance ||L(x - y)||_2, evaluated through H.
    pub fn dist(&self, x: &[f64], y: &[f64]) -> f64 {
        let d = linalg::sub_vec(x, y);
        self.h.quad_form(&d, &d).max(0.0).sqrt()
    }

    /// H (x - y), the unnormalized gradient of 0.5 ||L(x-y)||^2 in x.
    pub fn h_times_diff(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        self.h.matvec(&linalg::sub_vec(x, y))
    }
}

fn h_trace(dim: usize, l_scalar: f64) -> f64 {
    dim as f64 * l_scalar * l_scalar
}

/// Scalar-constraint assembly shared by `estimate`, `feasible_init`, and
/// `check_feasibility`. Applies the duplicate-point rejection rule and the
/// positive-part epsilon clamp, and prunes pair constraints dominated by a
/// collinear one (identical direction at 1e-12, smaller normalized bound).
fn assemble_problem(s: &SampleSet, epsilon: f64) -> Result<SdpProblem, EstimateError> {
    let m = s.dim();
    let mut prob = SdpProblem::new(m);

    struct Entry {
        unit: Vec<f64>,
        c_norm: f64,
        h: Vec<f64>,
        c: f64,
    }
    let mut buckets: HashMap<Vec<i64>, Vec<Entry>> = HashMap::new();
    const QUANTUM: f64 = 1e-10;

    for i in 0..s.len() {
        for j in (i + 1)..s.len() {
            let h = linalg::sub_vec(s.point(i), s.point(j));
            let hn = linalg::norm2(&h);
            let df = (s.value(i) - s.value(j)).abs();
            if hn <= DUPLICATE_TOL {
                if df > DUPLICATE_TOL {
                    return Err(EstimateError::DuplicateWithDifferentValues { i, j });
                }
                continue;
            }
            let clamped = (df - epsilon).max(0.0);
            if clamped == 0.0 {
                continue; // pair explained by noise: no constraint
            }
            let c = clamped * clamped;
            // Sign-normalized unit direction for the collinearity test.
            let mut unit: Vec<f64> = h.iter().map(|v| v / hn).collect();
            if let Some(first) = unit.iter().find(|v| v.abs() > 1e-13) {
                if *first < 0.0 {
                    for v in unit.iter_mut() {
                        *v = -*v;
                    }
                }
            }
            let c_norm = c / (hn * hn);
            let key: Vec<i64> = unit.iter().map(|v| (v / QUANTUM).round() as i64).collect();
            let bucket = buckets.entry(key).or_default();
            let mut dominated = false;
            for e in bucket.iter_mut() {
                let collinear = e
                    .unit
                    .iter()
                    .zip(&unit)
                    .all(|(a, b)| (a - b).abs() <= 1e-12);
                if collinear {
                    if c_norm > e.c_norm {
                        e.c_norm = c_norm;
                        e.h = h.clone();
                        e.c = c;
                    }
                    dominated = true;
                    break;
                }
            }
            if !dominated {
                bucket.push(Entry { unit, c_norm, h, c });
            }
        }
    }

    // Deterministic constraint order regardless of hash iteration.
    let mut entries: Vec<Entry> = buckets.into_values().flatten().collect();
    entries.sort_by(|a, b| {
        a.unit
            .partial_cmp(&b.unit)
            .unwrap()
            .then(a.c_norm.partial_cmp(&b.c_norm).unwrap())
    });
    for e in entries {
        prob.add_scalar(e.h, e.c)?;
    }

    if let Some(grads) = s.gradients() {
        for k in 0..grads.rows() {
            prob.add_matrix(grads.row(k).to_vec())?;
        }
    }
    Ok(prob)
}

fn validate_inputs(s: &SampleSet, epsilon: f64) -> Result<(), EstimateError> {
    if epsilon < 0.0 {
        return Err(EstimateError::NegativeEpsilon);
    }
    if epsilon > 0.0 && s.has_gradients() {
        return Err(EstimateError::EpsilonWithGradients);
    }
    if s.is_empty() {
        return Err(EstimateError::Empty);
    }
    Ok(())
}

/// Estimate the Lipschitz matrix by trace-minimization SDP.
pub fn estimate(s: &SampleSet, epsilon: f64, opts: &SdpOptions) -> Result<LipschitzMatrix, EstimateError> {
    validate_inputs(s, epsilon)?;
    let prob = assemble_problem(s, epsilon)?;
    let h0 = feasible_init(s, epsilon)?;
    let (h, report) = solve_sdp_tracemin(&prob, opts, Some(&h0))?;
    let l = linalg::sqrtm_psd(&h);
    Ok(LipschitzMatrix {
        h,
        l,
        epsilon,
        report,
    })
}

/// Feasible warm start: sweep the pair constraints once, patching each
/// violation with the smallest rank-1 update along its direction, then add
/// lambda I with lambda = max_k ||g_k||^2 to dominate every gradient
/// constraint, and finally a small identity jitter for strict feasibility.
pub fn feasible_init(s: &SampleSet, epsilon: f64) -> Result<Matrix, EstimateError> {
    validate_inputs(s, epsilon)?;
    let m = s.dim();
    let mut h0 = Matrix::zeros(m, m);
    for i in 0..s.len() {
        for j in (i + 1)..s.len() {
            let h = linalg::sub_vec(s.point(i), s.point(j));
            let hn = linalg::norm2(&h);
            let df = (s.value(i) - s.value(j)).abs();
            if hn <= DUPLICATE_TOL {
                if df > DUPLICATE_TOL {
                    return Err(EstimateError::DuplicateWithDifferentValues { i, j });
                }
                continue;
            }
            let clamped = (df - epsilon).max(0.0);
            let target = clamped * clamped;
            let have = h0.quad_form(&h, &h);
            if have < target {
                let alpha = (target - have) / (hn * hn * hn * hn);
                for a in 0..m {
                    for b in 0..m {
                        h0[(a, b)] += alpha * h[a] * h[b];
                    }
                }
            }
        }
    }
    if let Some(grads) = s.gradients() {
        let mut lambda = 0.0f64;
        for k in 0..grads.rows() {
            lambda = lambda.max(linalg::dot(grads.row(k), grads.row(k)));
        }
        for a in 0..m {
            h0[(a, a)] += lambda;
        }
    }
    let jitter = 1e-8 * h0.trace().max(1.0);
    for a in 0..m {
        h0[(a, a)] += jitter;
    }
    Ok(h0)
}

/// SVD-style rank deflation: zero trailing eigenvalues of H below
/// `tol * lambda_max`, rescaling the retained block by the smallest factor
/// >= 1 that restores feasibility; stops when removal would need a factor
/// above 1 + tol. Output stays feasible with rank <= the input rank.
pub fn deflate_rank(lm: &LipschitzMatrix, s: &SampleSet, tol: f64) -> Result<LipschitzMatrix, EstimateError> {
    let prob = assemble_problem(s, lm.epsilon())?;
    let m = lm.dim();
    let eig = linalg::sym_eigen(lm.h());
    let mut lam: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
    let v = &eig.vectors;
    let lam_max = lam.first().copied().unwrap_or(0.0);
    if lam_max <= 0.0 {
        return Ok(lm.clone());
    }
    let mut rank = lam.iter().filter(|&&x| x > 0.0).count();

    // Coefficients of every constraint direction in the eigenbasis are fixed.
    let coeff = |vec: &[f64]| -> Vec<f64> { (0..m).map(|k| {
        let col: Vec<f64> = (0..m).map(|r| v[(r, k)]).collect();
        linalg::dot(&col, vec)
    }).collect() };
    let scalar_coeffs: Vec<(Vec<f64>, f64)> = prob
        .scalar_constraints()
        .iter()
        .map(|(h, c)| (coeff(h), *c))
        .collect();
    let grad_coeffs: Vec<Vec<f64>> = prob.matrix_constraints().iter().map(|g| coeff(g)).collect();

    while rank > 0 {
        let smallest = lam[rank - 1];
        if smallest >= tol * lam_max {
            break;
        }
        // Tentatively remove the smallest retained eigenvalue.
        let kept = rank - 1;
        let mut beta = 1.0f64;
        let mut removable = true;
        for (hc, c) in &scalar_coeffs {
            let q: f64 = (0..kept).map(|k| lam[k] * hc[k] * hc[k]).sum();
            if q <= *c * 1e-14 {
                removable = false;
                break;
            }
            beta = beta.max(c / q);
        }
        if removable {
            for gc in &grad_coeffs {
                let gnorm2 = linalg::dot(gc, gc);
                let out_of_range: f64 = (kept..m).map(|k| gc[k] * gc[k]).sum();
                if out_of_range > 1e-14 * gnorm2 {
                    removable = false;
                    break;
                }
                // beta H' >= g g^T  iff  g^T (beta H')^+ g <= 1.
                let pinv_quad: f64 = (0..kept).map(|k| gc[k] * gc[k] / lam[k]).sum();
                beta = beta.max(pinv_quad);
            }
        }
        if !removable || beta > 1.0 + tol {
            break;
        }
        for l in lam.iter_mut().take(kept) {
            *l *= beta;
        }
        for l in lam.iter_mut().skip(kept) {
            *l = 0.0;
        }
        rank = kept;
    }

    let mut h = Matrix::zeros(m, m);
    for k in 0..rank {
        for a in 0..m {
            for b in 0..m {
                h[(a, b)] += lam[k] * v[(a, k)] * v[(b, k)];
            }
        }
    }
    let h = h.symmetrize();
    let l = linalg::sqrtm_psd(&h);
    Ok(LipschitzMatrix {
        h,
        l,
        epsilon: lm.epsilon(),
        report: lm.report().clone(),
    })
}

/// The smallest scalar Lipschitz constant consistent with the data:
/// max over pairs of |df| / ||dx||_2 and over gradients of ||g||_2.
pub fn scalar_lipschitz(s: &SampleSet) -> Result<f64, EstimateError> {
    if s.is_empty() {
        return Err(EstimateError::Empty);
    }
    let mut best = 0.0f64;
    for i in 0..s.len() {
        for j in (i + 1)..s.len() {
            let h = linalg::sub_vec(s.point(i), s.point(j));
            let hn = linalg::norm2(&h);
            let df = (s.value(i) - s.value(j)).abs();
            if hn <= DUPLICATE_TOL {
                if df > DUPLICATE_TOL {
                    return Err(EstimateError::DuplicateWithDifferentValues { i, j });
                }
                continue;
            }
            best = best.max(df / hn);
        }
    }
    if let Some(grads) = s.gradients() {
        for k in 0..grads.rows() {
            best = best.max(linalg::norm2(grads.row(k)));
        }
    }
    Ok(best)
}

/// Constraint violations of a candidate Lipschitz matrix against data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// Largest (c - h^T H h)/c over pair constraints; <= 0 when feasible.
    pub max_scalar_violation: f64,
    /// Smallest eigenvalue over H and all H - g g^T slacks.
    pub min_matrix_eig: f64,
}

impl FeasibilityReport {
    /// Feasibility within the solver's documented slacks.
    pub fn is_feasible(&self, h_trace: f64) -> bool {
        self.max_scalar_violation <= 1e-7 && self.min_matrix_eig >= -1e-7 * h_trace.max(1e-300)
    }
}

pub fn check_feasibility(lm: &LipschitzMatrix, s: &SampleSet) -> Result<FeasibilityReport, EstimateError> {
    let prob = assemble_problem(s, lm.epsilon())?;
    let (max_scalar_violation, min_matrix_eig) = solvers::sdp_violations(lm.h(), &prob);
    Ok(FeasibilityReport {
        max_scalar_violation,
        min_matrix_eig,
    })
}

/// Central finite differences with the stated default step 1e-5 on the
/// normalized domain; used by the test harnesses that mimic FD-gradient
/// pipelines.
pub fn finite_difference_gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], step: f64) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let orig = xp[i];
        xp[i] = orig + step;
        let fp = f(&xp);
        xp[i] = orig - step;
        let fm = f(&xp);
        xp[i] = orig;
        g[i] = (fp - fm) / (2.0 * step);
    }
    g
}
