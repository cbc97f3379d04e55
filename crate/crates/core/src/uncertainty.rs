//! Lipschitz uncertainty: pointwise intervals, the central approximation, and
//! set-valued bounds over constrained slices.
//!
//! The pointwise interval at x is exact arithmetic over the samples:
//!
//! ```text
//!   [ max_j y_j - ||L(x - x_j)|| - eps/2 ,  min_j y_j + ||L(x - x_j)|| + eps/2 ]
//! ```
//!
//! Set bounds over a slice S take the min/max of those envelopes over S, a
//! nonlinear minimax problem solved by sequential linearization: each outer
//! step linearizes the norm terms about the iterate and solves an LP for the
//! search direction. Every piece is concave, so the linearization is a global
//! upper bound and accepted steps never worsen the incumbent. Spurious local
//! minimizers are handled by multistart from approximate Voronoi vertices of
//! the samples in the L-metric plus boundary candidates.

use serde::{Deserialize, Serialize};

use crate::geometry::{Domain, DomainError, PointSet};
use crate::linalg::{self, Matrix};
use crate::lipschitz::{LipschitzMatrix, SampleSet};
use crate::rng::{OpId, Stream};
use crate::solvers::{solve_lp, LinearProgram, SolverError};

#[derive(Debug, thiserror::Error)]
pub enum UncertaintyError {
    #[error("empty sample set")]
    EmptySamples,
    #[error("direction must be a unit vector (||u|| = {0})")]
    NonUnitDirection(f64),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// A closed interval of possible function values, with the arg-points
/// attaining each endpoint for set-valued problems.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UncertaintyInterval {
    pub lower: f64,
    pub upper: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arg_lower: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arg_upper: Option<Vec<f64>>,
}

impl UncertaintyInterval {
    /// lower > upper signals data inconsistent with the supplied Lipschitz
    /// matrix; it is surfaced, never clipped.
    pub fn is_consistent(&self) -> bool {
        self.lower <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Multistart and iteration controls for the sequential-LP minimax solver.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinimaxConfig {
    pub multistarts: usize,
    pub boundary_candidates: usize,
    pub max_outer_iter: usize,
    pub step_tol: f64,
    pub seed: u64,
}

impl Default for MinimaxConfig {
    fn default() -> Self {
        MinimaxConfig {
            multistarts: 30,
            boundary_candidates: 30,
            max_outer_iter: 100,
            step_tol: 1e-8,
            seed: 0,
        }
    }
}

impl MinimaxConfig {
    pub fn with_seed(seed: u64) -> Self {
        MinimaxConfig {
            seed,
            ..Default::default()
        }
    }

    /// Derived config for a sub-problem (e.g. one alpha of a shadow sweep).
    pub fn derive(&self, idx: u64) -> Self {
        let mut cfg = self.clone();
        cfg.seed = Stream::new(self.seed, OpId::MinimaxSeeds).u64_at(idx);
        cfg
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundSide {
    Lower,
    Upper,
}

/// Pointwise uncertainty interval at x. O(M m^2) exact evaluation.
pub fn interval_at(
    x: &[f64],
    s: &SampleSet,
    lm: &LipschitzMatrix,
) -> Result<UncertaintyInterval, UncertaintyError> {
    if s.len() == 0 {
        return Err(UncertaintyError::EmptySamples);
    }
    let half_eps = lm.epsilon() / 2.0;
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    for j in 0..s.len() {
        let r = lm.dist(x, s.point(j));
        lower = lower.max(s.value(j) - r);
        upper = upper.min(s.value(j) + r);
    }
    Ok(UncertaintyInterval {
        lower: lower - half_eps,
        upper: upper + half_eps,
        arg_lower: None,
        arg_upper: None,
    })
}

/// Midpoint of the pointwise interval: the minimax-optimal interpolant.
pub fn central(x: &[f64], s: &SampleSet, lm: &LipschitzMatrix) -> Result<f64, UncertaintyError> {
    let iv = interval_at(x, s, lm)?;
    Ok((iv.lower + iv.upper) / 2.0)
}

/// Width of the pointwise interval.
pub fn gap(x: &[f64], s: &SampleSet, lm: &LipschitzMatrix) -> Result<f64, UncertaintyError> {
    let iv = interval_at(x, s, lm)?;
    Ok(iv.upper - iv.lower)
}

/// One concave objective piece: `offset - sum_k weight_k ||L(x - anchor_k)||`.
/// All minimax problems here (lower bound, negated upper bound, negated gap)
/// are minima of maxima of such pieces.
#[derive(Clone, Debug)]
pub(crate) struct Piece {
    pub offset: f64,
    /// (anchor row index, positive weight)
    pub terms: Vec<(usize, f64)>,
}

/// Distance below which an iterate counts as sitting on a sample's kink; the
/// norm gradient is undefined there and the subgradient 0 is used instead.
const KINK_TOL: f64 = 1e-10;

pub(crate) struct SingleStartResult {
    pub value: f64,
    pub argmin: Vec<f64>,
    pub iterations: usize,
    /// Accepted objective values, for the monotonicity contract.
    #[allow(dead_code)] // asserted in tests
    pub history: Vec<f64>,
}

/// Sequential-LP descent for min over the slice of max_p piece_p(x) from one
/// start. The full step is attempted first and halved only if the true
/// objective would worsen.
pub(crate) fn minimize_max_single(
    pieces: &[Piece],
    anchors: &Matrix,
    lm: &LipschitzMatrix,
    slice: &Domain,
    start: &[f64],
    max_outer_iter: usize,
    step_tol: f64,
) -> SingleStartResult {
    let m = slice.dim();
    let eval = |x: &[f64], dists: &mut Vec<f64>| -> f64 {
        dists.clear();
        for k in 0..anchors.rows() {
            dists.push(lm.dist(x, anchors.row(k)));
        }
        pieces
            .iter()
            .map(|p| p.offset - p.terms.iter().map(|(k, w)| w * dists[*k]).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    };

    let mut x = start.to_vec();
    let mut dists = Vec::with_capacity(anchors.rows());
    let mut fx = eval(&x, &mut dists);
    let mut history = vec![fx];
    let mut iterations = 0;

    let faces = slice.face_rows();
    for _ in 0..max_outer_iter {
        // Norm gradients at the current iterate: H(x - a_k)/r_k, replaced by
        // the subgradient 0 at kinks (the kink is the interpolation point).
        let mut grads: Vec<Option<Vec<f64>>> = Vec::with_capacity(anchors.rows());
        for k in 0..anchors.rows() {
            if dists[k] <= KINK_TOL {
                grads.push(None);
            } else {
                let g = lm.h_times_diff(&x, anchors.row(k));
                grads.push(Some(g.iter().map(|v| v / dists[k]).collect()));
            }
        }

        // LP over (p, t): minimize t with one row per piece and the slice
        // constraints imposed on x + p.
        let mut obj = vec![0.0; m + 1];
        obj[m] = 1.0;
        let mut lp = LinearProgram::new(obj);
        for piece in pieces {
            // phi(x) + grad^T p <= t
            let mut row = vec![0.0; m + 1];
            let mut phi = piece.offset;
            for (k, w) in &piece.terms {
                phi -= w * dists[*k];
                if let Some(g) = &grads[*k] {
                    for d in 0..m {
                        row[d] -= w * g[d];
                    }
                }
            }
            row[m] = -1.0;
            lp.add_ineq(row, -phi);
        }
        for (a, b) in &faces {
            let mut row = a.clone();
            row.push(0.0);
            lp.add_ineq(row, b - linalg::dot(a, &x));
        }
        if let Some((a, _)) = slice.eq() {
            for r in 0..a.rows() {
                let mut row = a.row(r).to_vec();
                row.push(0.0);
                lp.add_eq(row, 0.0);
            }
        }

        let Ok((sol, report)) = solve_lp(&lp) else {
            break; // subproblem failure: keep the best iterate so far
        };
        if !report.is_usable() || report.kkt_residual > 1e-6 {
            break;
        }
        iterations += 1;
        let p = &sol[..m];
        let pnorm = linalg::norm2(p);
        if pnorm <= step_tol {
            break;
        }

        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha > 1e-12 {
            let trial = linalg::add_scaled(&x, p, alpha);
            let ft = eval(&trial, &mut dists);
            if ft <= fx + 1e-12 {
                x = trial;
                fx = ft;
                history.push(fx);
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            fx = eval(&x, &mut dists); // restore dists for the current x
            break;
        }
        if alpha * pnorm <= step_tol {
            break;
        }
    }

    // LP-step rounding can leave the iterate a few ulps outside the domain;
    // snap it back so downstream strict-membership consumers accept it.
    if !slice.contains(&x, 1e-12) {
        if let Some(snapped) = slice.snap_inside(&x, 1e-6) {
            x = snapped;
        }
    }

    SingleStartResult {
        value: fx,
        argmin: x,
        iterations,
        history,
    }
}

/// Multistart reduction: runs every start and keeps the strictly best value,
/// so ties resolve to the lowest start index.
pub(crate) fn minimize_max_multistart(
    pieces: &[Piece],
    anchors: &Matrix,
    lm: &LipschitzMatrix,
    slice: &Domain,
    starts: &[Vec<f64>],
    max_outer_iter: usize,
    step_tol: f64,
) -> (f64, Vec<f64>, usize) {
    let mut best_value = f64::INFINITY;
    let mut best_arg = slice.chebyshev_center().0;
    let mut total_iters = 0;
    for start in starts {
        let res = minimize_max_single(pieces, anchors, lm, slice, start, max_outer_iter, step_tol);
        total_iters += res.iterations;
        if res.value < best_value {
            best_value = res.value;
            best_arg = res.argmin;
        }
    }
    if starts.is_empty() {
        let center = best_arg.clone();
        let res = minimize_max_single(pieces, anchors, lm, slice, &center, max_outer_iter, step_tol);
        best_value = res.value;
        best_arg = res.argmin;
    }
    (best_value, best_arg, total_iters)
}

/// Project a candidate onto the slice in the L-metric:
/// min ||L(c - c')|| over c' in the slice. A quadratic objective over linear
/// constraints, solved by a small log-barrier Newton method in the equality
/// nullspace coordinates (equalities hold exactly by construction).
pub(crate) fn project_to_slice(c: &[f64], slice: &Domain, lm: &LipschitzMatrix) -> Vec<f64> {
    if slice.contains(c, 1e-9) {
        return c.to_vec();
    }
    let m = slice.dim();
    let (x0, radius) = slice.chebyshev_center();
    let z = slice.null_basis();
    let k = z.cols();
    if k == 0 || radius <= 1e-12 {
        return x0;
    }

    // Q = H + delta I keeps the projection strictly convex even for
    // rank-deficient H.
    let delta = 1e-10 * (1.0 + lm.h().trace());
    let mut q = lm.h().clone();
    for i in 0..m {
        q[(i, i)] += delta;
    }

    // Reduced problem over w with c' = x0 + Z w.
    let faces = slice.face_rows();
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::with_capacity(faces.len());
    for (a, b) in &faces {
        let az = z.transpose().matvec(a);
        rows.push((az, b - linalg::dot(a, &x0)));
    }
    let qz = z.transpose().matmul(&q.matmul(z));
    let diff0 = linalg::sub_vec(&x0, c);
    let lin0 = z.transpose().matvec(&q.matvec(&diff0));

    let mut w = vec![0.0; k];
    let mut mu = 1.0 + q.quad_form(&diff0, &diff0);
    while mu > 1e-10 {
        for _ in 0..25 {
            let qw = qz.matvec(&w);
            let mut g: Vec<f64> = (0..k).map(|i| 2.0 * (qw[i] + lin0[i])).collect();
            let mut hess = qz.scale(2.0);
            let mut feasible = true;
            for (a, b) in &rows {
                let slack = b - linalg::dot(a, &w);
                if slack <= 0.0 {
                    feasible = false;
                    break;
                }
                let f = mu / slack;
                for i in 0..k {
                    g[i] += f * a[i];
                    for j in 0..k {
                        hess[(i, j)] += f / slack * a[i] * a[j];
                    }
                }
            }
            if !feasible {
                return x0;
            }
            for i in 0..k {
                hess[(i, i)] += 1e-13 * (1.0 + hess.trace().abs());
            }
            let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
            let Some(dir) = hess.solve_spd(&rhs) else {
                break;
            };
            // Step short of the inequality boundary.
            let mut step = 1.0f64;
            for (a, b) in &rows {
                let ad = linalg::dot(a, &dir);
                if ad > 1e-13 {
                    step = step.min(0.99 * (b - linalg::dot(a, &w)) / ad);
                }
            }
            if linalg::norm2(&dir) * step < 1e-12 {
                break;
            }
            w = linalg::add_scaled(&w, &dir, step);
        }
        mu *= 0.1;
    }
    linalg::add_scaled(&x0, &z.matvec(&w), 1.0)
}

/// Multistart initializers for the minimax problems: approximate Voronoi
/// vertices of the samples in the L-metric (local maximizers of the
/// min-distance, ascended from random interior seeds of the unsliced domain
/// and projected onto the slice) plus boundary candidates cast on the slice
/// itself. Deduplicated at distance 1e-8.
pub fn initial_candidates(
    slice: &Domain,
    s: &SampleSet,
    lm: &LipschitzMatrix,
    cfg: &MinimaxConfig,
) -> Result<PointSet, UncertaintyError> {
    let m = slice.dim();
    let mut candidates: Vec<Vec<f64>> = Vec::new();

    // (a) Largest-empty-circle ascents over the unsliced domain:
    // maximize min_j ||L(x - x_j)|| == -min max_j (-||L(x - x_j)||).
    if s.len() > 0 && cfg.multistarts > 0 {
        let base = slice.without_equalities();
        let seeds = base.sample_uniform(cfg.multistarts, cfg.seed)?;
        let pieces: Vec<Piece> = (0..s.len())
            .map(|j| Piece {
                offset: 0.0,
                terms: vec![(j, 1.0)],
            })
            .collect();
        for i in 0..seeds.len() {
            let res = minimize_max_single(
                &pieces,
                s.points(),
                lm,
                &base,
                seeds.point(i),
                cfg.max_outer_iter,
                cfg.step_tol,
            );
            candidates.push(project_to_slice(&res.argmin, slice, lm));
        }
    }

    // (b) Boundary candidates cast on the slice itself (already feasible, so
    // the projection is the identity on them).
    let boundary = slice.sample_boundary(cfg.boundary_candidates, cfg.seed.wrapping_add(1));
    for p in boundary.iter() {
        candidates.push(p.to_vec());
    }
    // The slice's Chebyshev center anchors the set even when both families
    // are empty.
    candidates.push(slice.chebyshev_center().0);

    let mut out = PointSet::new(m);
    for c in candidates {
        let dup = out.iter().any(|p| linalg::norm2(&linalg::sub_vec(p, &c)) <= 1e-8);
        if !dup {
            out.push(&c);
        }
    }
    Ok(out)
}

/// Outcome of a set-valued bound computation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinimaxOutcome {
    pub value: f64,
    pub argpoint: Vec<f64>,
    /// Total accepted outer iterations across all starts.
    pub iterations: usize,
    pub starts: usize,
}

/// One side of the set bound over a slice (Lower: min over the slice of the
/// pointwise lower envelope; Upper by negation symmetry). The epsilon shift
/// of the interval commutes with the min/max and is applied to the value.
pub fn minimax_bound(
    side: BoundSide,
    slice: &Domain,
    s: &SampleSet,
    lm: &LipschitzMatrix,
    cfg: &MinimaxConfig,
) -> Result<MinimaxOutcome, UncertaintyError> {
    if s.len() == 0 {
        return Err(UncertaintyError::EmptySamples);
    }
    let starts = initial_candidates(slice, s, lm, cfg)?;
    let start_vecs: Vec<Vec<f64>> = starts.iter().map(|p| p.to_vec()).collect();

    let pieces: Vec<Piece> = match side {
        BoundSide::Lower => (0..s.len())
            .map(|j| Piece {
                offset: s.value(j),
                terms: vec![(j, 1.0)],
            })
            .collect(),
        BoundSide::Upper => (0..s.len())
            .map(|j| Piece {
                offset: -s.value(j),
                terms: vec![(j, 1.0)],
            })
            .collect(),
    };
    let (raw, arg, iterations) = minimize_max_multistart(
        &pieces,
        s.points(),
        lm,
        slice,
        &start_vecs,
        cfg.max_outer_iter,
        cfg.step_tol,
    );
    let half_eps = lm.epsilon() / 2.0;
    let value = match side {
        BoundSide::Lower => raw - half_eps,
        BoundSide::Upper => -raw + half_eps,
    };
    Ok(MinimaxOutcome {
        value,
        argpoint: arg,
        iterations,
        starts: start_vecs.len(),
    })
}

/// One row of a shadow sweep: the slice u^T x = alpha may be empty.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShadowEntry {
    pub alpha: f64,
    pub interval: Option<UncertaintyInterval>,
}

/// Set bounds over the family of slices S_alpha = { x in D : u^T x = alpha }.
pub fn shadow_bounds(
    u: &[f64],
    alphas: &[f64],
    d: &Domain,
    s: &SampleSet,
    lm: &LipschitzMatrix,
    cfg: &MinimaxConfig,
) -> Result<Vec<ShadowEntry>, UncertaintyError> {
    let un = linalg::norm2(u);
    if (un - 1.0).abs() > 1e-9 {
        return Err(UncertaintyError::NonUnitDirection(un));
    }
    if s.len() == 0 {
        return Err(UncertaintyError::EmptySamples);
    }
    let (lo, hi) = d.projection_range(u)?;
    let mut out = Vec::with_capacity(alphas.len());
    for (idx, &alpha) in alphas.iter().enumerate() {
        if alpha < lo - 1e-9 || alpha > hi + 1e-9 {
            out.push(ShadowEntry { alpha, interval: None });
            continue;
        }
        let slice = match d.with_equality(u, alpha) {
            Ok(s) => s,
            Err(_) => {
                out.push(ShadowEntry { alpha, interval: None });
                continue;
            }
        };
        let sub_cfg = cfg.derive(idx as u64);
        let lower = minimax_bound(BoundSide::Lower, &slice, s, lm, &sub_cfg)?;
        let upper = minimax_bound(BoundSide::Upper, &slice, s, lm, &sub_cfg)?;
        out.push(ShadowEntry {
            alpha,
            interval: Some(UncertaintyInterval {
                lower: lower.value,
                upper: upper.value,
                arg_lower: Some(lower.argpoint),
                arg_upper: Some(upper.argpoint),
            }),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{OpId, Stream};
    use crate::solvers::SdpOptions;

    fn identity_metric(dim: usize) -> LipschitzMatrix {
        LipschitzMatrix::from_scalar(1.0, dim)
    }

    fn single_sample_origin() -> SampleSet {
        let points = Matrix::from_rows(1, 2, vec![0.0, 0.0]);
        SampleSet::from_samples(points, vec![0.0]).unwrap()
    }

    #[test]
    fn interval_unit_distance() {
        let s = single_sample_origin();
        let lm = identity_metric(2);
        let iv = interval_at(&[0.6, 0.8], &s, &lm).unwrap();
        assert!((iv.lower + 1.0).abs() < 1e-12);
        assert!((iv.upper - 1.0).abs() < 1e-12);
        assert!((central(&[0.6, 0.8], &s, &lm).unwrap()).abs() < 1e-12);
        assert!((gap(&[0.6, 0.8], &s, &lm).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn interval_width_zero_at_sample() {
        let s = single_sample_origin();
        let lm = identity_metric(2);
        let iv = interval_at(&[0.0, 0.0], &s, &lm).unwrap();
        assert!(iv.width().abs() < 1e-12);
        assert!((central(&[0.0, 0.0], &s, &lm).unwrap() - 0.0).abs() < 1e-12);
    }

    #[test]
    fn inconsistent_data_is_surfaced_not_clipped() {
        // Two samples violating the metric: the interval inverts.
        let points = Matrix::from_rows(2, 1, vec![0.0, 1.0]);
        let s = SampleSet::from_samples(points, vec![0.0, 10.0]).unwrap();
        let lm = identity_metric(1);
        let iv = interval_at(&[0.5], &s, &lm).unwrap();
        assert!(!iv.is_consistent());
        assert!(iv.lower > iv.upper);
    }

    #[test]
    fn central_reproduces_linear_ridge_exactly() {
        // f(x) = a^T x with a = (1, 0), L = sqrt(a a^T); samples at corners.
        let corners = Matrix::from_rows(4, 2, vec![-1.0, -1.0, 1.0, -1.0, -1.0, 1.0, 1.0, 1.0]);
        let values: Vec<f64> = (0..4).map(|i| corners.row(i)[0]).collect();
        let s = SampleSet::from_samples(corners, values).unwrap();
        let h = Matrix::from_rows(2, 2, vec![1.0, 0.0, 0.0, 0.0]);
        let lm = LipschitzMatrix::from_h(
            h,
            0.0,
            crate::solvers::SolveReport {
                status: crate::solvers::SolveStatus::Optimal,
                iterations: 0,
                objective: 1.0,
                kkt_residual: 0.0,
            },
        );
        for x in [[0.3, 0.4], [-0.5, 0.9], [0.0, 0.0]] {
            let c = central(&x, &s, &lm).unwrap();
            assert!((c - x[0]).abs() < 1e-10, "central {c} vs {x:?}");
            let g = gap(&x, &s, &lm).unwrap();
            assert!(g.abs() < 1e-10, "gap should collapse along span(a)");
        }
    }

    #[test]
    fn gap_matrix_dominated_by_scalar_when_nested() {
        // When L_mat^T L_mat <= L_scalar^2 I the matrix gap is pointwise smaller.
        let points = Matrix::from_rows(3, 2, vec![0.0, 0.0, 0.7, -0.2, -0.5, 0.6]);
        let s = SampleSet::from_samples(points, vec![0.1, -0.3, 0.4]).unwrap();
        let h = Matrix::from_rows(2, 2, vec![2.0, 0.5, 0.5, 1.0]);
        let lm_mat = LipschitzMatrix::from_h(
            h.clone(),
            0.0,
            crate::solvers::SolveReport {
                status: crate::solvers::SolveStatus::Optimal,
                iterations: 0,
                objective: 3.0,
                kkt_residual: 0.0,
            },
        );
        let lmax = linalg::sym_eigen(&h).values[0].sqrt();
        let lm_scalar = LipschitzMatrix::from_scalar(lmax + 0.1, 2);
        let stream = Stream::new(2, OpId::TestCloud);
        for k in 0..50 {
            let x = [stream.f64_at(2 * k) * 2.0 - 1.0, stream.f64_at(2 * k + 1) * 2.0 - 1.0];
            let gm = gap(&x, &s, &lm_mat).unwrap();
            let gs = gap(&x, &s, &lm_scalar).unwrap();
            assert!(gm <= gs + 1e-12, "matrix gap {gm} > scalar gap {gs}");
        }
    }

    #[test]
    fn minimax_single_sample_reaches_corner() {
        let s = single_sample_origin();
        let lm = identity_metric(2);
        let d = Domain::normalized(2);
        let cfg = MinimaxConfig::with_seed(3);
        let out = minimax_bound(BoundSide::Lower, &d, &s, &lm, &cfg).unwrap();
        let expect = -(2.0f64).sqrt();
        assert!((out.value - expect).abs() < 1e-6, "value {}", out.value);
        assert!(out.argpoint.iter().all(|v| (v.abs() - 1.0).abs() < 1e-6));
    }

    #[test]
    fn minimax_on_pinned_slice_equals_sample_value() {
        let points = Matrix::from_rows(2, 2, vec![0.2, -0.1, -0.6, 0.4]);
        let s = SampleSet::from_samples(points, vec![1.0, 0.5]).unwrap();
        let lm = identity_metric(2);
        let mut a = Matrix::zeros(0, 2);
        a.push_row(&[1.0, 0.0]);
        a.push_row(&[0.0, 1.0]);
        let slice = Domain::new(
            vec![-1.0, -1.0],
            vec![1.0, 1.0],
            None,
            Some((a, vec![0.2, -0.1])),
        )
        .unwrap();
        let cfg = MinimaxConfig::with_seed(0);
        let lo = minimax_bound(BoundSide::Lower, &slice, &s, &lm, &cfg).unwrap();
        let hi = minimax_bound(BoundSide::Upper, &slice, &s, &lm, &cfg).unwrap();
        assert!((lo.value - 1.0).abs() < 1e-9, "lower {}", lo.value);
        assert!((hi.value - 1.0).abs() < 1e-9, "upper {}", hi.value);
    }

    #[test]
    fn candidates_contain_voronoi_midpoint() {
        let points = Matrix::from_rows(2, 1, vec![-1.0, 1.0]);
        let s = SampleSet::from_samples(points, vec![0.0, 0.0]).unwrap();
        let lm = identity_metric(1);
        let d = Domain::normalized(1);
        let cfg = MinimaxConfig::with_seed(7);
        let cands = initial_candidates(&d, &s, &lm, &cfg).unwrap();
        let has_mid = cands.iter().any(|p| p[0].abs() < 1e-6);
        assert!(has_mid, "candidates missing the midpoint");
    }

    #[test]
    fn candidates_satisfy_equality_slice() {
        let points = Matrix::from_rows(3, 2, vec![0.0, 0.0, 0.5, 0.5, -0.5, 0.25]);
        let s = SampleSet::from_samples(points, vec![0.0, 1.0, -1.0]).unwrap();
        let lm = identity_metric(2);
        let d = Domain::normalized(2);
        let r = 1.0 / 2.0f64.sqrt();
        let slice = d.with_equality(&[r, r], 0.3).unwrap();
        let cfg = MinimaxConfig::with_seed(5);
        let cands = initial_candidates(&slice, &s, &lm, &cfg).unwrap();
        assert!(!cands.is_empty());
        for p in cands.iter() {
            let proj = r * (p[0] + p[1]);
            assert!((proj - 0.3).abs() < 1e-9, "candidate off slice: {p:?}");
        }
    }

    #[test]
    fn projection_is_identity_on_feasible_candidates() {
        let d = Domain::normalized(2);
        let lm = identity_metric(2);
        let p = project_to_slice(&[0.3, -0.4], &d, &lm);
        assert!((p[0] - 0.3).abs() < 1e-12 && (p[1] + 0.4).abs() < 1e-12);
    }

    #[test]
    fn descent_history_is_monotone() {
        let points = Matrix::from_rows(4, 2, vec![0.0, 0.0, 0.8, 0.1, -0.3, -0.9, 0.2, 0.7]);
        let s = SampleSet::from_samples(points, vec![0.4, -0.2, 0.9, 0.0]).unwrap();
        let lm = identity_metric(2);
        let d = Domain::normalized(2);
        let pieces: Vec<Piece> = (0..s.len())
            .map(|j| Piece {
                offset: s.value(j),
                terms: vec![(j, 1.0)],
            })
            .collect();
        let res = minimize_max_single(&pieces, s.points(), &lm, &d, &[0.1, 0.1], 100, 1e-8);
        for w in res.history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "objective rose: {:?}", res.history);
        }
    }

    #[test]
    fn sine_bounds_match_grid_oracle() {
        // 10 samples of sin(3 pi x) on [-1, 1] with the estimated 1-D
        // Lipschitz matrix; set bounds vs a dense-grid brute force.
        let m = 10;
        let mut points = Matrix::zeros(0, 1);
        let mut values = Vec::new();
        for j in 0..m {
            let x = -1.0 + 2.0 * j as f64 / (m - 1) as f64;
            points.push_row(&[x]);
            values.push((3.0 * std::f64::consts::PI * x).sin());
        }
        let s = SampleSet::from_samples(points, values).unwrap();
        let lm = crate::lipschitz::estimate(&s, 0.0, &SdpOptions::default()).unwrap();
        let d = Domain::normalized(1);
        let cfg = MinimaxConfig::with_seed(11);

        let lo = minimax_bound(BoundSide::Lower, &d, &s, &lm, &cfg).unwrap();
        let hi = minimax_bound(BoundSide::Upper, &d, &s, &lm, &cfg).unwrap();

        let grid_n = 100_000;
        let mut grid_lo = f64::INFINITY;
        let mut grid_hi = f64::NEG_INFINITY;
        for k in 0..=grid_n {
            let x = [-1.0 + 2.0 * k as f64 / grid_n as f64];
            let iv = interval_at(&x, &s, &lm).unwrap();
            grid_lo = grid_lo.min(iv.lower);
            grid_hi = grid_hi.max(iv.upper);
        }
        assert!((lo.value - grid_lo).abs() < 1e-3, "lower {} vs grid {grid_lo}", lo.value);
        assert!((hi.value - grid_hi).abs() < 1e-3, "upper {} vs grid {grid_hi}", hi.value);
    }

    #[test]
    fn shadow_entries_mark_infeasible_alphas() {
        let points = Matrix::from_rows(2, 2, vec![0.0, 0.0, 0.5, 0.5]);
        let s = SampleSet::from_samples(points, vec![0.0, 1.0]).unwrap();
        let lm = identity_metric(2);
        let d = Domain::normalized(2);
        let u = [1.0, 0.0];
        let alphas = vec![-2.0, 0.0, 2.0];
        let cfg = MinimaxConfig::with_seed(1);
        let rows = shadow_bounds(&u, &alphas, &d, &s, &lm, &cfg).unwrap();
        assert!(rows[0].interval.is_none());
        assert!(rows[1].interval.is_some());
        assert!(rows[2].interval.is_none());
    }

    #[test]
    fn shadow_rejects_non_unit_direction() {
        let s = single_sample_origin();
        let lm = identity_metric(2);
        let d = Domain::normalized(2);
        let cfg = MinimaxConfig::default();
        let r = shadow_bounds(&[2.0, 0.0], &[0.0], &d, &s, &lm, &cfg);
        assert!(matches!(r, Err(UncertaintyError::NonUnitDirection(_))));
    }

    #[test]
    fn set_bounds_enclose_pointwise_intervals() {
        let points = Matrix::from_rows(3, 2, vec![0.0, 0.0, 0.6, -0.4, -0.7, 0.5]);
        let s = SampleSet::from_samples(points, vec![0.2, -0.1, 0.5]).unwrap();
        let lm = identity_metric(2);
        let d = Domain::normalized(2);
        let slice = d.with_equality(&[1.0, 0.0], 0.25).unwrap();
        let cfg = MinimaxConfig::with_seed(9);
        let lo = minimax_bound(BoundSide::Lower, &slice, &s, &lm, &cfg).unwrap();
        let hi = minimax_bound(BoundSide::Upper, &slice, &s, &lm, &cfg).unwrap();
        let stream = Stream::new(4, OpId::TestCloud);
        for k in 0..100 {
            let x = [0.25, stream.f64_at(k) * 2.0 - 1.0];
            let iv = interval_at(&x, &s, &lm).unwrap();
            assert!(iv.lower >= lo.value - 1e-6, "pointwise below set lower");
            assert!(iv.upper <= hi.value + 1e-6, "pointwise above set upper");
        }
    }

    #[test]
    fn multistart_determinism() {
        let points = Matrix::from_rows(3, 2, vec![0.0, 0.0, 0.5, 0.2, -0.3, 0.8]);
        let s = SampleSet::from_samples(points, vec![0.0, 0.7, -0.4]).unwrap();
        let lm = identity_metric(2);
        let d = Domain::normalized(2);
        let cfg = MinimaxConfig::with_seed(41);
        let a = minimax_bound(BoundSide::Lower, &d, &s, &lm, &cfg).unwrap();
        let b = minimax_bound(BoundSide::Lower, &d, &s, &lm, &cfg).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.argpoint, b.argpoint);
    }

    #[test]
    fn central_worst_case_optimality_restated() {
        // central sits at distance gap/2 from both endpoints, and no value
        // strictly inside the interval does better against its farthest end.
        let points = Matrix::from_rows(2, 2, vec![0.0, 0.0, 1.0, 0.0]);
        let s = SampleSet::from_samples(points, vec![0.0, 0.5]).unwrap();
        let lm = identity_metric(2);
        let x = [0.3, 0.6];
        let iv = interval_at(&x, &s, &lm).unwrap();
        let c = central(&x, &s, &lm).unwrap();
        let g = gap(&x, &s, &lm).unwrap();
        assert!(((c - iv.lower) - g / 2.0).abs() < 1e-12);
        assert!(((iv.upper - c) - g / 2.0).abs() < 1e-12);
        for t in [0.1, 0.33, 0.7, 0.9] {
            let v = iv.lower + t * g;
            let worst = (v - iv.lower).max(iv.upper - v);
            assert!(worst >= g / 2.0 - 1e-12);
        }
    }

    #[test]
    fn central_is_lipschitz_with_the_same_matrix() {
        let points = Matrix::from_rows(4, 2, vec![0.0, 0.0, 0.9, 0.1, -0.5, -0.8, 0.3, 0.6]);
        let values = vec![0.1, 0.8, -0.6, 0.3];
        let s = SampleSet::from_samples(points, values).unwrap();
        let lm = crate::lipschitz::estimate(&s, 0.0, &SdpOptions::default()).unwrap();
        let stream = Stream::new(77, OpId::TestCloud);
        for k in 0..10_000u64 {
            let x1 = [stream.f64_at(4 * k) * 2.0 - 1.0, stream.f64_at(4 * k + 1) * 2.0 - 1.0];
            let x2 = [stream.f64_at(4 * k + 2) * 2.0 - 1.0, stream.f64_at(4 * k + 3) * 2.0 - 1.0];
            let c1 = central(&x1, &s, &lm).unwrap();
            let c2 = central(&x2, &s, &lm).unwrap();
            assert!(
                (c1 - c2).abs() <= lm.dist(&x1, &x2) + 1e-9,
                "central not Lipschitz at {x1:?}, {x2:?}"
            );
        }
    }
}
