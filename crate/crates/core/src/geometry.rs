//! Polytopal domains and geometric primitives.
//!
//! A [`Domain`] is a nonempty box intersected with optional linear inequality
//! and equality constraints. Everything downstream (estimation, minimax
//! bounds, designs, covering estimates) works over these sets, so membership,
//! corner enumeration, Chebyshev centers, boundary/interior sampling, and
//! convex-hull projection all live here.

use serde::{Deserialize, Serialize};

use crate::linalg::{self, Matrix};
use crate::rng::{Cursor, OpId, Stream};
use crate::solvers::{solve_lp, LinearProgram, SolveStatus, SolverError};

pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum DomainError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("box bounds must satisfy lower[i] < upper[i] (index {0})")]
    BadBounds(usize),
    #[error("domain is empty (feasibility LP residual {0:.3e})")]
    Empty(f64),
    #[error("corner enumeration requires no equality constraints")]
    CornersWithEquality,
    #[error("corner enumeration limited to dimension <= 20 (got {0})")]
    TooManyCorners(usize),
    #[error("degenerate domain: rejection acceptance rate below 1e-6")]
    DegenerateSampling,
    #[error("solver failure: {0}")]
    Solver(#[from] SolverError),
}

/// Rows of points in R^m.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    points: Matrix,
}

impl PointSet {
    pub fn new(dim: usize) -> Self {
        PointSet {
            points: Matrix::zeros(0, dim),
        }
    }

    pub fn from_matrix(points: Matrix) -> Self {
        PointSet { points }
    }

    pub fn from_rows(rows: &[Vec<f64>], dim: usize) -> Self {
        let mut m = Matrix::zeros(0, dim);
        for r in rows {
            m.push_row(r);
        }
        PointSet { points: m }
    }

    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        self.points.row(i)
    }

    pub fn push(&mut self, p: &[f64]) {
        self.points.push_row(p);
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.len()).map(move |i| self.point(i))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.points
    }

    /// Check every row against a domain (tolerance 1e-9).
    pub fn all_contained_in(&self, d: &Domain) -> bool {
        self.iter().all(|p| d.contains(p, MEMBERSHIP_TOL))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct LinearSystemJson {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct DomainJson {
    dim: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ineq: Option<LinearSystemJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eq: Option<LinearSystemJson>,
}

/// A bounded feasible region: box bounds plus optional A x <= b and
/// A_eq x = b_eq rows. Construction verifies nonemptiness with a feasibility
/// LP; the Chebyshev center and the equality nullspace are cached.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "DomainJson", into = "DomainJson")]
pub struct Domain {
    dim: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    ineq: Option<(Matrix, Vec<f64>)>,
    eq: Option<(Matrix, Vec<f64>)>,
    cheb_center: Vec<f64>,
    cheb_radius: f64,
    /// Orthonormal basis of the equality nullspace (identity when no
    /// equality constraints); columns span the directions the domain allows.
    null_basis: Matrix,
}

impl TryFrom<DomainJson> for Domain {
    type Error = DomainError;
    fn try_from(j: DomainJson) -> Result<Self, Self::Error> {
        let ineq = match j.ineq {
            Some(sys) => {
                let rows: Vec<&[f64]> = sys.a.iter().map(|r| r.as_slice()).collect();
                Some((Matrix::from_row_slices(&rows), sys.b))
            }
            None => None,
        };
        let eq = match j.eq {
            Some(sys) => {
                let rows: Vec<&[f64]> = sys.a.iter().map(|r| r.as_slice()).collect();
                Some((Matrix::from_row_slices(&rows), sys.b))
            }
            None => None,
        };
        Domain::new(j.lower, j.upper, ineq, eq)
    }
}

impl From<Domain> for DomainJson {
    fn from(d: Domain) -> DomainJson {
        let pack = |sys: &(Matrix, Vec<f64>)| LinearSystemJson {
            a: (0..sys.0.rows()).map(|i| sys.0.row(i).to_vec()).collect(),
            b: sys.1.clone(),
        };
        DomainJson {
            dim: d.dim,
            lower: d.lower.clone(),
            upper: d.upper.clone(),
            ineq: d.ineq.as_ref().map(pack),
            eq: d.eq.as_ref().map(pack),
        }
    }
}

impl Domain {
    /// Pure box [lower, upper].
    pub fn hypercube(lower: Vec<f64>, upper: Vec<f64>) -> Result<Domain, DomainError> {
        Domain::new(lower, upper, None, None)
    }

    /// The normalized box [-1, 1]^m.
    pub fn normalized(dim: usize) -> Domain {
        Domain::hypercube(vec![-1.0; dim], vec![1.0; dim]).expect("unit box is nonempty")
    }

    pub fn new(
        lower: Vec<f64>,
        upper: Vec<f64>,
        ineq: Option<(Matrix, Vec<f64>)>,
        eq: Option<(Matrix, Vec<f64>)>,
    ) -> Result<Domain, DomainError> {
        let dim = lower.len();
        if upper.len() != dim {
            return Err(DomainError::DimensionMismatch { expected: dim, got: upper.len() });
        }
        for i in 0..dim {
            if !(lower[i] < upper[i]) {
                return Err(DomainError::BadBounds(i));
            }
        }
        if let Some((a, b)) = &ineq {
            if a.cols() != dim || a.rows() != b.len() {
                return Err(DomainError::DimensionMismatch { expected: dim, got: a.cols() });
            }
        }
        if let Some((a, b)) = &eq {
            if a.cols() != dim || a.rows() != b.len() {
                return Err(DomainError::DimensionMismatch { expected: dim, got: a.cols() });
            }
        }

        let null_basis = match &eq {
            Some((a, _)) => linalg::nullspace(a, 1e-12),
            None => Matrix::identity(dim),
        };

        let mut d = Domain {
            dim,
            lower,
            upper,
            ineq,
            eq,
            cheb_center: vec![0.0; dim],
            cheb_radius: 0.0,
            null_basis,
        };
        let (center, radius) = d.solve_chebyshev()?;
        d.cheb_center = center;
        d.cheb_radius = radius;
        Ok(d)
    }

    /// Stack an extra equality row u^T x = alpha onto this domain (the slice
    /// S_alpha). Fails if the slice is empty.
    pub fn with_equality(&self, u: &[f64], alpha: f64) -> Result<Domain, DomainError> {
        assert_eq!(u.len(), self.dim);
        let (mut a, mut b) = match &self.eq {
            Some((a, b)) => (a.clone(), b.clone()),
            None => (Matrix::zeros(0, self.dim), Vec::new()),
        };
        a.push_row(u);
        b.push(alpha);
        Domain::new(self.lower.clone(), self.upper.clone(), self.ineq.clone(), Some((a, b)))
    }

    /// The same box and inequality constraints with all equalities dropped.
    pub fn without_equalities(&self) -> Domain {
        Domain::new(self.lower.clone(), self.upper.clone(), self.ineq.clone(), None)
            .expect("relaxation of a nonempty domain is nonempty")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn ineq(&self) -> Option<(&Matrix, &[f64])> {
        self.ineq.as_ref().map(|(a, b)| (a, b.as_slice()))
    }

    pub fn eq(&self) -> Option<(&Matrix, &[f64])> {
        self.eq.as_ref().map(|(a, b)| (a, b.as_slice()))
    }

    pub fn is_pure_box(&self) -> bool {
        self.ineq.is_none() && self.eq.is_none()
    }

    /// Orthonormal basis of the directions compatible with the equality
    /// constraints (the whole space when there are none).
    pub fn null_basis(&self) -> &Matrix {
        &self.null_basis
    }

    /// All box-face and inequality rows as a^T x <= b.
    pub fn face_rows(&self) -> Vec<(Vec<f64>, f64)> {
        let mut rows = Vec::with_capacity(2 * self.dim + self.ineq.as_ref().map_or(0, |(a, _)| a.rows()));
        for i in 0..self.dim {
            let mut e = vec![0.0; self.dim];
            e[i] = 1.0;
            rows.push((e.clone(), self.upper[i]));
            e[i] = -1.0;
            rows.push((e, -self.lower[i]));
        }
        if let Some((a, b)) = &self.ineq {
            for r in 0..a.rows() {
                rows.push((a.row(r).to_vec(), b[r]));
            }
        }
        rows
    }

    /// Membership within an absolute tolerance.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim {
            return false;
        }
        for i in 0..self.dim {
            if x[i] < self.lower[i] - tol || x[i] > self.upper[i] + tol {
                return false;
            }
        }
        if let Some((a, b)) = &self.ineq {
            for r in 0..a.rows() {
                if linalg::dot(a.row(r), x) > b[r] + tol {
                    return false;
                }
            }
        }
        if let Some((a, b)) = &self.eq {
            for r in 0..a.rows() {
                if (linalg::dot(a.row(r), x) - b[r]).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// All box corners satisfying the inequality constraints. Exactly 2^m rows
    /// for a pure box. Guarded to m <= 20 and requires no equality rows.
    pub fn corners(&self) -> Result<PointSet, DomainError> {
        if self.eq.is_some() {
            return Err(DomainError::CornersWithEquality);
        }
        if self.dim > 20 {
            return Err(DomainError::TooManyCorners(self.dim));
        }
        let mut out = PointSet::new(self.dim);
        let total = 1usize << self.dim;
        let mut corner = vec![0.0; self.dim];
        for mask in 0..total {
            for i in 0..self.dim {
                corner[i] = if mask & (1 << i) != 0 { self.upper[i] } else { self.lower[i] };
            }
            let ok = match &self.ineq {
                Some((a, b)) => (0..a.rows()).all(|r| linalg::dot(a.row(r), &corner) <= b[r] + MEMBERSHIP_TOL),
                None => true,
            };
            if ok {
                out.push(&corner);
            }
        }
        Ok(out)
    }

    fn solve_chebyshev(&self) -> Result<(Vec<f64>, f64), DomainError> {
        let m = self.dim;
        let k = self.null_basis.cols();
        if k == 0 {
            // Fully pinned by equality constraints: the point is the least
            // squares solution of A_eq x = b_eq.
            let (a, b) = self.eq.as_ref().expect("k = 0 requires equality rows");
            let at = a.transpose();
            let ata = at.matmul(a);
            let mut reg = ata.clone();
            for i in 0..m {
                reg[(i, i)] += 1e-12 * (1.0 + ata.trace());
            }
            let rhs = at.matvec(b);
            let x = reg.solve_spd(&rhs).ok_or(DomainError::Empty(f64::INFINITY))?;
            if !self.contains(&x, 1e-7) {
                return Err(DomainError::Empty(1.0));
            }
            return Ok((x, 0.0));
        }

        // Variables (xi, r) with x = box_center + xi: maximize r subject to
        //   a^T xi + ||P a|| r <= b - a^T box_center   for every face row,
        //   A_eq xi = b_eq - A_eq box_center,
        // where P projects onto the equality nullspace (ball radius is
        // measured inside the affine hull of the slice). Centering makes the
        // LP data, and hence the returned center, translation-equivariant.
        let box_center: Vec<f64> = (0..m).map(|i| 0.5 * (self.lower[i] + self.upper[i])).collect();
        let mut obj = vec![0.0; m + 1];
        obj[m] = -1.0; // maximize r
        let mut lp = LinearProgram::new(obj);
        let z = &self.null_basis;
        for (row, rhs) in self.face_rows() {
            // ||P a|| = ||Z^T a|| since Z has orthonormal columns.
            let zta = z.transpose().matvec(&row);
            let pa = linalg::norm2(&zta);
            let shifted = rhs - linalg::dot(&row, &box_center);
            let mut lrow = row.clone();
            lrow.push(pa);
            lp.add_ineq(lrow, shifted);
        }
        if let Some((a, b)) = &self.eq {
            for r in 0..a.rows() {
                let shifted = b[r] - linalg::dot(a.row(r), &box_center);
                let mut lrow = a.row(r).to_vec();
                lrow.push(0.0);
                lp.add_eq(lrow, shifted);
            }
        }
        let diam_bound: f64 = linalg::norm2(&linalg::sub_vec(&self.upper, &self.lower));
        let mut bounds = vec![(None, None); m + 1];
        bounds[m] = (Some(0.0), Some(diam_bound));
        lp.bounds = bounds;

        match solve_lp(&lp) {
            Ok((x, report)) if report.status == SolveStatus::Optimal => {
                let center: Vec<f64> = (0..m).map(|i| box_center[i] + x[i]).collect();
                Ok((center, x[m].max(0.0)))
            }
            Ok((_, report)) => Err(DomainError::Empty(report.kkt_residual)),
            Err(SolverError::Infeasible { residual }) => Err(DomainError::Empty(residual)),
            Err(e) => Err(e.into()),
        }
    }

    /// Center and radius of the largest ball inscribed in the domain,
    /// restricted to the affine hull of the equality constraints.
    pub fn chebyshev_center(&self) -> (Vec<f64>, f64) {
        (self.cheb_center.clone(), self.cheb_radius)
    }

    /// Casts `count` rays from the Chebyshev center along uniform random
    /// directions (projected into the equality nullspace) and returns the
    /// farthest feasible point on each ray. Deterministic per seed.
    pub fn sample_boundary(&self, count: usize, seed: u64) -> PointSet {
        let stream = Stream::new(seed, OpId::BoundarySample);
        let faces = self.face_rows();
        let center = &self.cheb_center;
        let z = &self.null_basis;
        let k = z.cols();
        let mut out = PointSet::new(self.dim);
        for i in 0..count {
            if k == 0 {
                out.push(center);
                continue;
            }
            let mut cur = Cursor::new(stream.substream(i as u64));
            // Direction inside the slice's affine hull.
            let dir = loop {
                let w = cur.next_direction(k);
                let d = z.matvec(&w);
                let n = linalg::norm2(&d);
                if n > 1e-12 {
                    break d.iter().map(|v| v / n).collect::<Vec<f64>>();
                }
            };
            // Largest step along the ray against all active linear constraints.
            let mut t = f64::INFINITY;
            for (a, b) in &faces {
                let ad = linalg::dot(a, &dir);
                if ad > 1e-13 {
                    t = t.min((b - linalg::dot(a, center)) / ad);
                }
            }
            if !t.is_finite() {
                t = 0.0; // box domains are bounded; defensively clamp
            }
            out.push(&linalg::add_scaled(center, &dir, t.max(0.0)));
        }
        out
    }

    /// Uniform interior samples: independent per-coordinate draws for a pure
    /// box, rejection from the box with inequality rows, hit-and-run along the
    /// affine slice with equality rows (burn-in 100 m, thinning 10).
    /// Deterministic per seed.
    pub fn sample_uniform(&self, count: usize, seed: u64) -> Result<PointSet, DomainError> {
        let stream = Stream::new(seed, OpId::UniformSample);
        let mut out = PointSet::new(self.dim);

        if self.eq.is_none() {
            let mut accepted_total = 0u64;
            let mut trials_total = 0u64;
            for i in 0..count {
                let mut cur = Cursor::new(stream.substream(i as u64));
                loop {
                    trials_total += 1;
                    let x: Vec<f64> = (0..self.dim)
                        .map(|j| self.lower[j] + (self.upper[j] - self.lower[j]) * cur.next_f64())
                        .collect();
                    let ok = match &self.ineq {
                        Some((a, b)) => (0..a.rows()).all(|r| linalg::dot(a.row(r), &x) <= b[r]),
                        None => true,
                    };
                    if ok {
                        accepted_total += 1;
                        out.push(&x);
                        break;
                    }
                    if trials_total >= 10_000_000 && (accepted_total as f64) < 1e-6 * trials_total as f64 {
                        return Err(DomainError::DegenerateSampling);
                    }
                }
            }
            return Ok(out);
        }

        // Hit-and-run along the slice.
        let z = &self.null_basis;
        let k = z.cols();
        if k == 0 {
            for _ in 0..count {
                out.push(&self.cheb_center);
            }
            return Ok(out);
        }
        let faces = self.face_rows();
        let mut x = self.cheb_center.clone();
        let mut cur = Cursor::new(stream);
        let burn_in = 100 * self.dim;
        let thinning = 10;
        let mut kept = 0usize;
        let mut step = 0usize;
        while kept < count {
            let w = cur.next_direction(k);
            let d = z.matvec(&w);
            let dn = linalg::norm2(&d);
            if dn < 1e-12 {
                continue;
            }
            let d: Vec<f64> = d.iter().map(|v| v / dn).collect();
            let mut t_lo = f64::NEG_INFINITY;
            let mut t_hi = f64::INFINITY;
            for (a, b) in &faces {
                let ad = linalg::dot(a, &d);
                let slack = b - linalg::dot(a, &x);
                if ad > 1e-13 {
                    t_hi = t_hi.min(slack / ad);
                } else if ad < -1e-13 {
                    t_lo = t_lo.max(slack / ad);
                }
            }
            if !(t_lo.is_finite() && t_hi.is_finite() && t_hi > t_lo) {
                step += 1;
                continue;
            }
            let t = t_lo + (t_hi - t_lo) * cur.next_f64();
            x = linalg::add_scaled(&x, &d, t);
            step += 1;
            if step > burn_in && (step - burn_in) % thinning == 0 {
                out.push(&x);
                kept += 1;
            }
        }
        Ok(out)
    }

    /// Nudge a nearly feasible point exactly into the domain: box coordinates
    /// are clamped and equality residuals removed by least squares, provided
    /// the point is within `tol` of feasible to begin with. Returns `None`
    /// when the input is too far outside for a snap to be honest.
    pub fn snap_inside(&self, x: &[f64], tol: f64) -> Option<Vec<f64>> {
        let mut y = x.to_vec();
        for _ in 0..3 {
            for i in 0..self.dim {
                if y[i] < self.lower[i] - tol || y[i] > self.upper[i] + tol {
                    return None;
                }
                y[i] = y[i].clamp(self.lower[i], self.upper[i]);
            }
            let Some((a, b)) = &self.eq else { break };
            // y += A^T (A A^T)^-1 (b - A y)
            let resid: Vec<f64> = (0..a.rows())
                .map(|r| b[r] - linalg::dot(a.row(r), &y))
                .collect();
            if resid.iter().all(|v| v.abs() <= 1e-14) {
                break;
            }
            if resid.iter().any(|v| v.abs() > tol) {
                return None;
            }
            let aat = a.matmul(&a.transpose());
            let mut reg = aat.clone();
            for i in 0..reg.rows() {
                reg[(i, i)] += 1e-14 * (1.0 + aat.trace());
            }
            let w = reg.solve_spd(&resid)?;
            y = linalg::add_scaled(&y, &a.transpose().matvec(&w), 1.0);
        }
        if self.contains(&y, MEMBERSHIP_TOL) {
            Some(y)
        } else {
            None
        }
    }

    /// Euclidean diameter: exact for a pure box, otherwise the box diameter as
    /// an upper bound (flagged).
    pub fn diameter(&self) -> DiameterBound {
        let value = linalg::norm2(&linalg::sub_vec(&self.upper, &self.lower));
        DiameterBound {
            value,
            exact: self.is_pure_box(),
        }
    }

    /// Width of the projection of the domain onto direction u, via two LPs.
    pub fn projection_range(&self, u: &[f64]) -> Result<(f64, f64), DomainError> {
        let mut lo_lp = LinearProgram::new(u.to_vec());
        let mut hi_lp = LinearProgram::new(u.iter().map(|v| -v).collect());
        for (row, rhs) in self.face_rows() {
            lo_lp.add_ineq(row.clone(), rhs);
            hi_lp.add_ineq(row, rhs);
        }
        if let Some((a, b)) = &self.eq {
            for r in 0..a.rows() {
                lo_lp.add_eq(a.row(r).to_vec(), b[r]);
                hi_lp.add_eq(a.row(r).to_vec(), b[r]);
            }
        }
        let (xlo, _) = solve_lp(&lo_lp)?;
        let (xhi, _) = solve_lp(&hi_lp)?;
        Ok((linalg::dot(u, &xlo), linalg::dot(u, &xhi)))
    }
}

/// Diameter value with an exactness flag (upper bound when constraints are
/// present; the exact problem is NP-hard).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DiameterBound {
    pub value: f64,
    pub exact: bool,
}

/// Closest point in the convex hull of `hull_points` (rows) to `target`:
///
/// ```text
///   min || target - sum_j alpha_j c_j ||_2,  alpha >= 0, sum alpha = 1
/// ```
///
/// Solved by Frank-Wolfe with away steps (projection-free on the simplex);
/// 10^4 iteration cap, duality-gap stop at 1e-10. Objective accurate to 1e-8.
pub fn closest_point_hull(target: &[f64], hull_points: &Matrix) -> (Vec<f64>, f64) {
    let c = hull_points.rows();
    let k = hull_points.cols();
    assert!(c >= 1, "hull needs at least one point");
    assert_eq!(k, target.len(), "dimension mismatch");

    // Start from the hull point closest to the target.
    let mut best0 = 0;
    let mut best_d = f64::INFINITY;
    for j in 0..c {
        let d = linalg::norm2(&linalg::sub_vec(hull_points.row(j), target));
        if d < best_d {
            best_d = d;
            best0 = j;
        }
    }
    let mut alpha = vec![0.0; c];
    alpha[best0] = 1.0;
    let mut point = hull_points.row(best0).to_vec();

    for _ in 0..10_000 {
        // gradient of ||t - C^T alpha||^2 w.r.t. alpha is -2 C (t - p)
        let resid = linalg::sub_vec(target, &point);
        let mut grad = vec![0.0; c];
        for j in 0..c {
            grad[j] = -2.0 * linalg::dot(hull_points.row(j), &resid);
        }
        // Frank-Wolfe vertex and away vertex.
        let mut fw = 0;
        let mut away = None;
        for j in 0..c {
            if grad[j] < grad[fw] {
                fw = j;
            }
            if alpha[j] > 1e-15 && away.map(|a: usize| grad[j] > grad[a]).unwrap_or(true) {
                away = Some(j);
            }
        }
        let away = away.unwrap_or(fw);
        let gap_fw = linalg::dot(&grad, &alpha) - grad[fw];
        if gap_fw <= 1e-10 {
            break;
        }
        let gap_away = grad[away] - linalg::dot(&grad, &alpha);

        // Direction: either toward the FW vertex or away from the worst one.
        let (dir_vertex, toward, gamma_max) = if gap_fw >= gap_away {
            (fw, true, 1.0)
        } else {
            let a = alpha[away];
            (away, false, a / (1.0 - a).max(1e-300))
        };
        // d(point) = s * (c_v - p), s = +1 toward, -1 away.
        let sgn = if toward { 1.0 } else { -1.0 };
        let dvec: Vec<f64> = hull_points
            .row(dir_vertex)
            .iter()
            .zip(&point)
            .map(|(cv, p)| sgn * (cv - p))
            .collect();
        // Exact line search for the quadratic objective.
        let dd = linalg::dot(&dvec, &dvec);
        if dd <= 1e-300 {
            break;
        }
        let gamma = (linalg::dot(&resid, &dvec) / dd).clamp(0.0, gamma_max);
        if gamma <= 0.0 {
            break;
        }
        // alpha update: toward: alpha = (1-g) alpha + g e_v; away: alpha = (1+g) alpha - g e_v.
        for a in alpha.iter_mut() {
            *a *= 1.0 - sgn * gamma;
        }
        alpha[dir_vertex] += sgn * gamma;
        for p in 0..k {
            point[p] += gamma * dvec[p];
        }
    }
    let dist = linalg::norm2(&linalg::sub_vec(target, &point));
    (point, dist)
}

/// Does the ball B(target, eps) intersect the convex hull of `hull_points`?
///
/// Same Frank-Wolfe iteration as [`closest_point_hull`], but with early
/// exits: accept as soon as the current squared distance drops to eps^2, and
/// reject as soon as the duality gap certifies the minimum stays above it.
/// Grid sweeps test millions of cells, almost all of which resolve within a
/// few iterations this way.
pub fn ball_intersects_hull(target: &[f64], hull_points: &Matrix, eps: f64) -> bool {
    let c = hull_points.rows();
    let k = hull_points.cols();
    assert!(c >= 1, "hull needs at least one point");
    assert_eq!(k, target.len(), "dimension mismatch");
    let accept_sq = (eps + 1e-9) * (eps + 1e-9);

    let mut best0 = 0;
    let mut best_d = f64::INFINITY;
    for j in 0..c {
        let d = linalg::norm2(&linalg::sub_vec(hull_points.row(j), target));
        if d < best_d {
            best_d = d;
            best0 = j;
        }
    }
    let mut alpha = vec![0.0; c];
    alpha[best0] = 1.0;
    let mut point = hull_points.row(best0).to_vec();

    for _ in 0..10_000 {
        let resid = linalg::sub_vec(target, &point);
        let f = linalg::dot(&resid, &resid);
        if f <= accept_sq {
            return true;
        }
        let mut grad = vec![0.0; c];
        for j in 0..c {
            grad[j] = -2.0 * linalg::dot(hull_points.row(j), &resid);
        }
        let mut fw = 0;
        let mut away = None;
        for j in 0..c {
            if grad[j] < grad[fw] {
                fw = j;
            }
            if alpha[j] > 1e-15 && away.map(|a: usize| grad[j] > grad[a]).unwrap_or(true) {
                away = Some(j);
            }
        }
        let away = away.unwrap_or(fw);
        let gap_fw = linalg::dot(&grad, &alpha) - grad[fw];
        // f - gap lower-bounds the squared minimum.
        if f - gap_fw > accept_sq {
            return false;
        }
        if gap_fw <= 1e-12 {
            return f <= accept_sq;
        }
        let gap_away = grad[away] - linalg::dot(&grad, &alpha);
        let (dir_vertex, toward, gamma_max) = if gap_fw >= gap_away {
            (fw, true, 1.0)
        } else {
            let a = alpha[away];
            (away, false, a / (1.0 - a).max(1e-300))
        };
        let sgn = if toward { 1.0 } else { -1.0 };
        let dvec: Vec<f64> = hull_points
            .row(dir_vertex)
            .iter()
            .zip(&point)
            .map(|(cv, p)| sgn * (cv - p))
            .collect();
        let dd = linalg::dot(&dvec, &dvec);
        if dd <= 1e-300 {
            return f <= accept_sq;
        }
        let gamma = (linalg::dot(&resid, &dvec) / dd).clamp(0.0, gamma_max);
        if gamma <= 0.0 {
            return f <= accept_sq;
        }
        for a in alpha.iter_mut() {
            *a *= 1.0 - sgn * gamma;
        }
        alpha[dir_vertex] += sgn * gamma;
        for p in 0..k {
            point[p] += gamma * dvec[p];
        }
    }
    linalg::dot(&linalg::sub_vec(target, &point), &linalg::sub_vec(target, &point)) <= accept_sq
}
