//! Covering-number estimation and complexity analysis on the transformed
//! domain L D.
//!
//! The estimator counts epsilon-balls on a grid aligned with the singular
//! directions of L, spaced 2 eps / sqrt(m) so the counted balls are a true
//! covering (each grid cell has circumradius eps). A ball counts when it
//! intersects L D, tested by projecting its center onto the convex hull of
//! the transformed box corners. Past the subsample threshold the hit
//! fraction over randomly sampled cells scales the grid total.

use serde::{Deserialize, Serialize};

use crate::design::{self, DesignError};
use crate::geometry::{ball_intersects_hull, Domain, DomainError};
use crate::linalg::{self, Matrix};
use crate::lipschitz::{LipschitzMatrix, SampleSet};
use crate::rng::{OpId, Stream};
use crate::uncertainty::{self, MinimaxConfig, UncertaintyError};

#[derive(Debug, thiserror::Error)]
pub enum ComplexityError {
    #[error("operation requires a pure box domain")]
    NotABox,
    #[error("epsilon must be positive")]
    BadEpsilon,
    #[error("grid has {0:.3e} cells (> 10^15); use a larger epsilon")]
    GridOverflow(f64),
    #[error("covering curve needs >= 2 points sorted by epsilon")]
    BadCurve,
    #[error("counts must be positive for log-log slopes")]
    NonPositiveCount,
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error(transparent)]
    Uncertainty(#[from] UncertaintyError),
}

/// Either a scalar Lipschitz constant (acting as L I) or a full matrix.
#[derive(Clone, Copy, Debug)]
pub enum Metric<'a> {
    Scalar(f64),
    Matrix(&'a LipschitzMatrix),
}

impl<'a> Metric<'a> {
    /// The symmetric transform applied to the domain.
    fn l_matrix(&self, dim: usize) -> Matrix {
        match self {
            Metric::Scalar(l) => Matrix::identity(dim).scale(l.abs()),
            Metric::Matrix(lm) => lm.l().clone(),
        }
    }
}

/// An epsilon-covering upper bound: `count` is exact when the full grid was
/// enumerated, otherwise a subsampled estimate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoveringEstimate {
    pub epsilon: f64,
    pub count: f64,
    pub exact: bool,
    pub grid_total: u64,
    pub sampled: u64,
    pub seed: u64,
}

/// Count the grid balls of radius `epsilon` intersecting L D.
///
/// The grid is aligned to the eigenvectors of the (symmetric) L, anchored at
/// the centroid of the transformed corners, with spacing 2 eps / sqrt(m); the
/// cell diameter is then 2 eps, so every point of L D lies within eps of a
/// counted center.
pub fn covering_upper_bound(
    metric: Metric<'_>,
    d: &Domain,
    epsilon: f64,
    subsample_threshold: u64,
    seed: u64,
) -> Result<CoveringEstimate, ComplexityError> {
    if !d.is_pure_box() {
        return Err(ComplexityError::NotABox);
    }
    if !(epsilon > 0.0) {
        return Err(ComplexityError::BadEpsilon);
    }
    let m = d.dim();
    let l = metric.l_matrix(m);
    let eig = linalg::sym_eigen(&l);

    // Transformed corners in the eigenbasis coordinates (distances are
    // preserved because the basis is orthonormal).
    let corners = d.corners()?;
    let mut hull = Matrix::zeros(0, m);
    for c in corners.iter() {
        let z = l.matvec(c);
        hull.push_row(&eig.vectors.transpose().matvec(&z));
    }

    let spacing = 2.0 * epsilon / (m as f64).sqrt();
    let mut lo = vec![f64::INFINITY; m];
    let mut hi = vec![f64::NEG_INFINITY; m];
    for r in 0..hull.rows() {
        for j in 0..m {
            lo[j] = lo[j].min(hull[(r, j)]);
            hi[j] = hi[j].max(hull[(r, j)]);
        }
    }
    let anchor: Vec<f64> = (0..m).map(|j| 0.5 * (lo[j] + hi[j])).collect();

    // Index ranges so that the nearest grid center of any domain point is
    // enumerated.
    let mut k_lo = vec![0i64; m];
    let mut counts = vec![0u64; m];
    let mut grid_total: f64 = 1.0;
    for j in 0..m {
        let kmin = ((lo[j] - anchor[j]) / spacing - 0.5).ceil() as i64;
        let kmax = ((hi[j] - anchor[j]) / spacing + 0.5).floor() as i64;
        let n = (kmax - kmin + 1).max(1) as u64;
        k_lo[j] = kmin;
        counts[j] = n;
        grid_total *= n as f64;
    }
    if grid_total > 1e15 {
        return Err(ComplexityError::GridOverflow(grid_total));
    }
    let grid_total = grid_total as u64;

    let center_of = |idx: u64| -> Vec<f64> {
        let mut rest = idx;
        let mut center = vec![0.0; m];
        for j in 0..m {
            let k = (rest % counts[j]) as i64 + k_lo[j];
            rest /= counts[j];
            center[j] = anchor[j] + spacing * k as f64;
        }
        center
    };
    let ball_hits = |center: &[f64]| -> bool { ball_intersects_hull(center, &hull, epsilon) };

    if grid_total <= subsample_threshold {
        let mut hits = 0u64;
        for idx in 0..grid_total {
            if ball_hits(&center_of(idx)) {
                hits += 1;
            }
        }
        Ok(CoveringEstimate {
            epsilon,
            count: hits as f64,
            exact: true,
            grid_total,
            sampled: grid_total,
            seed,
        })
    } else {
        let stream = Stream::new(seed, OpId::CoveringSubsample);
        let mut hits = 0u64;
        for i in 0..subsample_threshold {
            let idx = stream.index_at(i, grid_total);
            if ball_hits(&center_of(idx)) {
                hits += 1;
            }
        }
        let frac = hits as f64 / subsample_threshold as f64;
        // A nonempty domain always intersects at least one ball.
        let count = (grid_total as f64 * frac).max(1.0);
        Ok(CoveringEstimate {
            epsilon,
            count,
            exact: false,
            grid_total,
            sampled: subsample_threshold,
            seed,
        })
    }
}

/// vol(L D) = |det L| vol(D) for a matrix metric, L^m vol(D) for a scalar.
pub fn volume_transformed(metric: Metric<'_>, d: &Domain) -> Result<f64, ComplexityError> {
    if !d.is_pure_box() {
        return Err(ComplexityError::NotABox);
    }
    let m = d.dim();
    let vol_box: f64 = (0..m).map(|i| d.upper()[i] - d.lower()[i]).product();
    let factor = match metric {
        Metric::Scalar(l) => l.abs().powi(m as i32),
        // |det L| = sqrt(det H): H is the primary stored object, so this
        // avoids the square root's eigendecomposition noise.
        Metric::Matrix(lm) => lm.h().det().max(0.0).sqrt(),
    };
    Ok(factor * vol_box)
}

/// One row of a growth-rate table: log-log slope of the covering curve and
/// its 7-point running median.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthPoint {
    pub epsilon: f64,
    pub slope: f64,
    pub smoothed: f64,
}

/// Finite-difference slopes of log(count) against log(epsilon), one per
/// adjacent pair (reported at the geometric midpoint), plus a 7-point running
/// median with the window truncated at the ends.
pub fn growth_rate(curve: &[(f64, f64)]) -> Result<Vec<GrowthPoint>, ComplexityError> {
    if curve.len() < 2 {
        return Err(ComplexityError::BadCurve);
    }
    for w in curve.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(ComplexityError::BadCurve);
        }
    }
    if curve.iter().any(|(_, n)| *n <= 0.0) {
        return Err(ComplexityError::NonPositiveCount);
    }
    let slopes: Vec<(f64, f64)> = curve
        .windows(2)
        .map(|w| {
            let slope = (w[1].1.ln() - w[0].1.ln()) / (w[1].0.ln() - w[0].0.ln());
            ((w[0].0 * w[1].0).sqrt(), slope)
        })
        .collect();
    let n = slopes.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(3);
        let hi = (i + 3).min(n - 1);
        let mut window: Vec<f64> = slopes[lo..=hi].iter().map(|(_, s)| *s).collect();
        window.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let smoothed = window[window.len() / 2];
        out.push(GrowthPoint {
            epsilon: slopes[i].0,
            slope: slopes[i].1,
            smoothed,
        });
    }
    Ok(out)
}

fn unit_ball_volume(k: usize) -> f64 {
    // pi^(k/2) / Gamma(k/2 + 1) via the recursion Gamma(x+1) = x Gamma(x).
    let mut gamma = if k % 2 == 0 {
        1.0 // Gamma(1)
    } else {
        std::f64::consts::PI.sqrt() // Gamma(1/2)
    };
    let mut x = if k % 2 == 0 { 1.0 } else { 0.5 };
    while x < k as f64 / 2.0 + 1.0 - 1e-9 {
        gamma *= x;
        x += 1.0;
    }
    std::f64::consts::PI.powf(k as f64 / 2.0) / gamma
}

/// Volume and eigen-structure of the transformed box restricted to the range
/// of L: the k-dimensional zonotope volume when rank(L) = k < m.
fn transformed_volume_intrinsic(l: &Matrix, d: &Domain) -> (usize, f64) {
    let m = d.dim();
    let eig = linalg::sym_eigen(l);
    let sigma_max = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let active: Vec<usize> = (0..m)
        .filter(|&i| eig.values[i] > 1e-10 * sigma_max && eig.values[i] > 0.0)
        .collect();
    let k = active.len();
    if k == 0 {
        return (0, 0.0);
    }
    // Rows of A: sigma_i v_i^T for the retained directions; the image of the
    // box is the zonotope with generators (column_j of A) * width_j.
    let mut a = Matrix::zeros(k, m);
    for (r, &i) in active.iter().enumerate() {
        for j in 0..m {
            a[(r, j)] = eig.values[i] * eig.vectors[(j, i)];
        }
    }
    let widths: Vec<f64> = (0..m).map(|j| d.upper()[j] - d.lower()[j]).collect();
    // Sum over k-subsets S of |det A_S| prod_{j in S} width_j.
    let mut total = 0.0;
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        let mut sub = Matrix::zeros(k, k);
        let mut wprod = 1.0;
        for (c, &j) in subset.iter().enumerate() {
            for r in 0..k {
                sub[(r, c)] = a[(r, j)];
            }
            wprod *= widths[j];
        }
        total += sub.det().abs() * wprod;
        // next k-combination of 0..m
        let mut i = k;
        loop {
            if i == 0 {
                return (k, total);
            }
            i -= 1;
            if subset[i] != i + m - k {
                subset[i] += 1;
                for j in (i + 1)..k {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// The covering-number sandwich (1/eps)^k V/vol(B_1) <= N_eps <= (3/eps)^k
/// V/vol(B_1), with k the intrinsic dimension of L D and V its volume inside
/// the range subspace.
pub fn theoretical_cover_bounds(
    metric: Metric<'_>,
    d: &Domain,
    epsilon: f64,
) -> Result<(f64, f64), ComplexityError> {
    if !d.is_pure_box() {
        return Err(ComplexityError::NotABox);
    }
    if !(epsilon > 0.0) {
        return Err(ComplexityError::BadEpsilon);
    }
    let l = metric.l_matrix(d.dim());
    let (k, vol) = transformed_volume_intrinsic(&l, d);
    if k == 0 {
        return Ok((0.0, 1.0)); // a point: one ball always suffices
    }
    let vb = unit_ball_volume(k);
    let lower = epsilon.powi(-(k as i32)) * vol / vb;
    let upper = (3.0 / epsilon).powi(k as i32) * vol / vb;
    Ok((lower, upper))
}

/// Quadrature of the central approximation over a box domain.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    /// Worst-case class error: fill distance times the domain volume.
    pub error_bound: f64,
    /// 95% Monte Carlo half-width of the mean estimate, reported separately.
    pub mc_half_width: f64,
}

/// Integrate the central approximation by uniform Monte Carlo over the box;
/// the worst-case error bound is fill_distance * vol(D).
pub fn integrate_central(
    s: &SampleSet,
    lm: &LipschitzMatrix,
    d: &Domain,
    n_points: usize,
    seed: u64,
) -> Result<QuadratureResult, ComplexityError> {
    if !d.is_pure_box() {
        return Err(ComplexityError::NotABox);
    }
    let m = d.dim();
    let vol: f64 = (0..m).map(|i| d.upper()[i] - d.lower()[i]).product();
    let pts = d.sample_uniform(n_points, seed)?;
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for p in pts.iter() {
        let c = uncertainty::central(p, s, lm)?;
        sum += c;
        sumsq += c * c;
    }
    let n = n_points as f64;
    let mean = sum / n;
    let var = (sumsq / n - mean * mean).max(0.0);
    let half_width = 1.96 * (var / n).sqrt() * vol;

    let cfg = MinimaxConfig::with_seed(Stream::new(seed, OpId::Quadrature).u64_at(0));
    let pset = crate::geometry::PointSet::from_matrix(s.points().clone());
    let fill = design::fill_distance(&pset, lm, d, &cfg)?;
    Ok(QuadratureResult {
        value: mean * vol,
        error_bound: fill * vol,
        mc_half_width: half_width,
    })
}

/// Quadrature over a sequential maximin design: builds the design in the
/// given metric, evaluates f there, and integrates the central approximation
/// of that data. This approximates the worst-case-optimal rule, whose exact
/// form would require a covering-optimal design.
pub fn integrate_central_on_design<F: Fn(&[f64]) -> f64>(
    f: F,
    lm: &LipschitzMatrix,
    d: &Domain,
    design_count: usize,
    n_points: usize,
    seed: u64,
) -> Result<QuadratureResult, ComplexityError> {
    let cfg = MinimaxConfig::with_seed(Stream::new(seed, OpId::Quadrature).u64_at(1));
    let des = design::sequential_design(d, design_count, design::DesignMode::FixedMetric(lm), &cfg)?;
    let mut s = SampleSet::empty(d.dim());
    for p in des.points.iter() {
        s.push_sample(p, f(p));
    }
    integrate_central(&s, lm, d, n_points, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::closest_point_hull;
    use crate::solvers::{SolveReport, SolveStatus};

    fn metric_from_h(h: Matrix) -> LipschitzMatrix {
        LipschitzMatrix::from_h(
            h,
            0.0,
            SolveReport {
                status: SolveStatus::Optimal,
                iterations: 0,
                objective: 0.0,
                kkt_residual: 0.0,
            },
        )
    }

    /// The Lipschitz matrix of the covering cartoon: L = [[1,0],[-1,4]],
    /// represented through H = L^T L (det L = 4).
    fn cartoon_metric() -> LipschitzMatrix {
        let l = Matrix::from_rows(2, 2, vec![1.0, 0.0, -1.0, 4.0]);
        let h = l.transpose().matmul(&l);
        metric_from_h(h)
    }

    #[test]
    fn one_dimensional_exact_count_is_five() {
        // L D = [-4, 4], eps = 1, spacing 2: centers -4, -2, 0, 2, 4.
        let d = Domain::normalized(1);
        let est = covering_upper_bound(Metric::Scalar(4.0), &d, 1.0, 1_000_000, 0).unwrap();
        assert!(est.exact);
        assert_eq!(est.count, 5.0);
        assert_eq!(est.grid_total, 5);
    }

    #[test]
    fn huge_epsilon_gives_count_one() {
        let d = Domain::normalized(2);
        let est = covering_upper_bound(Metric::Scalar(1.0), &d, 10.0, 1_000_000, 0).unwrap();
        assert!(est.exact);
        assert_eq!(est.count, 1.0);
    }

    #[test]
    fn exact_count_is_a_true_covering() {
        // Every transformed corner and 1000 random transformed points lie
        // within eps of a counted center.
        let d = Domain::normalized(2);
        let lm = cartoon_metric();
        let eps = 0.8;
        let est = covering_upper_bound(Metric::Matrix(&lm), &d, eps, 1_000_000, 0).unwrap();
        assert!(est.exact);

        // Rebuild the counted centers the same way the estimator does.
        let l = lm.l().clone();
        let eig = linalg::sym_eigen(&l);
        let corners = d.corners().unwrap();
        let mut hull = Matrix::zeros(0, 2);
        for c in corners.iter() {
            hull.push_row(&eig.vectors.transpose().matvec(&l.matvec(c)));
        }
        let spacing = 2.0 * eps / 2.0f64.sqrt();
        let (mut lo, mut hi) = (vec![f64::INFINITY; 2], vec![f64::NEG_INFINITY; 2]);
        for r in 0..hull.rows() {
            for j in 0..2 {
                lo[j] = lo[j].min(hull[(r, j)]);
                hi[j] = hi[j].max(hull[(r, j)]);
            }
        }
        let anchor: Vec<f64> = (0..2).map(|j| 0.5 * (lo[j] + hi[j])).collect();
        let mut centers = Vec::new();
        let kr = |j: usize| -> (i64, i64) {
            (
                ((lo[j] - anchor[j]) / spacing - 0.5).ceil() as i64,
                ((hi[j] - anchor[j]) / spacing + 0.5).floor() as i64,
            )
        };
        let (k0min, k0max) = kr(0);
        let (k1min, k1max) = kr(1);
        for k0 in k0min..=k0max {
            for k1 in k1min..=k1max {
                let c = vec![anchor[0] + spacing * k0 as f64, anchor[1] + spacing * k1 as f64];
                let (_, dist) = closest_point_hull(&c, &hull);
                if dist <= eps + 1e-9 {
                    centers.push(c);
                }
            }
        }
        assert_eq!(centers.len() as f64, est.count);

        let check_covered = |z: &[f64]| {
            let covered = centers
                .iter()
                .any(|c| linalg::norm2(&linalg::sub_vec(c, z)) <= eps + 1e-9);
            assert!(covered, "point {z:?} not covered");
        };
        for c in corners.iter() {
            check_covered(&eig.vectors.transpose().matvec(&l.matvec(c)));
        }
        let pts = d.sample_uniform(1000, 77).unwrap();
        for p in pts.iter() {
            check_covered(&eig.vectors.transpose().matvec(&l.matvec(p)));
        }
    }

    #[test]
    fn covering_count_is_monotone_in_epsilon() {
        // Smaller epsilon can only need more balls.
        let d = Domain::normalized(2);
        let lm = cartoon_metric();
        let mut last = 0.0f64;
        for i in 0..20 {
            // log-spaced sweep from 2.0 down to 0.1
            let eps = 2.0 * (0.05f64).powf(i as f64 / 19.0);
            let est = covering_upper_bound(Metric::Matrix(&lm), &d, eps, 1_000_000, 0).unwrap();
            assert!(est.exact);
            assert!(
                est.count >= last,
                "count fell to {} from {last} at eps {eps}",
                est.count
            );
            last = est.count;
        }
    }

    #[test]
    fn subsampled_estimate_tracks_the_exact_count() {
        let d = Domain::normalized(2);
        let lm = cartoon_metric();
        let eps = 0.12;
        let exact = covering_upper_bound(Metric::Matrix(&lm), &d, eps, 10_000_000, 0).unwrap();
        assert!(exact.exact);
        let sampled = covering_upper_bound(Metric::Matrix(&lm), &d, eps, exact.grid_total / 4, 3).unwrap();
        assert!(!sampled.exact);
        assert_eq!(sampled.grid_total, exact.grid_total);
        let rel = (sampled.count - exact.count).abs() / exact.count;
        assert!(rel < 0.1, "subsampled {} vs exact {} ({rel:.3})", sampled.count, exact.count);
    }

    #[test]
    fn cartoon_volume_ratio_is_four() {
        let d = Domain::normalized(2);
        let lm = cartoon_metric();
        let vs = volume_transformed(Metric::Scalar(4.0), &d).unwrap();
        let vm = volume_transformed(Metric::Matrix(&lm), &d).unwrap();
        assert_eq!(vs, 64.0);
        assert_eq!(vm, 16.0);
        assert_eq!(vs / vm, 4.0);
    }

    #[test]
    fn rank_deficient_volume_is_zero() {
        let d = Domain::normalized(2);
        let lm = metric_from_h(Matrix::from_rows(2, 2, vec![1.0, 0.0, 0.0, 0.0]));
        let v = volume_transformed(Metric::Matrix(&lm), &d).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn growth_rate_on_power_law() {
        let curve: Vec<(f64, f64)> = (1..=12)
            .map(|i| {
                let eps = 0.05 * 1.4f64.powi(i);
                (eps, eps.powi(-2))
            })
            .collect();
        let rates = growth_rate(&curve).unwrap();
        for r in &rates {
            assert!((r.slope + 2.0).abs() < 1e-9, "slope {}", r.slope);
            assert!((r.smoothed + 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn growth_rate_constant_count() {
        let curve: Vec<(f64, f64)> = (1..=5).map(|i| (i as f64, 7.0)).collect();
        let rates = growth_rate(&curve).unwrap();
        assert!(rates.iter().all(|r| r.slope.abs() < 1e-12));
    }

    #[test]
    fn median_smoothing_suppresses_a_spike() {
        let mut curve: Vec<(f64, f64)> = (1..=15)
            .map(|i| {
                let eps = 0.05 * 1.5f64.powi(i);
                (eps, eps.powi(-2))
            })
            .collect();
        curve[7].1 *= 40.0; // single spike
        let rates = growth_rate(&curve).unwrap();
        // Window centers away from the spike's two corrupted slopes stay -2.
        for (i, r) in rates.iter().enumerate() {
            if i >= 3 && i + 3 < rates.len() {
                assert!(
                    (r.smoothed + 2.0).abs() < 1e-9,
                    "smoothed slope at {i}: {}",
                    r.smoothed
                );
            }
        }
    }

    #[test]
    fn theoretical_bounds_match_hand_values() {
        // m = 1, scalar L = 4 on [-1,1]: vol = 8, vol(B_1) = 2:
        // lower = 4, upper = 12 at eps = 1.
        let d1 = Domain::normalized(1);
        let (lo, hi) = theoretical_cover_bounds(Metric::Scalar(4.0), &d1, 1.0).unwrap();
        assert!((lo - 4.0).abs() < 1e-9, "lower {lo}");
        assert!((hi - 12.0).abs() < 1e-9, "upper {hi}");

        // Identity on [-1,1]^2 at eps = 1: vol 4, vol(B_1) = pi:
        // upper = 9 * 4 / pi ~ 11.459.
        let d2 = Domain::normalized(2);
        let (lo2, hi2) = theoretical_cover_bounds(Metric::Scalar(1.0), &d2, 1.0).unwrap();
        assert!((lo2 - 4.0 / std::f64::consts::PI).abs() < 1e-9);
        assert!((hi2 - 36.0 / std::f64::consts::PI).abs() < 1e-9, "upper {hi2}");
        assert!((hi2 - 11.459).abs() < 1e-2);
    }

    #[test]
    fn rank_one_bounds_scale_linearly_in_inverse_epsilon() {
        let d = Domain::normalized(3);
        let lm = metric_from_h(Matrix::from_rows(
            3,
            3,
            vec![4.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        ));
        let (lo1, hi1) = theoretical_cover_bounds(Metric::Matrix(&lm), &d, 1.0).unwrap();
        let (lo2, hi2) = theoretical_cover_bounds(Metric::Matrix(&lm), &d, 0.5).unwrap();
        assert!((lo2 / lo1 - 2.0).abs() < 1e-9, "k = 1 exponent violated");
        assert!((hi2 / hi1 - 2.0).abs() < 1e-9);
        // Segment of length sigma * width = 2 * 2 = 4; vol(B_1) = 2 in 1-D.
        assert!((lo1 - 4.0 / 2.0).abs() < 1e-9, "lo1 = {lo1}");
    }

    #[test]
    fn exact_count_sits_inside_slacked_theoretical_envelope() {
        // Sanity smoke test: exact counts stay between lower/3^k and
        // 3^k * upper on full-rank boxes, k <= 3.
        for (k, scalar) in [(1usize, 2.0f64), (2, 1.5), (3, 1.25)] {
            let d = Domain::normalized(k);
            for eps in [0.3, 0.6, 1.0] {
                let est = covering_upper_bound(Metric::Scalar(scalar), &d, eps, 2_000_000, 0).unwrap();
                let (lo, hi) = theoretical_cover_bounds(Metric::Scalar(scalar), &d, eps).unwrap();
                let slack = 3.0f64.powi(k as i32);
                assert!(
                    est.count >= lo / slack - 1e-9 && est.count <= hi * slack + 1e-9,
                    "k {k} eps {eps}: count {} outside [{}, {}]",
                    est.count,
                    lo / slack,
                    hi * slack
                );
            }
        }
    }

    #[test]
    fn integrate_zero_values_gives_zero() {
        let points = Matrix::from_rows(3, 2, vec![0.0, 0.0, 0.5, 0.5, -0.5, 0.25]);
        let s = SampleSet::from_samples(points, vec![0.0, 0.0, 0.0]).unwrap();
        let lm = LipschitzMatrix::from_scalar(1.0, 2);
        let d = Domain::normalized(2);
        let q = integrate_central(&s, &lm, &d, 2000, 3).unwrap();
        assert_eq!(q.value, 0.0);
        assert!(q.error_bound > 0.0);
    }

    #[test]
    fn linear_integrand_integrates_to_zero_within_tolerance() {
        // f(x) = x_1 at the corners with the exact rank-1 metric: central
        // reproduces f, whose integral over the symmetric box is 0.
        let corners = Matrix::from_rows(4, 2, vec![-1.0, -1.0, 1.0, -1.0, -1.0, 1.0, 1.0, 1.0]);
        let values: Vec<f64> = (0..4).map(|i| corners.row(i)[0]).collect();
        let s = SampleSet::from_samples(corners, values).unwrap();
        let lm = metric_from_h(Matrix::from_rows(2, 2, vec![1.0, 0.0, 0.0, 0.0]));
        let d = Domain::normalized(2);
        let q = integrate_central(&s, &lm, &d, 20_000, 5).unwrap();
        assert!(
            q.value.abs() <= 1.5 * q.mc_half_width + 1e-12,
            "value {} vs half width {}",
            q.value,
            q.mc_half_width
        );
    }

    #[test]
    fn design_based_quadrature_tightens_the_bound() {
        // The maximin design shrinks the fill distance, so the class error
        // bound shrinks with more design points.
        let lm = LipschitzMatrix::from_scalar(1.0, 2);
        let d = Domain::normalized(2);
        let f = |x: &[f64]| 0.4 * x[0] - 0.7 * x[1];
        let q_small = integrate_central_on_design(f, &lm, &d, 4, 2000, 5).unwrap();
        let q_large = integrate_central_on_design(f, &lm, &d, 16, 2000, 5).unwrap();
        assert!(q_large.error_bound < q_small.error_bound);
        // The integrand is linear and odd: both estimates sit near zero.
        assert!(q_large.value.abs() < 4.0 * q_large.mc_half_width + 1e-6);
    }

    #[test]
    fn quadrature_error_bound_holds_for_class_members() {
        // With f = the central approximation itself, an independent
        // high-resolution MC reference must land within value +- bound.
        let points = Matrix::from_rows(4, 2, vec![0.0, 0.0, 0.8, -0.2, -0.6, 0.7, 0.3, 0.9]);
        let s = SampleSet::from_samples(points, vec![0.1, 0.6, -0.4, 0.2]).unwrap();
        let lm = LipschitzMatrix::from_scalar(1.0, 2);
        let d = Domain::normalized(2);
        let q = integrate_central(&s, &lm, &d, 4000, 11).unwrap();

        let reference_pts = d.sample_uniform(200_000, 999).unwrap();
        let mut acc = 0.0;
        for p in reference_pts.iter() {
            acc += uncertainty::central(p, &s, &lm).unwrap();
        }
        let reference = acc / 200_000.0 * 4.0;
        assert!(
            (reference - q.value).abs() <= q.error_bound + 3.0 * q.mc_half_width,
            "reference {reference} vs value {} bound {}",
            q.value,
            q.error_bound
        );
    }

    #[test]
    fn rejects_constrained_domains() {
        let a = Matrix::from_rows(1, 2, vec![1.0, 1.0]);
        let d = Domain::new(vec![-1.0, -1.0], vec![1.0, 1.0], Some((a, vec![0.5])), None).unwrap();
        assert!(matches!(
            covering_upper_bound(Metric::Scalar(1.0), &d, 0.5, 1000, 0),
            Err(ComplexityError::NotABox)
        ));
        assert!(matches!(
            volume_transformed(Metric::Scalar(1.0), &d),
            Err(ComplexityError::NotABox)
        ));
    }
}
