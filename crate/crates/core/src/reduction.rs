//! Active-subspace extraction from the squared Lipschitz matrix, the
//! average-outer-product-of-gradients comparator, the ridge approximation
//! error bound, and shadow-plot data.

use serde::{Deserialize, Serialize};

use crate::linalg::{self, Matrix};
use crate::lipschitz::{LipschitzMatrix, SampleSet};

#[derive(Debug, thiserror::Error)]
pub enum ReductionError {
    #[error("matrix asymmetry {0:.3e} exceeds tolerance 1e-8")]
    NotSymmetric(f64),
    #[error("subspace dimension {n} outside 1..={m}")]
    BadSubspaceDim { n: usize, m: usize },
    #[error("direction must be a unit vector (||u|| = {0})")]
    NonUnitDirection(f64),
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error("need at least one gradient")]
    NoGradients,
}

/// An orthonormal basis of the top-n eigenspace along with the full spectrum
/// of the source matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Subspace {
    /// m x n, orthonormal columns, deterministic sign convention.
    pub u: Vec<Vec<f64>>,
    /// Full spectrum of the source matrix, descending.
    pub eigenvalues: Vec<f64>,
}

impl Subspace {
    pub fn dim_ambient(&self) -> usize {
        self.u.len()
    }

    pub fn dim_sub(&self) -> usize {
        self.u.first().map_or(0, |r| r.len())
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.u.iter().map(|row| row[k]).collect()
    }

    pub fn as_matrix(&self) -> Matrix {
        let m = self.dim_ambient();
        let n = self.dim_sub();
        let mut u = Matrix::zeros(m, n);
        for i in 0..m {
            for j in 0..n {
                u[(i, j)] = self.u[i][j];
            }
        }
        u
    }

    /// I - U U^T applied as a matrix.
    fn complement_projector(&self) -> Matrix {
        let u = self.as_matrix();
        let uut = u.matmul(&u.transpose());
        Matrix::identity(self.dim_ambient()).sub(&uut)
    }
}

/// Top-n eigenspace of a symmetric PSD matrix, with each column's
/// largest-magnitude entry made positive (ties broken by the first such
/// entry). Inputs with asymmetry <= 1e-8 are symmetrized; larger asymmetry
/// is rejected.
pub fn active_subspace(h: &Matrix, n: usize) -> Result<Subspace, ReductionError> {
    let m = h.rows();
    if h.cols() != m {
        return Err(ReductionError::DimensionMismatch);
    }
    if n == 0 || n > m {
        return Err(ReductionError::BadSubspaceDim { n, m });
    }
    let asym = h.asymmetry();
    let scale = h.frobenius_norm().max(1.0);
    if asym > 1e-8 * scale {
        return Err(ReductionError::NotSymmetric(asym));
    }
    let eig = linalg::sym_eigen(&h.symmetrize());
    let mut u = vec![vec![0.0; n]; m];
    for k in 0..n {
        let mut col: Vec<f64> = (0..m).map(|i| eig.vectors[(i, k)]).collect();
        let mut lead = 0;
        for i in 1..m {
            if col[i].abs() > col[lead].abs() {
                lead = i;
            }
        }
        if col[lead] < 0.0 {
            for v in col.iter_mut() {
                *v = -*v;
            }
        }
        for i in 0..m {
            u[i][k] = col[i];
        }
    }
    Ok(Subspace {
        u,
        eigenvalues: eig.values,
    })
}

/// Monte Carlo estimator of the average outer product of gradients:
/// (1/N) sum_k g_k g_k^T.
pub fn avg_outer_product(grads: &Matrix) -> Result<Matrix, ReductionError> {
    let n = grads.rows();
    if n == 0 {
        return Err(ReductionError::NoGradients);
    }
    let m = grads.cols();
    let mut c = Matrix::zeros(m, m);
    for k in 0..n {
        let g = grads.row(k);
        for i in 0..m {
            for j in 0..m {
                c[(i, j)] += g[i] * g[j];
            }
        }
    }
    Ok(c.scale(1.0 / n as f64))
}

/// Ridge approximation error bound:
/// eps + 2 delta + sigma_max(L (I - U U^T)) * diam.
pub fn ridge_error_bound(
    lm: &LipschitzMatrix,
    u: &Subspace,
    eps: f64,
    delta: f64,
    diam: f64,
) -> f64 {
    let b = lm.l().matmul(&u.complement_projector());
    let btb = b.transpose().matmul(&b);
    let sigma_max = linalg::sym_eigen(&btb).values.first().copied().unwrap_or(0.0).max(0.0).sqrt();
    eps + 2.0 * delta + sigma_max * diam
}

/// Shadow-plot data: (u^T x_j, y_j) pairs sorted by the projection.
pub fn shadow_data(u: &[f64], s: &SampleSet) -> Result<Vec<(f64, f64)>, ReductionError> {
    let un = linalg::norm2(u);
    if (un - 1.0).abs() > 1e-9 {
        return Err(ReductionError::NonUnitDirection(un));
    }
    if u.len() != s.dim() {
        return Err(ReductionError::DimensionMismatch);
    }
    let mut out: Vec<(f64, f64)> = (0..s.len())
        .map(|j| (linalg::dot(u, s.point(j)), s.value(j)))
        .collect();
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(out)
}

/// Principal angles between two subspaces, ascending, in [0, pi/2].
pub fn subspace_angle(u1: &Subspace, u2: &Subspace) -> Result<Vec<f64>, ReductionError> {
    if u1.dim_ambient() != u2.dim_ambient() {
        return Err(ReductionError::DimensionMismatch);
    }
    let m = u1.as_matrix().transpose().matmul(&u2.as_matrix());
    // Singular values of U1^T U2 are the cosines of the principal angles.
    let mtm = m.transpose().matmul(&m);
    let eig = linalg::sym_eigen(&mtm);
    let k = u1.dim_sub().min(u2.dim_sub());
    Ok((0..k)
        .map(|i| eig.values[i].max(0.0).sqrt().clamp(0.0, 1.0).acos())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lipschitz;
    use crate::rng::{Cursor, OpId, Stream};
    use crate::solvers::SdpOptions;

    #[test]
    fn dominant_direction_of_diagonal() {
        let h = Matrix::from_rows(2, 2, vec![25.0, 0.0, 0.0, 0.0]);
        let sub = active_subspace(&h, 1).unwrap();
        assert!((sub.column(0)[0] - 1.0).abs() < 1e-12);
        assert!(sub.column(0)[1].abs() < 1e-12);
        assert!((sub.eigenvalues[0] - 25.0).abs() < 1e-12);
    }

    #[test]
    fn corrugated_roof_analytic_matrix_points_along_x2() {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let h = Matrix::from_rows(2, 2, vec![25.0, 0.0, 0.0, 100.0 * pi2]);
        let sub = active_subspace(&h, 1).unwrap();
        assert!(sub.column(0)[0].abs() < 1e-12);
        assert!((sub.column(0)[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_spectrum_keeps_orthonormality() {
        let h = Matrix::identity(3);
        let sub = active_subspace(&h, 1).unwrap();
        let u = sub.column(0);
        assert!((linalg::norm2(&u) - 1.0).abs() < 1e-10);
        assert!((sub.eigenvalues[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn asymmetry_handling() {
        let mut h = Matrix::identity(2);
        h[(0, 1)] = 1e-10; // tiny asymmetry: symmetrized silently
        assert!(active_subspace(&h, 1).is_ok());
        let mut bad = Matrix::identity(2);
        bad[(0, 1)] = 1e-3;
        assert!(matches!(
            active_subspace(&bad, 1),
            Err(ReductionError::NotSymmetric(_))
        ));
    }

    #[test]
    fn scale_invariance_of_direction() {
        let h = Matrix::from_rows(2, 2, vec![3.0, 1.0, 1.0, 2.0]);
        let a = active_subspace(&h, 1).unwrap();
        let b = active_subspace(&h.scale(7.5), 1).unwrap();
        for i in 0..2 {
            assert!((a.column(0)[i] - b.column(0)[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn avg_outer_product_examples() {
        let g = Matrix::from_rows(1, 2, vec![1.0, 2.0]);
        let c = avg_outer_product(&g).unwrap();
        assert!(c.sub(&Matrix::outer(&[1.0, 2.0], &[1.0, 2.0])).frobenius_norm() < 1e-12);

        let g2 = Matrix::from_rows(2, 2, vec![1.0, 0.0, -1.0, 0.0]);
        let c2 = avg_outer_product(&g2).unwrap();
        assert!((c2[(0, 0)] - 1.0).abs() < 1e-12);
        assert!(c2[(1, 1)].abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_of_h_dominate_average_outer_product() {
        // H >= g g^T for each gradient implies H >= C and then Weyl gives
        // lambda_k(H) >= lambda_k(C).
        let stream = Stream::new(6, OpId::GradientSites);
        let mut cur = Cursor::new(stream);
        let mut grads = Matrix::zeros(0, 3);
        for _ in 0..40 {
            let g: Vec<f64> = (0..3).map(|_| cur.next_f64() * 2.0 - 1.0).collect();
            grads.push_row(&g);
        }
        let dummy_points = Matrix::zeros(40, 3);
        let s = lipschitz::SampleSet::gradients_only(dummy_points, grads.clone()).unwrap();
        let lm = lipschitz::estimate(&s, 0.0, &SdpOptions::default()).unwrap();
        let c = avg_outer_product(&grads).unwrap();
        let eh = linalg::sym_eigen(lm.h()).values;
        let ec = linalg::sym_eigen(&c).values;
        for k in 0..3 {
            assert!(
                eh[k] >= ec[k] - 1e-7,
                "lambda_{k}: H {} vs C {}",
                eh[k],
                ec[k]
            );
        }
    }

    #[test]
    fn ridge_bound_examples() {
        // Full subspace: only eps + 2 delta remains.
        let lm = LipschitzMatrix::from_scalar(2.0, 2);
        let full = active_subspace(&Matrix::identity(2), 2).unwrap();
        let b = ridge_error_bound(&lm, &full, 0.3, 0.2, 10.0);
        assert!((b - (0.3 + 0.4)).abs() < 1e-9);

        // L = diag(5, 1), U = span(e1): sigma_max(L(I-UU^T)) = 1.
        let h = Matrix::from_rows(2, 2, vec![25.0, 0.0, 0.0, 1.0]);
        let lm = LipschitzMatrix::from_h(
            h.clone(),
            0.0,
            crate::solvers::SolveReport {
                status: crate::solvers::SolveStatus::Optimal,
                iterations: 0,
                objective: 26.0,
                kkt_residual: 0.0,
            },
        );
        let sub = active_subspace(&h, 1).unwrap();
        let diam = 2.0 * 2.0f64.sqrt();
        let b = ridge_error_bound(&lm, &sub, 0.0, 0.0, diam);
        assert!((b - diam).abs() < 1e-9, "bound {b}");

        // Monotone in eps and delta.
        let b2 = ridge_error_bound(&lm, &sub, 0.5, 0.0, diam);
        let b3 = ridge_error_bound(&lm, &sub, 0.5, 0.25, diam);
        assert!(b2 > b && b3 > b2);
    }

    #[test]
    fn ridge_bound_is_empirically_valid_on_the_roof() {
        // f = corrugated roof; ftilde = central approximation under the
        // projected metric L U U^T. The bound with measured eps and delta
        // must dominate the sampled error.
        let f = crate::testfns::by_name("corrugated_roof").unwrap();
        let d = f.native_domain();
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let h = Matrix::from_rows(2, 2, vec![25.0, 0.0, 0.0, 100.0 * pi2]);
        let lm = LipschitzMatrix::from_h(
            h.clone(),
            0.0,
            crate::solvers::SolveReport {
                status: crate::solvers::SolveStatus::Optimal,
                iterations: 0,
                objective: 0.0,
                kkt_residual: 0.0,
            },
        );

        // Grid data for the central approximations.
        let mut points = Matrix::zeros(0, 2);
        let mut values = Vec::new();
        for i in 0..9 {
            for j in 0..9 {
                let p = [-1.0 + 0.25 * i as f64, -1.0 + 0.25 * j as f64];
                points.push_row(&p);
                values.push(f.evaluate_native(&p));
            }
        }
        let s = lipschitz::SampleSet::from_samples(points, values).unwrap();

        for n_dir in 0..2 {
            // Both the dominant (e2) and the secondary (e1) directions.
            let sub_full = active_subspace(&h, 2).unwrap();
            let col = sub_full.column(n_dir);
            let u = Subspace {
                u: col.iter().map(|&v| vec![v]).collect(),
                eigenvalues: sub_full.eigenvalues.clone(),
            };
            // Projected metric L U U^T as a squared matrix.
            let um = u.as_matrix();
            let proj = um.matmul(&um.transpose());
            let lp = lm.l().matmul(&proj);
            let hp = lp.transpose().matmul(&lp);
            let lm_proj = LipschitzMatrix::from_h(
                hp,
                0.0,
                crate::solvers::SolveReport {
                    status: crate::solvers::SolveStatus::Optimal,
                    iterations: 0,
                    objective: 0.0,
                    kkt_residual: 0.0,
                },
            );

            // Measured eps: mismatch of ftilde at the data points.
            let mut eps = 0.0f64;
            for j in 0..s.len() {
                let ft = crate::uncertainty::central(s.point(j), &s, &lm_proj).unwrap();
                eps = eps.max((ft - s.value(j)).abs());
            }
            // Measured delta and the sampled error over a cloud.
            let cloud = d.sample_uniform(2000, 13).unwrap();
            let mut delta = 0.0f64;
            let mut err = 0.0f64;
            for x in cloud.iter() {
                let mut nearest = f64::INFINITY;
                for j in 0..s.len() {
                    nearest = nearest.min(lm_proj.dist(x, s.point(j)));
                }
                delta = delta.max(nearest);
                let ft = crate::uncertainty::central(x, &s, &lm_proj).unwrap();
                err = err.max((f.evaluate_native(x) - ft).abs());
            }
            let bound = ridge_error_bound(&lm, &u, eps, delta, d.diameter().value);
            assert!(
                err <= bound + 1e-6,
                "direction {n_dir}: error {err} exceeds bound {bound}"
            );
        }
    }

    #[test]
    fn shadow_data_contract() {
        let points = Matrix::from_rows(3, 2, vec![0.5, 0.0, -0.25, 1.0, 0.75, -1.0]);
        let s = SampleSet::from_samples(points, vec![1.0, 2.0, 3.0]).unwrap();
        let rows = shadow_data(&[1.0, 0.0], &s).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0], (-0.25, 2.0));
        assert_eq!(rows[1], (0.5, 1.0));
        assert_eq!(rows[2], (0.75, 3.0));

        // Negating u negates projections and preserves values.
        let neg = shadow_data(&[-1.0, 0.0], &s).unwrap();
        assert_eq!(neg[0], (-0.75, 3.0));
        assert_eq!(neg[2], (0.25, 2.0));

        assert!(matches!(
            shadow_data(&[2.0, 0.0], &s),
            Err(ReductionError::NonUnitDirection(_))
        ));
    }

    #[test]
    fn principal_angles() {
        let e1 = Subspace {
            u: vec![vec![1.0], vec![0.0]],
            eigenvalues: vec![1.0, 0.0],
        };
        let e2 = Subspace {
            u: vec![vec![0.0], vec![1.0]],
            eigenvalues: vec![1.0, 0.0],
        };
        let diag = Subspace {
            u: vec![vec![1.0 / 2.0f64.sqrt()], vec![1.0 / 2.0f64.sqrt()]],
            eigenvalues: vec![1.0, 0.0],
        };
        let same = subspace_angle(&e1, &e1).unwrap();
        assert!(same[0].abs() < 1e-9);
        let perp = subspace_angle(&e1, &e2).unwrap();
        assert!((perp[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
        let mid = subspace_angle(&e1, &diag).unwrap();
        assert!((mid[0] - std::f64::consts::FRAC_PI_4).abs() < 1e-9);
    }
}
