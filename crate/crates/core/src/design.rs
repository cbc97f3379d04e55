//! Sequential maximin space-filling design in the Lipschitz metric.
//!
//! Each step places the next point at the maximizer of the minimum L-distance
//! to the existing design, the largest-empty-circle problem in the
//! transformed geometry. That is exactly the upper-side set bound on a
//! zero-valued sample set, so the minimax machinery (with its Voronoi-vertex
//! and boundary multistart) is reused directly.
//!
//! The greedy maximum-uncertainty rule is also provided, deliberately: it is
//! the documented anti-pattern that starves exactly the regions where an
//! underestimated Lipschitz matrix predicts spuriously tight bounds.

use serde::{Deserialize, Serialize};

use crate::geometry::{Domain, DomainError, PointSet};
use crate::lipschitz::{self, LipschitzMatrix, SampleSet};
use crate::solvers::SdpOptions;
use crate::uncertainty::{
    initial_candidates, minimize_max_multistart, MinimaxConfig, Piece, UncertaintyError,
};

#[derive(Debug, thiserror::Error)]
pub enum DesignError {
    #[error("design needs count >= 1")]
    EmptyDesign,
    #[error("evaluator failed at point {at:?}; partial design returned")]
    EvaluatorFailed { at: Vec<f64>, partial: Box<Design> },
    #[error(transparent)]
    Estimate(#[from] lipschitz::EstimateError),
    #[error(transparent)]
    Uncertainty(#[from] UncertaintyError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignKind {
    FixedMetric,
    Adaptive,
}

/// An ordered design with the fill-distance estimate recorded after each
/// insertion and the metric the final selection used.
#[derive(Clone, Debug)]
pub struct Design {
    pub points: PointSet,
    pub fill_trace: Vec<f64>,
    pub metric: LipschitzMatrix,
    pub mode: DesignKind,
    /// Function values at the design points (adaptive mode only).
    pub values: Option<Vec<f64>>,
}

/// How `sequential_design` obtains its metric.
pub enum DesignMode<'a> {
    /// A constant Lipschitz matrix for every step.
    FixedMetric(&'a LipschitzMatrix),
    /// Evaluate f at each new point and re-estimate the matrix every
    /// `stride` insertions (stride 1 re-estimates at each step; larger
    /// strides amortize the SDP at large M).
    Adaptive {
        evaluator: &'a dyn Fn(&[f64]) -> Option<f64>,
        stride: usize,
    },
}

/// Next maximin point and the attained minimum distance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MaximinStep {
    pub point: Vec<f64>,
    pub min_distance: f64,
}

/// argmax over x in d of min_j ||L(x - x_j)||; an empty design yields the
/// Chebyshev center. A zero metric (nothing estimated yet) degenerates the
/// objective, so the Euclidean metric substitutes in that case.
pub fn maximin_next(
    existing: &PointSet,
    lm: &LipschitzMatrix,
    d: &Domain,
    cfg: &MinimaxConfig,
) -> Result<MaximinStep, DesignError> {
    if existing.is_empty() {
        let (center, _) = d.chebyshev_center();
        return Ok(MaximinStep {
            point: center,
            min_distance: f64::INFINITY,
        });
    }
    let metric = effective_metric(lm, d.dim());
    let zero_values = vec![0.0; existing.len()];
    let s = SampleSet::from_samples(existing.matrix().clone(), zero_values)?;
    // maximize min_j r_j == -minimize max_j (-r_j)
    let pieces: Vec<Piece> = (0..s.len())
        .map(|j| Piece {
            offset: 0.0,
            terms: vec![(j, 1.0)],
        })
        .collect();
    let starts = initial_candidates(d, &s, &metric, cfg)?;
    let start_vecs: Vec<Vec<f64>> = starts.iter().map(|p| p.to_vec()).collect();
    let (neg, arg, _) = minimize_max_multistart(
        &pieces,
        s.points(),
        &metric,
        d,
        &start_vecs,
        cfg.max_outer_iter,
        cfg.step_tol,
    );
    Ok(MaximinStep {
        point: arg,
        min_distance: -neg,
    })
}

fn effective_metric(lm: &LipschitzMatrix, dim: usize) -> LipschitzMatrix {
    if lm.trace() <= 1e-14 {
        LipschitzMatrix::from_scalar(1.0, dim)
    } else {
        lm.clone()
    }
}

/// Build a design one point at a time. The first point is the Chebyshev
/// center; fixed-metric mode runs maximin under a constant L, adaptive mode
/// evaluates f at each insertion and re-estimates the matrix.
pub fn sequential_design(
    d: &Domain,
    count: usize,
    mode: DesignMode<'_>,
    cfg: &MinimaxConfig,
) -> Result<Design, DesignError> {
    if count == 0 {
        return Err(DesignError::EmptyDesign);
    }
    let dim = d.dim();
    let mut points = PointSet::new(dim);
    let mut values: Vec<f64> = Vec::new();
    let mut metric = match &mode {
        DesignMode::FixedMetric(lm) => (*lm).clone(),
        DesignMode::Adaptive { .. } => LipschitzMatrix::from_scalar(0.0, dim),
    };
    let kind = match &mode {
        DesignMode::FixedMetric(_) => DesignKind::FixedMetric,
        DesignMode::Adaptive { .. } => DesignKind::Adaptive,
    };
    let mut fill_trace: Vec<f64> = Vec::with_capacity(count);

    for k in 0..count {
        let step_cfg = cfg.derive(k as u64);
        let step = maximin_next(&points, &metric, d, &step_cfg)?;
        if k > 0 {
            // The attained maximin distance is the fill estimate of the
            // design before this insertion.
            fill_trace.push(step.min_distance);
        }
        points.push(&step.point);

        if let DesignMode::Adaptive { evaluator, stride } = &mode {
            let Some(y) = evaluator(&step.point) else {
                let partial = Design {
                    points: points.clone(),
                    fill_trace: fill_trace.clone(),
                    metric,
                    mode: kind,
                    values: Some(values.clone()),
                };
                return Err(DesignError::EvaluatorFailed {
                    at: step.point,
                    partial: Box::new(partial),
                });
            };
            values.push(y);
            let stride = (*stride).max(1);
            if points.len() >= 2 && (points.len() % stride == 0 || k + 1 == count) {
                let s = SampleSet::from_samples(points.matrix().clone(), values.clone())?;
                metric = lipschitz::estimate(&s, 0.0, &SdpOptions::default())?;
            }
        }
    }
    // Fill estimate of the completed design.
    let final_cfg = cfg.derive(count as u64);
    let last = maximin_next(&points, &metric, d, &final_cfg)?;
    fill_trace.push(last.min_distance);

    Ok(Design {
        points,
        fill_trace,
        metric,
        mode: kind,
        values: match kind {
            DesignKind::Adaptive => Some(values),
            DesignKind::FixedMetric => None,
        },
    })
}

/// Estimate of max over x in d of min_j ||L(x - x_j)||: the best of the
/// multistart maximin values, hence a lower bound on the true fill distance.
pub fn fill_distance(
    pts: &PointSet,
    lm: &LipschitzMatrix,
    d: &Domain,
    cfg: &MinimaxConfig,
) -> Result<f64, DesignError> {
    if pts.is_empty() {
        return Err(DesignError::EmptyDesign);
    }
    Ok(maximin_next(pts, lm, d, cfg)?.min_distance)
}

/// The documented anti-pattern: place the next sample where the predicted
/// uncertainty gap is largest. Fails when the metric is underestimated,
/// because regions with spuriously tight bounds are never selected.
pub fn greedy_max_uncertainty_next(
    s: &SampleSet,
    lm: &LipschitzMatrix,
    d: &Domain,
    cfg: &MinimaxConfig,
) -> Result<Vec<f64>, DesignError> {
    if s.len() == 0 {
        return Err(UncertaintyError::EmptySamples.into());
    }
    // gap(x) = min over ordered pairs (i, j) of (y_i - y_j) + r_i + r_j;
    // maximizing it is the negated min-max over the concave pieces
    // (y_j - y_i) - r_i - r_j (with the i = j piece -2 r_i).
    let mut pieces = Vec::with_capacity(s.len() * s.len());
    for i in 0..s.len() {
        for j in 0..s.len() {
            let terms = if i == j {
                vec![(i, 2.0)]
            } else {
                vec![(i, 1.0), (j, 1.0)]
            };
            pieces.push(Piece {
                offset: s.value(j) - s.value(i),
                terms,
            });
        }
    }
    let starts = initial_candidates(d, s, lm, cfg)?;
    let start_vecs: Vec<Vec<f64>> = starts.iter().map(|p| p.to_vec()).collect();
    let (_, arg, _) = minimize_max_multistart(
        &pieces,
        s.points(),
        lm,
        d,
        &start_vecs,
        cfg.max_outer_iter,
        cfg.step_tol,
    );
    Ok(arg)
}
