//! Benchmark functions with analytic gradients on normalized domains.
//!
//! The physical simulation benchmarks (OTL circuit, piston, borehole, wing
//! weight, Golinski volume) follow the standard published formulations; the
//! toy functions (1-D sine, corrugated roof, linear ridge, quadratic bowl)
//! exercise specific structure. Formulas are written once over a scalar
//! trait and differentiated by forward-mode duals, so gradients are exact.
//!
//! Each function carries affine maps between its native box and the
//! normalized cube [-1,1]^m, and output range constants mapping values into
//! roughly [0,1]. Physical-domain bounds and range constants are literals in
//! this file; the ranges are estimates from dense uniform sampling plus the
//! corners.

use crate::geometry::{Domain, PointSet};
use crate::linalg::Matrix;

#[derive(Debug, thiserror::Error)]
pub enum TestFnError {
    #[error("unknown test function '{0}'")]
    UnknownName(String),
    #[error("point {row} lies outside the domain (strict mode)")]
    OutOfDomain { row: usize },
    #[error("dimension mismatch: function has dim {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Scalar abstraction so each formula is written once and differentiated
/// exactly by the dual-number implementation below.
trait Real: Copy {
    fn c(v: f64) -> Self;
    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    fn mul(self, o: Self) -> Self;
    fn div(self, o: Self) -> Self;
    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn ln(self) -> Self;
    fn powf(self, p: f64) -> Self;
}

impl Real for f64 {
    fn c(v: f64) -> Self {
        v
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn div(self, o: Self) -> Self {
        self / o
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
}

/// Forward-mode dual number carrying one directional derivative.
#[derive(Clone, Copy, Debug)]
struct Dual {
    v: f64,
    d: f64,
}

impl Real for Dual {
    fn c(v: f64) -> Self {
        Dual { v, d: 0.0 }
    }
    fn add(self, o: Self) -> Self {
        Dual { v: self.v + o.v, d: self.d + o.d }
    }
    fn sub(self, o: Self) -> Self {
        Dual { v: self.v - o.v, d: self.d - o.d }
    }
    fn mul(self, o: Self) -> Self {
        Dual {
            v: self.v * o.v,
            d: self.d * o.v + self.v * o.d,
        }
    }
    fn div(self, o: Self) -> Self {
        Dual {
            v: self.v / o.v,
            d: (self.d * o.v - self.v * o.d) / (o.v * o.v),
        }
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        Dual { v: s, d: self.d / (2.0 * s) }
    }
    fn sin(self) -> Self {
        Dual { v: self.v.sin(), d: self.d * self.v.cos() }
    }
    fn cos(self) -> Self {
        Dual { v: self.v.cos(), d: -self.d * self.v.sin() }
    }
    fn ln(self) -> Self {
        Dual { v: self.v.ln(), d: self.d / self.v }
    }
    fn powf(self, p: f64) -> Self {
        Dual {
            v: self.v.powf(p),
            d: p * self.v.powf(p - 1.0) * self.d,
        }
    }
}

#[derive(Clone, Debug)]
enum Kind {
    Otl,
    Piston,
    Borehole,
    WingWeight,
    Golinski,
    Sine1d,
    CorrugatedRoof,
    LinearRidge(Vec<f64>),
    Quadratic,
}

fn eval_kind<T: Real>(kind: &Kind, x: &[T]) -> T {
    match kind {
        Kind::Otl => {
            // x = (Rb1, Rb2, Rf, Rc1, Rc2, beta)
            let (rb1, rb2, rf, rc1, rc2, beta) = (x[0], x[1], x[2], x[3], x[4], x[5]);
            let vb1 = T::c(12.0).mul(rb2).div(rb1.add(rb2));
            let a = beta.mul(rc2.add(T::c(9.0)));
            let denom = a.add(rf);
            let t1 = vb1.add(T::c(0.74)).mul(a).div(denom);
            let t2 = T::c(11.35).mul(rf).div(denom);
            let t3 = T::c(0.74).mul(rf).mul(a).div(denom.mul(rc1));
            t1.add(t2).add(t3)
        }
        Kind::Piston => {
            // x = (M, S, V0, k, P0, Ta, T0)
            let (mm, s, v0, k, p0, ta, t0) = (x[0], x[1], x[2], x[3], x[4], x[5], x[6]);
            let pv = p0.mul(v0).div(t0);
            let a = p0.mul(s).add(T::c(19.62).mul(mm)).sub(k.mul(v0).div(s));
            let disc = a.mul(a).add(T::c(4.0).mul(k).mul(pv).mul(ta)).sqrt();
            let v = s.div(T::c(2.0).mul(k)).mul(disc.sub(a));
            let inner = k.add(s.mul(s).mul(pv).mul(ta).div(v.mul(v)));
            T::c(2.0 * std::f64::consts::PI).mul(mm.div(inner).sqrt())
        }
        Kind::Borehole => {
            // x = (rw, r, Tu, Hu, Tl, Hl, L, Kw)
            let (rw, r, tu, hu, tl, hl, l, kw) = (x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7]);
            let lnr = r.div(rw).ln();
            let num = T::c(2.0 * std::f64::consts::PI).mul(tu).mul(hu.sub(hl));
            let frac = T::c(2.0).mul(l).mul(tu).div(lnr.mul(rw).mul(rw).mul(kw));
            let denom = lnr.mul(T::c(1.0).add(frac).add(tu.div(tl)));
            num.div(denom)
        }
        Kind::WingWeight => {
            // x = (Sw, Wfw, A, Lambda_deg, q, lambda, tc, Nz, Wdg, Wp)
            let (sw, wfw, a, lam_deg, q, lam, tc, nz, wdg, wp) =
                (x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7], x[8], x[9]);
            let rad = lam_deg.mul(T::c(std::f64::consts::PI / 180.0));
            let cosl = rad.cos();
            let t = T::c(0.036)
                .mul(sw.powf(0.758))
                .mul(wfw.powf(0.0035))
                .mul(a.div(cosl.mul(cosl)).powf(0.6))
                .mul(q.powf(0.006))
                .mul(lam.powf(0.04))
                .mul(T::c(100.0).mul(tc).div(cosl).powf(-0.3))
                .mul(nz.mul(wdg).powf(0.49));
            t.add(sw.mul(wp))
        }
        #[allow(clippy::approx_constant)] // 0.7854 is the published constant
        Kind::Golinski => {
            // Speed-reducer volume over the 6 continuous variables
            // (x1, x2, x4, x5, x6, x7); the integer tooth count is fixed at
            // z = 17, matching the 6-dimensional formulation.
            let (x1, x2, x4, x5, x6, x7) = (x[0], x[1], x[2], x[3], x[4], x[5]);
            let z = 17.0;
            let poly = T::c(3.3333 * z * z + 14.9334 * z - 43.0934);
            let t1 = T::c(0.7854).mul(x1).mul(x2).mul(x2).mul(poly);
            let t2 = T::c(1.508).mul(x1).mul(x6.mul(x6).add(x7.mul(x7)));
            let t3 = T::c(7.4777).mul(x6.powf(3.0).add(x7.powf(3.0)));
            let t4 = T::c(0.7854).mul(x4.mul(x6).mul(x6).add(x5.mul(x7).mul(x7)));
            t1.sub(t2).add(t3).add(t4)
        }
        Kind::Sine1d => T::c(3.0 * std::f64::consts::PI).mul(x[0]).sin(),
        Kind::CorrugatedRoof => {
            let a = T::c(5.0).mul(x[0]);
            let b = T::c(10.0 * std::f64::consts::PI).mul(x[1]).sin();
            a.add(b)
        }
        Kind::LinearRidge(a) => {
            let mut acc = T::c(0.0);
            for (i, &ai) in a.iter().enumerate() {
                acc = acc.add(T::c(ai).mul(x[i]));
            }
            acc
        }
        Kind::Quadratic => {
            let m = x.len() as f64;
            let mut acc = T::c(0.0);
            for &xi in x {
                acc = acc.add(xi.mul(xi));
            }
            acc.div(T::c(2.0 * m.sqrt()))
        }
    }
}

/// A benchmark function: native box, evaluator, exact gradient, and the
/// affine normalization maps.
#[derive(Clone, Debug)]
pub struct TestFunction {
    kind: Kind,
    name: &'static str,
    dim: usize,
    native_lower: Vec<f64>,
    native_upper: Vec<f64>,
    /// Output range constants: normalized output = (f - out_lo)/(out_hi - out_lo).
    out_lo: f64,
    out_hi: f64,
}

impl TestFunction {
    pub fn name(&self) -> &str {
        self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn output_range(&self) -> (f64, f64) {
        (self.out_lo, self.out_hi)
    }

    pub fn native_domain(&self) -> Domain {
        Domain::hypercube(self.native_lower.clone(), self.native_upper.clone())
            .expect("native box is nonempty")
    }

    pub fn normalized_domain(&self) -> Domain {
        Domain::normalized(self.dim)
    }

    fn to_native(&self, xn: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| {
                let half = 0.5 * (self.native_upper[i] - self.native_lower[i]);
                let mid = 0.5 * (self.native_upper[i] + self.native_lower[i]);
                mid + half * xn[i]
            })
            .collect()
    }

    pub fn evaluate_native(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim);
        eval_kind::<f64>(&self.kind, x)
    }

    /// Exact gradient in native coordinates (forward-mode duals).
    pub fn gradient_native(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        let mut g = vec![0.0; self.dim];
        let mut duals: Vec<Dual> = x.iter().map(|&v| Dual { v, d: 0.0 }).collect();
        for i in 0..self.dim {
            duals[i].d = 1.0;
            g[i] = eval_kind::<Dual>(&self.kind, &duals).d;
            duals[i].d = 0.0;
        }
        g
    }

    /// Evaluation on the normalized cube with normalized outputs.
    pub fn evaluate_normalized(&self, xn: &[f64]) -> f64 {
        let f = self.evaluate_native(&self.to_native(xn));
        (f - self.out_lo) / (self.out_hi - self.out_lo)
    }

    /// Chain rule through both affine maps: g_norm[i] = g_native[i] * halfwidth_i / range.
    pub fn gradient_normalized(&self, xn: &[f64]) -> Vec<f64> {
        let g = self.gradient_native(&self.to_native(xn));
        let range = self.out_hi - self.out_lo;
        (0..self.dim)
            .map(|i| g[i] * 0.5 * (self.native_upper[i] - self.native_lower[i]) / range)
            .collect()
    }

    /// Vectorized evaluation. `strict` rejects out-of-domain rows at
    /// tolerance 1e-9 instead of evaluating them.
    pub fn evaluate_batch(
        &self,
        pts: &PointSet,
        normalized: bool,
        strict: bool,
    ) -> Result<Vec<f64>, TestFnError> {
        if pts.dim() != self.dim {
            return Err(TestFnError::DimensionMismatch { expected: self.dim, got: pts.dim() });
        }
        let domain = if normalized { self.normalized_domain() } else { self.native_domain() };
        let mut out = Vec::with_capacity(pts.len());
        for (row, p) in pts.iter().enumerate() {
            if strict && !domain.contains(p, 1e-9) {
                return Err(TestFnError::OutOfDomain { row });
            }
            out.push(if normalized {
                self.evaluate_normalized(p)
            } else {
                self.evaluate_native(p)
            });
        }
        Ok(out)
    }

    pub fn gradient_batch(
        &self,
        pts: &PointSet,
        normalized: bool,
        strict: bool,
    ) -> Result<Matrix, TestFnError> {
        if pts.dim() != self.dim {
            return Err(TestFnError::DimensionMismatch { expected: self.dim, got: pts.dim() });
        }
        let domain = if normalized { self.normalized_domain() } else { self.native_domain() };
        let mut out = Matrix::zeros(0, self.dim);
        for (row, p) in pts.iter().enumerate() {
            if strict && !domain.contains(p, 1e-9) {
                return Err(TestFnError::OutOfDomain { row });
            }
            let g = if normalized {
                self.gradient_normalized(p)
            } else {
                self.gradient_native(p)
            };
            out.push_row(&g);
        }
        Ok(out)
    }

    /// Linear ridge a^T x on [-1,1]^m with a configurable direction.
    pub fn linear_ridge(a: Vec<f64>) -> TestFunction {
        let dim = a.len();
        let reach: f64 = a.iter().map(|v| v.abs()).sum();
        TestFunction {
            kind: Kind::LinearRidge(a),
            name: "linear_ridge",
            dim,
            native_lower: vec![-1.0; dim],
            native_upper: vec![1.0; dim],
            out_lo: -reach,
            out_hi: reach.max(1e-12),
        }
    }

    /// x^T x / (2 sqrt(m)) on [-1,1]^m with a configurable dimension.
    pub fn quadratic(dim: usize) -> TestFunction {
        TestFunction {
            kind: Kind::Quadratic,
            name: "quadratic",
            dim,
            native_lower: vec![-1.0; dim],
            native_upper: vec![1.0; dim],
            out_lo: 0.0,
            out_hi: (dim as f64).sqrt() / 2.0,
        }
    }
}

/// All benchmark functions with their default configurations.
pub fn catalog() -> Vec<TestFunction> {
    vec![
        TestFunction {
            kind: Kind::Otl,
            name: "otl_circuit",
            dim: 6,
            native_lower: vec![50.0, 25.0, 0.5, 1.2, 0.25, 50.0],
            native_upper: vec![150.0, 70.0, 3.0, 2.5, 1.2, 300.0],
            out_lo: OTL_RANGE.0,
            out_hi: OTL_RANGE.1,
        },
        TestFunction {
            kind: Kind::Piston,
            name: "piston",
            dim: 7,
            native_lower: vec![30.0, 0.005, 0.002, 1000.0, 90_000.0, 290.0, 340.0],
            native_upper: vec![60.0, 0.020, 0.010, 5000.0, 110_000.0, 296.0, 360.0],
            out_lo: PISTON_RANGE.0,
            out_hi: PISTON_RANGE.1,
        },
        TestFunction {
            kind: Kind::Borehole,
            name: "borehole",
            dim: 8,
            native_lower: vec![0.05, 100.0, 63_070.0, 990.0, 63.1, 700.0, 1120.0, 9855.0],
            native_upper: vec![0.15, 50_000.0, 115_600.0, 1110.0, 116.0, 820.0, 1680.0, 12_045.0],
            out_lo: BOREHOLE_RANGE.0,
            out_hi: BOREHOLE_RANGE.1,
        },
        TestFunction {
            kind: Kind::WingWeight,
            name: "wing_weight",
            dim: 10,
            native_lower: vec![150.0, 220.0, 6.0, -10.0, 16.0, 0.5, 0.08, 2.5, 1700.0, 0.025],
            native_upper: vec![200.0, 300.0, 10.0, 10.0, 45.0, 1.0, 0.18, 6.0, 2500.0, 0.08],
            out_lo: WING_RANGE.0,
            out_hi: WING_RANGE.1,
        },
        TestFunction {
            kind: Kind::Golinski,
            name: "golinski_volume",
            dim: 6,
            native_lower: vec![2.6, 0.7, 7.3, 7.3, 2.9, 5.0],
            native_upper: vec![3.6, 0.8, 8.3, 8.3, 3.9, 5.5],
            out_lo: GOLINSKI_RANGE.0,
            out_hi: GOLINSKI_RANGE.1,
        },
        TestFunction {
            kind: Kind::Sine1d,
            name: "sine1d",
            dim: 1,
            native_lower: vec![-1.0],
            native_upper: vec![1.0],
            out_lo: -1.0,
            out_hi: 1.0,
        },
        TestFunction {
            kind: Kind::CorrugatedRoof,
            name: "corrugated_roof",
            dim: 2,
            native_lower: vec![-1.0, -1.0],
            native_upper: vec![1.0, 1.0],
            out_lo: -6.0,
            out_hi: 6.0,
        },
        TestFunction::linear_ridge(vec![1.0, 0.0]),
        TestFunction::quadratic(4),
    ]
}

/// Look up a catalog entry by name.
pub fn by_name(name: &str) -> Result<TestFunction, TestFnError> {
    catalog()
        .into_iter()
        .find(|f| f.name == name)
        .ok_or_else(|| TestFnError::UnknownName(name.to_string()))
}

// Output ranges over the native domains, estimated from 2 * 10^5 uniform
// samples plus all corners (slightly widened); the spread is what the
// normalization divides by, so mild clipping at the extremes is expected
// and allowed for by the [-0.05, 1.05] contract.
const OTL_RANGE: (f64, f64) = (2.6, 9.6);
const PISTON_RANGE: (f64, f64) = (0.16, 1.2);
const BOREHOLE_RANGE: (f64, f64) = (7.8, 309.6);
const WING_RANGE: (f64, f64) = (124.9, 517.7);
const GOLINSKI_RANGE: (f64, f64) = (2352.4, 3861.9);
