//! Analytic solutions of the Swanson oscillator: doubled-phase-space
//! propagator, metric, trajectories and survival probability.
//!
//! Every function here is exact for the Swanson model. The general quadratic
//! case is handled numerically in [`crate::metriplectic`].

use nalgebra::{Matrix2, Matrix4, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{omega, omega4};
use crate::quadratic_model::{swanson_hamiltonian, QuadraticHamiltonian, SwansonParams};

/// `Phi_qp G0 + Phi_qq` is treated as singular below this determinant.
pub const SINGULAR_DET: f64 = 1e-12;

/// Real phase-space point `Z = (P, Q)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RealState {
    pub p: f64,
    pub q: f64,
}

impl RealState {
    pub fn new(p: f64, q: f64) -> Self {
        Self { p, q }
    }

    pub fn vector(&self) -> Vector2<f64> {
        Vector2::new(self.p, self.q)
    }

    pub fn from_vector(v: &Vector2<f64>) -> Self {
        Self { p: v[0], q: v[1] }
    }

    pub fn norm(&self) -> f64 {
        self.p.hypot(self.q)
    }

    pub fn is_finite(&self) -> bool {
        self.p.is_finite() && self.q.is_finite()
    }
}

/// Complex phase-space point `z = (p, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexState {
    pub p: Complex64,
    pub q: Complex64,
}

impl ComplexState {
    pub fn new(p: Complex64, q: Complex64) -> Self {
        Self { p, q }
    }

    pub fn vector(&self) -> Vector2<Complex64> {
        Vector2::new(self.p, self.q)
    }

    pub fn from_vector(v: &Vector2<Complex64>) -> Self {
        Self { p: v[0], q: v[1] }
    }

    pub fn re(&self) -> Vector2<f64> {
        Vector2::new(self.p.re, self.q.re)
    }

    pub fn im(&self) -> Vector2<f64> {
        Vector2::new(self.p.im, self.q.im)
    }
}

impl From<RealState> for ComplexState {
    fn from(z: RealState) -> Self {
        Self {
            p: Complex64::new(z.p, 0.0),
            q: Complex64::new(z.q, 0.0),
        }
    }
}

/// Symmetric determinant-one phase-space metric, ordering `(p, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub g_pp: f64,
    pub g_pq: f64,
    pub g_qq: f64,
}

impl Metric {
    pub const IDENTITY: Metric = Metric {
        g_pp: 1.0,
        g_pq: 0.0,
        g_qq: 1.0,
    };

    /// Validated constructor: positive definite with `|det - 1| <= 1e-8`.
    pub fn new(g_pp: f64, g_pq: f64, g_qq: f64) -> Result<Self> {
        let m = Self { g_pp, g_pq, g_qq };
        if !m.is_finite() || !m.is_positive_definite() {
            return Err(Error::InvalidParameter(format!(
                "metric must be finite and positive definite: {m:?}"
            )));
        }
        let det = m.det();
        if (det - 1.0).abs() > 1e-8 * (g_pp * g_qq).abs().max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "metric determinant must be one, got {det}"
            )));
        }
        Ok(m)
    }

    /// Symmetrizes `m` and rescales it to unit determinant.
    pub fn normalized(m: &Matrix2<f64>) -> Result<Self> {
        let off = 0.5 * (m[(0, 1)] + m[(1, 0)]);
        let raw = Self::from_entries(m[(0, 0)], off, m[(1, 1)]);
        if !raw.is_finite() || !raw.is_positive_definite() {
            return Err(Error::SingularMetric { det: raw.det() });
        }
        let s = raw.det().sqrt();
        Ok(Self::from_entries(raw.g_pp / s, raw.g_pq / s, raw.g_qq / s))
    }

    /// `diag(a, 1/a)`.
    pub fn squeezed(a: f64) -> Result<Self> {
        Self::new(a, 0.0, 1.0 / a)
    }

    pub(crate) fn from_entries(g_pp: f64, g_pq: f64, g_qq: f64) -> Self {
        Self { g_pp, g_pq, g_qq }
    }

    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.g_pp, self.g_pq, self.g_pq, self.g_qq)
    }

    pub fn det(&self) -> f64 {
        self.g_pp * self.g_qq - self.g_pq * self.g_pq
    }

    pub fn trace(&self) -> f64 {
        self.g_pp + self.g_qq
    }

    pub fn is_finite(&self) -> bool {
        self.g_pp.is_finite() && self.g_pq.is_finite() && self.g_qq.is_finite()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.g_pp > 0.0 && self.det() > 0.0
    }

    /// Inverse via the adjugate; fails when `|det|` is below [`SINGULAR_DET`].
    pub fn inverse(&self) -> Result<Matrix2<f64>> {
        let det = self.det();
        if det.abs() < SINGULAR_DET || !det.is_finite() {
            return Err(Error::SingularMetric { det });
        }
        Ok(Matrix2::new(self.g_qq, -self.g_pq, -self.g_pq, self.g_pp) / det)
    }

    /// Largest entry of `|G Omega G - Omega|`.
    pub fn symplectic_defect(&self) -> f64 {
        let g = self.matrix();
        (g * omega() * g - omega()).abs().max()
    }

    pub fn max_abs_diff(&self, other: &Metric) -> f64 {
        (self.g_pp - other.g_pp)
            .abs()
            .max((self.g_pq - other.g_pq).abs())
            .max((self.g_qq - other.g_qq).abs())
    }
}

/// Solution `Phi(t)` of `Phi' = Omega_4 K Phi`, `Phi(0) = I_4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubledFlow {
    pub time: f64,
    pub matrix: Matrix4<f64>,
}

impl DoubledFlow {
    pub fn identity() -> Self {
        Self {
            time: 0.0,
            matrix: Matrix4::identity(),
        }
    }

    /// Generator `Omega_4 K` with `K = [[Gamma''_Omega, Omega H''], [-H'' Omega, -Gamma'']]`.
    pub fn generator(model: &QuadraticHamiltonian) -> Matrix4<f64> {
        let om = omega();
        let mut k = Matrix4::zeros();
        k.fixed_view_mut::<2, 2>(0, 0)
            .copy_from(&model.hess_gamma_omega());
        k.fixed_view_mut::<2, 2>(0, 2)
            .copy_from(&(om * model.hess_h));
        k.fixed_view_mut::<2, 2>(2, 0)
            .copy_from(&(-model.hess_h * om));
        k.fixed_view_mut::<2, 2>(2, 2)
            .copy_from(&(-model.hess_gamma));
        omega4() * k
    }

    pub fn pp(&self) -> Matrix2<f64> {
        self.matrix.fixed_view::<2, 2>(0, 0).into_owned()
    }

    pub fn pq(&self) -> Matrix2<f64> {
        self.matrix.fixed_view::<2, 2>(0, 2).into_owned()
    }

    pub fn qp(&self) -> Matrix2<f64> {
        self.matrix.fixed_view::<2, 2>(2, 0).into_owned()
    }

    pub fn qq(&self) -> Matrix2<f64> {
        self.matrix.fixed_view::<2, 2>(2, 2).into_owned()
    }

    /// Fractional-linear action
    /// `(Phi_pp G0 + Phi_pq)(Phi_qp G0 + Phi_qq)^-1`.
    ///
    /// Divergent when `det(Phi_qp G0 + Phi_qq) < SINGULAR_DET`; a negative
    /// determinant means the image lies on the negative-definite sheet.
    pub fn act(&self, g0: &Metric) -> Result<Metric> {
        let g0 = g0.matrix();
        let x = self.pp() * g0 + self.pq();
        let y = self.qp() * g0 + self.qq();
        let det = y.determinant();
        if !(det >= SINGULAR_DET) {
            return Err(Error::Divergent { time: self.time });
        }
        let y_inv = Matrix2::new(y[(1, 1)], -y[(0, 1)], -y[(1, 0)], y[(0, 0)]) / det;
        let g = x * y_inv;
        Ok(Metric::from_entries(
            g[(0, 0)],
            0.5 * (g[(0, 1)] + g[(1, 0)]),
            g[(1, 1)],
        ))
    }
}

/// `Phi(t) = cos(wt) I_4 + sin(wt)/w Omega_4 K`, using `(Omega_4 K)^2 = -w^2 I_4`.
pub fn doubled_flow(params: &SwansonParams, t: f64) -> DoubledFlow {
    let w = params.omega();
    let gen = DoubledFlow::generator(&swanson_hamiltonian(params));
    let (s, c) = (w * t).sin_cos();
    DoubledFlow {
        time: t,
        matrix: Matrix4::identity() * c + gen * (s / w),
    }
}

/// Metric at time `t` from an arbitrary initial metric.
pub fn metric_closed(params: &SwansonParams, g0: &Metric, t: f64) -> Result<Metric> {
    doubled_flow(params, t).act(g0)
}

/// `d(t) = 1 / (1 - (delta/omega)^2 (1 - cos 2wt))` for G(0) = I.
pub fn d_factor(params: &SwansonParams, t: f64) -> Result<f64> {
    let w = params.omega();
    let r = params.delta() / w;
    let s = (w * t).sin();
    // 1 - cos 2wt = 2 sin^2 wt
    let denom = 1.0 - 2.0 * r * r * s * s;
    if denom <= SINGULAR_DET {
        return Err(Error::Divergent { time: t });
    }
    Ok(1.0 / denom)
}

/// First time at which `d(t)` blows up for `G(0) = I`, if any.
///
/// A pole exists iff `delta^2 >= omega0^2`, at
/// `t* = arccos(1 - omega^2/delta^2) / (2 omega)`.
pub fn first_divergence_time(params: &SwansonParams) -> Option<f64> {
    let (w0, d) = (params.omega0(), params.delta());
    if d * d < w0 * w0 {
        return None;
    }
    let w = params.omega();
    let c = (1.0 - w * w / (d * d)).clamp(-1.0, 1.0);
    Some(c.acos() / (2.0 * w))
}

/// Solution of the complexified canonical equations
/// `p' = i delta p - w0 q`, `q' = w0 p - i delta q`.
pub fn complex_trajectory(params: &SwansonParams, z0: &ComplexState, t: f64) -> ComplexState {
    let (w0, d, w) = (params.omega0(), params.delta(), params.omega());
    let (s, c) = (w * t).sin_cos();
    let i_d = Complex64::new(0.0, d);
    ComplexState {
        p: z0.p * c + (-z0.q * w0 + i_d * z0.p) * (s / w),
        q: z0.q * c + (z0.p * w0 - i_d * z0.q) * (s / w),
    }
}

/// Expectation-value trajectory for `G(0) = I`.
///
/// Only valid for the identity initial metric; other metrics go through
/// [`crate::metriplectic::integrate`] or the Gaussian projection pipeline.
pub fn real_trajectory(params: &SwansonParams, z0: &RealState, t: f64) -> Result<RealState> {
    let d = d_factor(params, t)?;
    let (w0, dl, w) = (params.omega0(), params.delta(), params.omega());
    let (s, c) = (w * t).sin_cos();
    Ok(RealState {
        p: d * (z0.p * c - z0.q / w * (w0 + dl) * s),
        q: d * (z0.q * c + z0.p / w * (w0 - dl) * s),
    })
}

/// Survival probability `n(t)` for `G(0) = I`, `n(0) = 1`.
pub fn survival_closed(params: &SwansonParams, z0: &RealState, t: f64) -> Result<f64> {
    let d = d_factor(params, t)?;
    let (w0, dl, w) = (params.omega0(), params.delta(), params.omega());
    let (p0, q0) = (z0.p, z0.q);
    let one_minus_cos = 2.0 * (w * t).sin().powi(2);
    let sin2 = (2.0 * w * t).sin();
    let bracket =
        ((dl - w0) * p0 * p0 + (dl + w0) * q0 * q0) * one_minus_cos - 2.0 * w * p0 * q0 * sin2;
    Ok(d.sqrt() * (dl * d / (2.0 * w * w) * bracket).exp())
}

/// Eigen-frame of a metric: principal uncertainties and rotation angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricEigen {
    pub g_plus: f64,
    pub g_minus: f64,
    /// `phi = atan2(2 g_pq, g_pp - g_qq) / 2`; zero for isotropic metrics.
    pub phi: f64,
}

pub fn metric_eigen(g: &Metric) -> MetricEigen {
    let tr = g.trace();
    let det = g.det();
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    let g_plus = 0.5 * (tr + disc);
    // det / g_plus avoids the cancellation in (tr - disc) / 2
    let g_minus = if g_plus != 0.0 { det / g_plus } else { 0.0 };
    let (num, den) = (2.0 * g.g_pq, g.g_pp - g.g_qq);
    let phi = if num.abs() + den.abs() <= 1e-14 * tr.abs().max(1.0) {
        0.0
    } else {
        0.5 * num.atan2(den)
    };
    MetricEigen {
        g_plus,
        g_minus,
        phi,
    }
}
