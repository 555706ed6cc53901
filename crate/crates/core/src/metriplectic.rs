//! Numerical metriplectic flow for arbitrary quadratic Hamiltonians.
//!
//! The coupled system integrated here is
//!
//! ```text
//! Z' = Omega grad H - G^-1 grad Gamma
//! G' = H'' Omega G - G Omega H'' + Gamma'' - G Gamma''_Omega G
//! n' = -(2 Gamma(Z) + tr(Gamma''_Omega G) / 2) n
//! ```
//!
//! with `Gamma''_Omega = Omega^T Gamma'' Omega`.
//!
//! [`integrate`] applies RK4 to these equations directly. The Jacobian of the
//! metric equation grows like `|G|`, so near a finite-time blow-up a fixed
//! step loses stability a few steps before the singularity and the reported
//! divergence time comes early. [`integrate_lifted`] advances the same system
//! through its linear lift: the doubled flow `Phi` (with `G = Phi_* G0`), the
//! complex centre `z` (with `Z = Re z - Omega G Im z`) and `ln n`. That
//! system stays smooth up to the blow-up.

use nalgebra::{Matrix2, Matrix4, Vector2};
use num_complex::Complex64;

use crate::closed_form::{metric_eigen, DoubledFlow, Metric, RealState};
use crate::error::{Error, Result};
use crate::linalg::omega;
use crate::quadratic_model::QuadraticHamiltonian;
use crate::rk4;

/// A metric eigenvalue or `|Z|` above this value is reported as divergence.
pub const BLOWUP_THRESHOLD: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetriplecticState {
    pub z: RealState,
    pub g: Metric,
    pub n: f64,
}

impl MetriplecticState {
    /// Unit-norm state at `z` with metric `g`.
    pub fn new(z: RealState, g: Metric) -> Self {
        Self { z, g, n: 1.0 }
    }

    fn to_array(self) -> [f64; 6] {
        [
            self.z.p,
            self.z.q,
            self.g.g_pp,
            self.g.g_pq,
            self.g.g_qq,
            self.n,
        ]
    }

    fn from_array(y: &[f64; 6]) -> Self {
        Self {
            z: RealState::new(y[0], y[1]),
            g: Metric::from_entries(y[2], y[3], y[4]),
            n: y[5],
        }
    }
}

/// Sampled solution. `states[k]` is the state at `times[k]`; when
/// `divergence_time` is set the samples stop before it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<MetriplecticState>,
    pub divergence_time: Option<f64>,
    /// Effective step after fitting the grid to `t_end`.
    pub step: f64,
    /// Largest `|det G - 1|` seen before the per-step renormalization.
    pub max_det_drift: f64,
}

impl Trajectory {
    pub fn last(&self) -> &MetriplecticState {
        self.states
            .last()
            .expect("trajectory holds the initial state")
    }

    pub fn diverged(&self) -> bool {
        self.divergence_time.is_some()
    }

    /// Largest metric eigenvalue over the recorded samples.
    pub fn max_g_plus(&self) -> f64 {
        self.states
            .iter()
            .map(|s| metric_eigen(&s.g).g_plus)
            .fold(0.0, f64::max)
    }
}

/// `Z' = Omega grad H - G^-1 grad Gamma`.
pub fn rhs_state(model: &QuadraticHamiltonian, z: &RealState, g: &Metric) -> Result<Vector2<f64>> {
    let zv = z.vector();
    let g_inv = g.inverse()?;
    Ok(omega() * model.grad_h(&zv) - g_inv * model.grad_gamma(&zv))
}

/// `G' = H'' Omega G - G Omega H'' + Gamma'' - G Gamma''_Omega G`.
pub fn rhs_metric(model: &QuadraticHamiltonian, g: &Metric) -> Matrix2<f64> {
    let gm = g.matrix();
    let (h, om) = (model.hess_h, omega());
    let rhs = h * om * gm - gm * om * h + model.hess_gamma - gm * model.hess_gamma_omega() * gm;
    // symmetric up to rounding; return the symmetric part
    0.5 * (rhs + rhs.transpose())
}

/// `n' = -(2 Gamma(Z) + tr(Gamma''_Omega G) / 2) n`.
pub fn rhs_norm(model: &QuadraticHamiltonian, z: &RealState, g: &Metric, n: f64) -> f64 {
    let gamma = model.gamma(&z.vector());
    let tr = (model.hess_gamma_omega() * g.matrix()).trace();
    -(2.0 * gamma + 0.5 * tr) * n
}

fn rhs_all(model: &QuadraticHamiltonian, y: &[f64; 6]) -> Option<[f64; 6]> {
    let s = MetriplecticState::from_array(y);
    let dz = rhs_state(model, &s.z, &s.g).ok()?;
    let dg = rhs_metric(model, &s.g);
    let dn = rhs_norm(model, &s.z, &s.g, s.n);
    Some([dz[0], dz[1], dg[(0, 0)], dg[(0, 1)], dg[(1, 1)], dn])
}

fn blown_up(s: &MetriplecticState) -> bool {
    let finite = s.z.is_finite() && s.g.is_finite() && s.n.is_finite();
    !finite
        || !s.g.is_positive_definite()
        || metric_eigen(&s.g).g_plus > BLOWUP_THRESHOLD
        || s.z.norm() > BLOWUP_THRESHOLD
}

/// Classical RK4 on the coupled `(Z, G, n)` system.
///
/// After every step `G` is rescaled to unit determinant. Integration stops at
/// the first step whose result is non-finite, leaves the positive-definite
/// cone, or exceeds [`BLOWUP_THRESHOLD`]; that step's end time is recorded
/// as `divergence_time`.
pub fn integrate(
    model: &QuadraticHamiltonian,
    init: &MetriplecticState,
    t_end: f64,
    step: f64,
) -> Result<Trajectory> {
    check_step(t_end, step)?;
    if !init.g.is_positive_definite() || !(init.n > 0.0) {
        return Err(Error::InvalidParameter(
            "initial metric must be positive definite and n > 0".into(),
        ));
    }
    let (steps, h) = rk4::grid(t_end, step);
    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        divergence_time: None,
        step: h,
        max_det_drift: 0.0,
    };
    traj.times.push(0.0);
    traj.states.push(*init);

    let mut y = init.to_array();
    for k in 1..=steps {
        let t = k as f64 * h;
        let mut singular = false;
        let next = rk4::step(&y, h, |y| {
            rhs_all(model, y).unwrap_or_else(|| {
                singular = true;
                [f64::NAN; 6]
            })
        });
        let raw = MetriplecticState::from_array(&next);
        if singular || blown_up(&raw) {
            traj.divergence_time = Some(t);
            break;
        }
        let det = raw.g.det();
        traj.max_det_drift = traj.max_det_drift.max((det - 1.0).abs());
        let s = det.sqrt();
        let state = MetriplecticState {
            g: Metric::from_entries(raw.g.g_pp / s, raw.g.g_pq / s, raw.g.g_qq / s),
            ..raw
        };
        y = state.to_array();
        traj.times.push(t);
        traj.states.push(state);
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy)]
struct Lift {
    phi: Matrix4<f64>,
    z: Vector2<Complex64>,
    log_n: f64,
}

impl rk4::RkState for Lift {
    fn add_scaled(&self, k: &Self, h: f64) -> Self {
        Lift {
            phi: self.phi + k.phi * h,
            z: self.z + k.z * Complex64::new(h, 0.0),
            log_n: self.log_n + h * k.log_n,
        }
    }
}

impl Lift {
    /// Real state; `None` when the Mobius denominator is singular.
    fn project(&self, g0: &Metric) -> Option<(RealState, Metric)> {
        let flow = DoubledFlow {
            time: f64::NAN,
            matrix: self.phi,
        };
        let g = flow.act(g0).ok()?;
        let re = self.z.map(|c| c.re);
        let im = self.z.map(|c| c.im);
        let zr = re - omega() * g.matrix() * im;
        Some((RealState::from_vector(&zr), g))
    }
}

/// RK4 on the linear lift of the coupled system; same output and divergence
/// rules as [`integrate`], and additionally divergent when
/// `det(Phi_qp G0 + Phi_qq)` drops below
/// [`SINGULAR_DET`](crate::closed_form::SINGULAR_DET).
///
/// A pole of `G` that touches zero between grid points without a sign change
/// of that determinant is only caught if the metric exceeds
/// [`BLOWUP_THRESHOLD`] at a grid point.
pub fn integrate_lifted(
    model: &QuadraticHamiltonian,
    init: &MetriplecticState,
    t_end: f64,
    step: f64,
) -> Result<Trajectory> {
    check_step(t_end, step)?;
    if !init.g.is_positive_definite() || !(init.n > 0.0) {
        return Err(Error::InvalidParameter(
            "initial metric must be positive definite and n > 0".into(),
        ));
    }
    let gen = DoubledFlow::generator(model);
    let om = crate::linalg::complexify(&omega());
    let g0 = init.g;
    let rhs = |y: &Lift| -> Lift {
        let dlog_n = match y.project(&g0) {
            Some((z, g)) => {
                let gamma = model.gamma(&z.vector());
                -(2.0 * gamma + 0.5 * (model.hess_gamma_omega() * g.matrix()).trace())
            }
            None => f64::NAN,
        };
        Lift {
            phi: gen * y.phi,
            z: om * model.complex_gradient(&y.z),
            log_n: dlog_n,
        }
    };

    let (steps, h) = rk4::grid(t_end, step);
    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        divergence_time: None,
        step: h,
        max_det_drift: 0.0,
    };
    traj.times.push(0.0);
    traj.states.push(*init);

    let mut y = Lift {
        phi: Matrix4::identity(),
        z: init.z.vector().map(|c| Complex64::new(c, 0.0)),
        log_n: init.n.ln(),
    };
    for k in 1..=steps {
        let t = k as f64 * h;
        y = rk4::step(&y, h, rhs);
        let raw = match y.project(&g0) {
            Some((z, g)) => MetriplecticState {
                z,
                g,
                n: y.log_n.exp(),
            },
            None => {
                traj.divergence_time = Some(t);
                break;
            }
        };
        if blown_up(&raw) {
            traj.divergence_time = Some(t);
            break;
        }
        let det = raw.g.det();
        traj.max_det_drift = traj.max_det_drift.max((det - 1.0).abs());
        let s = det.sqrt();
        traj.times.push(t);
        traj.states.push(MetriplecticState {
            g: Metric::from_entries(raw.g.g_pp / s, raw.g.g_pq / s, raw.g.g_qq / s),
            ..raw
        });
    }
    Ok(traj)
}

/// RK4 on `Phi' = Omega_4 K Phi` from the identity; one entry per grid point
/// including `t = 0`.
pub fn integrate_doubled(
    model: &QuadraticHamiltonian,
    t_end: f64,
    step: f64,
) -> Result<Vec<DoubledFlow>> {
    check_step(t_end, step)?;
    let gen = DoubledFlow::generator(model);
    let (steps, h) = rk4::grid(t_end, step);
    let mut out = Vec::with_capacity(steps + 1);
    let mut phi = Matrix4::<f64>::identity();
    out.push(DoubledFlow::identity());
    for k in 1..=steps {
        phi = rk4::step(&phi, h, |m| gen * m);
        out.push(DoubledFlow {
            time: k as f64 * h,
            matrix: phi,
        });
    }
    Ok(out)
}

fn check_step(t_end: f64, step: f64) -> Result<()> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "step must be positive, got {step}"
        )));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "t_end must be finite and non-negative, got {t_end}"
        )));
    }
    Ok(())
}
