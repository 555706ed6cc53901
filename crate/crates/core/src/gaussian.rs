//! Exact propagation of Gaussian wave packets under complex quadratic
//! Hamiltonians.
//!
//! A state is `psi(x) = (Im B / pi)^{1/4} e^{i gamma} e^{i [p (x - q) + B (x - q)^2 / 2]}`
//! with complex centre `z = (p, q)`, uncertainty parameter `B` and complex
//! phase `gamma`. Under `H - i Gamma` the centre follows the complexified
//! canonical equations, `z(t) = S(t) z0`, the uncertainty parameter follows
//! the Riccati equation, solved by the Mobius action `B(t) = S(t)_* B0`, and
//! the phase (which carries the norm) is a quadrature along the solution.

use std::f64::consts::PI;
use std::ops::Mul;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::closed_form::{ComplexState, Metric, RealState};
use crate::error::{Error, Result};
use crate::linalg::{complexify, exp_traceless, omega};
use crate::quadratic_model::{spectral_data, QuadraticHamiltonian, SwansonParams};
use crate::rk4;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative size of the Mobius denominator below which it counts as a pole.
pub const POLE_TOLERANCE: f64 = 1e-12;

/// Intervals used by the phase quadrature in [`propagate`].
pub const PHASE_STEPS: usize = 2048;

/// Complex uncertainty parameter. `Im B > 0` is required for a normalizable
/// state; other values are representable but flagged by the operations that
/// need normalizability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyB(pub Complex64);

impl UncertaintyB {
    pub fn new(re: f64, im: f64) -> Self {
        Self(Complex64::new(re, im))
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }

    pub fn is_normalizable(&self) -> bool {
        self.0.im > 0.0 && self.0.is_finite()
    }

    fn require_normalizable(&self) -> Result<()> {
        if self.is_normalizable() {
            Ok(())
        } else {
            Err(Error::NonNormalizable { im_b: self.0.im })
        }
    }
}

/// `G = (1/Im B) [[1, -Re B], [-Re B, |B|^2]]`.
pub fn metric_from_b(b: &UncertaintyB) -> Result<Metric> {
    b.require_normalizable()?;
    let (re, im) = (b.0.re, b.0.im);
    Ok(Metric::from_entries(
        1.0 / im,
        -re / im,
        (re * re + im * im) / im,
    ))
}

/// Inverse of [`metric_from_b`]: `B = (-g_pq + i) / g_pp`.
pub fn b_from_metric(g: &Metric) -> UncertaintyB {
    UncertaintyB(Complex64::new(-g.g_pq, 1.0) / g.g_pp)
}

/// Complex 2x2 symplectic matrix acting on `(p, q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexSymplectic(pub Matrix2<Complex64>);

impl ComplexSymplectic {
    pub fn identity() -> Self {
        Self(Matrix2::identity())
    }

    pub fn pp(&self) -> Complex64 {
        self.0[(0, 0)]
    }

    pub fn pq(&self) -> Complex64 {
        self.0[(0, 1)]
    }

    pub fn qp(&self) -> Complex64 {
        self.0[(1, 0)]
    }

    pub fn qq(&self) -> Complex64 {
        self.0[(1, 1)]
    }

    pub fn apply(&self, z: &ComplexState) -> ComplexState {
        ComplexState::from_vector(&(self.0 * z.vector()))
    }

    /// Mobius action `(S_pp B + S_pq) / (S_qp B + S_qq)`.
    pub fn mobius(&self, b: &UncertaintyB) -> Result<UncertaintyB> {
        let num = self.pp() * b.0 + self.pq();
        let den = self.qp() * b.0 + self.qq();
        let scale = (self.qp() * b.0).norm().max(self.qq().norm()).max(1.0);
        if den.norm() <= POLE_TOLERANCE * scale {
            return Err(Error::Pole {
                from: f64::NAN,
                to: f64::NAN,
            });
        }
        Ok(UncertaintyB(num / den))
    }

    /// Largest entry of `|S^T Omega S - Omega|`.
    pub fn symplectic_defect(&self) -> f64 {
        let om = complexify(&omega());
        (self.0.transpose() * om * self.0 - om)
            .map(|z| z.norm())
            .max()
    }
}

/// True when the segment from `a` to `b` passes within
/// `POLE_TOLERANCE * max(|a|, |b|)` of the origin.
fn segment_hits_zero(a: Complex64, b: Complex64) -> bool {
    let d = b - a;
    let len2 = d.norm_sqr();
    let s = if len2 > 0.0 {
        (-(a.re * d.re + a.im * d.im) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (a + d * s).norm() <= POLE_TOLERANCE * a.norm().max(b.norm())
}

impl ComplexSymplectic {
    /// Mobius denominator `S_qp B + S_qq`.
    pub fn denominator(&self, b: &UncertaintyB) -> Complex64 {
        self.qp() * b.0 + self.qq()
    }
}

impl Mul for ComplexSymplectic {
    type Output = ComplexSymplectic;

    fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0)
    }
}

/// `S(t)` solving `S' = Omega (H'' - i Gamma'') S`, `S(0) = I`.
///
/// The generator is traceless, so the exponential has a closed form.
pub fn complex_symplectic_flow(model: &QuadraticHamiltonian, t: f64) -> ComplexSymplectic {
    let gen = complexify(&omega()) * model.complex_hessian();
    ComplexSymplectic(exp_traceless(&gen, t))
}

/// Mobius evolution of the uncertainty parameter.
pub fn evolve_b(model: &QuadraticHamiltonian, b0: &UncertaintyB, t: f64) -> Result<UncertaintyB> {
    complex_symplectic_flow(model, t)
        .mobius(b0)
        .map_err(|_| Error::Pole { from: t, to: t })
}

/// Riccati right-hand side `-H_pp B^2 - 2 H_pq B - H_qq`.
pub fn riccati_rhs(model: &QuadraticHamiltonian, b: Complex64) -> Complex64 {
    let h = model.complex_hessian();
    -h[(0, 0)] * b * b - 2.0 * h[(0, 1)] * b - h[(1, 1)]
}

/// Direct RK4 integration of the Riccati equation; one sample per grid point.
///
/// Fails with [`Error::Pole`] when `|B|` exceeds `1e8` or becomes non-finite.
pub fn integrate_riccati(
    model: &QuadraticHamiltonian,
    b0: &UncertaintyB,
    t_end: f64,
    step: f64,
) -> Result<Vec<(f64, UncertaintyB)>> {
    if !(step > 0.0) || !(t_end >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need step > 0 and t_end >= 0, got step = {step}, t_end = {t_end}"
        )));
    }
    let (steps, h) = rk4::grid(t_end, step);
    let mut out = Vec::with_capacity(steps + 1);
    let mut b = b0.0;
    out.push((0.0, *b0));
    for k in 1..=steps {
        b = rk4::step(&b, h, |b| riccati_rhs(model, *b));
        let t = k as f64 * h;
        if !b.is_finite() || b.norm() > 1e8 {
            return Err(Error::Pole { from: t - h, to: t });
        }
        out.push((t, UncertaintyB(b)));
    }
    Ok(out)
}

/// First event that ends a sampled Mobius path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathEvent {
    /// The Mobius denominator vanished in `[from, to]`.
    Pole { from: f64, to: f64 },
    /// `Im B` became non-positive in `(from, to]`: the state left L2 and one
    /// metric eigenvalue passed through infinity.
    LeftL2 { from: f64, to: f64 },
}

/// Uniformly sampled `B(t)`, truncated at the first [`PathEvent`].
#[derive(Debug, Clone, PartialEq)]
pub struct BPath {
    pub times: Vec<f64>,
    pub values: Vec<UncertaintyB>,
    pub event: Option<PathEvent>,
}

/// Samples `B(t) = S(t)_* B0` at `samples + 1` equidistant times on `[0, t_end]`.
///
/// A pole is reported when the Mobius denominator vanishes at a sample or
/// its linear interpolant crosses zero between two samples.
pub fn evolve_b_path(
    model: &QuadraticHamiltonian,
    b0: &UncertaintyB,
    t_end: f64,
    samples: usize,
) -> BPath {
    let samples = samples.max(1);
    let dt = t_end / samples as f64;
    let mut path = BPath {
        times: vec![0.0],
        values: vec![*b0],
        event: None,
    };
    let mut den = Complex64::new(1.0, 0.0);
    for k in 1..=samples {
        let t = k as f64 * dt;
        let s = complex_symplectic_flow(model, t);
        let next = s.denominator(b0);
        if segment_hits_zero(den, next) {
            path.event = Some(PathEvent::Pole {
                from: t - dt,
                to: t,
            });
            break;
        }
        den = next;
        match s.mobius(b0) {
            Err(_) => {
                path.event = Some(PathEvent::Pole {
                    from: t - dt,
                    to: (t + dt).min(t_end),
                });
                break;
            }
            Ok(b) if !b.is_normalizable() => {
                path.event = Some(PathEvent::LeftL2 {
                    from: t - dt,
                    to: t,
                });
                break;
            }
            Ok(b) => {
                path.times.push(t);
                path.values.push(b);
            }
        }
    }
    path
}

/// Real expectation values `Z = Re z - Omega G Im z`, `G = G(B)`.
pub fn project_expectations(z: &ComplexState, b: &UncertaintyB) -> Result<RealState> {
    let g = metric_from_b(b)?;
    let zr = z.re() - omega() * g.matrix() * z.im();
    Ok(RealState::from_vector(&zr))
}

/// Gaussian wave packet with complex centre, uncertainty parameter and phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState {
    pub center: ComplexState,
    pub b: UncertaintyB,
    pub gamma: Complex64,
}

impl GaussianState {
    /// Unit-norm packet centred at a real phase-space point.
    pub fn new(z: RealState, b: UncertaintyB) -> Self {
        Self {
            center: z.into(),
            b,
            gamma: Complex64::new(0.0, 0.0),
        }
    }

    pub fn metric(&self) -> Result<Metric> {
        metric_from_b(&self.b)
    }

    pub fn expectation(&self) -> Result<RealState> {
        project_expectations(&self.center, &self.b)
    }

    /// Survival probability `||psi||^2`.
    pub fn norm(&self) -> Result<f64> {
        gaussian_norm(self)
    }

    /// The same wave function written with its real expectation values as
    /// centre. Points `z + lambda (B, 1)` describe one state; the phase picks
    /// up the difference of the constant terms.
    pub fn with_real_center(&self) -> Result<Self> {
        let z = self.expectation()?;
        let b = self.b.0;
        let (p, q) = (self.center.p, self.center.q);
        let (pr, qr) = (Complex64::new(z.p, 0.0), Complex64::new(z.q, 0.0));
        let gamma = self.gamma - p * q + 0.5 * b * q * q + pr * qr - 0.5 * b * qr * qr;
        Ok(Self {
            center: z.into(),
            b: self.b,
            gamma,
        })
    }
}

/// Closed Gaussian integral of `|psi|^2`, including complex-centre terms.
pub fn gaussian_norm(state: &GaussianState) -> Result<f64> {
    state.b.require_normalizable()?;
    let (br, bi) = (state.b.0.re, state.b.0.im);
    let (pr, pi) = (state.center.p.re, state.center.p.im);
    let qi = state.center.q.im;
    let lin = pi - br * qi;
    Ok((-2.0 * state.gamma.im + 2.0 * pr * qi + bi * qi * qi + lin * lin / bi).exp())
}

/// Phase equation as usually written,
/// `gamma' = p q' + (i/4)(H_pp B - H_qq / B) - H`,
/// which belongs to a holomorphic `~B^{1/4}` prefactor.
pub fn phase_rate_holomorphic(
    model: &QuadraticHamiltonian,
    z: &ComplexState,
    b: &UncertaintyB,
) -> Complex64 {
    let h = model.complex_hessian();
    let zv = z.vector();
    let q_dot = model.complex_gradient(&zv)[0];
    z.p * q_dot + 0.25 * I * (h[(0, 0)] * b.0 - h[(1, 1)] / b.0) - model.complex_value(&zv)
}

/// Phase rate for the `(Im B / pi)^{1/4}` prefactor used by this module.
///
/// Equal to [`phase_rate_holomorphic`] plus `(i/4)(Im B'/Im B - B'/B)`,
/// evaluated in a form without the `1/B` term:
/// `p q' - H + (i/2)(H_pp B + H_pq) + (i/4) Im B' / Im B`.
pub fn phase_rate(
    model: &QuadraticHamiltonian,
    z: &ComplexState,
    b: &UncertaintyB,
) -> Result<Complex64> {
    b.require_normalizable()?;
    let h = model.complex_hessian();
    let zv = z.vector();
    let q_dot = model.complex_gradient(&zv)[0];
    let b_dot = riccati_rhs(model, b.0);
    Ok(z.p * q_dot - model.complex_value(&zv)
        + 0.5 * I * (h[(0, 0)] * b.0 + h[(0, 1)])
        + 0.25 * I * (b_dot.im / b.0.im))
}

/// Integrates [`phase_rate`] over equidistant samples of `(z, B)` spaced by
/// `dt`; the centre is assumed to follow the complexified canonical equations.
///
/// Composite Simpson rule, with a 3/8 panel at the end for an odd number of
/// intervals. Returns `gamma(t_end) - gamma(0)`.
pub fn evolve_phase(
    model: &QuadraticHamiltonian,
    samples: &[(ComplexState, UncertaintyB)],
    dt: f64,
) -> Result<Complex64> {
    let f = samples
        .iter()
        .map(|(z, b)| phase_rate(model, z, b))
        .collect::<Result<Vec<_>>>()?;
    Ok(simpson(&f, dt))
}

fn simpson(f: &[Complex64], h: f64) -> Complex64 {
    let n = f.len().saturating_sub(1);
    match n {
        0 => Complex64::new(0.0, 0.0),
        1 => 0.5 * h * (f[0] + f[1]),
        2 => h / 3.0 * (f[0] + 4.0 * f[1] + f[2]),
        3 => 3.0 * h / 8.0 * (f[0] + 3.0 * f[1] + 3.0 * f[2] + f[3]),
        _ => {
            let even = if n.is_multiple_of(2) { n } else { n - 3 };
            let mut s = f[0] + f[even];
            for (k, v) in f.iter().enumerate().take(even).skip(1) {
                s += if k % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            let mut total = h / 3.0 * s;
            if even < n {
                let g = &f[even..];
                total += 3.0 * h / 8.0 * (g[0] + 3.0 * g[1] + 3.0 * g[2] + g[3]);
            }
            total
        }
    }
}

/// Propagates a full Gaussian state for time `t` under `model`, with
/// `steps` quadrature intervals for the phase.
///
/// Fails with [`Error::Pole`] if the path meets a pole of the B chart, since
/// the phase integrand is singular there.
pub fn propagate_with(
    model: &QuadraticHamiltonian,
    state: &GaussianState,
    t: f64,
    steps: usize,
) -> Result<GaussianState> {
    let steps = steps.max(2);
    let dt = t / steps as f64;
    let mut samples = Vec::with_capacity(steps + 1);
    let mut den = Complex64::new(1.0, 0.0);
    for k in 0..=steps {
        let tk = k as f64 * dt;
        let s = complex_symplectic_flow(model, tk);
        let pole = Error::Pole {
            from: (tk - dt).max(0.0),
            to: tk,
        };
        let next = s.denominator(&state.b);
        if segment_hits_zero(den, next) {
            return Err(pole);
        }
        den = next;
        let b = s.mobius(&state.b).map_err(|_| pole)?;
        samples.push((s.apply(&state.center), b));
    }
    let gamma = state.gamma + evolve_phase(model, &samples, dt)?;
    let (center, b) = *samples.last().expect("at least one sample");
    Ok(GaussianState { center, b, gamma })
}

/// [`propagate_with`] using [`PHASE_STEPS`] quadrature intervals.
pub fn propagate(
    model: &QuadraticHamiltonian,
    state: &GaussianState,
    t: f64,
) -> Result<GaussianState> {
    propagate_with(model, state, t, PHASE_STEPS)
}

/// Acts with `exp(-(i/2)(M_pp p^2 + M_qq q^2 + M_pq (pq + qp)))` on a state,
/// read as unit-time evolution under the complex Hamiltonian with Hessian
/// `[[M_pp, M_pq], [M_pq, M_qq]]`. The result carries its real expectation
/// values as centre.
pub fn eta_action(
    m_pp: Complex64,
    m_qq: Complex64,
    m_pq: Complex64,
    state: &GaussianState,
) -> Result<GaussianState> {
    let generator =
        QuadraticHamiltonian::from_complex_hessian(&Matrix2::new(m_pp, m_pq, m_pq, m_qq))?;
    propagate(&generator, state, 1.0)?.with_real_center()
}

/// Generator coefficients `(M_pp, M_qq, M_pq)`.
pub type EtaGenerator = (Complex64, Complex64, Complex64);

/// `eta = exp(-theta (p^2 - q^2) / 2)`, mapping the Hermitian oscillator of
/// frequency `omega` onto the Swanson model.
pub fn swanson_eta(params: &SwansonParams) -> EtaGenerator {
    let theta = spectral_data(params).theta;
    (
        Complex64::new(0.0, -theta),
        Complex64::new(0.0, theta),
        Complex64::new(0.0, 0.0),
    )
}

pub fn swanson_eta_inverse(params: &SwansonParams) -> EtaGenerator {
    let (a, b, c) = swanson_eta(params);
    (-a, -b, -c)
}

/// Quarter rotation `p -> -q`, `q -> p`; acts on B as `B -> -1/B`.
pub fn fourier_generator() -> EtaGenerator {
    (
        Complex64::new(PI / 2.0, 0.0),
        Complex64::new(PI / 2.0, 0.0),
        Complex64::new(0.0, 0.0),
    )
}

/// `eta exp(-i H_herm t) eta^-1 psi0`, staged through the Hermitian oscillator.
pub fn mapped_dynamics(
    params: &SwansonParams,
    state0: &GaussianState,
    t: f64,
) -> Result<GaussianState> {
    let (a, b, c) = swanson_eta_inverse(params);
    let hermitian = eta_action(a, b, c, state0)?;
    let rotated = propagate(
        &QuadraticHamiltonian::harmonic(params.omega()),
        &hermitian,
        t,
    )?;
    let (a, b, c) = swanson_eta(params);
    eta_action(a, b, c, &rotated)
}

/// Pointwise wave function; principal branch of `(Im B / pi)^{1/4}`.
pub fn evaluate_wavefunction(state: &GaussianState, xs: &[f64]) -> Vec<Complex64> {
    let pref = (Complex64::new(state.b.0.im / PI, 0.0)).powf(0.25);
    let (p, q, b) = (state.center.p, state.center.q, state.b.0);
    xs.iter()
        .map(|&x| {
            let w = x - q;
            pref * (I * (state.gamma + p * w + 0.5 * b * w * w)).exp()
        })
        .collect()
}

/// `z + lambda (B, 1)`: another centre describing the same state up to phase.
pub fn lagrangian_shift(z: &ComplexState, b: &UncertaintyB, lambda: Complex64) -> ComplexState {
    let shift = Vector2::new(b.0, Complex64::new(1.0, 0.0)) * lambda;
    ComplexState::from_vector(&(z.vector() + shift))
}
