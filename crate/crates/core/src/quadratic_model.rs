//! Quadratic Hamiltonians `H - i Gamma` and the Swanson oscillator.
//!
//! Phase-space vectors are ordered `(p, q)` throughout and `hbar = 1`.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::omega;

/// The two real parameters of
/// `omega0 (p^2 + q^2)/2 - i delta (pq + qp)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwansonParams {
    omega0: f64,
    delta: f64,
}

impl SwansonParams {
    /// Rejects `omega0 <= 0` and non-finite input.
    pub fn new(omega0: f64, delta: f64) -> Result<Self> {
        if !omega0.is_finite() || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "parameters must be finite (omega0 = {omega0}, delta = {delta})"
            )));
        }
        if omega0 <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "omega0 must be positive, got {omega0}"
            )));
        }
        Ok(Self { omega0, delta })
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Frequency of the equivalent Hermitian oscillator, `sqrt(omega0^2 + delta^2)`.
    pub fn omega(&self) -> f64 {
        self.omega0.hypot(self.delta)
    }

    /// Oscillation period `2 pi / omega`.
    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega()
    }

    /// Same oscillator with `delta -> -delta` (Fourier conjugate).
    pub fn conjugate(&self) -> Self {
        Self {
            omega0: self.omega0,
            delta: -self.delta,
        }
    }
}

/// Hermitian part `H` and anti-Hermitian part `Gamma` of a complex quadratic
/// Hamiltonian `H - i Gamma`, each given by Hessian, gradient at the origin and
/// constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticHamiltonian {
    pub hess_h: Matrix2<f64>,
    pub hess_gamma: Matrix2<f64>,
    pub lin_h: Vector2<f64>,
    pub lin_gamma: Vector2<f64>,
    pub const_h: f64,
    pub const_gamma: f64,
}

impl QuadraticHamiltonian {
    /// Builds a model from its parts. Both Hessians must be symmetric.
    pub fn new(
        hess_h: Matrix2<f64>,
        hess_gamma: Matrix2<f64>,
        lin_h: Vector2<f64>,
        lin_gamma: Vector2<f64>,
        const_h: f64,
        const_gamma: f64,
    ) -> Result<Self> {
        for (name, m) in [("hess_h", &hess_h), ("hess_gamma", &hess_gamma)] {
            let scale = m.abs().max().max(1.0);
            if (m[(0, 1)] - m[(1, 0)]).abs() > 1e-12 * scale {
                return Err(Error::InvalidParameter(format!("{name} is not symmetric")));
            }
        }
        let consts = [const_h, const_gamma];
        let mut all = hess_h
            .iter()
            .chain(hess_gamma.iter())
            .chain(lin_h.iter())
            .chain(lin_gamma.iter())
            .chain(consts.iter());
        if all.any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(
                "coefficients must be finite".into(),
            ));
        }
        Ok(Self {
            hess_h,
            hess_gamma,
            lin_h,
            lin_gamma,
            const_h,
            const_gamma,
        })
    }

    /// Purely quadratic model with the given Hessians.
    pub fn from_hessians(hess_h: Matrix2<f64>, hess_gamma: Matrix2<f64>) -> Result<Self> {
        Self::new(
            hess_h,
            hess_gamma,
            Vector2::zeros(),
            Vector2::zeros(),
            0.0,
            0.0,
        )
    }

    /// `omega (p^2 + q^2) / 2`.
    pub fn harmonic(omega: f64) -> Self {
        Self::from_hessians(Matrix2::identity() * omega, Matrix2::zeros())
            .expect("diagonal Hessian is symmetric")
    }

    /// Model whose complex Hessian is `hess` (i.e. `H'' = Re hess`,
    /// `Gamma'' = -Im hess`). Used for generators such as the eta map.
    pub fn from_complex_hessian(hess: &Matrix2<Complex64>) -> Result<Self> {
        Self::from_hessians(hess.map(|z| z.re), hess.map(|z| -z.im))
    }

    pub fn is_hermitian(&self) -> bool {
        self.hess_gamma.iter().all(|&x| x == 0.0)
            && self.lin_gamma.iter().all(|&x| x == 0.0)
            && self.const_gamma == 0.0
    }

    pub fn h(&self, z: &Vector2<f64>) -> f64 {
        0.5 * z.dot(&(self.hess_h * z)) + self.lin_h.dot(z) + self.const_h
    }

    pub fn gamma(&self, z: &Vector2<f64>) -> f64 {
        0.5 * z.dot(&(self.hess_gamma * z)) + self.lin_gamma.dot(z) + self.const_gamma
    }

    pub fn grad_h(&self, z: &Vector2<f64>) -> Vector2<f64> {
        self.hess_h * z + self.lin_h
    }

    pub fn grad_gamma(&self, z: &Vector2<f64>) -> Vector2<f64> {
        self.hess_gamma * z + self.lin_gamma
    }

    /// `Gamma''_Omega = Omega^T Gamma'' Omega`.
    pub fn hess_gamma_omega(&self) -> Matrix2<f64> {
        omega().transpose() * self.hess_gamma * omega()
    }

    /// Hessian of the complex Hamiltonian, `H'' - i Gamma''`.
    pub fn complex_hessian(&self) -> Matrix2<Complex64> {
        self.hess_h
            .zip_map(&self.hess_gamma, |h, g| Complex64::new(h, -g))
    }

    pub fn complex_lin(&self) -> Vector2<Complex64> {
        self.lin_h
            .zip_map(&self.lin_gamma, |h, g| Complex64::new(h, -g))
    }

    /// Value of the analytically continued Hamiltonian at a complex point.
    pub fn complex_value(&self, z: &Vector2<Complex64>) -> Complex64 {
        let hess = self.complex_hessian();
        Complex64::new(0.5, 0.0) * z.dot(&(hess * z))
            + self.complex_lin().dot(z)
            + Complex64::new(self.const_h, -self.const_gamma)
    }

    /// Complex gradient `(dH/dp, dH/dq)` at a complex point.
    pub fn complex_gradient(&self, z: &Vector2<Complex64>) -> Vector2<Complex64> {
        self.complex_hessian() * z + self.complex_lin()
    }
}

/// Static spectral data of the Swanson oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralData {
    pub omega: f64,
    /// Squeezing angle of the eta map, principal branch in (-pi/4, pi/4).
    pub theta: f64,
    /// Critical value of |delta| for G(0) = I, equal to omega0.
    pub delta_crit: f64,
    /// Uncertainty parameter of the (normalizable) ground state.
    pub ground_b: Complex64,
    /// Davies deformation `xi^4 = (omega + i delta) / (omega - i delta)`.
    pub xi4: Complex64,
}

/// Swanson model: `H'' = omega0 I`, `Gamma'' = [[0, delta], [delta, 0]]`.
pub fn swanson_hamiltonian(params: &SwansonParams) -> QuadraticHamiltonian {
    let d = params.delta();
    QuadraticHamiltonian::from_hessians(
        Matrix2::identity() * params.omega0(),
        Matrix2::new(0.0, d, d, 0.0),
    )
    .expect("Swanson Hessians are symmetric")
}

/// Maps `a p^2/2 + b q^2/2 - i delta (pq+qp)/2` onto the symmetric form,
/// `omega0 = sgn(a) sqrt(ab)`.
pub fn normalize_swanson(a: f64, b: f64, delta: f64) -> Result<SwansonParams> {
    if a == 0.0 || b == 0.0 || a.signum() != b.signum() {
        return Err(Error::InvalidParameter(format!(
            "unitary rescaling requires sgn(a) = sgn(b), got a = {a}, b = {b}"
        )));
    }
    SwansonParams::new(a.signum() * (a * b).sqrt(), delta)
}

pub fn spectral_data(params: &SwansonParams) -> SpectralData {
    let (w0, d) = (params.omega0(), params.delta());
    let w = params.omega();
    SpectralData {
        omega: w,
        theta: -0.5 * (d / w0).atan(),
        delta_crit: w0,
        // i w0/(w - d) written as i (w + d)/w0 to avoid cancellation when d ~ w
        ground_b: Complex64::new(0.0, (w + d) / w0),
        xi4: Complex64::new(w, d) / Complex64::new(w, -d),
    }
}

/// `E_n = omega (n + 1/2)`.
pub fn eigenvalue(params: &SwansonParams, n: u64) -> f64 {
    params.omega() * (n as f64 + 0.5)
}
