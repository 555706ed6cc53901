//! Classical fixed-step fourth-order Runge-Kutta on small value types.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

/// A state that can be advanced by `y + h k`.
pub(crate) trait RkState: Copy {
    fn add_scaled(&self, k: &Self, h: f64) -> Self;
}

impl<const N: usize> RkState for [f64; N] {
    fn add_scaled(&self, k: &Self, h: f64) -> Self {
        let mut out = *self;
        for (o, d) in out.iter_mut().zip(k) {
            *o += h * d;
        }
        out
    }
}

impl RkState for Complex64 {
    fn add_scaled(&self, k: &Self, h: f64) -> Self {
        self + k * h
    }
}

impl RkState for Matrix4<f64> {
    fn add_scaled(&self, k: &Self, h: f64) -> Self {
        self + k * h
    }
}

impl RkState for Matrix2<Complex64> {
    fn add_scaled(&self, k: &Self, h: f64) -> Self {
        self + k * Complex64::new(h, 0.0)
    }
}

/// One RK4 step of an autonomous system.
pub(crate) fn step<S: RkState>(y: &S, h: f64, mut f: impl FnMut(&S) -> S) -> S {
    let k1 = f(y);
    let k2 = f(&y.add_scaled(&k1, 0.5 * h));
    let k3 = f(&y.add_scaled(&k2, 0.5 * h));
    let k4 = f(&y.add_scaled(&k3, h));
    y.add_scaled(&k1, h / 6.0)
        .add_scaled(&k2, h / 3.0)
        .add_scaled(&k3, h / 3.0)
        .add_scaled(&k4, h / 6.0)
}

/// Splits `[0, t_end]` into equal steps no longer than `step`.
///
/// Returns the step count and the effective step. A ratio within 1e-9 of an
/// integer is rounded so that `T / 10^4` style steps land exactly on `t_end`.
pub(crate) fn grid(t_end: f64, step: f64) -> (usize, f64) {
    if t_end <= 0.0 {
        return (0, step);
    }
    let ratio = t_end / step;
    let nearest = ratio.round();
    let n = if (ratio - nearest).abs() < 1e-9 * ratio.max(1.0) {
        nearest
    } else {
        ratio.ceil()
    };
    let n = (n as usize).max(1);
    (n, t_end / n as f64)
}
