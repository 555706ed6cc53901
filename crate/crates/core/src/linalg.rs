//! Small dense helpers shared by the propagators.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

/// Symplectic unit on (p, q): `[[0, -1], [1, 0]]`.
pub fn omega() -> Matrix2<f64> {
    Matrix2::new(0.0, -1.0, 1.0, 0.0)
}

/// Symplectic unit on the doubled phase space: `[[0, -I], [I, 0]]`.
pub fn omega4() -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 2)
        .copy_from(&(-Matrix2::identity()));
    m.fixed_view_mut::<2, 2>(2, 0)
        .copy_from(&Matrix2::identity());
    m
}

pub(crate) fn complexify(m: &Matrix2<f64>) -> Matrix2<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

/// `exp(A t)` for a traceless complex 2x2 matrix.
///
/// Uses `A^2 = -det(A) I`, so `exp(A t) = cosh(k t) I + sinh(k t)/k A` with
/// `k^2 = -det A`. Both coefficients are even in `k`, so the square-root
/// branch is irrelevant.
pub(crate) fn exp_traceless(a: &Matrix2<Complex64>, t: f64) -> Matrix2<Complex64> {
    let k2 = -a.determinant();
    let kt2 = k2 * t * t;
    let (c, s_over_k) = if kt2.norm() < 1e-6 {
        // series: cosh x = 1 + x^2/2 + x^4/24, sinh(x)/x = 1 + x^2/6 + x^4/120
        (
            1.0 + kt2 / 2.0 + kt2 * kt2 / 24.0,
            (1.0 + kt2 / 6.0 + kt2 * kt2 / 120.0) * t,
        )
    } else {
        let k = k2.sqrt();
        ((k * t).cosh(), (k * t).sinh() / k)
    };
    Matrix2::identity() * c + a * s_over_k
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_squares_to_minus_identity() {
        assert_eq!(omega() * omega(), -Matrix2::identity());
        assert_eq!(omega4() * omega4(), -Matrix4::identity());
    }

    #[test]
    fn traceless_exponential_matches_taylor_series() {
        let a = Matrix2::new(
            Complex64::new(0.3, 0.2),
            Complex64::new(-1.1, 0.4),
            Complex64::new(0.7, -0.5),
            Complex64::new(-0.3, -0.2),
        );
        for &t in &[1e-5, 0.4, 2.3] {
            let mut term = Matrix2::<Complex64>::identity();
            let mut sum = term;
            for k in 1..80 {
                term = term * a * Complex64::new(t / k as f64, 0.0);
                sum += term;
            }
            let diff = (exp_traceless(&a, t) - sum).map(|z| z.norm()).max();
            assert!(diff < 1e-12, "t = {t}: {diff}");
        }
    }
}
