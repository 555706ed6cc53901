//! Oracles shared by the integration tests. Nothing here calls the solver
//! code under test.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

/// Plain RK4 over `Vec<f64>` with `n` equal steps.
pub fn rk4_vec(f: impl Fn(f64, &[f64]) -> Vec<f64>, y0: &[f64], t_end: f64, n: usize) -> Vec<f64> {
    let h = t_end / n as f64;
    let mut y = y0.to_vec();
    let axpy = |y: &[f64], k: &[f64], a: f64| -> Vec<f64> {
        y.iter().zip(k).map(|(y, k)| y + a * k).collect()
    };
    for i in 0..n {
        let t = i as f64 * h;
        let k1 = f(t, &y);
        let k2 = f(t + h / 2.0, &axpy(&y, &k1, h / 2.0));
        let k3 = f(t + h / 2.0, &axpy(&y, &k2, h / 2.0));
        let k4 = f(t + h, &axpy(&y, &k3, h));
        for j in 0..y.len() {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    y
}

/// Trapezoid rule for samples spaced by `h`.
pub fn trapezoid(f: &[f64], h: f64) -> f64 {
    let n = f.len();
    if n < 2 {
        return 0.0;
    }
    h * (f[1..n - 1].iter().sum::<f64>() + 0.5 * (f[0] + f[n - 1]))
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

/// `|psi(x)|^2` for `psi = (Im B/pi)^{1/4} exp(i gamma + i p (x-q) + i B (x-q)^2 / 2)`,
/// written out independently of the library.
pub fn density(x: f64, p: Complex64, q: Complex64, b: Complex64, gamma: Complex64) -> f64 {
    let i = Complex64::new(0.0, 1.0);
    let w = x - q;
    let pref = (b.im / std::f64::consts::PI).sqrt();
    let e = i * (gamma + p * w + 0.5 * b * w * w);
    pref * (2.0 * e.re).exp()
}

/// Least-squares slope of `log e` against `log h`.
pub fn log_slope(h: &[f64], e: &[f64]) -> f64 {
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}
