//! Test-side oracles, written independently of the library code paths.

#![allow(dead_code)]

use num_complex::Complex64 as C64;

/// Adaptive Simpson quadrature of a complex integrand on `[lo, hi]`.
pub fn integrate(f: &dyn Fn(f64) -> C64, lo: f64, hi: f64, tol: f64) -> C64 {
    fn simpson(a: f64, b: f64, fa: C64, fm: C64, fb: C64) -> C64 {
        (fa + 4.0 * fm + fb) * ((b - a) / 6.0)
    }
    #[allow(clippy::too_many_arguments)]
    fn refine(f: &dyn Fn(f64) -> C64, a: f64, b: f64, fa: C64, fm: C64, fb: C64, whole: C64, tol: f64, depth: u32) -> C64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(a, m, fa, flm, fm);
        let right = simpson(m, b, fm, frm, fb);
        let diff = left + right - whole;
        if depth == 0 || diff.norm() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        refine(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + refine(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    // split first so the adaptive rule sees every oscillation
    let pieces = 64;
    let h = (hi - lo) / pieces as f64;
    (0..pieces)
        .map(|k| {
            let (a, b) = (lo + k as f64 * h, lo + (k + 1) as f64 * h);
            let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
            refine(f, a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol / pieces as f64, 40)
        })
        .sum()
}

/// `(1/a) int_0^a V(x) exp(-2 pi i n x / a) dx` by adaptive quadrature.
pub fn fourier_coefficient(v: &dyn Fn(f64) -> C64, a: f64, n: i64) -> C64 {
    let g = 2.0 * std::f64::consts::PI / a;
    let f = |x: f64| v(x) * C64::new(0.0, -g * n as f64 * x).exp();
    integrate(&f, 0.0, a, 1e-14) / a
}

/// `(2 pi/a)^2 / (1 + cos(2 pi x / a + 2 i rho))`.
pub fn one_ss(a: f64, rho: f64, x: f64) -> C64 {
    let g = 2.0 * std::f64::consts::PI / a;
    g * g / (1.0 + C64::new(g * x, 2.0 * rho).cos())
}

/// `(4 pi/a)^2 / (1 - cos(4 pi x / a + 4 i rho)) + 2 * one_ss`.
pub fn two_ss(a: f64, rho: f64, x: f64) -> C64 {
    let g = 4.0 * std::f64::consts::PI / a;
    g * g / (1.0 - C64::new(g * x, 4.0 * rho).cos()) + 2.0 * one_ss(a, rho, x)
}
