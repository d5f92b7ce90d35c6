//! One-dimensional quadrature rules.

use alloc::vec::Vec;
use core::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending nodes.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = alloc::vec![0.0; m];
    let mut weights = alloc::vec![0.0; m];
    let half = m.div_ceil(2);
    for i in 0..half {
        // Tricomi initial guess, then Newton on P_m.
        let mut x = libm::cos(PI * (i as f64 + 0.75) / (m as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if libm::fabs(dx) < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[m - 1 - i] = x;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for n in 2..=m {
        let nf = n as f64;
        let p2 = ((2.0 * nf - 1.0) * x * p1 - (nf - 1.0) * p0) / nf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Adaptive Simpson quadrature with Richardson correction.
///
/// `tol` is an absolute tolerance on the whole interval; subintervals get a
/// proportional share. Recursion depth is capped at `max_depth`.
pub fn adaptive_simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64, max_depth: u32) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&mut f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || libm::fabs(delta) <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // degree 15 is the exactness limit for 8 nodes
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((i - 2.0 / 15.0).abs() < 1e-14);
        let odd: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(15)).sum();
        assert!(odd.abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_odd_order_has_center_node() {
        let (x, w) = gauss_legendre(5);
        assert!(x[2].abs() < 1e-15);
        assert!((w[2] - 128.0 / 225.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_simpson_handles_sqrt_endpoint() {
        let v = adaptive_simpson(libm::sqrt, 0.0, 1.0, 1e-10, 40);
        assert!((v - 2.0 / 3.0).abs() < 1e-9);
    }
}
