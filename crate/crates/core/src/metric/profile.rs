//! The profile `V(x) = (1/4π) log(e^{4πx} + e^{−4πx} + 2) = (1/2π) log(2 cosh 2πx)`.

use core::f64::consts::PI;

use crate::scalar::Real;

/// `V` in the overflow-free form `|x| + log1p(e^{−4π|x|}) / (2π)`.
pub fn v<T: Real>(x: T) -> T {
    let a = x.abs();
    a + (a.scale(-4.0 * PI)).exp().ln_1p().scale(1.0 / (2.0 * PI))
}

/// `V'(x) = tanh(2πx)`.
pub fn v_prime(x: f64) -> f64 {
    libm::tanh(2.0 * PI * x)
}

/// `sech²(2πx) = 1 − V'(x)²`, evaluated without cancellation.
pub fn one_minus_v_prime_sq(x: f64) -> f64 {
    let e = libm::exp(-4.0 * PI * libm::fabs(x));
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

/// `V''(x) = 2π sech²(2πx)`.
pub fn v_second(x: f64) -> f64 {
    2.0 * PI * one_minus_v_prime_sq(x)
}

/// `log(e^{4πx} + e^{−4πx} + 2)/(4π)` as written; overflows for `|x| ≳ 56`.
pub fn v_literal(x: f64) -> f64 {
    libm::log(libm::exp(4.0 * PI * x) + libm::exp(-4.0 * PI * x) + 2.0) / (4.0 * PI)
}

/// Value and first two derivatives of `V`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ProfileV;

impl ProfileV {
    pub fn value(&self, x: f64) -> f64 {
        v(x)
    }
    pub fn d1(&self, x: f64) -> f64 {
        v_prime(x)
    }
    pub fn d2(&self, x: f64) -> f64 {
        v_second(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Jet;

    #[test]
    fn stable_form_matches_literal() {
        for i in -100..=100 {
            let x = i as f64 * 0.1;
            assert!((v(x) - v_literal(x)).abs() < 1e-12 * (1.0 + x.abs()), "{x}");
        }
        assert!((v(0.0) - libm::log(4.0) / (4.0 * PI)).abs() < 1e-16);
    }

    #[test]
    fn identities_hold_on_wide_range() {
        for i in -500..=500 {
            let x = i as f64 * 0.1;
            let d = libm::exp(4.0 * PI * x.abs());
            let denom_ratio = 4.0 / (d + 1.0 / d + 2.0);
            assert!((one_minus_v_prime_sq(x) - denom_ratio).abs() < 1e-12);
            assert!((v_second(x) - 2.0 * PI * denom_ratio).abs() < 1e-12);
            let j = v(Jet::<1>::variable(x, 0));
            assert!((j.g[0] - v_prime(x)).abs() < 1e-12);
            assert!((j.h[0][0] - v_second(x)).abs() < 1e-9);
        }
        assert!(v(1e3).is_finite() && (v(1e3) - 1e3).abs() < 1e-12);
    }

    #[test]
    fn jet_is_exact_at_zero() {
        let j = v(Jet::<1>::variable(0.0, 0));
        assert_eq!(j.g[0], 0.0);
        assert!((j.h[0][0] - 2.0 * PI).abs() < 1e-12);
    }
}
