//! The balanced Green's function of the round `S³` and the dipole-array
//! potential `u` built from it.
//!
//! `G(s) = (π − s) cot(s) / (2π)` solves `−ΔG = 2π δ − 1/π` with `s` the
//! distance to the pole. The potential is
//! `u = Σ_ℓ [G(d(·, p⁰_ℓ)) − G(d(·, p¹_ℓ))]`, so `−Δu = 2π Σ (δ_{p⁰} − δ_{p¹})`
//! and the constant backgrounds cancel. `u_k = u / k`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::linalg::{self, dot, Vec4};
use crate::s3core::{PoleConfiguration, SpherePoint, TangentVector, POLE_GUARD};
use crate::scalar::{Jet, Real};
use crate::{Error, Result};

/// Below this value of `w = (1 + cos s)/2` the closed form loses accuracy to
/// the `0·∞` at `s = π`, and the series branch is used instead.
const SERIES_SWITCH: f64 = 0.25;

/// `asin(√w) / √(w(1−w)) = Σ cₙ wⁿ`, `cₙ = 4ⁿ (n!)² / (2n+1)!`.
fn theta_over_sin<T: Real>(w: T) -> T {
    const TERMS: usize = 40;
    let mut coeff = [0.0; TERMS];
    coeff[0] = 1.0;
    for n in 0..TERMS - 1 {
        coeff[n + 1] = coeff[n] * 2.0 * (n as f64 + 1.0) / (2.0 * n as f64 + 3.0);
    }
    let mut acc = T::cst(coeff[TERMS - 1]);
    for &c in coeff[..TERMS - 1].iter().rev() {
        acc = acc * w + T::cst(c);
    }
    acc
}

/// `G` as a function of `c = cos s`.
pub fn green_of_cos<T: Real>(c: T) -> T {
    let w = (c + T::cst(1.0)).scale(0.5);
    if w.value() < SERIES_SWITCH {
        // cos s · θ/sin θ with θ = π − s
        c * theta_over_sin(w) * T::cst(1.0 / (2.0 * PI))
    } else {
        let s = c.acos();
        (T::cst(PI) - s) * c / (T::cst(1.0) - c * c).sqrt() * T::cst(1.0 / (2.0 * PI))
    }
}

/// `G(s)` for any [`Real`] argument, smooth through `s = π`.
pub fn green_generic<T: Real>(s: T) -> T {
    let c = s.cos();
    let w = (c + T::cst(1.0)).scale(0.5);
    if w.value() < SERIES_SWITCH {
        c * theta_over_sin(w) * T::cst(1.0 / (2.0 * PI))
    } else {
        (T::cst(PI) - s) * c / s.sin() * T::cst(1.0 / (2.0 * PI))
    }
}

/// The radial profile `G(s)` on `(0, π)`.
pub fn green_radial(s: f64) -> Result<f64> {
    check_radius(s)?;
    Ok(green_generic(s))
}

/// `G'(s)` on `(0, π)`.
pub fn green_radial_derivative(s: f64) -> Result<f64> {
    check_radius(s)?;
    Ok(green_generic(Jet::<1>::variable(s, 0)).g[0])
}

/// `G''(s)` on `(0, π)`.
pub fn green_radial_second_derivative(s: f64) -> Result<f64> {
    check_radius(s)?;
    Ok(green_generic(Jet::<1>::variable(s, 0)).h[0][0])
}

fn check_radius(s: f64) -> Result<()> {
    if s > 0.0 && s < PI {
        Ok(())
    } else {
        Err(Error::Domain { what: "green radius", value: s })
    }
}

/// The potential `u` for a pole configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    pub cfg: PoleConfiguration,
}

impl Potential {
    pub fn new(cfg: PoleConfiguration) -> Self {
        Potential { cfg }
    }

    pub fn k(&self) -> u32 {
        self.cfg.k
    }

    fn scale_for(&self, scaled: bool) -> f64 {
        if scaled {
            1.0 / self.cfg.k as f64
        } else {
            1.0
        }
    }

    fn guard(&self, x: &SpherePoint) -> Result<()> {
        let d = self.cfg.nearest_pole_distance(x);
        if d < POLE_GUARD {
            return Err(Error::PoleCoincidence { distance: d });
        }
        Ok(())
    }

    /// `u(x)`, or `u_k(x)` when `scaled`.
    pub fn value(&self, x: &SpherePoint, scaled: bool) -> Result<f64> {
        self.guard(x)?;
        let mut u = 0.0;
        for (alpha, _, p) in self.cfg.poles() {
            let g = green_of_cos(x.dot(p).clamp(-1.0, 1.0));
            u += if alpha == 0 { g } else { -g };
        }
        Ok(u * self.scale_for(scaled))
    }

    /// Riemannian gradient of `u` (or `u_k`) at `x`.
    pub fn gradient(&self, x: &SpherePoint, scaled: bool) -> Result<TangentVector> {
        self.guard(x)?;
        let mut grad = [0.0; 4];
        for (alpha, _, p) in self.cfg.poles() {
            let c = x.dot(p).clamp(-1.0, 1.0);
            let dg = green_of_cos(Jet::<1>::variable(c, 0)).g[0];
            let sign = if alpha == 0 { 1.0 } else { -1.0 };
            grad = linalg::axpy(&grad, sign * dg, p.coords());
        }
        let g = TangentVector::project(*x, grad);
        Ok(g.scaled(self.scale_for(scaled)))
    }

    /// `u` (or `u_k`) extended to `ℝ⁴ \ 0` as a degree-zero homogeneous
    /// function, for derivative propagation. On the sphere its ambient
    /// Laplacian equals the spherical one and its ambient Hessian restricted
    /// to tangent vectors equals the spherical Hessian.
    pub fn value_ambient<T: Real>(&self, y: &[T; 4], scaled: bool) -> T {
        let r2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3];
        let inv_r = r2.sqrt().recip();
        let mut u = T::cst(0.0);
        for (alpha, _, p) in self.cfg.poles() {
            let pc = p.coords();
            let c = (y[0].scale(pc[0]) + y[1].scale(pc[1]) + y[2].scale(pc[2]) + y[3].scale(pc[3])) * inv_r;
            let g = green_of_cos(c);
            u = if alpha == 0 { u + g } else { u - g };
        }
        u.scale(self.scale_for(scaled))
    }

    /// Geodesic six-point Laplacian with step `h`.
    pub fn laplacian_fd(&self, x: &SpherePoint, h: f64, scaled: bool) -> Result<f64> {
        let u0 = self.value(x, scaled)?;
        let mut acc = 0.0;
        for e in x.tangent_frame() {
            let up = self.value(&x.geodesic(&e, h), scaled)?;
            let um = self.value(&x.geodesic(&e, -h), scaled)?;
            acc += up + um - 2.0 * u0;
        }
        Ok(acc / (h * h))
    }
}

/// `u(x)` for the configuration `cfg`.
pub fn potential_u(cfg: &PoleConfiguration, x: &SpherePoint) -> Result<f64> {
    Potential::new(cfg.clone()).value(x, false)
}

/// `du(x)` for the configuration `cfg`.
pub fn grad_u(cfg: &PoleConfiguration, x: &SpherePoint) -> Result<TangentVector> {
    Potential::new(cfg.clone()).gradient(x, false)
}

/// `u_k` through the `k`-fold average of the `k = 1` potential.
pub fn averaged_u1(x: &SpherePoint, k: u32) -> Result<f64> {
    let u1 = Potential::new(PoleConfiguration::new(1)?);
    let mut acc = 0.0;
    for l in 0..k {
        let rot = num_complex::Complex64::from_polar(1.0, 2.0 * PI * l as f64 / k as f64);
        let y = SpherePoint::from_complex(rot * x.z1(), rot * x.z2())?;
        acc += u1.value(&y, false)?;
    }
    Ok(acc / k as f64)
}

/// Outcome of the rough bound `|u_k| ≤ C + |z₁|⁻¹ + |z₂|⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub k: u32,
    pub samples: usize,
    /// Smallest `C` for which the bound holds on the samples.
    pub c_star: f64,
    pub worst_point: Option<SpherePoint>,
}

pub fn bound_check_u(cfg: &PoleConfiguration, samples: &[SpherePoint]) -> Result<BoundReport> {
    let pot = Potential::new(cfg.clone());
    let mut c_star = f64::NEG_INFINITY;
    let mut worst = None;
    let mut used = 0;
    for x in samples {
        let uk = match pot.value(x, true) {
            Ok(v) => v,
            Err(Error::PoleCoincidence { .. }) => continue,
            Err(e) => return Err(e),
        };
        used += 1;
        let excess = libm::fabs(uk) - 1.0 / x.z1().norm() - 1.0 / x.z2().norm();
        if excess > c_star {
            c_star = excess;
            worst = Some(*x);
        }
    }
    Ok(BoundReport { k: cfg.k, samples: used, c_star, worst_point: worst })
}

/// Tangent basis of the Clifford torus through `x`: `(iz₁, 0)` and `(0, iz₂)`.
pub fn clifford_tangents(x: &SpherePoint) -> [Vec4; 2] {
    let [a, b, c, d] = *x.coords();
    [[-b, a, 0.0, 0.0], [0.0, 0.0, -d, c]]
}

/// `du(A)` for an ambient vector `A` tangent at `x`.
pub fn du_along(pot: &Potential, x: &SpherePoint, a: &Vec4, scaled: bool) -> Result<f64> {
    Ok(dot(pot.gradient(x, scaled)?.components(), a))
}

/// Values of `u_k` at the given points; entries near a pole are `None`.
pub fn evaluate_many(pot: &Potential, pts: &[SpherePoint]) -> Vec<Option<f64>> {
    pts.iter().map(|x| pot.value(x, true).ok()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::s3core::sample_grid;
    use num_complex::Complex64;

    // Independent closed form, differentiated by hand.
    fn g_ref(s: f64) -> f64 {
        (PI - s) / libm::tan(s) / (2.0 * PI)
    }
    fn g_ref_d(s: f64) -> f64 {
        let sn = libm::sin(s);
        -(sn * libm::cos(s) + (PI - s)) / (sn * sn) / (2.0 * PI)
    }

    #[test]
    fn green_values() {
        assert!(green_radial(PI / 2.0).unwrap().abs() < 1e-16);
        assert!(green_radial(0.0).is_err());
        assert!(green_radial(PI).is_err());
        let s = 1e-4;
        assert!((s * green_radial(s).unwrap() - 0.5).abs() < 1e-3);
        for s in [0.3, 1.0, 1.9, 2.5, 3.0, 3.1] {
            let g = green_radial(s).unwrap();
            assert!((g - g_ref(s)).abs() < 1e-11 * (1.0 + g.abs()), "{s}");
            let d = green_radial_derivative(s).unwrap();
            assert!((d - g_ref_d(s)).abs() < 1e-9, "{s}: {d} vs {}", g_ref_d(s));
        }
    }

    #[test]
    fn green_is_smooth_through_pi() {
        // G(π) = −1/(2π), G'(π) = 0
        let near = green_radial(PI - 1e-7).unwrap();
        assert!((near + 1.0 / (2.0 * PI)).abs() < 1e-12);
        assert!(green_radial_derivative(PI - 1e-7).unwrap().abs() < 1e-7);
        // branches agree at the switch
        let s_switch = libm::acos(2.0 * SERIES_SWITCH - 1.0);
        let a = green_generic(Jet::<1>::variable(s_switch - 1e-12, 0));
        let b = green_generic(Jet::<1>::variable(s_switch + 1e-12, 0));
        assert!((a.v - b.v).abs() < 1e-12);
        assert!((a.g[0] - b.g[0]).abs() < 1e-10);
        assert!((a.h[0][0] - b.h[0][0]).abs() < 1e-9);
    }

    #[test]
    fn radial_ode_residual() {
        for s in [0.3, 1.0, 2.0, 2.8, 3.1] {
            let g1 = green_radial_derivative(s).unwrap();
            let g2 = green_radial_second_derivative(s).unwrap();
            let res = g2 + 2.0 / libm::tan(s) * g1 - 1.0 / PI;
            assert!(res.abs() < 1e-8, "s={s}: {res}");
        }
    }

    /// Points `(z, ζ z)` and `(z, ζ z̄)` with `ζᵏ = 1`, fixed by `ι` composed
    /// with a torus element or with complex conjugation.
    fn antisymmetric_circle(k: u32, b: u32, t: f64, conj: bool) -> SpherePoint {
        let h = 1.0 / libm::sqrt(2.0);
        let z = Complex64::from_polar(h, t);
        let zeta = Complex64::from_polar(1.0, 2.0 * PI * b as f64 / k as f64);
        let w = if conj { z.conj() } else { z };
        SpherePoint::from_complex(z, zeta * w).unwrap()
    }

    #[test]
    fn potential_vanishes_on_antisymmetric_circles() {
        for k in 1..=6 {
            let cfg = PoleConfiguration::new(k).unwrap();
            for b in 0..k {
                for j in 0..7 {
                    for conj in [false, true] {
                        let x = antisymmetric_circle(k, b, 0.3 + 0.9 * j as f64, conj);
                        assert!(potential_u(&cfg, &x).unwrap().abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn potential_is_not_identically_zero_on_the_clifford_torus() {
        let h = 1.0 / libm::sqrt(2.0);
        let cfg = PoleConfiguration::new(1).unwrap();
        let x = SpherePoint::from_complex(Complex64::new(h, 0.0), Complex64::new(-h, 0.0)).unwrap();
        assert!(potential_u(&cfg, &x).unwrap().abs() > 0.1);
    }

    #[test]
    fn potential_sign_near_fibers() {
        for k in 1..=8 {
            let cfg = PoleConfiguration::new(k).unwrap();
            let pts = sample_grid(3000, &cfg, 5).unwrap();
            for x in pts {
                let u = potential_u(&cfg, &x).unwrap();
                if k >= 3 && x.z1().norm() > 0.9 {
                    assert!(u > 0.0);
                }
                if k >= 3 && x.z2().norm() > 0.9 {
                    assert!(u < 0.0);
                }
            }
        }
        // for k ≤ 2 the sign flips on F₀ far from the positive poles
        for k in [1, 2] {
            let cfg = PoleConfiguration::new(k).unwrap();
            let mid = Complex64::from_polar(0.95, PI / k as f64);
            let x = SpherePoint::from_complex(mid, Complex64::new(libm::sqrt(1.0 - 0.95 * 0.95), 0.0)).unwrap();
            assert!(potential_u(&cfg, &x).unwrap() < 0.0);
        }
    }

    #[test]
    fn gradient_annihilates_antisymmetric_circles() {
        let k = 3;
        let pot = Potential::new(PoleConfiguration::new(k).unwrap());
        for b in 0..k {
            let x = antisymmetric_circle(k, b, 0.4, false);
            let [a, bb, c, d] = *x.coords();
            let t = [-bb, a, -d, c];
            assert!(du_along(&pot, &x, &t, false).unwrap().abs() < 1e-8);
            assert!(pot.gradient(&x, false).unwrap().norm() > 1e-3);
        }
    }

    #[test]
    fn pole_guard() {
        let cfg = PoleConfiguration::new(2).unwrap();
        let p = cfg.positive_poles[1];
        assert!(matches!(potential_u(&cfg, &p), Err(Error::PoleCoincidence { .. })));
        assert!(matches!(grad_u(&cfg, &p), Err(Error::PoleCoincidence { .. })));
    }

    #[test]
    fn ambient_extension_matches() {
        let pot = Potential::new(PoleConfiguration::new(3).unwrap());
        let x = SpherePoint::new([0.3, -0.2, 0.5, 0.7]).unwrap();
        let y = linalg::scale(x.coords(), 1.7);
        let j = pot.value_ambient(&Jet::<4>::seed(&y), true);
        assert!((j.v - pot.value(&x, true).unwrap()).abs() < 1e-13);
        let g = pot.gradient(&x, true).unwrap();
        for i in 0..4 {
            assert!((j.g[i] * 1.7 - g.components()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn k1_bound_is_finite() {
        let cfg = PoleConfiguration::new(1).unwrap();
        let pts = sample_grid(4000, &cfg, 3).unwrap();
        let rep = bound_check_u(&cfg, &pts).unwrap();
        assert!(rep.c_star.is_finite());
        assert!(rep.c_star < 1.0);
    }
}
