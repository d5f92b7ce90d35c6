//! Round geometry of the unit three-sphere `S³ ⊂ ℂ² = ℝ⁴`.
//!
//! Points are unit 4-vectors `(Re z₁, Im z₁, Re z₂, Im z₂)`. The orientation
//! of `S³` is the one for which an ordered tangent basis `(e₁, e₂, e₃)` at `x`
//! is positive iff `det[x, e₁, e₂, e₃] > 0`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, det4, dot, norm, Vec4};
use crate::quadrature::gauss_legendre;
use crate::{Error, Result};

/// Exclusion radius used by the curvature sampling suites.
pub const DEFAULT_EXCLUSION: f64 = 0.05;

/// Points closer than this to a pole (or to its antipode, where the distance
/// gradient is undefined) are rejected.
pub const POLE_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    v: Vec4,
}

impl SpherePoint {
    /// Normalizes `v` onto the sphere.
    pub fn new(v: Vec4) -> Result<Self> {
        let n = norm(&v);
        if !(n.is_finite() && n > 1e-300) {
            return Err(Error::Domain { what: "sphere point norm", value: n });
        }
        Ok(SpherePoint { v: linalg::scale(&v, 1.0 / n) })
    }

    pub fn from_complex(z1: Complex64, z2: Complex64) -> Result<Self> {
        Self::new([z1.re, z1.im, z2.re, z2.im])
    }

    pub fn coords(&self) -> &Vec4 {
        &self.v
    }

    pub fn z1(&self) -> Complex64 {
        Complex64::new(self.v[0], self.v[1])
    }

    pub fn z2(&self) -> Complex64 {
        Complex64::new(self.v[2], self.v[3])
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        dot(&self.v, &other.v)
    }

    pub fn antipode(&self) -> SpherePoint {
        SpherePoint { v: linalg::scale(&self.v, -1.0) }
    }

    /// Positively oriented orthonormal tangent frame, given by the right
    /// quaternion multiplication by `i, j, k`. The first vector `(iz₁, iz₂)`
    /// spans the Hopf fibre through the point.
    pub fn tangent_frame(&self) -> [Vec4; 3] {
        let [a, b, c, d] = self.v;
        [[-b, a, -d, c], [-c, d, a, -b], [-d, -c, b, a]]
    }

    /// Point reached after unit-speed travel for time `t` along the geodesic
    /// with initial unit direction `dir`.
    pub fn geodesic(&self, dir: &Vec4, t: f64) -> SpherePoint {
        let (s, c) = (libm::sin(t), libm::cos(t));
        SpherePoint::new(core::array::from_fn(|i| c * self.v[i] + s * dir[i])).expect("geodesic stays on the sphere")
    }

    /// Euclidean norm minus one; zero up to rounding by construction.
    pub fn norm_defect(&self) -> f64 {
        norm(&self.v) - 1.0
    }
}

/// Vector tangent to `S³` at `base`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector {
    pub base: SpherePoint,
    components: Vec4,
}

impl TangentVector {
    /// Orthogonal projection of an ambient vector onto `T_base S³`.
    pub fn project(base: SpherePoint, v: Vec4) -> Self {
        let s = dot(base.coords(), &v);
        TangentVector { base, components: linalg::axpy(&v, -s, base.coords()) }
    }

    pub fn zero(base: SpherePoint) -> Self {
        TangentVector { base, components: [0.0; 4] }
    }

    pub fn components(&self) -> &Vec4 {
        &self.components
    }

    pub fn norm(&self) -> f64 {
        norm(&self.components)
    }

    pub fn dot(&self, v: &Vec4) -> f64 {
        dot(&self.components, v)
    }

    pub fn scaled(&self, s: f64) -> Self {
        TangentVector { base: self.base, components: linalg::scale(&self.components, s) }
    }
}

/// Completes the unit tangent vector `v1` at `x` to a positively oriented
/// orthonormal frame of `T_x S³`.
pub fn complete_frame(x: &SpherePoint, v1: &Vec4) -> [Vec4; 3] {
    let frame = x.tangent_frame();
    let seed = frame
        .iter()
        .min_by(|a, b| libm::fabs(dot(a, v1)).total_cmp(&libm::fabs(dot(b, v1))))
        .copied()
        .unwrap_or(frame[1]);
    let v2 = linalg::axpy(&seed, -dot(&seed, v1), v1);
    let v2 = linalg::scale(&v2, 1.0 / norm(&v2));
    let e: [Vec4; 4] = core::array::from_fn(|j| core::array::from_fn(|i| if i == j { 1.0 } else { 0.0 }));
    let v3: Vec4 = core::array::from_fn(|j| det4(x.coords(), v1, &v2, &e[j]));
    let v3 = linalg::scale(&v3, 1.0 / norm(&v3));
    [*v1, v2, v3]
}

/// Great-circle distance, in `[0, π]`.
pub fn geodesic_distance(a: &SpherePoint, b: &SpherePoint) -> f64 {
    libm::acos(a.dot(b).clamp(-1.0, 1.0))
}

/// Gradient at `a` of `d(·, p)`: the unit tangent vector pointing away from
/// `p` along the minimizing geodesic.
pub fn grad_distance(a: &SpherePoint, p: &SpherePoint) -> Result<TangentVector> {
    let theta = geodesic_distance(a, p);
    if !(POLE_GUARD..=PI - POLE_GUARD).contains(&theta) {
        return Err(Error::PoleCoincidence { distance: theta });
    }
    let c = libm::cos(theta);
    let s = libm::sin(theta);
    let v: Vec4 = core::array::from_fn(|i| (a.coords()[i] * c - p.coords()[i]) / s);
    Ok(TangentVector::project(*a, v))
}

/// Element `(ℓ, ℓ')` of `ℤ/k × ℤ/k`, acting by `(e^{2πiℓ/k} z₁, e^{2πiℓ'/k} z₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TorusActionElement {
    pub ell: u32,
    pub ell_prime: u32,
    pub k: u32,
}

impl TorusActionElement {
    pub fn new(ell: i64, ell_prime: i64, k: u32) -> Self {
        let m = k as i64;
        TorusActionElement { ell: ell.rem_euclid(m) as u32, ell_prime: ell_prime.rem_euclid(m) as u32, k }
    }

    pub fn identity(k: u32) -> Self {
        Self::new(0, 0, k)
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self::new(self.ell as i64 + other.ell as i64, self.ell_prime as i64 + other.ell_prime as i64, self.k)
    }

    /// All `k²` elements.
    pub fn all(k: u32) -> impl Iterator<Item = Self> {
        (0..k).flat_map(move |a| (0..k).map(move |b| Self::new(a as i64, b as i64, k)))
    }
}

fn root_of_unity(ell: i64, k: u32) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * ell as f64 / k as f64)
}

pub fn torus_act(g: &TorusActionElement, x: &SpherePoint) -> SpherePoint {
    let z1 = root_of_unity(g.ell as i64, g.k) * x.z1();
    let z2 = root_of_unity(g.ell_prime as i64, g.k) * x.z2();
    SpherePoint::from_complex(z1, z2).expect("unitary action preserves the norm")
}

/// `ι(z₁, z₂) = (z₂, z₁)`.
pub fn involution(x: &SpherePoint) -> SpherePoint {
    let [a, b, c, d] = *x.coords();
    SpherePoint { v: [c, d, a, b] }
}

/// Distance to `F₀ = {z₂ = 0}` (`alpha = 0`) or `F₁ = {z₁ = 0}` (`alpha = 1`).
pub fn distance_to_fiber(x: &SpherePoint, alpha: u8) -> f64 {
    let m = if alpha == 0 { x.z1().norm() } else { x.z2().norm() };
    libm::acos(m.clamp(-1.0, 1.0))
}

/// The `2k` punctures: `p⁰_ℓ = (e^{2πiℓ/k}, 0)` on `F₀` and
/// `p¹_ℓ = (0, e^{2πiℓ/k})` on `F₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleConfiguration {
    pub k: u32,
    pub positive_poles: Vec<SpherePoint>,
    pub negative_poles: Vec<SpherePoint>,
    pub exclusion_radius: f64,
}

impl PoleConfiguration {
    pub fn new(k: u32) -> Result<Self> {
        Self::with_exclusion(k, 0.0)
    }

    pub fn with_exclusion(k: u32, exclusion_radius: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be positive"));
        }
        if !(exclusion_radius >= 0.0 && exclusion_radius.is_finite()) {
            return Err(Error::Domain { what: "exclusion radius", value: exclusion_radius });
        }
        let zero = Complex64::new(0.0, 0.0);
        let positive_poles =
            (0..k as i64).map(|l| SpherePoint::from_complex(root_of_unity(l, k), zero).unwrap()).collect();
        let negative_poles =
            (0..k as i64).map(|l| SpherePoint::from_complex(zero, root_of_unity(l, k)).unwrap()).collect();
        Ok(PoleConfiguration { k, positive_poles, negative_poles, exclusion_radius })
    }

    /// Pole `p^α_ℓ`.
    pub fn pole(&self, alpha: u8, ell: usize) -> &SpherePoint {
        if alpha == 0 {
            &self.positive_poles[ell]
        } else {
            &self.negative_poles[ell]
        }
    }

    /// `(α, ℓ, pole)` for all `2k` poles.
    pub fn poles(&self) -> impl Iterator<Item = (u8, usize, &SpherePoint)> {
        self.positive_poles
            .iter()
            .enumerate()
            .map(|(l, p)| (0u8, l, p))
            .chain(self.negative_poles.iter().enumerate().map(|(l, p)| (1u8, l, p)))
    }

    /// Distance from `x` to the closest pole.
    pub fn nearest_pole_distance(&self, x: &SpherePoint) -> f64 {
        self.poles().map(|(_, _, p)| geodesic_distance(x, p)).fold(f64::INFINITY, f64::min)
    }

    pub fn is_excluded(&self, x: &SpherePoint) -> bool {
        self.nearest_pole_distance(x) <= self.exclusion_radius
    }

    /// Whether `x` is one of the poles up to `tol`.
    pub fn contains_pole(&self, x: &SpherePoint, tol: f64) -> Option<(u8, usize)> {
        self.poles().find(|(_, _, p)| norm(&linalg::sub(p.coords(), x.coords())) < tol).map(|(a, l, _)| (a, l))
    }
}

const R3_GENERATOR: f64 = 1.220_744_084_605_759_5;

/// Deterministic quasi-uniform sample of `S³`, with points inside the
/// exclusion radius of any pole removed.
///
/// Points come from a seeded shift of the `R₃` Kronecker sequence pushed
/// through the Hopf coordinates `(√(1−t) e^{iξ₁}, √t e^{iξ₂})`, in which the
/// round volume is uniform in `(t, ξ₁, ξ₂)`.
pub fn sample_grid(n: usize, exclusion: &PoleConfiguration, seed: u64) -> Result<Vec<SpherePoint>> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: [f64; 3] = core::array::from_fn(|_| rng.random::<f64>());
    let alpha =
        [1.0 / R3_GENERATOR, 1.0 / (R3_GENERATOR * R3_GENERATOR), 1.0 / (R3_GENERATOR * R3_GENERATOR * R3_GENERATOR)];
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let idx = (i + 1) as f64;
        let u: [f64; 3] = core::array::from_fn(|j| {
            let t = shift[j] + idx * alpha[j];
            t - libm::floor(t)
        });
        let t = u[0];
        let r1 = libm::sqrt(1.0 - t);
        let r2 = libm::sqrt(t);
        let (x1, x2) = (2.0 * PI * u[1], 2.0 * PI * u[2]);
        let p = SpherePoint::new([r1 * libm::cos(x1), r1 * libm::sin(x1), r2 * libm::cos(x2), r2 * libm::sin(x2)])?;
        if exclusion.exclusion_radius > 0.0 && exclusion.is_excluded(&p) {
            continue;
        }
        out.push(p);
    }
    if out.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(out)
}

/// Quadrature node on a geodesic 2-sphere in `S³`.
///
/// `(normal, tangents[0], tangents[1])` is a positively oriented orthonormal
/// basis of `T_point S³`, with `normal` pointing away from the centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadNode {
    pub point: SpherePoint,
    pub weight: f64,
    pub normal: Vec4,
    pub tangents: [Vec4; 2],
}

/// Product Gauss–Legendre (in `cos θ`, `m` nodes) × trapezoid (in `φ`, `2m`
/// nodes) rule on the geodesic sphere `∂B_r(center)`. Weights sum to the
/// area `4π sin² r`.
pub fn sphere2_quadrature(center: &SpherePoint, r: f64, m: usize) -> Result<Vec<QuadNode>> {
    if !(r > 0.0 && r < PI / 4.0) {
        return Err(Error::Domain { what: "geodesic sphere radius", value: r });
    }
    if m < 8 {
        return Err(Error::InvalidParameter("quadrature order must be at least 8"));
    }
    let [e1, e2, e3] = center.tangent_frame();
    let c = center.coords();
    let (nodes, weights) = gauss_legendre(m);
    let n_phi = 2 * m;
    let (sr, cr) = (libm::sin(r), libm::cos(r));
    let dphi = 2.0 * PI / n_phi as f64;
    let mut out = Vec::with_capacity(m * n_phi);
    for (&ct, &w) in nodes.iter().zip(&weights) {
        let st = libm::sqrt((1.0 - ct * ct).max(0.0));
        for j in 0..n_phi {
            let phi = (j as f64 + 0.5) * dphi;
            let (sp, cp) = (libm::sin(phi), libm::cos(phi));
            let radial: Vec4 = core::array::from_fn(|i| ct * e3[i] + st * (cp * e1[i] + sp * e2[i]));
            let t_theta: Vec4 = core::array::from_fn(|i| -st * e3[i] + ct * (cp * e1[i] + sp * e2[i]));
            let t_phi: Vec4 = core::array::from_fn(|i| -sp * e1[i] + cp * e2[i]);
            let point = SpherePoint::new(core::array::from_fn(|i| cr * c[i] + sr * radial[i]))?;
            let normal: Vec4 = core::array::from_fn(|i| -sr * c[i] + cr * radial[i]);
            out.push(QuadNode { point, weight: sr * sr * w * dphi, normal, tangents: [t_theta, t_phi] });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: Vec4) -> SpherePoint {
        SpherePoint::new(v).unwrap()
    }

    #[test]
    fn distance_examples() {
        let a = p([1.0, 0.0, 0.0, 0.0]);
        assert_eq!(geodesic_distance(&a, &a), 0.0);
        let b = p([0.0, 0.0, 1.0, 0.0]);
        assert!((geodesic_distance(&a, &b) - PI / 2.0).abs() < 1e-15);
        assert!((geodesic_distance(&a, &a.antipode()) - PI).abs() < 1e-15);
    }

    #[test]
    fn grad_distance_rejects_pole_and_antipode() {
        let a = p([1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(grad_distance(&a, &a), Err(Error::PoleCoincidence { .. })));
        assert!(matches!(grad_distance(&a, &a.antipode()), Err(Error::PoleCoincidence { .. })));
    }

    #[test]
    fn grad_distance_is_unit_and_points_away() {
        let a = p([1.0, 0.0, 0.0, 0.0]);
        let q = p([0.0, 1.0, 0.0, 0.0]);
        let g = grad_distance(&a, &q).unwrap();
        assert!((g.norm() - 1.0).abs() < 1e-14);
        // direction of q at a is q itself (orthogonal); gradient points away
        assert!(g.dot(q.coords()) < 0.0);
    }

    #[test]
    fn frames_are_positively_oriented() {
        let x = p([0.3, -0.2, 0.5, 0.7]);
        let f = x.tangent_frame();
        assert!((det4(x.coords(), &f[0], &f[1], &f[2]) - 1.0).abs() < 1e-14);
        let v1 = linalg::scale(&linalg::add(&f[0], &f[2]), 1.0 / libm::sqrt(2.0));
        let g = complete_frame(&x, &v1);
        assert!((det4(x.coords(), &g[0], &g[1], &g[2]) - 1.0).abs() < 1e-14);
        for i in 0..3 {
            assert!(dot(&g[i], x.coords()).abs() < 1e-15);
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((dot(&g[i], &g[j]) - e).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn involution_swaps_and_squares_to_identity() {
        let a = p([1.0, 0.0, 0.0, 0.0]);
        assert_eq!(involution(&a), p([0.0, 0.0, 1.0, 0.0]));
        let x = p([0.3, -0.2, 0.5, 0.7]);
        assert_eq!(involution(&involution(&x)), x);
        // F0 parametrization goes to F1
        for j in 0..6 {
            let t = j as f64;
            let f0 = SpherePoint::from_complex(Complex64::from_polar(1.0, t), Complex64::new(0.0, 0.0)).unwrap();
            let img = involution(&f0);
            assert!(img.z1().norm() < 1e-15);
            assert!((img.z2() - f0.z1()).norm() < 1e-15);
        }
    }

    #[test]
    fn torus_action_permutes_poles() {
        for k in 1..=6 {
            let cfg = PoleConfiguration::new(k).unwrap();
            for g in TorusActionElement::all(k) {
                for (alpha, l, pole) in cfg.poles() {
                    let img = torus_act(&g, pole);
                    let shift = if alpha == 0 { g.ell } else { g.ell_prime } as usize;
                    let expected = cfg.pole(alpha, (l + shift) % k as usize);
                    assert!(linalg::norm(&linalg::sub(img.coords(), expected.coords())) < 1e-12);
                }
            }
            let id = TorusActionElement::identity(k);
            let x = p([0.3, -0.2, 0.5, 0.7]);
            assert_eq!(torus_act(&id, &x), x);
        }
    }

    #[test]
    fn involution_swaps_pole_sets() {
        let cfg = PoleConfiguration::new(5).unwrap();
        for (alpha, l, pole) in cfg.poles() {
            let img = involution(pole);
            assert_eq!(cfg.contains_pole(&img, 1e-12), Some((1 - alpha, l)));
        }
    }

    #[test]
    fn sample_grid_is_reproducible_and_unit() {
        let cfg = PoleConfiguration::new(3).unwrap();
        let a = sample_grid(500, &cfg, 11).unwrap();
        let b = sample_grid(500, &cfg, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|x| x.norm_defect().abs() < 1e-12));
        let c = sample_grid(500, &cfg, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sample_grid_respects_exclusion() {
        let cfg = PoleConfiguration::with_exclusion(4, 0.3).unwrap();
        let pts = sample_grid(2000, &cfg, 1).unwrap();
        assert!(pts.len() < 2000);
        assert!(pts.iter().all(|x| cfg.nearest_pole_distance(x) > 0.3));
        let all = PoleConfiguration::with_exclusion(1, 4.0).unwrap();
        assert_eq!(sample_grid(100, &all, 1), Err(Error::EmptySample));
    }

    #[test]
    fn quadrature_rejects_bad_input() {
        let c = p([1.0, 0.0, 0.0, 0.0]);
        assert!(sphere2_quadrature(&c, 0.9, 16).is_err());
        assert!(sphere2_quadrature(&c, 0.1, 4).is_err());
    }
}
