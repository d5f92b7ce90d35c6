//! Heisenberg groups `H₃(ℤ/kℤ)`, their action on the nilmanifold `Nil³_k`,
//! and the minimal index of abelian subgroups.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

/// Largest `k` for which [`min_abelian_index`] enumerates.
pub const MAX_ENUMERATION_K: u32 = 6;

/// The upper-triangular matrix `[[1,a,c],[0,1,b],[0,0,1]]` over `ℤ/kℤ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HeisenbergElement {
    pub a: u32,
    pub b: u32,
    pub c: u32,
    pub k: u32,
}

impl HeisenbergElement {
    pub fn new(a: i64, b: i64, c: i64, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("only k > 0 is supported"));
        }
        let m = k as i64;
        Ok(HeisenbergElement { a: a.rem_euclid(m) as u32, b: b.rem_euclid(m) as u32, c: c.rem_euclid(m) as u32, k })
    }

    fn raw(a: u64, b: u64, c: u64, k: u32) -> Self {
        let m = k as u64;
        HeisenbergElement { a: (a % m) as u32, b: (b % m) as u32, c: (c % m) as u32, k }
    }

    pub fn identity(k: u32) -> Self {
        HeisenbergElement { a: 0, b: 0, c: 0, k }
    }

    /// Generator `X = (1, 0, 0)`.
    pub fn x(k: u32) -> Self {
        Self::raw(1, 0, 0, k)
    }

    /// Generator `Y = (0, 1, 0)`.
    pub fn y(k: u32) -> Self {
        Self::raw(0, 1, 0, k)
    }

    /// Central generator `Z = (0, 0, 1)`.
    pub fn z(k: u32) -> Self {
        Self::raw(0, 0, 1, k)
    }

    pub fn is_identity(&self) -> bool {
        self.a == 0 && self.b == 0 && self.c == 0
    }

    /// `(a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.k != other.k {
            return Err(Error::ModulusMismatch { left: self.k, right: other.k });
        }
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, o: &Self) -> Self {
        let (a, b, c) = (self.a as u64, self.b as u64, self.c as u64);
        let (a2, b2, c2) = (o.a as u64, o.b as u64, o.c as u64);
        Self::raw(a + a2, b + b2, c + c2 + a * b2, self.k)
    }

    /// `(a,b,c)⁻¹ = (−a, −b, ab − c)`.
    pub fn inverse(&self) -> Self {
        let m = self.k as u64;
        let (a, b, c) = (self.a as u64, self.b as u64, self.c as u64);
        Self::raw(m - a, m - b, a * b % m + m - c, self.k)
    }

    /// `g h g⁻¹ h⁻¹`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        let gh = self.multiply(other)?;
        Ok(gh.mul_unchecked(&self.inverse()).mul_unchecked(&other.inverse()))
    }

    pub fn pow(&self, n: u64) -> Self {
        let mut acc = Self::identity(self.k);
        let mut base = *self;
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            base = base.mul_unchecked(&base);
            n >>= 1;
        }
        acc
    }

    /// Dense index in `0..k³`.
    pub fn index(&self) -> usize {
        let k = self.k as usize;
        (self.a as usize * k + self.b as usize) * k + self.c as usize
    }

    fn from_index(i: usize, k: u32) -> Self {
        let m = k as usize;
        HeisenbergElement { a: (i / (m * m)) as u32, b: (i / m % m) as u32, c: (i % m) as u32, k }
    }

    /// All `k³` elements.
    pub fn all(k: u32) -> impl Iterator<Item = Self> {
        let n = (k as usize).pow(3);
        (0..n).map(move |i| Self::from_index(i, k))
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        self.mul_unchecked(other) == other.mul_unchecked(self)
    }
}

/// Elements commuting with everything, by enumeration.
pub fn center(k: u32) -> Vec<HeisenbergElement> {
    HeisenbergElement::all(k).filter(|g| HeisenbergElement::all(k).all(|h| g.commutes_with(&h))).collect()
}

/// A point of `Nil³_k = (ℝ² × S¹)/ℤ²` with
/// `(a,b)·(x,y,z) = (x+a, y+b, e^{−2πikay}z)`, stored with `x, y ∈ [0,1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NilPoint {
    pub x: f64,
    pub y: f64,
    pub z: Complex64,
    pub k: u32,
}

fn phase(t: f64) -> Complex64 {
    Complex64::new(libm::cos(2.0 * PI * t), libm::sin(2.0 * PI * t))
}

impl NilPoint {
    /// Canonical representative of the class of `(x, y, z)`; `z` is
    /// normalized to the unit circle.
    pub fn new(x: f64, y: f64, z: Complex64, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("only k > 0 is supported"));
        }
        let n = z.norm();
        if !(n > 0.0 && x.is_finite() && y.is_finite()) {
            return Err(Error::Domain { what: "nil point", value: n });
        }
        Ok(Self::identify(x, y, z / n, k))
    }

    fn identify(x: f64, y: f64, z: Complex64, k: u32) -> Self {
        let mut a = -libm::floor(x);
        let (mut x, mut y) = (x + a, y - libm::floor(y));
        // x + a may round up to exactly 1
        if x >= 1.0 {
            x -= 1.0;
            a -= 1.0;
        }
        if y >= 1.0 {
            y -= 1.0;
        }
        // k·a·(shift in y) is an integer, so the twist may use the new y
        NilPoint { x, y, z: z * phase(-(k as f64) * a * y), k }
    }

    /// Applies the lattice element `(a, b)` to the representative, without
    /// renormalizing.
    pub fn lattice_shift(&self, a: i64, b: i64) -> (f64, f64, Complex64) {
        let (af, bf) = (a as f64, b as f64);
        (self.x + af, self.y + bf, self.z * phase(-(self.k as f64) * af * self.y))
    }

    /// Fibre rotation by `e^{2πit}`.
    pub fn rotate(&self, t: f64) -> Self {
        NilPoint { z: self.z * phase(t), ..*self }
    }

    /// Equality of classes up to `tol` in every coordinate.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if self.k != other.k {
            return false;
        }
        let a = libm::round(other.x - self.x) as i64;
        let b = libm::round(other.y - self.y) as i64;
        let (x, y, z) = self.lattice_shift(a, b);
        libm::fabs(x - other.x) <= tol && libm::fabs(y - other.y) <= tol && (z - other.z).norm() <= tol
    }

    /// `π_k : Nil³_k → T²`.
    pub fn projection_t2(&self) -> (f64, f64) {
        (self.x, self.y)
    }
}

/// `(a,b,c)·[x,y,z] = [x + a/k, y + b/k, e^{−2πi(ay + c/k)} z]`.
pub fn nil_act(g: &HeisenbergElement, p: &NilPoint) -> Result<NilPoint> {
    if g.k != p.k {
        return Err(Error::ModulusMismatch { left: g.k, right: p.k });
    }
    let k = g.k as f64;
    let (a, b, c) = (g.a as f64, g.b as f64, g.c as f64);
    let z = p.z * phase(-(a * p.y + c / k));
    Ok(NilPoint::identify(p.x + a / k, p.y + b / k, z, g.k))
}

type Bits = [u64; 4];

fn set_bit(s: &mut Bits, i: usize) {
    s[i / 64] |= 1 << (i % 64);
}

fn has_bit(s: &Bits, i: usize) -> bool {
    s[i / 64] >> (i % 64) & 1 == 1
}

/// `⟨H, g⟩` for abelian `H` and `g` centralizing `H`: `{h gⁱ}`.
fn extend_abelian(members: &[HeisenbergElement], g: &HeisenbergElement) -> Vec<HeisenbergElement> {
    let k = g.k;
    let mut bits: Bits = [0; 4];
    let mut out = Vec::new();
    let mut power = HeisenbergElement::identity(k);
    loop {
        let mut fresh = false;
        for h in members {
            let e = h.mul_unchecked(&power);
            if !has_bit(&bits, e.index()) {
                set_bit(&mut bits, e.index());
                out.push(e);
                fresh = true;
            }
        }
        if !fresh {
            break;
        }
        power = power.mul_unchecked(g);
    }
    out
}

/// Order of the largest abelian subgroup of `H₃(ℤ/kℤ)`.
///
/// Every abelian subgroup is reached from the trivial one by repeatedly
/// adjoining an element of its centralizer; the search runs over that
/// lattice with deduplication.
pub fn max_abelian_order(k: u32) -> Result<usize> {
    if k == 0 {
        return Err(Error::InvalidParameter("only k > 0 is supported"));
    }
    if k > MAX_ENUMERATION_K {
        return Err(Error::TooLarge { k, max: MAX_ENUMERATION_K });
    }
    let elements: Vec<_> = HeisenbergElement::all(k).collect();
    let mut seen: BTreeSet<Bits> = BTreeSet::new();
    let mut stack = alloc::vec![alloc::vec![HeisenbergElement::identity(k)]];
    let mut best = 1;
    while let Some(h) = stack.pop() {
        best = best.max(h.len());
        let mut bits: Bits = [0; 4];
        for e in &h {
            set_bit(&mut bits, e.index());
        }
        for g in &elements {
            if has_bit(&bits, g.index()) || !h.iter().all(|m| m.commutes_with(g)) {
                continue;
            }
            let next = extend_abelian(&h, g);
            let mut key: Bits = [0; 4];
            for e in &next {
                set_bit(&mut key, e.index());
            }
            if seen.insert(key) {
                stack.push(next);
            }
        }
    }
    Ok(best)
}

/// `|H₃(ℤ/kℤ)| / max |A|` over abelian `A`; exhaustive for `2 ≤ k ≤ 6`.
pub fn min_abelian_index(k: u32) -> Result<usize> {
    if k < 2 {
        return Err(Error::InvalidParameter("min_abelian_index needs k >= 2"));
    }
    Ok((k as usize).pow(3) / max_abelian_order(k)?)
}

/// Order `2k³` of the degree-two extension of `H₃(ℤ/kℤ)`.
pub fn degree_two_extension_order(k: u32) -> u64 {
    2 * (k as u64).pow(3)
}

/// Outcome of the exhaustive relation checks for one `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RelationReport {
    pub k: u32,
    pub order: usize,
    pub commutator_xy_is_z: bool,
    pub z_central: bool,
    pub generators_have_order_k: bool,
    pub axioms: bool,
}

impl RelationReport {
    pub fn passed(&self) -> bool {
        self.order == (self.k as usize).pow(3)
            && self.commutator_xy_is_z
            && self.z_central
            && self.generators_have_order_k
            && self.axioms
    }
}

/// Checks `XYX⁻¹Y⁻¹ = Z`, `[X,Z] = [Y,Z] = 1`, `Xᵏ = Yᵏ = Zᵏ = 1`, and the
/// group axioms over all elements (associativity over all triples for
/// `k ≤ 8`, over a stride otherwise).
pub fn check_relations(k: u32) -> Result<RelationReport> {
    let (x, y, z) = (HeisenbergElement::x(k), HeisenbergElement::y(k), HeisenbergElement::z(k));
    let e = HeisenbergElement::identity(k);
    let all: Vec<_> = HeisenbergElement::all(k).collect();
    let mut axioms = all
        .iter()
        .all(|g| g.mul_unchecked(&g.inverse()) == e && g.inverse().mul_unchecked(g) == e && g.mul_unchecked(&e) == *g);
    let stride = if k <= 8 { 1 } else { 7 };
    for g in all.iter().step_by(stride) {
        for h in all.iter().step_by(stride) {
            let gh = g.mul_unchecked(h);
            for l in all.iter().step_by(stride) {
                axioms &= gh.mul_unchecked(l) == g.mul_unchecked(&h.mul_unchecked(l));
            }
        }
    }
    Ok(RelationReport {
        k,
        order: all.len(),
        commutator_xy_is_z: x.commutator(&y)? == z,
        z_central: x.commutator(&z)?.is_identity() && y.commutator(&z)?.is_identity(),
        generators_have_order_k: [x, y, z].iter().all(|g| g.pow(k as u64).is_identity()),
        axioms,
    })
}

/// Whether the action is free at `p`: only the identity fixes it.
pub fn acts_freely_at(k: u32, p: &NilPoint, tol: f64) -> Result<bool> {
    for g in HeisenbergElement::all(k) {
        if !g.is_identity() && nil_act(&g, p)?.approx_eq(p, tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn el(a: i64, b: i64, c: i64, k: u32) -> HeisenbergElement {
        HeisenbergElement::new(a, b, c, k).unwrap()
    }

    #[test]
    fn generators_and_relations() {
        for k in 1..=8 {
            let r = check_relations(k).unwrap();
            assert!(r.passed(), "{r:?}");
        }
        let x = HeisenbergElement::x(5);
        assert_eq!(x.commutator(&HeisenbergElement::y(5)).unwrap(), HeisenbergElement::z(5));
        assert!(x.pow(5).is_identity() && !x.pow(4).is_identity());
    }

    #[test]
    fn modulus_mismatch() {
        let e = HeisenbergElement::x(3).multiply(&HeisenbergElement::x(4));
        assert!(matches!(e, Err(Error::ModulusMismatch { left: 3, right: 4 })));
        assert!(HeisenbergElement::new(0, 0, 0, 0).is_err());
    }

    #[test]
    fn matches_matrix_product() {
        let k = 7;
        let mat = |g: &HeisenbergElement| [[1u64, g.a as u64, g.c as u64], [0, 1, g.b as u64], [0, 0, 1]];
        for g in HeisenbergElement::all(k).step_by(5) {
            for h in HeisenbergElement::all(k).step_by(11) {
                let (m, n) = (mat(&g), mat(&h));
                let p: [[u64; 3]; 3] = core::array::from_fn(|i| {
                    core::array::from_fn(|j| (0..3).map(|l| m[i][l] * n[l][j]).sum::<u64>() % 7)
                });
                let gh = g.multiply(&h).unwrap();
                assert_eq!((p[0][1], p[1][2], p[0][2]), (gh.a as u64, gh.b as u64, gh.c as u64));
            }
        }
    }

    #[test]
    fn center_for_primes() {
        for k in [2u32, 3, 5] {
            let c = center(k);
            assert_eq!(c.len(), k as usize);
            assert!(c.iter().all(|g| g.a == 0 && g.b == 0));
        }
        assert_eq!(HeisenbergElement::all(4).count(), 64);
    }

    #[test]
    fn abelian_index() {
        let expected = [(2, 2), (3, 3), (4, 4), (5, 5), (6, 6)];
        for (k, idx) in expected {
            assert_eq!(min_abelian_index(k).unwrap(), idx, "k = {k}");
        }
        assert!(matches!(min_abelian_index(7), Err(Error::TooLarge { k: 7, max: 6 })));
        assert!(min_abelian_index(1).is_err());
        // the subgroup {(a, 0, c)} attains k²
        assert_eq!(max_abelian_order(4).unwrap(), 16);
    }

    #[test]
    fn extension_order() {
        assert_eq!(degree_two_extension_order(1), 2);
        assert_eq!(degree_two_extension_order(2), 16);
        assert_eq!(degree_two_extension_order(5), 250);
    }

    #[test]
    fn nil_point_identification() {
        let z = Complex64::new(0.6, 0.8);
        let p = NilPoint::new(0.3, 0.7, z, 3).unwrap();
        let q = NilPoint::new(1.3, 0.7, z * phase(-3.0 * 0.7), 3).unwrap();
        assert!(p.approx_eq(&q, 1e-12), "{p:?} {q:?}");
        let r = NilPoint::new(-0.7, 2.7, z * phase(3.0 * 0.7), 3).unwrap();
        assert!(p.approx_eq(&r, 1e-12), "{p:?} {r:?}");
        assert!(!p.approx_eq(&p.rotate(0.01), 1e-6));
    }

    #[test]
    fn z_is_vertical_rotation() {
        let p = NilPoint::new(0.2, 0.9, Complex64::new(1.0, 0.0), 4).unwrap();
        let zp = nil_act(&HeisenbergElement::z(4), &p).unwrap();
        assert!(zp.approx_eq(&p.rotate(-0.25), 1e-12));
        assert_eq!(zp.projection_t2(), p.projection_t2());
        let xp = nil_act(&HeisenbergElement::x(4), &p).unwrap();
        assert!((xp.x - 0.45).abs() < 1e-12 && (xp.y - 0.9).abs() < 1e-12);
        assert!((xp.z - phase(-0.9)).norm() < 1e-12);
    }

    #[test]
    fn freeness_exhaustive() {
        let mut rng_state = 0x1234_5678_u64;
        let mut next = || {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (rng_state >> 11) as f64 / (1u64 << 53) as f64
        };
        for k in 2..=5 {
            for _ in 0..20 {
                let p = NilPoint::new(next(), next(), phase(next()), k).unwrap();
                assert!(acts_freely_at(k, &p, 1e-9).unwrap());
            }
        }
    }

    proptest! {
        #[test]
        fn action_is_homomorphism(k in 2u32..=8, a in 0i64..8, b in 0i64..8, c in 0i64..8,
                                  a2 in 0i64..8, b2 in 0i64..8, c2 in 0i64..8,
                                  x in 0.0..1.0f64, y in 0.0..1.0f64, t in 0.0..1.0f64) {
            let p = NilPoint::new(x, y, phase(t), k).unwrap();
            let (g, h) = (el(a, b, c, k), el(a2, b2, c2, k));
            let lhs = nil_act(&g.multiply(&h).unwrap(), &p).unwrap();
            let rhs = nil_act(&g, &nil_act(&h, &p).unwrap()).unwrap();
            prop_assert!(lhs.approx_eq(&rhs, 1e-9));
        }

        #[test]
        fn commutator_acts_as_z(k in 2u32..=8, x in -2.0..2.0f64, y in -2.0..2.0f64, t in 0.0..1.0f64) {
            let p = NilPoint::new(x, y, phase(t), k).unwrap();
            let c = HeisenbergElement::x(k).commutator(&HeisenbergElement::y(k)).unwrap();
            prop_assert!(nil_act(&c, &p).unwrap().approx_eq(&nil_act(&HeisenbergElement::z(k), &p).unwrap(), 1e-9));
        }

        #[test]
        fn action_is_well_defined(k in 2u32..=8, a in 0i64..8, b in 0i64..8, c in 0i64..8,
                                  x in 0.0..1.0f64, y in 0.0..1.0f64, t in 0.0..1.0f64,
                                  s in -3i64..3, r in -3i64..3) {
            let p = NilPoint::new(x, y, phase(t), k).unwrap();
            let (x2, y2, z2) = p.lattice_shift(s, r);
            let q = NilPoint::new(x2, y2, z2, k).unwrap();
            prop_assert!(p.approx_eq(&q, 1e-9));
            let g = el(a, b, c, k);
            prop_assert!(nil_act(&g, &p).unwrap().approx_eq(&nil_act(&g, &q).unwrap(), 1e-9));
        }

        #[test]
        fn projection_is_equivariant(k in 2u32..=8, x in 0.0..1.0f64, y in 0.0..1.0f64, t in 0.0..1.0f64) {
            let p = NilPoint::new(x, y, phase(t), k).unwrap();
            let kf = k as f64;
            let xp = nil_act(&HeisenbergElement::x(k), &p).unwrap().projection_t2();
            let yp = nil_act(&HeisenbergElement::y(k), &p).unwrap().projection_t2();
            let circ = |u: f64, v: f64| { let d = (u - v).rem_euclid(1.0); d.min(1.0 - d) };
            prop_assert!(circ(xp.0, x + 1.0 / kf) < 1e-12 && circ(xp.1, y) < 1e-12);
            prop_assert!(circ(yp.0, x) < 1e-12 && circ(yp.1, y + 1.0 / kf) < 1e-12);
            prop_assert_eq!(p.rotate(0.3).projection_t2(), p.projection_t2());
            // fibre rotation commutes with the action
            let g = HeisenbergElement::x(k);
            prop_assert!(nil_act(&g, &p.rotate(0.3)).unwrap().approx_eq(&nil_act(&g, &p).unwrap().rotate(0.3), 1e-9));
        }
    }
}
