//! The circle-bundle metric
//! `h_k = (kΛ)⁻¹ [W_k(u) g_{S³} + W_k(u)⁻¹ θ⊗θ]`, `W_k(x) = k(V(x/k) + Λ)`,
//! whose curvature form is `dθ = ω = *du`, and its Ricci curvature.
//!
//! Ricci curvature is available in four independent layers:
//!
//! * [`HkMetric::ricci_closed_form`]: the final closed form in an
//!   `h_k`-orthonormal frame;
//! * [`layers::ricci_bundle_almost`]: `W = W(u)` with `u` harmonic;
//! * [`layers::ricci_bundle_general`]: any `W > 0` and any curvature form;
//! * [`layers::ricci_bundle_standard`]: fibre length, base Ricci and
//!   covariant derivatives of the curvature form, here fed by the coordinate
//!   curvature oracle.
//!
//! The last three live in the frame `{Û, e_i/√W}` orthonormal for the bracket
//! `ĝ = W g + W⁻¹ θ²`, and equal the closed form divided by `kΛ`.

pub mod layers;
pub mod profile;

use alloc::vec::Vec;

use crate::harmonic::Potential;
use crate::linalg::{self, Vec4};
use crate::s3core::{complete_frame, sample_grid, PoleConfiguration, SpherePoint, DEFAULT_EXCLUSION};
use crate::scalar::Real;
use crate::{Error, Result};

pub use profile::ProfileV;

/// `k ≥ 1`, `Λ > 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricParams {
    pub k: u32,
    pub lambda: f64,
}

impl MetricParams {
    pub fn new(k: u32, lambda: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be positive"));
        }
        if !(lambda > 1.0 && lambda.is_finite()) {
            return Err(Error::Domain { what: "lambda", value: lambda });
        }
        Ok(MetricParams { k, lambda })
    }

    /// `V_Λ(x) = V(x)/Λ + 1`
    pub fn v_lambda(&self, x: f64) -> f64 {
        profile::v(x) / self.lambda + 1.0
    }

    /// `W_k(x) = k(V(x/k) + Λ)`
    pub fn w_k<T: Real>(&self, x: T) -> T {
        let k = self.k as f64;
        (profile::v(x.scale(1.0 / k)).shift(self.lambda)).scale(k)
    }
}

/// Ricci form of a circle bundle over a `B`-dimensional base, in an
/// orthonormal frame `{U, X₁, …, X_B}` with `U` vertical.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleBundleRicci<const B: usize> {
    pub vertical: f64,
    pub mixed: [f64; B],
    pub horizontal: [[f64; B]; B],
}

/// The 4-dimensional case used throughout.
pub type RicciForm = CircleBundleRicci<3>;

impl<const B: usize> CircleBundleRicci<B> {
    pub fn scaled(&self, c: f64) -> Self {
        CircleBundleRicci {
            vertical: c * self.vertical,
            mixed: self.mixed.map(|m| c * m),
            horizontal: self.horizontal.map(|r| r.map(|v| c * v)),
        }
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = libm::fabs(self.vertical);
        for v in self.mixed {
            m = m.max(libm::fabs(v));
        }
        m.max(linalg::max_abs(&self.horizontal))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut m = libm::fabs(self.vertical - other.vertical);
        for i in 0..B {
            m = m.max(libm::fabs(self.mixed[i] - other.mixed[i]));
        }
        m.max(linalg::max_abs_diff(&self.horizontal, &other.horizontal))
    }

    /// `‖self − reference‖_max / ‖reference‖_max`
    pub fn relative_deviation(&self, reference: &Self) -> f64 {
        self.max_abs_diff(reference) / reference.max_abs().max(f64::MIN_POSITIVE)
    }

    /// Whether mixed and off-diagonal horizontal entries vanish exactly.
    pub fn is_diagonal(&self) -> bool {
        self.mixed.iter().all(|m| *m == 0.0) && (0..B).all(|i| (0..B).all(|j| i == j || self.horizontal[i][j] == 0.0))
    }

    /// Eigenvalues in ascending order. A diagonal form reads them off;
    /// otherwise a Jacobi sweep is run on the assembled matrix.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = if self.is_diagonal() {
            core::iter::once(self.vertical).chain((0..B).map(|i| self.horizontal[i][i])).collect()
        } else {
            self.eigenvalues_jacobi()
        };
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Eigenvalues through the generic symmetric solver, ascending.
    pub fn eigenvalues_jacobi(&self) -> Vec<f64> {
        let mut flat: Vec<f64> = self.assembled().into_iter().flatten().collect();
        linalg::symmetric_eigenvalues_flat(&mut flat, B + 1)
    }

    /// The assembled `(B+1)×(B+1)` matrix, row-major.
    pub fn assembled(&self) -> Vec<Vec<f64>> {
        let mut out = alloc::vec![alloc::vec![0.0; B + 1]; B + 1];
        out[0][0] = self.vertical;
        for i in 0..B {
            out[0][i + 1] = self.mixed[i];
            out[i + 1][0] = self.mixed[i];
            for j in 0..B {
                out[i + 1][j + 1] = self.horizontal[i][j];
            }
        }
        out
    }
}

/// A degree-zero homogeneous scalar field on `ℝ⁴ \ 0`, i.e. a function on
/// `S³` that can be pushed through jets in ambient coordinates.
pub trait AmbientField {
    fn eval<T: Real>(&self, y: &[T; 4]) -> T;
}

/// `W_k ∘ u`.
#[derive(Debug, Clone, Copy)]
pub struct WkField<'a> {
    pub params: MetricParams,
    pub potential: &'a Potential,
}

impl AmbientField for WkField<'_> {
    fn eval<T: Real>(&self, y: &[T; 4]) -> T {
        self.params.w_k(self.potential.value_ambient(y, false))
    }
}

/// A constant field.
#[derive(Debug, Clone, Copy)]
pub struct ConstantField(pub f64);

impl AmbientField for ConstantField {
    fn eval<T: Real>(&self, _y: &[T; 4]) -> T {
        T::cst(self.0)
    }
}

/// Pointwise data of `u_k` used by the closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalData {
    pub uk: f64,
    pub grad_uk: Vec4,
    /// `|du_k|²` in the round metric.
    pub grad_sq: f64,
    /// Round-orthonormal positive frame with `frame[0] ∥ ∇u` when `∇u ≠ 0`.
    pub frame: [Vec4; 3],
}

/// Round-orthonormal positive frame at `x` whose first vector is along `v`,
/// or the quaternion frame when `|v| ≤ 1e−12`.
pub fn aligned_frame(x: &SpherePoint, v: &Vec4) -> [Vec4; 3] {
    let n = linalg::norm(v);
    if n > 1e-12 {
        complete_frame(x, &linalg::scale(v, 1.0 / n))
    } else {
        x.tangent_frame()
    }
}

/// `h_k` for one `(k, Λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HkMetric {
    pub params: MetricParams,
    pub potential: Potential,
}

impl HkMetric {
    pub fn new(k: u32, lambda: f64) -> Result<Self> {
        let params = MetricParams::new(k, lambda)?;
        Ok(HkMetric { params, potential: Potential::new(PoleConfiguration::new(k)?) })
    }

    pub fn w_field(&self) -> WkField<'_> {
        WkField { params: self.params, potential: &self.potential }
    }

    pub fn local_data(&self, x: &SpherePoint) -> Result<LocalData> {
        let uk = self.potential.value(x, true)?;
        let g = self.potential.gradient(x, true)?;
        let grad_uk = *g.components();
        Ok(LocalData { uk, grad_uk, grad_sq: linalg::dot(&grad_uk, &grad_uk), frame: aligned_frame(x, &grad_uk) })
    }

    /// Length of the circle fibre through `x`: `(kΛ √V_Λ(u_k))⁻¹`.
    pub fn fiber_length(&self, x: &SpherePoint) -> Result<f64> {
        let uk = self.potential.value(x, true)?;
        let p = &self.params;
        Ok(1.0 / (p.k as f64 * p.lambda * libm::sqrt(p.v_lambda(uk))))
    }

    /// Ricci form in the `h_k`-orthonormal frame `{U, X₁, X₂, X₃}` with
    /// `X₁ ∥ ∇u`.
    pub fn ricci_closed_form(&self, x: &SpherePoint) -> Result<RicciForm> {
        let d = self.local_data(x)?;
        Ok(ricci_from_scalars(self.params.lambda, d.uk, d.grad_sq))
    }
}

/// The closed form from `u_k` and `|du_k|²` alone.
///
/// With `A = V(u_k) + Λ`, `a = V''/A`, `b = (1 − V'²)/A²`:
/// `Ric(U,U) = ½|du_k|² (Λ/A)(a + b)`, `Ric(X₁,X₁) = (Λ/A)(2 − ½|du_k|² a)`,
/// `Ric(X_i,X_i) = (Λ/A)(2 − ½|du_k|²(a + b))` for `i = 2, 3`.
pub fn ricci_from_scalars(lambda: f64, uk: f64, grad_sq: f64) -> RicciForm {
    let a_total = profile::v(uk) + lambda;
    let ratio = lambda / a_total;
    let a = profile::v_second(uk) / a_total;
    let b = profile::one_minus_v_prime_sq(uk) / (a_total * a_total);
    let vertical = 0.5 * grad_sq * ratio * (a + b);
    let x1 = ratio * (2.0 - 0.5 * grad_sq * a);
    let x23 = ratio * (2.0 - 0.5 * grad_sq * (a + b));
    RicciForm { vertical, mixed: [0.0; 3], horizontal: [[x1, 0.0, 0.0], [0.0, x23, 0.0], [0.0, 0.0, x23]] }
}

/// Sample size of the grid used by [`choose_lambda`].
pub const LAMBDA_SAMPLES: usize = 20_000;
/// Seed of the grid used by [`choose_lambda`].
pub const LAMBDA_SEED: u64 = 0x5EED_1A3B;
/// Fraction of `δ` the margins must meet on the calibration grid, so that
/// the chosen `Λ` still passes on a resampled grid.
pub const LAMBDA_HEADROOM: f64 = 0.9;
/// Largest exponent tried by [`choose_lambda`].
pub const LAMBDA_MAX_EXPONENT: i32 = 40;

/// `(u_k, |du_k|²)` at each sample point.
pub fn potential_samples(k: u32, pts: &[SpherePoint]) -> Result<Vec<(f64, f64)>> {
    let pot = Potential::new(PoleConfiguration::new(k)?);
    pts.iter()
        .map(|x| {
            let uk = pot.value(x, true)?;
            let g = pot.gradient(x, true)?;
            Ok((uk, g.norm() * g.norm()))
        })
        .collect()
}

/// Worst values of the three margin quantities over samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaMargins {
    /// `max |du_k|² V''/(V+Λ)`
    pub hessian_term: f64,
    /// `max |du_k|² (1 − V'²)/(V+Λ)`
    pub gradient_term: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub max_vertical: f64,
}

impl LambdaMargins {
    /// All three conditions for the margin `δ`.
    pub fn satisfied(&self, delta: f64) -> bool {
        self.hessian_term <= delta
            && self.gradient_term <= delta
            && self.min_eigenvalue > 0.0
            && self.max_eigenvalue <= 2.0 + 10.0 * delta
    }
}

pub fn lambda_margins(lambda: f64, data: &[(f64, f64)]) -> LambdaMargins {
    let mut m = LambdaMargins {
        hessian_term: 0.0,
        gradient_term: 0.0,
        min_eigenvalue: f64::INFINITY,
        max_eigenvalue: f64::NEG_INFINITY,
        max_vertical: 0.0,
    };
    for &(uk, q) in data {
        let a = profile::v(uk) + lambda;
        m.hessian_term = m.hessian_term.max(q * profile::v_second(uk) / a);
        m.gradient_term = m.gradient_term.max(q * profile::one_minus_v_prime_sq(uk) / a);
        let form = ricci_from_scalars(lambda, uk, q);
        m.max_vertical = m.max_vertical.max(form.vertical);
        for ev in form.eigenvalues() {
            m.min_eigenvalue = m.min_eigenvalue.min(ev);
            m.max_eigenvalue = m.max_eigenvalue.max(ev);
        }
    }
    m
}

/// Smallest `Λ = 2ʲ`, `j ≥ 1`, meeting the margin conditions on the given
/// `(u_k, |du_k|²)` data with target `margin`.
pub fn choose_lambda_on(data: &[(f64, f64)], margin: f64) -> Result<f64> {
    for j in 1..=LAMBDA_MAX_EXPONENT {
        let lambda = libm::ldexp(1.0, j);
        if lambda_margins(lambda, data).satisfied(margin) {
            return Ok(lambda);
        }
    }
    Err(Error::NotFound { what: "lambda" })
}

/// Smallest power-of-two `Λ` for which the Ricci margins of `h_k` hold with
/// target `δ ∈ (0, 0.1]` on the standard grid (exclusion 0.05), with
/// [`LAMBDA_HEADROOM`] applied.
pub fn choose_lambda(k: u32, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 0.1) {
        return Err(Error::Domain { what: "delta", value: delta });
    }
    let cfg = PoleConfiguration::with_exclusion(k, DEFAULT_EXCLUSION)?;
    let pts = sample_grid(LAMBDA_SAMPLES, &cfg, LAMBDA_SEED)?;
    let data = potential_samples(k, &pts)?;
    choose_lambda_on(&data, LAMBDA_HEADROOM * delta)
}
