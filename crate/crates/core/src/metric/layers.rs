//! Ricci curvature of circle bundles in the general and standard forms, the
//! conformal-change identity that links them, and coordinate charts feeding
//! the curvature oracle.

use crate::curvature::{curvature_at, hessian, laplacian, ChartMetric, ChartScalar, CurvatureBundle, DerivativeScheme};
use crate::harmonic::Potential;
use crate::linalg::{self, det4, dot, Vec4};
use crate::s3core::SpherePoint;
use crate::scalar::{Jet, Real};
use crate::{Error, Result};

use super::{AmbientField, CircleBundleRicci, MetricParams, RicciForm};

/// Pointwise input of the general layer for `W g_{S³} + W⁻¹ θ²`.
///
/// The curvature form enters through its Hodge dual: `ω(A, B) = det[x, ν, A, B]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralBundleData {
    pub point: SpherePoint,
    pub w: f64,
    pub grad_w: Vec4,
    pub lap_w: f64,
    /// `ν` with `ω = *ν♭`.
    pub omega_dual: Vec4,
    /// `δω` as a tangent vector.
    pub delta_omega: Vec4,
}

impl GeneralBundleData {
    /// `W`, `∇W`, `ΔW` from an ambient field, with `ω = *ν` coclosed.
    pub fn from_field<F: AmbientField>(field: &F, x: &SpherePoint, omega_dual: Vec4) -> Self {
        let j = field.eval(&Jet::<4>::seed(x.coords()));
        let grad: Vec4 = j.g;
        let s = dot(&grad, x.coords());
        GeneralBundleData {
            point: *x,
            w: j.v,
            grad_w: linalg::axpy(&grad, -s, x.coords()),
            lap_w: j.h[0][0] + j.h[1][1] + j.h[2][2] + j.h[3][3],
            omega_dual,
            delta_omega: [0.0; 4],
        }
    }

    /// `ω(A, B)` for tangent vectors at the base point.
    pub fn omega(&self, a: &Vec4, b: &Vec4) -> f64 {
        det4(self.point.coords(), &self.omega_dual, a, b)
    }
}

/// General layer: Ricci of `W g_{S³} + W⁻¹ θ²` in the frame `{Û, e_i/√W}`
/// built from the round-orthonormal `frame`.
///
/// `Ric(U,U) = ½W⁻²ΔW + ½W⁻³(|ω|² − |∇W|²)`,
/// `Ric(U,X) = −½W^{−3/2}(δω(X) − W⁻¹ω(∇W, X))`,
/// `Ric(X,Y) = (2 − ½ΔW/W)⟨X,Y⟩ − ½W⁻²(⟨ι_Xω, ι_Yω⟩ − ⟨dW∧X♭, dW∧Y♭⟩)`
/// for round vectors `X, Y`.
pub fn ricci_bundle_general(data: &GeneralBundleData, frame: &[Vec4; 3]) -> Result<RicciForm> {
    let w = data.w;
    if !(w > 0.0) {
        return Err(Error::NonpositiveW(w));
    }
    let nu = &data.omega_dual;
    let dw = &data.grad_w;
    let nu2 = dot(nu, nu);
    let dw2 = dot(dw, dw);
    let vertical = 0.5 * data.lap_w / (w * w) + 0.5 * (nu2 - dw2) / (w * w * w);
    let mixed_round: [f64; 3] = core::array::from_fn(|i| {
        -0.5 * libm::pow(w, -1.5) * (dot(&data.delta_omega, &frame[i]) - data.omega(dw, &frame[i]) / w)
    });
    let base = 2.0 - 0.5 * data.lap_w / w;
    let horizontal_round: [[f64; 3]; 3] = core::array::from_fn(|i| {
        core::array::from_fn(|j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            let (xi, xj) = (&frame[i], &frame[j]);
            let interior = nu2 * delta - dot(nu, xi) * dot(nu, xj);
            let wedge = dw2 * delta - dot(dw, xi) * dot(dw, xj);
            base * delta - 0.5 * (interior - wedge) / (w * w)
        })
    });
    // round-unit e_i is √W times the ĝ-unit vector
    Ok(CircleBundleRicci {
        vertical,
        mixed: mixed_round.map(|m| m / libm::sqrt(w)),
        horizontal: horizontal_round.map(|r| r.map(|v| v / w)),
    })
}

/// Reduced layer for `W = W(u)` with `u` harmonic and `ω = *du`:
/// `Ric(U,U) = ½|du|²/W (W''/W + (1−W'²)/W²)`, `Ric(U,X) = 0`,
/// `Ric(X,X) = 2|X|² + (1−W'²)/(2W²) du(X)² − ½(W''/W + (1−W'²)/W²)|du|²|X|²`,
/// in the frame `{Û, e_i/√W}`.
pub fn ricci_bundle_almost(w: f64, w1: f64, w2: f64, du: &Vec4, frame: &[Vec4; 3]) -> Result<RicciForm> {
    if !(w > 0.0) {
        return Err(Error::NonpositiveW(w));
    }
    let du2 = dot(du, du);
    let one_m = 1.0 - w1 * w1;
    let bracket = w2 / w + one_m / (w * w);
    let vertical = 0.5 * du2 / w * bracket;
    let horizontal: [[f64; 3]; 3] = core::array::from_fn(|i| {
        core::array::from_fn(|j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            let v = 2.0 * delta + one_m / (2.0 * w * w) * dot(du, &frame[i]) * dot(du, &frame[j])
                - 0.5 * bracket * du2 * delta;
            v / w
        })
    });
    Ok(CircleBundleRicci { vertical, mixed: [0.0; 3], horizontal })
}

/// [`ricci_bundle_almost`] for `W = W_k`, evaluated at the unscaled `u`.
pub fn ricci_almost_for_wk(params: &MetricParams, u: f64, du: &Vec4, frame: &[Vec4; 3]) -> Result<RicciForm> {
    let k = params.k as f64;
    let uk = u / k;
    let w = params.w_k(u);
    let w1 = super::profile::v_prime(uk);
    let w2 = super::profile::v_second(uk) / k;
    // 1 − W'² computed directly keeps full accuracy where V' ≈ ±1
    let one_m = super::profile::one_minus_v_prime_sq(uk);
    let w1_eff = libm::sqrt((1.0 - one_m).max(0.0)) * libm::copysign(1.0, w1);
    ricci_bundle_almost(w, w1_eff, w2, du, frame)
}

/// Pointwise input of the standard layer in a base-orthonormal frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardBundleData<const B: usize> {
    pub f: f64,
    pub grad_f: [f64; B],
    pub hess_f: [[f64; B]; B],
    pub omega: [[f64; B]; B],
    pub delta_omega: [f64; B],
    pub ric_base: [[f64; B]; B],
}

/// Standard layer for `g_B + f² θ²`:
/// `Ric(U,U) = −Δf/f + f²|ω|²/2`, `Ric(U,X) = ½(−f δω(X) + 3ω(X, ∇f))`,
/// `Ric(X,Y) = Ric_B(X,Y) − (f²/2)⟨ι_Xω, ι_Yω⟩ − Hess f(X,Y)/f`.
pub fn ricci_bundle_standard<const B: usize>(d: &StandardBundleData<B>) -> Result<CircleBundleRicci<B>> {
    let f = d.f;
    if !(f > 0.0) {
        return Err(Error::NonpositiveF(f));
    }
    let lap: f64 = (0..B).map(|i| d.hess_f[i][i]).sum();
    let mut omega_sq = 0.0;
    for i in 0..B {
        for j in (i + 1)..B {
            omega_sq += d.omega[i][j] * d.omega[i][j];
        }
    }
    let vertical = -lap / f + 0.5 * f * f * omega_sq;
    let mixed: [f64; B] = core::array::from_fn(|i| {
        let w_grad: f64 = (0..B).map(|j| d.omega[i][j] * d.grad_f[j]).sum();
        0.5 * (-f * d.delta_omega[i] + 3.0 * w_grad)
    });
    let horizontal: [[f64; B]; B] = core::array::from_fn(|i| {
        core::array::from_fn(|j| {
            let contraction: f64 = (0..B).map(|m| d.omega[i][m] * d.omega[j][m]).sum();
            d.ric_base[i][j] - 0.5 * f * f * contraction - d.hess_f[i][j] / f
        })
    });
    Ok(CircleBundleRicci { vertical, mixed, horizontal })
}

/// Stereographic chart of `S³` centred at a point with a given positive
/// round-orthonormal frame: `x(q) = ((1−|q|²)c + 2Σqᵢeᵢ)/(1+|q|²)`.
/// At `q = 0`, `∂ᵢ ↦ 2eᵢ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StereoChart {
    pub center: Vec4,
    pub frame: [Vec4; 3],
}

impl StereoChart {
    pub fn point<T: Real>(&self, q: &[T; 3]) -> [T; 4] {
        let r2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
        let inv = r2.shift(1.0).recip();
        let one_m = T::cst(1.0) - r2;
        core::array::from_fn(|a| {
            let mut s = one_m.scale(self.center[a]);
            for i in 0..3 {
                s = s + q[i].scale(2.0 * self.frame[i][a]);
            }
            s * inv
        })
    }

    /// Round conformal factor `4/(1+|q|²)²`.
    pub fn round_factor<T: Real>(&self, q: &[T; 3]) -> T {
        let d = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).shift(1.0);
        (d * d).recip().scale(4.0)
    }
}

/// The base metric `W g_{S³}` in a [`StereoChart`].
pub struct BaseChartMetric<'a, F> {
    pub chart: StereoChart,
    pub field: &'a F,
}

impl<F: AmbientField> ChartMetric<3> for BaseChartMetric<'_, F> {
    fn components<T: Real>(&self, q: &[T; 3]) -> [[T; 3]; 3] {
        let c = self.field.eval(&self.chart.point(q)) * self.chart.round_factor(q);
        core::array::from_fn(|i| core::array::from_fn(|j| if i == j { c } else { T::cst(0.0) }))
    }
}

/// `W^{−1/2}` pulled back to a chart.
pub struct FiberLengthScalar<'a, F> {
    pub chart: StereoChart,
    pub field: &'a F,
}

impl<F: AmbientField> ChartScalar<3> for FiberLengthScalar<'_, F> {
    fn eval<T: Real>(&self, q: &[T; 3]) -> T {
        self.field.eval(&self.chart.point(q)).sqrt().recip()
    }
}

/// Unscaled `u` pulled back to a chart.
pub struct PotentialScalar<'a> {
    pub chart: StereoChart,
    pub potential: &'a Potential,
}

impl ChartScalar<3> for PotentialScalar<'_> {
    fn eval<T: Real>(&self, q: &[T; 3]) -> T {
        self.potential.value_ambient(&self.chart.point(q), false)
    }
}

/// Standard-layer data of `W g_{S³} + W⁻¹θ²` with `ω = *du`, computed from
/// coordinate curvature of the base metric in a stereographic chart.
/// The frame is `bᵢ = eᵢ/√W`, i.e. `∂ᵢ/(2√W)` at the centre.
pub fn standard_data_from_chart<F: AmbientField>(
    field: &F,
    potential: &Potential,
    x: &SpherePoint,
    frame: &[Vec4; 3],
    scheme: DerivativeScheme,
) -> Result<StandardBundleData<3>> {
    let chart = StereoChart { center: *x.coords(), frame: *frame };
    let base = BaseChartMetric { chart, field };
    let bundle = curvature_at(&base, &[0.0; 3], scheme)?;
    let w = bundle.metric[0][0] / 4.0;
    if !(w > 0.0) {
        return Err(Error::NonpositiveW(w));
    }
    let unit = 1.0 / (2.0 * libm::sqrt(w));
    let f_jet = crate::curvature::scalar_jet(&FiberLengthScalar { chart, field }, &[0.0; 3]);
    let hess = hessian(&bundle, &f_jet);
    let u_jet = crate::curvature::scalar_jet(&PotentialScalar { chart, potential }, &[0.0; 3]);
    let (omega, d_omega) = chart_omega(&u_jet);
    let delta = codifferential(&bundle, &omega, &d_omega);
    Ok(StandardBundleData {
        f: f_jet.v,
        grad_f: core::array::from_fn(|i| f_jet.g[i] * unit),
        hess_f: core::array::from_fn(|i| core::array::from_fn(|j| hess[i][j] * unit * unit)),
        omega: core::array::from_fn(|i| core::array::from_fn(|j| omega[i][j] * unit * unit)),
        delta_omega: core::array::from_fn(|j| delta[j] * unit),
        ric_base: core::array::from_fn(|i| core::array::from_fn(|j| bundle.ricci[i][j] * unit * unit)),
    })
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// `ω = *du` in stereographic coordinates at `q = 0`:
/// `ω_ij = 2 ε_ijk ∂_k u / (1 + |q|²)`, and its first derivatives.
fn chart_omega(u: &Jet<3>) -> ([[f64; 3]; 3], [[[f64; 3]; 3]; 3]) {
    let mut omega = [[0.0; 3]; 3];
    let mut d_omega = [[[0.0; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let e = levi_civita(i, j, k);
                if e == 0.0 {
                    continue;
                }
                omega[i][j] += 2.0 * e * u.g[k];
                for m in 0..3 {
                    // ∂_m (1+|q|²)⁻¹ vanishes at q = 0
                    d_omega[i][j][m] += 2.0 * e * u.h[k][m];
                }
            }
        }
    }
    (omega, d_omega)
}

/// `(δω)_j = −g^{ik}(∂_k ω_ij − Γˡ_ki ω_lj − Γˡ_kj ω_il)`.
fn codifferential(bundle: &CurvatureBundle<3>, omega: &[[f64; 3]; 3], d_omega: &[[[f64; 3]; 3]; 3]) -> [f64; 3] {
    let g = &bundle.inverse;
    let gam = &bundle.christoffel;
    core::array::from_fn(|j| {
        let mut s = 0.0;
        for i in 0..3 {
            for k in 0..3 {
                let mut cov = d_omega[i][j][k];
                for l in 0..3 {
                    cov -= gam[l][k][i] * omega[l][j] + gam[l][k][j] * omega[i][l];
                }
                s += g[i][k] * cov;
            }
        }
        -s
    })
}

/// Both sides of
/// `Ric_{Wg} − Hess_{Wg}(W^{−1/2})/W^{−1/2}
///   = Ric_g − ½(ΔW/W − |dW|²/W²) g − c · dW/W ⊗ dW/W`
/// in stereographic coordinates at the chart centre, where `g` is round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalIdentity {
    pub lhs: [[f64; 3]; 3],
    pub rhs: [[f64; 3]; 3],
}

impl ConformalIdentity {
    pub fn residual(&self) -> f64 {
        linalg::max_abs_diff(&self.lhs, &self.rhs)
    }

    pub fn relative_residual(&self) -> f64 {
        self.residual() / linalg::max_abs(&self.rhs).max(f64::MIN_POSITIVE)
    }
}

/// Coefficient of `dW/W ⊗ dW/W` in the conformal identity.
pub const CONFORMAL_DW_COEFFICIENT: f64 = 0.5;

/// Evaluates the conformal identity. The left side comes from the coordinate
/// oracle applied to `W g_{S³}`; the right side from ambient jets of `W`.
pub fn conformal_ricci_identity<F: AmbientField>(
    field: &F,
    x: &SpherePoint,
    scheme: DerivativeScheme,
    dw_coefficient: f64,
) -> Result<ConformalIdentity> {
    let frame = x.tangent_frame();
    let chart = StereoChart { center: *x.coords(), frame };
    let bundle = curvature_at(&BaseChartMetric { chart, field }, &[0.0; 3], scheme)?;
    let f_jet = crate::curvature::scalar_jet(&FiberLengthScalar { chart, field }, &[0.0; 3]);
    let hess = hessian(&bundle, &f_jet);
    let lhs: [[f64; 3]; 3] =
        core::array::from_fn(|i| core::array::from_fn(|j| bundle.ricci[i][j] - hess[i][j] / f_jet.v));

    let data = GeneralBundleData::from_field(field, x, [0.0; 4]);
    let w = data.w;
    if !(w > 0.0) {
        return Err(Error::NonpositiveW(w));
    }
    let dw2 = dot(&data.grad_w, &data.grad_w);
    // chart vectors ∂ᵢ = 2eᵢ, round metric 4δ, Ric_round = 2g
    let dw_chart: [f64; 3] = core::array::from_fn(|i| 2.0 * dot(&data.grad_w, &frame[i]));
    let scalar_part = 0.5 * (data.lap_w / w - dw2 / (w * w));
    let rhs: [[f64; 3]; 3] = core::array::from_fn(|i| {
        core::array::from_fn(|j| {
            let g = if i == j { 4.0 } else { 0.0 };
            2.0 * g - scalar_part * g - dw_coefficient * dw_chart[i] * dw_chart[j] / (w * w)
        })
    });
    Ok(ConformalIdentity { lhs, rhs })
}

/// Laplacian of `W^{−1/2}` in the base metric, through the oracle; exposed
/// for the conformal Laplacian check.
pub fn base_laplacian_of_fiber_length<F: AmbientField>(field: &F, x: &SpherePoint) -> Result<f64> {
    let chart = StereoChart { center: *x.coords(), frame: x.tangent_frame() };
    let bundle = curvature_at(&BaseChartMetric { chart, field }, &[0.0; 3], DerivativeScheme::Dual)?;
    let f_jet = crate::curvature::scalar_jet(&FiberLengthScalar { chart, field }, &[0.0; 3]);
    Ok(laplacian(&bundle, &f_jet))
}

/// Berger metric on `S³` in coordinates `(η, ξ₁, ξ₂)`:
/// `dη² + cos²η sin²η (dξ₁ − dξ₂)² + f² (cos²η dξ₁ + sin²η dξ₂)²`.
/// It is the Hopf bundle over `S²(½)` with fibre scale `f` and `|ω| = 2`;
/// `f = 1` is the unit round sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BergerChart {
    pub f: f64,
}

impl ChartMetric<3> for BergerChart {
    fn components<T: Real>(&self, x: &[T; 3]) -> [[T; 3]; 3] {
        let c2 = x[0].cos() * x[0].cos();
        let s2 = x[0].sin() * x[0].sin();
        let b = c2 * s2;
        let f2 = self.f * self.f;
        let z = T::cst(0.0);
        [
            [T::cst(1.0), z, z],
            [z, b + (c2 * c2).scale(f2), -b + (c2 * s2).scale(f2)],
            [z, -b + (c2 * s2).scale(f2), b + (s2 * s2).scale(f2)],
        ]
    }
}

impl BergerChart {
    /// Coordinate components of the orthonormal frame `{U, X₁, X₂}` at `η`.
    pub fn frame(&self, eta: f64) -> [[f64; 3]; 3] {
        let (s, c) = (libm::sin(eta), libm::cos(eta));
        [[0.0, 1.0 / self.f, 1.0 / self.f], [1.0, 0.0, 0.0], [0.0, s / c, -c / s]]
    }

    /// Ricci form in [`BergerChart::frame`] from the coordinate oracle.
    pub fn ricci_by_oracle(&self, x: &[f64; 3]) -> Result<CircleBundleRicci<2>> {
        let c = curvature_at(self, x, DerivativeScheme::Dual)?;
        let fr = self.frame(x[0]);
        let ric = |a: &[f64; 3], b: &[f64; 3]| -> f64 {
            let mut s = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    s += c.ricci[i][j] * a[i] * b[j];
                }
            }
            s
        };
        Ok(CircleBundleRicci {
            vertical: ric(&fr[0], &fr[0]),
            mixed: [ric(&fr[0], &fr[1]), ric(&fr[0], &fr[2])],
            horizontal: [[ric(&fr[1], &fr[1]), ric(&fr[1], &fr[2])], [ric(&fr[2], &fr[1]), ric(&fr[2], &fr[2])]],
        })
    }

    /// Standard-layer data: base `S²(½)` with `Ric_B = 4`, `|ω| = 2`,
    /// constant `f`.
    pub fn standard_data(&self) -> StandardBundleData<2> {
        StandardBundleData {
            f: self.f,
            grad_f: [0.0; 2],
            hess_f: [[0.0; 2]; 2],
            omega: [[0.0, -2.0], [2.0, 0.0]],
            delta_omega: [0.0; 2],
            ric_base: [[4.0, 0.0], [0.0, 4.0]],
        }
    }
}
