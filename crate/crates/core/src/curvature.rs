//! Brute-force Levi-Civita curvature of a metric given in coordinates.
//!
//! Conventions: `Γⁱ_jk = ½ gⁱˡ(∂_j g_lk + ∂_k g_lj − ∂_l g_jk)`,
//! `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z`, and
//! `Ric(Y,Z) = tr(X ↦ R(X,Y)Z)`, so the round unit `Sⁿ` has `Ric = (n−1)g`.
//! The lowered tensor is `R_ijkl = ⟨R(∂_k, ∂_l)∂_j, ∂_i⟩`.

use crate::linalg;
use crate::scalar::{Jet, Real};
use crate::{Error, Result};

/// Determinants below this are reported as [`Error::SingularMetric`].
pub const SINGULAR_DET: f64 = 1e-14;

/// A Riemannian metric on an open subset of `ℝᴺ`.
pub trait ChartMetric<const N: usize> {
    fn components<T: Real>(&self, x: &[T; N]) -> [[T; N]; N];
}

/// A scalar field on an open subset of `ℝᴺ`.
pub trait ChartScalar<const N: usize> {
    fn eval<T: Real>(&self, x: &[T; N]) -> T;
}

/// How metric derivatives are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeScheme {
    /// Second-order forward jets; exact up to rounding.
    Dual,
    /// Central differences with the given step, optionally combined with the
    /// half step to cancel the `h²` error term.
    FiniteDifference { step: f64, richardson: bool },
}

pub type Tensor3<const N: usize> = [[[f64; N]; N]; N];
pub type Tensor4<const N: usize> = [[[[f64; N]; N]; N]; N];

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureBundle<const N: usize> {
    pub metric: [[f64; N]; N],
    pub inverse: [[f64; N]; N],
    /// `christoffel[i][j][k] = Γⁱ_jk`
    pub christoffel: Tensor3<N>,
    /// Lowered `R_ijkl`.
    pub riemann: Tensor4<N>,
    pub ricci: [[f64; N]; N],
    pub scalar: f64,
}

struct MetricJet<const N: usize> {
    g: [[f64; N]; N],
    dg: Tensor3<N>,
    /// `ddg[a][b][m][n] = ∂_m ∂_n g_ab`
    ddg: Tensor4<N>,
}

fn metric_jet<const N: usize, M: ChartMetric<N>>(metric: &M, x: &[f64; N], scheme: DerivativeScheme) -> MetricJet<N> {
    match scheme {
        DerivativeScheme::Dual => {
            let comps = metric.components(&Jet::<N>::seed(x));
            MetricJet {
                g: core::array::from_fn(|a| core::array::from_fn(|b| comps[a][b].v)),
                dg: core::array::from_fn(|a| core::array::from_fn(|b| comps[a][b].g)),
                ddg: core::array::from_fn(|a| core::array::from_fn(|b| comps[a][b].h)),
            }
        }
        DerivativeScheme::FiniteDifference { step, richardson } => {
            let g = metric.components(x);
            let (dg, ddg) = fd_derivatives(metric, x, step);
            if !richardson {
                return MetricJet { g, dg, ddg };
            }
            let (dg2, ddg2) = fd_derivatives(metric, x, 0.5 * step);
            let extrapolate = |fine: f64, coarse: f64| (4.0 * fine - coarse) / 3.0;
            MetricJet {
                g,
                dg: core::array::from_fn(|a| {
                    core::array::from_fn(|b| core::array::from_fn(|m| extrapolate(dg2[a][b][m], dg[a][b][m])))
                }),
                ddg: core::array::from_fn(|a| {
                    core::array::from_fn(|b| {
                        core::array::from_fn(|m| {
                            core::array::from_fn(|n| extrapolate(ddg2[a][b][m][n], ddg[a][b][m][n]))
                        })
                    })
                }),
            }
        }
    }
}

fn shifted<const N: usize>(x: &[f64; N], moves: &[(usize, f64)]) -> [f64; N] {
    let mut y = *x;
    for &(i, d) in moves {
        y[i] += d;
    }
    y
}

fn fd_derivatives<const N: usize, M: ChartMetric<N>>(metric: &M, x: &[f64; N], h: f64) -> (Tensor3<N>, Tensor4<N>) {
    let g0 = metric.components(x);
    let mut dg = [[[0.0; N]; N]; N];
    let mut ddg = [[[[0.0; N]; N]; N]; N];
    for m in 0..N {
        let gp = metric.components(&shifted(x, &[(m, h)]));
        let gm = metric.components(&shifted(x, &[(m, -h)]));
        for a in 0..N {
            for b in 0..N {
                dg[a][b][m] = (gp[a][b] - gm[a][b]) / (2.0 * h);
                ddg[a][b][m][m] = (gp[a][b] - 2.0 * g0[a][b] + gm[a][b]) / (h * h);
            }
        }
        for n in (m + 1)..N {
            let gpp = metric.components(&shifted(x, &[(m, h), (n, h)]));
            let gpm = metric.components(&shifted(x, &[(m, h), (n, -h)]));
            let gmp = metric.components(&shifted(x, &[(m, -h), (n, h)]));
            let gmm = metric.components(&shifted(x, &[(m, -h), (n, -h)]));
            for a in 0..N {
                for b in 0..N {
                    let v = (gpp[a][b] - gpm[a][b] - gmp[a][b] + gmm[a][b]) / (4.0 * h * h);
                    ddg[a][b][m][n] = v;
                    ddg[a][b][n][m] = v;
                }
            }
        }
    }
    (dg, ddg)
}

/// Christoffel symbols, Riemann, Ricci and scalar curvature at `x`.
pub fn curvature_at<const N: usize, M: ChartMetric<N>>(
    metric: &M,
    x: &[f64; N],
    scheme: DerivativeScheme,
) -> Result<CurvatureBundle<N>> {
    let MetricJet { g, dg, ddg } = metric_jet(metric, x, scheme);
    let (inv, det) = linalg::inverse(&g).ok_or(Error::SingularMetric { determinant: 0.0 })?;
    if !(det >= SINGULAR_DET) {
        return Err(Error::SingularMetric { determinant: det });
    }
    // first-kind symbols and their derivatives
    // gam1[l][j][k] = ½(∂_j g_lk + ∂_k g_lj − ∂_l g_jk)
    let mut gam1 = [[[0.0; N]; N]; N];
    let mut dgam1 = [[[[0.0; N]; N]; N]; N];
    for l in 0..N {
        for j in 0..N {
            for k in 0..N {
                gam1[l][j][k] = 0.5 * (dg[l][k][j] + dg[l][j][k] - dg[j][k][l]);
                for m in 0..N {
                    dgam1[l][j][k][m] = 0.5 * (ddg[l][k][j][m] + ddg[l][j][k][m] - ddg[j][k][l][m]);
                }
            }
        }
    }
    let mut chris = [[[0.0; N]; N]; N];
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                chris[i][j][k] = (0..N).map(|l| inv[i][l] * gam1[l][j][k]).sum();
            }
        }
    }
    // ∂_m g^{il} = −g^{ia} ∂_m g_ab g^{bl}
    let mut dinv = [[[0.0; N]; N]; N];
    for i in 0..N {
        for l in 0..N {
            for m in 0..N {
                let mut s = 0.0;
                for a in 0..N {
                    for b in 0..N {
                        s += inv[i][a] * dg[a][b][m] * inv[b][l];
                    }
                }
                dinv[i][l][m] = -s;
            }
        }
    }
    // dchris[i][j][k][m] = ∂_m Γⁱ_jk
    let mut dchris = [[[[0.0; N]; N]; N]; N];
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                for m in 0..N {
                    dchris[i][j][k][m] =
                        (0..N).map(|l| dinv[i][l][m] * gam1[l][j][k] + inv[i][l] * dgam1[l][j][k][m]).sum();
                }
            }
        }
    }
    // Rⁱ_jkl = ∂_k Γⁱ_lj − ∂_l Γⁱ_kj + Γⁱ_km Γᵐ_lj − Γⁱ_lm Γᵐ_kj
    let mut rup = [[[[0.0; N]; N]; N]; N];
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                for l in 0..N {
                    let mut v = dchris[i][l][j][k] - dchris[i][k][j][l];
                    for m in 0..N {
                        v += chris[i][k][m] * chris[m][l][j] - chris[i][l][m] * chris[m][k][j];
                    }
                    rup[i][j][k][l] = v;
                }
            }
        }
    }
    let mut riemann = [[[[0.0; N]; N]; N]; N];
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                for l in 0..N {
                    riemann[i][j][k][l] = (0..N).map(|m| g[i][m] * rup[m][j][k][l]).sum();
                }
            }
        }
    }
    // Ric_bc = Rᵃ_{c a b}
    let mut ricci = [[0.0; N]; N];
    for b in 0..N {
        for c in 0..N {
            ricci[b][c] = (0..N).map(|a| rup[a][c][a][b]).sum();
        }
    }
    for b in 0..N {
        for c in (b + 1)..N {
            let avg = 0.5 * (ricci[b][c] + ricci[c][b]);
            ricci[b][c] = avg;
            ricci[c][b] = avg;
        }
    }
    let mut scalar = 0.0;
    for b in 0..N {
        for c in 0..N {
            scalar += inv[b][c] * ricci[b][c];
        }
    }
    Ok(CurvatureBundle { metric: g, inverse: inv, christoffel: chris, riemann, ricci, scalar })
}

impl<const N: usize> CurvatureBundle<N> {
    /// Largest violation of the algebraic Riemann symmetries
    /// (both antisymmetries, pair symmetry, first Bianchi).
    pub fn symmetry_defect(&self) -> f64 {
        let r = &self.riemann;
        let mut worst: f64 = 0.0;
        for i in 0..N {
            for j in 0..N {
                for k in 0..N {
                    for l in 0..N {
                        let v = r[i][j][k][l];
                        worst = worst
                            .max(libm::fabs(v + r[j][i][k][l]))
                            .max(libm::fabs(v + r[i][j][l][k]))
                            .max(libm::fabs(v - r[k][l][i][j]))
                            .max(libm::fabs(v + r[i][k][l][j] + r[i][l][j][k]));
                    }
                }
            }
        }
        worst
    }

    /// Largest absolute lowered Riemann component, a scale for tolerances.
    pub fn riemann_scale(&self) -> f64 {
        self.riemann.iter().flatten().flatten().flatten().fold(0.0, |m: f64, v| m.max(libm::fabs(*v)))
    }

    /// `|Rm|` with all indices contracted by the metric.
    pub fn riemann_norm(&self) -> f64 {
        let g = &self.inverse;
        let r = &self.riemann;
        let mut raised = [[[[0.0; N]; N]; N]; N];
        for a in 0..N {
            for b in 0..N {
                for c in 0..N {
                    for d in 0..N {
                        let mut s = 0.0;
                        for i in 0..N {
                            for j in 0..N {
                                for k in 0..N {
                                    for l in 0..N {
                                        s += g[a][i] * g[b][j] * g[c][k] * g[d][l] * r[i][j][k][l];
                                    }
                                }
                            }
                        }
                        raised[a][b][c][d] = s;
                    }
                }
            }
        }
        let mut total = 0.0;
        for a in 0..N {
            for b in 0..N {
                for c in 0..N {
                    for d in 0..N {
                        total += raised[a][b][c][d] * r[a][b][c][d];
                    }
                }
            }
        }
        libm::sqrt(total.max(0.0))
    }

    /// Eigenvalues of the Ricci endomorphism `g⁻¹Ric`, ascending.
    pub fn ricci_eigenvalues(&self) -> Result<[f64; N]> {
        linalg::generalized_symmetric_eigenvalues(&self.ricci, &self.metric)
            .ok_or(Error::SingularMetric { determinant: 0.0 })
    }

    /// Largest `|Ric_ij − c g_ij|`.
    pub fn einstein_defect(&self, c: f64) -> f64 {
        let target: [[f64; N]; N] = core::array::from_fn(|i| core::array::from_fn(|j| c * self.metric[i][j]));
        linalg::max_abs_diff(&self.ricci, &target)
    }
}

/// First and second derivatives of a scalar field, exact through jets.
pub fn scalar_jet<const N: usize, F: ChartScalar<N>>(f: &F, x: &[f64; N]) -> Jet<N> {
    f.eval(&Jet::<N>::seed(x))
}

/// Covariant Hessian `∂_i∂_j f − Γᵏ_ij ∂_k f`.
pub fn hessian<const N: usize>(bundle: &CurvatureBundle<N>, f: &Jet<N>) -> [[f64; N]; N] {
    core::array::from_fn(|i| {
        core::array::from_fn(|j| f.h[i][j] - (0..N).map(|k| bundle.christoffel[k][i][j] * f.g[k]).sum::<f64>())
    })
}

/// `gⁱʲ ∂_i f ∂_j f`
pub fn gradient_norm_sq<const N: usize>(bundle: &CurvatureBundle<N>, f: &Jet<N>) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        for j in 0..N {
            s += bundle.inverse[i][j] * f.g[i] * f.g[j];
        }
    }
    s
}

pub fn laplacian<const N: usize>(bundle: &CurvatureBundle<N>, f: &Jet<N>) -> f64 {
    let h = hessian(bundle, f);
    let mut s = 0.0;
    for i in 0..N {
        for j in 0..N {
            s += bundle.inverse[i][j] * h[i][j];
        }
    }
    s
}

/// Ricci tensor of `e^{−2φ} g` from the curvature of `g` and the jet of `φ`:
/// `Ric + (n−2)(Hess φ + dφ⊗dφ) + (Δφ − (n−2)|dφ|²) g`.
pub fn conformal_ricci_from<const N: usize>(bundle: &CurvatureBundle<N>, phi: &Jet<N>) -> [[f64; N]; N] {
    let n2 = N as f64 - 2.0;
    let hess = hessian(bundle, phi);
    let lap = laplacian(bundle, phi);
    let grad2 = gradient_norm_sq(bundle, phi);
    core::array::from_fn(|i| {
        core::array::from_fn(|j| {
            bundle.ricci[i][j] + n2 * (hess[i][j] + phi.g[i] * phi.g[j]) + (lap - n2 * grad2) * bundle.metric[i][j]
        })
    })
}

/// Ricci tensor of `e^{−2φ}·metric` at `x` through the closed transformation law.
pub fn conformal_ricci<const N: usize, M: ChartMetric<N>, F: ChartScalar<N>>(
    metric: &M,
    phi: &F,
    x: &[f64; N],
) -> Result<[[f64; N]; N]> {
    let bundle = curvature_at(metric, x, DerivativeScheme::Dual)?;
    Ok(conformal_ricci_from(&bundle, &scalar_jet(phi, x)))
}

/// The metric `e^{−2φ} g`, for brute-force comparison.
#[derive(Debug, Clone, Copy)]
pub struct ConformallyScaled<'a, M, F> {
    pub base: &'a M,
    pub phi: &'a F,
}

impl<const N: usize, M: ChartMetric<N>, F: ChartScalar<N>> ChartMetric<N> for ConformallyScaled<'_, M, F> {
    fn components<T: Real>(&self, x: &[T; N]) -> [[T; N]; N] {
        let factor = (self.phi.eval(x).scale(-2.0)).exp();
        let g = self.base.components(x);
        core::array::from_fn(|i| core::array::from_fn(|j| g[i][j] * factor))
    }
}

/// Euclidean metric.
#[derive(Debug, Clone, Copy, Default)]
pub struct Flat;

impl<const N: usize> ChartMetric<N> for Flat {
    fn components<T: Real>(&self, _x: &[T; N]) -> [[T; N]; N] {
        identity()
    }
}

fn identity<T: Real, const N: usize>() -> [[T; N]; N] {
    core::array::from_fn(|i| core::array::from_fn(|j| T::cst(if i == j { 1.0 } else { 0.0 })))
}

/// Round `Sᴺ` of the given radius in stereographic coordinates:
/// `4R² / (1 + |q|²)² · δ`.
#[derive(Debug, Clone, Copy)]
pub struct StereographicSphere {
    pub radius: f64,
}

impl<const N: usize> ChartMetric<N> for StereographicSphere {
    fn components<T: Real>(&self, x: &[T; N]) -> [[T; N]; N] {
        let mut r2 = T::cst(0.0);
        for xi in x {
            r2 = r2 + *xi * *xi;
        }
        let d = r2.shift(1.0);
        let c = (d * d).recip().scale(4.0 * self.radius * self.radius);
        core::array::from_fn(|i| core::array::from_fn(|j| if i == j { c } else { T::cst(0.0) }))
    }
}

/// Unit `S³` in geodesic polar coordinates `(s, θ, φ)`:
/// `ds² + sin²s (dθ² + sin²θ dφ²)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PolarS3;

impl ChartMetric<3> for PolarS3 {
    fn components<T: Real>(&self, x: &[T; 3]) -> [[T; 3]; 3] {
        let s2 = x[0].sin() * x[0].sin();
        let t2 = x[1].sin() * x[1].sin();
        let z = T::cst(0.0);
        [[T::cst(1.0), z, z], [z, s2, z], [z, z, s2 * t2]]
    }
}

/// Contracted second Bianchi defect `|div Ric − ½ dR|` at `x`, with the
/// derivatives of the curvature taken by central differences of step `h`.
pub fn contracted_bianchi_defect<const N: usize, M: ChartMetric<N>>(metric: &M, x: &[f64; N], h: f64) -> Result<f64> {
    let c0 = curvature_at(metric, x, DerivativeScheme::Dual)?;
    let mut d_ric = [[[0.0; N]; N]; N];
    let mut d_scal = [0.0; N];
    for k in 0..N {
        let cp = curvature_at(metric, &shifted(x, &[(k, h)]), DerivativeScheme::Dual)?;
        let cm = curvature_at(metric, &shifted(x, &[(k, -h)]), DerivativeScheme::Dual)?;
        for i in 0..N {
            for j in 0..N {
                d_ric[i][j][k] = (cp.ricci[i][j] - cm.ricci[i][j]) / (2.0 * h);
            }
        }
        d_scal[k] = (cp.scalar - cm.scalar) / (2.0 * h);
    }
    let g = &c0.inverse;
    let gam = &c0.christoffel;
    let ric = &c0.ricci;
    let mut worst: f64 = 0.0;
    for j in 0..N {
        let mut div = 0.0;
        for i in 0..N {
            for k in 0..N {
                let mut cov = d_ric[i][j][k];
                for m in 0..N {
                    cov -= gam[m][k][i] * ric[m][j] + gam[m][k][j] * ric[i][m];
                }
                div += g[i][k] * cov;
            }
        }
        worst = worst.max(libm::fabs(div - 0.5 * d_scal[j]));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Quadratic<const N: usize> {
        a: [[f64; N]; N],
        b: [f64; N],
    }

    impl<const N: usize> ChartScalar<N> for Quadratic<N> {
        fn eval<T: Real>(&self, x: &[T; N]) -> T {
            let mut s = T::cst(0.0);
            for i in 0..N {
                s = s + x[i].scale(self.b[i]);
                for j in 0..N {
                    s = s + x[i] * x[j].scale(self.a[i][j]);
                }
            }
            s
        }
    }

    /// A non-symmetric test metric with every component varying.
    struct Wobbly;

    impl ChartMetric<4> for Wobbly {
        fn components<T: Real>(&self, x: &[T; 4]) -> [[T; 4]; 4] {
            let s = x[0].sin().scale(0.2) + (x[1] * x[2]).scale(0.1);
            let c = (x[3] + x[0]).cos().scale(0.15);
            core::array::from_fn(|i| {
                core::array::from_fn(|j| {
                    if i == j {
                        T::cst(1.0 + 0.1 * i as f64) + s * s + x[i] * x[i].scale(0.05)
                    } else {
                        c * (x[i] + x[j]).scale(0.3).cos() + T::cst(0.01 * (i + j) as f64)
                    }
                })
            })
        }
    }

    #[test]
    fn flat_metric_has_no_curvature() {
        let c = curvature_at::<3, _>(&Flat, &[0.2, -0.1, 0.4], DerivativeScheme::Dual).unwrap();
        assert_eq!(c.riemann_scale(), 0.0);
        assert_eq!(c.scalar, 0.0);
    }

    #[test]
    fn round_s3_is_einstein_in_two_charts() {
        let q = [0.3, -0.5, 0.2];
        let c = curvature_at(&StereographicSphere { radius: 1.0 }, &q, DerivativeScheme::Dual).unwrap();
        assert!(c.einstein_defect(2.0) < 1e-12);
        assert!((c.scalar - 6.0).abs() < 1e-12);
        let p = curvature_at(&PolarS3, &[1.1, 0.7, 0.3], DerivativeScheme::Dual).unwrap();
        assert!(p.einstein_defect(2.0) < 1e-12);
        let ev_a = c.ricci_eigenvalues().unwrap();
        let ev_b = p.ricci_eigenvalues().unwrap();
        for i in 0..3 {
            assert!((ev_a[i] - ev_b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn half_radius_two_sphere_has_scalar_eight() {
        let c =
            curvature_at::<2, _>(&StereographicSphere { radius: 0.5 }, &[0.4, 1.3], DerivativeScheme::Dual).unwrap();
        assert!((c.scalar - 8.0).abs() < 1e-12);
    }

    #[test]
    fn riemann_symmetries_and_bianchi() {
        let x = [0.3, -0.2, 0.5, 0.1];
        let c = curvature_at(&Wobbly, &x, DerivativeScheme::Dual).unwrap();
        assert!(c.riemann_scale() > 1e-2);
        assert!(c.symmetry_defect() < 1e-12 * c.riemann_scale().max(1.0));
        assert!(contracted_bianchi_defect(&Wobbly, &x, 1e-4).unwrap() < 1e-6);
    }

    #[test]
    fn finite_differences_agree_with_jets() {
        let x = [0.3, -0.2, 0.5, 0.1];
        let exact = curvature_at(&Wobbly, &x, DerivativeScheme::Dual).unwrap();
        let plain =
            curvature_at(&Wobbly, &x, DerivativeScheme::FiniteDifference { step: 1e-3, richardson: false }).unwrap();
        let rich =
            curvature_at(&Wobbly, &x, DerivativeScheme::FiniteDifference { step: 1e-3, richardson: true }).unwrap();
        let e_plain = linalg::max_abs_diff(&plain.ricci, &exact.ricci);
        let e_rich = linalg::max_abs_diff(&rich.ricci, &exact.ricci);
        assert!(e_plain < 1e-5, "{e_plain}");
        assert!(e_rich < e_plain, "{e_rich} vs {e_plain}");
    }

    #[test]
    fn singular_metric_is_rejected() {
        struct Degenerate;
        impl ChartMetric<2> for Degenerate {
            fn components<T: Real>(&self, x: &[T; 2]) -> [[T; 2]; 2] {
                [[x[0] * x[0], T::cst(0.0)], [T::cst(0.0), T::cst(1.0)]]
            }
        }
        assert!(matches!(
            curvature_at(&Degenerate, &[1e-8, 0.0], DerivativeScheme::Dual),
            Err(Error::SingularMetric { .. })
        ));
    }

    #[test]
    fn conformal_ricci_matches_brute_force() {
        let phi = Quadratic {
            a: [[0.3, 0.1, 0.0, -0.2], [0.1, -0.1, 0.05, 0.0], [0.0, 0.05, 0.2, 0.1], [-0.2, 0.0, 0.1, 0.15]],
            b: [0.1, -0.3, 0.2, 0.05],
        };
        for x in [[0.1, 0.2, -0.3, 0.4], [-0.5, 0.0, 0.3, 0.2]] {
            for base in [0, 1] {
                let (closed, brute) = if base == 0 {
                    let closed = conformal_ricci(&Flat, &phi, &x).unwrap();
                    let scaled = ConformallyScaled { base: &Flat, phi: &phi };
                    (closed, curvature_at(&scaled, &x, DerivativeScheme::Dual).unwrap().ricci)
                } else {
                    let closed = conformal_ricci(&Wobbly, &phi, &x).unwrap();
                    let scaled = ConformallyScaled { base: &Wobbly, phi: &phi };
                    (closed, curvature_at(&scaled, &x, DerivativeScheme::Dual).unwrap().ricci)
                };
                assert!(linalg::max_abs_diff(&closed, &brute) < 1e-10);
            }
        }
    }

    #[test]
    fn unsquared_gradient_variant_fails_brute_force() {
        let phi = Quadratic {
            a: [[0.4, 0.0, 0.0, 0.0], [0.0, 0.1, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.2]],
            b: [0.3, 0.0, -0.2, 0.1],
        };
        let x = [0.3, 0.1, -0.2, 0.4];
        let bundle = curvature_at(&Flat, &x, DerivativeScheme::Dual).unwrap();
        let jet = scalar_jet(&phi, &x);
        let grad = libm::sqrt(gradient_norm_sq(&bundle, &jet));
        let squared = conformal_ricci_from(&bundle, &jet);
        let unsquared: [[f64; 4]; 4] = core::array::from_fn(|i| {
            core::array::from_fn(|j| squared[i][j] + 2.0 * (grad * grad - grad) * bundle.metric[i][j])
        });
        let brute =
            curvature_at(&ConformallyScaled { base: &Flat, phi: &phi }, &x, DerivativeScheme::Dual).unwrap().ricci;
        assert!(linalg::max_abs_diff(&squared, &brute) < 1e-10);
        assert!(linalg::max_abs_diff(&unsquared, &brute) > 1e-2);
    }

    #[test]
    fn constant_conformal_factor_keeps_ricci() {
        let phi = Quadratic::<3> { a: [[0.0; 3]; 3], b: [0.0; 3] };
        let q = [0.3, -0.5, 0.2];
        let metric = StereographicSphere { radius: 1.0 };
        let r = conformal_ricci(&metric, &phi, &q).unwrap();
        let base = curvature_at(&metric, &q, DerivativeScheme::Dual).unwrap();
        assert!(linalg::max_abs_diff(&r, &base.ricci) < 1e-15);
    }

    #[test]
    fn small_quadratic_bump_on_flat_space() {
        // φ = ε|x|²: Ric ≈ (2(n−2)ε + 2nε)·δ to first order = 12ε in dimension 4
        let eps = 1e-6;
        let phi = Quadratic {
            a: core::array::from_fn(|i| core::array::from_fn(|j| if i == j { eps } else { 0.0 })),
            b: [0.0; 4],
        };
        let r = conformal_ricci(&Flat, &phi, &[0.01, 0.02, -0.01, 0.0]).unwrap();
        for i in 0..4 {
            assert!((r[i][i] - 12.0 * eps).abs() < 1e-3 * eps);
        }
    }
}
