//! Conformal perturbation near an added point, on the model chart
//! `h = (kΛ)⁻¹(g_{ℝ⁴} + h')`, and the Ricci positivity criterion for the
//! frame-bundle metric with fibre scale `d_k`.

use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curvature::{
    conformal_ricci_from, curvature_at, hessian, scalar_jet, ChartMetric, ChartScalar, ConformallyScaled,
    DerivativeScheme,
};
use crate::linalg::{self, generalized_symmetric_eigenvalues};
use crate::scalar::Real;
use crate::{Error, Result};

/// Default coefficient of the `O(r²)` term of the model chart.
pub const MODEL_BETA: f64 = -0.1;

/// `h = c (δ + β(|x|²δ − x⊗x))` on `ℝ⁴`, `c = 1/(kΛ)`.
///
/// The correction vanishes on the radial direction, so `h = c(dr² +
/// r²(1 + βr²) g_{S³})`: radial lines are unit-speed geodesics after scaling
/// and `ρ = ½ c |x|²` is half the squared distance to the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelChart {
    pub scale: f64,
    pub beta: f64,
}

impl ModelChart {
    pub fn new(k: u32, lambda: f64, beta: f64) -> Result<Self> {
        if k == 0 || !(lambda > 1.0) {
            return Err(Error::InvalidParameter("model chart needs k >= 1 and lambda > 1"));
        }
        Ok(ModelChart { scale: 1.0 / (k as f64 * lambda), beta })
    }

    pub fn unperturbed(&self) -> Self {
        ModelChart { beta: 0.0, ..*self }
    }

    /// Coordinate radius of the point at `ρ`.
    pub fn radius_of_rho(&self, rho: f64) -> f64 {
        libm::sqrt(2.0 * rho / self.scale)
    }

    pub fn rho(&self) -> RhoScalar {
        RhoScalar { scale: self.scale }
    }
}

impl ChartMetric<4> for ModelChart {
    fn components<T: Real>(&self, x: &[T; 4]) -> [[T; 4]; 4] {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
        core::array::from_fn(|i| {
            core::array::from_fn(|j| {
                let delta = if i == j { 1.0 } else { 0.0 };
                let p = r2.scale(delta) - x[i] * x[j];
                (p.scale(self.beta)).shift(delta).scale(self.scale)
            })
        })
    }
}

/// `ρ = ½ c |x|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoScalar {
    pub scale: f64,
}

impl ChartScalar<4> for RhoScalar {
    fn eval<T: Real>(&self, x: &[T; 4]) -> T {
        (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]).scale(0.5 * self.scale)
    }
}

/// `S(s) = 6s⁵ − 15s⁴ + 10s³`, clamped to `[0, 1]`.
fn smoothstep<T: Real>(s: T) -> T {
    let v = s.value();
    if v <= 0.0 {
        T::cst(0.0)
    } else if v >= 1.0 {
        T::cst(1.0)
    } else {
        let s3 = s * s * s;
        s3 * (s * (s.scale(6.0).shift(-15.0))).shift(10.0)
    }
}

/// `η(t) = t (1 − S((t − r)/r))`: the identity below `r`, zero above `2r`,
/// `C²` in between. The perturbation is `φ = ε η(ρ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpProfile {
    pub r: f64,
    pub eps: f64,
}

impl BumpProfile {
    pub fn new(r: f64, eps: f64) -> Result<Self> {
        if !(r > 0.0 && eps >= 0.0 && r.is_finite() && eps.is_finite()) {
            return Err(Error::InvalidParameter("bump profile needs r > 0 and eps >= 0"));
        }
        Ok(BumpProfile { r, eps })
    }

    pub fn eta<T: Real>(&self, t: T) -> T {
        let s = (t.shift(-self.r)).scale(1.0 / self.r);
        t * (T::cst(1.0) - smoothstep(s))
    }

    /// `C_η = max(sup|η'|, r · sup|η''|)` on a fine grid of `[0, 2r]`.
    pub fn derivative_constant(&self) -> f64 {
        let mut c: f64 = 0.0;
        for i in 0..=4000 {
            let t = 2.0 * self.r * i as f64 / 4000.0;
            let j = self.eta(crate::scalar::Jet::<1>::variable(t, 0));
            c = c.max(libm::fabs(j.g[0])).max(self.r * libm::fabs(j.h[0][0]));
        }
        c
    }
}

/// `φ = ε η(ρ)` as a chart scalar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiField {
    pub rho: RhoScalar,
    pub bump: BumpProfile,
}

impl ChartScalar<4> for PhiField {
    fn eval<T: Real>(&self, x: &[T; 4]) -> T {
        self.bump.eta(self.rho.eval(x)).scale(self.bump.eps)
    }
}

fn random_direction(rng: &mut ChaCha8Rng) -> [f64; 4] {
    loop {
        let v: [f64; 4] = core::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n = linalg::norm(&v);
        if n > 1e-3 && n <= 1.0 {
            return linalg::scale(&v, 1.0 / n);
        }
    }
}

/// `samples` points with radii spread evenly over `(0, radius]`.
pub fn chart_samples(radius: f64, samples: usize, seed: u64) -> Vec<[f64; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|i| {
            let r = radius * (i as f64 + 1.0) / samples as f64;
            linalg::scale(&random_direction(&mut rng), r)
        })
        .collect()
}

/// Outcome of [`model_rho_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoReport {
    /// `max |Hess ρ − h|` on the unperturbed chart, relative to `c`.
    pub unperturbed_defect: f64,
    /// `|dρ|` at the origin.
    pub origin_gradient: f64,
    /// Smallest eigenvalue of `Hess ρ` relative to the perturbed `h`.
    pub min_hessian_ratio: f64,
    /// Largest `|dρ|_h` over the certified ball.
    pub max_gradient: f64,
    /// Coordinate radius of the certified ball.
    pub threshold: f64,
    /// `r_k = ρ(threshold)/2`, so the bump support `ρ ≤ 2r_k` fits.
    pub r_k: f64,
    pub samples: usize,
}

impl RhoReport {
    pub fn passed(&self) -> bool {
        self.unperturbed_defect <= 1e-12
            && self.origin_gradient == 0.0
            && self.min_hessian_ratio >= 0.5
            && self.max_gradient <= 1e-2 * (1.0 + 1e-12)
    }
}

/// Checks `Hess ρ = h`, `dρ(0) = 0` on the flat model and `Hess ρ ≥ ½h`,
/// `|dρ| ≤ 10⁻²` on the perturbed one, over the ball of coordinate radius
/// `min(chart_radius, 0.01·√(kΛ))`.
pub fn model_rho_check(chart: &ModelChart, chart_radius: f64, samples: usize, seed: u64) -> Result<RhoReport> {
    if !(chart_radius > 0.0) || samples == 0 {
        return Err(Error::InvalidParameter("model check needs a positive radius and samples"));
    }
    let rho = chart.rho();
    let flat = chart.unperturbed();
    let origin_gradient = linalg::norm(&scalar_jet(&rho, &[0.0; 4]).g);
    // |dρ|_h = √c |x| on both charts
    let threshold = chart_radius.min(1e-2 / libm::sqrt(chart.scale));
    let pts = chart_samples(threshold, samples, seed);
    let mut defect: f64 = 0.0;
    let mut ratio = f64::INFINITY;
    let mut grad: f64 = 0.0;
    for x in core::iter::once([0.0; 4]).chain(pts.iter().copied()) {
        let jet = scalar_jet(&rho, &x);
        let b0 = curvature_at(&flat, &x, DerivativeScheme::Dual)?;
        defect = defect.max(linalg::max_abs_diff(&hessian(&b0, &jet), &b0.metric) / chart.scale);
        let b = curvature_at(chart, &x, DerivativeScheme::Dual)?;
        let hs = hessian(&b, &jet);
        let ev = generalized_symmetric_eigenvalues(&hs, &b.metric).ok_or(Error::SingularMetric { determinant: 0.0 })?;
        ratio = ratio.min(ev[0]);
        grad = grad.max(libm::sqrt(crate::curvature::gradient_norm_sq(&b, &jet)));
    }
    Ok(RhoReport {
        unperturbed_defect: defect,
        origin_gradient,
        min_hessian_ratio: ratio,
        max_gradient: grad,
        threshold,
        r_k: 0.25 * chart.scale * threshold * threshold,
        samples: pts.len() + 1,
    })
}

/// `Ric_{e^{−2φ}h}` on the model chart through the conformal transformation
/// law, with `φ = ε η(ρ)`.
pub fn conformal_perturbation_ricci(chart: &ModelChart, bump: &BumpProfile, x: &[f64; 4]) -> Result<[[f64; 4]; 4]> {
    let phi = PhiField { rho: chart.rho(), bump: *bump };
    let b = curvature_at(chart, x, DerivativeScheme::Dual)?;
    Ok(conformal_ricci_from(&b, &scalar_jet(&phi, x)))
}

/// The same tensor from the coordinate oracle applied to `e^{−2φ}h`.
pub fn conformal_perturbation_ricci_brute(
    chart: &ModelChart,
    bump: &BumpProfile,
    x: &[f64; 4],
) -> Result<[[f64; 4]; 4]> {
    let phi = PhiField { rho: chart.rho(), bump: *bump };
    Ok(curvature_at(&ConformallyScaled { base: chart, phi: &phi }, x, DerivativeScheme::Dual)?.ricci)
}

/// Outcome of [`perturbation_check`]; eigenvalues are relative to `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationReport {
    pub eps: f64,
    pub r_k: f64,
    /// Smallest eigenvalue of `Ric_g` with `ρ ≤ r_k/2`.
    pub inner_min: f64,
    /// Smallest eigenvalue of `Ric_g − Ric_h` with `ρ ≤ r_k/2`, over `ε`.
    pub inner_perturbation_ratio: f64,
    /// Smallest eigenvalue of `Ric_g` with `ρ ≥ r_k/2`.
    pub outer_min: f64,
    /// Smallest eigenvalue of `Ric_h` with `ρ ≥ r_k/2`.
    pub ric_lower: f64,
    /// Largest `‖Ric_g − Ric_h‖/ε` with `ρ ≥ r_k/2`.
    pub c_measured: f64,
    /// Largest relative gap to the coordinate oracle.
    pub oracle_defect: f64,
    pub samples: usize,
}

impl PerturbationReport {
    /// Positivity in both regions and the Hessian term dominating inside.
    pub fn passed(&self) -> bool {
        self.inner_min > 0.0 && self.outer_min > 0.0 && self.inner_perturbation_ratio >= 1.0 - 1e-6
    }
}

fn gen_eigs(a: &[[f64; 4]; 4], h: &[[f64; 4]; 4]) -> Result<[f64; 4]> {
    generalized_symmetric_eigenvalues(a, h).ok_or(Error::SingularMetric { determinant: 0.0 })
}

/// Samples both regions of `φ = ε η(ρ)` with support radius `2 r_k`.
pub fn perturbation_check(
    chart: &ModelChart,
    bump: &BumpProfile,
    samples: usize,
    seed: u64,
) -> Result<PerturbationReport> {
    let phi = PhiField { rho: chart.rho(), bump: *bump };
    let outer_edge = chart.radius_of_rho(2.4 * bump.r);
    let pts = chart_samples(outer_edge, samples, seed);
    let mut rep = PerturbationReport {
        eps: bump.eps,
        r_k: bump.r,
        inner_min: f64::INFINITY,
        inner_perturbation_ratio: f64::INFINITY,
        outer_min: f64::INFINITY,
        ric_lower: f64::INFINITY,
        c_measured: 0.0,
        oracle_defect: 0.0,
        samples: pts.len() + 1,
    };
    for x in core::iter::once([0.0; 4]).chain(pts.iter().copied()) {
        let b = curvature_at(chart, &x, DerivativeScheme::Dual)?;
        let ric_g = conformal_ricci_from(&b, &scalar_jet(&phi, &x));
        let diff: [[f64; 4]; 4] = core::array::from_fn(|i| core::array::from_fn(|j| ric_g[i][j] - b.ricci[i][j]));
        let ev_g = gen_eigs(&ric_g, &b.metric)?;
        let ev_d = gen_eigs(&diff, &b.metric)?;
        let rho = chart.rho().eval(&x);
        if rho <= 0.5 * bump.r {
            rep.inner_min = rep.inner_min.min(ev_g[0]);
            if bump.eps > 0.0 {
                rep.inner_perturbation_ratio = rep.inner_perturbation_ratio.min(ev_d[0] / bump.eps);
            }
        } else {
            rep.outer_min = rep.outer_min.min(ev_g[0]);
            rep.ric_lower = rep.ric_lower.min(gen_eigs(&b.ricci, &b.metric)?[0]);
            if bump.eps > 0.0 {
                let op = libm::fabs(ev_d[0]).max(libm::fabs(ev_d[3]));
                rep.c_measured = rep.c_measured.max(op / bump.eps);
            }
        }
        let brute = curvature_at(&ConformallyScaled { base: chart, phi: &phi }, &x, DerivativeScheme::Dual)?.ricci;
        let scale = linalg::max_abs(&brute).max(linalg::max_abs(&b.ricci)).max(f64::MIN_POSITIVE);
        rep.oracle_defect = rep.oracle_defect.max(linalg::max_abs_diff(&ric_g, &brute) / scale);
    }
    Ok(rep)
}

/// Amplitude used to measure `C`: small enough that `Ric_g − Ric_h` is
/// linear in `ε` to many digits.
const PROBE_EPS: f64 = 1e-6;

/// Picks `ε = min(1, c/(2C))` from a probe run and halves it until
/// [`perturbation_check`] passes. Fails below `10⁻⁸`.
pub fn auto_epsilon(chart: &ModelChart, r_k: f64, samples: usize, seed: u64) -> Result<PerturbationReport> {
    let probe = perturbation_check(chart, &BumpProfile::new(r_k, PROBE_EPS)?, samples, seed)?;
    let mut eps = if probe.c_measured > 0.0 { (probe.ric_lower / (2.0 * probe.c_measured)).min(1.0) } else { 1.0 };
    while eps >= 1e-8 {
        let rep = perturbation_check(chart, &BumpProfile::new(r_k, eps)?, samples, seed)?;
        if rep.passed() {
            return Ok(rep);
        }
        eps *= 0.5;
    }
    Err(Error::ProfileTooLarge)
}

/// Inputs of the frame-bundle criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameBundleParams {
    pub d_k: f64,
    /// Lower Ricci bound of the base.
    pub ric_lower: f64,
    /// Bound for `|Rm|` of the base.
    pub rm_bound: f64,
    /// Bound for `|∇Rm|` of the base.
    pub drm_bound: f64,
}

impl FrameBundleParams {
    pub fn new(d_k: f64, ric_lower: f64, rm_bound: f64, drm_bound: f64) -> Result<Self> {
        if !(d_k > 0.0 && d_k.is_finite()) {
            return Err(Error::Domain { what: "d_k", value: d_k });
        }
        for (what, v) in [("ric_lower", ric_lower), ("rm_bound", rm_bound), ("drm_bound", drm_bound)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Domain { what, value: v });
            }
        }
        Ok(FrameBundleParams { d_k, ric_lower, rm_bound, drm_bound })
    }
}

/// O'Neill constant in the horizontal lower bound `ric_lower − (9/4)|Rm|² d²`.
pub const HORIZONTAL_ONEILL: f64 = 2.25;

/// Block bounds of the frame-bundle Ricci form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameBundleRicci {
    pub vertical: f64,
    pub mixed_bound: f64,
    pub horizontal_lower: f64,
    /// `vertical · horizontal_lower > mixed_bound²` with `horizontal_lower > 0`.
    pub positive: bool,
}

impl FrameBundleRicci {
    /// The criterion with a safety factor: `V·H ≥ m·M²` and `H ≥ ric_lower/m`.
    pub fn positive_with_margin(&self, ric_lower: f64, margin: f64) -> bool {
        self.horizontal_lower > 0.0
            && self.horizontal_lower >= ric_lower / margin
            && self.vertical * self.horizontal_lower >= margin * self.mixed_bound * self.mixed_bound
    }
}

/// `vertical = d⁻²`, `mixed ≤ |∇Rm| d`, `horizontal ≥ ric_lower − (9/4)|Rm|² d²`.
pub fn frame_bundle_ricci(p: &FrameBundleParams) -> FrameBundleRicci {
    let d = p.d_k;
    let vertical = 1.0 / (d * d);
    let mixed_bound = p.drm_bound * d;
    let horizontal_lower = p.ric_lower - HORIZONTAL_ONEILL * p.rm_bound * p.rm_bound * d * d;
    FrameBundleRicci {
        vertical,
        mixed_bound,
        horizontal_lower,
        positive: horizontal_lower > 0.0 && vertical * horizontal_lower > mixed_bound * mixed_bound,
    }
}

/// Safety factor required by [`choose_dk`].
pub const DK_MARGIN: f64 = 2.0;

/// Largest `d_k = 2ʲ`, `j ∈ [−60, 20]`, passing the criterion with margin 2.
pub fn choose_dk(ric_lower: f64, rm_bound: f64, drm_bound: f64) -> Result<f64> {
    if !(ric_lower > 0.0) {
        return Err(Error::Unsatisfiable);
    }
    for j in (-60..=20).rev() {
        let p = FrameBundleParams::new(libm::ldexp(1.0, j), ric_lower, rm_bound, drm_bound)?;
        if frame_bundle_ricci(&p).positive_with_margin(ric_lower, DK_MARGIN) {
            return Ok(p.d_k);
        }
    }
    Err(Error::Unsatisfiable)
}

/// `P` with `Pᵀ g P = I`, from the Cholesky factor of `g`.
fn whitening(g: &[[f64; 4]; 4]) -> Result<[[f64; 4]; 4]> {
    let mut l = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..=i {
            let s = g[i][j] - (0..j).map(|m| l[i][m] * l[j][m]).sum::<f64>();
            if i == j {
                if !(s > 0.0) {
                    return Err(Error::SingularMetric { determinant: s });
                }
                l[i][i] = libm::sqrt(s);
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let (inv, _) = linalg::inverse(&l).ok_or(Error::SingularMetric { determinant: 0.0 })?;
    Ok(core::array::from_fn(|i| core::array::from_fn(|j| inv[j][i])))
}

/// Sampled `max |Rm|` and `max |∇Rm|` of a chart metric. The covariant
/// derivative uses central differences of the lowered tensor with step `h`.
pub fn sampled_curvature_bounds<M: ChartMetric<4>>(metric: &M, points: &[[f64; 4]], h: f64) -> Result<(f64, f64)> {
    let mut rm: f64 = 0.0;
    let mut drm: f64 = 0.0;
    for x in points {
        let b = curvature_at(metric, x, DerivativeScheme::Dual)?;
        rm = rm.max(b.riemann_norm());
        let r = &b.riemann;
        let gam = &b.christoffel;
        let mut nabla = [[[[[0.0; 4]; 4]; 4]; 4]; 4];
        for a in 0..4 {
            let mut xp = *x;
            let mut xm = *x;
            xp[a] += h;
            xm[a] -= h;
            let rp = curvature_at(metric, &xp, DerivativeScheme::Dual)?.riemann;
            let rmn = curvature_at(metric, &xm, DerivativeScheme::Dual)?.riemann;
            for i in 0..4 {
                for j in 0..4 {
                    for k in 0..4 {
                        for l in 0..4 {
                            let mut v = (rp[i][j][k][l] - rmn[i][j][k][l]) / (2.0 * h);
                            for m in 0..4 {
                                v -= gam[m][a][i] * r[m][j][k][l]
                                    + gam[m][a][j] * r[i][m][k][l]
                                    + gam[m][a][k] * r[i][j][m][l]
                                    + gam[m][a][l] * r[i][j][k][m];
                            }
                            nabla[a][i][j][k][l] = v;
                        }
                    }
                }
            }
        }
        // contract each slot with the whitening matrix, one slot at a time
        let p = whitening(&b.metric)?;
        let idx = |n: usize| -> [usize; 5] { [n / 256, (n / 64) % 4, (n / 16) % 4, (n / 4) % 4, n % 4] };
        let mut t: Vec<f64> = (0..1024)
            .map(|n| {
                let [a, i, j, k, l] = idx(n);
                nabla[a][i][j][k][l]
            })
            .collect();
        for slot in 0..5 {
            let stride = 1usize << (2 * (4 - slot));
            let mut out = alloc::vec![0.0; 1024];
            for (n, o) in out.iter_mut().enumerate() {
                let e = idx(n)[slot];
                let base = n - e * stride;
                *o = (0..4).map(|m| p[m][e] * t[base + m * stride]).sum();
            }
            t = out;
        }
        drm = drm.max(libm::sqrt(t.iter().map(|v| v * v).sum()));
    }
    Ok((rm, drm))
}
