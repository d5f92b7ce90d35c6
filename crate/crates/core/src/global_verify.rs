//! Global certificates: Chern integrals of `ω = *du`, the `V_Λ` closeness
//! bound, lengths of the radial curves `γ_{z₁}`, and graph estimates of the
//! diameter of the base.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::harmonic::Potential;
use crate::linalg::{self, det4, dot, Vec4};
use crate::metric::MetricParams;
use crate::quadrature::adaptive_simpson;
use crate::s3core::{
    distance_to_fiber, geodesic_distance, sample_grid, sphere2_quadrature, PoleConfiguration, SpherePoint,
};
use crate::{Error, Result};

/// `ω = *du` on `S³`, with `ω(A, B) = det[x, ∇u, A, B]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoFormField {
    pub potential: Potential,
}

impl TwoFormField {
    pub fn new(cfg: PoleConfiguration) -> Self {
        TwoFormField { potential: Potential::new(cfg) }
    }

    pub fn eval(&self, x: &SpherePoint, a: &Vec4, b: &Vec4) -> Result<f64> {
        let g = self.potential.gradient(x, false)?;
        Ok(det4(x.coords(), g.components(), a, b))
    }

    /// Pointwise norm, equal to `|du|`.
    pub fn norm(&self, x: &SpherePoint) -> Result<f64> {
        Ok(self.potential.gradient(x, false)?.norm())
    }
}

/// Orientation of an integration surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Standard,
    Reversed,
}

impl Orientation {
    fn sign(self) -> f64 {
        match self {
            Orientation::Standard => 1.0,
            Orientation::Reversed => -1.0,
        }
    }
}

/// `∫ ω` over the geodesic sphere of radius `r` about `p^α_ℓ`.
///
/// Each sphere is oriented so that its normal pointing toward the pole comes
/// first; this gives `(−1)^α 2π`.
pub fn chern_integral_sphere(cfg: &PoleConfiguration, alpha: u8, ell: usize, r: f64, m: usize) -> Result<f64> {
    if alpha > 1 || ell >= cfg.k as usize {
        return Err(Error::InvalidParameter("pole index out of range"));
    }
    let center = cfg.pole(alpha, ell);
    for (a, l, p) in cfg.poles() {
        if (a, l) != (alpha, ell) && geodesic_distance(center, p) <= r {
            return Err(Error::QuadratureOverlap);
        }
    }
    let field = TwoFormField::new(cfg.clone());
    let mut total = 0.0;
    for node in sphere2_quadrature(center, r, m)? {
        let [t1, t2] = node.tangents;
        let inward = linalg::scale(&node.normal, -1.0);
        let orient = det4(node.point.coords(), &inward, &t1, &t2).signum();
        total += node.weight * orient * field.eval(&node.point, &t1, &t2)?;
    }
    Ok(total)
}

/// `∫_Σ ω` over the Clifford torus by an `m × m` trapezoid rule in the two
/// angles. The standard orientation has `(z₁, −z₂)` as its normal, which
/// makes the value `2πk`.
pub fn chern_integral_clifford(cfg: &PoleConfiguration, m: usize, orientation: Orientation) -> Result<f64> {
    if m < 32 {
        return Err(Error::InvalidParameter("Clifford torus rule needs m >= 32"));
    }
    let field = TwoFormField::new(cfg.clone());
    let h = 2.0 * PI / m as f64;
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let mut total = 0.0;
    for i in 0..m {
        let (s1, c1) = libm::sincos(i as f64 * h);
        for j in 0..m {
            let (s2, c2) = libm::sincos(j as f64 * h);
            let x = SpherePoint::new([s * c1, s * s1, s * c2, s * s2])?;
            let normal: Vec4 = [s * c1, s * s1, -s * c2, -s * s2];
            let g = field.potential.gradient(&x, false)?;
            total += dot(g.components(), &normal);
        }
    }
    // area element ½ dφ₁ dφ₂
    Ok(orientation.sign() * total * h * h * 0.5)
}

/// Largest deviation of every sphere integral from `(−1)^α 2π`, relative
/// to `2π`, and the sum over all `2k` spheres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereChernSummary {
    pub max_relative_error: f64,
    pub total: f64,
}

pub fn chern_spheres_summary(cfg: &PoleConfiguration, r: f64, m: usize) -> Result<SphereChernSummary> {
    let mut worst = 0.0f64;
    let mut total = 0.0;
    for alpha in 0..2u8 {
        for ell in 0..cfg.k as usize {
            let v = chern_integral_sphere(cfg, alpha, ell, r, m)?;
            let expected = if alpha == 0 { 2.0 * PI } else { -2.0 * PI };
            worst = worst.max(libm::fabs(v - expected) / (2.0 * PI));
            total += v;
        }
    }
    Ok(SphereChernSummary { max_relative_error: worst, total })
}

/// Result of [`vlambda_closeness`]. Margins are `bound − |V_Λ(u_k) − 1|`;
/// non-negative means the bound holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VLambdaReport {
    pub samples: usize,
    pub outside_margin: f64,
    pub inside_margin: f64,
    pub outside_samples: usize,
    pub inside_samples: usize,
    /// Point of largest `|V_Λ(u_k) − 1|`.
    pub worst_point: SpherePoint,
    pub worst_in_tube: bool,
}

impl VLambdaReport {
    pub fn passed(&self) -> bool {
        self.outside_margin >= 0.0 && self.inside_margin >= 0.0
    }

    pub fn worst_margin(&self) -> f64 {
        self.outside_margin.min(self.inside_margin)
    }
}

/// Whether `x` lies in the `r`-tube of `F₀ ∪ F₁`.
pub fn in_fiber_tube(x: &SpherePoint, r: f64) -> bool {
    distance_to_fiber(x, 0) < r || distance_to_fiber(x, 1) < r
}

/// Checks `|V_Λ(u_k) − 1| ≤ δ³` outside the `r`-tubes of `F₀ ∪ F₁` and
/// `≤ δ³(1 + |z₁|⁻¹ + |z₂|⁻¹)` inside them.
pub fn vlambda_closeness(params: &MetricParams, r: f64, delta: f64, points: &[SpherePoint]) -> Result<VLambdaReport> {
    if !(r > 0.0 && r < 0.5) {
        return Err(Error::Domain { what: "tube radius", value: r });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain { what: "delta", value: delta });
    }
    if points.is_empty() {
        return Err(Error::EmptySample);
    }
    let pot = Potential::new(PoleConfiguration::new(params.k)?);
    let d3 = delta * delta * delta;
    let mut rep = VLambdaReport {
        samples: points.len(),
        outside_margin: f64::INFINITY,
        inside_margin: f64::INFINITY,
        outside_samples: 0,
        inside_samples: 0,
        worst_point: points[0],
        worst_in_tube: false,
    };
    let mut worst = f64::NEG_INFINITY;
    for x in points {
        let dev = libm::fabs(params.v_lambda(pot.value(x, true)?) - 1.0);
        let tube = in_fiber_tube(x, r);
        if tube {
            let bound = d3 * (1.0 + 1.0 / x.z1().norm() + 1.0 / x.z2().norm());
            rep.inside_margin = rep.inside_margin.min(bound - dev);
            rep.inside_samples += 1;
        } else {
            rep.outside_margin = rep.outside_margin.min(d3 - dev);
            rep.outside_samples += 1;
        }
        if dev > worst {
            worst = dev;
            rep.worst_point = *x;
            rep.worst_in_tube = tube;
        }
    }
    Ok(rep)
}

/// Sample grid used to certify `V_Λ` closeness: no exclusion beyond the
/// pole guard.
pub fn closeness_samples(k: u32, n: usize, seed: u64) -> Result<Vec<SpherePoint>> {
    sample_grid(n, &PoleConfiguration::with_exclusion(k, 1e-6)?, seed)
}

/// Smallest `Λ = 2ʲ` for which [`vlambda_closeness`] passes on `points`.
pub fn certify_vlambda(k: u32, r: f64, delta: f64, points: &[SpherePoint]) -> Result<(f64, VLambdaReport)> {
    for j in 1..=crate::metric::LAMBDA_MAX_EXPONENT {
        let params = MetricParams::new(k, libm::ldexp(1.0, j))?;
        let rep = vlambda_closeness(&params, r, delta, points)?;
        if rep.passed() {
            return Ok((params.lambda, rep));
        }
    }
    Err(Error::NotFound { what: "lambda" })
}

/// The curve `γ_{z₁}(t) = (√(1−t²) z₁, t²)`, pushed radially onto `S³`.
pub fn gamma(z1: Complex64, t: f64) -> Result<SpherePoint> {
    let s = libm::sqrt((1.0 - t * t).max(0.0));
    SpherePoint::from_complex(z1 * s, Complex64::new(t * t, 0.0))
}

/// `|γ'(t)|` in `S³`: the embedding derivative projected to the tangent
/// space and divided by the embedding norm.
pub fn gamma_speed(z1: Complex64, t: f64) -> f64 {
    let s = libm::sqrt((1.0 - t * t).max(0.0));
    let raw: Vec4 = [s * z1.re, s * z1.im, t * t, 0.0];
    let d: Vec4 = [-t / s * z1.re, -t / s * z1.im, 2.0 * t, 0.0];
    let n2 = dot(&raw, &raw);
    let tangent = linalg::axpy(&d, -dot(&raw, &d) / n2, &raw);
    linalg::norm(&tangent) / libm::sqrt(n2)
}

/// Recursion cap for adaptive Simpson; the integrands here carry rounding
/// noise near poles that would otherwise drive it to full depth.
const SIMPSON_DEPTH: u32 = 16;

/// Lower end of the quadrature in `t`. `γ` leaves `F₀` at distance `≈ t²`,
/// so below this the potential cannot be resolved through `cos s`.
pub const GAMMA_T_MIN: f64 = 1e-3;

/// Upper bound for the arc over `(0, GAMMA_T_MIN)`: there `u_k ≤ 1/(2k t²)`
/// up to lower order and `|γ'| ≤ 3t`, so the integrand stays below
/// `3t + 3/√(2kΛ)`.
pub fn gamma_tail_bound(params: &MetricParams) -> f64 {
    let e = GAMMA_T_MIN;
    1.5 * e * e + 3.0 * e / libm::sqrt(2.0 * params.k as f64 * params.lambda) + e * 1e-3
}

/// `ℓ_k(γ_{z₁}) = ∫ √V_Λ(u_k(γ(t))) |γ'(t)| dt` over `(0, 2√r)`: adaptive
/// quadrature from [`GAMMA_T_MIN`] plus [`gamma_tail_bound`].
pub fn curve_length_gamma(params: &MetricParams, z1: Complex64, r: f64, tol: f64) -> Result<f64> {
    if !(r > 0.0 && r <= 0.2) {
        return Err(Error::Domain { what: "curve radius", value: r });
    }
    let z1 = z1 / z1.norm();
    let pot = Potential::new(PoleConfiguration::new(params.k)?);
    let mut failure = None;
    let f = |t: f64| match gamma(z1, t).and_then(|x| pot.value(&x, true)) {
        Ok(uk) => libm::sqrt(params.v_lambda(uk)) * gamma_speed(z1, t),
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let len = adaptive_simpson(f, GAMMA_T_MIN, 2.0 * libm::sqrt(r), tol, SIMPSON_DEPTH);
    match failure {
        Some(e) => Err(e),
        None => Ok(len + gamma_tail_bound(params)),
    }
}

/// `6r + 24 δ^{3/2} √r`.
pub fn curve_length_bound(r: f64, delta: f64) -> f64 {
    6.0 * r + 24.0 * libm::pow(delta, 1.5) * libm::sqrt(r)
}

/// Options of [`diameter_estimate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiameterOptions {
    pub nodes: usize,
    pub neighbors: usize,
    /// Added to the graph diameter to account for the fibre; `None` uses
    /// half the largest fibre length, `π/(kΛ)`.
    pub fiber_slack: Option<f64>,
    /// Radius around each pole replaced by a super-node.
    pub pole_radius: f64,
    /// Distance to `F₀ ∪ F₁` under which edges are subdivided.
    pub tube_radius: f64,
    pub sweeps: usize,
    pub seed: u64,
    /// Replace `V_Λ` by 1 (round control run).
    pub round: bool,
}

impl Default for DiameterOptions {
    fn default() -> Self {
        DiameterOptions {
            nodes: 5000,
            neighbors: 32,
            fiber_slack: None,
            pole_radius: 0.05,
            tube_radius: 0.3,
            sweeps: 32,
            seed: 0xD1A,
            round: false,
        }
    }
}

/// Sampled graph with positive symmetric edge weights approximating the
/// base metric `V_Λ(u_k) g_{S³}`.
#[derive(Debug, Clone)]
pub struct GeodesicGraph {
    pub vertices: Vec<SpherePoint>,
    /// Pole super-nodes follow the sampled vertices.
    pub super_nodes: usize,
    pub adjacency: Vec<Vec<(usize, f64)>>,
    pub k: u32,
    pub lambda: f64,
}

impl GeodesicGraph {
    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Single-source shortest paths.
    pub fn dijkstra(&self, source: usize) -> Vec<f64> {
        let mut dist = alloc::vec![f64::INFINITY; self.len()];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(HeapEntry(0.0, source));
        while let Some(HeapEntry(d, v)) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &(w, c) in &self.adjacency[v] {
                let nd = d + c;
                if nd < dist[w] {
                    dist[w] = nd;
                    heap.push(HeapEntry(nd, w));
                }
            }
        }
        dist
    }
}

#[derive(PartialEq)]
struct HeapEntry(f64, usize);

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(self.1.cmp(&other.1))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct ConformalLength<'a> {
    params: MetricParams,
    pot: &'a Potential,
    round: bool,
}

impl ConformalLength<'_> {
    fn factor(&self, x: &SpherePoint) -> Result<f64> {
        if self.round {
            return Ok(1.0);
        }
        Ok(libm::sqrt(self.params.v_lambda(self.pot.value(x, true)?)))
    }

    /// `Σ √V_Λ(midpoint) · d / pieces` along the great-circle arc.
    fn segment(&self, a: &SpherePoint, b: &SpherePoint, pieces: usize) -> Result<f64> {
        let d = geodesic_distance(a, b);
        if d == 0.0 {
            return Ok(0.0);
        }
        let dir = linalg::scale(&linalg::axpy(b.coords(), -libm::cos(d), a.coords()), 1.0 / libm::sin(d));
        let mut sum = 0.0;
        for i in 0..pieces {
            let t = (i as f64 + 0.5) / pieces as f64 * d;
            sum += self.factor(&a.geodesic(&dir, t))?;
        }
        Ok(sum * d / pieces as f64)
    }

    /// Radial length from a pole out to `x`. The integrand blows up like
    /// `s^{−1/2}`; `s = σ²` makes it bounded.
    fn radial(&self, pole: &SpherePoint, x: &SpherePoint) -> Result<f64> {
        let d = geodesic_distance(pole, x);
        if self.round {
            return Ok(d);
        }
        let dir = linalg::scale(&linalg::axpy(x.coords(), -libm::cos(d), pole.coords()), 1.0 / libm::sin(d));
        let mut failure = None;
        let f = |sigma: f64| {
            let s = sigma * sigma;
            if s < 1e-6 {
                // u_k ≈ 1/(2ks) this close to the pole
                return 2.0 * libm::sqrt(s + 1.0 / (2.0 * self.params.k as f64 * self.params.lambda));
            }
            match self.factor(&pole.geodesic(&dir, s)) {
                Ok(v) => 2.0 * sigma * v,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        };
        let len = adaptive_simpson(f, 0.0, libm::sqrt(d), 1e-8, SIMPSON_DEPTH);
        match failure {
            Some(e) => Err(e),
            None => Ok(len),
        }
    }
}

/// Builds the sampled graph: brute-force `neighbors`-nearest neighbours,
/// symmetrized, plus one super-node per pole joined to its `neighbors`
/// nearest vertices and every vertex within twice the pole radius.
pub fn build_graph(params: &MetricParams, opts: &DiameterOptions) -> Result<GeodesicGraph> {
    if opts.nodes < 2000 {
        return Err(Error::InvalidParameter("diameter estimate needs at least 2000 nodes"));
    }
    if opts.neighbors == 0 {
        return Err(Error::InvalidParameter("neighbor count must be positive"));
    }
    let cfg = PoleConfiguration::with_exclusion(params.k, opts.pole_radius)?;
    let pot = Potential::new(PoleConfiguration::new(params.k)?);
    let len = ConformalLength { params: *params, pot: &pot, round: opts.round };
    let vertices = sample_grid(opts.nodes, &cfg, opts.seed)?;
    let n = vertices.len();
    let mut adjacency: Vec<Vec<(usize, f64)>> = alloc::vec![Vec::new(); n + 2 * params.k as usize];
    let near_tube = |x: &SpherePoint| in_fiber_tube(x, opts.tube_radius);
    let kk = opts.neighbors.min(n - 1);
    let mut cand: Vec<(f64, usize)> = Vec::with_capacity(n);
    for i in 0..n {
        cand.clear();
        for j in 0..n {
            if j != i {
                // larger inner product is nearer
                cand.push((-vertices[i].dot(&vertices[j]), j));
            }
        }
        cand.select_nth_unstable_by(kk - 1, |a, b| a.0.total_cmp(&b.0));
        for &(_, j) in &cand[..kk] {
            if adjacency[i].iter().any(|&(w, _)| w == j) {
                continue;
            }
            let pieces = if near_tube(&vertices[i]) || near_tube(&vertices[j]) { 4 } else { 1 };
            let w = len.segment(&vertices[i], &vertices[j], pieces)?;
            adjacency[i].push((j, w));
            adjacency[j].push((i, w));
        }
    }
    for (s, (_, _, pole)) in cfg.poles().enumerate() {
        let node = n + s;
        let mut d: Vec<f64> = vertices.iter().map(|v| geodesic_distance(pole, v)).collect();
        let reach = {
            let (_, kth, _) = d.select_nth_unstable_by(kk - 1, f64::total_cmp);
            kth.max(2.0 * opts.pole_radius)
        };
        d = vertices.iter().map(|v| geodesic_distance(pole, v)).collect();
        for (i, v) in vertices.iter().enumerate() {
            if d[i] <= reach {
                let w = len.radial(pole, v)?;
                adjacency[node].push((i, w));
                adjacency[i].push((node, w));
            }
        }
    }
    Ok(GeodesicGraph { vertices, super_nodes: 2 * params.k as usize, adjacency, k: params.k, lambda: params.lambda })
}

/// Outcome of [`diameter_estimate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiameterReport {
    /// Graph diameter plus fibre slack.
    pub estimate: f64,
    pub graph_diameter: f64,
    pub fiber_slack: f64,
    pub nodes: usize,
    pub edges: usize,
    /// Longest edge in the round metric; the discretization scale.
    pub max_edge: f64,
}

/// Upper estimate of `diam(M_k)`: the largest eccentricity found by
/// farthest-point Dijkstra sweeps on [`build_graph`], plus fibre slack.
pub fn diameter_estimate(params: &MetricParams, opts: &DiameterOptions) -> Result<DiameterReport> {
    let graph = build_graph(params, opts)?;
    let n = graph.vertices.len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5EEDu64);
    let mut source = rng.random_range(0..n);
    let mut best = 0.0f64;
    for sweep in 0..opts.sweeps.max(1) {
        let dist = graph.dijkstra(source);
        let unreachable = dist.iter().filter(|d| !d.is_finite()).count();
        if unreachable > 0 {
            return Err(Error::DisconnectedGraph { unreachable });
        }
        let (far, ecc) =
            dist.iter().enumerate().take(n).fold((source, 0.0), |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc });
        best = best.max(ecc);
        // alternate farthest-point steps with fresh random restarts
        source = if sweep % 2 == 0 { far } else { rng.random_range(0..n) };
    }
    let mut max_edge = 0.0f64;
    for (i, nbrs) in graph.adjacency.iter().enumerate().take(n) {
        for &(j, _) in nbrs {
            if j < n {
                max_edge = max_edge.max(geodesic_distance(&graph.vertices[i], &graph.vertices[j]));
            }
        }
    }
    let slack = if opts.round {
        opts.fiber_slack.unwrap_or(0.0)
    } else {
        opts.fiber_slack.unwrap_or(PI / (params.k as f64 * params.lambda))
    };
    Ok(DiameterReport {
        estimate: best + slack,
        graph_diameter: best,
        fiber_slack: slack,
        nodes: graph.len(),
        edges: graph.edge_count(),
        max_edge,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_form_is_antisymmetric_with_norm_du() {
        let f = TwoFormField::new(PoleConfiguration::new(3).unwrap());
        let x = SpherePoint::new([0.3, 0.5, -0.6, 0.2]).unwrap();
        let [e1, e2, e3] = x.tangent_frame();
        let ab = f.eval(&x, &e1, &e2).unwrap();
        assert_eq!(ab, -f.eval(&x, &e2, &e1).unwrap());
        let comps = [f.eval(&x, &e2, &e3).unwrap(), f.eval(&x, &e3, &e1).unwrap(), ab];
        let n = libm::sqrt(comps.iter().map(|c| c * c).sum::<f64>());
        assert!((n - f.norm(&x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn sphere_integrals_have_pole_signs() {
        let cfg = PoleConfiguration::new(3).unwrap();
        let pos = chern_integral_sphere(&cfg, 0, 1, 0.2, 32).unwrap();
        let neg = chern_integral_sphere(&cfg, 1, 1, 0.2, 32).unwrap();
        assert!((pos / (2.0 * PI) - 1.0).abs() < 1e-4, "{pos}");
        assert!((neg / (2.0 * PI) + 1.0).abs() < 1e-4, "{neg}");
        let small = chern_integral_sphere(&cfg, 0, 1, 0.1, 32).unwrap();
        assert!((small - pos).abs() < 1e-4 * 2.0 * PI);
    }

    #[test]
    fn overlapping_sphere_is_rejected() {
        let cfg = PoleConfiguration::new(8).unwrap();
        // neighbouring poles on F₀ sit 2π/8 ≈ 0.785 apart
        assert!(chern_integral_sphere(&cfg, 0, 0, 0.7, 16).is_ok());
        let cfg = PoleConfiguration::new(40).unwrap();
        assert_eq!(chern_integral_sphere(&cfg, 0, 0, 0.2, 16), Err(Error::QuadratureOverlap));
        assert!(chern_integral_sphere(&cfg, 2, 0, 0.1, 16).is_err());
    }

    #[test]
    fn clifford_integral_and_orientation() {
        for k in [1u32, 2, 5] {
            let cfg = PoleConfiguration::new(k).unwrap();
            let v = chern_integral_clifford(&cfg, 64, Orientation::Standard).unwrap();
            assert!((v / (2.0 * PI * k as f64) - 1.0).abs() < 1e-6, "{k}: {v}");
            assert_eq!(chern_integral_clifford(&cfg, 64, Orientation::Reversed).unwrap(), -v);
        }
        assert!(chern_integral_clifford(&PoleConfiguration::new(1).unwrap(), 16, Orientation::Standard).is_err());
    }

    #[test]
    fn sphere_sum_rule() {
        let cfg = PoleConfiguration::new(2).unwrap();
        let s = chern_spheres_summary(&cfg, 0.15, 32).unwrap();
        assert!(s.total.abs() < 1e-6 && s.max_relative_error < 1e-4, "{s:?}");
    }

    #[test]
    fn gamma_geometry() {
        let z1 = Complex64::new(0.0, 1.0);
        for r in [0.05, 0.1] {
            let t_end = 2.0 * libm::sqrt(r);
            for i in 1..=2000 {
                let t = t_end * i as f64 / 2000.0;
                assert!(gamma_speed(z1, t) <= 3.0 * t, "{t}");
            }
            // |z₂| of the unnormalized endpoint is (2√r)² = 4r
            let end = gamma(z1, t_end).unwrap();
            let raw_norm = libm::sqrt(1.0 - t_end * t_end + t_end.powi(4));
            assert!((end.z2().norm() * raw_norm - 4.0 * r).abs() < 1e-12);
            assert!(end.z2().norm() >= libm::sin(r));
        }
        // speed against a finite difference of the curve
        let t = 0.3;
        let h = 1e-6;
        let chord = linalg::sub(gamma(z1, t + h).unwrap().coords(), gamma(z1, t - h).unwrap().coords());
        let d = linalg::norm(&chord) / (2.0 * h);
        assert!((d - gamma_speed(z1, t)).abs() < 1e-6);
    }

    #[test]
    fn curve_length_round_limit() {
        // huge Λ makes V_Λ ≈ 1, so ℓ is the round length
        let p = MetricParams::new(2, 1e12).unwrap();
        let z1 = Complex64::new(1.0, 0.0);
        let l = curve_length_gamma(&p, z1, 0.1, 1e-12).unwrap();
        let round = adaptive_simpson(|t| gamma_speed(z1, t), GAMMA_T_MIN, 2.0 * libm::sqrt(0.1), 1e-12, SIMPSON_DEPTH);
        assert!((l - round - gamma_tail_bound(&p)).abs() < 1e-6, "{l} {round}");
        // starting on a pole is fine
        let on_pole = MetricParams::new(4, 64.0).unwrap();
        let l = curve_length_gamma(&on_pole, Complex64::new(0.0, 1.0), 0.05, 1e-10).unwrap();
        assert!(l.is_finite() && l <= curve_length_bound(0.05, 0.5));
        assert!(l <= curve_length_bound(0.1, 0.0));
        assert!(curve_length_gamma(&p, z1, 0.3, 1e-8).is_err());
    }

    #[test]
    fn vlambda_margins_improve_with_lambda() {
        let pts = closeness_samples(2, 2000, 3).unwrap();
        let a = vlambda_closeness(&MetricParams::new(2, 8.0).unwrap(), 0.1, 0.5, &pts).unwrap();
        let b = vlambda_closeness(&MetricParams::new(2, 16.0).unwrap(), 0.1, 0.5, &pts).unwrap();
        assert!(b.outside_margin >= a.outside_margin && b.inside_margin >= a.inside_margin);
        let (lambda, rep) = certify_vlambda(2, 0.1, 0.5, &pts).unwrap();
        assert!(rep.passed() && lambda >= 2.0);
        let below = vlambda_closeness(&MetricParams::new(2, lambda / 2.0).unwrap(), 0.1, 0.5, &pts);
        if lambda > 2.0 {
            assert!(!below.unwrap().passed());
        }
        assert!(vlambda_closeness(&MetricParams::new(2, 8.0).unwrap(), 0.6, 0.5, &pts).is_err());
    }

    #[test]
    fn worst_closeness_point_is_in_a_tube() {
        let pts = closeness_samples(3, 4000, 5).unwrap();
        let rep = vlambda_closeness(&MetricParams::new(3, 64.0).unwrap(), 0.1, 0.5, &pts).unwrap();
        assert!(rep.worst_in_tube);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn clifford_integral_is_invariant_under_relabeling(k in 1u32..=4, m in 32usize..48) {
            let cfg = PoleConfiguration::new(k).unwrap();
            let v = chern_integral_clifford(&cfg, m, Orientation::Standard).unwrap();
            // trapezoid rule on a periodic integrand of frequency ≤ 2k is exact
            prop_assert!((v - 2.0 * PI * k as f64).abs() < 1e-6 * 2.0 * PI * k as f64);
        }

        #[test]
        fn sphere_integral_is_torus_invariant(k in 1u32..=4, ell in 0usize..4, alpha in 0u8..2) {
            let ell = ell % k as usize;
            let cfg = PoleConfiguration::new(k).unwrap();
            let a = chern_integral_sphere(&cfg, alpha, ell, 0.12, 16).unwrap();
            let b = chern_integral_sphere(&cfg, alpha, (ell + 1) % k as usize, 0.12, 16).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
