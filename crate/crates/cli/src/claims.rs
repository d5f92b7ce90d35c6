//! The verification suites behind each subcommand.

use std::f64::consts::PI;

use anyhow::{bail, Result};
use rayon::prelude::*;
use ricciforge_core::curvature::DerivativeScheme;
use ricciforge_core::global_verify::{
    chern_integral_clifford, chern_spheres_summary, diameter_estimate, DiameterOptions, Orientation,
};
use ricciforge_core::harmonic::{green_radial, green_radial_derivative, green_radial_second_derivative};
use ricciforge_core::heisenberg::{check_relations, min_abelian_index};
use ricciforge_core::metric::layers::{conformal_ricci_identity, CONFORMAL_DW_COEFFICIENT};
use ricciforge_core::metric::{choose_lambda, HkMetric, MetricParams, RicciForm};
use ricciforge_core::perturbation::{
    chart_samples, choose_dk, conformal_perturbation_ricci, conformal_perturbation_ricci_brute, frame_bundle_ricci,
    BumpProfile, FrameBundleParams, ModelChart, DK_MARGIN, MODEL_BETA,
};
use ricciforge_core::s3core::{sample_grid, PoleConfiguration};
use ricciforge_core::Error;

use crate::cli::LambdaArg;
use crate::report::VerificationReport;

/// Margin used by `--lambda auto`.
pub const AUTO_DELTA: f64 = 0.05;
/// Upper end of the Ricci eigenvalue band.
pub const RICCI_BAND_TOP: f64 = 2.5;

pub fn resolve_lambda(k: u32, lambda: LambdaArg, delta: f64) -> Result<f64> {
    Ok(match lambda {
        LambdaArg::Auto => choose_lambda(k, delta)?,
        LambdaArg::Value(v) => v,
    })
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Eigenvalues of the Ricci form in `(0, 2.5]`, vertical entry in
/// `(0, δ]`, mixed block zero, over a seeded sample grid.
pub fn ricci_band(
    k: u32,
    lambda: f64,
    samples: usize,
    exclusion: f64,
    seed: u64,
    delta: f64,
) -> Result<VerificationReport> {
    let metric = HkMetric::new(k, lambda)?;
    let pts = sample_grid(samples, &PoleConfiguration::with_exclusion(k, exclusion)?, seed)?;
    let forms: Vec<RicciForm> = pts.par_iter().map(|x| metric.ricci_closed_form(x)).collect::<Result<_, Error>>()?;
    let (mut lo, mut hi, mut vmin, mut vmax, mut mixed) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, 0.0f64, 0.0f64);
    for f in &forms {
        for ev in f.eigenvalues() {
            lo = lo.min(ev);
            hi = hi.max(ev);
        }
        vmin = vmin.min(f.vertical);
        vmax = vmax.max(f.vertical);
        mixed = mixed.max(max_abs(&f.mixed));
    }
    let margin = lo.min(RICCI_BAND_TOP - hi).min(delta - vmax);
    let mut r = VerificationReport::new("ricci.band", margin, delta)
        .param("k", k)
        .param("lambda", lambda)
        .param("exclusion", exclusion)
        .param("max_eigenvalue", hi)
        .param("max_vertical", vmax)
        .samples(pts.len())
        .seed(seed)
        .value(lo);
    r.passed &= vmin > 0.0 && mixed == 0.0;
    Ok(r)
}

pub const CHERN_SPHERE_TOL: f64 = 1e-4;
pub const CHERN_TORUS_TOL: f64 = 1e-6;
const SPHERE_NODES: usize = 64;
const TORUS_NODES: usize = 256;

pub fn chern(k: u32, radius: Option<f64>, clifford: bool) -> Result<Vec<VerificationReport>> {
    let cfg = PoleConfiguration::new(k)?;
    let mut out = Vec::new();
    if clifford {
        let v = chern_integral_clifford(&cfg, TORUS_NODES, Orientation::Standard)?;
        let target = 2.0 * PI * k as f64;
        out.push(
            VerificationReport::new("chern.clifford", CHERN_TORUS_TOL - (v - target).abs() / target, CHERN_TORUS_TOL)
                .param("k", k)
                .samples(TORUS_NODES * TORUS_NODES)
                .value(v),
        );
    }
    if radius.is_some() || !clifford {
        let r = radius.unwrap_or(0.1);
        let s = chern_spheres_summary(&cfg, r, SPHERE_NODES)?;
        out.push(
            VerificationReport::new("chern.spheres", CHERN_SPHERE_TOL - s.max_relative_error, CHERN_SPHERE_TOL)
                .param("k", k)
                .param("radius", r)
                .param("sum", s.total)
                .samples(2 * k as usize)
                .value(s.max_relative_error),
        );
    }
    Ok(out)
}

pub const DIAMETER_SLACK: f64 = 0.2;
pub const ROUND_TOL: f64 = 0.1;

pub fn diameter(k: u32, lambda: f64, nodes: usize, seed: u64, round: bool) -> Result<VerificationReport> {
    let opts = DiameterOptions { nodes, seed, round, ..Default::default() };
    let rep = diameter_estimate(&MetricParams::new(k, lambda)?, &opts)?;
    let (id, margin, tol) = if round {
        ("diameter.round", ROUND_TOL - (rep.estimate - PI).abs(), ROUND_TOL)
    } else {
        ("diameter", PI + DIAMETER_SLACK - rep.estimate, DIAMETER_SLACK)
    };
    Ok(VerificationReport::new(id, margin, tol)
        .param("k", k)
        .param("lambda", lambda)
        .param("edges", rep.edges)
        .param("max_edge", rep.max_edge)
        .samples(nodes)
        .seed(seed)
        .value(rep.estimate))
}

pub fn green() -> Result<Vec<VerificationReport>> {
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let s = 0.1 + 2.9 * (i as f64 + 0.5) / 100.0;
        let res = green_radial_second_derivative(s)? + 2.0 / s.tan() * green_radial_derivative(s)? - 1.0 / PI;
        worst = worst.max(res.abs());
    }
    let near = 1e-4 * green_radial(1e-4)?;
    Ok(vec![
        VerificationReport::new("green.ode", 1e-8 - worst, 1e-8).samples(100).value(worst),
        VerificationReport::new("green.pole", 1e-3 - (near - 0.5).abs(), 1e-3).param("s", 1e-4).samples(1).value(near),
    ])
}

pub const CONFORMAL_IDENTITY_TOL: f64 = 1e-8;
pub const CONFORMAL_LAW_TOL: f64 = 1e-7;

pub fn conformal(k: u32, lambda: f64, samples: usize, seed: u64) -> Result<Vec<VerificationReport>> {
    let m = HkMetric::new(k, lambda)?;
    let pts = sample_grid(samples, &PoleConfiguration::with_exclusion(k, 0.1)?, seed)?;
    let residuals: Vec<f64> = pts
        .par_iter()
        .map(|x| {
            conformal_ricci_identity(&m.w_field(), x, DerivativeScheme::Dual, CONFORMAL_DW_COEFFICIENT)
                .map(|i| i.residual())
        })
        .collect::<Result<_, Error>>()?;
    let worst_id = max_abs(&residuals);

    let chart = ModelChart::new(k, lambda, MODEL_BETA)?;
    let r = 0.25 * chart.scale * 1e-2;
    let bump = BumpProfile::new(r, 0.5)?;
    let cps = chart_samples(chart.radius_of_rho(2.2 * r), samples, seed);
    let gaps: Vec<f64> = cps
        .par_iter()
        .map(|x| {
            let law = conformal_perturbation_ricci(&chart, &bump, x)?;
            let brute = conformal_perturbation_ricci_brute(&chart, &bump, x)?;
            let scale = brute.iter().flatten().fold(1.0f64, |a, b| a.max(b.abs()));
            Ok((0..16).map(|n| (law[n / 4][n % 4] - brute[n / 4][n % 4]).abs()).fold(0.0, f64::max) / scale)
        })
        .collect::<Result<_, Error>>()?;
    let worst_law = max_abs(&gaps);
    Ok(vec![
        VerificationReport::new("conformal.identity", CONFORMAL_IDENTITY_TOL - worst_id, CONFORMAL_IDENTITY_TOL)
            .param("k", k)
            .param("lambda", lambda)
            .samples(pts.len())
            .seed(seed)
            .value(worst_id),
        VerificationReport::new("conformal.perturbation", CONFORMAL_LAW_TOL - worst_law, CONFORMAL_LAW_TOL)
            .param("k", k)
            .param("lambda", lambda)
            .samples(cps.len())
            .seed(seed)
            .value(worst_law),
    ])
}

/// Margin is the smaller relative slack of `H ≥ ric_lower/2` and
/// `V·H ≥ 2M²`; `value` is the fibre scale tested.
pub fn framebundle(ric_lower: f64, rm: f64, drm: f64, dk: Option<f64>) -> Result<VerificationReport> {
    let d = match dk {
        Some(d) => d,
        None => match choose_dk(ric_lower, rm, drm) {
            Ok(d) => d,
            Err(Error::Unsatisfiable) => {
                return Ok(VerificationReport::new("framebundle", f64::NEG_INFINITY, DK_MARGIN)
                    .param("ric_lower", ric_lower)
                    .param("rm", rm)
                    .param("drm", drm));
            }
            Err(e) => return Err(e.into()),
        },
    };
    let f = frame_bundle_ricci(&FrameBundleParams::new(d, ric_lower, rm, drm)?);
    let hor = if ric_lower > 0.0 { f.horizontal_lower / (ric_lower / DK_MARGIN) - 1.0 } else { f64::NEG_INFINITY };
    let mixed = DK_MARGIN * f.mixed_bound * f.mixed_bound;
    let block = if mixed > 0.0 { f.vertical * f.horizontal_lower / mixed - 1.0 } else { f64::INFINITY };
    let mut r = VerificationReport::new("framebundle", hor.min(block), DK_MARGIN)
        .param("ric_lower", ric_lower)
        .param("rm", rm)
        .param("drm", drm)
        .param("positive", if f.positive { "true" } else { "false" })
        .value(d);
    r.passed &= f.positive;
    Ok(r)
}

pub fn group_index(k: u32) -> Result<VerificationReport> {
    let idx = min_abelian_index(k)?;
    Ok(VerificationReport::new("group.index", idx as f64 - 2.0, 0.0)
        .param("k", k)
        .samples((k as usize).pow(3))
        .value(idx as f64))
}

pub fn group_relations(k: u32) -> Result<VerificationReport> {
    let rep = check_relations(k)?;
    let margin = if rep.passed() { 0.0 } else { -1.0 };
    Ok(VerificationReport::new("group.relations", margin, 0.0).param("k", k).samples(rep.order).value(rep.order as f64))
}

/// Largest `k` for which the sweep runs the exhaustive relation check.
pub const SWEEP_RELATIONS_MAX_K: u32 = 8;

/// The standard suites for one `k`.
pub fn sweep_one(k: u32, delta: f64, samples: usize, seed: u64) -> Result<Vec<VerificationReport>> {
    if !(delta > 0.0 && delta <= 0.1) {
        bail!(crate::UsageError(format!("--delta must lie in (0, 0.1], got {delta}")));
    }
    let lambda = choose_lambda(k, delta)?;
    let mut out = vec![ricci_band(k, lambda, samples, ricciforge_core::s3core::DEFAULT_EXCLUSION, seed, delta)?];
    out.extend(chern(k, Some(0.1), true)?);
    out.push(diameter(k, lambda, 5000, 0xD1A, false)?);
    if k <= SWEEP_RELATIONS_MAX_K {
        out.push(group_relations(k)?);
    }
    if (2..=ricciforge_core::heisenberg::MAX_ENUMERATION_K).contains(&k) {
        out.push(group_index(k)?);
    }
    Ok(out)
}
