//! Jacobian-based checks and the search for segments of constancy.
//!
//! Under the law of demand, `Q` fails to be injective exactly when it is
//! constant on some non-degenerate segment. Such a segment must run along a
//! null direction of the Jacobian, so the search starts from the numerical
//! null space at each sampled point and marches outwards while both `Q`
//! and its directional derivative stay flat.

use rayon::prelude::*;

use super::pairwise::check_law_of_demand;
use super::{
    eval_all, largest_first, select_witnesses, value_scale, ConstancySegment, DiagnosticKind,
    Sampling, Tolerances, Verdict, Witness,
};
use crate::differential::{
    default_psd_tolerance, directional_derivative, is_weakly_quasi_definite, jacobian,
    null_directions, symmetrize, Definiteness, Step, DEFAULT_DIRECTIONAL_STEP,
};
use crate::domain::{Domain, Segment};
use crate::error::{Error, Result};
use crate::linalg::{axpy, norm_inf, sub, symmetric_eigen};
use crate::systems::DemandSystem;

/// Segment-search parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentSearch {
    /// `‖Q(u + λv) − Q(u)‖∞` allowed along the segment.
    pub tol_const: f64,
    /// Singular-value cutoff for null directions, and the bound on
    /// `‖Q′(u + λv; v)‖∞` along the segment.
    pub tol_null: f64,
    /// Largest `|λ|` explored on either side of the base point.
    pub max_extent: f64,
    pub derivative_step: f64,
}

impl SegmentSearch {
    pub fn from_tolerances(tols: &Tolerances, scale: f64) -> Self {
        Self {
            tol_const: tols.constancy(scale),
            tol_null: tols.null(),
            max_extent: tols.max_extent(),
            derivative_step: DEFAULT_DIRECTIONAL_STEP,
        }
    }

    /// Initial march step; accepted segments are at least ten of these long.
    fn initial_step(&self) -> f64 {
        self.max_extent / 1000.0
    }
}

const MAX_MARCH_ITERATIONS: usize = 10_000;

fn flat_derivative(
    system: &DemandSystem,
    domain: &Domain,
    p: &[f64],
    dir: &[f64],
    search: &SegmentSearch,
) -> Result<bool> {
    let d = match directional_derivative(system, domain, p, dir, search.derivative_step) {
        Err(Error::ProbeLeftDomain { .. }) => {
            let back: Vec<f64> = dir.iter().map(|x| -x).collect();
            match directional_derivative(system, domain, p, &back, search.derivative_step) {
                Err(Error::ProbeLeftDomain { .. }) => return Ok(false),
                other => other?,
            }
        }
        other => other?,
    };
    Ok(norm_inf(&d) <= search.tol_null)
}

/// Furthest `λ ≤ limit` reached along `dir` with `Q` flat, and the largest
/// deviation seen on the way.
fn march(
    system: &DemandSystem,
    domain: &Domain,
    u: &[f64],
    q0: &[f64],
    dir: &[f64],
    limit: f64,
    search: &SegmentSearch,
) -> Result<(f64, f64)> {
    let s0 = search.initial_step();
    let mut step = s0;
    let mut reach: f64 = 0.0;
    let mut deviation: f64 = 0.0;
    for _ in 0..MAX_MARCH_ITERATIONS {
        if step < s0 / 1024.0 || reach >= limit {
            break;
        }
        let cand = (reach + step).min(limit);
        let p = axpy(u, cand, dir);
        let mut accepted = false;
        if domain.contains(&p)? {
            let dev = norm_inf(&sub(&system.eval(&p)?, q0));
            if dev <= search.tol_const && flat_derivative(system, domain, &p, dir, search)? {
                reach = cand;
                deviation = deviation.max(dev);
                accepted = true;
            }
        }
        if accepted {
            step *= 2.0;
        } else {
            step *= 0.5;
        }
    }
    Ok((reach, deviation))
}

/// Number of null directions at `u` and the longest constancy segment
/// through `u`, if any.
fn search_at(
    system: &DemandSystem,
    domain: &Domain,
    u: &[f64],
    search: &SegmentSearch,
) -> Result<(usize, Option<ConstancySegment>)> {
    let j = jacobian(system, domain, u, Step::Auto)?;
    let nulls = null_directions(&j.entries, search.tol_null)?;
    let q0 = system.eval(u)?;
    let min_length = 10.0 * search.initial_step();
    let mut best: Option<ConstancySegment> = None;
    for v in &nulls {
        let interval = domain.clip_segment(u, v)?;
        let back: Vec<f64> = v.iter().map(|x| -x).collect();
        let (hi, dev_hi) = march(
            system,
            domain,
            u,
            &q0,
            v,
            interval.hi.min(search.max_extent),
            search,
        )?;
        let (lo, dev_lo) = march(
            system,
            domain,
            u,
            &q0,
            &back,
            (-interval.lo).min(search.max_extent),
            search,
        )?;
        let seg = ConstancySegment {
            segment: Segment {
                base: u.to_vec(),
                direction: v.clone(),
                lambda_lo: -lo,
                lambda_hi: hi,
            },
            max_deviation: dev_hi.max(dev_lo),
        };
        if seg.segment.length() >= min_length
            && best
                .as_ref()
                .is_none_or(|b| seg.segment.length() > b.segment.length())
        {
            best = Some(seg);
        }
    }
    Ok((nulls.len(), best))
}

/// Looks for a segment through `u` along which `Q` is constant.
///
/// Only null directions of `J(u)` are explored. A segment shorter than
/// `max_extent / 100` is treated as numerical flatness and ignored.
pub fn find_constancy_segment(
    system: &DemandSystem,
    domain: &Domain,
    u: &[f64],
    search: &SegmentSearch,
) -> Result<Option<ConstancySegment>> {
    domain.require_inside(u)?;
    Ok(search_at(system, domain, u, search)?.1)
}

fn segment_witness(system: &DemandSystem, seg: &ConstancySegment) -> Result<Witness> {
    let a = seg.segment.start();
    let b = seg.segment.end();
    let (qa, qb) = (system.eval(&a)?, system.eval(&b)?);
    let mut w = Witness::pair(&a, &b, &qa, &qb, seg.segment.length());
    w.direction = Some(seg.segment.direction.clone());
    Ok(w)
}

/// Runs the law-of-demand check the segment criterion depends on. Returns
/// the reason the criterion does not apply, if it does not.
fn precondition(
    system: &DemandSystem,
    domain: &Domain,
    sampling: &Sampling,
    tols: &Tolerances,
) -> Result<Option<String>> {
    if !system.is_continuous() {
        return Ok(Some(
            "system is discontinuous; Jacobian-based criteria do not apply".to_string(),
        ));
    }
    let lod = check_law_of_demand(system, domain, sampling, tols)?;
    if lod.is_violation() {
        let worst = lod
            .metrics
            .get("min_inner_product")
            .copied()
            .unwrap_or(f64::NAN);
        let w = &lod.witnesses[0];
        return Ok(Some(format!(
            "law of demand fails (inner product {worst} among {} sampled pairs, e.g. at u = {:?}, u~ = {:?}); \
             the segment criterion does not apply",
            lod.samples_used,
            w.u,
            w.u_tilde.as_deref().unwrap_or_default()
        )));
    }
    Ok(None)
}

/// Global injectivity via the segment criterion, searched from every
/// sampled point.
pub fn check_injectivity(
    system: &DemandSystem,
    domain: &Domain,
    sampling: &Sampling,
    tols: &Tolerances,
) -> Result<Verdict> {
    let points = sampling.points(domain)?;
    let v = Verdict::new(DiagnosticKind::Injectivity, points.len() as u64);
    if let Some(reason) = precondition(system, domain, sampling, tols)? {
        return Ok(v.inconclusive(reason));
    }
    let scale = value_scale(&eval_all(system, &points)?);
    let search = SegmentSearch::from_tolerances(tols, scale);
    let found: Vec<(usize, Option<ConstancySegment>)> = points
        .par_iter()
        .map(|p| search_at(system, domain, p, &search))
        .collect::<Result<_>>()?;
    let n_probes = sampling.probe_points.len();
    let mut candidates = Vec::new();
    let mut with_nulls = 0usize;
    for (i, (nulls, seg)) in found.iter().enumerate() {
        if *nulls > 0 {
            with_nulls += 1;
        }
        if let Some(seg) = seg {
            candidates.push((i < n_probes, segment_witness(system, seg)?));
        }
    }
    let v = v
        .tol("constancy", search.tol_const)
        .tol("null", search.tol_null)
        .tol("max_extent", search.max_extent)
        .metric("points_with_null_directions", with_nulls as f64);
    Ok(v.conclude(select_witnesses(candidates, largest_first)))
}

/// Segment search through the single point `u`.
pub fn check_local_injectivity_at(
    system: &DemandSystem,
    domain: &Domain,
    u: &[f64],
    sampling: &Sampling,
    tols: &Tolerances,
) -> Result<Verdict> {
    domain.require_inside(u)?;
    let v = Verdict::new(DiagnosticKind::LocalInjectivity, 1);
    if let Some(reason) = precondition(system, domain, sampling, tols)? {
        return Ok(v.inconclusive(reason));
    }
    let scale = value_scale([&system.eval(u)?]);
    let search = SegmentSearch::from_tolerances(tols, scale);
    let (nulls, seg) = search_at(system, domain, u, &search)?;
    let witnesses = match seg {
        Some(seg) => vec![segment_witness(system, &seg)?],
        None => Vec::new(),
    };
    let v = v
        .tol("constancy", search.tol_const)
        .tol("null", search.tol_null)
        .tol("max_extent", search.max_extent)
        .metric("null_directions", nulls as f64);
    Ok(v.conclude(witnesses))
}

/// Sufficient condition: the law of demand plus a nonsingular Jacobian at
/// every sample. A singular Jacobian alone proves nothing, so failures are
/// inconclusive rather than violations.
pub fn check_invertible_jacobian(
    system: &DemandSystem,
    domain: &Domain,
    sampling: &Sampling,
    tols: &Tolerances,
) -> Result<Verdict> {
    let points = sampling.points(domain)?;
    let tol = tols.null();
    let v = Verdict::new(DiagnosticKind::InvertibleJacobian, points.len() as u64).tol("null", tol);
    if let Some(reason) = precondition(system, domain, sampling, tols)? {
        return Ok(v.inconclusive(reason));
    }
    let sigmas: Vec<f64> = points
        .par_iter()
        .map(|p| {
            let j = jacobian(system, domain, p, Step::Auto)?.entries;
            let eig = symmetric_eigen(&j.transpose().matmul(&j))?;
            Ok(eig.values[0].max(0.0).sqrt())
        })
        .collect::<Result<_>>()?;
    let min_sigma = sigmas.iter().copied().fold(f64::INFINITY, f64::min);
    let v = v.metric("min_singular_value", min_sigma);
    match sigmas.iter().position(|&s| s <= tol) {
        None => Ok(v.conclude(Vec::new())),
        Some(i) => {
            let count = sigmas.iter().filter(|&&s| s <= tol).count();
            Ok(v.inconclusive(format!(
                "Jacobian is numerically singular at {count} of {} points (first at {:?}); \
                 run the injectivity check for a decisive answer",
                points.len(),
                points[i]
            )))
        }
    }
}

/// Flags points where the symmetrized Jacobian has an eigenvalue below
/// `−tol`.
pub fn check_quasi_definite_everywhere(
    system: &DemandSystem,
    domain: &Domain,
    sampling: &Sampling,
    tols: &Tolerances,
) -> Result<Verdict> {
    let points = sampling.points(domain)?;
    let v = Verdict::new(DiagnosticKind::QuasiDefiniteEverywhere, points.len() as u64);
    if !system.is_continuous() {
        return Ok(v.inconclusive("system is discontinuous; the Jacobian is not defined"));
    }
    let results: Vec<(f64, f64, bool)> = points
        .par_iter()
        .map(|p| {
            let j = jacobian(system, domain, p, Step::Auto)?.entries;
            let tol = match tols.psd {
                Some(t) => t,
                None => default_psd_tolerance(&symmetrize(&j)?),
            };
            let verdict = is_weakly_quasi_definite(&j, tol)?;
            Ok((
                verdict.min_symmetric_eigenvalue,
                tol,
                verdict.classification == Definiteness::Indefinite,
            ))
        })
        .collect::<Result<_>>()?;
    let n_probes = sampling.probe_points.len();
    let mut candidates = Vec::new();
    for (i, (lambda, _, bad)) in results.iter().enumerate() {
        if *bad {
            let w = Witness {
                u: points[i].clone(),
                u_tilde: None,
                q_u: Some(system.eval(&points[i])?),
                q_u_tilde: None,
                direction: None,
                magnitude: *lambda,
            };
            candidates.push((i < n_probes, w));
        }
    }
    let min_lambda = results.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let max_tol = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let mut v = v.tol("psd_max", max_tol);
    if min_lambda.is_finite() {
        v = v.metric("min_symmetric_eigenvalue", min_lambda);
    }
    if tols.psd.is_none() {
        v = v.note("psd tolerance is 1e-8 * max(1, ||S||_inf) at each point");
    }
    Ok(v.conclude(select_witnesses(candidates, f64::total_cmp)))
}
