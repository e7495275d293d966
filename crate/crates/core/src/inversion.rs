//! Solving `Q(u) = y` for monotone systems.
//!
//! The general solver runs a damped residual iteration
//! `u ← u + α(y − Q(u))`, which moves towards the solution set of a
//! monotone map for small enough `α`, then polishes with
//! Levenberg–Marquardt-damped Gauss–Newton steps. Solution sets of
//! monotone maps are convex; when the segment search finds a line of
//! solutions through the answer it is reported as the multiplicity.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{find_constancy_segment, ConstancySegment, SegmentSearch, Tolerances};
use crate::differential::{jacobian, Step};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::linalg::{axpy, norm2, norm_inf, sub, Matrix};
use crate::systems::DemandSystem;
use crate::systems::{logit_shares, QuasilinearSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Multiplicity {
    UniqueAtResolution,
    SegmentFound(ConstancySegment),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InversionMethod {
    ResidualIteration,
    GaussNewton,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionResult {
    pub solution: Vec<f64>,
    /// `‖Q(solution) − y‖∞`.
    pub residual_norm: f64,
    pub iterations: usize,
    pub multiplicity: Multiplicity,
    pub method: InversionMethod,
    /// `‖y − Q(u)‖₂` after each accepted step, starting from `u0`.
    #[serde(skip)]
    pub residual_trace: Vec<f64>,
}

/// Consecutive residual iterations without a 1% improvement before the
/// solver hands over to the polish.
const STALL_WINDOW: usize = 50;
const MAX_HALVINGS: usize = 60;
const POLISH_ITERATIONS: usize = 100;

struct Iterate {
    u: Vec<f64>,
    r: Vec<f64>,
    norm: f64,
}

impl Iterate {
    fn at(system: &DemandSystem, y: &[f64], u: Vec<f64>) -> Result<Self> {
        let r = sub(y, &system.eval(&u)?);
        let norm = norm2(&r);
        Ok(Self { u, r, norm })
    }
}

/// Solves `Q(u) = y` starting from the interior point `u0`.
///
/// Fails with [`Error::InversionNonConvergence`] (carrying the best
/// iterate) if `‖Q(u) − y‖∞ > tol` after `max_iter` residual iterations
/// and the polish.
pub fn invert(
    system: &DemandSystem,
    domain: &Domain,
    y: &[f64],
    u0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<InversionResult> {
    if y.len() != system.dim() {
        return Err(Error::dim("inversion target", system.dim(), y.len()));
    }
    if !system.is_continuous() {
        return Err(Error::Precondition(
            "inversion requires a continuous system".into(),
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    domain.require_inside(u0)?;

    let j0 = jacobian(system, domain, u0, Step::Auto)?.entries;
    let mut alpha = (1.0 / j0.frobenius_norm().max(1e-8)).min(1e3);
    let mut cur = Iterate::at(system, y, u0.to_vec())?;
    let mut trace = vec![cur.norm];
    let mut iterations = 0;
    let mut best_norm = cur.norm;
    let mut since_progress = 0;

    while iterations < max_iter && norm_inf(&cur.r) > tol && since_progress < STALL_WINDOW {
        iterations += 1;
        let mut halvings = 0;
        let candidate = loop {
            let cand = axpy(&cur.u, alpha, &cur.r);
            if domain.contains(&cand)? {
                break cand;
            }
            alpha *= 0.5;
            halvings += 1;
            if halvings > MAX_HALVINGS {
                return Err(Error::DomainExit { point: cand });
            }
        };
        let next = Iterate::at(system, y, candidate)?;
        if next.norm <= cur.norm {
            cur = next;
            trace.push(cur.norm);
            alpha *= 1.2;
        } else {
            alpha *= 0.5;
        }
        if cur.norm < 0.99 * best_norm {
            best_norm = cur.norm;
            since_progress = 0;
        } else {
            since_progress += 1;
        }
    }

    let mut method = InversionMethod::ResidualIteration;
    let mut mu: Option<f64> = None;
    for _ in 0..POLISH_ITERATIONS {
        if cur.norm == 0.0 {
            break;
        }
        let j = jacobian(system, domain, &cur.u, Step::Auto)?.entries;
        let jt = j.transpose();
        let jtj = jt.matmul(&j);
        let g = jt.mul_vec(&cur.r);
        let diag_max = (0..jtj.rows()).map(|i| jtj[(i, i)]).fold(0.0, f64::max);
        let mut damping = mu.unwrap_or(1e-3 * diag_max).max(f64::MIN_POSITIVE);
        let mut improved = false;
        for _ in 0..30 {
            let lhs = Matrix::from_fn(jtj.rows(), jtj.cols(), |a, b| {
                jtj[(a, b)] + if a == b { damping } else { 0.0 }
            });
            if let Some(step) = lhs.solve(&g) {
                let cand = axpy(&cur.u, 1.0, &step);
                if domain.contains(&cand)? {
                    let next = Iterate::at(system, y, cand)?;
                    if next.norm < cur.norm {
                        cur = next;
                        trace.push(cur.norm);
                        improved = true;
                        damping = (damping / 10.0).max(f64::MIN_POSITIVE);
                        break;
                    }
                }
            }
            damping *= 10.0;
        }
        mu = Some(damping);
        if !improved {
            break;
        }
        iterations += 1;
        method = InversionMethod::GaussNewton;
    }

    let residual_norm = norm_inf(&cur.r);
    if residual_norm > tol {
        return Err(Error::InversionNonConvergence {
            iterations,
            residual: residual_norm,
            best: cur.u,
        });
    }
    let scale = norm_inf(y).max(1.0);
    let search = SegmentSearch::from_tolerances(&Tolerances::default(), scale);
    let multiplicity = match find_constancy_segment(system, domain, &cur.u, &search)? {
        Some(seg) => Multiplicity::SegmentFound(seg),
        None => Multiplicity::UniqueAtResolution,
    };
    Ok(InversionResult {
        solution: cur.u,
        residual_norm,
        iterations,
        multiplicity,
        method,
        residual_trace: trace,
    })
}

/// Closed-form inverse of the logit share map:
/// `u_k = ln q_k − ln(1 − Σ q)`.
pub fn invert_logit(q: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = q.iter().sum();
    if q.is_empty() || q.iter().any(|&x| !(x > 0.0)) || !(total < 1.0) {
        return Err(Error::OutsideSimplex(q.to_vec()));
    }
    let outside = (1.0 - total).ln();
    Ok(q.iter().map(|x| x.ln() - outside).collect())
}

/// Checks an [`invert_logit`] answer by mapping it forward again.
pub fn logit_round_trip_error(q: &[f64]) -> Result<f64> {
    let u = invert_logit(q)?;
    Ok(norm_inf(&sub(&logit_shares(&u), q)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuasilinearInverse {
    Unique(Vec<f64>),
    /// `C` is not differentiable at `y`, so every `u` in the box (one
    /// interval per coordinate) has `y` among its maximizers.
    Unsupported {
        reason: String,
        u_interval: Vec<(f64, f64)>,
    },
}

/// Inverts quasilinear demand through `u = −∇C(y)`.
///
/// One-sided difference quotients of `C` detect kinks first: at a kink the
/// preimage of `y` is not a singleton and the superdifferential interval is
/// returned instead of a point.
pub fn invert_quasilinear(spec: &QuasilinearSpec, y: &[f64]) -> Result<QuasilinearInverse> {
    if y.len() != spec.dim() {
        return Err(Error::dim("quasilinear target", spec.dim(), y.len()));
    }
    let grad = spec.gradient(y).ok_or(Error::GradientUnavailable)?;
    if let Some(m) = spec.quadratic_form() {
        return Ok(QuasilinearInverse::Unique(m.mul_vec(y)));
    }
    let c0 = spec.objective(y);
    let mut interval = Vec::with_capacity(y.len());
    let mut kinked = false;
    for k in 0..y.len() {
        let h = 1e-6 * y[k].abs().max(1.0);
        let mut yp = y.to_vec();
        let mut ym = y.to_vec();
        yp[k] += h;
        ym[k] -= h;
        let right = (spec.objective(&yp) - c0) / (yp[k] - y[k]);
        let left = (c0 - spec.objective(&ym)) / (y[k] - ym[k]);
        let size = right.abs().max(left.abs()).max(1.0);
        if (right - left).abs() > 1e-4 * size {
            kinked = true;
        }
        interval.push(((-right).min(-left), (-right).max(-left)));
    }
    if kinked {
        return Ok(QuasilinearInverse::Unsupported {
            reason: format!("C is not differentiable at {y:?}; the preimage is not a singleton"),
            u_interval: interval,
        });
    }
    let u: Vec<f64> = grad.iter().map(|g| -g).collect();
    let back = spec.maximize(&u)?;
    let miss = norm_inf(&sub(&back, y));
    if miss > 1e-6 * norm_inf(y).max(1.0) {
        return Ok(QuasilinearInverse::Unsupported {
            reason: format!("round trip from u = {u:?} reaches {back:?}, missing y by {miss}"),
            u_interval: interval,
        });
    }
    Ok(QuasilinearInverse::Unique(u))
}
