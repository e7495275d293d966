//! Checks over pairs of points: the law of demand, inverse isotonicity and
//! the P-function property.

use super::{
    eval_all, fmt_point, select_witnesses, value_scale, DiagnosticKind, SampledPair, Sampling,
    Tolerances, Verdict, Witness,
};
use crate::domain::Domain;
use crate::error::Result;
use crate::linalg::{dot, sub};
use crate::systems::DemandSystem;

/// `(Q(u) − Q(ũ))·(u − ũ)`.
pub(crate) fn inner_product(q_u: &[f64], q_ut: &[f64], u: &[f64], ut: &[f64]) -> f64 {
    dot(&sub(q_u, q_ut), &sub(u, ut))
}

/// `max_k (Q_k(u) − Q_k(ũ))(u_k − ũ_k)`.
pub(crate) fn max_coordinate_product(q_u: &[f64], q_ut: &[f64], u: &[f64], ut: &[f64]) -> f64 {
    (0..u.len())
        .map(|k| (q_u[k] - q_ut[k]) * (u[k] - ut[k]))
        .fold(f64::NEG_INFINITY, f64::max)
}

struct EvaluatedPairs {
    pairs: Vec<SampledPair>,
    q: Vec<(Vec<f64>, Vec<f64>)>,
    scale: f64,
}

fn evaluate_pairs(
    system: &DemandSystem,
    domain: &Domain,
    sampling: &Sampling,
) -> Result<EvaluatedPairs> {
    let pairs = sampling.pairs(domain)?;
    let flat: Vec<Vec<f64>> = pairs
        .iter()
        .flat_map(|(a, b, _)| [a.clone(), b.clone()])
        .collect();
    let values = eval_all(system, &flat)?;
    let scale = value_scale(&values);
    let mut it = values.into_iter();
    let mut q = Vec::with_capacity(pairs.len());
    while let (Some(a), Some(b)) = (it.next(), it.next()) {
        q.push((a, b));
    }
    Ok(EvaluatedPairs { pairs, q, scale })
}

/// Samples pairs and flags `(Q(u) − Q(ũ))·(u − ũ) < −tol`.
///
/// Probe-pair violations are additionally spelled out in the notes with the
/// evaluated demands, so the reported arithmetic can be checked by hand.
pub fn check_law_of_demand(
    system: &DemandSystem,
    domain: &Domain,
    sampling: &Sampling,
    tols: &Tolerances,
) -> Result<Verdict> {
    let ev = evaluate_pairs(system, domain, sampling)?;
    let tol = tols.lod(ev.scale);
    let mut worst = f64::INFINITY;
    let mut candidates = Vec::new();
    let mut notes = Vec::new();
    for ((u, ut, probe), (qu, qut)) in ev.pairs.iter().zip(&ev.q) {
        let ip = inner_product(qu, qut, u, ut);
        worst = worst.min(ip);
        if ip < -tol {
            if *probe {
                notes.push(format!(
                    "probe pair u = {}, u~ = {}: Q(u) = {}, Q(u~) = {}, inner product {}",
                    fmt_point(u),
                    fmt_point(ut),
                    fmt_point(qu),
                    fmt_point(qut),
                    ip
                ));
            }
            candidates.push((*probe, Witness::pair(u, ut, qu, qut, ip)));
        }
    }
    let mut v = Verdict::new(DiagnosticKind::LawOfDemand, ev.pairs.len() as u64)
        .tol("lod", tol)
        .tol("scale", ev.scale);
    if worst.is_finite() {
        v = v.metric("min_inner_product", worst);
    }
    v.notes = notes;
    Ok(v.conclude(select_witnesses(candidates, f64::total_cmp)))
}

/// Flags ordered pairs with `Q(a) ≥ Q(b)` but `a ≱ b` (both orientations of
/// every sampled pair are tried).
pub fn check_inverse_isotonicity(
    system: &DemandSystem,
    domain: &Domain,
    sampling: &Sampling,
    tols: &Tolerances,
) -> Result<Verdict> {
    let ev = evaluate_pairs(system, domain, sampling)?;
    let tol = tols.order(ev.scale);
    let mut candidates = Vec::new();
    for ((u, ut, probe), (qu, qut)) in ev.pairs.iter().zip(&ev.q) {
        for (a, b, qa, qb) in [(u, ut, qu, qut), (ut, u, qut, qu)] {
            let demand_dominates = qa.iter().zip(qb.iter()).all(|(x, y)| *x >= *y - tol);
            let gap = a
                .iter()
                .zip(b.iter())
                .map(|(x, y)| x - y)
                .fold(f64::INFINITY, f64::min);
            if demand_dominates && gap < -tol {
                candidates.push((*probe, Witness::pair(a, b, qa, qb, gap)));
            }
        }
    }
    let v = Verdict::new(DiagnosticKind::InverseIsotonicity, ev.pairs.len() as u64)
        .tol("order", tol)
        .tol("scale", ev.scale);
    Ok(v.conclude(select_witnesses(candidates, f64::total_cmp)))
}

/// Flags distinct pairs with `max_k (Q_k(u) − Q_k(ũ))(u_k − ũ_k) ≤ tol`.
pub fn check_p_function(
    system: &DemandSystem,
    domain: &Domain,
    sampling: &Sampling,
    tols: &Tolerances,
) -> Result<Verdict> {
    let ev = evaluate_pairs(system, domain, sampling)?;
    let tol = tols.strict();
    let mut candidates = Vec::new();
    let mut used = 0u64;
    for ((u, ut, probe), (qu, qut)) in ev.pairs.iter().zip(&ev.q) {
        if u == ut {
            continue;
        }
        used += 1;
        let m = max_coordinate_product(qu, qut, u, ut);
        if m <= tol {
            candidates.push((*probe, Witness::pair(u, ut, qu, qut, m)));
        }
    }
    let v = Verdict::new(DiagnosticKind::PFunction, used).tol("strict", tol);
    Ok(v.conclude(select_witnesses(candidates, f64::total_cmp)))
}
