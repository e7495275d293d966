//! Single-coordinate moves: own-good monotonicity and weak substitutability.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    eval_all, largest_first, select_witnesses, value_scale, DiagnosticKind, Sampling, Tolerances,
    Verdict, Witness,
};
use crate::domain::Domain;
use crate::error::Result;
use crate::systems::DemandSystem;

/// Offsets the move stream from the base-point stream.
const MOVE_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

struct Move {
    u: Vec<f64>,
    u_tilde: Vec<f64>,
    k: usize,
    probe: bool,
}

/// `max_{ℓ≠k} Q_ℓ(ũ) − Q_ℓ(u)`; `-∞` when `K = 1`.
pub(crate) fn cross_effect(q_u: &[f64], q_ut: &[f64], k: usize) -> f64 {
    (0..q_u.len())
        .filter(|&l| l != k)
        .map(|l| q_ut[l] - q_u[l])
        .fold(f64::NEG_INFINITY, f64::max)
}

fn unit(dim: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[k] = 1.0;
    e
}

/// Raises one coordinate of each base point by `δ ∈ [0.05, 1]·min(reach, 1)`,
/// where `reach` is the distance to the boundary along `e_k`. Probe points
/// are moved along every coordinate.
fn moves(domain: &Domain, sampling: &Sampling) -> Result<Vec<Move>> {
    let dim = domain.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed ^ MOVE_STREAM);
    let probes = sampling.checked_probes(domain)?.to_vec();
    let sampled = if sampling.n > 0 {
        domain.sample_points(sampling.n, sampling.seed, sampling.bound)?
    } else {
        Vec::new()
    };
    let bases = probes
        .into_iter()
        .flat_map(|p| (0..dim).map(move |k| (p.clone(), Some(k), true)))
        .chain(sampled.into_iter().map(|p| (p, None, false)));
    let mut out = Vec::new();
    for (u, fixed_k, probe) in bases {
        let k = fixed_k.unwrap_or_else(|| rng.gen_range(0..dim));
        let frac: f64 = rng.gen_range(0.05..=1.0);
        let e = unit(dim, k);
        let reach = domain.clip_segment(&u, &e)?.hi;
        let mut delta = frac * reach.min(1.0);
        let mut u_tilde = u.clone();
        loop {
            u_tilde[k] = u[k] + delta;
            if u_tilde[k] > u[k] && domain.contains(&u_tilde)? {
                break;
            }
            delta *= 0.5;
            if delta == 0.0 {
                break;
            }
        }
        if delta > 0.0 {
            out.push(Move {
                u,
                u_tilde,
                k,
                probe,
            });
        }
    }
    Ok(out)
}

struct EvaluatedMoves {
    moves: Vec<Move>,
    q: Vec<(Vec<f64>, Vec<f64>)>,
    scale: f64,
}

fn evaluate(system: &DemandSystem, domain: &Domain, sampling: &Sampling) -> Result<EvaluatedMoves> {
    let moves = moves(domain, sampling)?;
    let flat: Vec<Vec<f64>> = moves
        .iter()
        .flat_map(|m| [m.u.clone(), m.u_tilde.clone()])
        .collect();
    let values = eval_all(system, &flat)?;
    let scale = value_scale(&values);
    let mut it = values.into_iter();
    let mut q = Vec::with_capacity(moves.len());
    while let (Some(a), Some(b)) = (it.next(), it.next()) {
        q.push((a, b));
    }
    Ok(EvaluatedMoves { moves, q, scale })
}

fn witness(m: &Move, qu: &[f64], qut: &[f64], magnitude: f64) -> Witness {
    let mut w = Witness::pair(&m.u, &m.u_tilde, qu, qut, magnitude);
    w.direction = Some(unit(m.u.len(), m.k));
    w
}

/// Flags moves where raising `u_k` fails to raise `Q_k` by more than `tol`.
pub fn check_own_good_monotonicity(
    system: &DemandSystem,
    domain: &Domain,
    sampling: &Sampling,
    tols: &Tolerances,
) -> Result<Verdict> {
    let ev = evaluate(system, domain, sampling)?;
    let tol = tols.strict();
    let candidates = ev
        .moves
        .iter()
        .zip(&ev.q)
        .filter_map(|(m, (qu, qut))| {
            let gain = qut[m.k] - qu[m.k];
            (gain <= tol).then(|| (m.probe, witness(m, qu, qut, gain)))
        })
        .collect();
    let v =
        Verdict::new(DiagnosticKind::OwnGoodMonotonicity, ev.moves.len() as u64).tol("strict", tol);
    Ok(v.conclude(select_witnesses(candidates, f64::total_cmp)))
}

/// Flags moves where raising `u_k` raises some other `Q_ℓ` by more than
/// `tol`.
pub fn check_weak_substitutability(
    system: &DemandSystem,
    domain: &Domain,
    sampling: &Sampling,
    tols: &Tolerances,
) -> Result<Verdict> {
    let ev = evaluate(system, domain, sampling)?;
    let tol = tols.order(ev.scale);
    let candidates = ev
        .moves
        .iter()
        .zip(&ev.q)
        .filter_map(|(m, (qu, qut))| {
            let rise = cross_effect(qu, qut, m.k);
            (rise > tol).then(|| (m.probe, witness(m, qu, qut, rise)))
        })
        .collect();
    let v = Verdict::new(DiagnosticKind::WeakSubstitutability, ev.moves.len() as u64)
        .tol("order", tol)
        .tol("scale", ev.scale);
    Ok(v.conclude(select_witnesses(candidates, largest_first)))
}
