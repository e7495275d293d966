//! Convexity of a preimage `Q⁻¹(y)` from a set of known preimage points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    eval_all, largest_first, select_witnesses, DiagnosticKind, Tolerances, Verdict, Witness,
};
use crate::error::{Error, Result};
use crate::linalg::{norm_inf, sub};
use crate::systems::DemandSystem;

/// Tests whether convex combinations of known preimages of `y` still map
/// to `y`.
///
/// Every pair of preimages is tested at its midpoint first; the remaining
/// budget of `n_combinations` goes to random weights, cycling over pairs.
/// Each supplied point must itself map to `y` within the tolerance.
pub fn check_preimage_convexity(
    system: &DemandSystem,
    y: &[f64],
    preimages: &[Vec<f64>],
    n_combinations: usize,
    seed: u64,
    tols: &Tolerances,
) -> Result<Verdict> {
    let tol = tols.preimage(y);
    if y.len() != system.dim() {
        return Err(Error::dim("preimage target", system.dim(), y.len()));
    }
    let values = eval_all(system, preimages)?;
    for (p, q) in preimages.iter().zip(&values) {
        let miss = norm_inf(&sub(q, y));
        if miss > tol {
            return Err(Error::Precondition(format!(
                "supplied point {p:?} maps to {q:?}, which misses the target by {miss}"
            )));
        }
    }
    let pairs: Vec<(usize, usize)> = (0..preimages.len())
        .flat_map(|i| (i + 1..preimages.len()).map(move |j| (i, j)))
        .collect();
    let verdict = Verdict::new(DiagnosticKind::PreimageConvexity, 0).tol("preimage", tol);
    if pairs.is_empty() {
        return Ok(verdict
            .note("fewer than two preimages supplied; convexity holds vacuously")
            .conclude(Vec::new()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = n_combinations.max(pairs.len());
    let points: Vec<Vec<f64>> = (0..total)
        .map(|c| {
            let (i, j) = pairs[c % pairs.len()];
            let lambda = if c < pairs.len() {
                0.5
            } else {
                rng.gen_range(0.0..1.0)
            };
            preimages[i]
                .iter()
                .zip(&preimages[j])
                .map(|(a, b)| (1.0 - lambda) * a + lambda * b)
                .collect()
        })
        .collect();
    let q = eval_all(system, &points)?;
    let candidates = points
        .iter()
        .zip(&q)
        .enumerate()
        .filter_map(|(c, (p, qp))| {
            let miss = norm_inf(&sub(qp, y));
            (miss > tol).then(|| {
                (
                    c < pairs.len(),
                    Witness {
                        u: p.clone(),
                        u_tilde: None,
                        q_u: Some(qp.clone()),
                        q_u_tilde: Some(y.to_vec()),
                        direction: None,
                        magnitude: miss,
                    },
                )
            })
        })
        .collect();
    let mut verdict = verdict.conclude(select_witnesses(candidates, largest_first));
    verdict.samples_used = total as u64;
    Ok(verdict)
}
