//! Closed-form demand systems: linear, cubic-linear, logit and the
//! discontinuous two-good indicator map.

use super::DemandSystem;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

fn check_square(a: &Matrix) -> Result<usize> {
    let k = a.ensure_square()?;
    if k == 0 {
        return Err(Error::InvalidArgument("matrix must be non-empty".into()));
    }
    if !a.is_finite() {
        return Err(Error::InvalidArgument(
            "matrix has non-finite entries".into(),
        ));
    }
    Ok(k)
}

/// `Q(u) = A u + b`.
pub fn make_linear(a: Matrix, b: Vec<f64>) -> Result<DemandSystem> {
    let k = check_square(&a)?;
    if b.len() != k {
        return Err(Error::dim("linear offset", k, b.len()));
    }
    let jac = a.clone();
    Ok(DemandSystem::new(k, "linear", move |u| {
        a.mul_vec(u).iter().zip(&b).map(|(x, c)| x + c).collect()
    })
    .with_jacobian(move |_| Some(jac.clone())))
}

/// `Q(u) = A (u_1^3, …, u_K^3)`.
pub fn make_cubic_linear(a: Matrix) -> Result<DemandSystem> {
    let k = check_square(&a)?;
    let jac = a.clone();
    Ok(DemandSystem::new(k, "cubic_linear", move |u| {
        let cubes: Vec<f64> = u.iter().map(|x| x * x * x).collect();
        a.mul_vec(&cubes)
    })
    .with_jacobian(move |u| {
        let d: Vec<f64> = u.iter().map(|x| 3.0 * x * x).collect();
        Some(jac.scale_columns(&d))
    }))
}

/// Inside-good logit shares with outside utility normalized to zero,
/// computed with a max shift so large `|u|` does not overflow.
pub fn logit_shares(u: &[f64]) -> Vec<f64> {
    let shift = u.iter().fold(0.0_f64, |m, &x| m.max(x));
    let exps: Vec<f64> = u.iter().map(|x| (x - shift).exp()).collect();
    let denom = (-shift).exp() + exps.iter().sum::<f64>();
    exps.iter().map(|e| e / denom).collect()
}

/// Multinomial logit with `K` inside goods and an outside good.
pub fn make_logit(k: usize) -> Result<DemandSystem> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "logit needs at least one good".into(),
        ));
    }
    Ok(
        DemandSystem::new(k, "logit", logit_shares).with_jacobian(move |u| {
            let q = logit_shares(u);
            Some(Matrix::from_fn(k, k, |i, j| {
                let d = if i == j { q[i] } else { 0.0 };
                d - q[i] * q[j]
            }))
        }),
    )
}

/// `Q(u) = (1{u ∈ A}, 1{u ∈ A})` with `A = {u₁ + u₂ > 0} ∪ {0}`.
///
/// Satisfies the law of demand but has a non-convex preimage of `(0, 0)`.
pub fn make_indicator2d() -> DemandSystem {
    DemandSystem::new(2, "indicator2d", |u| {
        let inside = u[0] + u[1] > 0.0 || (u[0] == 0.0 && u[1] == 0.0);
        let v = if inside { 1.0 } else { 0.0 };
        vec![v, v]
    })
    .discontinuous()
}
