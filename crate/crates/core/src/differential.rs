//! Numerical differentiation and small dense matrix tests: Jacobians,
//! directional derivatives, quasi-definiteness, null directions and
//! P-matrices.

use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::linalg::{axpy, symmetric_eigen, Matrix};
use crate::systems::DemandSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianMethod {
    Analytic,
    ForwardFd,
    CentralFd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JacobianMatrix {
    pub entries: Matrix,
    pub at_point: Vec<f64>,
    pub method: JacobianMethod,
    /// Largest finite-difference step used; 0 for analytic Jacobians.
    pub step: f64,
}

/// Finite-difference step selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    /// `cbrt(ε_machine) · max(1, |u_k|)` per coordinate.
    Auto,
    Fixed(f64),
}

/// Probes closer to the boundary than this fraction of the initial step are
/// not attempted.
const STEP_FLOOR_RATIO: f64 = 1e-6;

pub const DEFAULT_DIRECTIONAL_STEP: f64 = 1e-5;

/// Analytic Jacobian when the system has one at `u`, central differences
/// otherwise.
pub fn jacobian(
    system: &DemandSystem,
    domain: &Domain,
    u: &[f64],
    step: Step,
) -> Result<JacobianMatrix> {
    domain.require_inside(u)?;
    if let Some(entries) = system.analytic_jacobian(u) {
        return Ok(JacobianMatrix {
            entries,
            at_point: u.to_vec(),
            method: JacobianMethod::Analytic,
            step: 0.0,
        });
    }
    finite_difference_jacobian(system, domain, u, step)
}

/// Column-by-column central differences, shrinking the step near the
/// boundary so every probe stays inside the domain.
pub fn finite_difference_jacobian(
    system: &DemandSystem,
    domain: &Domain,
    u: &[f64],
    step: Step,
) -> Result<JacobianMatrix> {
    domain.require_inside(u)?;
    let k = system.dim();
    if u.len() != k {
        return Err(Error::dim("jacobian point", k, u.len()));
    }
    let mut entries = Matrix::zeros(k, k);
    let mut max_step: f64 = 0.0;
    for j in 0..k {
        let h0 = match step {
            Step::Auto => f64::EPSILON.cbrt() * u[j].abs().max(1.0),
            Step::Fixed(h) if h > 0.0 => h,
            Step::Fixed(h) => {
                return Err(Error::InvalidArgument(format!(
                    "step must be positive, got {h}"
                )))
            }
        };
        let mut h = h0;
        let (plus, minus) = loop {
            let mut plus = u.to_vec();
            let mut minus = u.to_vec();
            plus[j] += h;
            minus[j] -= h;
            if domain.contains_unchecked(&plus) && domain.contains_unchecked(&minus) {
                break (plus, minus);
            }
            h *= 0.5;
            if h < h0 * STEP_FLOOR_RATIO {
                return Err(Error::ProbeLeftDomain { point: plus });
            }
        };
        // Use the step actually represented in floating point.
        let width = plus[j] - minus[j];
        let qp = system.eval(&plus)?;
        let qm = system.eval(&minus)?;
        for i in 0..k {
            entries[(i, j)] = (qp[i] - qm[i]) / width;
        }
        max_step = max_step.max(h);
    }
    if !entries.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "finite-difference Jacobian at {u:?} is not finite"
        )));
    }
    Ok(JacobianMatrix {
        entries,
        at_point: u.to_vec(),
        method: JacobianMethod::CentralFd,
        step: max_step,
    })
}

/// One-sided derivative along `v` with one Richardson extrapolation:
/// `2·D(h/2) − D(h)` where `D(h) = (Q(u + h v) − Q(u)) / h`.
pub fn directional_derivative(
    system: &DemandSystem,
    domain: &Domain,
    u: &[f64],
    v: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    domain.require_inside(u)?;
    if v.len() != u.len() {
        return Err(Error::dim("direction", u.len(), v.len()));
    }
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "step must be positive, got {h}"
        )));
    }
    let far = axpy(u, h, v);
    if !domain.contains_unchecked(&far) {
        return Err(Error::ProbeLeftDomain { point: far });
    }
    let near = axpy(u, 0.5 * h, v);
    let q0 = system.eval(u)?;
    let q_far = system.eval(&far)?;
    let q_near = system.eval(&near)?;
    Ok((0..q0.len())
        .map(|i| {
            let d_h = (q_far[i] - q0[i]) / h;
            let d_half = (q_near[i] - q0[i]) / (0.5 * h);
            2.0 * d_half - d_h
        })
        .collect())
}

/// `(B + Bᵀ) / 2`.
pub fn symmetrize(b: &Matrix) -> Result<Matrix> {
    let n = b.ensure_square()?;
    Ok(Matrix::from_fn(n, n, |i, j| 0.5 * (b[(i, j)] + b[(j, i)])))
}

/// Smallest eigenvalue of a symmetric matrix (cyclic Jacobi).
pub fn min_eigenvalue_sym(s: &Matrix) -> Result<f64> {
    if s.rows() == 1 && s.cols() == 1 {
        return Ok(s[(0, 0)]);
    }
    let eig = symmetric_eigen(s)?;
    Ok(eig.values.first().copied().unwrap_or(f64::NAN))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Definiteness {
    PositiveDefinite,
    PositiveSemidefiniteWithinTol,
    Indefinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefinitenessVerdict {
    pub min_symmetric_eigenvalue: f64,
    pub classification: Definiteness,
    pub tolerance: f64,
}

impl DefinitenessVerdict {
    pub fn is_weakly_quasi_definite(&self) -> bool {
        self.classification != Definiteness::Indefinite
    }
}

/// `1e-8 · max(1, ‖S‖∞)`: above finite-difference noise in the Jacobian.
pub fn default_psd_tolerance(s: &Matrix) -> f64 {
    1e-8 * s.norm_inf().max(1.0)
}

/// Classifies `B` by the smallest eigenvalue of its symmetric part.
pub fn is_weakly_quasi_definite(b: &Matrix, tol: f64) -> Result<DefinitenessVerdict> {
    let s = symmetrize(b)?;
    let lambda = min_eigenvalue_sym(&s)?;
    let classification = if lambda >= tol {
        Definiteness::PositiveDefinite
    } else if lambda >= -tol {
        Definiteness::PositiveSemidefiniteWithinTol
    } else {
        Definiteness::Indefinite
    };
    Ok(DefinitenessVerdict {
        min_symmetric_eigenvalue: lambda,
        classification,
        tolerance: tol,
    })
}

/// Unit right-singular vectors of `J` with singular value below `tol`
/// (eigenvectors of `JᵀJ` with eigenvalue below `tol²`). Each vector's
/// first non-negligible component is positive.
pub fn null_directions(j: &Matrix, tol: f64) -> Result<Vec<Vec<f64>>> {
    j.ensure_square()?;
    let gram = j.transpose().matmul(j);
    let eig = symmetric_eigen(&gram)?;
    Ok(eig
        .values
        .iter()
        .zip(eig.vectors)
        .filter(|(&l, _)| l < tol * tol)
        .map(|(_, mut v)| {
            let flip = v.iter().find(|x| x.abs() > 1e-12).is_some_and(|x| *x < 0.0);
            if flip {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            v
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PMatrixClass {
    P,
    P0Only,
    Neither,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PMatrixVerdict {
    pub class: PMatrixClass,
    pub min_principal_minor: f64,
    pub tolerance: f64,
}

pub const P_MATRIX_MAX_DIM: usize = 20;

/// Enumerates all `2^K − 1` principal minors.
pub fn is_p_matrix(b: &Matrix, tol: f64) -> Result<PMatrixVerdict> {
    let n = b.ensure_square()?;
    if n > P_MATRIX_MAX_DIM {
        return Err(Error::DimensionTooLarge {
            context: "P-matrix test",
            dim: n,
            limit: P_MATRIX_MAX_DIM,
        });
    }
    let mut min_minor = f64::INFINITY;
    let mut indices = Vec::with_capacity(n);
    for mask in 1u32..(1u32 << n) {
        indices.clear();
        indices.extend((0..n).filter(|&i| mask & (1 << i) != 0));
        let minor = b.principal_submatrix(&indices).determinant()?;
        min_minor = min_minor.min(minor);
    }
    let class = if min_minor > tol {
        PMatrixClass::P
    } else if min_minor >= -tol {
        PMatrixClass::P0Only
    } else {
        PMatrixClass::Neither
    };
    Ok(PMatrixVerdict {
        class,
        min_principal_minor: min_minor,
        tolerance: tol,
    })
}
