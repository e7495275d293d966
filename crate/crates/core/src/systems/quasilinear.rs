//! Quasilinear demand `Q(u) = argmax_y u·y + C(y)` for concave `C`.
//!
//! The argmax is computed by a deterministic inner maximizer started at
//! `y = 0`: gradient ascent with backtracking when `∇C` is known, compass
//! search otherwise.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DemandSystem;
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm_inf, Matrix};

type ObjectiveFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradientFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

#[derive(Clone)]
pub struct QuasilinearSpec {
    dim: usize,
    label: String,
    objective: Arc<ObjectiveFn>,
    gradient: Option<Arc<GradientFn>>,
    /// Iteration cap of the inner maximizer.
    pub max_iter: usize,
    /// Stationarity tolerance `‖u + ∇C(y)‖∞ ≤ tol·max(1, ‖u‖∞)` with a
    /// gradient, final compass step size without one.
    pub tolerance: f64,
    closed_form_inverse: Option<Matrix>,
}

impl QuasilinearSpec {
    /// `C` must be concave and finite at the origin.
    pub fn new<F>(dim: usize, label: impl Into<String>, objective: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            dim,
            label: label.into(),
            objective: Arc::new(objective),
            gradient: None,
            max_iter: 20_000,
            tolerance: 1e-11,
            closed_form_inverse: None,
        }
    }

    pub fn with_gradient<G>(mut self, gradient: G) -> Self
    where
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.gradient = Some(Arc::new(gradient));
        self
    }

    /// `C(y) = −½ yᵀ M y` with `M` symmetric positive definite, so
    /// `Q(u) = M⁻¹ u`.
    pub fn quadratic(m: Matrix) -> Result<Self> {
        let k = m.ensure_square()?;
        if m.asymmetry() > 1e-12 * m.max_abs().max(1.0) {
            return Err(Error::InvalidArgument(
                "quadratic form M must be symmetric".into(),
            ));
        }
        let eig = crate::linalg::symmetric_eigen(&m)?;
        if eig.values[0] <= 0.0 {
            return Err(Error::InvalidArgument(
                "quadratic form M must be positive definite".into(),
            ));
        }
        let mo = m.clone();
        let mg = m.clone();
        let mut spec = Self::new(k, "quasilinear_quadratic", move |y| {
            -0.5 * dot(y, &mo.mul_vec(y))
        })
        .with_gradient(move |y| mg.mul_vec(y).iter().map(|x| -x).collect());
        spec.closed_form_inverse = Some(m);
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn objective(&self, y: &[f64]) -> f64 {
        (self.objective)(y)
    }

    pub fn gradient(&self, y: &[f64]) -> Option<Vec<f64>> {
        self.gradient.as_ref().map(|g| g(y))
    }

    pub fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    /// `M` for the quadratic family, where `u = M y` inverts demand exactly.
    pub fn quadratic_form(&self) -> Option<&Matrix> {
        self.closed_form_inverse.as_ref()
    }

    /// Random midpoint test `C(½y + ½y′) ≥ ½C(y) + ½C(y′) − 1e-9` on pairs
    /// drawn from `[-bound, bound]^K`.
    pub fn check_concavity(&self, n: usize, seed: u64, bound: f64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..n {
            let y: Vec<f64> = (0..self.dim)
                .map(|_| rng.gen_range(-bound..bound))
                .collect();
            let z: Vec<f64> = (0..self.dim)
                .map(|_| rng.gen_range(-bound..bound))
                .collect();
            let (cy, cz) = (self.objective(&y), self.objective(&z));
            if !cy.is_finite() || !cz.is_finite() {
                continue;
            }
            let mid: Vec<f64> = y.iter().zip(&z).map(|(a, b)| 0.5 * (a + b)).collect();
            let cm = self.objective(&mid);
            if !(cm >= 0.5 * cy + 0.5 * cz - 1e-9) {
                return Err(Error::Precondition(format!(
                    "C is not concave: midpoint of {y:?} and {z:?} gives {cm} < {}",
                    0.5 * cy + 0.5 * cz
                )));
            }
        }
        Ok(())
    }

    /// A maximizer of `u·y + C(y)`.
    pub fn maximize(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.dim {
            return Err(Error::dim("quasilinear input", self.dim, u.len()));
        }
        let f = |y: &[f64]| {
            let c = self.objective(y);
            if c.is_finite() {
                dot(u, y) + c
            } else {
                f64::NEG_INFINITY
            }
        };
        let y0 = vec![0.0; self.dim];
        if !f(&y0).is_finite() {
            return Err(Error::Precondition("C must be finite at the origin".into()));
        }
        match &self.gradient {
            Some(grad) => self.gradient_ascent(u, y0, &f, grad.as_ref()),
            None => self.compass_search(y0, &f),
        }
    }

    fn gradient_ascent(
        &self,
        u: &[f64],
        mut y: Vec<f64>,
        f: &dyn Fn(&[f64]) -> f64,
        grad: &GradientFn,
    ) -> Result<Vec<f64>> {
        let ascent =
            |y: &[f64]| -> Vec<f64> { u.iter().zip(grad(y)).map(|(a, g)| a + g).collect() };
        let tol = self.tolerance * norm_inf(u).max(1.0);
        let mut g = ascent(&y);
        let mut fy = f(&y);
        let mut t = 1.0_f64;
        for _ in 0..self.max_iter {
            let residual = norm_inf(&g);
            if residual <= tol {
                return Ok(y);
            }
            let gg = dot(&g, &g);
            t = (2.0 * t).min(1e12);
            loop {
                let cand = axpy(&y, t, &g);
                let fc = f(&cand);
                let accept = if fc >= fy + 1e-4 * t * gg {
                    true
                } else {
                    // Objective differences below rounding: fall back on the
                    // stationarity residual.
                    fc.is_finite()
                        && fc >= fy - 8.0 * f64::EPSILON * fy.abs().max(1.0)
                        && norm_inf(&ascent(&cand)) < residual
                };
                if accept {
                    y = cand;
                    fy = fc;
                    g = ascent(&y);
                    break;
                }
                t *= 0.5;
                if t < 1e-300 {
                    return Err(Error::SolverNonConvergence {
                        iterations: self.max_iter,
                        residual,
                    });
                }
            }
        }
        let residual = norm_inf(&g);
        if residual <= tol {
            Ok(y)
        } else {
            Err(Error::SolverNonConvergence {
                iterations: self.max_iter,
                residual,
            })
        }
    }

    fn compass_search(&self, mut y: Vec<f64>, f: &dyn Fn(&[f64]) -> f64) -> Result<Vec<f64>> {
        let mut fy = f(&y);
        let mut step = 1.0;
        for _ in 0..self.max_iter {
            if step < self.tolerance {
                return Ok(y);
            }
            let mut improved = false;
            for k in 0..self.dim {
                for sign in [1.0, -1.0] {
                    let mut cand = y.clone();
                    cand[k] += sign * step;
                    let fc = f(&cand);
                    if fc > fy {
                        y = cand;
                        fy = fc;
                        improved = true;
                        break;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if step < self.tolerance {
            Ok(y)
        } else {
            Err(Error::SolverNonConvergence {
                iterations: self.max_iter,
                residual: step,
            })
        }
    }
}

impl fmt::Debug for QuasilinearSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuasilinearSpec")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("gradient", &self.gradient.is_some())
            .field("max_iter", &self.max_iter)
            .field("tolerance", &self.tolerance)
            .finish()
    }
}

/// Wraps the argmax as a demand system. Concavity is spot-checked on 256
/// random midpoints before anything is built.
pub fn make_quasilinear(spec: QuasilinearSpec) -> Result<DemandSystem> {
    if spec.dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    spec.check_concavity(256, 0x5eed, 10.0)?;
    let label = spec.label.clone();
    let dim = spec.dim;
    let system = match spec.closed_form_inverse.clone() {
        // Q = M⁻¹ u has Jacobian M⁻¹.
        Some(m) => {
            let inv = Matrix::from_fn(dim, dim, |i, j| {
                let mut e = vec![0.0; dim];
                e[j] = 1.0;
                m.solve(&e).map_or(f64::NAN, |col| col[i])
            });
            DemandSystem::fallible(dim, label, move |u| spec.maximize(u))
                .with_jacobian(move |_| Some(inv.clone()))
        }
        None => DemandSystem::fallible(dim, label, move |u| spec.maximize(u)),
    };
    Ok(system)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_norm_squared_gives_identity() {
        let spec = QuasilinearSpec::new(3, "neg_half_norm", |y| -0.5 * dot(y, y))
            .with_gradient(|y| y.iter().map(|x| -x).collect());
        let q = make_quasilinear(spec).unwrap();
        let u = [0.3, -1.7, 4.0];
        let y = q.eval(&u).unwrap();
        for (a, b) in y.iter().zip(&u) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn quadratic_matches_closed_form() {
        let m = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 4.0]]).unwrap();
        let q = make_quasilinear(QuasilinearSpec::quadratic(m).unwrap()).unwrap();
        for u in [[1.0, 1.0], [-3.0, 8.0], [0.0, 0.0], [9.5, -7.25]] {
            let y = q.eval(&u).unwrap();
            assert!((y[0] - u[0] / 2.0).abs() < 1e-6, "{y:?}");
            assert!((y[1] - u[1] / 4.0).abs() < 1e-6, "{y:?}");
        }
    }

    #[test]
    fn quartic_solves_cubic_first_order_condition() {
        let spec = QuasilinearSpec::new(1, "neg_quarter_quartic", |y| -0.25 * y[0].powi(4))
            .with_gradient(|y| vec![-y[0].powi(3)]);
        let q = make_quasilinear(spec).unwrap();
        assert!((q.eval(&[1.0]).unwrap()[0] - 1.0).abs() < 1e-8);
        assert!((q.eval(&[8.0]).unwrap()[0] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn compass_search_without_gradient() {
        let spec = QuasilinearSpec::new(2, "neg_half_norm", |y| -0.5 * dot(y, y));
        let q = make_quasilinear(spec).unwrap();
        let y = q.eval(&[0.75, -1.25]).unwrap();
        assert!((y[0] - 0.75).abs() < 1e-8 && (y[1] + 1.25).abs() < 1e-8);
    }

    #[test]
    fn iteration_cap_is_reported() {
        // One Armijo step solves a quadratic exactly, so use a quartic.
        let mut spec = QuasilinearSpec::new(1, "neg_quartic", |y| -0.25 * y[0].powi(4))
            .with_gradient(|y| vec![-y[0].powi(3)]);
        spec.max_iter = 1;
        spec.tolerance = 0.0;
        let q = make_quasilinear(spec).unwrap();
        assert!(matches!(
            q.eval(&[5.0]),
            Err(Error::SolverNonConvergence { .. })
        ));
    }

    #[test]
    fn convex_objective_rejected() {
        let spec = QuasilinearSpec::new(1, "convex", |y| y[0] * y[0]);
        assert!(matches!(
            make_quasilinear(spec),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn non_pd_quadratic_rejected() {
        let m = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        assert!(QuasilinearSpec::quadratic(m).is_err());
    }
}
