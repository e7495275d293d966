//! Demand mappings `u ↦ Q(u)` behind a single evaluation interface.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

mod arum;
mod catalog;
mod quasilinear;
mod transform;

pub use arum::{
    arum_choice, arum_counts, arum_individual, arum_simulate, make_arum_mc, ArumDraw,
    ShockDistribution, ShockStream,
};
pub use catalog::{logit_shares, make_cubic_linear, make_indicator2d, make_linear, make_logit};
pub use quasilinear::{make_quasilinear, QuasilinearSpec};
pub use transform::{transform, CoordinateMap};

type EvalFn = dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync;
type JacobianFn = dyn Fn(&[f64]) -> Option<Matrix> + Send + Sync;

/// A demand mapping on `R^K`.
///
/// `eval` must be pure: the same input always yields bitwise-identical
/// output. Cloning is cheap; the closures are shared.
#[derive(Clone)]
pub struct DemandSystem {
    dim: usize,
    label: String,
    continuous: bool,
    eval: Arc<EvalFn>,
    jacobian: Option<Arc<JacobianFn>>,
}

impl DemandSystem {
    pub fn new<F>(dim: usize, label: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self::fallible(dim, label, move |u| Ok(eval(u)))
    }

    /// Like [`DemandSystem::new`] for maps whose evaluation can fail
    /// (e.g. an inner solver).
    pub fn fallible<F>(dim: usize, label: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        Self {
            dim,
            label: label.into(),
            continuous: true,
            eval: Arc::new(eval),
            jacobian: None,
        }
    }

    /// Attaches an analytic Jacobian. The closure may return `None` at
    /// points where it is not defined; callers then fall back to finite
    /// differences.
    pub fn with_jacobian<J>(mut self, jacobian: J) -> Self
    where
        J: Fn(&[f64]) -> Option<Matrix> + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jacobian));
        self
    }

    pub fn without_jacobian(mut self) -> Self {
        self.jacobian = None;
        self
    }

    /// Marks the map as discontinuous, which disables every diagnostic
    /// that relies on convex preimages.
    pub fn discontinuous(mut self) -> Self {
        self.continuous = false;
        self
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_continuous(&self) -> bool {
        self.continuous
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn eval(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.dim {
            return Err(Error::dim("demand input", self.dim, u.len()));
        }
        let q = (self.eval)(u)?;
        if q.len() != self.dim {
            return Err(Error::dim("demand output", self.dim, q.len()));
        }
        Ok(q)
    }

    pub fn analytic_jacobian(&self, u: &[f64]) -> Option<Matrix> {
        if u.len() != self.dim {
            return None;
        }
        self.jacobian
            .as_ref()
            .and_then(|j| j(u))
            .filter(|m| m.rows() == self.dim && m.cols() == self.dim && m.is_finite())
    }
}

impl fmt::Debug for DemandSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DemandSystem")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("continuous", &self.continuous)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .finish()
    }
}
