//! Coordinate-wise changes of variables `Q̃(u) = Q(f(u))`.

use serde::{Deserialize, Serialize};

use super::DemandSystem;
use crate::error::{Error, Result};

/// A strictly increasing continuous map of one coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoordinateMap {
    Identity,
    Cube,
    CubeRoot,
    /// `a·v + b`, `a > 0`.
    Affine {
        a: f64,
        b: f64,
    },
    /// `c·v`, `c > 0`.
    Scale {
        c: f64,
    },
}

impl CoordinateMap {
    pub fn apply(&self, v: f64) -> f64 {
        match *self {
            CoordinateMap::Identity => v,
            CoordinateMap::Cube => v * v * v,
            CoordinateMap::CubeRoot => v.cbrt(),
            CoordinateMap::Affine { a, b } => a * v + b,
            CoordinateMap::Scale { c } => c * v,
        }
    }

    /// Derivative, `None` where it is infinite (cube root at 0).
    pub fn derivative(&self, v: f64) -> Option<f64> {
        let d = match *self {
            CoordinateMap::Identity => 1.0,
            CoordinateMap::Cube => 3.0 * v * v,
            CoordinateMap::CubeRoot => {
                let r = v.cbrt();
                1.0 / (3.0 * r * r)
            }
            CoordinateMap::Affine { a, .. } => a,
            CoordinateMap::Scale { c } => c,
        };
        d.is_finite().then_some(d)
    }

    fn validate(&self) -> Result<()> {
        match *self {
            CoordinateMap::Affine { a, b } if !(a > 0.0 && a.is_finite() && b.is_finite()) => Err(
                Error::InvalidArgument(format!("affine map needs finite a > 0, got a={a}, b={b}")),
            ),
            CoordinateMap::Scale { c } if !(c > 0.0 && c.is_finite()) => Err(
                Error::InvalidArgument(format!("scale map needs finite c > 0, got {c}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CoordinateMap::Identity => "identity",
            CoordinateMap::Cube => "cube",
            CoordinateMap::CubeRoot => "cube_root",
            CoordinateMap::Affine { .. } => "affine",
            CoordinateMap::Scale { .. } => "scale",
        }
    }
}

/// `u ↦ inner(f_1(u_1), …, f_K(u_K))`, with a chain-rule Jacobian wherever
/// both the inner Jacobian and every `f_k'` exist.
pub fn transform(inner: DemandSystem, maps: Vec<CoordinateMap>) -> Result<DemandSystem> {
    if maps.len() != inner.dim() {
        return Err(Error::dim("coordinate maps", inner.dim(), maps.len()));
    }
    for m in &maps {
        m.validate()?;
    }
    let names: Vec<&str> = maps.iter().map(CoordinateMap::name).collect();
    let label = format!("transform[{}]({})", names.join(","), inner.label());
    let dim = inner.dim();
    let continuous = inner.is_continuous();
    let has_jac = inner.has_analytic_jacobian();
    let apply = {
        let maps = maps.clone();
        move |u: &[f64]| -> Vec<f64> { u.iter().zip(&maps).map(|(x, f)| f.apply(*x)).collect() }
    };
    let eval_inner = inner.clone();
    let eval_apply = apply.clone();
    let mut system = DemandSystem::fallible(dim, label, move |u| eval_inner.eval(&eval_apply(u)));
    if has_jac {
        system = system.with_jacobian(move |u| {
            let scale: Option<Vec<f64>> =
                u.iter().zip(&maps).map(|(x, f)| f.derivative(*x)).collect();
            let j = inner.analytic_jacobian(&apply(u))?;
            Some(j.scale_columns(&scale?))
        });
    }
    if !continuous {
        system = system.discontinuous();
    }
    Ok(system)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::systems::{make_cubic_linear, make_linear, make_logit};

    fn example2() -> Matrix {
        Matrix::from_rows(&[vec![20.0, -10.0], vec![-1.0, 2.0]]).unwrap()
    }

    #[test]
    fn cube_root_undoes_cubic_linear() {
        let q = transform(
            make_cubic_linear(example2()).unwrap(),
            vec![CoordinateMap::CubeRoot; 2],
        )
        .unwrap();
        for u in [[1.0, 2.0], [-0.5, 0.3], [2.5, -1.75]] {
            let got = q.eval(&u).unwrap();
            let want = example2().mul_vec(&u);
            for (g, w) in got.iter().zip(&want) {
                assert!(
                    (g - w).abs() < 1e-12 * w.abs().max(1.0),
                    "{got:?} vs {want:?}"
                );
            }
            let j = q.analytic_jacobian(&u).unwrap();
            assert!((j[(0, 1)] + 10.0).abs() < 1e-12 && (j[(1, 0)] + 1.0).abs() < 1e-12);
        }
        // f'(0) is infinite: no analytic Jacobian there.
        assert!(q.analytic_jacobian(&[0.0, 1.0]).is_none());
    }

    #[test]
    fn identity_transform_is_identity() {
        let q = transform(
            make_linear(Matrix::identity(2), vec![0.0; 2]).unwrap(),
            vec![CoordinateMap::Identity; 2],
        )
        .unwrap();
        assert_eq!(q.eval(&[0.25, -3.0]).unwrap(), vec![0.25, -3.0]);
    }

    #[test]
    fn scaled_logit_fixes_origin() {
        let q = transform(
            make_logit(2).unwrap(),
            vec![CoordinateMap::Scale { c: 2.0 }; 2],
        )
        .unwrap();
        let v = q.eval(&[0.0, 0.0]).unwrap();
        assert!(v.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn decreasing_maps_rejected() {
        let inner = make_logit(1).unwrap();
        assert!(transform(inner.clone(), vec![CoordinateMap::Scale { c: -1.0 }]).is_err());
        assert!(transform(
            inner.clone(),
            vec![CoordinateMap::Affine { a: 0.0, b: 1.0 }]
        )
        .is_err());
        assert!(transform(inner, vec![CoordinateMap::Cube; 2]).is_err());
    }
}
