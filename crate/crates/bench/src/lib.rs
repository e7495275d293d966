//! Fixed inputs shared by the benchmarks.

use demandlens_core::diagnostics::Sampling;
use demandlens_core::systems::{make_cubic_linear, make_linear, make_logit};
use demandlens_core::{DemandSystem, Domain, Matrix};

/// Symmetric `n × n` matrix with a dominant diagonal and small couplings.
pub fn symmetric_matrix(n: usize) -> Matrix {
    Matrix::from_fn(n, n, |i, j| {
        if i == j {
            2.0 + i as f64
        } else {
            1.0 / (1.0 + (i + j) as f64)
        }
    })
}

pub fn example_one() -> DemandSystem {
    let a = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).expect("square");
    make_linear(a, vec![0.0; 2]).expect("valid linear system")
}

pub fn example_two() -> DemandSystem {
    let a = Matrix::from_rows(&[vec![20.0, -10.0], vec![-1.0, 2.0]]).expect("square");
    make_cubic_linear(a).expect("valid cubic system")
}

pub fn logit(k: usize) -> DemandSystem {
    make_logit(k).expect("k > 0")
}

pub fn box_domain(dim: usize) -> Domain {
    Domain::cube(dim, 5.0).expect("valid box")
}

pub fn pairs(n: usize) -> Sampling {
    Sampling::new(n, 42)
}
