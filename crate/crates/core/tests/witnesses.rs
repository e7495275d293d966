//! Every reported witness reproduces its magnitude when replayed.

use demandlens_core::diagnostics::{
    check_injectivity, check_inverse_isotonicity, check_law_of_demand, check_own_good_monotonicity,
    check_p_function, check_preimage_convexity, check_quasi_definite_everywhere,
    check_weak_substitutability, Sampling, Tolerances,
};
use demandlens_core::systems::{make_cubic_linear, make_indicator2d, make_linear};
use demandlens_core::{DemandSystem, Domain, Matrix, Verdict};

fn m(rows: &[&[f64]]) -> Matrix {
    Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

fn assert_replays(system: &DemandSystem, domain: &Domain, v: &Verdict) {
    assert!(v.is_violation(), "{:?} was {:?}", v.diagnostic, v.status);
    assert!(!v.witnesses.is_empty());
    for w in &v.witnesses {
        let again = v.diagnostic.replay(system, domain, w).unwrap();
        let scale = 1.0_f64.max(w.magnitude.abs());
        assert!(
            (again - w.magnitude).abs() <= 1e-9 * scale,
            "{:?}: stored {} replayed {}",
            v.diagnostic,
            w.magnitude,
            again
        );
    }
}

#[test]
fn pairwise_witnesses_replay() {
    let q = make_cubic_linear(m(&[&[20.0, -10.0], &[-1.0, 2.0]])).unwrap();
    let d = Domain::cube(2, 3.0).unwrap();
    let s = Sampling::new(2000, 1).with_probes(vec![vec![0.0, 0.0], vec![1.0, 2.0]]);
    let t = Tolerances::default();
    assert_replays(&q, &d, &check_law_of_demand(&q, &d, &s, &t).unwrap());

    let crossed = make_linear(m(&[&[2.0, 1.0], &[1.0, 2.0]]), vec![0.0; 2]).unwrap();
    let d5 = Domain::cube(2, 5.0).unwrap();
    for v in [
        check_inverse_isotonicity(&crossed, &d5, &s, &t).unwrap(),
        check_weak_substitutability(&crossed, &d5, &s, &t).unwrap(),
    ] {
        assert_replays(&crossed, &d5, &v);
    }
}

#[test]
fn coordinate_and_p_function_witnesses_replay() {
    let q = make_linear(m(&[&[-1.0, 0.0], &[0.0, -1.0]]), vec![0.0; 2]).unwrap();
    let d = Domain::cube(2, 4.0).unwrap();
    let s = Sampling::new(500, 2);
    let t = Tolerances::default();
    assert_replays(
        &q,
        &d,
        &check_own_good_monotonicity(&q, &d, &s, &t).unwrap(),
    );
    assert_replays(&q, &d, &check_p_function(&q, &d, &s, &t).unwrap());
}

#[test]
fn jacobian_and_segment_witnesses_replay() {
    let q = make_cubic_linear(m(&[&[20.0, -10.0], &[-1.0, 2.0]])).unwrap();
    let d = Domain::cube(2, 3.0).unwrap();
    let t = Tolerances::default();
    let qd = check_quasi_definite_everywhere(&q, &d, &Sampling::new(200, 3), &t).unwrap();
    assert_replays(&q, &d, &qd);

    let flat = make_linear(m(&[&[1.0, 0.0], &[0.0, 0.0]]), vec![0.0; 2]).unwrap();
    let inj = check_injectivity(&flat, &d, &Sampling::new(20, 4), &t).unwrap();
    assert_replays(&flat, &d, &inj);
}

#[test]
fn preimage_witnesses_replay() {
    let q = make_indicator2d();
    let d = Domain::whole_space(2).unwrap();
    let v = check_preimage_convexity(
        &q,
        &[0.0, 0.0],
        &[vec![-1.0, 1.0], vec![1.0, -1.0], vec![-3.0, -1.0]],
        30,
        5,
        &Tolerances::default(),
    )
    .unwrap();
    assert_replays(&q, &d, &v);
}
