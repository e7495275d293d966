//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use demandlens_core::diagnostics::{
    check_injectivity, check_inverse_isotonicity, check_law_of_demand, check_local_injectivity_at,
    check_own_good_monotonicity, check_p_function, check_preimage_convexity,
    check_quasi_definite_everywhere, check_weak_substitutability, find_constancy_segment, Sampling,
    SegmentSearch, Tolerances,
};
use demandlens_core::differential::{
    finite_difference_jacobian, min_eigenvalue_sym, symmetrize, Step,
};
use demandlens_core::inversion::{invert, invert_quasilinear, QuasilinearInverse};
use demandlens_core::linalg::{norm_inf, sub};
use demandlens_core::systems::{
    arum_individual, arum_simulate, logit_shares, make_arum_mc, make_cubic_linear,
    make_indicator2d, make_linear, make_logit, make_quasilinear, transform, CoordinateMap,
    QuasilinearSpec, ShockDistribution, ShockStream,
};
use demandlens_core::{load_config, run, DemandSystem, Domain, Matrix, Multiplicity, Status};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn matrix(rows: &[&[f64]]) -> Matrix {
    Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

fn example1() -> DemandSystem {
    make_linear(matrix(&[&[2.0, 1.0], &[1.0, 2.0]]), vec![0.0; 2]).unwrap()
}

fn example2_matrix() -> Matrix {
    matrix(&[&[20.0, -10.0], &[-1.0, 2.0]])
}

fn defaults() -> Tolerances {
    Tolerances::default()
}

fn example_one() -> Outcome {
    let q = example1();
    let d = ok(Domain::cube(2, 5.0))?;
    let forward = ok(q.eval(&[2.0, -1.0]))?;
    ensure!(forward == vec![3.0, 0.0], "Q(2,-1) = {forward:?}");

    let lod = ok(check_law_of_demand(
        &q,
        &d,
        &Sampling::new(10_000, 1),
        &defaults(),
    ))?;
    ensure!(
        lod.status == Status::Pass && lod.witnesses.is_empty() && lod.samples_used == 10_000,
        "law of demand: {:?} with {} witnesses",
        lod.status,
        lod.witnesses.len()
    );

    let probes = Sampling::new(1000, 2).with_probes(vec![vec![0.0, 0.0], vec![2.0, -1.0]]);
    let iso = ok(check_inverse_isotonicity(&q, &d, &probes, &defaults()))?;
    let pair_found = iso
        .witnesses
        .iter()
        .any(|w| w.u == vec![2.0, -1.0] && w.u_tilde.as_deref() == Some(&[0.0, 0.0][..]));
    ensure!(
        iso.is_violation() && pair_found,
        "inverse isotonicity: {:?}",
        iso.status
    );

    let ws = ok(check_weak_substitutability(
        &q,
        &d,
        &Sampling::new(1000, 3),
        &defaults(),
    ))?;
    ensure!(ws.is_violation(), "weak substitutability: {:?}", ws.status);

    let qd = ok(check_quasi_definite_everywhere(
        &q,
        &d,
        &Sampling::new(200, 4),
        &defaults(),
    ))?;
    let lambda = qd.metrics["min_symmetric_eigenvalue"];
    ensure!(
        (lambda - 1.0).abs() <= 1e-9,
        "min symmetric eigenvalue {lambda}"
    );
    Ok(format!(
        "Q(2,-1)=(3,0); LoD pass over 10^4 pairs; witness ((2,-1),(0,0)); min eig {lambda}"
    ))
}

const EXAMPLE2_SPEC: &str = r#"{
  "system": {"kind": "cubic_linear", "a": [[20, -10], [-1, 2]]},
  "domain": {"lower": [-3, -3], "upper": [3, 3]},
  "tasks": [
    {"name": "check_law_of_demand", "n": 10000, "probe_points": [[0, 0], [1, 2]]},
    {"name": "check_own_good_monotonicity", "n": 10000},
    {"name": "check_weak_substitutability", "n": 10000}
  ],
  "seed": 2
}"#;

fn example_two() -> Outcome {
    let report = run(&ok(load_config(EXAMPLE2_SPEC))?);
    ensure!(
        report.failures.is_empty(),
        "failures: {:?}",
        report.failures
    );
    let lod = &report.verdicts[0].verdict;
    ensure!(lod.is_violation(), "law of demand: {:?}", lod.status);
    let w = lod
        .witnesses
        .iter()
        .find(|w| w.u == vec![0.0, 0.0] && w.u_tilde.as_deref() == Some(&[1.0, 2.0][..]))
        .ok_or("no witness at ((0,0),(1,2))")?;
    ensure!(
        (w.magnitude + 30.0).abs() <= 1e-9,
        "magnitude {}",
        w.magnitude
    );
    ensure!(
        lod.notes
            .iter()
            .any(|n| n.contains("(-60, 15)") && n.contains("inner product -30")),
        "report notes lack the evaluated arithmetic: {:?}",
        lod.notes
    );
    for tv in &report.verdicts[1..] {
        ensure!(
            tv.verdict.is_pass() && tv.verdict.samples_used == 10_000,
            "{} is {:?}",
            tv.name,
            tv.verdict.status
        );
    }
    Ok(format!(
        "violation at ((0,0),(1,2)) with inner product {}; own-good and weak substitutability pass",
        w.magnitude
    ))
}

fn change_of_variables() -> Outcome {
    let d = ok(Domain::cube(2, 3.0))?;
    let raw = ok(make_cubic_linear(example2_matrix()))?;
    let cooked = ok(transform(raw.clone(), vec![CoordinateMap::CubeRoot; 2]))?;
    let s = Sampling::new(1000, 5);
    let good = ok(check_quasi_definite_everywhere(
        &cooked,
        &d,
        &s,
        &defaults(),
    ))?;
    let bad = ok(check_quasi_definite_everywhere(&raw, &d, &s, &defaults()))?;
    let lambda = good.metrics["min_symmetric_eigenvalue"];
    let closed_form = 11.0 - 111.25f64.sqrt();
    ensure!(good.is_pass(), "transformed system: {:?}", good.status);
    ensure!(
        (lambda - closed_form).abs() <= 1e-6,
        "min eigenvalue {lambda} vs 11 - sqrt(111.25) = {closed_form}"
    );
    ensure!(bad.is_violation(), "untransformed system: {:?}", bad.status);
    let raw_lod = ok(check_law_of_demand(&raw, &d, &s, &defaults()))?;
    let cooked_lod = ok(check_law_of_demand(&cooked, &d, &s, &defaults()))?;
    ensure!(
        raw_lod.is_violation() && cooked_lod.is_pass(),
        "law of demand raw {:?}, transformed {:?}",
        raw_lod.status,
        cooked_lod.status
    );
    Ok(format!(
        "transformed passes with min eig {lambda:.10} (11 - sqrt(111.25) = {closed_form:.10}); untransformed violates"
    ))
}

fn indicator() -> Outcome {
    let q = make_indicator2d();
    let v = ok(check_preimage_convexity(
        &q,
        &[0.0, 0.0],
        &[vec![-1.0, 1.0], vec![1.0, -1.0]],
        10,
        1,
        &defaults(),
    ))?;
    ensure!(v.is_violation(), "status {:?}", v.status);
    let w = v
        .witnesses
        .iter()
        .find(|w| w.u == vec![0.0, 0.0])
        .ok_or("no midpoint witness")?;
    ensure!(
        w.q_u.as_deref() == Some(&[1.0, 1.0][..]),
        "Q(0,0) = {:?}",
        w.q_u
    );
    Ok("midpoint (0,0) maps to (1,1)".into())
}

fn singular_cube_map() -> Outcome {
    let q = ok(make_cubic_linear(matrix(&[&[1.0]])))?;
    let d = ok(Domain::cube(1, 3.0))?;
    let j = ok(finite_difference_jacobian(&q, &d, &[0.0], Step::Auto))?;
    let j00 = j.entries[(0, 0)];
    ensure!(j00.abs() < 1e-8, "FD Jacobian at 0 is {j00}");
    let local = ok(check_local_injectivity_at(
        &q,
        &d,
        &[0.0],
        &Sampling::new(1000, 6),
        &defaults(),
    ))?;
    ensure!(
        local.is_pass(),
        "local injectivity at 0: {:?} {:?}",
        local.status,
        local.notes
    );
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let u: f64 = rng.gen_range(-2.0..2.0);
        let r = ok(invert(&q, &d, &[u * u * u], &[0.0], 1e-12, 10_000))?;
        worst = worst.max((r.solution[0] - u).abs());
    }
    ensure!(worst <= 1e-6, "worst inversion error {worst}");
    Ok(format!(
        "|J(0)| = {j00:.2e}; local injectivity passes; worst |u - u*| = {worst:.2e}"
    ))
}

fn negative_control() -> Outcome {
    let q = make_linear(matrix(&[&[1.0, 0.0], &[0.0, 0.0]]), vec![0.0; 2]).unwrap();
    let d = ok(Domain::cube(2, 5.0))?;
    let s = Sampling::new(1000, 8);
    let lod = ok(check_law_of_demand(&q, &d, &s, &defaults()))?;
    ensure!(lod.is_pass(), "law of demand {:?}", lod.status);
    let search = SegmentSearch::from_tolerances(&defaults(), 1.0);
    let seg = ok(find_constancy_segment(&q, &d, &[0.3, -0.7], &search))?;
    ensure!(seg.is_some(), "no constancy segment found");
    let inj = ok(check_injectivity(
        &q,
        &d,
        &Sampling::new(100, 9),
        &defaults(),
    ))?;
    ensure!(inj.is_violation(), "injectivity {:?}", inj.status);

    let y = [0.5, 0.0];
    let a = ok(invert(&q, &d, &y, &[0.0, 0.0], 1e-10, 1000))?;
    let b = ok(invert(&q, &d, &y, &[1.0, 2.0], 1e-10, 1000))?;
    for r in [&a, &b] {
        ensure!(
            matches!(r.multiplicity, Multiplicity::SegmentFound(_)),
            "multiplicity {:?}",
            r.multiplicity
        );
    }
    let gap = norm_inf(&sub(&a.solution, &b.solution));
    ensure!(
        gap > 1e-5,
        "solutions coincide: {:?} {:?}",
        a.solution,
        b.solution
    );
    let mid: Vec<f64> = a
        .solution
        .iter()
        .zip(&b.solution)
        .map(|(x, z)| 0.5 * (x + z))
        .collect();
    let miss = norm_inf(&sub(&ok(q.eval(&mid))?, &y));
    ensure!(miss <= 1e-9, "midpoint misses target by {miss}");
    Ok(format!("segment found; injectivity violation; solutions {gap:.3} apart, midpoint residual {miss:.1e}"))
}

fn random_linear_sweep() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut disagreements = Vec::new();
    let mut counts = [0usize; 2];
    let mut accepted = 0;
    let mut drawn = 0;
    while accepted < 50 {
        drawn += 1;
        let k = if accepted < 25 { 2 } else { 3 };
        let shift: f64 = rng.gen_range(-0.5..1.5);
        let a = Matrix::from_fn(k, k, |i, j| {
            rng.gen_range(-1.0..1.0) + if i == j { shift } else { 0.0 }
        });
        let sym = symmetrize(&a).unwrap();
        let lambda = min_eigenvalue_sym(&sym).unwrap();
        // Skip near-singular symmetric parts: sampling cannot resolve them.
        if lambda.abs() < 0.05 * sym.frobenius_norm() {
            continue;
        }
        accepted += 1;
        let q = make_linear(a, vec![0.0; k]).unwrap();
        let d = ok(Domain::cube(k, 5.0))?;
        let s = Sampling::new(2000, 100 + accepted as u64);
        let lod = ok(check_law_of_demand(&q, &d, &s, &defaults()))?;
        let qd = ok(check_quasi_definite_everywhere(
            &q,
            &d,
            &Sampling::new(50, 7),
            &defaults(),
        ))?;
        counts[usize::from(lod.is_pass())] += 1;
        if lod.status != qd.status {
            disagreements.push(format!(
                "{k}x{k} lambda={lambda:.3}: {:?} vs {:?}",
                lod.status, qd.status
            ));
        }
    }
    ensure!(disagreements.is_empty(), "disagreements: {disagreements:?}");
    Ok(format!(
        "50 systems ({} pass, {} violation; {} draws) with zero disagreements",
        counts[1], counts[0], drawn
    ))
}

fn arum_suite() -> Outcome {
    let k = 3;
    let stream = ok(ShockStream::new(k, ShockDistribution::Gumbel, 11))?;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let point =
        |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..k).map(|_| rng.gen_range(-3.0..3.0)).collect() };
    for i in 0..10_000u64 {
        let u = point(&mut rng);
        let ut = point(&mut rng);
        let draw = stream.draw(i);
        let du = arum_individual(&u, &draw);
        let dt = arum_individual(&ut, &draw);
        let ip: f64 = (0..k)
            .map(|j| (f64::from(du[j]) - f64::from(dt[j])) * (u[j] - ut[j]))
            .sum();
        ensure!(ip >= 0.0, "individual violation {ip} at draw {i}");
    }

    let mut worst: f64 = 0.0;
    for j in 0..10u64 {
        let u = point(&mut rng);
        let sim = ok(arum_simulate(
            &u,
            200_000,
            20 + j,
            ShockDistribution::Gumbel,
        ))?;
        worst = worst.max(norm_inf(&sub(&sim, &logit_shares(&u))));
    }
    ensure!(worst <= 0.005, "simulated shares off by {worst}");

    let q = ok(make_arum_mc(k, 5000, 13, ShockDistribution::Gumbel))?;
    let d = ok(Domain::cube(k, 3.0))?;
    let exact = Tolerances {
        lod: Some(0.0),
        ..Default::default()
    };
    let lod = ok(check_law_of_demand(
        &q,
        &d,
        &Sampling::new(1000, 14),
        &exact,
    ))?;
    ensure!(lod.is_pass(), "aggregate law of demand {:?}", lod.status);
    let normal = ok(make_arum_mc(k, 2000, 15, ShockDistribution::Normal))?;
    let lod_n = ok(check_law_of_demand(
        &normal,
        &d,
        &Sampling::new(300, 16),
        &exact,
    ))?;
    ensure!(
        lod_n.is_pass(),
        "aggregate law of demand (normal) {:?}",
        lod_n.status
    );
    Ok(format!(
        "10^4 individual triples ok; logit gap {worst:.4}; aggregate law of demand exact over 10^3 pairs"
    ))
}

fn quasilinear_suite() -> Outcome {
    let m = matrix(&[&[2.0, 0.0], &[0.0, 4.0]]);
    let spec = ok(QuasilinearSpec::quadratic(m))?;
    let q = ok(make_quasilinear(spec.clone()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst_argmax: f64 = 0.0;
    let mut worst_trip: f64 = 0.0;
    for _ in 0..100 {
        let u = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
        let y = ok(q.eval(&u))?;
        worst_argmax = worst_argmax.max(norm_inf(&sub(&y, &[u[0] / 2.0, u[1] / 4.0])));
        let target = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        match ok(invert_quasilinear(&spec, &target))? {
            QuasilinearInverse::Unique(u) => {
                let back = ok(spec.maximize(&u))?;
                worst_trip = worst_trip.max(norm_inf(&sub(&back, &target)));
            }
            other => return Err(format!("quadratic inverse unsupported: {other:?}")),
        }
    }
    ensure!(worst_argmax <= 1e-6, "argmax error {worst_argmax}");
    ensure!(worst_trip <= 1e-6, "round trip error {worst_trip}");

    let kink =
        QuasilinearSpec::new(1, "neg_abs", |y| -y[0].abs()).with_gradient(|y| vec![-y[0].signum()]);
    match ok(invert_quasilinear(&kink, &[0.0]))? {
        QuasilinearInverse::Unsupported { u_interval, .. } => {
            let (lo, hi) = u_interval[0];
            ensure!(
                (lo + 1.0).abs() < 1e-6 && (hi - 1.0).abs() < 1e-6,
                "interval [{lo}, {hi}]"
            );
        }
        other => return Err(format!("kink not flagged: {other:?}")),
    }
    Ok(format!(
        "argmax error {worst_argmax:.1e}; round trip {worst_trip:.1e}; C=-|y| at 0 flagged with u in [-1, 1]"
    ))
}

fn connected_substitutes() -> Outcome {
    let q = ok(make_logit(3))?;
    let d = ok(Domain::cube(3, 5.0))?;
    let s = Sampling::new(10_000, 18);
    let verdicts = [
        ok(check_own_good_monotonicity(&q, &d, &s, &defaults()))?,
        ok(check_weak_substitutability(&q, &d, &s, &defaults()))?,
        ok(check_inverse_isotonicity(&q, &d, &s, &defaults()))?,
        ok(check_p_function(&q, &d, &s, &defaults()))?,
    ];
    for v in &verdicts {
        ensure!(
            v.is_pass() && v.witnesses.is_empty() && v.samples_used == 10_000,
            "{:?}: {:?} ({} samples)",
            v.diagnostic,
            v.status,
            v.samples_used
        );
    }
    Ok("own-good, weak substitutability, inverse isotonicity and P-function all pass over 10^4 samples".into())
}

/// CLI-expressible runs of the criteria above.
const DETERMINISM_SPECS: [(&str, &str); 7] = [
    (
        "example1",
        r#"{"system":{"kind":"linear","a":[[2,1],[1,2]]},"domain":{"lower":[-5,-5],"upper":[5,5]},
            "tasks":[{"name":"check_law_of_demand","n":10000},
                     {"name":"check_inverse_isotonicity","n":1000,"probe_points":[[0,0],[2,-1]]},
                     {"name":"check_weak_substitutability","n":1000},
                     {"name":"check_quasi_definite_everywhere","n":200},
                     {"name":"invert","target":[3,0],"start":[0,0]}],"seed":1}"#,
    ),
    ("example2", EXAMPLE2_SPEC),
    (
        "change_of_variables",
        r#"{"system":{"kind":"transform","inner":{"kind":"cubic_linear","a":[[20,-10],[-1,2]]},"maps":{"kind":"cube_root"}},
            "domain":{"lower":[-3,-3],"upper":[3,3]},
            "tasks":[{"name":"check_quasi_definite_everywhere","n":1000},{"name":"check_law_of_demand","n":1000}],"seed":5}"#,
    ),
    (
        "indicator",
        r#"{"system":{"kind":"indicator2d"},"domain":{"lower":["-inf","-inf"],"upper":["inf","inf"]},
            "tasks":[{"name":"check_preimage_convexity","target":[0,0],"preimages":[[-1,1],[1,-1]],"n_combinations":10}],"seed":1}"#,
    ),
    (
        "cube",
        r#"{"system":{"kind":"cubic_linear","a":[[1]]},"domain":{"lower":[-3],"upper":[3]},
            "tasks":[{"name":"check_local_injectivity_at","point":[0]},
                     {"name":"invert","target":[1.331],"start":[0],"tol":1e-12}],"seed":6}"#,
    ),
    (
        "negative_control",
        r#"{"system":{"kind":"linear","a":[[1,0],[0,0]]},"domain":{"lower":[-5,-5],"upper":[5,5]},
            "tasks":[{"name":"check_law_of_demand"},{"name":"check_injectivity","n":100},
                     {"name":"invert","target":[0.5,0],"start":[0,0]},{"name":"invert","target":[0.5,0],"start":[1,2]}],"seed":8}"#,
    ),
    (
        "arum_and_logit",
        r#"{"system":{"kind":"arum_mc","k":3,"n_draws":2000,"distribution":"gumbel"},"domain":{"lower":[-3,-3,-3],"upper":[3,3,3]},
            "tasks":[{"name":"check_law_of_demand","n":300,"tolerances":{"lod":0}},
                     {"name":"check_own_good_monotonicity","n":200}],"seed":13}"#,
    ),
];

fn run_cli(spec: &Path, out: &Path, parallel: Option<usize>) -> Result<Vec<u8>, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_demandlens"));
    cmd.arg("run").arg(spec).arg("--out").arg(out);
    if let Some(n) = parallel {
        cmd.arg("--parallel").arg(n.to_string());
    }
    let status = cmd.status().map_err(|e| e.to_string())?;
    ensure!(
        matches!(status.code(), Some(0) | Some(2)),
        "{} exited with {status}",
        spec.display()
    );
    std::fs::read(out).map_err(|e| e.to_string())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut bytes = 0;
    for (name, text) in DETERMINISM_SPECS {
        let spec = dir.path().join(format!("{name}.json"));
        std::fs::write(&spec, text).map_err(|e| e.to_string())?;
        let first = run_cli(&spec, &dir.path().join(format!("{name}.a.json")), None)?;
        let second = run_cli(&spec, &dir.path().join(format!("{name}.b.json")), None)?;
        let par = run_cli(&spec, &dir.path().join(format!("{name}.p.json")), Some(4))?;
        ensure!(first == second, "{name}: serial reruns differ");
        ensure!(first == par, "{name}: --parallel 4 differs from serial");
        let report = ok(demandlens_core::report::parse_report(
            std::str::from_utf8(&first).map_err(|e| e.to_string())?,
        ))?;
        ensure!(
            report.failures.is_empty(),
            "{name}: failures {:?}",
            report.failures
        );
        let again = ok(demandlens_core::report::emit_report(&report))?;
        ensure!(
            again.as_bytes() == first.as_slice(),
            "{name}: report does not round-trip"
        );
        bytes += first.len();
    }
    Ok(format!(
        "{} specs byte-identical across reruns and --parallel 4 ({bytes} bytes)",
        DETERMINISM_SPECS.len()
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        (
            "linear example: forward value, law of demand, isotonicity witness",
            example_one,
        ),
        (
            "cubic example: law-of-demand violation with inner product -30",
            example_two,
        ),
        (
            "change of variables restores quasi-definiteness",
            change_of_variables,
        ),
        ("indicator preimage is not convex", indicator),
        (
            "cube map: singular Jacobian yet injective and invertible",
            singular_cube_map,
        ),
        (
            "degenerate linear map: constancy segment and convex solution set",
            negative_control,
        ),
        (
            "law of demand agrees with quasi-definiteness on 50 linear maps",
            random_linear_sweep,
        ),
        (
            "additive random utility: individual, simulated and aggregate",
            arum_suite,
        ),
        (
            "quasilinear demand: argmax, inversion, kink",
            quasilinear_suite,
        ),
        (
            "logit connected-substitutes implications",
            connected_substitutes,
        ),
        ("deterministic, parallel-invariant reports", determinism),
    ];
    let started = Instant::now();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS [{secs:5.2}s] {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL [{secs:5.2}s] {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        criteria.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
