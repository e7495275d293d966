//! Batch execution of a [`RunSpec`] and the resulting report.
//!
//! Reports are deterministic functions of the spec: tasks may run on a
//! thread pool, but results are merged in spec order and floats are written
//! with round-trip-exact text. Wall-clock timings would break that, so they
//! are only included on request.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{RunSpec, TaskSpec, SCHEMA_VERSION};
use crate::diagnostics::{
    check_injectivity, check_inverse_isotonicity, check_invertible_jacobian, check_law_of_demand,
    check_local_injectivity_at, check_own_good_monotonicity, check_p_function,
    check_preimage_convexity, check_quasi_definite_everywhere, check_weak_substitutability,
    Sampling, Status, Tolerances, Verdict,
};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::inversion::{invert, InversionResult};
use crate::json;
use crate::systems::DemandSystem;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub tool: String,
    pub schema: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskVerdict {
    pub task: usize,
    pub name: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskInversion {
    pub task: usize,
    pub target: Vec<f64>,
    pub result: InversionResult,
}

/// A task that raised an error; the rest of the run continues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskFailure {
    pub task: usize,
    pub name: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskTiming {
    pub task: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub versions: Versions,
    pub spec_echo: RunSpec,
    pub verdicts: Vec<TaskVerdict>,
    pub inversions: Vec<TaskInversion>,
    pub failures: Vec<TaskFailure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Vec<TaskTiming>>,
}

impl Report {
    pub fn has_failures(&self) -> bool {
        !self.failures.is_empty()
    }

    pub fn has_violations(&self) -> bool {
        self.verdicts
            .iter()
            .any(|v| v.verdict.status == Status::Violation)
    }

    /// 1 if any task errored, else 2 if any violation was found, else 0.
    pub fn exit_code(&self) -> i32 {
        if self.has_failures() {
            1
        } else if self.has_violations() {
            2
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads for independent tasks; `None` runs tasks serially.
    pub parallel: Option<usize>,
    /// Record wall-clock time per task (makes reports non-reproducible).
    pub timings: bool,
}

enum Outcome {
    Verdict(Verdict),
    Inversion(Vec<f64>, InversionResult),
}

fn sampling(spec: &RunSpec, n: usize, probes: &[Vec<f64>]) -> Sampling {
    Sampling::new(n, spec.seed)
        .with_bound(spec.domain.bound)
        .with_probes(probes.to_vec())
}

fn run_task(
    spec: &RunSpec,
    task: &TaskSpec,
    system: &DemandSystem,
    domain: &Domain,
) -> Result<Outcome> {
    type Check = fn(&DemandSystem, &Domain, &Sampling, &Tolerances) -> Result<Verdict>;
    let sampled = |check: Check, t: &crate::config::SampleTask| -> Result<Outcome> {
        let tols = spec.tolerances.overridden_by(&t.tolerances);
        Ok(Outcome::Verdict(check(
            system,
            domain,
            &sampling(spec, t.n, &t.probe_points),
            &tols,
        )?))
    };
    match task {
        TaskSpec::CheckLawOfDemand(t) => sampled(check_law_of_demand, t),
        TaskSpec::CheckQuasiDefiniteEverywhere(t) => sampled(check_quasi_definite_everywhere, t),
        TaskSpec::CheckInjectivity(t) => sampled(check_injectivity, t),
        TaskSpec::CheckInvertibleJacobian(t) => sampled(check_invertible_jacobian, t),
        TaskSpec::CheckOwnGoodMonotonicity(t) => sampled(check_own_good_monotonicity, t),
        TaskSpec::CheckWeakSubstitutability(t) => sampled(check_weak_substitutability, t),
        TaskSpec::CheckInverseIsotonicity(t) => sampled(check_inverse_isotonicity, t),
        TaskSpec::CheckPFunction(t) => sampled(check_p_function, t),
        TaskSpec::CheckLocalInjectivityAt(t) => {
            let tols = spec.tolerances.overridden_by(&t.tolerances);
            Ok(Outcome::Verdict(check_local_injectivity_at(
                system,
                domain,
                &t.point,
                &sampling(spec, t.n, &[]),
                &tols,
            )?))
        }
        TaskSpec::CheckPreimageConvexity(t) => {
            let tols = spec.tolerances.overridden_by(&t.tolerances);
            Ok(Outcome::Verdict(check_preimage_convexity(
                system,
                &t.target,
                &t.preimages,
                t.n_combinations,
                spec.seed,
                &tols,
            )?))
        }
        TaskSpec::Invert(t) => {
            let start = t
                .start
                .clone()
                .ok_or_else(|| Error::Precondition("invert task has no start point".into()))?;
            let result = invert(system, domain, &t.target, &start, t.tol, t.max_iter)?;
            Ok(Outcome::Inversion(t.target.clone(), result))
        }
    }
}

/// Runs every task serially. See [`run_with_options`].
pub fn run(spec: &RunSpec) -> Report {
    run_with_options(spec, RunOptions::default())
}

/// Runs every task; task errors become [`TaskFailure`] entries.
pub fn run_with_options(spec: &RunSpec, options: RunOptions) -> Report {
    let built = spec
        .system
        .build(spec.seed)
        .and_then(|s| Ok((s, spec.domain.build()?)));
    let exec = |i: usize| -> (Result<Outcome>, f64) {
        let start = Instant::now();
        let outcome = match &built {
            Ok((system, domain)) => run_task(spec, &spec.tasks[i], system, domain),
            Err(e) => Err(Error::Precondition(format!("could not build system: {e}"))),
        };
        (outcome, start.elapsed().as_secs_f64())
    };
    let outcomes: Vec<(Result<Outcome>, f64)> = match options.parallel {
        Some(n) if n > 1 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| (0..spec.tasks.len()).into_par_iter().map(exec).collect()),
            Err(_) => (0..spec.tasks.len()).map(exec).collect(),
        },
        _ => (0..spec.tasks.len()).map(exec).collect(),
    };

    let mut report = Report {
        versions: Versions {
            tool: TOOL_VERSION.to_string(),
            schema: SCHEMA_VERSION.to_string(),
        },
        spec_echo: spec.clone(),
        verdicts: Vec::new(),
        inversions: Vec::new(),
        failures: Vec::new(),
        timings: None,
    };
    let mut timings = Vec::new();
    for (i, (outcome, seconds)) in outcomes.into_iter().enumerate() {
        let name = spec.tasks[i].name().to_string();
        match outcome {
            Ok(Outcome::Verdict(verdict)) => report.verdicts.push(TaskVerdict {
                task: i,
                name,
                verdict,
            }),
            Ok(Outcome::Inversion(target, result)) => report.inversions.push(TaskInversion {
                task: i,
                target,
                result,
            }),
            Err(e) => report.failures.push(TaskFailure {
                task: i,
                name,
                error: e.to_string(),
            }),
        }
        timings.push(TaskTiming { task: i, seconds });
    }
    if options.timings {
        report.timings = Some(timings);
    }
    report
}

/// Pretty JSON with fixed key order and 17-significant-digit floats.
pub fn emit_report(report: &Report) -> Result<String> {
    json::to_string(report)
}

pub fn parse_report(text: &str) -> Result<Report> {
    json::from_str(text)
}

/// One row per witness: `diagnostic, u_1..u_K, u_tilde_1..u_tilde_K,
/// magnitude`. Missing `u_tilde` leaves its cells empty.
pub fn emit_witness_csv(report: &Report) -> Result<String> {
    let k = report.spec_echo.system.dim();
    let mut w = csv::Writer::from_writer(Vec::new());
    let ser = |e: csv::Error| Error::Serialize(e.to_string());
    let mut header = vec!["diagnostic".to_string()];
    header.extend((1..=k).map(|i| format!("u_{i}")));
    header.extend((1..=k).map(|i| format!("u_tilde_{i}")));
    header.push("magnitude".to_string());
    w.write_record(&header).map_err(ser)?;
    for tv in &report.verdicts {
        for witness in &tv.verdict.witnesses {
            let mut row = vec![tv.verdict.diagnostic.name().to_string()];
            row.extend(witness.u.iter().map(|x| json::format_float(*x)));
            match &witness.u_tilde {
                Some(ut) => row.extend(ut.iter().map(|x| json::format_float(*x))),
                None => row.extend(std::iter::repeat_n(String::new(), k)),
            }
            row.push(json::format_float(witness.magnitude));
            w.write_record(&row).map_err(ser)?;
        }
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialize(e.to_string()))
}

/// Writes `text` to `path`, attaching the path to any I/O error.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::load_config;

    const EXAMPLE1: &str = r#"{"system":{"kind":"linear","a":[[2,1],[1,2]]},
        "domain":{"lower":[-5,-5],"upper":[5,5]},
        "tasks":[{"name":"check_law_of_demand","n":500},
                 {"name":"check_inverse_isotonicity","n":200,"probe_points":[[0,0],[2,-1]]},
                 {"name":"check_weak_substitutability","n":200},
                 {"name":"invert","target":[3,0]}],
        "seed":7}"#;

    #[test]
    fn example_one_statuses() {
        let report = run(&load_config(EXAMPLE1).unwrap());
        let statuses: Vec<Status> = report.verdicts.iter().map(|v| v.verdict.status).collect();
        assert_eq!(
            statuses,
            vec![Status::Pass, Status::Violation, Status::Violation]
        );
        assert_eq!(report.inversions.len(), 1);
        assert!(report.failures.is_empty());
        assert_eq!(report.exit_code(), 2);
    }

    #[test]
    fn report_round_trips_byte_identically() {
        let report = run(&load_config(EXAMPLE1).unwrap());
        let text = emit_report(&report).unwrap();
        let again = emit_report(&parse_report(&text).unwrap()).unwrap();
        assert_eq!(text, again);
    }

    #[test]
    fn parallel_matches_serial() {
        let spec = load_config(EXAMPLE1).unwrap();
        let serial = emit_report(&run(&spec)).unwrap();
        let par = emit_report(&run_with_options(
            &spec,
            RunOptions {
                parallel: Some(4),
                timings: false,
            },
        ))
        .unwrap();
        assert_eq!(serial, par);
    }

    #[test]
    fn empty_task_list() {
        let doc = r#"{"system":{"kind":"logit","k":2},"domain":{"lower":[-1,-1],"upper":[1,1]},"seed":1}"#;
        let report = run(&load_config(doc).unwrap());
        let text = emit_report(&report).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["verdicts"], serde_json::json!([]));
        assert_eq!(report.exit_code(), 0);
    }

    #[test]
    fn task_errors_are_data() {
        let doc = r#"{"system":{"kind":"linear","a":[[1,0],[0,0]]},
            "domain":{"lower":[-5,-5],"upper":[5,5]},
            "tasks":[{"name":"invert","target":[0.5,1],"max_iter":50},
                     {"name":"check_law_of_demand","n":10}],"seed":1}"#;
        let report = run(&load_config(doc).unwrap());
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].task, 0);
        assert_eq!(report.verdicts.len(), 1);
        assert_eq!(report.exit_code(), 1);
    }

    #[test]
    fn csv_has_one_row_per_witness() {
        let doc = r#"{"system":{"kind":"indicator2d"},"domain":{"lower":["-inf","-inf"],"upper":["inf","inf"]},
            "tasks":[{"name":"check_preimage_convexity","target":[0,0],"preimages":[[-1,1],[1,-1]],"n_combinations":1}],
            "seed":1}"#;
        let report = run(&load_config(doc).unwrap());
        let csv = emit_witness_csv(&report).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2, "{csv}");
        assert_eq!(lines[0], "diagnostic,u_1,u_2,u_tilde_1,u_tilde_2,magnitude");
        assert!(
            lines[1].starts_with("preimage_convexity,0.0000000000000000e0,0.0000000000000000e0,,,")
        );
    }
}
