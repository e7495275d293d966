//! JSON run specifications: which system, on which domain, which tasks.
//!
//! Loading is strict. Unknown fields are rejected, unknown system, map and
//! task kinds are reported together with the valid ones, and a seed is
//! mandatory so that every run is reproducible.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::diagnostics::Tolerances;
use crate::domain::{Domain, HalfSpace};
use crate::error::{Error, Result};
use crate::json;
use crate::linalg::Matrix;
use crate::systems::{
    make_arum_mc, make_cubic_linear, make_indicator2d, make_linear, make_logit, make_quasilinear,
    transform, CoordinateMap, DemandSystem, QuasilinearSpec, ShockDistribution,
};

pub const SCHEMA_VERSION: &str = "1.0";
pub const SCHEMA_MAJOR: u64 = 1;

pub const SYSTEM_KINDS: [&str; 7] = [
    "linear",
    "cubic_linear",
    "logit",
    "indicator2d",
    "quasilinear_quadratic",
    "arum_mc",
    "transform",
];

pub const MAP_KINDS: [&str; 5] = ["identity", "cube", "cube_root", "affine", "scale"];

pub const TASK_NAMES: [&str; 11] = [
    "check_law_of_demand",
    "check_quasi_definite_everywhere",
    "check_injectivity",
    "check_local_injectivity_at",
    "check_invertible_jacobian",
    "check_own_good_monotonicity",
    "check_weak_substitutability",
    "check_inverse_isotonicity",
    "check_p_function",
    "check_preimage_convexity",
    "invert",
];

fn validation(field: &str, message: impl Into<String>) -> Error {
    Error::validation(field, message)
}

fn default_schema() -> String {
    SCHEMA_VERSION.to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default = "default_schema")]
    pub schema_version: String,
    pub system: SystemSpec,
    pub domain: DomainSpec,
    #[serde(default)]
    pub tasks: Vec<TaskSpec>,
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_csv_path: Option<PathBuf>,
}

/// A system descriptor. `transform` nests another descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    Linear {
        a: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<Vec<f64>>,
    },
    CubicLinear {
        a: Vec<Vec<f64>>,
    },
    Logit {
        k: usize,
    },
    #[serde(rename = "indicator2d")]
    Indicator2d,
    QuasilinearQuadratic {
        m: Vec<Vec<f64>>,
    },
    ArumMc {
        k: usize,
        n_draws: u64,
        /// Defaults to the run seed.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(default = "default_distribution")]
        distribution: ShockDistribution,
    },
    Transform {
        inner: Box<SystemSpec>,
        maps: MapsSpec,
    },
}

fn default_distribution() -> ShockDistribution {
    ShockDistribution::Gumbel
}

/// One map for every coordinate, or one map per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapsSpec {
    All(CoordinateMap),
    PerCoordinate(Vec<CoordinateMap>),
}

impl SystemSpec {
    pub fn dim(&self) -> usize {
        match self {
            SystemSpec::Linear { a, .. } | SystemSpec::CubicLinear { a } => a.len(),
            SystemSpec::Logit { k } | SystemSpec::ArumMc { k, .. } => *k,
            SystemSpec::Indicator2d => 2,
            SystemSpec::QuasilinearQuadratic { m } => m.len(),
            SystemSpec::Transform { inner, .. } => inner.dim(),
        }
    }

    /// `run_seed` seeds Monte Carlo systems that do not fix their own.
    pub fn build(&self, run_seed: u64) -> Result<DemandSystem> {
        Ok(match self {
            SystemSpec::Linear { a, b } => {
                let a = Matrix::from_rows(a)?;
                let b = b.clone().unwrap_or_else(|| vec![0.0; a.rows()]);
                make_linear(a, b)?
            }
            SystemSpec::CubicLinear { a } => make_cubic_linear(Matrix::from_rows(a)?)?,
            SystemSpec::Logit { k } => make_logit(*k)?,
            SystemSpec::Indicator2d => make_indicator2d(),
            SystemSpec::QuasilinearQuadratic { m } => {
                make_quasilinear(QuasilinearSpec::quadratic(Matrix::from_rows(m)?)?)?
            }
            SystemSpec::ArumMc {
                k,
                n_draws,
                seed,
                distribution,
            } => make_arum_mc(*k, *n_draws, seed.unwrap_or(run_seed), distribution.clone())?,
            SystemSpec::Transform { inner, maps } => {
                let inner = inner.build(run_seed)?;
                let maps = match maps {
                    MapsSpec::All(m) => vec![*m; inner.dim()],
                    MapsSpec::PerCoordinate(v) => v.clone(),
                };
                transform(inner, maps)?
            }
        })
    }
}

/// A box bound: a number, `null` (unbounded), or `"inf"` / `"-inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Value(f64),
    Named(String),
    Unbounded,
}

impl Bound {
    fn resolve(&self, field: &str, unbounded: f64) -> Result<f64> {
        match self {
            Bound::Value(x) => Ok(*x),
            Bound::Unbounded => Ok(unbounded),
            Bound::Named(s) => match s.to_ascii_lowercase().as_str() {
                "inf" | "+inf" | "infinity" | "+infinity" => Ok(f64::INFINITY),
                "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
                _ => Err(validation(
                    field,
                    format!("`{s}` is not a bound; use a number, null, \"inf\" or \"-inf\""),
                )),
            },
        }
    }
}

fn default_bound() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub lower: Vec<Bound>,
    pub upper: Vec<Bound>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub halfspaces: Vec<HalfSpace>,
    /// Sampling truncation for unbounded coordinates.
    #[serde(default = "default_bound")]
    pub bound: f64,
}

impl DomainSpec {
    pub fn build(&self) -> Result<Domain> {
        let lower = self
            .lower
            .iter()
            .map(|b| b.resolve("domain.lower", f64::NEG_INFINITY))
            .collect::<Result<Vec<_>>>()?;
        let upper = self
            .upper
            .iter()
            .map(|b| b.resolve("domain.upper", f64::INFINITY))
            .collect::<Result<Vec<_>>>()?;
        let mut domain = Domain::open_box(lower, upper)?;
        for h in &self.halfspaces {
            domain = domain.with_halfspace(h.normal.clone(), h.offset)?;
        }
        Ok(domain)
    }
}

fn default_n() -> usize {
    1000
}

/// Parameters shared by the sampling diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleTask {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub probe_points: Vec<Vec<f64>>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl Default for SampleTask {
    fn default() -> Self {
        Self {
            n: default_n(),
            probe_points: Vec::new(),
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalTask {
    pub point: Vec<f64>,
    /// Pairs sampled for the law-of-demand precheck.
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_combinations() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreimageTask {
    pub target: Vec<f64>,
    pub preimages: Vec<Vec<f64>>,
    #[serde(default = "default_combinations")]
    pub n_combinations: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_invert_tol() -> f64 {
    1e-10
}

fn default_max_iter() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvertTask {
    pub target: Vec<f64>,
    /// Defaults to the centre of the domain (0 along unbounded axes).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec<f64>>,
    #[serde(default = "default_invert_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum TaskSpec {
    CheckLawOfDemand(SampleTask),
    CheckQuasiDefiniteEverywhere(SampleTask),
    CheckInjectivity(SampleTask),
    CheckLocalInjectivityAt(LocalTask),
    CheckInvertibleJacobian(SampleTask),
    CheckOwnGoodMonotonicity(SampleTask),
    CheckWeakSubstitutability(SampleTask),
    CheckInverseIsotonicity(SampleTask),
    CheckPFunction(SampleTask),
    CheckPreimageConvexity(PreimageTask),
    Invert(InvertTask),
}

impl TaskSpec {
    pub fn name(&self) -> &'static str {
        match self {
            TaskSpec::CheckLawOfDemand(_) => TASK_NAMES[0],
            TaskSpec::CheckQuasiDefiniteEverywhere(_) => TASK_NAMES[1],
            TaskSpec::CheckInjectivity(_) => TASK_NAMES[2],
            TaskSpec::CheckLocalInjectivityAt(_) => TASK_NAMES[3],
            TaskSpec::CheckInvertibleJacobian(_) => TASK_NAMES[4],
            TaskSpec::CheckOwnGoodMonotonicity(_) => TASK_NAMES[5],
            TaskSpec::CheckWeakSubstitutability(_) => TASK_NAMES[6],
            TaskSpec::CheckInverseIsotonicity(_) => TASK_NAMES[7],
            TaskSpec::CheckPFunction(_) => TASK_NAMES[8],
            TaskSpec::CheckPreimageConvexity(_) => TASK_NAMES[9],
            TaskSpec::Invert(_) => TASK_NAMES[10],
        }
    }
}

/// Parses and validates a run specification.
pub fn load_config(text: &str) -> Result<RunSpec> {
    load_config_with_fallback_seed(text, None)
}

/// Like [`load_config`], but uses `fallback_seed` when the document has no
/// `seed`. A seed present in the document always wins.
pub fn load_config_with_fallback_seed(text: &str, fallback_seed: Option<u64>) -> Result<RunSpec> {
    let mut value = json::parse_value(text)?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| validation("spec", "top level must be a JSON object"))?;
    if let Some(v) = obj.get("schema_version") {
        check_schema(v)?;
    }
    if obj.get("seed").is_none_or(Value::is_null) {
        match fallback_seed {
            Some(s) => {
                obj.insert("seed".into(), Value::from(s));
            }
            None => return Err(validation("seed", "seed required")),
        }
    }
    if let Some(system) = obj.get("system") {
        check_system_kinds(system)?;
    }
    if let Some(Value::Array(tasks)) = obj.get("tasks") {
        for (i, t) in tasks.iter().enumerate() {
            match t.get("name").and_then(Value::as_str) {
                Some(name) if TASK_NAMES.contains(&name) => {}
                Some(name) => {
                    return Err(Error::UnknownKind {
                        what: "task",
                        found: name.to_string(),
                        valid: TASK_NAMES.to_vec(),
                    })
                }
                None => return Err(validation(&format!("tasks[{i}].name"), "missing task name")),
            }
        }
    }
    let spec: RunSpec =
        serde_json::from_value(value).map_err(|e| validation("spec", e.to_string()))?;
    validate(spec)
}

fn check_schema(v: &Value) -> Result<()> {
    let text = v
        .as_str()
        .ok_or_else(|| validation("schema_version", "must be a string such as \"1.0\""))?;
    let major: u64 = text
        .split('.')
        .next()
        .and_then(|m| m.parse().ok())
        .ok_or_else(|| validation("schema_version", format!("cannot read `{text}`")))?;
    if major > SCHEMA_MAJOR {
        return Err(Error::UnsupportedSchema {
            found: text.to_string(),
            supported: SCHEMA_MAJOR,
        });
    }
    Ok(())
}

fn kind_of<'a>(v: &'a Value, field: &str) -> Result<&'a str> {
    v.get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| validation(field, "missing `kind`"))
}

fn check_system_kinds(system: &Value) -> Result<()> {
    let kind = kind_of(system, "system.kind")?;
    if !SYSTEM_KINDS.contains(&kind) {
        return Err(Error::UnknownKind {
            what: "system kind",
            found: kind.to_string(),
            valid: SYSTEM_KINDS.to_vec(),
        });
    }
    if kind == "transform" {
        if let Some(inner) = system.get("inner") {
            check_system_kinds(inner)?;
        }
        let maps: Vec<&Value> = match system.get("maps") {
            Some(Value::Array(v)) => v.iter().collect(),
            Some(m) => vec![m],
            None => Vec::new(),
        };
        for m in maps {
            let kind = kind_of(m, "system.maps.kind")?;
            if !MAP_KINDS.contains(&kind) {
                return Err(Error::UnknownKind {
                    what: "coordinate map",
                    found: kind.to_string(),
                    valid: MAP_KINDS.to_vec(),
                });
            }
        }
    }
    Ok(())
}

fn check_square(field: &str, rows: &[Vec<f64>]) -> Result<()> {
    if rows.is_empty() || rows.iter().any(|r| r.len() != rows.len()) {
        return Err(validation(field, "matrix must be square and non-empty"));
    }
    Ok(())
}

fn check_system(spec: &SystemSpec, field: &str) -> Result<()> {
    match spec {
        SystemSpec::Linear { a, b } => {
            check_square(&format!("{field}.a"), a)?;
            if let Some(b) = b {
                if b.len() != a.len() {
                    return Err(validation(
                        &format!("{field}.b"),
                        format!("expected length {}", a.len()),
                    ));
                }
            }
        }
        SystemSpec::CubicLinear { a } => check_square(&format!("{field}.a"), a)?,
        SystemSpec::QuasilinearQuadratic { m } => check_square(&format!("{field}.m"), m)?,
        SystemSpec::Logit { k } | SystemSpec::ArumMc { k, .. } if *k == 0 => {
            return Err(validation(&format!("{field}.k"), "must be at least 1"))
        }
        SystemSpec::ArumMc { n_draws: 0, .. } => {
            return Err(validation(
                &format!("{field}.n_draws"),
                "must be at least 1",
            ))
        }
        SystemSpec::Transform { inner, maps } => {
            check_system(inner, &format!("{field}.inner"))?;
            if let MapsSpec::PerCoordinate(v) = maps {
                if v.len() != inner.dim() {
                    return Err(validation(
                        &format!("{field}.maps"),
                        format!("expected {} maps, found {}", inner.dim(), v.len()),
                    ));
                }
            }
        }
        _ => {}
    }
    Ok(())
}

fn check_tolerances(field: &str, t: &Tolerances) -> Result<()> {
    let all = [
        ("lod", t.lod),
        ("constancy", t.constancy),
        ("null", t.null),
        ("psd", t.psd),
        ("strict", t.strict),
        ("order", t.order),
        ("preimage", t.preimage),
        ("max_extent", t.max_extent),
    ];
    for (name, v) in all {
        if let Some(v) = v {
            if !(v.is_finite() && v >= 0.0) {
                return Err(validation(
                    &format!("{field}.{name}"),
                    format!("must be finite and non-negative, got {v}"),
                ));
            }
        }
    }
    if t.max_extent == Some(0.0) {
        return Err(validation(
            &format!("{field}.max_extent"),
            "must be positive",
        ));
    }
    Ok(())
}

fn check_point(field: &str, p: &[f64], dim: usize) -> Result<()> {
    if p.len() != dim {
        return Err(validation(
            field,
            format!("expected {dim} coordinates, found {}", p.len()),
        ));
    }
    if p.iter().any(|x| !x.is_finite()) {
        return Err(validation(field, "coordinates must be finite"));
    }
    Ok(())
}

/// Midpoint of the box, with 0 (clamped into the box) on unbounded axes.
fn default_start(domain: &Domain) -> Vec<f64> {
    domain
        .lower()
        .iter()
        .zip(domain.upper())
        .map(|(&l, &u)| match (l.is_finite(), u.is_finite()) {
            (true, true) => 0.5 * (l + u),
            (true, false) if l < 0.0 => 0.0,
            (true, false) => l + 1.0,
            (false, true) if u > 0.0 => 0.0,
            (false, true) => u - 1.0,
            (false, false) => 0.0,
        })
        .collect()
}

fn validate(mut spec: RunSpec) -> Result<RunSpec> {
    check_schema(&Value::from(spec.schema_version.clone()))?;
    check_system(&spec.system, "system")?;
    let dim = spec.system.dim();
    if spec.domain.lower.len() != dim || spec.domain.upper.len() != dim {
        return Err(validation(
            "domain",
            format!(
                "system has dimension {dim} but bounds have lengths {} and {}",
                spec.domain.lower.len(),
                spec.domain.upper.len()
            ),
        ));
    }
    if !(spec.domain.bound.is_finite() && spec.domain.bound > 0.0) {
        return Err(validation("domain.bound", "must be finite and positive"));
    }
    let domain = spec
        .domain
        .build()
        .map_err(|e| validation("domain", e.to_string()))?;
    check_tolerances("tolerances", &spec.tolerances)?;
    for (i, task) in spec.tasks.iter_mut().enumerate() {
        let field = format!("tasks[{i}]");
        match task {
            TaskSpec::CheckLocalInjectivityAt(t) => {
                check_point(&format!("{field}.point"), &t.point, dim)?;
                check_tolerances(&format!("{field}.tolerances"), &t.tolerances)?;
            }
            TaskSpec::CheckPreimageConvexity(t) => {
                check_point(&format!("{field}.target"), &t.target, dim)?;
                for (j, p) in t.preimages.iter().enumerate() {
                    check_point(&format!("{field}.preimages[{j}]"), p, dim)?;
                }
                check_tolerances(&format!("{field}.tolerances"), &t.tolerances)?;
            }
            TaskSpec::Invert(t) => {
                check_point(&format!("{field}.target"), &t.target, dim)?;
                let start = t.start.get_or_insert_with(|| default_start(&domain));
                check_point(&format!("{field}.start"), start, dim)?;
                if !(t.tol > 0.0 && t.tol.is_finite()) {
                    return Err(validation(&format!("{field}.tol"), "must be positive"));
                }
            }
            TaskSpec::CheckLawOfDemand(t)
            | TaskSpec::CheckQuasiDefiniteEverywhere(t)
            | TaskSpec::CheckInjectivity(t)
            | TaskSpec::CheckInvertibleJacobian(t)
            | TaskSpec::CheckOwnGoodMonotonicity(t)
            | TaskSpec::CheckWeakSubstitutability(t)
            | TaskSpec::CheckInverseIsotonicity(t)
            | TaskSpec::CheckPFunction(t) => {
                if t.n == 0 && t.probe_points.is_empty() {
                    return Err(validation(
                        &format!("{field}.n"),
                        "need n > 0 or probe points",
                    ));
                }
                for (j, p) in t.probe_points.iter().enumerate() {
                    check_point(&format!("{field}.probe_points[{j}]"), p, dim)?;
                }
                check_tolerances(&format!("{field}.tolerances"), &t.tolerances)?;
            }
        }
    }
    Ok(spec)
}
