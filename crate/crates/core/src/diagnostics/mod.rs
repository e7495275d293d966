//! Sampling diagnostics for the law of demand and injectivity.
//!
//! Every check returns a [`Verdict`]. Sampling can only falsify universally
//! quantified properties, so `pass` means "no violation found at this
//! resolution" and every passing verdict says so in its notes. Violations
//! carry [`Witness`]es whose magnitude can be recomputed from the stored
//! points with [`DiagnosticKind::replay`].

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{Domain, Segment};
use crate::error::{Error, Result};
use crate::linalg::norm_inf;
use crate::systems::DemandSystem;

mod coordinate;
mod pairwise;
mod preimage;
mod segments;

pub use coordinate::{check_own_good_monotonicity, check_weak_substitutability};
pub use pairwise::{check_inverse_isotonicity, check_law_of_demand, check_p_function};
pub use preimage::check_preimage_convexity;
pub use segments::{
    check_injectivity, check_invertible_jacobian, check_local_injectivity_at,
    check_quasi_definite_everywhere, find_constancy_segment, SegmentSearch,
};

/// `(u, ũ, is_probe_pair)`.
pub(crate) type SampledPair = (Vec<f64>, Vec<f64>, bool);

/// Caveat attached to every passing verdict.
pub const PASS_CAVEAT: &str = "no violation found at sampling resolution; this is not a proof";

/// Witnesses kept from random samples (explicit probes are always kept).
pub const MAX_SAMPLED_WITNESSES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Violation,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    LawOfDemand,
    QuasiDefiniteEverywhere,
    Injectivity,
    LocalInjectivity,
    InvertibleJacobian,
    OwnGoodMonotonicity,
    WeakSubstitutability,
    InverseIsotonicity,
    PFunction,
    PreimageConvexity,
}

/// Concrete points falsifying a property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub u: Vec<f64>,
    pub u_tilde: Option<Vec<f64>>,
    pub q_u: Option<Vec<f64>>,
    pub q_u_tilde: Option<Vec<f64>>,
    pub direction: Option<Vec<f64>>,
    /// Signed size of the violation; its meaning depends on the diagnostic
    /// (see [`DiagnosticKind::replay`]).
    pub magnitude: f64,
}

impl Witness {
    fn pair(u: &[f64], u_tilde: &[f64], q_u: &[f64], q_u_tilde: &[f64], magnitude: f64) -> Self {
        Self {
            u: u.to_vec(),
            u_tilde: Some(u_tilde.to_vec()),
            q_u: Some(q_u.to_vec()),
            q_u_tilde: Some(q_u_tilde.to_vec()),
            direction: None,
            magnitude,
        }
    }
}

/// A non-degenerate segment along which `Q` is constant within tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstancySegment {
    pub segment: Segment,
    /// Largest `‖Q(point) − Q(base)‖∞` over the probed points.
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub diagnostic: DiagnosticKind,
    pub status: Status,
    pub witnesses: Vec<Witness>,
    pub samples_used: u64,
    pub tolerances: BTreeMap<String, f64>,
    /// Summary statistics (e.g. the smallest eigenvalue seen).
    pub metrics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl Verdict {
    fn new(diagnostic: DiagnosticKind, samples_used: u64) -> Self {
        Self {
            diagnostic,
            status: Status::Pass,
            witnesses: Vec::new(),
            samples_used,
            tolerances: BTreeMap::new(),
            metrics: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn tol(mut self, name: &str, value: f64) -> Self {
        self.tolerances.insert(name.to_string(), value);
        self
    }

    fn metric(mut self, name: &str, value: f64) -> Self {
        self.metrics.insert(name.to_string(), value);
        self
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    /// Violation if any witness was found, pass otherwise.
    fn conclude(mut self, witnesses: Vec<Witness>) -> Self {
        if witnesses.is_empty() {
            self.status = Status::Pass;
            self.notes.push(PASS_CAVEAT.to_string());
        } else {
            self.status = Status::Violation;
            self.witnesses = witnesses;
        }
        self
    }

    fn inconclusive(mut self, reason: impl Into<String>) -> Self {
        self.status = Status::Inconclusive;
        self.witnesses.clear();
        self.notes.push(reason.into());
        self
    }

    pub fn is_pass(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn is_violation(&self) -> bool {
        self.status == Status::Violation
    }
}

/// How many points to sample, from where, plus explicit probes.
#[derive(Debug, Clone, PartialEq)]
pub struct Sampling {
    /// Random points (or pairs, or moves) to draw.
    pub n: usize,
    pub seed: u64,
    /// Truncation for unbounded coordinates.
    pub bound: f64,
    /// Points always examined first. Pairwise checks use every pair of
    /// probes.
    pub probe_points: Vec<Vec<f64>>,
}

impl Sampling {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            seed,
            bound: 10.0,
            probe_points: Vec::new(),
        }
    }

    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bound = bound;
        self
    }

    pub fn with_probes(mut self, probes: Vec<Vec<f64>>) -> Self {
        self.probe_points = probes;
        self
    }

    fn checked_probes(&self, domain: &Domain) -> Result<&[Vec<f64>]> {
        for p in &self.probe_points {
            if !domain.contains(p)? {
                return Err(Error::Precondition(format!(
                    "probe point {p:?} is outside the domain"
                )));
            }
        }
        Ok(&self.probe_points)
    }

    /// Probe points followed by `n` random points.
    fn points(&self, domain: &Domain) -> Result<Vec<Vec<f64>>> {
        let mut pts = self.checked_probes(domain)?.to_vec();
        if self.n > 0 {
            pts.extend(domain.sample_points(self.n, self.seed, self.bound)?);
        }
        Ok(pts)
    }

    /// Every pair of probe points (flagged `true`), then `n` random pairs.
    fn pairs(&self, domain: &Domain) -> Result<Vec<SampledPair>> {
        let probes = self.checked_probes(domain)?;
        let mut out = Vec::new();
        for i in 0..probes.len() {
            for j in i + 1..probes.len() {
                out.push((probes[i].clone(), probes[j].clone(), true));
            }
        }
        if self.n > 0 {
            let pts = domain.sample_points(2 * self.n, self.seed, self.bound)?;
            let mut it = pts.into_iter();
            while let (Some(a), Some(b)) = (it.next(), it.next()) {
                out.push((a, b, false));
            }
        }
        Ok(out)
    }
}

/// Tolerance overrides; `None` selects the documented default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Law-of-demand slack; default `1e-9 · scale`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lod: Option<f64>,
    /// Constancy along a segment; default `1e-7 · scale`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constancy: Option<f64>,
    /// Singular-value and directional-derivative threshold; default `1e-6`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub null: Option<f64>,
    /// PSD slack; default `1e-8 · max(1, ‖S‖∞)` per Jacobian.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psd: Option<f64>,
    /// Margin for strict inequalities; default `0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strict: Option<f64>,
    /// Slack for weak order comparisons; default `1e-12 · scale`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<f64>,
    /// `‖Q(u) − y‖∞` slack for preimages; default `1e-9 · max(1, ‖y‖∞)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preimage: Option<f64>,
    /// Segment search half-length; default `1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_extent: Option<f64>,
}

impl Tolerances {
    pub fn lod(&self, scale: f64) -> f64 {
        self.lod.unwrap_or(1e-9 * scale)
    }

    pub fn constancy(&self, scale: f64) -> f64 {
        self.constancy.unwrap_or(1e-7 * scale)
    }

    pub fn null(&self) -> f64 {
        self.null.unwrap_or(1e-6)
    }

    pub fn strict(&self) -> f64 {
        self.strict.unwrap_or(0.0)
    }

    pub fn order(&self, scale: f64) -> f64 {
        self.order.unwrap_or(1e-12 * scale)
    }

    pub fn preimage(&self, y: &[f64]) -> f64 {
        self.preimage.unwrap_or(1e-9 * norm_inf(y).max(1.0))
    }

    pub fn max_extent(&self) -> f64 {
        self.max_extent.unwrap_or(1.0)
    }

    /// Fields set in `other` take precedence.
    pub fn overridden_by(&self, other: &Tolerances) -> Tolerances {
        Tolerances {
            lod: other.lod.or(self.lod),
            constancy: other.constancy.or(self.constancy),
            null: other.null.or(self.null),
            psd: other.psd.or(self.psd),
            strict: other.strict.or(self.strict),
            order: other.order.or(self.order),
            preimage: other.preimage.or(self.preimage),
            max_extent: other.max_extent.or(self.max_extent),
        }
    }
}

/// `max(1, max ‖Q‖∞)` over evaluated values.
fn value_scale<'a>(values: impl IntoIterator<Item = &'a Vec<f64>>) -> f64 {
    values.into_iter().map(|q| norm_inf(q)).fold(1.0, f64::max)
}

/// Evaluates `Q` at every point; order of results matches the input.
fn eval_all(system: &DemandSystem, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    points.par_iter().map(|p| system.eval(p)).collect()
}

/// Keeps all probe witnesses plus the `MAX_SAMPLED_WITNESSES` worst sampled
/// ones. `worse` orders magnitudes from worst to best.
fn select_witnesses(
    candidates: Vec<(bool, Witness)>,
    worse: impl Fn(&f64, &f64) -> std::cmp::Ordering,
) -> Vec<Witness> {
    let (probes, mut sampled): (Vec<_>, Vec<_>) = candidates.into_iter().partition(|c| c.0);
    sampled.sort_by(|a, b| worse(&a.1.magnitude, &b.1.magnitude));
    probes
        .into_iter()
        .map(|c| c.1)
        .chain(sampled.into_iter().take(MAX_SAMPLED_WITNESSES).map(|c| c.1))
        .collect()
}

/// Orders larger magnitudes first.
fn largest_first(a: &f64, b: &f64) -> std::cmp::Ordering {
    b.total_cmp(a)
}

fn fmt_point(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|x| format!("{x}")).collect();
    format!("({})", parts.join(", "))
}

fn coordinate_of(direction: &[f64]) -> Result<usize> {
    direction
        .iter()
        .position(|&x| x == 1.0)
        .ok_or_else(|| Error::InvalidArgument("witness direction is not a unit coordinate".into()))
}

fn required<'a>(v: &'a Option<Vec<f64>>, what: &str) -> Result<&'a [f64]> {
    v.as_deref()
        .ok_or_else(|| Error::InvalidArgument(format!("witness is missing {what}")))
}

impl DiagnosticKind {
    pub const ALL: [DiagnosticKind; 10] = [
        DiagnosticKind::LawOfDemand,
        DiagnosticKind::QuasiDefiniteEverywhere,
        DiagnosticKind::Injectivity,
        DiagnosticKind::LocalInjectivity,
        DiagnosticKind::InvertibleJacobian,
        DiagnosticKind::OwnGoodMonotonicity,
        DiagnosticKind::WeakSubstitutability,
        DiagnosticKind::InverseIsotonicity,
        DiagnosticKind::PFunction,
        DiagnosticKind::PreimageConvexity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DiagnosticKind::LawOfDemand => "law_of_demand",
            DiagnosticKind::QuasiDefiniteEverywhere => "quasi_definite_everywhere",
            DiagnosticKind::Injectivity => "injectivity",
            DiagnosticKind::LocalInjectivity => "local_injectivity",
            DiagnosticKind::InvertibleJacobian => "invertible_jacobian",
            DiagnosticKind::OwnGoodMonotonicity => "own_good_monotonicity",
            DiagnosticKind::WeakSubstitutability => "weak_substitutability",
            DiagnosticKind::InverseIsotonicity => "inverse_isotonicity",
            DiagnosticKind::PFunction => "p_function",
            DiagnosticKind::PreimageConvexity => "preimage_convexity",
        }
    }

    /// Recomputes a witness's magnitude from its stored points:
    ///
    /// * law of demand: `(Q(u) − Q(ũ))·(u − ũ)`
    /// * quasi-definiteness: smallest eigenvalue of the symmetrized `J(u)`
    /// * (local) injectivity: `‖u − ũ‖₂`, the length of the constancy segment
    /// * own-good monotonicity: `Q_k(ũ) − Q_k(u)` with `k` from `direction`
    /// * weak substitutability: `max_{ℓ≠k} Q_ℓ(ũ) − Q_ℓ(u)`
    /// * inverse isotonicity: `min_k (u_k − ũ_k)`
    /// * P-function: `max_k (Q_k(u) − Q_k(ũ))(u_k − ũ_k)`
    /// * preimage convexity: `‖Q(u) − y‖∞` with `y` stored in `q_u_tilde`
    pub fn replay(self, system: &DemandSystem, domain: &Domain, w: &Witness) -> Result<f64> {
        let q = |p: &[f64]| system.eval(p);
        Ok(match self {
            DiagnosticKind::LawOfDemand => {
                let ut = required(&w.u_tilde, "u_tilde")?;
                pairwise::inner_product(&q(&w.u)?, &q(ut)?, &w.u, ut)
            }
            DiagnosticKind::QuasiDefiniteEverywhere => {
                let j = crate::differential::jacobian(
                    system,
                    domain,
                    &w.u,
                    crate::differential::Step::Auto,
                )?;
                let s = crate::differential::symmetrize(&j.entries)?;
                crate::differential::min_eigenvalue_sym(&s)?
            }
            DiagnosticKind::Injectivity | DiagnosticKind::LocalInjectivity => {
                let ut = required(&w.u_tilde, "u_tilde")?;
                crate::linalg::norm2(&crate::linalg::sub(&w.u, ut))
            }
            DiagnosticKind::InvertibleJacobian => {
                return Err(Error::InvalidArgument(
                    "invertible-Jacobian verdicts carry no witnesses".into(),
                ))
            }
            DiagnosticKind::OwnGoodMonotonicity => {
                let ut = required(&w.u_tilde, "u_tilde")?;
                let k = coordinate_of(required(&w.direction, "direction")?)?;
                q(ut)?[k] - q(&w.u)?[k]
            }
            DiagnosticKind::WeakSubstitutability => {
                let ut = required(&w.u_tilde, "u_tilde")?;
                let k = coordinate_of(required(&w.direction, "direction")?)?;
                coordinate::cross_effect(&q(&w.u)?, &q(ut)?, k)
            }
            DiagnosticKind::InverseIsotonicity => {
                let ut = required(&w.u_tilde, "u_tilde")?;
                w.u.iter()
                    .zip(ut)
                    .map(|(a, b)| a - b)
                    .fold(f64::INFINITY, f64::min)
            }
            DiagnosticKind::PFunction => {
                let ut = required(&w.u_tilde, "u_tilde")?;
                pairwise::max_coordinate_product(&q(&w.u)?, &q(ut)?, &w.u, ut)
            }
            DiagnosticKind::PreimageConvexity => {
                let y = required(&w.q_u_tilde, "target")?;
                norm_inf(&crate::linalg::sub(&q(&w.u)?, y))
            }
        })
    }
}
