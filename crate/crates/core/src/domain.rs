//! Open convex domains: axis-aligned boxes intersected with open half-spaces.
//!
//! Membership is an exact strict inequality on every face. Unbounded
//! coordinates stay unbounded for membership; only sampling truncates them
//! to `[-bound, bound]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm2};

/// Open half-space `normal · u < offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    lower: Vec<f64>,
    upper: Vec<f64>,
    halfspaces: Vec<HalfSpace>,
}

/// A line segment `base + λ·direction`, `λ ∈ [lambda_lo, lambda_hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub base: Vec<f64>,
    pub direction: Vec<f64>,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
}

impl Segment {
    pub fn point(&self, lambda: f64) -> Vec<f64> {
        axpy(&self.base, lambda, &self.direction)
    }

    pub fn start(&self) -> Vec<f64> {
        self.point(self.lambda_lo)
    }

    pub fn end(&self) -> Vec<f64> {
        self.point(self.lambda_hi)
    }

    pub fn length(&self) -> f64 {
        (self.lambda_hi - self.lambda_lo) * norm2(&self.direction)
    }
}

/// Maximal open parameter interval `(lo, hi)` of a line through the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpenInterval {
    pub lo: f64,
    pub hi: f64,
}

impl OpenInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }
}

impl Domain {
    /// Open box `lower < u < upper`. Infinite bounds are allowed.
    pub fn open_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidDomain("dimension must be positive".into()));
        }
        if lower.len() != upper.len() {
            return Err(Error::dim("domain bounds", lower.len(), upper.len()));
        }
        for (k, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if lo.is_nan()
                || hi.is_nan()
                || lo >= hi
                || *lo == f64::INFINITY
                || *hi == f64::NEG_INFINITY
            {
                return Err(Error::InvalidDomain(format!(
                    "coordinate {k}: need lower < upper, got ({lo}, {hi})"
                )));
            }
        }
        Ok(Self {
            lower,
            upper,
            halfspaces: Vec::new(),
        })
    }

    /// All of `R^dim`.
    pub fn whole_space(dim: usize) -> Result<Self> {
        Self::open_box(vec![f64::NEG_INFINITY; dim], vec![f64::INFINITY; dim])
    }

    /// Symmetric box `(-r, r)^dim`.
    pub fn cube(dim: usize, r: f64) -> Result<Self> {
        Self::open_box(vec![-r; dim], vec![r; dim])
    }

    pub fn with_halfspace(mut self, normal: Vec<f64>, offset: f64) -> Result<Self> {
        if normal.len() != self.dim() {
            return Err(Error::dim("half-space normal", self.dim(), normal.len()));
        }
        if normal.iter().any(|x| !x.is_finite()) || !offset.is_finite() {
            return Err(Error::InvalidDomain("half-space must be finite".into()));
        }
        if normal.iter().all(|&x| x == 0.0) {
            return Err(Error::InvalidDomain("half-space normal is zero".into()));
        }
        self.halfspaces.push(HalfSpace { normal, offset });
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn halfspaces(&self) -> &[HalfSpace] {
        &self.halfspaces
    }

    pub fn is_box(&self) -> bool {
        self.halfspaces.is_empty()
    }

    pub fn contains(&self, u: &[f64]) -> Result<bool> {
        if u.len() != self.dim() {
            return Err(Error::dim("point", self.dim(), u.len()));
        }
        Ok(self.contains_unchecked(u))
    }

    pub(crate) fn contains_unchecked(&self, u: &[f64]) -> bool {
        u.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(x, (lo, hi))| lo < x && x < hi)
            && self.halfspaces.iter().all(|h| dot(&h.normal, u) < h.offset)
    }

    pub(crate) fn require_inside(&self, u: &[f64]) -> Result<()> {
        if self.contains(u)? {
            Ok(())
        } else {
            Err(Error::OutsideDomain { point: u.to_vec() })
        }
    }

    /// Maximal open interval of `λ` with `u + λ v` inside the domain.
    pub fn clip_segment(&self, u: &[f64], v: &[f64]) -> Result<OpenInterval> {
        if v.len() != self.dim() {
            return Err(Error::dim("direction", self.dim(), v.len()));
        }
        self.require_inside(u)?;
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for k in 0..self.dim() {
            let vk = v[k];
            if vk == 0.0 {
                continue;
            }
            let a = (self.lower[k] - u[k]) / vk;
            let b = (self.upper[k] - u[k]) / vk;
            let (a, b) = if vk > 0.0 { (a, b) } else { (b, a) };
            lo = lo.max(a);
            hi = hi.min(b);
        }
        for h in &self.halfspaces {
            let slope = dot(&h.normal, v);
            if slope == 0.0 {
                continue;
            }
            let limit = (h.offset - dot(&h.normal, u)) / slope;
            if slope > 0.0 {
                hi = hi.min(limit);
            } else {
                lo = lo.max(limit);
            }
        }
        Ok(OpenInterval { lo, hi })
    }

    /// Truncated sampling box `[max(lower, -bound), min(upper, bound)]`.
    fn sampling_box(&self, bound: f64) -> Result<Vec<(f64, f64)>> {
        if !(bound > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sampling bound must be positive, got {bound}"
            )));
        }
        self.lower
            .iter()
            .zip(&self.upper)
            .enumerate()
            .map(|(k, (&lo, &hi))| {
                let a = lo.max(-bound);
                let b = hi.min(bound);
                if a < b {
                    Ok((a, b))
                } else {
                    Err(Error::EmptyDomain(format!(
                        "coordinate {k} has no room inside [-{bound}, {bound}]"
                    )))
                }
            })
            .collect()
    }

    /// Draws `n` interior points, uniform over the truncated domain.
    ///
    /// Points come from one ChaCha8 stream seeded with `seed` and are
    /// accepted in order (rejecting boundary hits and half-space misses), so
    /// `sample_points(n, seed, b)` is always a prefix of
    /// `sample_points(n + m, seed, b)`.
    pub fn sample_points(&self, n: usize, seed: u64, bound: f64) -> Result<Vec<Vec<f64>>> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "sample count must be at least 1".into(),
            ));
        }
        let ranges = self.sampling_box(bound)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        const MAX_REJECTIONS: usize = 100_000;
        while out.len() < n {
            let mut rejected = 0;
            loop {
                let p: Vec<f64> = ranges
                    .iter()
                    .map(|&(a, b)| a + (b - a) * rng.gen::<f64>())
                    .collect();
                if self.contains_unchecked(&p) {
                    out.push(p);
                    break;
                }
                rejected += 1;
                if rejected >= MAX_REJECTIONS {
                    return Err(Error::EmptyDomain(format!(
                        "no interior point found in {MAX_REJECTIONS} draws within bound {bound}"
                    )));
                }
            }
        }
        Ok(out)
    }
}
