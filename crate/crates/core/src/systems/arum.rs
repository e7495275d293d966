//! Additive random utility: individual choices and Monte Carlo shares.
//!
//! Latent utility of inside good `j` is `u_j + ε_j`; the outside good has
//! latent utility exactly 0. Shock draw `i` is a pure function of
//! `(seed, i)`: each draw reads its own block of the ChaCha8 keystream, so
//! every `u` sees the same shocks (common random numbers) and draws can be
//! generated in any order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DemandSystem;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShockDistribution {
    /// iid Gumbel shocks on all `K + 1` alternatives, expressed relative to
    /// the outside good's shock. Choice shares are then exactly logit.
    Gumbel,
    /// iid standard normal shocks on all `K + 1` alternatives, relative to
    /// the outside good's shock.
    Normal,
    /// Explicit rows of `K` shocks; draw `i` uses row `i mod rows`.
    Table(Vec<Vec<f64>>),
}

/// One vector of taste shocks.
#[derive(Debug, Clone, PartialEq)]
pub struct ArumDraw {
    pub epsilon: Vec<f64>,
}

/// Seeded, random-access source of shock draws.
#[derive(Debug, Clone)]
pub struct ShockStream {
    dim: usize,
    distribution: ShockDistribution,
    base: ChaCha8Rng,
}

const TWO_NEG_53: f64 = 1.0 / (1u64 << 53) as f64;

fn open_unit(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * TWO_NEG_53
}

impl ShockStream {
    pub fn new(dim: usize, distribution: ShockDistribution, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "ARUM needs at least one inside good".into(),
            ));
        }
        if let ShockDistribution::Table(rows) = &distribution {
            if rows.is_empty() {
                return Err(Error::InvalidArgument("shock table is empty".into()));
            }
            if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
                return Err(Error::dim("shock table row", dim, bad.len()));
            }
        }
        Ok(Self {
            dim,
            distribution,
            base: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// 32-bit keystream words consumed by one draw.
    fn words_per_draw(&self) -> u128 {
        let uniforms = match self.distribution {
            ShockDistribution::Gumbel => self.dim + 1,
            ShockDistribution::Normal => 2 * (self.dim + 1),
            ShockDistribution::Table(_) => 0,
        };
        2 * uniforms as u128
    }

    pub fn draw(&self, index: u64) -> ArumDraw {
        let epsilon = match &self.distribution {
            ShockDistribution::Table(rows) => rows[(index % rows.len() as u64) as usize].clone(),
            dist => {
                let mut rng = self.base.clone();
                rng.set_word_pos(index as u128 * self.words_per_draw());
                let shocks: Vec<f64> = (0..=self.dim)
                    .map(|_| match dist {
                        ShockDistribution::Gumbel => -(-open_unit(rng.next_u64()).ln()).ln(),
                        _ => {
                            let r = (-2.0 * open_unit(rng.next_u64()).ln()).sqrt();
                            let theta = std::f64::consts::TAU * open_unit(rng.next_u64());
                            r * theta.cos()
                        }
                    })
                    .collect();
                shocks[1..].iter().map(|e| e - shocks[0]).collect()
            }
        };
        ArumDraw { epsilon }
    }
}

/// Index of the chosen inside good, `None` for the outside good.
///
/// Inside good `j` is chosen only if `u_j + ε_j > 0` strictly; ties among
/// inside goods go to the lowest index.
pub fn arum_choice(u: &[f64], epsilon: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, (x, e)) in u.iter().zip(epsilon).enumerate() {
        let v = x + e;
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((j, v));
        }
    }
    best.filter(|&(_, v)| v > 0.0).map(|(j, _)| j)
}

/// Choice indicator vector in `{0, 1}^K`.
pub fn arum_individual(u: &[f64], draw: &ArumDraw) -> Vec<u8> {
    let mut d = vec![0u8; u.len()];
    if let Some(j) = arum_choice(u, &draw.epsilon) {
        d[j] = 1;
    }
    d
}

const CHUNK: u64 = 4096;

/// Number of times each inside good is chosen over draws `0..n_draws`.
/// Chunks run in parallel; integer sums make the result order-independent.
pub fn arum_counts(u: &[f64], n_draws: u64, stream: &ShockStream) -> Result<Vec<u64>> {
    if u.len() != stream.dim() {
        return Err(Error::dim("ARUM utilities", stream.dim(), u.len()));
    }
    let chunks = n_draws.div_ceil(CHUNK);
    let k = u.len();
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut local = vec![0u64; k];
            for i in c * CHUNK..((c + 1) * CHUNK).min(n_draws) {
                if let Some(j) = arum_choice(u, &stream.draw(i).epsilon) {
                    local[j] += 1;
                }
            }
            local
        })
        .reduce(
            || vec![0u64; k],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(counts)
}

/// Empirical choice probabilities from `n_draws` common-random-number draws.
pub fn arum_simulate(
    u: &[f64],
    n_draws: u64,
    seed: u64,
    distribution: ShockDistribution,
) -> Result<Vec<f64>> {
    if n_draws == 0 {
        return Err(Error::InvalidArgument("need at least one draw".into()));
    }
    let stream = ShockStream::new(u.len(), distribution, seed)?;
    let counts = arum_counts(u, n_draws, &stream)?;
    Ok(counts.iter().map(|&c| c as f64 / n_draws as f64).collect())
}

/// The simulated share map as a (piecewise constant) demand system.
pub fn make_arum_mc(
    k: usize,
    n_draws: u64,
    seed: u64,
    distribution: ShockDistribution,
) -> Result<DemandSystem> {
    if n_draws == 0 {
        return Err(Error::InvalidArgument("need at least one draw".into()));
    }
    let stream = ShockStream::new(k, distribution, seed)?;
    Ok(DemandSystem::fallible(k, "arum_mc", move |u| {
        let counts = arum_counts(u, n_draws, &stream)?;
        Ok(counts.iter().map(|&c| c as f64 / n_draws as f64).collect())
    })
    .discontinuous())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero() -> ArumDraw {
        ArumDraw {
            epsilon: vec![0.0, 0.0],
        }
    }

    #[test]
    fn individual_choice_rules() {
        assert_eq!(arum_individual(&[5.0, 0.0], &zero()), vec![1, 0]);
        assert_eq!(arum_individual(&[-5.0, -5.0], &zero()), vec![0, 0]);
        assert_eq!(arum_individual(&[1.0, 1.0], &zero()), vec![1, 0]);
        // Tie with the outside good goes to the outside good.
        assert_eq!(arum_individual(&[0.0, -1.0], &zero()), vec![0, 0]);
    }

    #[test]
    fn draws_are_random_access() {
        let s = ShockStream::new(3, ShockDistribution::Gumbel, 11).unwrap();
        let forward: Vec<_> = (0..5).map(|i| s.draw(i)).collect();
        let backward: Vec<_> = (0..5).rev().map(|i| s.draw(i)).collect();
        assert_eq!(forward, backward.into_iter().rev().collect::<Vec<_>>());
        assert_ne!(forward[0], forward[1]);
        let n = ShockStream::new(3, ShockDistribution::Normal, 11).unwrap();
        assert!(n.draw(3).epsilon.iter().all(|e| e.is_finite()));
    }

    #[test]
    fn single_draw_reduces_to_individual() {
        let u = [0.3, -0.2];
        let s = ShockStream::new(2, ShockDistribution::Gumbel, 5).unwrap();
        let d = arum_individual(&u, &s.draw(0));
        let q = arum_simulate(&u, 1, 5, ShockDistribution::Gumbel).unwrap();
        assert_eq!(q, d.iter().map(|&x| x as f64).collect::<Vec<_>>());
    }

    #[test]
    fn simulate_is_deterministic() {
        let u = [0.1, 0.4, -0.3];
        let a = arum_simulate(&u, 10_000, 9, ShockDistribution::Normal).unwrap();
        let b = arum_simulate(&u, 10_000, 9, ShockDistribution::Normal).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn table_draws_cycle() {
        let table = ShockDistribution::Table(vec![vec![1.0, -3.0], vec![-3.0, 1.0]]);
        let q = arum_simulate(&[0.0, 0.0], 4, 0, table).unwrap();
        assert_eq!(q, vec![0.5, 0.5]);
        assert!(ShockStream::new(2, ShockDistribution::Table(vec![vec![1.0]]), 0).is_err());
    }

    #[test]
    fn zero_draws_rejected() {
        assert!(arum_simulate(&[0.0], 0, 0, ShockDistribution::Gumbel).is_err());
    }
}
