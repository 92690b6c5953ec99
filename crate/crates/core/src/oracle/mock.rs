use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Oracle, OracleError, Query, TriangleAnswer};
use crate::budget::QueryMode;

/// Answers from ground-truth labels, optionally corrupted with noise.
///
/// With probability `noise` an edge answer is flipped, and a triplet answer
/// is replaced by a uniformly drawn different valid option. The draw is a
/// pure function of `(seed, ids)`, so repeated and concurrent calls agree.
#[derive(Debug, Clone)]
pub struct MockOracle {
    labels: Vec<usize>,
    noise: f64,
    seed: u64,
}

impl MockOracle {
    pub fn new(labels: Vec<usize>, noise: f64, seed: u64) -> Result<Self, OracleError> {
        if !(0.0..=1.0).contains(&noise) {
            return Err(OracleError::Config(alloc::format!(
                "noise rate must lie in [0, 1], got {noise}"
            )));
        }
        Ok(MockOracle { labels, noise, seed })
    }

    pub fn perfect(labels: Vec<usize>) -> Self {
        MockOracle {
            labels,
            noise: 0.0,
            seed: 0,
        }
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    fn label(&self, id: usize) -> Result<usize, OracleError> {
        self.labels
            .get(id)
            .copied()
            .ok_or_else(|| OracleError::Config(alloc::format!("no ground-truth label for id {id}")))
    }

    /// The noiseless reply for `query`.
    pub fn truthful_answer(&self, query: &Query) -> Result<String, OracleError> {
        let labels = query
            .ids
            .iter()
            .map(|&id| self.label(id))
            .collect::<Result<Vec<_>, _>>()?;
        match (query.mode, labels.as_slice()) {
            (QueryMode::Edge, [x, y]) => Ok(if x == y { "Yes" } else { "No" }.to_string()),
            (QueryMode::Triangle, [x, y, z]) => {
                let answer = TriangleAnswer::from_comemberships(x == y, x == z, y == z)
                    .expect("label equality is transitive");
                Ok(answer.letter().to_string())
            }
            _ => Err(OracleError::Config(alloc::format!(
                "{} query with {} ids",
                query.mode.as_str(),
                query.ids.len()
            ))),
        }
    }

    fn rng_for(&self, ids: &[usize]) -> ChaCha8Rng {
        let mut h = splitmix(self.seed ^ 0x6a09_e667_f3bc_c908);
        for &id in ids {
            h = splitmix(h ^ id as u64);
        }
        ChaCha8Rng::seed_from_u64(h)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Oracle for MockOracle {
    fn kind(&self) -> &str {
        "mock"
    }

    fn model(&self) -> &str {
        "ground-truth"
    }

    fn answer(&self, query: &Query) -> Result<String, OracleError> {
        let truth = self.truthful_answer(query)?;
        if self.noise == 0.0 {
            return Ok(truth);
        }
        let mut rng = self.rng_for(&query.ids);
        if rng.random::<f64>() >= self.noise {
            return Ok(truth);
        }
        Ok(match query.mode {
            QueryMode::Edge => if truth == "Yes" { "No" } else { "Yes" }.to_string(),
            QueryMode::Triangle => {
                let others: Vec<char> = TriangleAnswer::ALL
                    .iter()
                    .map(|a| a.letter())
                    .filter(|c| truth.chars().next() != Some(*c))
                    .collect();
                others[rng.random_range(0..others.len())].to_string()
            }
        })
    }
}
