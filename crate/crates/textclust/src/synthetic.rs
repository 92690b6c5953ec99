//! Seeded mixtures of spherical clusters on the unit sphere, used as a
//! desk-scale benchmark with known labels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use textclust_core::{Corpus, TextInstance, WhitespaceTokens};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub k: usize,
    pub dim: usize,
    /// Per-coordinate Gaussian noise around each unit center.
    pub sigma: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n: 500,
            k: 5,
            dim: 16,
            sigma: 0.35,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub texts: Vec<TextInstance>,
    /// Raw rows before normalization.
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl SyntheticData {
    pub fn corpus(&self) -> Result<Corpus> {
        Ok(Corpus::new(self.texts.clone(), &self.rows)?)
    }
}

fn unit_gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Point `i` belongs to cluster `i % k`; every text has the same length.
pub fn generate(spec: &SyntheticSpec) -> SyntheticData {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let centers: Vec<Vec<f64>> = (0..spec.k).map(|_| unit_gaussian(&mut rng, spec.dim)).collect();
    let labels: Vec<usize> = (0..spec.n).map(|i| i % spec.k.max(1)).collect();
    let rows = labels
        .iter()
        .map(|&l| {
            centers[l]
                .iter()
                .map(|c| c + spec.sigma * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    let texts = labels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            TextInstance::new(
                i,
                format!("sample {i} drawn around center {l} of a spherical mixture"),
                None,
                Some(format!("c{l}")),
                &WhitespaceTokens,
            )
        })
        .collect();
    SyntheticData { texts, rows, labels }
}
