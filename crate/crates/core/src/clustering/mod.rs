//! K-way partitioning: seeded K-Means++, normalized spectral clustering and
//! their weighted constrained variants.

mod kmeans;
mod spectral;

use alloc::vec::Vec;

pub use kmeans::{kmeans_pp, kmeans_points, wckmeans, wckmeans_objective, KMEANS_MAX_ITERS, WCKMEANS_MAX_ITERS};
pub use spectral::{spectral_baseline, spectral_with_iters, DEFAULT_ALPHA_RATIO, KMEANS_RESTARTS, wcsc, SpectralOperators, WcscOptions, WcscReport, SPECTRAL_KMEANS_ITERS};

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    /// Cluster id in `0..k` per point.
    pub labels: Vec<usize>,
    pub k: usize,
    /// Row-major `k x dim` centroids in the clustered space.
    pub centroids: Vec<f64>,
    pub dim: usize,
    pub iterations_used: usize,
    /// Objective after each completed iteration.
    pub objective_trace: Vec<f64>,
}

impl ClusterAssignment {
    pub fn centroid(&self, c: usize) -> &[f64] {
        &self.centroids[c * self.dim..(c + 1) * self.dim]
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = alloc::vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clusterer {
    KMeans,
    Spectral,
    WcKMeans,
    Wcsc,
}

impl Clusterer {
    pub fn as_str(self) -> &'static str {
        match self {
            Clusterer::KMeans => "kmeans",
            Clusterer::Spectral => "spectral",
            Clusterer::WcKMeans => "wckmeans",
            Clusterer::Wcsc => "wcsc",
        }
    }

    pub fn is_constrained(self) -> bool {
        matches!(self, Clusterer::WcKMeans | Clusterer::Wcsc)
    }
}

impl core::str::FromStr for Clusterer {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "kmeans" | "kmeans++" => Clusterer::KMeans,
            "spectral" => Clusterer::Spectral,
            "wckmeans" => Clusterer::WcKMeans,
            "wcsc" => Clusterer::Wcsc,
            _ => return Err(crate::Error::InvalidParameter(alloc::format!("unknown clusterer {s:?}"))),
        })
    }
}
