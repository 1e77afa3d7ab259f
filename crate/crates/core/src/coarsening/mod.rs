//! Synchronous heavy-edge clustering and contraction.

mod clustering;
mod contract;
mod rating;

pub use clustering::{cluster_round, Clustering, ClusteringOptions, Schedule};
pub use contract::{contract, Level};
pub use rating::{heavy_edge_rating, Rating, RatingOptions, RatingScratch};

use crate::hypergraph::{Fraction, Hypergraph, Weight};

#[derive(Debug, Clone, PartialEq)]
pub struct CoarseningConfig {
    /// Stop once the hypergraph has at most this many vertices; `None`
    /// means 160·k.
    pub contraction_limit: Option<usize>,
    /// Multiplies the cluster weight bound ⌈c(V)/contraction_limit⌉.
    pub max_cluster_weight_factor: Fraction,
    pub prefix_doubling: bool,
    pub swap_prevention: bool,
    pub rating_bugfix: bool,
    /// Number of subrounds when prefix doubling is off.
    pub subrounds: usize,
    /// Larger hyperedges do not contribute to ratings.
    pub max_rated_edge_size: usize,
}

impl Default for CoarseningConfig {
    fn default() -> Self {
        Self {
            contraction_limit: None,
            max_cluster_weight_factor: Fraction::ONE,
            prefix_doubling: true,
            swap_prevention: true,
            rating_bugfix: true,
            subrounds: 3,
            max_rated_edge_size: 1000,
        }
    }
}

impl CoarseningConfig {
    pub fn contraction_limit(&self, k: usize) -> usize {
        self.contraction_limit.unwrap_or(160 * k).max(1)
    }

    pub fn max_cluster_weight(&self, total_weight: Weight, k: usize) -> Weight {
        let base = (total_weight as u64).div_ceil(self.contraction_limit(k) as u64) as Weight;
        self.max_cluster_weight_factor.mul_floor(base).max(1)
    }
}

/// Builds the hierarchy from finest to coarsest. Stops when the vertex
/// count reaches the contraction limit or a pass shrinks it by less than 1%.
pub fn coarsen_to_limit(hg: &Hypergraph, k: usize, config: &CoarseningConfig, seed: u64) -> Vec<Level> {
    let limit = config.contraction_limit(k);
    let options = ClusteringOptions {
        rating: RatingOptions {
            once_per_edge: config.rating_bugfix,
            max_edge_size: config.max_rated_edge_size,
        },
        swap_prevention: config.swap_prevention,
        max_cluster_weight: config.max_cluster_weight(hg.total_vertex_weight(), k),
    };
    let mut levels: Vec<Level> = Vec::new();
    loop {
        let current = levels.last().map_or(hg, |l| &l.hypergraph);
        let n = current.num_vertices();
        if n <= limit {
            break;
        }
        let schedule = if config.prefix_doubling {
            Schedule::prefix_doubling(n, seed, levels.len())
        } else {
            Schedule::uniform(n, config.subrounds, seed, levels.len())
        };
        let clustering = cluster_round(current, &schedule, options);
        let coarse_n = clustering.num_clusters();
        if coarse_n == n {
            break;
        }
        levels.push(contract(current, &clustering));
        if (n - coarse_n) * 100 < n {
            break;
        }
    }
    levels
}
