use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::rating::{heavy_edge_rating, RatingOptions, RatingScratch};
use crate::hypergraph::{Hypergraph, Weight};
use crate::rng;

const INITIAL_SINGLETON_SUBROUNDS: usize = 100;

/// A random permutation of the vertices split into synchronous subrounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    order: Vec<usize>,
    bounds: Vec<usize>,
}

impl Schedule {
    /// 100 subrounds of one vertex, then sizes doubling from 2 up to
    /// ⌈n/100⌉ per subround; the last one takes whatever remains.
    pub fn prefix_doubling(n: usize, seed: u64, level: usize) -> Self {
        let order = shuffled(n, seed, level);
        let cap = n.div_ceil(100).max(1);
        let mut bounds = vec![0];
        let mut size = 1;
        let mut start = 0;
        while start < n {
            if bounds.len() > INITIAL_SINGLETON_SUBROUNDS {
                size = (size * 2).min(cap);
            }
            start = (start + size).min(n);
            bounds.push(start);
        }
        Self { order, bounds }
    }

    /// `r` subrounds of (almost) equal size.
    pub fn uniform(n: usize, r: usize, seed: u64, level: usize) -> Self {
        let order = shuffled(n, seed, level);
        let r = r.max(1);
        let bounds = (0..=r).map(|i| i * n / r).collect();
        Self { order, bounds }
    }

    pub fn len(&self) -> usize {
        self.bounds.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn subround(&self, i: usize) -> &[usize] {
        &self.order[self.bounds[i]..self.bounds[i + 1]]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.bounds.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

fn shuffled(n: usize, seed: u64, level: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::stream(seed, rng::COARSENING, level as u64));
    order
}

/// Cluster label per vertex (the label is a vertex ID) and the weight of
/// every label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    pub cluster: Vec<usize>,
    pub weights: Vec<Weight>,
    sizes: Vec<u32>,
}

impl Clustering {
    pub fn singletons(hg: &Hypergraph) -> Self {
        Self {
            cluster: (0..hg.num_vertices()).collect(),
            weights: hg.vertex_weights().to_vec(),
            sizes: vec![1; hg.num_vertices()],
        }
    }

    pub fn num_clusters(&self) -> usize {
        self.sizes.iter().filter(|&&s| s > 0).count()
    }

    fn is_singleton(&self, u: usize) -> bool {
        self.cluster[u] == u && self.sizes[u] == 1
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ClusteringOptions {
    pub rating: RatingOptions,
    pub swap_prevention: bool,
    pub max_cluster_weight: Weight,
}

/// Runs every subround of `schedule` on a fresh singleton clustering.
pub fn cluster_round(hg: &Hypergraph, schedule: &Schedule, options: ClusteringOptions) -> Clustering {
    let mut clustering = Clustering::singletons(hg);
    let mut proposal = vec![usize::MAX; hg.num_vertices()];
    let mut incoming = vec![0 as Weight; hg.num_vertices()];
    for i in 0..schedule.len() {
        subround(
            hg,
            schedule.subround(i),
            &mut clustering,
            options,
            &mut proposal,
            &mut incoming,
        );
    }
    clustering
}

/// One synchronous subround: propose targets against the clustering as it
/// was at the start of the subround, resolve mutual proposals, then admit
/// the lightest proposers of every target cluster that still fit.
pub(crate) fn subround(
    hg: &Hypergraph,
    vertices: &[usize],
    clustering: &mut Clustering,
    options: ClusteringOptions,
    proposal: &mut [usize],
    incoming: &mut [Weight],
) {
    let snapshot = &*clustering;
    let rate = |scratch: &mut RatingScratch, &u: &usize| {
        if !snapshot.is_singleton(u) {
            return None;
        }
        heavy_edge_rating(
            hg,
            u,
            &snapshot.cluster,
            &snapshot.weights,
            options.max_cluster_weight,
            options.rating,
            scratch,
        )
        .map(|(target, _)| (target, u))
    };
    // (target, c(u), u): sorting groups proposals by target and orders each
    // group by increasing weight and ID
    let mut proposals: Vec<(usize, Weight, usize)> = if vertices.len() < 64 {
        let mut scratch = RatingScratch::default();
        vertices
            .iter()
            .filter_map(|u| rate(&mut scratch, u))
            .map(|(t, u)| (t, hg.vertex_weight(u), u))
            .collect()
    } else {
        vertices
            .par_iter()
            .map_init(RatingScratch::default, rate)
            .flatten_iter()
            .map(|(t, u)| (t, hg.vertex_weight(u), u))
            .collect()
    };
    if proposals.is_empty() {
        return;
    }
    proposals.par_sort_unstable();

    if options.swap_prevention {
        for &(t, w, u) in &proposals {
            proposal[u] = t;
            incoming[t] += w;
        }
        // For a mutual pair u ⇄ v the pair joins whichever side would be
        // heavier counting the other proposers; ties go to the smaller ID.
        let stays = |u: usize, v: usize| {
            let side_u = hg.vertex_weight(u) + incoming[u] - hg.vertex_weight(v);
            let side_v = hg.vertex_weight(v) + incoming[v] - hg.vertex_weight(u);
            side_u > side_v || (side_u == side_v && u < v)
        };
        let proposal_ref = &*proposal;
        let keep: Vec<bool> = proposals
            .par_iter()
            .map(|&(t, _, u)| !(proposal_ref[t] == u && stays(u, t)))
            .collect();
        for &(t, _, u) in &proposals {
            proposal[u] = usize::MAX;
            incoming[t] = 0;
        }
        let mut i = 0;
        proposals.retain(|_| {
            i += 1;
            keep[i - 1]
        });
    }

    let mut groups = Vec::new();
    for i in 0..proposals.len() {
        if i == 0 || proposals[i - 1].0 != proposals[i].0 {
            groups.push(i);
        }
    }
    groups.push(proposals.len());
    let weights = &clustering.weights;
    let admitted: Vec<usize> = groups
        .par_windows(2)
        .map(|w| {
            let group = &proposals[w[0]..w[1]];
            let capacity = options.max_cluster_weight - weights[group[0].0];
            let prefix: Vec<Weight> = group
                .iter()
                .scan(0, |sum, &(_, c, _)| {
                    *sum += c;
                    Some(*sum)
                })
                .collect();
            prefix.partition_point(|&w| w <= capacity)
        })
        .collect();
    for (g, &count) in admitted.iter().enumerate() {
        for &(t, c, u) in &proposals[groups[g]..groups[g] + count] {
            clustering.cluster[u] = t;
            clustering.weights[u] -= c;
            clustering.weights[t] += c;
            clustering.sizes[u] -= 1;
            clustering.sizes[t] += 1;
            debug_assert!(clustering.weights[t] <= options.max_cluster_weight);
        }
    }
}
