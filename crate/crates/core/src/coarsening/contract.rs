use rayon::prelude::*;

use super::clustering::Clustering;
use crate::hash::Fnv1a;
use crate::hypergraph::{Hypergraph, Weight};

/// Edges are contracted in fixed-size chunks so the output layout does not
/// depend on how rayon splits the work.
const EDGE_CHUNK: usize = 4096;

/// One coarsening step: the coarse hypergraph and the fine → coarse map.
#[derive(Debug, Clone)]
pub struct Level {
    pub hypergraph: Hypergraph,
    pub mapping: Vec<usize>,
}

impl Level {
    /// Lifts a coarse assignment to the fine vertices.
    pub fn project(&self, coarse: &[usize]) -> Vec<usize> {
        self.mapping.par_iter().map(|&c| coarse[c]).collect()
    }
}

struct Chunk {
    sizes: Vec<usize>,
    pins: Vec<usize>,
    weights: Vec<Weight>,
}

/// Contracts every cluster into one vertex. Coarse vertices are numbered in
/// order of their cluster label. Pins are mapped, sorted and deduplicated;
/// edges left with one pin vanish; identical edges are merged into the one
/// with the smallest original index, summing their weights.
pub fn contract(hg: &Hypergraph, clustering: &Clustering) -> Level {
    let n = hg.num_vertices();
    let mut coarse_id = vec![0usize; n + 1];
    for &c in &clustering.cluster {
        coarse_id[c + 1] = 1;
    }
    for i in 0..n {
        coarse_id[i + 1] += coarse_id[i];
    }
    let coarse_n = coarse_id[n];
    let mapping: Vec<usize> = clustering.cluster.par_iter().map(|&c| coarse_id[c]).collect();
    let mut vertex_weights = vec![0; coarse_n];
    for (v, &c) in mapping.iter().enumerate() {
        vertex_weights[c] += hg.vertex_weight(v);
    }

    let chunks: Vec<Chunk> = (0..hg.num_edges().div_ceil(EDGE_CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let range = chunk * EDGE_CHUNK..((chunk + 1) * EDGE_CHUNK).min(hg.num_edges());
            let mut out = Chunk {
                sizes: Vec::with_capacity(range.len()),
                pins: Vec::new(),
                weights: Vec::with_capacity(range.len()),
            };
            for e in range {
                let start = out.pins.len();
                out.pins.extend(hg.pins(e).iter().map(|&v| mapping[v]));
                out.pins[start..].sort_unstable();
                let mut len = 0;
                for i in start..out.pins.len() {
                    if len == 0 || out.pins[start + len - 1] != out.pins[i] {
                        out.pins[start + len] = out.pins[i];
                        len += 1;
                    }
                }
                out.pins.truncate(start + len);
                // single-pin edges are dropped, but keep a slot so the index
                // stays aligned with the fine edge
                if len < 2 {
                    out.pins.truncate(start);
                    out.sizes.push(0);
                } else {
                    out.sizes.push(len);
                }
                out.weights.push(hg.edge_weight(e));
            }
            out
        })
        .collect();

    let mut offsets = Vec::with_capacity(hg.num_edges() + 1);
    offsets.push(0);
    let mut pins = Vec::new();
    let mut weights = Vec::with_capacity(hg.num_edges());
    for chunk in chunks {
        for s in chunk.sizes {
            offsets.push(offsets.last().unwrap() + s);
        }
        pins.extend(chunk.pins);
        weights.extend(chunk.weights);
    }
    let edge = |e: usize| &pins[offsets[e]..offsets[e + 1]];

    let hashes: Vec<u64> = (0..weights.len())
        .into_par_iter()
        .map(|e| {
            let mut h = Fnv1a::default();
            for &p in edge(e) {
                h.write_u32(p as u32);
            }
            h.finish()
        })
        .collect();
    let mut order: Vec<usize> = (0..weights.len()).filter(|&e| offsets[e + 1] > offsets[e]).collect();
    order.par_sort_unstable_by(|&a, &b| {
        hashes[a]
            .cmp(&hashes[b])
            .then_with(|| edge(a).cmp(edge(b)))
            .then(a.cmp(&b))
    });
    let mut merged = vec![0 as Weight; weights.len()];
    let mut i = 0;
    while i < order.len() {
        let rep = order[i];
        let mut j = i;
        while j < order.len() && hashes[order[j]] == hashes[rep] && edge(order[j]) == edge(rep) {
            merged[rep] += weights[order[j]];
            j += 1;
        }
        i = j;
    }

    let mut coarse_offsets = vec![0];
    let mut coarse_pins = Vec::with_capacity(pins.len());
    let mut coarse_weights = Vec::new();
    for e in 0..weights.len() {
        if merged[e] > 0 {
            coarse_pins.extend_from_slice(edge(e));
            coarse_offsets.push(coarse_pins.len());
            coarse_weights.push(merged[e]);
        }
    }
    Level {
        hypergraph: Hypergraph::from_csr_trusted(vertex_weights, coarse_weights, coarse_offsets, coarse_pins),
        mapping,
    }
}
