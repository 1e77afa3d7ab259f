//! Seeded synthetic instances for tests, benchmarks and the CLI demo suite.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hypergraph::{Hypergraph, Weight};

fn build(n: usize, edges: Vec<Vec<usize>>, vertex_weights: Option<Vec<Weight>>) -> Hypergraph {
    let m = edges.len();
    Hypergraph::new(vertex_weights.unwrap_or_else(|| vec![1; n]), vec![1; m], &edges)
        .expect("generated hypergraphs are valid")
}

fn sample_distinct(rng: &mut ChaCha8Rng, size: usize, mut draw: impl FnMut(&mut ChaCha8Rng) -> usize) -> Vec<usize> {
    let mut pins: Vec<usize> = Vec::with_capacity(size);
    let mut attempts = 0;
    while pins.len() < size && attempts < 20 * size {
        let v = draw(rng);
        if !pins.contains(&v) {
            pins.push(v);
        }
        attempts += 1;
    }
    pins.sort_unstable();
    pins
}

/// `rows × cols` grid graph with 4-neighbourhood edges.
pub fn grid(rows: usize, cols: usize) -> Hypergraph {
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push(vec![id(r, c), id(r, c + 1)]);
            }
            if r + 1 < rows {
                edges.push(vec![id(r, c), id(r + 1, c)]);
            }
        }
    }
    build(rows * cols, edges, None)
}

/// Cliques of `clique_size` vertices (all pairs as edges) joined in a path
/// by one edge between consecutive cliques.
pub fn path_of_cliques(num_cliques: usize, clique_size: usize) -> Hypergraph {
    let mut edges = Vec::new();
    for q in 0..num_cliques {
        let base = q * clique_size;
        for i in 0..clique_size {
            for j in i + 1..clique_size {
                edges.push(vec![base + i, base + j]);
            }
        }
        if q + 1 < num_cliques {
            edges.push(vec![base + clique_size - 1, base + clique_size]);
        }
    }
    build(num_cliques * clique_size, edges, None)
}

/// Hyperedges with sizes drawn uniformly from `sizes` and pins uniformly
/// from all vertices.
pub fn random_hypergraph(n: usize, m: usize, sizes: Range<usize>, seed: u64) -> Hypergraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = (0..m)
        .map(|_| {
            let size = rng.gen_range(sizes.clone()).clamp(1, n);
            sample_distinct(&mut rng, size, |r| r.gen_range(0..n))
        })
        .collect();
    build(n, edges, None)
}

/// Circuit-like nets: mostly 2–4 pins near a random position, a few
/// large fan-out nets.
pub fn netlist(n: usize, m: usize, seed: u64) -> Hypergraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let window = (n / 50).max(8);
    let edges = (0..m)
        .map(|_| {
            let size = match rng.gen_range(0..100) {
                0..=59 => 2,
                60..=84 => 3,
                85..=96 => rng.gen_range(4..9),
                _ => rng.gen_range(9..40),
            }
            .min(n);
            let center = rng.gen_range(0..n);
            sample_distinct(&mut rng, size, |r| {
                let offset = r.gen_range(0..window);
                (center + offset) % n
            })
        })
        .collect();
    build(n, edges, None)
}

/// Row-net model of a banded sparse matrix: vertices are columns, every
/// row is a net over its nonzero columns.
pub fn banded_row_net(n: usize, bandwidth: usize, density: f64, seed: u64) -> Hypergraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = (0..n)
        .map(|row| {
            let lo = row.saturating_sub(bandwidth);
            let hi = (row + bandwidth + 1).min(n);
            let mut pins: Vec<usize> = (lo..hi).filter(|&c| c == row || rng.gen_bool(density)).collect();
            if pins.len() == 1 && hi - lo > 1 {
                pins.push(if row + 1 < hi { row + 1 } else { row - 1 });
                pins.sort_unstable();
            }
            pins
        })
        .collect();
    build(n, edges, None)
}

/// Pins drawn from a Zipf-like popularity distribution, so vertex degrees
/// are heavy-tailed.
pub fn power_law(n: usize, m: usize, sizes: Range<usize>, seed: u64) -> Hypergraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // P(v) ∝ 1/(v+1)^0.8, sampled by inverting the cumulative sum
    let mut cumulative = Vec::with_capacity(n);
    let mut acc = 0.0;
    for v in 0..n {
        acc += 1.0 / ((v + 1) as f64).powf(0.8);
        cumulative.push(acc);
    }
    let edges = (0..m)
        .map(|_| {
            let size = rng.gen_range(sizes.clone()).clamp(1, n);
            sample_distinct(&mut rng, size, |r| {
                let x = r.gen_range(0.0..acc);
                cumulative.partition_point(|&c| c < x).min(n - 1)
            })
        })
        .collect();
    build(n, edges, None)
}

/// Same structure with vertex weights drawn from `1..=max_weight`.
pub fn with_random_vertex_weights(hg: &Hypergraph, max_weight: Weight, seed: u64) -> Hypergraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = (0..hg.num_vertices()).map(|_| rng.gen_range(1..=max_weight)).collect();
    let edges: Vec<Vec<usize>> = (0..hg.num_edges()).map(|e| hg.pins(e).to_vec()).collect();
    Hypergraph::new(weights, hg.edge_weights().to_vec(), &edges).expect("valid hypergraph")
}
