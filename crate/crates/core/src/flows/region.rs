use std::collections::HashSet;

use super::bipartition::FlowRegion;
use crate::hypergraph::{Fraction, Hypergraph, PartitionState, Weight};

/// Hyperedges larger than this are not traversed while growing a region.
const MAX_BFS_EDGE_SIZE: usize = 1000;

/// Local vertex 0 is the source terminal and 1 the sink terminal; they stand
/// for every vertex of the two blocks outside the region.
pub const SOURCE_NODE: usize = 0;
pub const SINK_NODE: usize = 1;

/// A flow region between two blocks together with its embedding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairRegion {
    pub blocks: [usize; 2],
    pub region: FlowRegion,
    /// Global vertex of every local vertex from 2 on, in increasing order.
    pub vertices: Vec<usize>,
}

impl PairRegion {
    pub fn global(&self, local: usize) -> usize {
        self.vertices[local - 2]
    }
}

/// Grows a region around the cut between `blocks[0]` and `blocks[1]`.
///
/// For each side a BFS restricted to its block starts at the vertices on
/// cut hyperedges and proceeds layer by layer, each layer in vertex ID
/// order, while the visited weight fits the budget: the other block's limit
/// (scaled by `scale` around its perfect weight) minus its current weight.
/// Visited vertices become movable; the rest of the block is contracted into
/// the terminal. If the BFS covers a whole block, the last visited vertex
/// stays a terminal. Returns `None` if neither side has a movable vertex.
pub fn build_region(
    state: &PartitionState<'_>,
    blocks: [usize; 2],
    cut_edges: &[usize],
    scale: Fraction,
) -> Option<PairRegion> {
    let hg = state.hypergraph();
    let balance = state.balance();
    let mut visited: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    let mut region_weight = [0; 2];
    for side in 0..2 {
        let (b, other) = (blocks[side], blocks[1 - side]);
        let budget = balance.scaled_limit(other, scale) - state.block_weight(other);
        if budget <= 0 {
            continue;
        }
        let mut layer: Vec<usize> = cut_edges
            .iter()
            .flat_map(|&e| hg.pins(e).iter().copied())
            .filter(|&v| state.block(v) == b)
            .collect();
        layer.sort_unstable();
        layer.dedup();
        let mut seen: HashSet<usize> = layer.iter().copied().collect();
        let mut weight = 0;
        'bfs: while !layer.is_empty() {
            let mut next = Vec::new();
            for &v in &layer {
                let c = hg.vertex_weight(v);
                if weight + c > budget {
                    break 'bfs;
                }
                weight += c;
                visited[side].push(v);
                for &e in hg.incident_edges(v) {
                    if hg.edge_size(e) > MAX_BFS_EDGE_SIZE {
                        continue;
                    }
                    for &u in hg.pins(e) {
                        if state.block(u) == b && seen.insert(u) {
                            next.push(u);
                        }
                    }
                }
            }
            next.sort_unstable();
            layer = next;
        }
        if weight == state.block_weight(b) {
            if let Some(v) = visited[side].pop() {
                weight -= hg.vertex_weight(v);
            }
        }
        region_weight[side] = weight;
    }
    if visited.iter().all(|v| v.is_empty()) {
        return None;
    }
    let terminal_weight = [
        state.block_weight(blocks[0]) - region_weight[0],
        state.block_weight(blocks[1]) - region_weight[1],
    ];
    if terminal_weight.iter().any(|&w| w <= 0) {
        return None;
    }
    let mut vertices: Vec<usize> = visited.concat();
    vertices.sort_unstable();
    let local = |v: usize| -> Option<usize> {
        let b = state.block(v);
        if b != blocks[0] && b != blocks[1] {
            return None;
        }
        Some(match vertices.binary_search(&v) {
            Ok(i) => i + 2,
            Err(_) if b == blocks[0] => SOURCE_NODE,
            Err(_) => SINK_NODE,
        })
    };
    let mut edges: Vec<usize> = vertices.iter().flat_map(|&v| hg.incident_edges(v).iter().copied()).collect();
    edges.sort_unstable();
    edges.dedup();
    let mut offsets = vec![0];
    let mut pins: Vec<usize> = Vec::new();
    let mut edge_weights: Vec<Weight> = Vec::new();
    let mut scratch = Vec::new();
    for e in edges {
        scratch.clear();
        scratch.extend(hg.pins(e).iter().filter_map(|&v| local(v)));
        scratch.sort_unstable();
        scratch.dedup();
        // single pins can never be cut; nets on both terminals always are
        if scratch.len() < 2 || (scratch[0] == SOURCE_NODE && scratch[1] == SINK_NODE) {
            continue;
        }
        pins.extend_from_slice(&scratch);
        offsets.push(pins.len());
        edge_weights.push(hg.edge_weight(e));
    }
    let mut weights = terminal_weight.to_vec();
    weights.extend(vertices.iter().map(|&v| hg.vertex_weight(v)));
    let n = weights.len();
    let mut side = vec![0, 1];
    side.extend(vertices.iter().map(|&v| usize::from(state.block(v) == blocks[1])));
    let mut source = vec![false; n];
    let mut sink = vec![false; n];
    source[SOURCE_NODE] = true;
    sink[SINK_NODE] = true;
    let region = FlowRegion::new(
        Hypergraph::from_csr_trusted(weights, edge_weights, offsets, pins),
        source,
        sink,
        side,
        [balance.max_weight(blocks[0]), balance.max_weight(blocks[1])],
        [balance.perfect_weight(blocks[0]), balance.perfect_weight(blocks[1])],
    );
    Some(PairRegion {
        blocks,
        region,
        vertices,
    })
}
