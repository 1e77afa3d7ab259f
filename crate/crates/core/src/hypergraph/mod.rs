//! Weighted hypergraphs, k-way partitions and the gain/metric primitives
//! shared by every refinement stage.

mod balance;
mod fraction;
mod partition;

pub use balance::BalanceConstraint;
pub use fraction::{Fraction, FractionError};
pub use partition::{
    BlockIter, GainProfile, GainScratch, Move, PartitionError, PartitionState, PinCountLayout,
};

use rayon::prelude::*;
use thiserror::Error;

/// Vertex, edge, and metric weights. Always positive for vertices and edges.
pub type Weight = i64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HypergraphError {
    #[error("hyperedge {edge} has no pins")]
    EmptyEdge { edge: usize },
    #[error(
        "hyperedge {edge} references vertex {pin}, but there are only {num_vertices} vertices"
    )]
    PinOutOfRange {
        edge: usize,
        pin: usize,
        num_vertices: usize,
    },
    #[error("hyperedge {edge} contains vertex {pin} more than once")]
    DuplicatePin { edge: usize, pin: usize },
    #[error("vertex {vertex} has non-positive weight {weight}")]
    NonPositiveVertexWeight { vertex: usize, weight: Weight },
    #[error("hyperedge {edge} has non-positive weight {weight}")]
    NonPositiveEdgeWeight { edge: usize, weight: Weight },
    #[error("expected {expected} {what}, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("weights are too large: the worst-case connectivity metric does not fit in 64 bits")]
    WeightOverflow,
}

/// Immutable hypergraph in CSR form, with both the pin lists of every
/// hyperedge and the incident hyperedges of every vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    vertex_weights: Vec<Weight>,
    edge_weights: Vec<Weight>,
    pin_offsets: Vec<usize>,
    pins: Vec<usize>,
    incidence_offsets: Vec<usize>,
    incidence: Vec<usize>,
    total_vertex_weight: Weight,
}

impl Hypergraph {
    /// Builds a hypergraph from per-edge pin lists.
    pub fn new(
        vertex_weights: Vec<Weight>,
        edge_weights: Vec<Weight>,
        edges: &[Vec<usize>],
    ) -> Result<Self, HypergraphError> {
        let mut pin_offsets = Vec::with_capacity(edges.len() + 1);
        pin_offsets.push(0);
        let mut pins = Vec::with_capacity(edges.iter().map(Vec::len).sum());
        for edge in edges {
            pins.extend_from_slice(edge);
            pin_offsets.push(pins.len());
        }
        Self::from_csr(vertex_weights, edge_weights, pin_offsets, pins)
    }

    /// Unit vertex and edge weights.
    pub fn unweighted(num_vertices: usize, edges: &[Vec<usize>]) -> Result<Self, HypergraphError> {
        Self::new(vec![1; num_vertices], vec![1; edges.len()], edges)
    }

    /// Builds a hypergraph from a pin offset array and a flat pin array.
    pub fn from_csr(
        vertex_weights: Vec<Weight>,
        edge_weights: Vec<Weight>,
        pin_offsets: Vec<usize>,
        pins: Vec<usize>,
    ) -> Result<Self, HypergraphError> {
        let n = vertex_weights.len();
        let m = edge_weights.len();
        if pin_offsets.len() != m + 1 {
            return Err(HypergraphError::LengthMismatch {
                what: "pin offsets",
                expected: m + 1,
                found: pin_offsets.len(),
            });
        }
        if pin_offsets[m] != pins.len() {
            return Err(HypergraphError::LengthMismatch {
                what: "pins",
                expected: pin_offsets[m],
                found: pins.len(),
            });
        }
        for (vertex, &weight) in vertex_weights.iter().enumerate() {
            if weight <= 0 {
                return Err(HypergraphError::NonPositiveVertexWeight { vertex, weight });
            }
        }
        // stamp[v] == e + 1 marks v as already seen in edge e
        let mut stamp = vec![0usize; n];
        let mut worst_metric: i128 = 0;
        for edge in 0..m {
            let weight = edge_weights[edge];
            if weight <= 0 {
                return Err(HypergraphError::NonPositiveEdgeWeight { edge, weight });
            }
            let edge_pins = &pins[pin_offsets[edge]..pin_offsets[edge + 1]];
            if edge_pins.is_empty() {
                return Err(HypergraphError::EmptyEdge { edge });
            }
            for &pin in edge_pins {
                if pin >= n {
                    return Err(HypergraphError::PinOutOfRange {
                        edge,
                        pin,
                        num_vertices: n,
                    });
                }
                if stamp[pin] == edge + 1 {
                    return Err(HypergraphError::DuplicatePin { edge, pin });
                }
                stamp[pin] = edge + 1;
            }
            worst_metric += weight as i128 * (edge_pins.len() as i128 - 1);
        }
        let total_vertex_weight: i128 = vertex_weights.iter().map(|&w| w as i128).sum();
        let total_edge_weight: i128 = edge_weights.iter().map(|&w| w as i128).sum();
        // Gains are bounded by the total incident edge weight, metrics by the
        // worst case; keep a factor of four as headroom for intermediate sums.
        let limit = (i64::MAX / 4) as i128;
        if worst_metric > limit || total_vertex_weight > limit || total_edge_weight > limit {
            return Err(HypergraphError::WeightOverflow);
        }
        Ok(Self::from_csr_trusted(
            vertex_weights,
            edge_weights,
            pin_offsets,
            pins,
        ))
    }

    /// Skips validation; used for hypergraphs derived from an already valid one.
    pub(crate) fn from_csr_trusted(
        vertex_weights: Vec<Weight>,
        edge_weights: Vec<Weight>,
        pin_offsets: Vec<usize>,
        pins: Vec<usize>,
    ) -> Self {
        let n = vertex_weights.len();
        let m = edge_weights.len();
        let mut degree = vec![0usize; n + 1];
        for &pin in &pins {
            degree[pin + 1] += 1;
        }
        for v in 0..n {
            degree[v + 1] += degree[v];
        }
        let incidence_offsets = degree;
        let mut cursor = incidence_offsets.clone();
        let mut incidence = vec![0usize; pins.len()];
        for edge in 0..m {
            for &pin in &pins[pin_offsets[edge]..pin_offsets[edge + 1]] {
                incidence[cursor[pin]] = edge;
                cursor[pin] += 1;
            }
        }
        let total_vertex_weight = vertex_weights.iter().sum();
        Self {
            vertex_weights,
            edge_weights,
            pin_offsets,
            pins,
            incidence_offsets,
            incidence,
            total_vertex_weight,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_weights.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edge_weights.len()
    }

    pub fn num_pins(&self) -> usize {
        self.pins.len()
    }

    #[inline]
    pub fn vertex_weight(&self, v: usize) -> Weight {
        self.vertex_weights[v]
    }

    #[inline]
    pub fn edge_weight(&self, e: usize) -> Weight {
        self.edge_weights[e]
    }

    pub fn vertex_weights(&self) -> &[Weight] {
        &self.vertex_weights
    }

    pub fn edge_weights(&self) -> &[Weight] {
        &self.edge_weights
    }

    #[inline]
    pub fn pins(&self, e: usize) -> &[usize] {
        &self.pins[self.pin_offsets[e]..self.pin_offsets[e + 1]]
    }

    #[inline]
    pub fn edge_size(&self, e: usize) -> usize {
        self.pin_offsets[e + 1] - self.pin_offsets[e]
    }

    /// I(v): hyperedges containing `v`, in ascending order.
    #[inline]
    pub fn incident_edges(&self, v: usize) -> &[usize] {
        &self.incidence[self.incidence_offsets[v]..self.incidence_offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.incidence_offsets[v + 1] - self.incidence_offsets[v]
    }

    pub fn total_vertex_weight(&self) -> Weight {
        self.total_vertex_weight
    }

    pub fn total_edge_weight(&self) -> Weight {
        self.edge_weights.iter().sum()
    }

    pub fn max_vertex_weight(&self) -> Weight {
        self.vertex_weights.iter().copied().max().unwrap_or(0)
    }

    /// Connectivity metric of an arbitrary assignment, computed from scratch.
    pub fn connectivity_metric_of(&self, assignment: &[usize]) -> Weight {
        (0..self.num_edges())
            .into_par_iter()
            .map_init(Vec::new, |blocks, e| {
                blocks.clear();
                blocks.extend(self.pins(e).iter().map(|&v| assignment[v]));
                blocks.sort_unstable();
                blocks.dedup();
                self.edge_weight(e) * (blocks.len() as Weight - 1)
            })
            .sum()
    }

    /// Sub-hypergraph induced by `vertices` (given in the order that defines
    /// the local IDs). Hyperedges keep only pins inside the set, and those
    /// left with fewer than two pins are dropped.
    pub fn induced(&self, vertices: &[usize]) -> Hypergraph {
        const NONE: usize = usize::MAX;
        let mut local = vec![NONE; self.num_vertices()];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let mut seen = vec![false; self.num_edges()];
        let mut edges = Vec::new();
        for &v in vertices {
            for &e in self.incident_edges(v) {
                if !seen[e] {
                    seen[e] = true;
                    edges.push(e);
                }
            }
        }
        edges.sort_unstable();
        let mut pin_offsets = vec![0];
        let mut pins = Vec::new();
        let mut edge_weights = Vec::new();
        for e in edges {
            let start = pins.len();
            pins.extend(
                self.pins(e)
                    .iter()
                    .map(|&p| local[p])
                    .filter(|&p| p != NONE),
            );
            if pins.len() - start >= 2 {
                pin_offsets.push(pins.len());
                edge_weights.push(self.edge_weight(e));
            } else {
                pins.truncate(start);
            }
        }
        let vertex_weights = vertices.iter().map(|&v| self.vertex_weight(v)).collect();
        Hypergraph::from_csr_trusted(vertex_weights, edge_weights, pin_offsets, pins)
    }
}
