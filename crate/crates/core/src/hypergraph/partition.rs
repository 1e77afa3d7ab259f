use std::sync::atomic::{AtomicU32, Ordering::Relaxed};

use rayon::prelude::*;
use thiserror::Error;

use super::{BalanceConstraint, Hypergraph, Weight};

/// Largest `k` stored with one dense counter per (edge, block).
const DENSE_MAX_K: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("assignment has {found} entries for {expected} vertices")]
    AssignmentLength { expected: usize, found: usize },
    #[error("vertex {vertex} is assigned to block {block}, but k = {k}")]
    BlockOutOfRange {
        vertex: usize,
        block: usize,
        k: usize,
    },
    #[error("vertex {vertex} appears more than once in a move batch")]
    DuplicateMove { vertex: usize },
    #[error("vertex {vertex} is already in block {block}")]
    MoveToSameBlock { vertex: usize, block: usize },
    #[error("vertex {vertex} does not exist")]
    VertexOutOfRange { vertex: usize },
    #[error("k must be at least 1")]
    ZeroBlocks,
    #[error("balance constraint has {found} blocks, expected {expected}")]
    ConstraintMismatch { expected: usize, found: usize },
}

/// A single vertex move to block `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Move {
    pub vertex: usize,
    pub to: usize,
}

/// Storage layout for the per-edge pin counts φ_e.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PinCountLayout {
    /// Dense for k ≤ 32, sparse otherwise.
    #[default]
    Auto,
    Dense,
    Sparse,
}

#[derive(Debug, Clone, Copy, Default)]
struct PinEntry {
    block: u32,
    count: u32,
}

#[derive(Debug)]
enum PinCounts {
    /// One counter per (edge, block), plus a bitmask of Λ(e). The mask is
    /// maintained with XOR so concurrent 0↔1 transitions commute.
    Dense {
        k: usize,
        counts: Vec<AtomicU32>,
        masks: Vec<AtomicU32>,
    },
    /// Per edge at most `min(|e|, k)` (block, count) entries sorted by block.
    Sparse {
        offsets: Vec<usize>,
        entries: Vec<PinEntry>,
        lens: Vec<u32>,
    },
}

impl Clone for PinCounts {
    fn clone(&self) -> Self {
        let copy = |v: &Vec<AtomicU32>| v.iter().map(|x| AtomicU32::new(x.load(Relaxed))).collect();
        match self {
            PinCounts::Dense { k, counts, masks } => PinCounts::Dense {
                k: *k,
                counts: copy(counts),
                masks: copy(masks),
            },
            PinCounts::Sparse {
                offsets,
                entries,
                lens,
            } => PinCounts::Sparse {
                offsets: offsets.clone(),
                entries: entries.clone(),
                lens: lens.clone(),
            },
        }
    }
}

/// Blocks of Λ(e) with their pin counts, in ascending block order.
pub struct BlockIter<'a>(BlockIterInner<'a>);

enum BlockIterInner<'a> {
    Dense { mask: u32, counts: &'a [AtomicU32] },
    Sparse(std::slice::Iter<'a, PinEntry>),
}

impl Iterator for BlockIter<'_> {
    type Item = (usize, u32);

    #[inline]
    fn next(&mut self) -> Option<(usize, u32)> {
        match &mut self.0 {
            BlockIterInner::Dense { mask, counts } => {
                if *mask == 0 {
                    return None;
                }
                let b = mask.trailing_zeros() as usize;
                *mask &= *mask - 1;
                Some((b, counts[b].load(Relaxed)))
            }
            BlockIterInner::Sparse(it) => it.next().map(|p| (p.block as usize, p.count)),
        }
    }
}

fn split_by_offsets<'a, T>(
    mut data: &'a mut [T],
    offsets: &[usize],
    select: &[usize],
) -> Vec<&'a mut [T]> {
    // `select` must be ascending.
    let mut consumed = 0;
    let mut out = Vec::with_capacity(select.len());
    for &e in select {
        let (_, rest) = std::mem::take(&mut data).split_at_mut(offsets[e] - consumed);
        let (slot, rest) = rest.split_at_mut(offsets[e + 1] - offsets[e]);
        out.push(slot);
        data = rest;
        consumed = offsets[e + 1];
    }
    out
}

fn sparse_decrement(slot: &mut [PinEntry], len: &mut u32, block: u32) -> bool {
    let n = *len as usize;
    let i = slot[..n]
        .iter()
        .position(|p| p.block == block)
        .expect("pin count underflow");
    slot[i].count -= 1;
    if slot[i].count == 0 {
        slot.copy_within(i + 1..n, i);
        *len -= 1;
        true
    } else {
        false
    }
}

fn sparse_increment(slot: &mut [PinEntry], len: &mut u32, block: u32) -> bool {
    let n = *len as usize;
    match slot[..n].binary_search_by_key(&block, |p| p.block) {
        Ok(i) => {
            slot[i].count += 1;
            false
        }
        Err(i) => {
            slot.copy_within(i..n, i + 1);
            slot[i] = PinEntry { block, count: 1 };
            *len += 1;
            true
        }
    }
}

impl PinCounts {
    fn build(hg: &Hypergraph, k: usize, assignment: &[usize], layout: PinCountLayout) -> Self {
        let dense = match layout {
            PinCountLayout::Auto => k <= DENSE_MAX_K,
            PinCountLayout::Dense => {
                assert!(
                    k <= DENSE_MAX_K,
                    "dense pin counts support at most {DENSE_MAX_K} blocks"
                );
                true
            }
            PinCountLayout::Sparse => false,
        };
        let m = hg.num_edges();
        if dense {
            let counts: Vec<AtomicU32> = (0..m * k).map(|_| AtomicU32::new(0)).collect();
            let masks: Vec<AtomicU32> = (0..m).map(|_| AtomicU32::new(0)).collect();
            counts
                .par_chunks(k.max(1))
                .zip(masks.par_iter())
                .enumerate()
                .for_each(|(e, (row, mask))| {
                    let mut bits = 0u32;
                    for &v in hg.pins(e) {
                        let b = assignment[v];
                        row[b].fetch_add(1, Relaxed);
                        bits |= 1 << b;
                    }
                    mask.store(bits, Relaxed);
                });
            PinCounts::Dense { k, counts, masks }
        } else {
            let mut offsets = Vec::with_capacity(m + 1);
            offsets.push(0);
            for e in 0..m {
                offsets.push(offsets[e] + hg.edge_size(e).min(k));
            }
            let mut entries = vec![PinEntry::default(); offsets[m]];
            let mut lens = vec![0u32; m];
            let all: Vec<usize> = (0..m).collect();
            split_by_offsets(&mut entries, &offsets, &all)
                .into_par_iter()
                .zip(lens.par_iter_mut())
                .enumerate()
                .for_each_init(Vec::new, |blocks, (e, (slot, len))| {
                    blocks.clear();
                    blocks.extend(hg.pins(e).iter().map(|&v| assignment[v] as u32));
                    blocks.sort_unstable();
                    let mut n = 0;
                    for &b in blocks.iter() {
                        if n > 0 && slot[n - 1].block == b {
                            slot[n - 1].count += 1;
                        } else {
                            slot[n] = PinEntry { block: b, count: 1 };
                            n += 1;
                        }
                    }
                    *len = n as u32;
                });
            PinCounts::Sparse {
                offsets,
                entries,
                lens,
            }
        }
    }

    #[inline]
    fn pin_count(&self, e: usize, block: usize) -> u32 {
        match self {
            PinCounts::Dense { k, counts, .. } => counts[e * k + block].load(Relaxed),
            PinCounts::Sparse {
                offsets,
                entries,
                lens,
            } => {
                let slot = &entries[offsets[e]..offsets[e] + lens[e] as usize];
                slot.iter()
                    .find(|p| p.block as usize == block)
                    .map_or(0, |p| p.count)
            }
        }
    }

    #[inline]
    fn connectivity(&self, e: usize) -> u32 {
        match self {
            PinCounts::Dense { masks, .. } => masks[e].load(Relaxed).count_ones(),
            PinCounts::Sparse { lens, .. } => lens[e],
        }
    }

    #[inline]
    fn blocks(&self, e: usize) -> BlockIter<'_> {
        match self {
            PinCounts::Dense { k, counts, masks } => BlockIter(BlockIterInner::Dense {
                mask: masks[e].load(Relaxed),
                counts: &counts[e * k..(e + 1) * k],
            }),
            PinCounts::Sparse {
                offsets,
                entries,
                lens,
            } => BlockIter(BlockIterInner::Sparse(
                entries[offsets[e]..offsets[e] + lens[e] as usize].iter(),
            )),
        }
    }

    /// Applies `(vertex, from, to)` triples and returns the metric change.
    fn apply(&mut self, hg: &Hypergraph, moves: &[(usize, usize, usize)]) -> Weight {
        match self {
            PinCounts::Dense { k, counts, masks } => {
                let k = *k;
                let counts = &*counts;
                let masks = &*masks;
                moves
                    .par_iter()
                    .map(|&(v, from, to)| {
                        let mut delta = 0;
                        for &e in hg.incident_edges(v) {
                            let w = hg.edge_weight(e);
                            if counts[e * k + from].fetch_sub(1, Relaxed) == 1 {
                                masks[e].fetch_xor(1 << from, Relaxed);
                                delta -= w;
                            }
                            if counts[e * k + to].fetch_add(1, Relaxed) == 0 {
                                masks[e].fetch_xor(1 << to, Relaxed);
                                delta += w;
                            }
                        }
                        delta
                    })
                    .sum()
            }
            PinCounts::Sparse {
                offsets,
                entries,
                lens,
            } => {
                let mut updates: Vec<(usize, u32, u32)> = moves
                    .par_iter()
                    .flat_map_iter(|&(v, from, to)| {
                        hg.incident_edges(v)
                            .iter()
                            .map(move |&e| (e, from as u32, to as u32))
                    })
                    .collect();
                updates.par_sort_unstable();
                let mut edges = Vec::new();
                let mut starts = Vec::new();
                for (i, u) in updates.iter().enumerate() {
                    if i == 0 || updates[i - 1].0 != u.0 {
                        edges.push(u.0);
                        starts.push(i);
                    }
                }
                starts.push(updates.len());
                let slots = split_by_offsets(entries, offsets, &edges);
                let len_offsets: Vec<usize> = (0..=lens.len()).collect();
                let len_slots = split_by_offsets(lens, &len_offsets, &edges);
                slots
                    .into_par_iter()
                    .zip(len_slots)
                    .enumerate()
                    .map(|(g, (slot, len))| {
                        let group = &updates[starts[g]..starts[g + 1]];
                        let e = edges[g];
                        let before = len[0];
                        // decrement before increment keeps λ(e) ≤ min(|e|, k)
                        for &(_, from, to) in group {
                            sparse_decrement(slot, &mut len[0], from);
                            sparse_increment(slot, &mut len[0], to);
                        }
                        (len[0] as Weight - before as Weight) * hg.edge_weight(e)
                    })
                    .sum()
            }
        }
    }
}

/// Reusable per-thread buffer for gain computations.
#[derive(Debug, Clone)]
pub struct GainScratch {
    conn: Vec<Weight>,
    touched: Vec<usize>,
}

impl GainScratch {
    pub fn new(k: usize) -> Self {
        Self {
            conn: vec![0; k],
            touched: Vec::new(),
        }
    }
}

/// Affinity of a vertex to its own and neighbouring blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GainProfile {
    /// Σ ω(e) over e ∈ I(v) with φ_e[Π(v)] = 1 (edges v would leave).
    pub benefit: Weight,
    /// Σ ω(e) over e ∈ I(v) with φ_e[Π(v)] > 1 (the temperature penalty base).
    pub internal: Weight,
}

impl GainProfile {
    /// gain(v, j) given the connection weight Σ_{e ∈ I(v), φ_e[j] > 0} ω(e).
    #[inline]
    pub fn gain(&self, connection: Weight) -> Weight {
        self.benefit - (self.benefit + self.internal - connection)
    }
}

/// A k-way partition of a hypergraph with incrementally maintained block
/// weights, pin counts φ_e, connectivities λ(e) and connectivity metric.
#[derive(Debug, Clone)]
pub struct PartitionState<'h> {
    hg: &'h Hypergraph,
    balance: BalanceConstraint,
    assignment: Vec<usize>,
    block_weights: Vec<Weight>,
    pins: PinCounts,
    metric: Weight,
    marker: Vec<bool>,
}

impl<'h> PartitionState<'h> {
    pub fn new(
        hg: &'h Hypergraph,
        balance: BalanceConstraint,
        assignment: Vec<usize>,
    ) -> Result<Self, PartitionError> {
        Self::with_layout(hg, balance, assignment, PinCountLayout::Auto)
    }

    pub fn with_layout(
        hg: &'h Hypergraph,
        balance: BalanceConstraint,
        assignment: Vec<usize>,
        layout: PinCountLayout,
    ) -> Result<Self, PartitionError> {
        let k = balance.k();
        if k == 0 {
            return Err(PartitionError::ZeroBlocks);
        }
        if assignment.len() != hg.num_vertices() {
            return Err(PartitionError::AssignmentLength {
                expected: hg.num_vertices(),
                found: assignment.len(),
            });
        }
        if let Some((vertex, &block)) = assignment.iter().enumerate().find(|(_, &b)| b >= k) {
            return Err(PartitionError::BlockOutOfRange { vertex, block, k });
        }
        let pins = PinCounts::build(hg, k, &assignment, layout);
        let mut block_weights = vec![0; k];
        for (v, &b) in assignment.iter().enumerate() {
            block_weights[b] += hg.vertex_weight(v);
        }
        let metric = (0..hg.num_edges())
            .into_par_iter()
            .map(|e| hg.edge_weight(e) * (pins.connectivity(e) as Weight - 1))
            .sum();
        Ok(Self {
            hg,
            balance,
            assignment,
            block_weights,
            pins,
            metric,
            marker: vec![false; hg.num_vertices()],
        })
    }

    pub fn hypergraph(&self) -> &'h Hypergraph {
        self.hg
    }

    pub fn k(&self) -> usize {
        self.balance.k()
    }

    pub fn balance(&self) -> &BalanceConstraint {
        &self.balance
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn into_assignment(self) -> Vec<usize> {
        self.assignment
    }

    #[inline]
    pub fn block(&self, v: usize) -> usize {
        self.assignment[v]
    }

    pub fn block_weights(&self) -> &[Weight] {
        &self.block_weights
    }

    #[inline]
    pub fn block_weight(&self, b: usize) -> Weight {
        self.block_weights[b]
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.pins, PinCounts::Dense { .. })
    }

    /// φ_e[b] = |e ∩ V_b|.
    #[inline]
    pub fn pin_count(&self, e: usize, b: usize) -> u32 {
        self.pins.pin_count(e, b)
    }

    /// λ(e) = |Λ(e)|.
    #[inline]
    pub fn connectivity(&self, e: usize) -> u32 {
        self.pins.connectivity(e)
    }

    /// Λ(e) with pin counts, ascending by block.
    #[inline]
    pub fn connectivity_set(&self, e: usize) -> BlockIter<'_> {
        self.pins.blocks(e)
    }

    /// (λ − 1)(Π) = Σ_e ω(e)·(λ(e) − 1), maintained incrementally.
    pub fn connectivity_metric(&self) -> Weight {
        self.metric
    }

    pub fn is_balanced(&self) -> bool {
        self.balance.is_balanced(&self.block_weights)
    }

    pub fn is_overloaded(&self, b: usize) -> bool {
        self.block_weights[b] > self.balance.max_weight(b)
    }

    /// max_i c(V_i)/perfect_i − 1, for reporting.
    pub fn imbalance(&self) -> f64 {
        (0..self.k())
            .map(|b| self.block_weights[b] as f64 / self.balance.perfect_weight(b).max(1) as f64)
            .fold(f64::MIN, f64::max)
            - 1.0
    }

    /// max_i (c(V_i) − perfect_i): an exact integer imbalance key.
    pub fn excess_weight(&self) -> Weight {
        (0..self.k())
            .map(|b| self.block_weights[b] - self.balance.perfect_weight(b))
            .max()
            .unwrap_or(0)
    }

    /// Fills `scratch` with the connection weight of `v` to every adjacent
    /// block other than its own, and returns its gain profile.
    pub fn gain_profile(&self, v: usize, scratch: &mut GainScratch) -> GainProfile {
        for &b in &scratch.touched {
            scratch.conn[b] = 0;
        }
        scratch.touched.clear();
        let from = self.assignment[v];
        let mut benefit = 0;
        let mut internal = 0;
        for &e in self.hg.incident_edges(v) {
            let w = self.hg.edge_weight(e);
            for (b, count) in self.pins.blocks(e) {
                if b == from {
                    if count == 1 {
                        benefit += w;
                    } else {
                        internal += w;
                    }
                } else {
                    if scratch.conn[b] == 0 {
                        scratch.touched.push(b);
                    }
                    scratch.conn[b] += w;
                }
            }
        }
        GainProfile { benefit, internal }
    }

    /// Adjacent blocks recorded by the last [`Self::gain_profile`] call, with
    /// their connection weights, in discovery order.
    pub fn adjacent_blocks<'s>(
        &self,
        scratch: &'s GainScratch,
    ) -> impl Iterator<Item = (usize, Weight)> + 's {
        scratch.touched.iter().map(|&b| (b, scratch.conn[b]))
    }

    /// Connection weight of the last profiled vertex to block `b`.
    #[inline]
    pub fn connection(&self, scratch: &GainScratch, b: usize) -> Weight {
        scratch.conn[b]
    }

    /// Decrease of the connectivity metric if `v` alone moves to `to`.
    pub fn gain(&self, v: usize, to: usize) -> Result<Weight, PartitionError> {
        if v >= self.hg.num_vertices() {
            return Err(PartitionError::VertexOutOfRange { vertex: v });
        }
        let from = self.assignment[v];
        if to == from {
            return Err(PartitionError::MoveToSameBlock {
                vertex: v,
                block: to,
            });
        }
        if to >= self.k() {
            return Err(PartitionError::BlockOutOfRange {
                vertex: v,
                block: to,
                k: self.k(),
            });
        }
        Ok(self
            .hg
            .incident_edges(v)
            .iter()
            .map(|&e| {
                let w = self.hg.edge_weight(e);
                let mut g = 0;
                if self.pins.pin_count(e, from) == 1 {
                    g += w;
                }
                if self.pins.pin_count(e, to) == 0 {
                    g -= w;
                }
                g
            })
            .sum())
    }

    /// Applies a batch of moves synchronously. The result does not depend on
    /// the order of the batch: every update is a commutative integer add.
    pub fn apply_moves(&mut self, moves: &[Move]) -> Result<(), PartitionError> {
        let k = self.k();
        let mut error = None;
        for (i, m) in moves.iter().enumerate() {
            let err = if m.vertex >= self.assignment.len() {
                Some(PartitionError::VertexOutOfRange { vertex: m.vertex })
            } else if m.to >= k {
                Some(PartitionError::BlockOutOfRange {
                    vertex: m.vertex,
                    block: m.to,
                    k,
                })
            } else if self.assignment[m.vertex] == m.to {
                Some(PartitionError::MoveToSameBlock {
                    vertex: m.vertex,
                    block: m.to,
                })
            } else if self.marker[m.vertex] {
                Some(PartitionError::DuplicateMove { vertex: m.vertex })
            } else {
                None
            };
            if let Some(err) = err {
                for m in &moves[..i] {
                    self.marker[m.vertex] = false;
                }
                error = Some(err);
                break;
            }
            self.marker[m.vertex] = true;
        }
        if let Some(err) = error {
            return Err(err);
        }
        let triples: Vec<(usize, usize, usize)> = moves
            .iter()
            .map(|m| {
                self.marker[m.vertex] = false;
                (m.vertex, self.assignment[m.vertex], m.to)
            })
            .collect();
        self.metric += self.pins.apply(self.hg, &triples);
        for &(v, from, to) in &triples {
            let w = self.hg.vertex_weight(v);
            self.block_weights[from] -= w;
            self.block_weights[to] += w;
            self.assignment[v] = to;
        }
        Ok(())
    }

    /// Moves every vertex whose block differs from `target` back to it.
    pub fn restore(&mut self, target: &[usize]) {
        let moves: Vec<Move> = self
            .assignment
            .par_iter()
            .zip(target.par_iter())
            .enumerate()
            .filter(|(_, (a, t))| a != t)
            .map(|(vertex, (_, &to))| Move { vertex, to })
            .collect();
        self.apply_moves(&moves).expect("restore moves are valid");
    }

    /// Recomputes every incrementally maintained quantity from scratch and
    /// reports the first mismatch.
    pub fn audit(&self) -> Result<(), String> {
        let k = self.k();
        let mut weights = vec![0; k];
        for (v, &b) in self.assignment.iter().enumerate() {
            weights[b] += self.hg.vertex_weight(v);
        }
        if weights != self.block_weights {
            return Err(format!(
                "block weights {:?} != recomputed {:?}",
                self.block_weights, weights
            ));
        }
        let bad_edge = (0..self.hg.num_edges()).into_par_iter().find_first(|&e| {
            let mut counts = vec![0u32; k];
            for &v in self.hg.pins(e) {
                counts[self.assignment[v]] += 1;
            }
            let lambda = counts.iter().filter(|&&c| c > 0).count() as u32;
            let listed: Vec<(usize, u32)> = self.pins.blocks(e).collect();
            let expected: Vec<(usize, u32)> = counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(b, &c)| (b, c))
                .collect();
            lambda != self.pins.connectivity(e)
                || listed != expected
                || (0..k).any(|b| self.pins.pin_count(e, b) != counts[b])
        });
        if let Some(e) = bad_edge {
            return Err(format!("pin counts of edge {e} are inconsistent"));
        }
        let metric = self.hg.connectivity_metric_of(&self.assignment);
        if metric != self.metric {
            return Err(format!("metric {} != recomputed {}", self.metric, metric));
        }
        Ok(())
    }

    /// Panics on an inconsistent state in debug builds.
    #[inline]
    pub fn debug_audit(&self) {
        if cfg!(debug_assertions) {
            if let Err(msg) = self.audit() {
                panic!("partition state audit failed: {msg}");
            }
        }
    }
}
