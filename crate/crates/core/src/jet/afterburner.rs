use std::cmp::Ordering;
use std::sync::atomic::{AtomicI64, Ordering::Relaxed};

use rayon::prelude::*;

use super::candidates::Candidate;
use crate::hypergraph::{Move, PartitionState, Weight};

const NOT_CANDIDATE: usize = usize::MAX;

/// Per-vertex lookup tables, reused across Jet iterations.
#[derive(Debug)]
pub struct Afterburner {
    target: Vec<usize>,
    gain: Vec<Weight>,
    recomputed: Vec<AtomicI64>,
    /// Use the generic per-edge path for every edge (for testing the fast paths).
    pub generic_only: bool,
}

/// (pin, from, to, precomputed gain) of one candidate inside an edge.
#[derive(Debug, Clone, Copy)]
struct Pin {
    v: usize,
    from: usize,
    to: usize,
    gain: Weight,
}

/// Highest gain first, ties by smaller vertex ID.
#[inline]
fn order(a: &Pin, b: &Pin) -> Ordering {
    b.gain.cmp(&a.gain).then(a.v.cmp(&b.v))
}

/// Small map block → live pin count for the blocks touched in one edge.
struct Counts<const N: usize> {
    blocks: [usize; N],
    counts: [u32; N],
    len: usize,
}

impl<const N: usize> Counts<N> {
    fn new() -> Self {
        Self {
            blocks: [0; N],
            counts: [0; N],
            len: 0,
        }
    }

    #[inline]
    fn slot(&mut self, state: &PartitionState<'_>, e: usize, b: usize) -> &mut u32 {
        let i = match self.blocks[..self.len].iter().position(|&x| x == b) {
            Some(i) => i,
            None => {
                self.blocks[self.len] = b;
                self.counts[self.len] = state.pin_count(e, b);
                self.len += 1;
                self.len - 1
            }
        };
        &mut self.counts[i]
    }
}

impl Afterburner {
    pub fn new(n: usize) -> Self {
        Self {
            target: vec![NOT_CANDIDATE; n],
            gain: vec![0; n],
            recomputed: (0..n).map(|_| AtomicI64::new(0)).collect(),
            generic_only: false,
        }
    }

    /// Keeps the candidates whose gain is still positive when all candidates
    /// are executed in order of decreasing gain (ties by vertex ID). The order
    /// is never materialized globally: every hyperedge replays its own
    /// candidates in that order and the per-edge contributions are summed
    /// with commutative atomic adds.
    pub fn filter(&mut self, state: &PartitionState<'_>, candidates: &[Candidate]) -> Vec<Move> {
        for c in candidates {
            self.target[c.vertex] = c.to;
            self.gain[c.vertex] = c.gain;
            self.recomputed[c.vertex].store(0, Relaxed);
        }
        let hg = state.hypergraph();
        let this = &*self;
        (0..hg.num_edges()).into_par_iter().for_each_init(Vec::new, |buf, e| {
            buf.clear();
            buf.extend(hg.pins(e).iter().filter(|&&v| this.target[v] != NOT_CANDIDATE).map(|&v| Pin {
                v,
                from: state.block(v),
                to: this.target[v],
                gain: this.gain[v],
            }));
            if buf.is_empty() {
                return;
            }
            let w = hg.edge_weight(e);
            match buf.len() {
                1 if !this.generic_only => this.single(state, e, w, buf[0]),
                2 if !this.generic_only => {
                    let (a, b) = sorted2(buf[0], buf[1]);
                    this.simulate::<4>(state, e, w, [a, b].into_iter());
                }
                3 if !this.generic_only => {
                    let [a, b, c] = sorted3(buf[0], buf[1], buf[2]);
                    this.simulate::<6>(state, e, w, [a, b, c].into_iter());
                }
                _ => this.generic(state, e, w, buf),
            }
        });
        let kept = candidates
            .iter()
            .filter(|c| self.recomputed[c.vertex].load(Relaxed) > 0)
            .map(|c| Move {
                vertex: c.vertex,
                to: c.to,
            })
            .collect();
        for c in candidates {
            self.target[c.vertex] = NOT_CANDIDATE;
        }
        kept
    }

    #[inline]
    fn single(&self, state: &PartitionState<'_>, e: usize, w: Weight, p: Pin) {
        let mut delta = 0;
        if state.pin_count(e, p.from) == 1 {
            delta += w;
        }
        if state.pin_count(e, p.to) == 0 {
            delta -= w;
        }
        if delta != 0 {
            self.recomputed[p.v].fetch_add(delta, Relaxed);
        }
    }

    #[inline]
    fn simulate<const N: usize>(
        &self,
        state: &PartitionState<'_>,
        e: usize,
        w: Weight,
        pins: impl Iterator<Item = Pin>,
    ) {
        let mut counts = Counts::<N>::new();
        for p in pins {
            let mut delta = 0;
            let from = counts.slot(state, e, p.from);
            *from -= 1;
            if *from == 0 {
                delta += w;
            }
            let to = counts.slot(state, e, p.to);
            *to += 1;
            if *to == 1 {
                delta -= w;
            }
            if delta != 0 {
                self.recomputed[p.v].fetch_add(delta, Relaxed);
            }
        }
    }

    fn generic(&self, state: &PartitionState<'_>, e: usize, w: Weight, pins: &mut [Pin]) {
        pins.sort_unstable_by(order);
        let mut blocks: Vec<(usize, u32)> = Vec::with_capacity(2 * pins.len());
        for p in pins.iter() {
            for b in [p.from, p.to] {
                if !blocks.iter().any(|&(x, _)| x == b) {
                    blocks.push((b, state.pin_count(e, b)));
                }
            }
        }
        blocks.sort_unstable();
        let slot = |blocks: &[(usize, u32)], b: usize| blocks.binary_search_by_key(&b, |&(x, _)| x).unwrap();
        for p in pins.iter() {
            let mut delta = 0;
            let i = slot(&blocks, p.from);
            blocks[i].1 -= 1;
            if blocks[i].1 == 0 {
                delta += w;
            }
            let j = slot(&blocks, p.to);
            blocks[j].1 += 1;
            if blocks[j].1 == 1 {
                delta -= w;
            }
            if delta != 0 {
                self.recomputed[p.v].fetch_add(delta, Relaxed);
            }
        }
    }
}

#[inline]
fn sorted2(a: Pin, b: Pin) -> (Pin, Pin) {
    if order(&a, &b) == Ordering::Greater {
        (b, a)
    } else {
        (a, b)
    }
}

#[inline]
fn sorted3(a: Pin, b: Pin, c: Pin) -> [Pin; 3] {
    let (a, b) = sorted2(a, b);
    let (b, c) = sorted2(b, c);
    let (a, b) = sorted2(a, b);
    [a, b, c]
}
