use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::hypergraph::{Hypergraph, Weight};

const INFINITE: Weight = Weight::MAX / 4;
const UNREACHED: u32 = u32::MAX;

/// Lawler network of a hypergraph solved with Dinic's algorithm.
///
/// Hyperedges with two pins become a pair of opposite arcs; larger ones get
/// an `in` and an `out` node joined by an arc of capacity ω(e), with
/// infinite arcs `v → in` and `out → v` for every pin. Vertices keep their
/// IDs as node IDs. The order in which arcs are tried is a seeded
/// permutation, so different seeds give different maximum flows.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    num_vertices: usize,
    first: Vec<usize>,
    head: Vec<usize>,
    rev: Vec<usize>,
    residual: Vec<Weight>,
    value: Weight,
    excess: Vec<Weight>,
    level: Vec<u32>,
    cursor: Vec<usize>,
}

impl FlowNetwork {
    pub fn new(hg: &Hypergraph, arc_order_seed: u64) -> Self {
        let n = hg.num_vertices();
        let mut num_nodes = n;
        // (tail, head, capacity, reverse capacity)
        let mut arcs: Vec<(usize, usize, Weight, Weight)> = Vec::with_capacity(2 * hg.num_pins() + hg.num_edges());
        for e in 0..hg.num_edges() {
            let w = hg.edge_weight(e);
            match hg.pins(e) {
                [u, v] => arcs.push((*u, *v, w, w)),
                pins => {
                    let (e_in, e_out) = (num_nodes, num_nodes + 1);
                    num_nodes += 2;
                    arcs.push((e_in, e_out, w, 0));
                    for &v in pins {
                        arcs.push((v, e_in, INFINITE, 0));
                        arcs.push((e_out, v, INFINITE, 0));
                    }
                }
            }
        }
        let mut degree = vec![0usize; num_nodes + 1];
        for &(u, v, _, _) in &arcs {
            degree[u + 1] += 1;
            degree[v + 1] += 1;
        }
        for i in 0..num_nodes {
            degree[i + 1] += degree[i];
        }
        let first = degree;
        let mut fill = first.clone();
        let total = 2 * arcs.len();
        let mut head = vec![0; total];
        let mut rev = vec![0; total];
        let mut residual = vec![0; total];
        for &(u, v, cap, back) in &arcs {
            let (a, b) = (fill[u], fill[v]);
            fill[u] += 1;
            fill[v] += 1;
            head[a] = v;
            residual[a] = cap;
            rev[a] = b;
            head[b] = u;
            residual[b] = back;
            rev[b] = a;
        }
        let mut net = Self {
            num_vertices: n,
            first,
            head,
            rev,
            residual,
            value: 0,
            excess: vec![0; n],
            level: vec![UNREACHED; num_nodes],
            cursor: vec![0; num_nodes],
        };
        net.permute_arcs(arc_order_seed);
        net
    }

    /// Shuffles every adjacency list and rewires the reverse pointers.
    fn permute_arcs(&mut self, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut position = vec![0; self.head.len()];
        let mut order: Vec<usize> = Vec::new();
        let (mut head, mut rev, mut residual) = (self.head.clone(), self.rev.clone(), self.residual.clone());
        for u in 0..self.num_nodes() {
            let range = self.first[u]..self.first[u + 1];
            order.clear();
            order.extend(range.clone());
            order.shuffle(&mut rng);
            for (slot, &old) in range.zip(&order) {
                position[old] = slot;
                head[slot] = self.head[old];
                residual[slot] = self.residual[old];
            }
        }
        for old in 0..self.head.len() {
            rev[position[old]] = position[self.rev[old]];
        }
        self.head = head;
        self.rev = rev;
        self.residual = residual;
    }

    pub fn num_nodes(&self) -> usize {
        self.first.len() - 1
    }

    /// Flow currently delivered to the sink set.
    pub fn flow_value(&self) -> Weight {
        self.value
    }

    /// Excess stranded at vertex `v`. Always zero for this augmenting-path
    /// solver; a preflow solver would leave excess here.
    pub fn excess(&self, v: usize) -> Weight {
        self.excess[v]
    }

    /// Records that `v` joined the sink set: its excess now counts as
    /// delivered flow.
    pub fn add_sink(&mut self, v: usize) {
        self.value += self.excess[v];
        self.excess[v] = 0;
    }

    #[cfg(test)]
    pub(crate) fn set_excess(&mut self, v: usize, amount: Weight) {
        self.excess[v] = amount;
    }

    /// Augments the current flow until it is maximal for the given terminal
    /// sets or its value exceeds `limit`. Returns the flow value.
    pub fn max_flow(&mut self, source: &[bool], sink: &[bool], limit: Weight) -> Weight {
        let sources: Vec<usize> = (0..self.num_vertices).filter(|&v| source[v]).collect();
        while self.value <= limit && self.build_levels(&sources, sink) {
            let nodes = self.num_nodes();
            self.cursor.copy_from_slice(&self.first[..nodes]);
            for &s in &sources {
                loop {
                    let pushed = self.augment_from(s, sink);
                    if pushed == 0 {
                        break;
                    }
                    self.value += pushed;
                    if self.value > limit {
                        return self.value;
                    }
                }
            }
        }
        self.value
    }

    fn is_sink(&self, sink: &[bool], u: usize) -> bool {
        u < self.num_vertices && sink[u]
    }

    fn build_levels(&mut self, sources: &[usize], sink: &[bool]) -> bool {
        self.level.fill(UNREACHED);
        let mut queue = VecDeque::new();
        for &s in sources {
            self.level[s] = 0;
            queue.push_back(s);
        }
        let mut reached = false;
        while let Some(u) = queue.pop_front() {
            if self.is_sink(sink, u) {
                reached = true;
                continue;
            }
            for a in self.first[u]..self.first[u + 1] {
                let v = self.head[a];
                if self.residual[a] > 0 && self.level[v] == UNREACHED {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        reached
    }

    /// One augmenting path in the level graph from `s`, found iteratively.
    fn augment_from(&mut self, s: usize, sink: &[bool]) -> Weight {
        let mut path: Vec<usize> = Vec::new();
        let mut u = s;
        loop {
            if self.is_sink(sink, u) {
                let bottleneck = path.iter().map(|&a| self.residual[a]).min().unwrap_or(0);
                for &a in &path {
                    self.residual[a] -= bottleneck;
                    self.residual[self.rev[a]] += bottleneck;
                }
                return bottleneck;
            }
            let mut advanced = false;
            while self.cursor[u] < self.first[u + 1] {
                let a = self.cursor[u];
                let v = self.head[a];
                if self.residual[a] > 0 && self.level[v] != UNREACHED && self.level[v] == self.level[u] + 1 {
                    path.push(a);
                    u = v;
                    advanced = true;
                    break;
                }
                self.cursor[u] += 1;
            }
            if advanced {
                continue;
            }
            // dead end: prune u and retreat
            self.level[u] = UNREACHED;
            match path.pop() {
                Some(a) => {
                    u = self.head[self.rev[a]];
                    self.cursor[u] += 1;
                }
                None => return 0,
            }
        }
    }

    /// Vertices reachable from the source set in the residual network: the
    /// source side of the inclusion-minimal minimum cut.
    pub fn source_reachable(&self, source: &[bool]) -> Vec<bool> {
        let mut seen = vec![false; self.num_nodes()];
        let mut queue: VecDeque<usize> = (0..self.num_vertices).filter(|&v| source[v]).collect();
        for &s in &queue {
            seen[s] = true;
        }
        while let Some(u) = queue.pop_front() {
            for a in self.first[u]..self.first[u + 1] {
                let v = self.head[a];
                if self.residual[a] > 0 && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen.truncate(self.num_vertices);
        seen
    }

    /// Vertices that can reach the sink set in the residual network: the
    /// sink side of the inclusion-minimal minimum cut.
    pub fn sink_reachable(&self, sink: &[bool]) -> Vec<bool> {
        let mut seen = vec![false; self.num_nodes()];
        let mut queue: VecDeque<usize> = (0..self.num_vertices).filter(|&v| sink[v]).collect();
        for &t in &queue {
            seen[t] = true;
        }
        while let Some(w) = queue.pop_front() {
            for a in self.first[w]..self.first[w + 1] {
                let u = self.head[a];
                if self.residual[self.rev[a]] > 0 && !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        seen.truncate(self.num_vertices);
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(n: usize, set: &[usize]) -> Vec<bool> {
        let mut f = vec![false; n];
        for &v in set {
            f[v] = true;
        }
        f
    }

    #[test]
    fn path_has_unit_flow() {
        let hg = Hypergraph::unweighted(4, &[vec![0, 1], vec![1, 2], vec![2, 3]]).unwrap();
        let mut net = FlowNetwork::new(&hg, 1);
        assert_eq!(net.max_flow(&flags(4, &[0]), &flags(4, &[3]), Weight::MAX), 1);
        // every edge is a minimum cut; the two extreme ones are found
        assert_eq!(net.source_reachable(&flags(4, &[0])), vec![true, false, false, false]);
        assert_eq!(net.sink_reachable(&flags(4, &[3])), vec![false, false, false, true]);
    }

    #[test]
    fn hyperedge_capacity() {
        // two sources and two sinks share one heavy net and one light net
        let hg = Hypergraph::new(vec![1; 4], vec![5, 2], &[vec![0, 1, 2, 3], vec![0, 3]]).unwrap();
        let mut net = FlowNetwork::new(&hg, 9);
        assert_eq!(net.max_flow(&flags(4, &[0, 1]), &flags(4, &[2, 3]), Weight::MAX), 7);
    }

    #[test]
    fn stops_above_limit() {
        let hg = Hypergraph::new(vec![1; 2], vec![10], &[vec![0, 1]]).unwrap();
        let mut net = FlowNetwork::new(&hg, 0);
        assert!(net.max_flow(&flags(2, &[0]), &flags(2, &[1]), 3) > 3);
    }

    #[test]
    fn excess_is_added_when_joining_the_sink() {
        let hg = Hypergraph::unweighted(3, &[vec![0, 1], vec![1, 2]]).unwrap();
        let mut net = FlowNetwork::new(&hg, 0);
        net.max_flow(&flags(3, &[0]), &flags(3, &[2]), Weight::MAX);
        assert_eq!(net.excess(1), 0);
        net.add_sink(1);
        assert_eq!(net.flow_value(), 1);
        net.set_excess(1, 4);
        net.add_sink(1);
        assert_eq!(net.flow_value(), 5);
        assert_eq!(net.excess(1), 0);
    }

    fn brute_force_min_cut(hg: &Hypergraph, source: &[bool], sink: &[bool]) -> Weight {
        let free: Vec<usize> = (0..hg.num_vertices()).filter(|&v| !source[v] && !sink[v]).collect();
        (0u32..1 << free.len())
            .map(|mask| {
                let mut on_source = source.to_vec();
                for (i, &v) in free.iter().enumerate() {
                    on_source[v] = mask >> i & 1 == 1;
                }
                (0..hg.num_edges())
                    .filter(|&e| {
                        let pins = hg.pins(e);
                        pins.iter().any(|&v| on_source[v] != on_source[pins[0]])
                    })
                    .map(|e| hg.edge_weight(e))
                    .sum::<Weight>()
            })
            .min()
            .unwrap()
    }

    proptest::proptest! {
        #[test]
        fn max_flow_equals_min_cut_and_cut_sides_are_unique(seed in 0u64..100_000, n in 2usize..10, m in 1usize..12) {
            let hg = crate::generate::random_hypergraph(n, m, 2..5, seed);
            let source = flags(n, &[0]);
            let sink = flags(n, &[n - 1]);
            let mut a = FlowNetwork::new(&hg, seed);
            let mut b = FlowNetwork::new(&hg, seed ^ 0x9e37_79b9);
            let value = a.max_flow(&source, &sink, Weight::MAX);
            proptest::prop_assert_eq!(value, brute_force_min_cut(&hg, &source, &sink));
            proptest::prop_assert_eq!(b.max_flow(&source, &sink, Weight::MAX), value);
            proptest::prop_assert_eq!(a.source_reachable(&source), b.source_reachable(&source));
            proptest::prop_assert_eq!(a.sink_reachable(&sink), b.sink_reachable(&sink));
        }
    }
}
