use super::network::FlowNetwork;
use crate::hypergraph::{Hypergraph, Weight};

/// A two-way refinement problem on a local hypergraph: terminal sets, the
/// current side of every vertex and the limits of both sides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowRegion {
    pub hypergraph: Hypergraph,
    pub source: Vec<bool>,
    pub sink: Vec<bool>,
    /// Current side (0 or 1) of every local vertex.
    pub side: Vec<usize>,
    pub max_weight: [Weight; 2],
    pub perfect_weight: [Weight; 2],
}

impl FlowRegion {
    pub fn new(
        hypergraph: Hypergraph,
        source: Vec<bool>,
        sink: Vec<bool>,
        side: Vec<usize>,
        max_weight: [Weight; 2],
        perfect_weight: [Weight; 2],
    ) -> Self {
        let n = hypergraph.num_vertices();
        assert!(source.len() == n && sink.len() == n && side.len() == n);
        assert!(source.iter().any(|&s| s) && sink.iter().any(|&t| t), "empty terminal set");
        for v in 0..n {
            assert!(!(source[v] && sink[v]), "vertex {v} is both source and sink");
            assert!(!source[v] || side[v] == 0, "source {v} not on side 0");
            assert!(!sink[v] || side[v] == 1, "sink {v} not on side 1");
        }
        Self {
            hypergraph,
            source,
            sink,
            side,
            max_weight,
            perfect_weight,
        }
    }

    pub fn num_eligible(&self) -> usize {
        (0..self.side.len()).filter(|&v| !self.source[v] && !self.sink[v]).count()
    }

    /// Weight of the hyperedges with pins on both sides.
    pub fn cut(&self, side: &[usize]) -> Weight {
        let hg = &self.hypergraph;
        (0..hg.num_edges())
            .filter(|&e| {
                let pins = hg.pins(e);
                pins.iter().any(|&v| side[v] != side[pins[0]])
            })
            .map(|e| hg.edge_weight(e))
            .sum()
    }

    /// max over both sides of weight minus perfect weight.
    fn imbalance(&self, weight0: Weight) -> Weight {
        let weight1 = self.hypergraph.total_vertex_weight() - weight0;
        (weight0 - self.perfect_weight[0]).max(weight1 - self.perfect_weight[1])
    }

    fn fits(&self, weight0: Weight) -> bool {
        let weight1 = self.hypergraph.total_vertex_weight() - weight0;
        weight0 <= self.max_weight[0] && weight1 <= self.max_weight[1]
    }

    fn weight_of(&self, set: &[bool]) -> Weight {
        (0..set.len())
            .filter(|&v| set[v])
            .map(|v| self.hypergraph.vertex_weight(v))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoWayResult {
    /// New side of every local vertex.
    pub side: Vec<usize>,
    pub cut: Weight,
    pub piercings: usize,
}

/// Picks the piercing vertex among `candidates`: the smallest ID that does
/// not create an augmenting path (not in `reaches_opposite`), else the
/// smallest ID overall. Candidates rejected by `fits` are skipped.
pub fn select_piercing_vertex(
    candidates: &mut Vec<usize>,
    reaches_opposite: &[bool],
    fits: impl Fn(usize) -> bool,
) -> Option<usize> {
    // discovery order is not deterministic under different flows
    candidates.sort_unstable();
    candidates.dedup();
    let admissible = || candidates.iter().copied().filter(|&v| fits(v));
    admissible()
        .find(|&v| !reaches_opposite[v])
        .or_else(|| admissible().next())
}

/// Vertices outside `side` that share a hyperedge with it.
fn boundary(hg: &Hypergraph, side: &[bool]) -> Vec<usize> {
    let mut out = Vec::new();
    for e in 0..hg.num_edges() {
        let pins = hg.pins(e);
        if pins.iter().any(|&v| side[v]) {
            out.extend(pins.iter().copied().filter(|&v| !side[v]));
        }
    }
    out
}

/// Flow-based incremental bipartitioning. Returns a balanced bipartition
/// whose cut is below `bound`, or equal to it with smaller imbalance than
/// the region's current sides; `None` if there is none within the piercing
/// budget.
pub fn incremental_bipartition(
    region: &FlowRegion,
    bound: Weight,
    arc_order_seed: u64,
    max_piercings: usize,
) -> Option<TwoWayResult> {
    let hg = &region.hypergraph;
    let n = hg.num_vertices();
    let mut network = FlowNetwork::new(hg, arc_order_seed);
    let mut source = region.source.clone();
    let mut sink = region.sink.clone();
    let incumbent = region.imbalance(region.weight_of(&region.side.iter().map(|&s| s == 0).collect::<Vec<_>>()));
    let total = hg.total_vertex_weight();
    let mut piercings = 0;
    loop {
        let flow = network.max_flow(&source, &sink, bound);
        if flow > bound {
            return None;
        }
        let source_side = network.source_reachable(&source);
        let sink_side = network.sink_reachable(&sink);
        let source_weight = region.weight_of(&source_side);
        let sink_weight = region.weight_of(&sink_side);
        // (imbalance, is sink cut, weight of side 0)
        let mut options = Vec::new();
        if region.fits(source_weight) {
            options.push((region.imbalance(source_weight), false));
        }
        if region.fits(total - sink_weight) {
            options.push((region.imbalance(total - sink_weight), true));
        }
        if let Some(&(imbalance, use_sink)) = options.iter().min() {
            if flow < bound || imbalance < incumbent {
                let side = (0..n)
                    .map(|v| {
                        let on_source = if use_sink { !sink_side[v] } else { source_side[v] };
                        usize::from(!on_source)
                    })
                    .collect();
                return Some(TwoWayResult {
                    side,
                    cut: flow,
                    piercings,
                });
            }
            return None;
        }
        // termination check before piercing: later cuts are never smaller
        if flow >= bound || piercings >= max_piercings {
            return None;
        }
        if source_weight <= sink_weight {
            let mut candidates = boundary(hg, &source_side);
            candidates.retain(|&v| !sink[v]);
            let fits = |v: usize| source_weight + hg.vertex_weight(v) <= region.max_weight[0];
            let p = select_piercing_vertex(&mut candidates, &sink_side, fits)?;
            source = source_side;
            source[p] = true;
        } else {
            let mut candidates = boundary(hg, &sink_side);
            candidates.retain(|&v| !source[v]);
            let fits = |v: usize| sink_weight + hg.vertex_weight(v) <= region.max_weight[1];
            let p = select_piercing_vertex(&mut candidates, &source_side, fits)?;
            for v in 0..n {
                if sink_side[v] && !sink[v] {
                    sink[v] = true;
                    network.add_sink(v);
                }
            }
            sink[p] = true;
            network.add_sink(p);
        }
        piercings += 1;
    }
}
