use std::time::{Duration, Instant};

use rand::RngCore;
use rayon::prelude::*;

use super::bipartition::incremental_bipartition;
use super::region::build_region;
use super::FlowsConfig;
use crate::hash::hash_ids;
use crate::hypergraph::{Move, PartitionState, Weight};
use crate::rng;

/// Block pairs connected by at least one cut hyperedge, as sorted `(i, j)`
/// with `i < j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientGraph {
    pub k: usize,
    pub edges: Vec<(usize, usize)>,
}

impl QuotientGraph {
    pub fn from_state(state: &PartitionState<'_>) -> Self {
        let hg = state.hypergraph();
        let mut edges: Vec<(usize, usize)> = (0..hg.num_edges())
            .into_par_iter()
            .filter(|&e| state.connectivity(e) > 1)
            .flat_map_iter(|e| {
                let blocks: Vec<usize> = state.connectivity_set(e).map(|(b, _)| b).collect();
                let mut pairs = Vec::with_capacity(blocks.len() * (blocks.len() - 1) / 2);
                for (x, &i) in blocks.iter().enumerate() {
                    for &j in &blocks[x + 1..] {
                        pairs.push((i, j));
                    }
                }
                pairs
            })
            .collect();
        edges.par_sort_unstable();
        edges.dedup();
        Self { k: state.k(), edges }
    }
}

/// Greedy maximal matching over `edges`: edges whose higher endpoint degree
/// (within `edges`) is larger come first, then by block IDs.
pub fn maximal_matching(edges: &[(usize, usize)], k: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![0usize; k];
    for &(i, j) in edges {
        degree[i] += 1;
        degree[j] += 1;
    }
    let mut order = edges.to_vec();
    order.sort_unstable_by_key(|&(i, j)| (std::cmp::Reverse(degree[i].max(degree[j])), i, j));
    let mut used = vec![false; k];
    let mut matching = Vec::new();
    for (i, j) in order {
        if !used[i] && !used[j] {
            used[i] = true;
            used[j] = true;
            matching.push((i, j));
        }
    }
    matching
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlowsReport {
    pub rounds: usize,
    pub refinements: usize,
    pub accepted: usize,
    pub improvement: Weight,
    /// Hash of the assignment after each round.
    pub round_hashes: Vec<u64>,
    pub timed_out: bool,
}

/// Cut hyperedges of every scheduled pair, indexed like `pairs`.
fn pair_cut_edges(state: &PartitionState<'_>, pairs: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let k = state.k();
    let mut slot = vec![usize::MAX; k * k];
    for (s, &(i, j)) in pairs.iter().enumerate() {
        slot[i * k + j] = s;
    }
    let hg = state.hypergraph();
    let mut hits: Vec<(usize, usize)> = (0..hg.num_edges())
        .into_par_iter()
        .filter(|&e| state.connectivity(e) > 1)
        .flat_map_iter(|e| {
            let blocks: Vec<usize> = state.connectivity_set(e).map(|(b, _)| b).collect();
            let mut out = Vec::new();
            for (x, &i) in blocks.iter().enumerate() {
                for &j in &blocks[x + 1..] {
                    let s = slot[i * k + j];
                    if s != usize::MAX {
                        out.push((s, e));
                    }
                }
            }
            out
        })
        .collect();
    hits.par_sort_unstable();
    let mut lists = vec![Vec::new(); pairs.len()];
    for (s, e) in hits {
        lists[s].push(e);
    }
    lists
}

/// Two-way flow refinement of one block pair against the current state.
/// Returns the moves and the metric improvement if a better bipartition
/// was found.
fn refine_pair(
    state: &PartitionState<'_>,
    (i, j): (usize, usize),
    cut_edges: &[usize],
    config: &FlowsConfig,
    seed: u64,
) -> Option<(Vec<Move>, Weight)> {
    let pair = build_region(state, [i, j], cut_edges, config.region_scale)?;
    let region = &pair.region;
    let bound = region.cut(&region.side);
    let max_piercings = config.max_piercing_factor.saturating_mul(region.num_eligible());
    let result = incremental_bipartition(region, bound, seed, max_piercings)?;
    let moves: Vec<Move> = (2..region.side.len())
        .filter(|&v| result.side[v] != region.side[v])
        .map(|v| Move {
            vertex: pair.global(v),
            to: pair.blocks[result.side[v]],
        })
        .collect();
    (!moves.is_empty()).then_some((moves, bound - result.cut))
}

/// k-way flow refinement. Each round schedules the quotient graph edges
/// with an active endpoint as a sequence of maximal matchings; the pairs of
/// one matching are refined in parallel, so no block takes part in two
/// refinements at once. Blocks of accepted pairs stay active. Stops after
/// a round without improvement.
pub fn schedule_kway(state: &mut PartitionState<'_>, config: &FlowsConfig, seed: u64) -> FlowsReport {
    let start = Instant::now();
    let budget = config.time_budget_s.map(Duration::from_secs_f64);
    let k = state.k();
    let mut report = FlowsReport::default();
    if k < 2 {
        return report;
    }
    let mut active = vec![true; k];
    'rounds: loop {
        let before = state.connectivity_metric();
        let mut remaining: Vec<(usize, usize)> = QuotientGraph::from_state(state)
            .edges
            .into_iter()
            .filter(|&(i, j)| active[i] || active[j])
            .collect();
        let mut next_active = vec![false; k];
        while !remaining.is_empty() {
            if budget.is_some_and(|b| start.elapsed() > b) {
                report.timed_out = true;
                break 'rounds;
            }
            let matching = maximal_matching(&remaining, k);
            let mut busy = vec![false; k];
            for &(i, j) in &matching {
                assert!(!busy[i] && !busy[j], "block scheduled twice in one matching");
                busy[i] = true;
                busy[j] = true;
            }
            remaining.retain(|p| !matching.contains(p));
            let cut_edges = pair_cut_edges(state, &matching);
            let round = report.rounds as u64;
            let snapshot: &PartitionState<'_> = state;
            let results: Vec<Option<(Vec<Move>, Weight)>> = matching
                .par_iter()
                .zip(cut_edges.par_iter())
                .map(|(&(i, j), edges)| {
                    let stream = (round << 32) ^ ((i as u64) << 16) ^ j as u64;
                    let arc_seed = rng::stream(seed, rng::FLOWS, stream).next_u64();
                    refine_pair(snapshot, (i, j), edges, config, arc_seed)
                })
                .collect();
            report.refinements += matching.len();
            let mut moves = Vec::new();
            let mut expected = 0;
            for (&(i, j), result) in matching.iter().zip(results) {
                if let Some((pair_moves, gain)) = result {
                    moves.extend(pair_moves);
                    expected += gain;
                    report.accepted += 1;
                    next_active[i] = true;
                    next_active[j] = true;
                }
            }
            let metric = state.connectivity_metric();
            state.apply_moves(&moves).expect("flow moves touch disjoint blocks");
            debug_assert_eq!(metric - state.connectivity_metric(), expected);
        }
        state.debug_audit();
        report.rounds += 1;
        report.round_hashes.push(hash_ids(state.assignment()));
        report.improvement += before - state.connectivity_metric();
        if state.connectivity_metric() >= before {
            break;
        }
        active = next_active;
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;
    use crate::hypergraph::{BalanceConstraint, Fraction};

    #[test]
    fn complete_quotient_graph_matching() {
        let edges = vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        assert_eq!(maximal_matching(&edges, 4), vec![(0, 1), (2, 3)]);
        // edges at the degree-3 block go first, lowest IDs among them
        let edges = vec![(0, 1), (1, 2), (1, 3), (2, 3)];
        assert_eq!(maximal_matching(&edges, 4), vec![(0, 1), (2, 3)]);
        let edges = vec![(0, 3), (1, 2), (1, 3), (2, 3)];
        assert_eq!(maximal_matching(&edges, 4), vec![(0, 3), (1, 2)]);
    }

    #[test]
    fn quotient_graph_of_a_grid() {
        let hg = generate::grid(4, 4);
        let a: Vec<usize> = (0..16).map(|v| (v / 8) * 2 + (v % 4) / 2).collect();
        let s = PartitionState::new(&hg, BalanceConstraint::uniform(16, 4, Fraction::ONE), a).unwrap();
        let q = QuotientGraph::from_state(&s);
        assert_eq!(q.edges, vec![(0, 1), (0, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn improves_a_poor_bipartition_and_stays_balanced() {
        let hg = generate::grid(16, 16);
        // checkerboard-ish stripes: every vertical edge is cut
        let a: Vec<usize> = (0..256).map(|v| (v / 16) % 2).collect();
        let mut s = PartitionState::new(
            &hg,
            BalanceConstraint::uniform(256, 2, "0.03".parse().unwrap()),
            a,
        )
        .unwrap();
        let before = s.connectivity_metric();
        let report = schedule_kway(&mut s, &FlowsConfig::default(), 1);
        assert!(s.is_balanced());
        assert!(s.connectivity_metric() < before);
        assert_eq!(report.improvement, before - s.connectivity_metric());
        s.audit().unwrap();
    }
}
