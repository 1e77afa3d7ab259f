use std::cmp::Ordering;

use rayon::prelude::*;

use crate::hypergraph::{Fraction, GainScratch, Move, PartitionState, Weight};

/// Gives up after this many rounds without reaching balance.
const MAX_ROUNDS: usize = 128;

/// Rebalancing priority: `gain / c(v)` for negative gains, `gain · c(v)`
/// otherwise. Compared exactly by cross-multiplication.
#[derive(Debug, Clone, Copy)]
pub struct Priority {
    pub gain: Weight,
    pub weight: Weight,
}

impl Ord for Priority {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self, other);
        match (a.gain >= 0, b.gain >= 0) {
            (true, true) => (a.gain as i128 * a.weight as i128).cmp(&(b.gain as i128 * b.weight as i128)),
            // a.gain / a.weight vs b.gain / b.weight, weights positive
            (false, false) => (a.gain as i128 * b.weight as i128).cmp(&(b.gain as i128 * a.weight as i128)),
            (true, false) => Ordering::Greater,
            (false, true) => Ordering::Less,
        }
    }
}

impl PartialEq for Priority {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Priority {}

impl PartialOrd for Priority {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RebalanceOutcome {
    /// Every vertex moved, in order of the rounds that moved it.
    pub moved: Vec<usize>,
    pub rounds: usize,
    pub balanced: bool,
}

#[derive(Debug, Clone, Copy)]
struct Proposal {
    source: usize,
    priority: Priority,
    vertex: usize,
    to: usize,
}

/// Moves minimal sets of high-priority vertices out of overloaded blocks
/// until the partition is balanced. Locked vertices are never moved. If a
/// round makes no move the deadzone is dropped; if that does not help
/// either the outcome reports failure.
pub fn rebalance(state: &mut PartitionState<'_>, deadzone: Fraction, locked: &[bool]) -> RebalanceOutcome {
    let mut outcome = RebalanceOutcome::default();
    let mut deadzone = deadzone;
    while outcome.rounds < MAX_ROUNDS {
        if state.is_balanced() {
            outcome.balanced = true;
            return outcome;
        }
        let moves = round(state, deadzone, locked);
        outcome.rounds += 1;
        if moves.is_empty() {
            if deadzone.is_zero() {
                return outcome;
            }
            deadzone = Fraction::ZERO;
            continue;
        }
        state.apply_moves(&moves).expect("rebalancing moves are valid");
        outcome.moved.extend(moves.iter().map(|m| m.vertex));
    }
    outcome.balanced = state.is_balanced();
    outcome
}

/// Best valid target for `v`: blocks that stay within their limit when `v`
/// is added and are not in the deadzone. Highest gain, then smaller ID.
fn best_target(
    state: &PartitionState<'_>,
    v: usize,
    eligible: &[bool],
    scratch: &mut GainScratch,
) -> Option<(usize, Weight)> {
    let c = state.hypergraph().vertex_weight(v);
    let fits = |b: usize| eligible[b] && state.block_weight(b) + c <= state.balance().max_weight(b);
    let profile = state.gain_profile(v, scratch);
    let adjacent = state
        .adjacent_blocks(scratch)
        .filter(|&(b, _)| fits(b))
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)));
    if let Some((b, conn)) = adjacent {
        return Some((b, profile.gain(conn)));
    }
    let own = state.block(v);
    (0..state.k())
        .find(|&b| b != own && state.connection(scratch, b) == 0 && fits(b))
        .map(|b| (b, profile.gain(0)))
}

fn round(state: &PartitionState<'_>, deadzone: Fraction, locked: &[bool]) -> Vec<Move> {
    let k = state.k();
    let balance = state.balance();
    let overloaded: Vec<bool> = (0..k).map(|b| state.is_overloaded(b)).collect();
    let eligible: Vec<bool> = (0..k)
        .map(|b| !balance.in_deadzone(b, state.block_weight(b), deadzone))
        .collect();
    let hg = state.hypergraph();
    let mut proposals: Vec<Proposal> = (0..hg.num_vertices())
        .into_par_iter()
        .filter(|&v| {
            let b = state.block(v);
            // heavy vertices would drop the block far below average
            overloaded[b]
                && !locked.get(v).copied().unwrap_or(false)
                && 2 * hg.vertex_weight(v) <= 3 * (state.block_weight(b) - balance.perfect_weight(b))
        })
        .map_init(
            || GainScratch::new(k),
            |scratch, v| {
                best_target(state, v, &eligible, scratch).map(|(to, gain)| Proposal {
                    source: state.block(v),
                    priority: Priority {
                        gain,
                        weight: hg.vertex_weight(v),
                    },
                    vertex: v,
                    to,
                })
            },
        )
        .flatten_iter()
        .collect();
    proposals.par_sort_unstable_by(|a, b| {
        a.source
            .cmp(&b.source)
            .then(b.priority.cmp(&a.priority))
            .then(a.vertex.cmp(&b.vertex))
    });
    let mut groups = Vec::new();
    for i in 0..proposals.len() {
        if i == 0 || proposals[i - 1].source != proposals[i].source {
            groups.push(i);
        }
    }
    groups.push(proposals.len());
    let chosen: Vec<&[Proposal]> = groups
        .par_windows(2)
        .map(|w| {
            let group = &proposals[w[0]..w[1]];
            let source = group[0].source;
            let excess = state.block_weight(source) - balance.max_weight(source);
            let prefix: Vec<Weight> = group
                .iter()
                .scan(0, |sum, p| {
                    *sum += p.priority.weight;
                    Some(*sum)
                })
                .collect();
            // shortest prefix that removes the excess, or everything
            let len = (prefix.partition_point(|&w| w < excess) + 1).min(group.len());
            debug_assert!(prefix[len - 1] < excess || state.block_weight(source) - prefix[len - 1] <= balance.max_weight(source));
            &group[..len]
        })
        .collect();
    chosen
        .into_iter()
        .flatten()
        .map(|p| Move { vertex: p.vertex, to: p.to })
        .collect()
}
