//! Initial partitioning of the coarsest hypergraph by recursive
//! bipartitioning. Every bipartition runs a fixed portfolio of seeded greedy
//! growing attempts, each polished by a single-temperature Jet pass, and
//! keeps the best one.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::hypergraph::{BalanceConstraint, Fraction, Hypergraph, PartitionState, Weight};
use crate::jet::{jet_refine, JetConfig};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct InitialConfig {
    pub portfolio_size: usize,
    /// Jet settings for polishing each attempt; the temperatures are
    /// replaced by a single τ = 0 phase.
    pub jet: JetConfig,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            portfolio_size: 16,
            jet: JetConfig::default(),
        }
    }
}

/// One portfolio member of a bipartition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartitionAttempt {
    pub index: usize,
    pub assignment: Vec<usize>,
    pub balanced: bool,
    pub metric: Weight,
    /// max_i (c(V_i) − perfect_i)
    pub excess: Weight,
}

impl BipartitionAttempt {
    /// Balanced first, then metric, imbalance and attempt index.
    fn key(&self) -> (bool, Weight, Weight, usize) {
        (!self.balanced, self.metric, self.excess, self.index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitialPartition {
    pub assignment: Vec<usize>,
    /// Whether the k-way constraint already holds; if not, the caller's
    /// rebalancer has to repair it.
    pub balanced: bool,
}

/// Tolerance for each level of recursive bipartitioning such that the
/// product over ⌈log2 k⌉ levels stays within 1 + ε:
/// ε' = (1+ε)^(1/⌈log2 k⌉) − 1, rounded down to a multiple of 10⁻⁶.
pub fn adjusted_epsilon(epsilon: Fraction, k: usize) -> Fraction {
    if k <= 2 {
        return epsilon;
    }
    let levels = k.next_power_of_two().trailing_zeros() as f64;
    let eps = (1.0 + epsilon.to_f64()).powf(1.0 / levels) - 1.0;
    Fraction::new((eps * 1e6).floor().max(0.0) as u64, 1_000_000).expect("positive denominator")
}

pub fn initial_partition(
    hg: &Hypergraph,
    k: usize,
    epsilon: Fraction,
    seed: u64,
    config: &InitialConfig,
) -> InitialPartition {
    let n = hg.num_vertices();
    let mut assignment = vec![0; n];
    if k > 1 && n > 0 {
        let final_balance = BalanceConstraint::uniform(hg.total_vertex_weight(), k, epsilon);
        let ctx = Context {
            eps: adjusted_epsilon(epsilon, k),
            limit: final_balance.max_weight(0),
            seed,
            config,
        };
        let vertices: Vec<usize> = (0..n).collect();
        for (v, b) in ctx.recurse(hg, &vertices, 0, k, 1) {
            assignment[v] = b;
        }
    }
    let mut weights = vec![0; k.max(1)];
    for (v, &b) in assignment.iter().enumerate() {
        weights[b] += hg.vertex_weight(v);
    }
    let balanced = BalanceConstraint::uniform(hg.total_vertex_weight(), k.max(1), epsilon).is_balanced(&weights);
    InitialPartition { assignment, balanced }
}

struct Context<'a> {
    eps: Fraction,
    /// Final k-way block limit; a side with k_i blocks never gets more than
    /// k_i times this.
    limit: Weight,
    seed: u64,
    config: &'a InitialConfig,
}

impl Context<'_> {
    /// Splits `vertices` (global IDs, `sub` is their induced hypergraph) into
    /// blocks `first .. first + k`. Returns (global vertex, block) pairs.
    fn recurse(&self, sub: &Hypergraph, vertices: &[usize], first: usize, k: usize, node: u64) -> Vec<(usize, usize)> {
        if k == 1 || vertices.is_empty() {
            return vertices.iter().map(|&v| (v, first)).collect();
        }
        let k0 = k.div_ceil(2);
        let k1 = k - k0;
        let total = sub.total_vertex_weight();
        let perfect = |ki: usize| ((total as i128 * ki as i128 + k as i128 - 1) / k as i128) as Weight;
        let perfect = [perfect(k0), perfect(k1)];
        let max = [
            (perfect[0] + self.eps.mul_floor(perfect[0])).min(self.limit * k0 as Weight),
            (perfect[1] + self.eps.mul_floor(perfect[1])).min(self.limit * k1 as Weight),
        ];
        let balance = BalanceConstraint::per_block(max.to_vec(), perfect.to_vec());
        let sides = bipartition(sub, &balance, self.seed, node, self.config).assignment;
        let split = |side: usize| -> (Vec<usize>, Vec<usize>) {
            let local: Vec<usize> = (0..vertices.len()).filter(|&v| sides[v] == side).collect();
            let global = local.iter().map(|&v| vertices[v]).collect();
            (local, global)
        };
        let (local0, global0) = split(0);
        let (local1, global1) = split(1);
        let (mut left, right) = rayon::join(
            || self.recurse(&sub.induced(&local0), &global0, first, k0, 2 * node),
            || self.recurse(&sub.induced(&local1), &global1, first + k0, k1, 2 * node + 1),
        );
        left.extend(right);
        left
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    pub assignment: Vec<usize>,
    pub attempts: Vec<BipartitionAttempt>,
}

/// Runs the portfolio for one bipartition under `balance` (two blocks).
/// `node` separates the random streams of different bipartitions.
pub fn bipartition(
    hg: &Hypergraph,
    balance: &BalanceConstraint,
    seed: u64,
    node: u64,
    config: &InitialConfig,
) -> Bipartition {
    let jet = JetConfig {
        temperatures: vec![Fraction::ZERO],
        inject_float_reduction: false,
        ..config.jet.clone()
    };
    let attempts: Vec<BipartitionAttempt> = (0..config.portfolio_size.max(1))
        .into_par_iter()
        .map(|index| {
            let mut rng = rng::stream(seed, rng::INITIAL, node << 16 | index as u64);
            let grown = grow(hg, balance, &mut rng);
            let mut state = PartitionState::new(hg, balance.clone(), grown).expect("two-block assignment");
            jet_refine(&mut state, &jet);
            BipartitionAttempt {
                index,
                balanced: state.is_balanced(),
                metric: state.connectivity_metric(),
                excess: state.excess_weight(),
                assignment: state.into_assignment(),
            }
        })
        .collect();
    let best = attempts.iter().min_by_key(|a| a.key()).expect("nonempty portfolio");
    Bipartition {
        assignment: best.assignment.clone(),
        attempts,
    }
}

/// Greedy hypergraph growing: block 0 starts empty and repeatedly absorbs the
/// vertex with the highest gain (ties to the smaller ID) until it reaches its
/// perfect weight. Restarts from the next vertex of a seeded permutation when
/// the frontier runs dry.
/// Greedy hypergraph growing of block 0 from block 1. Gains towards block 0
/// are kept up to date with FM-style deltas: moving `v` changes the gain of
/// another pin of an edge only when the edge gets its first pin in block 0
/// or is left with two pins in block 1.
fn grow(hg: &Hypergraph, balance: &BalanceConstraint, rng: &mut impl rand::Rng) -> Vec<usize> {
    let n = hg.num_vertices();
    let mut block = vec![1usize; n];
    let mut in_block0 = vec![0usize; hg.num_edges()];
    let mut gain: Vec<Weight> = (0..n)
        .map(|v| {
            hg.incident_edges(v)
                .iter()
                .map(|&e| if hg.edge_size(e) == 1 { 0 } else { -hg.edge_weight(e) })
                .sum()
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut next_start = 0;
    let (target, max) = (balance.perfect_weight(0), balance.max_weight(0));
    let mut weight0 = 0;
    let mut heap: BinaryHeap<(Weight, Reverse<usize>)> = BinaryHeap::new();
    while weight0 < target {
        let Some((g, Reverse(v))) = heap.pop() else {
            match order[next_start..].iter().position(|&v| block[v] == 1) {
                Some(offset) => {
                    let v = order[next_start + offset];
                    next_start += offset + 1;
                    heap.push((gain[v], Reverse(v)));
                    continue;
                }
                None => break,
            }
        };
        if block[v] == 0 || g != gain[v] || weight0 + hg.vertex_weight(v) > max {
            continue;
        }
        block[v] = 0;
        weight0 += hg.vertex_weight(v);
        for &e in hg.incident_edges(v) {
            let (a, size) = (in_block0[e], hg.edge_size(e));
            in_block0[e] += 1;
            let remaining = size - a;
            if a != 0 && remaining != 2 {
                continue;
            }
            let delta = hg.edge_weight(e) * (Weight::from(a == 0) + Weight::from(remaining == 2));
            for &u in hg.pins(e) {
                if block[u] == 1 {
                    gain[u] += delta;
                    heap.push((gain[u], Reverse(u)));
                }
            }
        }
    }
    block
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;
    use crate::hypergraph::tests::running_example;

    fn eps(s: &str) -> Fraction {
        s.parse().unwrap()
    }

    /// Growing that recomputes every gain from the partition state.
    fn grow_reference(hg: &Hypergraph, balance: &BalanceConstraint, rng: &mut impl rand::Rng) -> Vec<usize> {
        use crate::hypergraph::Move;
        let n = hg.num_vertices();
        let mut state = PartitionState::new(hg, balance.clone(), vec![1; n]).unwrap();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut next_start = 0;
        let mut heap = BinaryHeap::new();
        while state.block_weight(0) < balance.perfect_weight(0) {
            let Some((gain, Reverse(v))) = heap.pop() else {
                match order[next_start..].iter().position(|&v| state.block(v) == 1) {
                    Some(offset) => {
                        let v = order[next_start + offset];
                        next_start += offset + 1;
                        heap.push((state.gain(v, 0).unwrap(), Reverse(v)));
                        continue;
                    }
                    None => break,
                }
            };
            if state.block(v) == 0 || state.block_weight(0) + hg.vertex_weight(v) > balance.max_weight(0) {
                continue;
            }
            let current = state.gain(v, 0).unwrap();
            if current != gain {
                heap.push((current, Reverse(v)));
                continue;
            }
            state.apply_moves(&[Move { vertex: v, to: 0 }]).unwrap();
            for &e in hg.incident_edges(v) {
                for &u in hg.pins(e) {
                    if state.block(u) == 1 {
                        heap.push((state.gain(u, 0).unwrap(), Reverse(u)));
                    }
                }
            }
        }
        state.into_assignment()
    }

    proptest::proptest! {
        #[test]
        fn incremental_growing_matches_reference(seed in 0u64..10_000, n in 2usize..80, m in 1usize..120) {
            let base = generate::with_random_vertex_weights(&generate::random_hypergraph(n, m, 1..9, seed), 3, seed);
            let edges: Vec<Vec<usize>> = (0..base.num_edges()).map(|e| base.pins(e).to_vec()).collect();
            let edge_weights = (0..edges.len()).map(|e| 1 + (e as Weight * 7 + seed as Weight) % 4).collect();
            let hg = Hypergraph::new(base.vertex_weights().to_vec(), edge_weights, &edges).unwrap();
            let balance = BalanceConstraint::uniform(hg.total_vertex_weight(), 2, eps("0.1"));
            let fast = grow(&hg, &balance, &mut rng::stream(seed, rng::INITIAL, 0));
            let slow = grow_reference(&hg, &balance, &mut rng::stream(seed, rng::INITIAL, 0));
            proptest::prop_assert_eq!(fast, slow);
        }
    }

    #[test]
    fn single_block() {
        let hg = running_example();
        let p = initial_partition(&hg, 1, eps("0.03"), 1, &InitialConfig::default());
        assert_eq!(p.assignment, vec![0; 4]);
        assert!(p.balanced);
    }

    #[test]
    fn running_example_is_optimal() {
        let hg = running_example();
        let p = initial_partition(&hg, 2, eps("0.03"), 1, &InitialConfig::default());
        assert!(p.balanced);
        // all 2^4 assignments with two vertices per block (L_max = 2)
        let optimum = (0..16u32)
            .filter(|m| m.count_ones() == 2)
            .map(|m| hg.connectivity_metric_of(&(0..4).map(|v| (m >> v & 1) as usize).collect::<Vec<_>>()))
            .min()
            .unwrap();
        assert_eq!(optimum, 1);
        assert_eq!(hg.connectivity_metric_of(&p.assignment), 1);
    }

    #[test]
    fn adjusted_tolerance() {
        assert_eq!(adjusted_epsilon(eps("0.03"), 2), eps("0.03"));
        // (1.03)^(1/3) − 1 = 0.009901634…
        assert_eq!(adjusted_epsilon(eps("0.03"), 8), Fraction::new(9901, 1_000_000).unwrap());
        assert_eq!(adjusted_epsilon(eps("0.03"), 5), Fraction::new(9901, 1_000_000).unwrap());
        assert_eq!(adjusted_epsilon(Fraction::ZERO, 64), Fraction::ZERO);
    }

    #[test]
    fn selection_picks_best_attempt() {
        let hg = generate::netlist(300, 350, 4);
        let balance = BalanceConstraint::uniform(hg.total_vertex_weight(), 2, eps("0.03"));
        let result = bipartition(&hg, &balance, 7, 1, &InitialConfig::default());
        assert_eq!(result.attempts.len(), 16);
        let best = result.attempts.iter().min_by_key(|a| a.key()).unwrap();
        assert_eq!(result.assignment, best.assignment);
        assert!(result.attempts.iter().all(|a| !a.balanced || best.metric <= a.metric));
        for a in &result.attempts {
            assert_eq!(hg.connectivity_metric_of(&a.assignment), a.metric);
        }
    }

    #[test]
    fn kway_blocks_are_all_used_and_balanced() {
        for (k, seed) in [(3, 1), (4, 2), (7, 3), (16, 4)] {
            let hg = generate::random_hypergraph(500, 700, 2..6, seed);
            let p = initial_partition(&hg, k, eps("0.03"), seed, &InitialConfig::default());
            assert!(p.assignment.iter().all(|&b| b < k));
            let mut used = vec![false; k];
            for &b in &p.assignment {
                used[b] = true;
            }
            assert!(used.iter().all(|&u| u), "k = {k}");
            let state = PartitionState::new(
                &hg,
                BalanceConstraint::uniform(500, k, eps("0.03")),
                p.assignment.clone(),
            )
            .unwrap();
            assert_eq!(state.is_balanced(), p.balanced);
        }
    }

    #[test]
    fn independent_of_thread_count() {
        let hg = generate::power_law(400, 500, 2..6, 2);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| initial_partition(&hg, 8, eps("0.03"), 5, &InitialConfig::default()))
        };
        let reference = run(1);
        assert_eq!(run(8), reference);
    }
}
