//! Deterministic Jet refinement: unconstrained moves filtered by the
//! afterburner, a rebalancing step, vertex locks and rollback to the best
//! balanced partition seen.

mod afterburner;
mod candidates;
mod rebalance;

use std::time::{Duration, Instant};

use rayon::prelude::*;

pub use afterburner::Afterburner;
pub use candidates::{move_candidates, Candidate};
pub use rebalance::{rebalance, Priority, RebalanceOutcome};

use crate::hash::{hash_ids, Fnv1a};
use crate::hypergraph::{Fraction, Hypergraph, PartitionState, Weight};

#[derive(Debug, Clone, PartialEq)]
pub struct JetConfig {
    /// One refinement phase per temperature, in order.
    pub temperatures: Vec<Fraction>,
    /// A phase ends after this many iterations without a new best
    /// balanced partition.
    pub max_nonimproving: usize,
    pub deadzone_factor: Fraction,
    /// Vertices moved in one iteration may not move in the next.
    pub lock_moves: bool,
    /// Testing hook: drops candidates based on an unordered parallel float
    /// sum, which makes results depend on the thread count.
    pub inject_float_reduction: bool,
}

impl Default for JetConfig {
    fn default() -> Self {
        let frac = |n, d| Fraction::new(n, d).expect("valid constant");
        Self {
            temperatures: vec![frac(3, 4), frac(3, 8), Fraction::ZERO],
            max_nonimproving: 8,
            deadzone_factor: frac(1, 10),
            lock_moves: true,
            inject_float_reduction: false,
        }
    }
}

impl JetConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.temperatures.is_empty() {
            return Err("temperature schedule is empty".into());
        }
        if self.temperatures.iter().any(|&t| t > Fraction::ONE) {
            return Err("temperatures must lie in [0, 1]".into());
        }
        if self.temperatures.windows(2).any(|w| w[1] > w[0]) {
            return Err("temperature schedule must be nonincreasing".into());
        }
        if self.max_nonimproving == 0 {
            return Err("max_nonimproving must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct JetReport {
    pub initial_metric: Weight,
    pub final_metric: Weight,
    pub iterations: usize,
    /// Hash of the assignment after each temperature phase.
    pub phase_hashes: Vec<u64>,
    pub rebalance_time: Duration,
    pub balanced: bool,
    /// The input was imbalanced and the rebalancer could not repair it.
    pub could_not_rebalance: bool,
}

/// What happened in one Jet iteration, for tracing and tests.
#[derive(Debug)]
pub struct Iteration<'a> {
    pub phase: usize,
    pub index: usize,
    /// Every vertex moved in this iteration, by either step.
    pub moved: &'a [usize],
    pub metric: Weight,
    pub balanced: bool,
}

pub fn jet_refine(state: &mut PartitionState<'_>, config: &JetConfig) -> JetReport {
    jet_refine_observed(state, config, |_| {})
}

/// [`jet_refine`] that reports every iteration to `observe`.
pub fn jet_refine_observed(
    state: &mut PartitionState<'_>,
    config: &JetConfig,
    mut observe: impl FnMut(&Iteration<'_>),
) -> JetReport {
    let hg = state.hypergraph();
    let n = hg.num_vertices();
    let mut report = JetReport {
        initial_metric: state.connectivity_metric(),
        ..Default::default()
    };
    if !state.is_balanced() {
        let start = Instant::now();
        let outcome = rebalance(state, config.deadzone_factor, &[]);
        report.rebalance_time += start.elapsed();
        report.could_not_rebalance = !outcome.balanced;
    }
    let mut best: Option<(Weight, Vec<usize>)> =
        state.is_balanced().then(|| (state.connectivity_metric(), state.assignment().to_vec()));
    let mut afterburner = Afterburner::new(n);
    let mut locked = vec![false; n];
    let mut previous: Vec<usize> = Vec::new();
    for (phase, &tau) in config.temperatures.iter().enumerate() {
        for &v in &previous {
            locked[v] = false;
        }
        previous.clear();
        let mut nonimproving = 0;
        let mut index = 0;
        while nonimproving < config.max_nonimproving {
            let mut candidates = move_candidates(state, tau, &locked);
            if config.inject_float_reduction && index == 0 {
                drop_by_float_sum(hg, &mut candidates);
            }
            let moves = afterburner.filter(state, &candidates);
            state.apply_moves(&moves).expect("afterburner moves are valid");
            let mut moved: Vec<usize> = moves.iter().map(|m| m.vertex).collect();
            if !state.is_balanced() {
                let start = Instant::now();
                let locks: &[bool] = if config.lock_moves { &locked } else { &[] };
                let outcome = rebalance(state, config.deadzone_factor, locks);
                report.rebalance_time += start.elapsed();
                moved.extend(outcome.moved);
            }
            index += 1;
            report.iterations += 1;
            let metric = state.connectivity_metric();
            let balanced = state.is_balanced();
            if balanced && best.as_ref().is_none_or(|b| metric < b.0) {
                best = Some((metric, state.assignment().to_vec()));
                nonimproving = 0;
            } else {
                nonimproving += 1;
            }
            observe(&Iteration {
                phase,
                index: index - 1,
                moved: &moved,
                metric,
                balanced,
            });
            // nothing moved and nothing was locked: the next iteration
            // would see exactly the same state
            let stuck = moved.is_empty() && previous.is_empty();
            if config.lock_moves {
                for &v in &previous {
                    locked[v] = false;
                }
                for &v in &moved {
                    locked[v] = true;
                }
            }
            previous = moved;
            if stuck {
                break;
            }
        }
        if let Some((metric, assignment)) = &best {
            if state.connectivity_metric() != *metric || !state.is_balanced() {
                state.restore(assignment);
            }
        }
        state.debug_audit();
        report.phase_hashes.push(hash_ids(state.assignment()));
    }
    report.final_metric = state.connectivity_metric();
    report.balanced = state.is_balanced();
    report
}

/// Fault injection: a parallel `f64` sum whose rounding depends on how
/// rayon splits the range, hashed into a keep/drop decision per candidate.
fn drop_by_float_sum(hg: &Hypergraph, candidates: &mut Vec<Candidate>) {
    let sum: f64 = (0..hg.num_vertices())
        .into_par_iter()
        .map(|v| if v == 0 { 2f64.powi(60) } else { 1.0 })
        .sum();
    candidates.retain(|c| {
        let mut h = Fnv1a::default();
        h.write_bytes(&sum.to_bits().to_le_bytes());
        h.write_u32(c.vertex as u32);
        h.finish() % 2 == 1
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;
    use crate::hypergraph::tests::running_example;
    use crate::hypergraph::BalanceConstraint;

    fn uniform(hg: &Hypergraph, k: usize, eps: &str) -> BalanceConstraint {
        BalanceConstraint::uniform(hg.total_vertex_weight(), k, eps.parse().unwrap())
    }

    #[test]
    fn config_validation() {
        assert!(JetConfig::default().validate().is_ok());
        let bad = JetConfig {
            temperatures: vec![Fraction::ZERO, Fraction::ONE],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = JetConfig {
            temperatures: vec![],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn running_example_reaches_optimum() {
        let hg = running_example();
        // ε = 1/2 allows blocks of weight 3, so one block cannot hold everything
        let balance = uniform(&hg, 2, "0.5");
        let mut s = PartitionState::new(&hg, balance.clone(), vec![0, 1, 0, 1]).unwrap();
        assert_eq!(s.connectivity_metric(), 2);
        let report = jet_refine(&mut s, &JetConfig::default());
        let optimum = (0..16u32)
            .map(|mask| (0..4).map(|v| (mask >> v & 1) as usize).collect::<Vec<_>>())
            .filter(|a| {
                let ones = a.iter().sum::<usize>() as Weight;
                balance.is_balanced(&[4 - ones, ones])
            })
            .map(|a| hg.connectivity_metric_of(&a))
            .min()
            .unwrap();
        assert_eq!(optimum, 1);
        assert_eq!(report.final_metric, 1);
        assert!(report.balanced);
    }

    #[test]
    fn local_optimum_is_kept() {
        let hg = running_example();
        let mut s = PartitionState::new(&hg, uniform(&hg, 2, "0"), vec![0, 0, 1, 1]).unwrap();
        let config = JetConfig {
            temperatures: vec![Fraction::ZERO],
            ..Default::default()
        };
        jet_refine(&mut s, &config);
        assert_eq!(s.assignment(), &[0, 0, 1, 1]);
    }

    #[test]
    fn never_worse_and_locks_hold() {
        for seed in 0..6 {
            let hg = generate::netlist(600, 700, seed);
            let k = 2 + seed as usize % 3 * 3;
            let a: Vec<usize> = (0..600).map(|v| v * k / 600).collect();
            let mut s = PartitionState::new(&hg, uniform(&hg, k, "0.03"), a).unwrap();
            assert!(s.is_balanced());
            let before = s.connectivity_metric();
            let mut last: Vec<usize> = Vec::new();
            let mut last_phase = usize::MAX;
            let report = jet_refine_observed(&mut s, &JetConfig::default(), |it| {
                if it.phase == last_phase {
                    assert!(it.moved.iter().all(|v| !last.contains(v)), "locked vertex moved");
                }
                last = it.moved.to_vec();
                last_phase = it.phase;
            });
            assert!(s.is_balanced());
            assert!(report.final_metric <= before);
            assert_eq!(report.phase_hashes.len(), 3);
            s.audit().unwrap();
        }
    }

    #[test]
    fn imbalanced_input_is_repaired() {
        let hg = generate::grid(20, 20);
        let mut s = PartitionState::new(&hg, uniform(&hg, 4, "0.03"), vec![0; 400]).unwrap();
        let report = jet_refine(&mut s, &JetConfig::default());
        assert!(report.balanced && !report.could_not_rebalance);
        assert!(s.is_balanced());
    }

    #[test]
    fn independent_of_thread_count() {
        let hg = generate::power_law(800, 900, 2..7, 9);
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                let a: Vec<usize> = (0..800).map(|v| v % 8).collect();
                let mut s = PartitionState::new(&hg, uniform(&hg, 8, "0.03"), a).unwrap();
                jet_refine(&mut s, &JetConfig::default());
                s.into_assignment()
            })
        };
        let reference = run(1);
        for threads in [2, 4, 8] {
            assert_eq!(run(threads), reference);
        }
    }
}
