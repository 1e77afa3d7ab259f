//! The multilevel pipeline: coarsening, initial partitioning, and Jet (plus
//! optional flow) refinement while uncoarsening.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use thiserror::Error;

use crate::coarsening::{coarsen_to_limit, CoarseningConfig};
use crate::flows::{schedule_kway, FlowsConfig};
use crate::hash::{hash_ids, Fnv1a};
use crate::hypergraph::{BalanceConstraint, Fraction, Hypergraph, PartitionState, Weight};
use crate::initial::{initial_partition, InitialConfig};
use crate::io::{format_hash, PhaseHash, PhaseTimes, RunRecord};
use crate::jet::{jet_refine, JetConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Jet refinement only.
    DetJet,
    /// Jet refinement followed by flow-based refinement on the input level.
    DetFlows,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::DetJet => "detjet",
            Preset::DetFlows => "detflows",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "detjet" => Ok(Preset::DetJet),
            "detflows" => Ok(Preset::DetFlows),
            other => Err(ConfigError::UnknownPreset(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("unknown preset {0:?} (expected detjet or detflows)")]
    UnknownPreset(String),
    #[error("unknown configuration key {0:?}")]
    UnknownKey(String),
    #[error("invalid value {value:?} for {key}: {reason}")]
    BadValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("k must be at least 1")]
    ZeroBlocks,
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub k: usize,
    pub epsilon: Fraction,
    pub seed: u64,
    pub preset: Preset,
    pub coarsening: CoarseningConfig,
    pub initial: InitialConfig,
    pub jet: JetConfig,
    pub flows: FlowsConfig,
}

/// Every key accepted by [`Config::set`].
pub const CONFIG_KEYS: &[&str] = &[
    "coarsening.contraction_limit",
    "coarsening.max_cluster_weight_factor",
    "coarsening.max_rated_edge_size",
    "coarsening.prefix_doubling",
    "coarsening.rating_bugfix",
    "coarsening.subrounds",
    "coarsening.swap_prevention",
    "debug.inject_float_reduction",
    "flows.enabled",
    "flows.max_piercing_factor",
    "flows.region_scale",
    "flows.time_budget_s",
    "initial.portfolio_size",
    "jet.deadzone_factor",
    "jet.lock_moves",
    "jet.max_nonimproving",
    "jet.temperatures",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.trim().parse().map_err(|e: T::Err| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
    })
}

impl Config {
    pub fn new(k: usize, epsilon: Fraction, seed: u64, preset: Preset) -> Self {
        Self {
            k,
            epsilon,
            seed,
            preset,
            coarsening: CoarseningConfig::default(),
            initial: InitialConfig::default(),
            jet: JetConfig::default(),
            flows: FlowsConfig {
                enabled: preset == Preset::DetFlows,
                ..FlowsConfig::default()
            },
        }
    }

    /// Overrides one setting from its string form, e.g.
    /// `set("jet.temperatures", "0.5,0")`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let c = &mut self.coarsening;
        match key {
            "coarsening.contraction_limit" => c.contraction_limit = Some(parse(key, value)?),
            "coarsening.max_cluster_weight_factor" => c.max_cluster_weight_factor = parse(key, value)?,
            "coarsening.max_rated_edge_size" => c.max_rated_edge_size = parse(key, value)?,
            "coarsening.prefix_doubling" => c.prefix_doubling = parse(key, value)?,
            "coarsening.rating_bugfix" => c.rating_bugfix = parse(key, value)?,
            "coarsening.subrounds" => c.subrounds = parse(key, value)?,
            "coarsening.swap_prevention" => c.swap_prevention = parse(key, value)?,
            "debug.inject_float_reduction" => self.jet.inject_float_reduction = parse(key, value)?,
            "flows.enabled" => self.flows.enabled = parse(key, value)?,
            "flows.max_piercing_factor" => self.flows.max_piercing_factor = parse(key, value)?,
            "flows.region_scale" => self.flows.region_scale = parse(key, value)?,
            "flows.time_budget_s" => {
                let seconds: f64 = parse(key, value)?;
                self.flows.time_budget_s = (seconds > 0.0).then_some(seconds);
            }
            "initial.portfolio_size" => self.initial.portfolio_size = parse(key, value)?,
            "jet.deadzone_factor" => self.jet.deadzone_factor = parse(key, value)?,
            "jet.lock_moves" => self.jet.lock_moves = parse(key, value)?,
            "jet.max_nonimproving" => self.jet.max_nonimproving = parse(key, value)?,
            "jet.temperatures" => {
                self.jet.temperatures = value
                    .split(',')
                    .filter(|t| !t.trim().is_empty())
                    .map(|t| parse(key, t))
                    .collect::<Result<_, _>>()?;
            }
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.k == 0 {
            return Err(ConfigError::ZeroBlocks);
        }
        self.jet.validate().map_err(ConfigError::Invalid)?;
        if self.initial.portfolio_size == 0 {
            return Err(ConfigError::Invalid("initial.portfolio_size must be positive".into()));
        }
        if self.coarsening.subrounds == 0 {
            return Err(ConfigError::Invalid("coarsening.subrounds must be positive".into()));
        }
        if self.coarsening.max_cluster_weight_factor.is_zero() {
            return Err(ConfigError::Invalid(
                "coarsening.max_cluster_weight_factor must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionResult {
    pub assignment: Vec<usize>,
    pub metric: Weight,
    pub balanced: bool,
    pub imbalance: f64,
    /// Hashes after coarsening, initial partitioning, every Jet temperature
    /// phase and every flow round, in pipeline order.
    pub phase_hashes: Vec<(String, u64)>,
    pub phase_times: PhaseTimes,
    pub total_time: f64,
    pub levels: usize,
}

impl PartitionResult {
    pub fn partition_hash(&self) -> u64 {
        hash_ids(&self.assignment)
    }

    pub fn run_record(&self, instance: &str, config: &Config, threads: usize) -> RunRecord {
        RunRecord {
            balanced: self.balanced,
            epsilon: config.epsilon.to_string(),
            imbalance: self.imbalance,
            instance: instance.to_string(),
            k: config.k,
            metric: self.metric,
            partition_hash: format_hash(self.partition_hash()),
            phase_hashes: self
                .phase_hashes
                .iter()
                .map(|(phase, h)| PhaseHash {
                    hash: format_hash(*h),
                    phase: phase.clone(),
                })
                .collect(),
            phase_times: self.phase_times,
            preset: config.preset.name().to_string(),
            seed: config.seed,
            threads,
            total_time: self.total_time,
        }
    }
}

/// Partitions `hg` into `config.k` blocks. The result depends only on the
/// hypergraph and the configuration, never on the rayon thread pool.
pub fn partition(hg: &Hypergraph, config: &Config) -> Result<PartitionResult, ConfigError> {
    config.validate()?;
    let start = Instant::now();
    let k = config.k;
    let balance = BalanceConstraint::uniform(hg.total_vertex_weight(), k, config.epsilon);
    let mut times = PhaseTimes::default();
    let mut hashes: Vec<(String, u64)> = Vec::new();

    let t = Instant::now();
    let levels = if k > 1 {
        coarsen_to_limit(hg, k, &config.coarsening, config.seed)
    } else {
        Vec::new()
    };
    times.coarsening = t.elapsed().as_secs_f64();
    let mut h = Fnv1a::default();
    for level in &levels {
        h.write_u32(level.hypergraph.num_vertices() as u32);
        for &c in &level.mapping {
            h.write_u32(c as u32);
        }
    }
    hashes.push(("coarsening".into(), h.finish()));

    let t = Instant::now();
    let coarsest = levels.last().map_or(hg, |l| &l.hypergraph);
    let mut assignment = initial_partition(coarsest, k, config.epsilon, config.seed, &config.initial).assignment;
    times.initial = t.elapsed().as_secs_f64();
    hashes.push(("initial".into(), hash_ids(&assignment)));

    let mut metric = 0;
    let mut balanced = true;
    let mut imbalance = 0.0;
    for depth in (0..=levels.len()).rev() {
        let current = if depth == 0 { hg } else { &levels[depth - 1].hypergraph };
        if depth < levels.len() {
            assignment = levels[depth].project(&assignment);
        }
        let mut state = PartitionState::new(current, balance.clone(), assignment).expect("valid assignment");
        if k > 1 {
            let t = Instant::now();
            let report = jet_refine(&mut state, &config.jet);
            times.jet += t.elapsed().as_secs_f64();
            times.rebalance += report.rebalance_time.as_secs_f64();
            for (tau, h) in config.jet.temperatures.iter().zip(&report.phase_hashes) {
                hashes.push((format!("jet[level={depth},tau={tau}]"), *h));
            }
            if depth == 0 && config.flows.enabled {
                let t = Instant::now();
                let report = schedule_kway(&mut state, &config.flows, config.seed);
                times.flows += t.elapsed().as_secs_f64();
                for (round, h) in report.round_hashes.iter().enumerate() {
                    hashes.push((format!("flows[round={round}]"), *h));
                }
            }
        }
        metric = state.connectivity_metric();
        balanced = state.is_balanced();
        imbalance = state.imbalance();
        assignment = state.into_assignment();
    }
    Ok(PartitionResult {
        assignment,
        metric,
        balanced,
        imbalance,
        phase_hashes: hashes,
        phase_times: times,
        total_time: start.elapsed().as_secs_f64(),
        levels: levels.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;
    use crate::hypergraph::tests::running_example as example;

    fn config(k: usize, preset: Preset) -> Config {
        Config::new(k, "0.03".parse().unwrap(), 1, preset)
    }

    #[test]
    fn set_and_validate() {
        let mut c = config(2, Preset::DetJet);
        c.set("jet.temperatures", "0.5, 0.25,0").unwrap();
        assert_eq!(c.jet.temperatures.len(), 3);
        c.set("coarsening.rating_bugfix", "false").unwrap();
        assert!(!c.coarsening.rating_bugfix);
        c.set("flows.time_budget_s", "0").unwrap();
        assert_eq!(c.flows.time_budget_s, None);
        assert!(matches!(c.set("jet.nope", "1"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(c.set("jet.max_nonimproving", "x"), Err(ConfigError::BadValue { .. })));
        c.set("jet.temperatures", "0,0.5").unwrap();
        assert!(c.validate().is_err());
        for key in CONFIG_KEYS {
            assert!(!matches!(config(2, Preset::DetJet).set(key, "1"), Err(ConfigError::UnknownKey(_))), "{key}");
        }
        assert_eq!("detflows".parse::<Preset>().unwrap(), Preset::DetFlows);
        assert!(config(2, Preset::DetFlows).flows.enabled);
        assert_eq!(config(0, Preset::DetJet).validate(), Err(ConfigError::ZeroBlocks));
    }

    #[test]
    fn running_example() {
        let hg = example();
        let result = partition(&hg, &config(2, Preset::DetJet)).unwrap();
        assert_eq!(result.metric, 1);
        assert!(result.balanced);
        let single = partition(&hg, &config(1, Preset::DetJet)).unwrap();
        assert_eq!(single.assignment, vec![0; 4]);
        assert_eq!(single.metric, 0);
    }

    #[test]
    fn multilevel_run_is_balanced_and_reproducible() {
        let hg = generate::netlist(3000, 3500, 5);
        for preset in [Preset::DetJet, Preset::DetFlows] {
            let c = config(4, preset);
            let a = partition(&hg, &c).unwrap();
            assert!(a.levels > 0);
            assert!(a.balanced);
            assert_eq!(hg.connectivity_metric_of(&a.assignment), a.metric);
            let b = partition(&hg, &c).unwrap();
            assert_eq!(a.assignment, b.assignment);
            assert_eq!(a.phase_hashes, b.phase_hashes);
            let record = a.run_record("netlist", &c, 1);
            assert_eq!(record.preset, preset.name());
            assert_eq!(record.phase_hashes.len(), a.phase_hashes.len());
        }
    }
}
