//! Flow-based refinement: two-way incremental bipartitioning on a region
//! around the cut of a block pair, scheduled over the quotient graph as a
//! sequence of maximal matchings.

mod bipartition;
mod network;
mod region;
mod scheduler;

pub use bipartition::{incremental_bipartition, select_piercing_vertex, FlowRegion, TwoWayResult};
pub use network::FlowNetwork;
pub use region::{build_region, PairRegion, SINK_NODE, SOURCE_NODE};
pub use scheduler::{maximal_matching, schedule_kway, FlowsReport, QuotientGraph};

use crate::hypergraph::Fraction;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowsConfig {
    pub enabled: bool,
    /// Wall-clock budget per call in seconds. When it runs out the current
    /// partition is kept; results then depend on machine speed.
    pub time_budget_s: Option<f64>,
    /// Piercing steps per refinement are capped at this times the number of
    /// movable vertices.
    pub max_piercing_factor: usize,
    /// Scales the region size: a side may hold vertices up to
    /// `perfect + scale·(L_max − perfect)` of the other block minus its weight.
    pub region_scale: Fraction,
}

impl Default for FlowsConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            time_budget_s: None,
            max_piercing_factor: 2,
            region_scale: Fraction::ONE,
        }
    }
}
