//! Link pruning driven by weight tuning and SDN splitting, plus the two
//! single-lever baselines.
//!
//! Every variant shares the same loop: optimize the enabled levers, then try
//! to switch off the least-utilized physical link and re-optimize. A removal
//! is kept only if every demand is still routed and no active link exceeds
//! `beta`. The first rejected removal ends the run unless
//! [`SearchConfig::try_next_on_failure`] is set.
//!
//! The full topology must carry the traffic under plain shortest-path
//! routing. If optimizing the full topology overshoots `beta`, that plain
//! routing stands in as the starting state.

use std::fmt;
use std::str::FromStr;

use log::debug;
use thiserror::Error;

use crate::routing::{
    check_routable, default_route, load_flows_ecmp_with, route_hybrid, shortest_path_trees, RoutingError, RoutingState,
    SptResult, FLOW_EPSILON,
};
use crate::sdn_alloc::{apply_allocation, candidate_paths, flow_allocation, AllocError, SdnAllocation};
use crate::topology::{PhysicalLinkId, Topology};
use crate::traffic::{TrafficError, TrafficMatrix};
use crate::weight_search::{neighboring_region_search, ConfigError, SearchConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    /// Weight search and SDN splitting together.
    Heate,
    /// Weight search only; SDN switches forward like IP routers.
    EaOspf,
    /// SDN splitting only; weights stay at their initial values.
    EaFa,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Heate, Algorithm::EaOspf, Algorithm::EaFa];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Heate => "heate",
            Algorithm::EaOspf => "ea-ospf",
            Algorithm::EaFa => "ea-fa",
        }
    }

    fn tunes_weights(self) -> bool {
        matches!(self, Algorithm::Heate | Algorithm::EaOspf)
    }

    fn splits_at_sdn(self) -> bool {
        matches!(self, Algorithm::Heate | Algorithm::EaFa)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "heate" => Ok(Algorithm::Heate),
            "ea-ospf" => Ok(Algorithm::EaOspf),
            "ea-fa" => Ok(Algorithm::EaFa),
            other => Err(format!("unknown algorithm `{other}` (expected heate, ea-ospf or ea-fa)")),
        }
    }
}

/// Why a configuration could not carry the traffic.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Infeasibility {
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error(transparent)]
    Allocation(#[from] AllocError),
    #[error("maximum utilization {max_utilization} exceeds beta {beta}")]
    Overloaded { max_utilization: f64, beta: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeateError {
    #[error("full topology cannot carry the traffic under initial routing: {0}")]
    InitialInfeasible(Infeasibility),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Traffic(#[from] TrafficError),
}

/// A topology whose levers have been optimized, with the resulting flows.
#[derive(Debug, Clone)]
pub struct Evaluation {
    /// Tuned weights and current active flags.
    pub topology: Topology,
    pub state: RoutingState,
    pub allocations: Vec<SdnAllocation>,
    /// Zero when no link is active.
    pub max_utilization: f64,
}

#[derive(Debug, Clone)]
pub struct HeateResult {
    pub algorithm: Algorithm,
    /// Final topology: tuned weights, pruned links inactive.
    pub topology: Topology,
    pub state: RoutingState,
    pub allocations: Vec<SdnAllocation>,
    /// Physical links switched off, in removal order.
    pub removed: Vec<PhysicalLinkId>,
    pub energy_saving_ratio: f64,
    /// Optimization passes executed, including the initial pass and any
    /// rejected removal attempts.
    pub rounds: usize,
    pub max_utilization: f64,
}

impl HeateResult {
    pub fn active_links(&self) -> Vec<PhysicalLinkId> {
        self.topology.active_physical_links().collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.topology.weights()
    }
}

/// Optimizes the levers enabled by `algorithm` on `topo` as it stands and
/// checks the result against `cfg.beta`.
pub fn evaluate(
    topo: &Topology,
    tm: &TrafficMatrix,
    cfg: &SearchConfig,
    algorithm: Algorithm,
) -> Result<Evaluation, Infeasibility> {
    let mut topology = topo.clone();
    if algorithm.tunes_weights() {
        let weights = neighboring_region_search(&topology, tm, cfg)?;
        topology.set_weights(&weights).expect("weights sized from topology");
    }
    let spts = shortest_path_trees(&topology);
    check_routable(tm, &spts)?;

    let (state, allocations) = if algorithm.splits_at_sdn() {
        split_at_switches(&topology, tm, &spts, cfg.beta)?
    } else {
        (load_flows_ecmp_with(&topology, tm, &spts)?, Vec::new())
    };
    let max_utilization = state.max_utilization().unwrap_or(0.0);
    if max_utilization > cfg.beta + FLOW_EPSILON {
        return Err(Infeasibility::Overloaded { max_utilization, beta: cfg.beta });
    }
    Ok(Evaluation { topology, state, allocations, max_utilization })
}

/// Re-splits every flow injected at an SDN switch, one at a time.
fn split_at_switches(
    topology: &Topology,
    tm: &TrafficMatrix,
    spts: &[SptResult],
    beta: f64,
) -> Result<(RoutingState, Vec<SdnAllocation>), Infeasibility> {
    // Every switch starts out forwarding on shortest paths. Each injected
    // flow in turn is withdrawn from its default route and re-split
    // against the loads of everything else, including flows not yet
    // re-split. A flow that does not fit anywhere goes back on its
    // default route; the final check in `evaluate` catches any overload
    // that leaves behind.
    let hybrid = route_hybrid(topology, tm, spts)?;
    let mut state = hybrid.state;
    let mut allocations = Vec::new();
    let defaults: Vec<_> =
        hybrid.injected.iter().map(|f| default_route(topology, &spts[f.destination.0], f.switch, f.volume)).collect();
    for (flow, default) in hybrid.injected.iter().zip(&defaults) {
        for &(l, v) in default {
            state.add_flow(l, flow.destination, v);
        }
    }
    for (flow, default) in hybrid.injected.iter().zip(&defaults) {
        for &(l, v) in default {
            state.remove_flow(l, flow.destination, v);
        }
        let candidates = candidate_paths(topology, &state, flow.switch, flow.destination, beta)?;
        match flow_allocation(candidates, flow.volume, flow.switch, flow.destination) {
            Ok(allocation) => {
                apply_allocation(&mut state, &allocation);
                allocations.push(allocation);
            }
            Err(AllocError::InsufficientCapacity { .. }) => {
                for &(l, v) in default {
                    state.add_flow(l, flow.destination, v);
                }
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok((state, allocations))
}

/// Plain shortest-path routing on the weights as given, with SDN switches
/// forwarding like IP routers.
fn initial_routing(topo: &Topology, tm: &TrafficMatrix, cfg: &SearchConfig) -> Result<Evaluation, Infeasibility> {
    let spts = shortest_path_trees(topo);
    check_routable(tm, &spts)?;
    let state = load_flows_ecmp_with(topo, tm, &spts)?;
    let max_utilization = state.max_utilization().unwrap_or(0.0);
    if max_utilization > cfg.beta + FLOW_EPSILON {
        return Err(Infeasibility::Overloaded { max_utilization, beta: cfg.beta });
    }
    Ok(Evaluation { topology: topo.clone(), state, allocations: Vec::new(), max_utilization })
}

/// Runs the pruning loop and reports each committed state to `observer`,
/// starting with the initial full-topology state.
pub fn run_observed(
    topo: &Topology,
    tm: &TrafficMatrix,
    cfg: &SearchConfig,
    algorithm: Algorithm,
    mut observer: impl FnMut(&Evaluation),
) -> Result<HeateResult, HeateError> {
    cfg.validate()?;
    tm.check_dimension(topo)?;

    let baseline = initial_routing(topo, tm, cfg).map_err(HeateError::InitialInfeasible)?;
    let mut current = match evaluate(topo, tm, cfg, algorithm) {
        Ok(optimized) => optimized,
        Err(reason) => {
            debug!("{algorithm}: optimized full topology rejected, keeping initial routing: {reason}");
            baseline
        }
    };
    observer(&current);
    let mut rounds = 1;
    let mut removed = Vec::new();

    loop {
        let mut order: Vec<(f64, PhysicalLinkId)> =
            current.topology.active_physical_links().map(|p| (current.state.physical_utilization(p), p)).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let attempts = if cfg.try_next_on_failure { order.len() } else { order.len().min(1) };

        let mut committed = false;
        for &(utilization, link) in order.iter().take(attempts) {
            let mut trial = current.topology.clone();
            trial.deactivate_link(link.forward()).expect("active link exists");
            rounds += 1;
            match evaluate(&trial, tm, cfg, algorithm) {
                Ok(next) => {
                    debug!("{algorithm}: removed {} (utilization {utilization})", topo.link_label(link.forward()));
                    current = next;
                    removed.push(link);
                    observer(&current);
                    committed = true;
                    break;
                }
                Err(reason) => {
                    debug!("{algorithm}: keeping {}: {reason}", topo.link_label(link.forward()));
                }
            }
        }
        if !committed {
            break;
        }
    }

    let total = topo.physical_link_count();
    let ratio = if total == 0 { 0.0 } else { removed.len() as f64 / total as f64 };
    Ok(HeateResult {
        algorithm,
        topology: current.topology,
        state: current.state,
        allocations: current.allocations,
        removed,
        energy_saving_ratio: ratio,
        rounds,
        max_utilization: current.max_utilization,
    })
}

pub fn run(
    topo: &Topology,
    tm: &TrafficMatrix,
    cfg: &SearchConfig,
    algorithm: Algorithm,
) -> Result<HeateResult, HeateError> {
    run_observed(topo, tm, cfg, algorithm, |_| {})
}

pub fn run_heate(topo: &Topology, tm: &TrafficMatrix, cfg: &SearchConfig) -> Result<HeateResult, HeateError> {
    run(topo, tm, cfg, Algorithm::Heate)
}

pub fn run_ea_ospf(topo: &Topology, tm: &TrafficMatrix, cfg: &SearchConfig) -> Result<HeateResult, HeateError> {
    run(topo, tm, cfg, Algorithm::EaOspf)
}

pub fn run_ea_fa(topo: &Topology, tm: &TrafficMatrix, cfg: &SearchConfig) -> Result<HeateResult, HeateError> {
    run(topo, tm, cfg, Algorithm::EaFa)
}

/// Fraction of the physical links of `before` that are off in `after` but
/// were on in `before`.
pub fn energy_saving_ratio(before: &Topology, after: &HeateResult) -> f64 {
    let total = before.physical_link_count();
    if total == 0 {
        return 0.0;
    }
    let on_before = before.active_physical_links().count();
    let on_after = after.topology.active_physical_links().count();
    on_before.saturating_sub(on_after) as f64 / total as f64
}
