//! Controller-side splitting of injected traffic at an SDN switch.
//!
//! Each outgoing link of the switch yields at most one candidate: the
//! cheapest simple path to the destination that starts with that link.
//! Traffic is then packed onto the busiest candidates first, which
//! concentrates load and leaves other links idle.
//!
//! "Busiest" ranks paths by their least-loaded link, highest first, and only
//! then by headroom. Ranking on headroom alone favours long detours that
//! cross one hot link, and those spread load over lightly used links instead
//! of draining them.

use thiserror::Error;

use crate::routing::{shortest_path_tree_avoiding, RoutingState, FLOW_EPSILON};
use crate::topology::{LinkId, NodeId, Topology};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AllocError {
    #[error("no outgoing link of {switch} reaches {destination}")]
    NoPath { switch: NodeId, destination: NodeId },
    #[error("injected volume {requested} at {switch} towards {destination} exceeds available capacity {available}")]
    InsufficientCapacity { switch: NodeId, destination: NodeId, requested: f64, available: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePath {
    /// Links from the switch to the destination, in order.
    pub links: Vec<LinkId>,
    /// `min(c_l * beta - x_l)` over the path, floored at zero.
    pub available_capacity: f64,
    /// `min(x_l / c_l)` over the path.
    pub least_utilization: f64,
}

impl CandidatePath {
    fn shares_link_with(&self, other: &CandidatePath) -> bool {
        self.links.iter().any(|l| other.links.contains(l))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdnAllocation {
    pub switch: NodeId,
    pub destination: NodeId,
    /// Candidates in allocation order with the volume placed on each.
    pub assignments: Vec<(CandidatePath, f64)>,
}

impl SdnAllocation {
    pub fn total(&self) -> f64 {
        self.assignments.iter().map(|(_, v)| v).sum()
    }
}

fn headroom(state: &RoutingState, links: &[LinkId], beta: f64) -> f64 {
    links.iter().map(|&l| state.capacity(l) * beta - state.flow(l)).fold(f64::INFINITY, f64::min).max(0.0)
}

/// One candidate per active outgoing link of `u` that can reach `t`
/// without revisiting `u`, computed on current weights and loads.
pub fn candidate_paths(
    topo: &Topology,
    state: &RoutingState,
    u: NodeId,
    t: NodeId,
    beta: f64,
) -> Result<Vec<CandidatePath>, AllocError> {
    let spt = shortest_path_tree_avoiding(topo, t, Some(u));
    let mut candidates = Vec::new();
    for &first in topo.out_links(u) {
        let link = topo.link(first);
        if !link.active {
            continue;
        }
        let Some(tail) = spt.lowest_id_path(topo, link.dst) else {
            continue;
        };
        let mut links = Vec::with_capacity(tail.len() + 1);
        links.push(first);
        links.extend(tail);
        let available_capacity = headroom(state, &links, beta);
        let least_utilization = links.iter().map(|&l| state.utilization(l)).fold(f64::INFINITY, f64::min);
        candidates.push(CandidatePath { links, available_capacity, least_utilization });
    }
    if candidates.is_empty() {
        return Err(AllocError::NoPath { switch: u, destination: t });
    }
    Ok(candidates)
}

/// Greedy fill: sort candidates by descending least utilization, then
/// ascending headroom, hop count and link-id sequence; place
/// `min(remaining, headroom)` on each in turn and charge the placed volume
/// against every later candidate sharing a link with it.
pub fn flow_allocation(
    mut candidates: Vec<CandidatePath>,
    injected: f64,
    switch: NodeId,
    destination: NodeId,
) -> Result<SdnAllocation, AllocError> {
    candidates.sort_by(|a, b| {
        b.least_utilization
            .total_cmp(&a.least_utilization)
            .then(a.available_capacity.total_cmp(&b.available_capacity))
            .then(a.links.len().cmp(&b.links.len()))
            .then_with(|| a.links.cmp(&b.links))
    });
    let mut caps: Vec<f64> = candidates.iter().map(|c| c.available_capacity).collect();
    let mut volumes = vec![0.0; candidates.len()];
    let mut remaining = injected;

    for i in 0..candidates.len() {
        if remaining <= FLOW_EPSILON {
            break;
        }
        let volume = remaining.min(caps[i].max(0.0));
        volumes[i] = volume;
        remaining -= volume;
        for j in i + 1..candidates.len() {
            if candidates[j].shares_link_with(&candidates[i]) {
                caps[j] -= volume;
            }
        }
    }

    if remaining > FLOW_EPSILON {
        return Err(AllocError::InsufficientCapacity {
            switch,
            destination,
            requested: injected,
            available: injected - remaining,
        });
    }
    // Absorb rounding so the split sums to the injected volume.
    if let Some(last) = volumes.iter_mut().rev().find(|v| **v > 0.0) {
        *last += remaining;
    }
    Ok(SdnAllocation { switch, destination, assignments: candidates.into_iter().zip(volumes).collect() })
}

/// Adds the allocated volumes to the link flows of `state`.
pub fn apply_allocation(state: &mut RoutingState, allocation: &SdnAllocation) {
    for (path, volume) in &allocation.assignments {
        if *volume == 0.0 {
            continue;
        }
        for &l in &path.links {
            state.add_flow(l, allocation.destination, *volume);
        }
    }
}
