//! Destination-rooted shortest-path trees over active links, ECMP flow
//! loading, and the hybrid variant in which SDN switches take over the
//! traffic that reaches them.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use thiserror::Error;

use crate::topology::{LinkId, NodeId, PhysicalLinkId, Topology};
use crate::traffic::TrafficMatrix;

/// Absolute tolerance for flow conservation and utilization comparisons.
pub const FLOW_EPSILON: f64 = 1e-9;

const CANCEL_EPSILON: f64 = 1e-12;

/// Relative tolerance used to detect equal-cost paths.
const TIE_EPSILON: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RoutingError {
    #[error("demand from {src} to {dst} has no active path")]
    UnroutableDemand { src: NodeId, dst: NodeId },
    #[error("no active links")]
    NoActiveLinks,
}

/// Shortest paths from every node towards one destination.
#[derive(Debug, Clone, PartialEq)]
pub struct SptResult {
    pub destination: NodeId,
    /// Sum of weights of the shortest path to the destination; infinite when
    /// unreachable.
    pub dist: Vec<f64>,
    /// All outgoing active links on some shortest path, ascending by id.
    pub next_hops: Vec<Vec<LinkId>>,
    /// Reachable nodes ordered by non-increasing distance; the destination
    /// comes last.
    order: Vec<NodeId>,
}

impl SptResult {
    pub fn is_reachable(&self, v: NodeId) -> bool {
        self.dist[v.0].is_finite()
    }

    /// Reachable nodes, farthest first.
    pub fn upstream_order(&self) -> &[NodeId] {
        &self.order
    }

    /// Follows the lowest-id next hop from `v` until the destination.
    pub fn lowest_id_path(&self, topo: &Topology, v: NodeId) -> Option<Vec<LinkId>> {
        if !self.is_reachable(v) {
            return None;
        }
        let mut path = Vec::new();
        let mut at = v;
        while at != self.destination {
            let link = *self.next_hops[at.0].first()?;
            path.push(link);
            at = topo.link(link).dst;
        }
        Some(path)
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Frontier {
    dist: f64,
    node: NodeId,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn shortest_path_tree(topo: &Topology, t: NodeId) -> SptResult {
    shortest_path_tree_avoiding(topo, t, None)
}

/// Shortest-path tree to `t` on the active subgraph with `avoid` (if any)
/// removed, including all its incident links.
pub fn shortest_path_tree_avoiding(topo: &Topology, t: NodeId, avoid: Option<NodeId>) -> SptResult {
    let mut buf = TreeBuffers::default();
    buf.build(topo, t, avoid);
    let next_hops = (0..topo.node_count()).map(|v| buf.next_hops(NodeId(v)).to_vec()).collect();
    SptResult { destination: t, dist: buf.dist, next_hops, order: buf.order }
}

/// Working storage for one shortest-path tree, reusable across builds.
#[derive(Default)]
struct TreeBuffers {
    dist: Vec<f64>,
    settled: Vec<bool>,
    /// Upstream order once built.
    order: Vec<NodeId>,
    heap: BinaryHeap<Frontier>,
    /// `hops[hop_range[v].0..hop_range[v].1]` are the next hops of `v`.
    hops: Vec<LinkId>,
    hop_range: Vec<(usize, usize)>,
}

impl TreeBuffers {
    fn build(&mut self, topo: &Topology, t: NodeId, avoid: Option<NodeId>) {
        let n = topo.node_count();
        self.dist.clear();
        self.dist.resize(n, f64::INFINITY);
        self.settled.clear();
        self.settled.resize(n, false);
        self.order.clear();
        self.heap.clear();
        self.hops.clear();
        self.hop_range.clear();
        self.hop_range.resize(n, (0, 0));

        self.dist[t.0] = 0.0;
        self.heap.push(Frontier { dist: 0.0, node: t });
        while let Some(Frontier { dist: d, node: v }) = self.heap.pop() {
            if self.settled[v.0] {
                continue;
            }
            self.settled[v.0] = true;
            self.order.push(v);
            for &l in topo.in_links(v) {
                let link = topo.link(l);
                if !link.active || Some(link.src) == avoid {
                    continue;
                }
                let candidate = d + link.weight;
                if candidate < self.dist[link.src.0] {
                    self.dist[link.src.0] = candidate;
                    self.heap.push(Frontier { dist: candidate, node: link.src });
                }
            }
        }
        self.order.reverse();

        for &v in &self.order {
            if v == t {
                continue;
            }
            let start = self.hops.len();
            let tolerance = TIE_EPSILON * self.dist[v.0].max(1.0);
            for &l in topo.out_links(v) {
                let link = topo.link(l);
                if !link.active || Some(link.dst) == avoid {
                    continue;
                }
                let via = link.weight + self.dist[link.dst.0];
                if via.is_finite() && (via - self.dist[v.0]).abs() <= tolerance {
                    self.hops.push(l);
                }
            }
            self.hop_range[v.0] = (start, self.hops.len());
        }
    }

    fn next_hops(&self, v: NodeId) -> &[LinkId] {
        let (start, end) = self.hop_range[v.0];
        &self.hops[start..end]
    }
}

/// Total ECMP link loads for repeated routing of one matrix, as in
/// [`load_flows_ecmp`] but without per-destination bookkeeping or fresh
/// allocations. Totals are accumulated in the same order, so they match
/// [`RoutingState::flows`] bit for bit.
#[derive(Default)]
pub(crate) struct EcmpLoads {
    tree: TreeBuffers,
    pending: Vec<f64>,
    total: Vec<f64>,
}

impl EcmpLoads {
    pub(crate) fn route(&mut self, topo: &Topology, tm: &TrafficMatrix) -> Result<&[f64], RoutingError> {
        let n = topo.node_count();
        self.total.clear();
        self.total.resize(topo.link_count(), 0.0);
        for t in (0..n).map(NodeId) {
            self.tree.build(topo, t, None);
            self.pending.clear();
            self.pending.extend((0..n).map(|v| tm.get(NodeId(v), t)));
            self.pending[t.0] = 0.0;
            for v in 0..n {
                if self.pending[v] > 0.0 && !self.tree.dist[v].is_finite() {
                    return Err(RoutingError::UnroutableDemand { src: NodeId(v), dst: t });
                }
            }
            for &v in &self.tree.order {
                let amount = self.pending[v.0];
                if v == t || amount == 0.0 {
                    continue;
                }
                let hops = self.tree.next_hops(v);
                let share = amount / hops.len() as f64;
                for &l in hops {
                    self.total[l.0] += share;
                    self.pending[topo.link(l).dst.0] += share;
                }
            }
        }
        Ok(&self.total)
    }
}

/// One tree per destination, indexed by destination id.
pub fn shortest_path_trees(topo: &Topology) -> Vec<SptResult> {
    (0..topo.node_count()).map(|t| shortest_path_tree(topo, NodeId(t))).collect()
}

/// Per-link, per-destination flows plus totals and utilizations.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingState {
    nodes: usize,
    capacity: Vec<f64>,
    active: Vec<bool>,
    /// Link-major: `per_destination[l * nodes + t]`.
    per_destination: Vec<f64>,
    total: Vec<f64>,
}

impl RoutingState {
    /// All-zero state shaped after `topo`.
    pub fn empty(topo: &Topology) -> Self {
        let links = topo.link_count();
        RoutingState {
            nodes: topo.node_count(),
            capacity: topo.links().iter().map(|l| l.capacity).collect(),
            active: topo.links().iter().map(|l| l.active).collect(),
            per_destination: vec![0.0; links * topo.node_count()],
            total: vec![0.0; links],
        }
    }

    pub fn link_count(&self) -> usize {
        self.total.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn flow(&self, l: LinkId) -> f64 {
        self.total[l.0]
    }

    pub fn flow_to(&self, l: LinkId, t: NodeId) -> f64 {
        self.per_destination[l.0 * self.nodes + t.0]
    }

    pub fn flows(&self) -> &[f64] {
        &self.total
    }

    pub fn capacity(&self, l: LinkId) -> f64 {
        self.capacity[l.0]
    }

    pub fn is_active(&self, l: LinkId) -> bool {
        self.active[l.0]
    }

    pub fn utilization(&self, l: LinkId) -> f64 {
        self.total[l.0] / self.capacity[l.0]
    }

    pub fn utilizations(&self) -> Vec<f64> {
        (0..self.total.len()).map(|l| self.utilization(LinkId(l))).collect()
    }

    /// Larger of the two directional utilizations of a physical link.
    pub fn physical_utilization(&self, p: PhysicalLinkId) -> f64 {
        self.utilization(p.forward()).max(self.utilization(p.backward()))
    }

    pub fn add_flow(&mut self, l: LinkId, t: NodeId, volume: f64) {
        self.per_destination[l.0 * self.nodes + t.0] += volume;
        self.total[l.0] += volume;
    }

    /// Takes `volume` towards `t` off link `l`. Values that cancel down to
    /// rounding noise are snapped to zero so idle links compare as idle.
    pub fn remove_flow(&mut self, l: LinkId, t: NodeId, volume: f64) {
        for slot in [&mut self.per_destination[l.0 * self.nodes + t.0], &mut self.total[l.0]] {
            *slot -= volume;
            if slot.abs() < CANCEL_EPSILON {
                *slot = 0.0;
            }
        }
    }

    /// Largest utilization over active links.
    pub fn max_utilization(&self) -> Result<f64, RoutingError> {
        self.active_utilizations().map(|(_, u)| u).reduce(f64::max).ok_or(RoutingError::NoActiveLinks)
    }

    /// Active link with the smallest utilization; ties go to the smallest id.
    pub fn min_utilization_active_link(&self) -> Result<LinkId, RoutingError> {
        self.active_utilizations()
            .reduce(|best, cur| if cur.1 < best.1 { cur } else { best })
            .map(|(l, _)| l)
            .ok_or(RoutingError::NoActiveLinks)
    }

    fn active_utilizations(&self) -> impl Iterator<Item = (LinkId, f64)> + '_ {
        (0..self.total.len()).map(LinkId).filter(|&l| self.active[l.0]).map(|l| (l, self.utilization(l)))
    }
}

/// Traffic handed over to SDN switch `switch` for `destination`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InjectedFlow {
    pub switch: NodeId,
    pub destination: NodeId,
    pub volume: f64,
}

/// Flows forwarded by IP routers, with the traffic that reached an SDN
/// switch held back for allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridRouting {
    pub state: RoutingState,
    /// Sorted by (destination, switch).
    pub injected: Vec<InjectedFlow>,
}

/// Pushes the demand towards `spt.destination` down the tree, splitting
/// evenly over each node's next hops. With `absorb_at_sdn`, an SDN switch
/// keeps everything that arrives at it (including its own demand) and the
/// absorbed amount is returned per switch.
fn propagate(
    topo: &Topology,
    tm: &TrafficMatrix,
    spt: &SptResult,
    absorb_at_sdn: bool,
    state: &mut RoutingState,
    pending: &mut Vec<f64>,
) -> Result<Vec<(NodeId, f64)>, RoutingError> {
    let t = spt.destination;
    pending.clear();
    pending.extend((0..topo.node_count()).map(|v| tm.get(NodeId(v), t)));
    pending[t.0] = 0.0;

    for v in 0..topo.node_count() {
        if pending[v] > 0.0 && !spt.is_reachable(NodeId(v)) {
            return Err(RoutingError::UnroutableDemand { src: NodeId(v), dst: t });
        }
    }

    let mut absorbed = Vec::new();
    for &v in spt.upstream_order() {
        let amount = pending[v.0];
        if v == t || amount == 0.0 {
            continue;
        }
        if absorb_at_sdn && topo.is_sdn(v) {
            absorbed.push((v, amount));
            continue;
        }
        let hops = &spt.next_hops[v.0];
        let share = amount / hops.len() as f64;
        for &l in hops {
            state.add_flow(l, t, share);
            pending[topo.link(l).dst.0] += share;
        }
    }
    Ok(absorbed)
}

/// Plain shortest-path forwarding of `volume` entering at `u` towards
/// `spt.destination`, split evenly over next hops at every node including
/// SDN switches. Returns the per-link contributions.
pub fn default_route(topo: &Topology, spt: &SptResult, u: NodeId, volume: f64) -> Vec<(LinkId, f64)> {
    let mut pending = vec![0.0; topo.node_count()];
    pending[u.0] = volume;
    let mut contributions = Vec::new();
    for &v in spt.upstream_order() {
        let amount = pending[v.0];
        if v == spt.destination || amount == 0.0 {
            continue;
        }
        let hops = &spt.next_hops[v.0];
        let share = amount / hops.len() as f64;
        for &l in hops {
            contributions.push((l, share));
            pending[topo.link(l).dst.0] += share;
        }
    }
    contributions
}

/// Routes every demand hop by hop with equal splitting over ECMP next hops.
/// SDN switches behave as ordinary routers here.
pub fn load_flows_ecmp(topo: &Topology, tm: &TrafficMatrix) -> Result<RoutingState, RoutingError> {
    load_flows_ecmp_with(topo, tm, &shortest_path_trees(topo))
}

pub fn load_flows_ecmp_with(
    topo: &Topology,
    tm: &TrafficMatrix,
    spts: &[SptResult],
) -> Result<RoutingState, RoutingError> {
    let mut state = RoutingState::empty(topo);
    let mut pending = Vec::with_capacity(topo.node_count());
    for spt in spts {
        propagate(topo, tm, spt, false, &mut state, &mut pending)?;
    }
    Ok(state)
}

/// OSPF forwarding at IP routers up to the first SDN switch on each branch.
/// The returned state carries only the IP-forwarded part; the injected flows
/// still need to be placed by the controller.
pub fn route_hybrid(topo: &Topology, tm: &TrafficMatrix, spts: &[SptResult]) -> Result<HybridRouting, RoutingError> {
    let mut state = RoutingState::empty(topo);
    let mut pending = Vec::with_capacity(topo.node_count());
    let mut injected = Vec::new();
    for spt in spts {
        let mut absorbed = propagate(topo, tm, spt, true, &mut state, &mut pending)?;
        absorbed.sort_by_key(|&(u, _)| u);
        injected.extend(absorbed.into_iter().map(|(switch, volume)| InjectedFlow {
            switch,
            destination: spt.destination,
            volume,
        }));
    }
    injected.sort_by_key(|f| (f.destination, f.switch));
    Ok(HybridRouting { state, injected })
}

/// Injected volume `I_ut` keyed by (switch, destination); only positive
/// entries are present.
pub fn injected_sdn_flows(
    topo: &Topology,
    tm: &TrafficMatrix,
    spts: &[SptResult],
) -> Result<BTreeMap<(NodeId, NodeId), f64>, RoutingError> {
    Ok(route_hybrid(topo, tm, spts)?.injected.into_iter().map(|f| ((f.switch, f.destination), f.volume)).collect())
}

/// First demand (in source, destination order) without an active path.
pub fn check_routable(tm: &TrafficMatrix, spts: &[SptResult]) -> Result<(), RoutingError> {
    for (v, t, _) in tm.demands() {
        if !spts[t.0].is_reachable(v) {
            return Err(RoutingError::UnroutableDemand { src: v, dst: t });
        }
    }
    Ok(())
}
