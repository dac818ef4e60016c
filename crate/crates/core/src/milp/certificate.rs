use serde::{Deserialize, Serialize};

use crate::heate::{Evaluation, HeateResult};
use crate::routing::{shortest_path_tree, RoutingState};
use crate::topology::{LinkId, NodeId, PhysicalLinkId, Topology};

/// A complete assignment of the model's variables for one topology.
///
/// Per-destination tables are indexed `[link][t]` or `[node][t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionCertificate {
    /// `w_l`
    pub weights: Vec<f64>,
    /// `x_l`
    pub loads: Vec<f64>,
    /// `x_lt`
    pub flows: Vec<Vec<f64>>,
    /// `r_vt`
    pub distances: Vec<Vec<f64>>,
    /// `y_vt`
    pub split: Vec<Vec<f64>>,
    /// `u_lt`
    pub on_path: Vec<Vec<bool>>,
    /// `p(l)`
    pub active: Vec<bool>,
    pub big_m: f64,
}

impl SolutionCertificate {
    /// Certificate for a routed state. Active-link weights are kept; every
    /// inactive link gets a weight larger than any path over active links, so
    /// it never lies on a shortest path that carries traffic.
    pub fn from_state(topo: &Topology, state: &RoutingState) -> Self {
        let max_active = topo.links().iter().filter(|l| l.active).map(|l| l.weight).fold(1.0, f64::max);
        let heavy = topo.node_count() as f64 * max_active + 1.0;
        let mut priced = topo.clone();
        for link in topo.links().iter().filter(|l| !l.active) {
            priced.set_weight(link.id, heavy);
        }
        assemble(&priced, |l, t| state.flow_to(l, t))
    }

    pub fn from_result(result: &HeateResult) -> Self {
        Self::from_state(&result.topology, &result.state)
    }

    pub fn from_evaluation(evaluation: &Evaluation) -> Self {
        Self::from_state(&evaluation.topology, &evaluation.state)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate fields are finite")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

/// Fills in every variable from the weights and active flags of `topo` and
/// the per-destination flows.
///
/// Distances are shortest paths over all links, on or off, since the model
/// does not tie `w_l` to `p(l)`. Weights and distances are scaled together so
/// every non-shortest IP-sourced link has slack of at least 1; unreachable
/// pairs get a distance no smaller than any reachable one.
pub(crate) fn assemble(topo: &Topology, flow: impl Fn(LinkId, NodeId) -> f64) -> SolutionCertificate {
    let n = topo.node_count();
    let m = topo.link_count();
    let mut full = topo.clone();
    for p in 0..topo.physical_link_count() {
        full.reactivate_link(PhysicalLinkId(p).forward()).expect("link exists");
    }
    let spts: Vec<_> = (0..n).map(|t| shortest_path_tree(&full, NodeId(t))).collect();

    let mut on_path = vec![vec![false; n]; m];
    for (t, spt) in spts.iter().enumerate() {
        for hops in &spt.next_hops {
            for &l in hops {
                on_path[l.0][t] = true;
            }
        }
    }

    let mut min_slack = f64::INFINITY;
    for link in topo.links().iter().filter(|l| !topo.is_sdn(l.src)) {
        for (t, spt) in spts.iter().enumerate() {
            let (rs, rd) = (spt.dist[link.src.0], spt.dist[link.dst.0]);
            if on_path[link.id.0][t] || !rs.is_finite() || !rd.is_finite() {
                continue;
            }
            let slack = rd + link.weight - rs;
            if slack > 0.0 {
                min_slack = min_slack.min(slack);
            }
        }
    }
    let scale = if min_slack < 1.0 { 1.0 / min_slack } else { 1.0 };

    let weights: Vec<f64> = topo.links().iter().map(|l| l.weight * scale).collect();
    let max_weight = weights.iter().copied().fold(1.0, f64::max);
    let unreachable = n.saturating_sub(1) as f64 * max_weight;
    let distances = (0..n)
        .map(|v| {
            spts.iter().map(|spt| if spt.dist[v].is_finite() { spt.dist[v] * scale } else { unreachable }).collect()
        })
        .collect();

    let flows: Vec<Vec<f64>> = (0..m).map(|l| (0..n).map(|t| flow(LinkId(l), NodeId(t))).collect()).collect();
    let loads = flows.iter().map(|row| row.iter().sum()).collect();
    let mut split = vec![vec![0.0; n]; n];
    for link in topo.links() {
        for t in 0..n {
            if on_path[link.id.0][t] {
                let y = &mut split[link.src.0][t];
                *y = f64::max(*y, flows[link.id.0][t]);
            }
        }
    }

    SolutionCertificate {
        weights,
        loads,
        flows,
        distances,
        split,
        on_path,
        active: topo.links().iter().map(|l| l.active).collect(),
        big_m: n as f64 * max_weight + 1.0,
    }
}

/// Number of active directed links.
pub fn evaluate_objective(cert: &SolutionCertificate) -> usize {
    cert.active.iter().filter(|&&p| p).count()
}
