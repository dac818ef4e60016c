//! Traffic matrices: capacity-driven synthetic generation and the
//! `demand <src> <dst> <volume>` file format.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::topology::{NodeId, Topology};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrafficError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown node `{name}`")]
    UnknownNode { line: usize, name: String },
    #[error("demand must be finite and non-negative, got {0}")]
    InvalidVolume(f64),
    #[error("self demand on node {0}")]
    SelfDemand(NodeId),
    #[error("traffic generation needs at least two nodes")]
    TooFewNodes,
    #[error("node {0} owns all outgoing capacity; generator denominator is zero")]
    DegenerateDenominator(NodeId),
    #[error("sigma_max must be positive and finite, got {0}")]
    InvalidSigma(f64),
    #[error("matrix has {got} nodes, topology has {expected}")]
    Dimension { expected: usize, got: usize },
}

/// Dense per-pair demand volumes `h[v][t]`, same units as link capacity.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficMatrix {
    nodes: usize,
    volumes: Vec<f64>,
}

impl TrafficMatrix {
    pub fn zeros(nodes: usize) -> Self {
        TrafficMatrix { nodes, volumes: vec![0.0; nodes * nodes] }
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn get(&self, src: NodeId, dst: NodeId) -> f64 {
        self.volumes[src.0 * self.nodes + dst.0]
    }

    pub fn set(&mut self, src: NodeId, dst: NodeId, volume: f64) -> Result<(), TrafficError> {
        if !(volume.is_finite() && volume >= 0.0) {
            return Err(TrafficError::InvalidVolume(volume));
        }
        if src == dst {
            if volume == 0.0 {
                return Ok(());
            }
            return Err(TrafficError::SelfDemand(src));
        }
        self.volumes[src.0 * self.nodes + dst.0] = volume;
        Ok(())
    }

    /// Non-zero demands in (source, destination) order.
    pub fn demands(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.volumes
            .iter()
            .enumerate()
            .filter(|(_, &h)| h > 0.0)
            .map(move |(i, &h)| (NodeId(i / self.nodes), NodeId(i % self.nodes), h))
    }

    /// Total demand destined to `t`.
    pub fn inbound(&self, t: NodeId) -> f64 {
        (0..self.nodes).map(|v| self.volumes[v * self.nodes + t.0]).sum()
    }

    pub fn total(&self) -> f64 {
        self.volumes.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.volumes.iter().all(|&h| h == 0.0)
    }

    pub fn check_dimension(&self, topo: &Topology) -> Result<(), TrafficError> {
        if self.nodes != topo.node_count() {
            return Err(TrafficError::Dimension { expected: topo.node_count(), got: self.nodes });
        }
        Ok(())
    }

    /// Writes `demand` lines for every non-zero entry. Volumes use Rust's
    /// shortest round-trip float formatting, so `parse(to_text(m)) == m`.
    pub fn to_text(&self, topo: &Topology) -> String {
        let mut out = String::from("# traffic matrix\n");
        out.push_str(&format!("# nodes {}\n", self.nodes));
        for (v, t, h) in self.demands() {
            out.push_str(&format!("demand {} {} {}\n", topo.node(v).name, topo.node(t).name, h));
        }
        out
    }

    /// Parses `demand <src> <dst> <volume>` lines against the node names of
    /// `topo`. Repeated pairs are summed.
    pub fn parse(text: &str, topo: &Topology) -> Result<Self, TrafficError> {
        let mut tm = TrafficMatrix::zeros(topo.node_count());
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields[0] != "demand" || fields.len() != 4 {
                return Err(TrafficError::Parse { line, message: "expected `demand <src> <dst> <volume>`".into() });
            }
            let lookup = |name: &str| {
                topo.node_by_name(name).ok_or_else(|| TrafficError::UnknownNode { line, name: name.to_string() })
            };
            let (v, t) = (lookup(fields[1])?, lookup(fields[2])?);
            let volume: f64 = fields[3]
                .parse()
                .map_err(|_| TrafficError::Parse { line, message: format!("invalid volume `{}`", fields[3]) })?;
            let summed = tm.get(v, t) + volume;
            tm.set(v, t, summed).map_err(|e| TrafficError::Parse { line, message: e.to_string() })?;
        }
        Ok(tm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorParams {
    /// Upper end of the uniform range for the per-source scale factor.
    pub sigma_max: f64,
    pub seed: u64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams { sigma_max: 0.1, seed: 0 }
    }
}

/// Draws one scale factor per source node, uniformly from `[0, sigma_max]`,
/// from a ChaCha8 stream seeded with `seed`.
pub fn draw_sigmas(nodes: usize, params: &GeneratorParams) -> Result<Vec<f64>, TrafficError> {
    if !(params.sigma_max > 0.0 && params.sigma_max.is_finite()) {
        return Err(TrafficError::InvalidSigma(params.sigma_max));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    Ok((0..nodes).map(|_| rng.gen_range(0.0..=params.sigma_max)).collect())
}

/// Capacity-driven demand with explicit per-source scale factors:
///
/// `d_ij = sigma_i * out(i) * in(j) / (total - out(i))`
///
/// where `out(i)` and `in(j)` are the summed capacities of the directed
/// links leaving `i` and entering `j`, and `total` sums every directed link.
pub fn capacity_matrix(topo: &Topology, sigmas: &[f64]) -> Result<TrafficMatrix, TrafficError> {
    let n = topo.node_count();
    if n < 2 {
        return Err(TrafficError::TooFewNodes);
    }
    assert_eq!(sigmas.len(), n, "one sigma per node");
    let mut out_cap = vec![0.0; n];
    let mut in_cap = vec![0.0; n];
    let mut total = 0.0;
    for link in topo.links() {
        out_cap[link.src.0] += link.capacity;
        in_cap[link.dst.0] += link.capacity;
        total += link.capacity;
    }
    let mut tm = TrafficMatrix::zeros(n);
    for i in 0..n {
        let denominator = total - out_cap[i];
        if denominator <= 0.0 {
            return Err(TrafficError::DegenerateDenominator(NodeId(i)));
        }
        for j in (0..n).filter(|&j| j != i) {
            let d = sigmas[i] * out_cap[i] * in_cap[j] / denominator;
            tm.set(NodeId(i), NodeId(j), d)?;
        }
    }
    Ok(tm)
}

/// Seeded synthetic matrix: one sigma per source drawn by [`draw_sigmas`],
/// then [`capacity_matrix`].
pub fn generate_matrix(topo: &Topology, params: &GeneratorParams) -> Result<TrafficMatrix, TrafficError> {
    if topo.node_count() < 2 {
        return Err(TrafficError::TooFewNodes);
    }
    let sigmas = draw_sigmas(topo.node_count(), params)?;
    capacity_matrix(topo, &sigmas)
}

/// Seeds for a batch of `count` matrices: `base_seed + index`.
pub fn batch_seeds(base_seed: u64, count: usize) -> Vec<u64> {
    (0..count as u64).map(|i| base_seed.wrapping_add(i)).collect()
}
