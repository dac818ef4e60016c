//! Hybrid network model: IP routers and SDN switches joined by bidirectional
//! physical links.
//!
//! Every physical link `k` is stored as two directed links with ids `2k`
//! (declared direction) and `2k + 1` (reverse). Link state such as the
//! active flag is toggled per physical link, so both directions always agree.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default capacity of links touching a node of degree < 3 (Gbps).
pub const POP1_CAPACITY: f64 = 2.5;
/// Default capacity of links joining two nodes of degree >= 3 (Gbps).
pub const POP2_CAPACITY: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinkId(pub usize);

/// Index of a bidirectional physical link; owns directed links `2k` and `2k + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhysicalLinkId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl LinkId {
    pub fn index(self) -> usize {
        self.0
    }

    /// The opposite direction of the same physical link.
    pub fn reverse(self) -> LinkId {
        LinkId(self.0 ^ 1)
    }

    pub fn physical(self) -> PhysicalLinkId {
        PhysicalLinkId(self.0 / 2)
    }
}

impl PhysicalLinkId {
    pub fn forward(self) -> LinkId {
        LinkId(2 * self.0)
    }

    pub fn backward(self) -> LinkId {
        LinkId(2 * self.0 + 1)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    IpRouter,
    SdnSwitch,
}

impl NodeKind {
    fn keyword(self) -> &'static str {
        match self {
            NodeKind::IpRouter => "ip",
            NodeKind::SdnSwitch => "sdn",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub name: String,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub id: LinkId,
    pub src: NodeId,
    pub dst: NodeId,
    pub capacity: f64,
    pub weight: f64,
    pub active: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("empty topology")]
    Empty,
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("duplicate link between `{0}` and `{1}`")]
    DuplicateLink(String, String),
    #[error("line {line}: link references undeclared node `{name}`")]
    DanglingNode { line: usize, name: String },
    #[error("self-loop on node `{0}`")]
    SelfLoop(String),
    #[error("capacity must be positive and finite, got {0}")]
    InvalidCapacity(f64),
    #[error("unknown link {0}")]
    UnknownLink(LinkId),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("cannot place {count} SDN switches on {nodes} nodes")]
    SdnCountTooLarge { count: usize, nodes: usize },
    #[error("weight vector has {got} entries, topology has {expected} links")]
    WeightDimension { expected: usize, got: usize },
}

/// Directed graph of routers and switches. Immutable in shape once built;
/// only weights, capacities, node kinds and active flags change afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    nodes: Vec<Node>,
    links: Vec<Link>,
    out_links: Vec<Vec<LinkId>>,
    in_links: Vec<Vec<LinkId>>,
}

#[derive(Debug, Default)]
pub struct TopologyBuilder {
    nodes: Vec<Node>,
    by_name: BTreeMap<String, NodeId>,
    links: Vec<Link>,
    pairs: BTreeSet<(NodeId, NodeId)>,
}

impl TopologyBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, name: &str, kind: NodeKind) -> Result<NodeId, TopologyError> {
        if self.by_name.contains_key(name) {
            return Err(TopologyError::DuplicateNode(name.to_string()));
        }
        let id = NodeId(self.nodes.len());
        self.nodes.push(Node { id, name: name.to_string(), kind });
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.by_name.get(name).copied()
    }

    /// Adds one physical link, materialized as both directions with weight 1.
    pub fn add_link(&mut self, a: NodeId, b: NodeId, capacity: f64) -> Result<PhysicalLinkId, TopologyError> {
        let name = |n: NodeId| self.nodes[n.0].name.clone();
        if a.0 >= self.nodes.len() || b.0 >= self.nodes.len() {
            return Err(TopologyError::UnknownNode(format!("{}", if a.0 >= self.nodes.len() { a } else { b })));
        }
        if a == b {
            return Err(TopologyError::SelfLoop(name(a)));
        }
        if !(capacity > 0.0 && capacity.is_finite()) {
            return Err(TopologyError::InvalidCapacity(capacity));
        }
        let key = (a.min(b), a.max(b));
        if !self.pairs.insert(key) {
            return Err(TopologyError::DuplicateLink(name(a), name(b)));
        }
        let phys = PhysicalLinkId(self.links.len() / 2);
        for (src, dst) in [(a, b), (b, a)] {
            let id = LinkId(self.links.len());
            self.links.push(Link { id, src, dst, capacity, weight: 1.0, active: true });
        }
        Ok(phys)
    }

    pub fn build(self) -> Result<Topology, TopologyError> {
        if self.nodes.is_empty() {
            return Err(TopologyError::Empty);
        }
        Ok(Topology::from_parts(self.nodes, self.links))
    }
}

impl Topology {
    fn from_parts(nodes: Vec<Node>, links: Vec<Link>) -> Self {
        let mut topo = Topology { nodes, links, out_links: Vec::new(), in_links: Vec::new() };
        topo.rebuild_adjacency();
        topo
    }

    fn rebuild_adjacency(&mut self) {
        self.out_links = vec![Vec::new(); self.nodes.len()];
        self.in_links = vec![Vec::new(); self.nodes.len()];
        for link in &self.links {
            self.out_links[link.src.0].push(link.id);
            self.in_links[link.dst.0].push(link.id);
        }
    }

    /// Parses the line-oriented topology format:
    ///
    /// ```text
    /// # comment
    /// node A sdn
    /// node B ip
    /// link A B 10
    /// ```
    ///
    /// Each `link` line declares one bidirectional physical link.
    pub fn parse(text: &str) -> Result<Self, TopologyError> {
        let mut builder = TopologyBuilder::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            let parse_err = |message: String| TopologyError::Parse { line, message };
            match fields[0] {
                "node" => {
                    if fields.len() != 3 {
                        return Err(parse_err("expected `node <id> <ip|sdn>`".into()));
                    }
                    let kind = match fields[2] {
                        "ip" => NodeKind::IpRouter,
                        "sdn" => NodeKind::SdnSwitch,
                        other => return Err(parse_err(format!("unknown node kind `{other}`"))),
                    };
                    builder.add_node(fields[1], kind).map_err(|e| parse_err(e.to_string()))?;
                }
                "link" => {
                    if fields.len() != 4 {
                        return Err(parse_err("expected `link <src> <dst> <capacity>`".into()));
                    }
                    let lookup = |name: &str| {
                        builder
                            .node_id(name)
                            .ok_or_else(|| TopologyError::DanglingNode { line, name: name.to_string() })
                    };
                    let a = lookup(fields[1])?;
                    let b = lookup(fields[2])?;
                    let capacity: f64 =
                        fields[3].parse().map_err(|_| parse_err(format!("invalid capacity `{}`", fields[3])))?;
                    match builder.add_link(a, b, capacity) {
                        Ok(_) => {}
                        Err(e @ TopologyError::DuplicateLink(..)) => return Err(e),
                        Err(e) => return Err(parse_err(e.to_string())),
                    }
                }
                other => return Err(parse_err(format!("unknown directive `{other}`"))),
            }
        }
        builder.build()
    }

    /// Serializes back into the text format; `parse(to_text())` reproduces
    /// nodes, kinds and capacities (weights and active flags are not stored).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for node in &self.nodes {
            out.push_str(&format!("node {} {}\n", node.name, node.kind.keyword()));
        }
        for link in self.links.iter().step_by(2) {
            out.push_str(&format!(
                "link {} {} {}\n",
                self.nodes[link.src.0].name, self.nodes[link.dst.0].name, link.capacity
            ));
        }
        out
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn physical_link_count(&self) -> usize {
        self.links.len() / 2
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id.0]
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().find(|n| n.name == name).map(|n| n.id)
    }

    /// Directed link from `src` to `dst`, if one exists.
    pub fn find_link(&self, src: NodeId, dst: NodeId) -> Option<LinkId> {
        self.out_links[src.0].iter().copied().find(|&l| self.links[l.0].dst == dst)
    }

    /// Same as [`Topology::find_link`] but by node names.
    pub fn link_between(&self, src: &str, dst: &str) -> Option<LinkId> {
        self.find_link(self.node_by_name(src)?, self.node_by_name(dst)?)
    }

    /// Outgoing links of `v`, active or not, in ascending id order.
    pub fn out_links(&self, v: NodeId) -> &[LinkId] {
        &self.out_links[v.0]
    }

    /// Incoming links of `v`, active or not, in ascending id order.
    pub fn in_links(&self, v: NodeId) -> &[LinkId] {
        &self.in_links[v.0]
    }

    pub fn is_sdn(&self, v: NodeId) -> bool {
        self.nodes[v.0].kind == NodeKind::SdnSwitch
    }

    pub fn sdn_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().filter(|n| n.kind == NodeKind::SdnSwitch).map(|n| n.id)
    }

    pub fn set_node_kind(&mut self, v: NodeId, kind: NodeKind) {
        self.nodes[v.0].kind = kind;
    }

    pub fn weights(&self) -> Vec<f64> {
        self.links.iter().map(|l| l.weight).collect()
    }

    pub fn set_weights(&mut self, weights: &[f64]) -> Result<(), TopologyError> {
        if weights.len() != self.links.len() {
            return Err(TopologyError::WeightDimension { expected: self.links.len(), got: weights.len() });
        }
        for (link, &w) in self.links.iter_mut().zip(weights) {
            link.weight = w;
        }
        Ok(())
    }

    pub fn set_weight(&mut self, id: LinkId, weight: f64) {
        self.links[id.0].weight = weight;
    }

    pub fn active_link_count(&self) -> usize {
        self.links.iter().filter(|l| l.active).count()
    }

    pub fn active_physical_links(&self) -> impl Iterator<Item = PhysicalLinkId> + '_ {
        self.links.iter().step_by(2).filter(|l| l.active).map(|l| l.id.physical())
    }

    /// Undirected degree: number of physical links incident to `v`.
    pub fn degree(&self, v: NodeId) -> usize {
        self.out_links[v.0].len()
    }

    /// Applies the POP1/POP2 capacity rule: a link touching any node of
    /// degree < 3 gets `pop1_cap`, a link between two nodes of degree >= 3
    /// gets `pop2_cap`.
    pub fn assign_capacities(&mut self, pop1_cap: f64, pop2_cap: f64) {
        let degrees: Vec<usize> = (0..self.nodes.len()).map(|v| self.degree(NodeId(v))).collect();
        for link in &mut self.links {
            let pop2 = degrees[link.src.0] >= 3 && degrees[link.dst.0] >= 3;
            link.capacity = if pop2 { pop2_cap } else { pop1_cap };
        }
    }

    /// Marks exactly `count` nodes, sampled uniformly without replacement
    /// from a ChaCha8 stream seeded with `seed`, as SDN switches. Every other
    /// node becomes an IP router.
    pub fn place_sdn(&mut self, count: usize, seed: u64) -> Result<(), TopologyError> {
        let n = self.nodes.len();
        if count > n {
            return Err(TopologyError::SdnCountTooLarge { count, nodes: n });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chosen = rand::seq::index::sample(&mut rng, n, count);
        for node in &mut self.nodes {
            node.kind = NodeKind::IpRouter;
        }
        for v in chosen.iter() {
            self.nodes[v].kind = NodeKind::SdnSwitch;
        }
        Ok(())
    }

    /// Turns off the physical link owning `id` (both directions). Returns
    /// `false` if it was already off.
    pub fn deactivate_link(&mut self, id: LinkId) -> Result<bool, TopologyError> {
        self.set_active(id, false)
    }

    /// Turns the physical link owning `id` back on. Returns `false` if it was
    /// already on.
    pub fn reactivate_link(&mut self, id: LinkId) -> Result<bool, TopologyError> {
        self.set_active(id, true)
    }

    fn set_active(&mut self, id: LinkId, active: bool) -> Result<bool, TopologyError> {
        if id.0 >= self.links.len() {
            return Err(TopologyError::UnknownLink(id));
        }
        let changed = self.links[id.0].active != active;
        self.links[id.0].active = active;
        self.links[id.reverse().0].active = active;
        Ok(changed)
    }

    /// Human-readable `(src,dst)` label for a directed link.
    pub fn link_label(&self, id: LinkId) -> String {
        let link = &self.links[id.0];
        format!("({},{})", self.nodes[link.src.0].name, self.nodes[link.dst.0].name)
    }
}
