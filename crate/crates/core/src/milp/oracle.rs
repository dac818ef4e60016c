//! Exact optimum for toy instances by enumeration.
//!
//! Forwarding at IP routers depends only on the weights, because distances
//! run over every link whether it is on or off. So each weight assignment is
//! reduced to its next-hop table, duplicates are dropped, and every
//! (link subset, next-hop table) pair is tested with one multi-commodity LP:
//! SDN switches may use any active outgoing link, IP routers only their
//! shortest-path links with an equal share on each, and no commodity may
//! leave its destination. Subsets are visited smallest first, so the first
//! feasible pair is optimal.

use microlp::{ComparisonOp, Error as LpError, LinearExpr, OptimizationDirection, Problem, SolveOutcome, Variable};
use thiserror::Error;

use super::certificate::assemble;
use super::{Regime, SolutionCertificate};
use crate::routing::shortest_path_tree;
use crate::topology::{LinkId, NodeId, PhysicalLinkId, Topology};
use crate::traffic::{TrafficError, TrafficMatrix};

/// Largest instance the oracle accepts, in directed links.
pub const ORACLE_MAX_LINKS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("instance has {links} directed links; the oracle handles at most {max}")]
    InstanceTooLarge { links: usize, max: usize },
    #[error("weight set must be non-empty with every weight at least 1")]
    WeightSet,
    #[error("no link subset and weight assignment carries the traffic")]
    Infeasible,
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error("LP solver failed: {0}")]
    Solver(String),
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    /// Active directed links in the optimum.
    pub objective: usize,
    pub active: Vec<PhysicalLinkId>,
    pub weights: Vec<f64>,
    pub certificate: SolutionCertificate,
}

/// Shortest-path next hops of every IP router towards every destination
/// with demand, `[dest index][node]`.
type NextHopTable = Vec<Vec<Vec<LinkId>>>;

pub fn brute_force_optimal(
    topo: &Topology,
    tm: &TrafficMatrix,
    beta: f64,
    weight_set: &[f64],
) -> Result<OracleResult, OracleError> {
    brute_force_optimal_with(topo, tm, beta, weight_set, Regime::Strict)
}

/// In [`Regime::Strict`] weight assignments that leave any IP router with
/// tied next hops (towards any destination) are skipped; in
/// [`Regime::Ecmp`] ties are allowed and split equally.
pub fn brute_force_optimal_with(
    topo: &Topology,
    tm: &TrafficMatrix,
    beta: f64,
    weight_set: &[f64],
    regime: Regime,
) -> Result<OracleResult, OracleError> {
    let m = topo.link_count();
    if m > ORACLE_MAX_LINKS {
        return Err(OracleError::InstanceTooLarge { links: m, max: ORACLE_MAX_LINKS });
    }
    if weight_set.is_empty() || weight_set.iter().any(|&w| !(w >= 1.0) || !w.is_finite()) {
        return Err(OracleError::WeightSet);
    }
    tm.check_dimension(topo)?;

    let n = topo.node_count();
    let dests: Vec<NodeId> = (0..n).map(NodeId).filter(|&t| tm.inbound(t) > 0.0).collect();
    let tables = forwarding_tables(topo, &dests, weight_set, regime);

    let physical = topo.physical_link_count();
    let mut masks: Vec<u32> = (0..1u32 << physical).collect();
    masks.sort_by_key(|mask| (mask.count_ones(), *mask));

    for mask in masks {
        let on = |l: LinkId| mask & (1 << l.physical().0) != 0;
        for (weights, table) in &tables {
            let Some(flows) = route_lp(topo, tm, beta, &dests, table, &on)? else {
                continue;
            };
            let mut witness = topo.clone();
            witness.set_weights(weights).expect("one weight per link");
            for p in (0..physical).map(PhysicalLinkId) {
                if on(p.forward()) {
                    witness.reactivate_link(p.forward()).expect("link exists");
                } else {
                    witness.deactivate_link(p.forward()).expect("link exists");
                }
            }
            let certificate = assemble(&witness, |l, t| flows[l.0][t.0]);
            return Ok(OracleResult {
                objective: 2 * mask.count_ones() as usize,
                active: witness.active_physical_links().collect(),
                weights: weights.clone(),
                certificate,
            });
        }
    }
    Err(OracleError::Infeasible)
}

/// Distinct next-hop tables over all weight assignments, each with the first
/// assignment that produced it, in enumeration order.
fn forwarding_tables(
    topo: &Topology,
    dests: &[NodeId],
    weight_set: &[f64],
    regime: Regime,
) -> Vec<(Vec<f64>, NextHopTable)> {
    let n = topo.node_count();
    let m = topo.link_count();
    let mut full = topo.clone();
    for p in 0..topo.physical_link_count() {
        full.reactivate_link(PhysicalLinkId(p).forward()).expect("link exists");
    }

    let mut tables: Vec<(Vec<f64>, NextHopTable)> = Vec::new();
    let mut digits = vec![0usize; m];
    'assignments: loop {
        let weights: Vec<f64> = digits.iter().map(|&d| weight_set[d]).collect();
        full.set_weights(&weights).expect("one weight per link");

        let mut table = vec![Vec::new(); dests.len()];
        let mut valid = true;
        for t in (0..n).map(NodeId) {
            let spt = shortest_path_tree(&full, t);
            let bad_router = topo.nodes().iter().any(|v| {
                let hops = spt.next_hops[v.id.0].len();
                v.id != t && !topo.is_sdn(v.id) && (hops == 0 || (regime == Regime::Strict && hops > 1))
            });
            if bad_router {
                valid = false;
                break;
            }
            if let Some(k) = dests.iter().position(|&d| d == t) {
                table[k] = spt.next_hops;
            }
        }
        if valid && !tables.iter().any(|(_, seen)| *seen == table) {
            tables.push((weights, table));
        }

        for digit in digits.iter_mut() {
            *digit += 1;
            if *digit < weight_set.len() {
                continue 'assignments;
            }
            *digit = 0;
        }
        break;
    }
    tables
}

/// Per-destination link flows if the active links can carry the traffic
/// under the given forwarding, `[link][node]`.
fn route_lp(
    topo: &Topology,
    tm: &TrafficMatrix,
    beta: f64,
    dests: &[NodeId],
    table: &NextHopTable,
    on: &impl Fn(LinkId) -> bool,
) -> Result<Option<Vec<Vec<f64>>>, OracleError> {
    let n = topo.node_count();
    let m = topo.link_count();
    let mut flows = vec![vec![0.0; n]; m];
    if dests.is_empty() {
        return Ok(Some(flows));
    }

    // Flow is minimized so the witness carries no circulations.
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let mut vars: Vec<Vec<Option<Variable>>> = vec![vec![None; dests.len()]; m];
    for (k, &t) in dests.iter().enumerate() {
        let hops = &table[k];
        for link in topo.links() {
            if !on(link.id) || link.src == t {
                continue;
            }
            let allowed = topo.is_sdn(link.src)
                || (hops[link.src.0].contains(&link.id) && hops[link.src.0].iter().all(|&l| on(l)));
            if allowed {
                vars[link.id.0][k] = Some(problem.add_var(1.0, (0.0, f64::INFINITY)));
            }
        }
        for v in topo.nodes().iter().filter(|v| v.id != t && !topo.is_sdn(v.id)) {
            let shares: Vec<Variable> = hops[v.id.0].iter().filter_map(|l| vars[l.0][k]).collect();
            for pair in shares.windows(2) {
                problem.add_constraint([(pair[0], 1.0), (pair[1], -1.0)], ComparisonOp::Eq, 0.0);
            }
        }
        for v in (0..n).map(NodeId).filter(|&v| v != t) {
            let mut expr = LinearExpr::empty();
            let mut empty = true;
            for (links, sign) in [(topo.out_links(v), 1.0), (topo.in_links(v), -1.0)] {
                for l in links {
                    if let Some(var) = vars[l.0][k] {
                        expr.add(var, sign);
                        empty = false;
                    }
                }
            }
            let demand = tm.get(v, t);
            if empty {
                if demand > 0.0 {
                    return Ok(None);
                }
                continue;
            }
            problem.add_constraint(expr, ComparisonOp::Eq, demand);
        }
    }
    for link in topo.links() {
        let terms: Vec<(Variable, f64)> = vars[link.id.0].iter().flatten().map(|&v| (v, 1.0)).collect();
        if !terms.is_empty() {
            problem.add_constraint(terms, ComparisonOp::Le, link.capacity * beta);
        }
    }

    let solution = match problem.solve() {
        Ok(SolveOutcome::Solution(solution)) => solution,
        Err(LpError::Infeasible) => return Ok(None),
        Ok(SolveOutcome::Interrupted(_)) => return Err(OracleError::Solver("interrupted".into())),
        Err(e) => return Err(OracleError::Solver(e.to_string())),
    };
    for (l, row) in vars.iter().enumerate() {
        for (k, var) in row.iter().enumerate() {
            if let Some(var) = var {
                flows[l][dests[k].0] = solution.var_value(*var).max(0.0);
            }
        }
    }
    Ok(Some(flows))
}
