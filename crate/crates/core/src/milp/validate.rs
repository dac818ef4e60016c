use std::fmt;

use thiserror::Error;

use super::{SolutionCertificate, TOLERANCE};
use crate::topology::{NodeId, Topology};
use crate::traffic::TrafficMatrix;

/// How forwarding at IP routers is judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Regime {
    /// Exactly one shortest-path next hop per router and destination.
    #[default]
    Strict,
    /// Any number of tied next hops, each carrying the same share.
    Ecmp,
}

impl std::str::FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(Regime::Strict),
            "ecmp" => Ok(Regime::Ecmp),
            other => Err(format!("unknown regime `{other}` (expected strict or ecmp)")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidationError {
    #[error("certificate field `{field}` has {got} entries, expected {expected}")]
    Dimension { field: &'static str, expected: usize, got: usize },
}

/// One violated constraint row.
///
/// `indices` name the row: `[t]` for 2, `[v, t]` for 3 and 10, `[l]` for 4
/// (or `[l, t]` for a negative `x_lt`), 5 and 11, `[l, t]` for 6–9.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: u8,
    pub indices: Vec<usize>,
    pub residual: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) at {:?}: residual {}", self.constraint, self.indices, self.residual)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    /// Keeps only violations of the listed constraints.
    pub fn only(mut self, constraints: &[u8]) -> Self {
        self.violations.retain(|v| constraints.contains(&v.constraint));
        self
    }

    pub fn violates(&self, constraint: u8) -> bool {
        self.violations.iter().any(|v| v.constraint == constraint)
    }

    fn check(&mut self, constraint: u8, indices: Vec<usize>, residual: f64) {
        if !(residual <= TOLERANCE) {
            self.violations.push(Violation { constraint, indices, residual });
        }
    }
}

fn check_len(field: &'static str, expected: usize, got: usize) -> Result<(), ValidationError> {
    if expected == got {
        Ok(())
    } else {
        Err(ValidationError::Dimension { field, expected, got })
    }
}

fn check_rows<T>(field: &'static str, rows: &[Vec<T>], outer: usize, inner: usize) -> Result<(), ValidationError> {
    check_len(field, outer, rows.len())?;
    rows.iter().try_for_each(|row| check_len(field, inner, row.len()))
}

/// Checks every constraint row of the model against `cert` and reports each
/// one whose residual exceeds the tolerance.
pub fn validate_certificate(
    topo: &Topology,
    tm: &TrafficMatrix,
    cert: &SolutionCertificate,
    beta: f64,
    regime: Regime,
) -> Result<ViolationReport, ValidationError> {
    let n = topo.node_count();
    let m = topo.link_count();
    check_len("traffic matrix", n, tm.node_count())?;
    check_len("weights", m, cert.weights.len())?;
    check_len("loads", m, cert.loads.len())?;
    check_len("active", m, cert.active.len())?;
    check_rows("flows", &cert.flows, m, n)?;
    check_rows("on_path", &cert.on_path, m, n)?;
    check_rows("distances", &cert.distances, n, n)?;
    check_rows("split", &cert.split, n, n)?;

    let mut report = ViolationReport::default();
    let x = |l: usize, t: usize| cert.flows[l][t];
    let inbound: Vec<f64> = (0..n).map(|t| tm.inbound(NodeId(t))).collect();

    for t in 0..n {
        let arriving: f64 = topo.in_links(NodeId(t)).iter().map(|l| x(l.0, t)).sum();
        report.check(2, vec![t], (arriving - inbound[t]).abs());
        for v in (0..n).filter(|&v| v != t) {
            let out: f64 = topo.out_links(NodeId(v)).iter().map(|l| x(l.0, t)).sum();
            let inc: f64 = topo.in_links(NodeId(v)).iter().map(|l| x(l.0, t)).sum();
            report.check(3, vec![v, t], (out - inc - tm.get(NodeId(v), NodeId(t))).abs());
        }
    }

    for link in topo.links() {
        let l = link.id.0;
        let total: f64 = cert.flows[l].iter().sum();
        report.check(4, vec![l], (cert.loads[l] - total).abs());
        for t in 0..n {
            report.check(4, vec![l, t], -x(l, t));
        }
        let p = if cert.active[l] { 1.0 } else { 0.0 };
        report.check(5, vec![l], cert.loads[l] / link.capacity - beta * p);
        report.check(11, vec![l], 1.0 - cert.weights[l]);

        if topo.is_sdn(link.src) {
            continue;
        }
        let (s, d) = (link.src.0, link.dst.0);
        for t in 0..n {
            let u = if cert.on_path[l][t] { 1.0 } else { 0.0 };
            let gap = cert.split[s][t] - x(l, t);
            report.check(6, vec![l, t], -gap);
            report.check(6, vec![l, t], gap - (1.0 - u) * inbound[t]);
            report.check(7, vec![l, t], x(l, t) - u * inbound[t]);
            let slack = cert.distances[d][t] + cert.weights[l] - cert.distances[s][t];
            report.check(8, vec![l, t], slack - (1.0 - u) * cert.big_m);
            report.check(9, vec![l, t], (1.0 - u) - slack);
        }
    }

    for v in topo.nodes().iter().filter(|v| !topo.is_sdn(v.id)).map(|v| v.id.0) {
        for t in (0..n).filter(|&t| t != v) {
            let chosen = topo.out_links(NodeId(v)).iter().filter(|l| cert.on_path[l.0][t]).count() as f64;
            let residual = match regime {
                Regime::Strict => (chosen - 1.0).abs(),
                Regime::Ecmp => 1.0 - chosen,
            };
            report.check(10, vec![v, t], residual);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heate::run_heate;
    use crate::milp::evaluate_objective;
    use crate::routing::load_flows_ecmp;
    use crate::topology::LinkId;
    use crate::weight_search::SearchConfig;

    const TRIANGLE: &str = "node A ip\nnode B ip\nnode C ip\nlink A B 10\nlink A C 10\nlink C B 10\n";

    /// A valid strict-regime certificate: all-IP triangle, unit weights,
    /// one demand A->B of 2 on the direct link.
    fn base() -> (Topology, TrafficMatrix, SolutionCertificate) {
        let topo = Topology::parse(TRIANGLE).unwrap();
        let tm = TrafficMatrix::parse("demand A B 2\n", &topo).unwrap();
        let state = load_flows_ecmp(&topo, &tm).unwrap();
        let cert = SolutionCertificate::from_state(&topo, &state);
        (topo, tm, cert)
    }

    fn report(topo: &Topology, tm: &TrafficMatrix, cert: &SolutionCertificate) -> ViolationReport {
        validate_certificate(topo, tm, cert, 0.8, Regime::Strict).unwrap()
    }

    fn constraints(r: &ViolationReport) -> Vec<u8> {
        let mut ids: Vec<u8> = r.violations.iter().map(|v| v.constraint).collect();
        ids.dedup();
        ids
    }

    #[test]
    fn base_certificate_is_clean() {
        let (topo, tm, cert) = base();
        assert!(report(&topo, &tm, &cert).is_empty());
        assert_eq!(evaluate_objective(&cert), 6);
    }

    #[test]
    fn fig3_final_state_is_clean() {
        let topo = Topology::parse(
            "node A sdn\nnode B ip\nnode C ip\nnode D ip\nlink A B 10\nlink A C 10\nlink C B 10\nlink D A 10\n",
        )
        .unwrap();
        let tm = TrafficMatrix::parse("demand A B 1\ndemand A C 3\ndemand C B 3\ndemand D B 2\n", &topo).unwrap();
        let result = run_heate(&topo, &tm, &SearchConfig::with_beta(0.8).iterations(2)).unwrap();
        let cert = SolutionCertificate::from_result(&result);
        for regime in [Regime::Ecmp, Regime::Strict] {
            let r = validate_certificate(&topo, &tm, &cert, 0.8, regime).unwrap();
            assert!(r.is_empty(), "{regime:?}: {:?}", r.violations);
        }
        assert_eq!(evaluate_objective(&cert), 6);
    }

    #[test]
    fn objective_counts_active_directions() {
        let (_, _, mut cert) = base();
        cert.active[0] = false;
        cert.active[1] = false;
        assert_eq!(evaluate_objective(&cert), 4);
        cert.active.iter_mut().for_each(|p| *p = false);
        assert_eq!(evaluate_objective(&cert), 0);
    }

    #[test]
    fn json_round_trip() {
        let (_, _, cert) = base();
        assert_eq!(SolutionCertificate::from_json(&cert.to_json()).unwrap(), cert);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let (topo, tm, mut cert) = base();
        cert.weights.pop();
        assert!(matches!(
            validate_certificate(&topo, &tm, &cert, 0.8, Regime::Strict),
            Err(ValidationError::Dimension { field: "weights", .. })
        ));
    }

    #[test]
    fn violates_2_when_sink_short() {
        let (topo, tm, mut cert) = base();
        cert.flows[0][1] = 1.5;
        cert.loads[0] = 1.5;
        let r = report(&topo, &tm, &cert);
        assert!(r.violates(2));
        assert!(r.violations.iter().any(|v| v.constraint == 2 && v.indices == vec![1] && v.residual == 0.5));
    }

    #[test]
    fn violates_3_on_unbalanced_transit() {
        let (topo, tm, mut cert) = base();
        // Extra flow C->B towards B appears from nowhere at C.
        let cb = topo.link_between("C", "B").unwrap().0;
        cert.flows[cb][1] = 1.0;
        cert.loads[cb] = 1.0;
        let r = report(&topo, &tm, &cert);
        assert!(r.violations.iter().any(|v| v.constraint == 3 && v.indices == vec![2, 1]));
    }

    #[test]
    fn violates_4_on_mismatched_load() {
        let (topo, tm, mut cert) = base();
        cert.loads[0] += 0.25;
        let r = report(&topo, &tm, &cert);
        assert_eq!(constraints(&r), vec![4]);
    }

    #[test]
    fn violates_5_with_residual_one_over_capacity() {
        let (topo, tm, mut cert) = base();
        let c = topo.link(LinkId(0)).capacity;
        cert.loads[0] = c * 0.8 + 1.0;
        let r = report(&topo, &tm, &cert).only(&[5]);
        assert_eq!(r.len(), 1);
        assert!((r.violations[0].residual - 1.0 / c).abs() < 1e-12);
    }

    #[test]
    fn violates_5_when_inactive_link_carries_flow() {
        let (topo, tm, mut cert) = base();
        cert.active[0] = false;
        assert!(report(&topo, &tm, &cert).violates(5));
    }

    #[test]
    fn violates_6_when_split_differs() {
        let (topo, tm, mut cert) = base();
        cert.split[0][1] = 3.0;
        let r = report(&topo, &tm, &cert);
        assert_eq!(constraints(&r), vec![6]);
    }

    #[test]
    fn violates_7_on_flow_off_shortest_path() {
        let (topo, tm, mut cert) = base();
        // Move u(A,B) to the detour without moving the flow.
        let ab = topo.link_between("A", "B").unwrap().0;
        cert.on_path[ab][1] = false;
        let r = report(&topo, &tm, &cert);
        assert!(r.violates(7));
    }

    #[test]
    fn violates_8_when_marked_link_is_not_shortest() {
        let (topo, tm, mut cert) = base();
        let ac = topo.link_between("A", "C").unwrap().0;
        cert.on_path[ac][1] = true;
        let r = report(&topo, &tm, &cert);
        assert!(r.violates(8));
    }

    #[test]
    fn violates_9_on_unmarked_tight_link() {
        let (topo, tm, mut cert) = base();
        // Make the detour A->C->B exactly as short as A->B.
        let ab = topo.link_between("A", "B").unwrap().0;
        cert.weights[ab] = 2.0;
        cert.distances[0][1] = 2.0;
        let r = report(&topo, &tm, &cert);
        assert!(r.violations.iter().any(|v| v.constraint == 9));
    }

    #[test]
    fn violates_10_with_two_next_hops() {
        let (topo, tm, mut cert) = base();
        let ac = topo.link_between("A", "C").unwrap().0;
        cert.on_path[ac][1] = true;
        let strict = report(&topo, &tm, &cert);
        assert!(strict.violations.iter().any(|v| v.constraint == 10 && v.indices == vec![0, 1] && v.residual == 1.0));
        let ecmp = validate_certificate(&topo, &tm, &cert, 0.8, Regime::Ecmp).unwrap();
        assert!(!ecmp.violates(10));
    }

    #[test]
    fn violates_10_with_no_next_hop_in_either_regime() {
        let (topo, tm, mut cert) = base();
        let ab = topo.link_between("A", "B").unwrap().0;
        cert.on_path[ab][1] = false;
        for regime in [Regime::Strict, Regime::Ecmp] {
            assert!(validate_certificate(&topo, &tm, &cert, 0.8, regime).unwrap().violates(10));
        }
    }

    #[test]
    fn violates_11_below_unit_weight() {
        let (topo, tm, mut cert) = base();
        let ca = topo.link_between("C", "A").unwrap().0;
        cert.weights[ca] = 0.5;
        let r = report(&topo, &tm, &cert);
        assert!(r.violations.iter().any(|v| v.constraint == 11 && v.indices == vec![ca]));
    }

    #[test]
    fn ecmp_split_passes_only_in_ecmp_regime() {
        let mut topo = Topology::parse(TRIANGLE).unwrap();
        topo.set_weight(topo.link_between("A", "B").unwrap(), 2.0);
        let tm = TrafficMatrix::parse("demand A B 4\n", &topo).unwrap();
        let state = load_flows_ecmp(&topo, &tm).unwrap();
        let cert = SolutionCertificate::from_state(&topo, &state);
        assert!(validate_certificate(&topo, &tm, &cert, 0.8, Regime::Ecmp).unwrap().is_empty());
        let strict = validate_certificate(&topo, &tm, &cert, 0.8, Regime::Strict).unwrap();
        assert_eq!(constraints(&strict), vec![10]);
    }
}
