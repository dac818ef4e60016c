//! CPLEX-LP text for the full model.
//!
//! Variables (indices are link ids `l`, node ids `v`, destination ids `t`):
//!
//! | name       | meaning                                   |
//! |------------|-------------------------------------------|
//! | `w_l`      | link weight, `1 <= w_l <= W_max`          |
//! | `x_l`      | total load                                |
//! | `xt_l_t`   | load towards `t`                          |
//! | `y_v_t`    | common next-hop share at router `v`       |
//! | `u_l_t`    | binary: `l` on a shortest path to `t`     |
//! | `p_l`      | binary: `l` is on                         |
//! | `r_v_t`    | shortest-path distance, `r_t_t` fixed 0   |
//!
//! Rows are named `c<constraint>_...` with the same indices. Constraint 6 is
//! split into `c6a` (lower) and `c6b` (upper); constraint 11 and the
//! distance anchor live in `Bounds`.

use std::fmt::Write;

use crate::topology::{NodeId, Topology};
use crate::traffic::TrafficMatrix;

/// Largest OSPF link weight; bounds `w_l` and sets the big-M.
pub const LP_MAX_WEIGHT: f64 = 65535.0;

const TERMS_PER_LINE: usize = 8;

/// A linear row under construction.
struct Row {
    terms: Vec<(f64, String)>,
}

impl Row {
    fn new() -> Self {
        Row { terms: Vec::new() }
    }

    fn add(&mut self, coeff: f64, var: String) -> &mut Self {
        if coeff != 0.0 {
            self.terms.push((coeff, var));
        }
        self
    }

    fn write(&self, out: &mut String, name: &str, sense: &str, rhs: f64) {
        self.write_expr(out, name);
        let _ = writeln!(out, " {sense} {rhs}");
    }

    fn write_expr(&self, out: &mut String, name: &str) {
        let _ = write!(out, " {name}:");
        for (i, (coeff, var)) in self.terms.iter().enumerate() {
            if i > 0 && i % TERMS_PER_LINE == 0 {
                out.push_str("\n   ");
            }
            let sign = if *coeff < 0.0 { '-' } else { '+' };
            let magnitude = coeff.abs();
            if magnitude == 1.0 {
                let _ = write!(out, " {sign} {var}");
            } else {
                let _ = write!(out, " {sign} {magnitude} {var}");
            }
        }
    }
}

pub fn export_lp(topo: &Topology, tm: &TrafficMatrix, beta: f64) -> String {
    export_lp_with(topo, tm, beta, LP_MAX_WEIGHT)
}

/// Writes the model with weights bounded by `max_weight` and
/// `M = |N| * max_weight + 1`.
pub fn export_lp_with(topo: &Topology, tm: &TrafficMatrix, beta: f64, max_weight: f64) -> String {
    let n = topo.node_count();
    let big_m = n as f64 * max_weight + 1.0;
    let inbound: Vec<f64> = (0..n).map(|t| tm.inbound(NodeId(t))).collect();
    let ip_links: Vec<_> = topo.links().iter().filter(|l| !topo.is_sdn(l.src)).collect();
    let mut out = String::new();

    let _ = writeln!(out, "\\ nodes {n}, links {}, beta {beta}, W_max {max_weight}", topo.link_count());
    out.push_str("Minimize\n");
    let mut objective = Row::new();
    for link in topo.links() {
        objective.add(1.0, format!("p_{}", link.id.0));
    }
    objective.write_expr(&mut out, "obj");
    out.push('\n');

    out.push_str("Subject To\n");
    for t in 0..n {
        let mut row = Row::new();
        for l in topo.in_links(NodeId(t)) {
            row.add(1.0, format!("xt_{}_{t}", l.0));
        }
        row.write(&mut out, &format!("c2_t{t}"), "=", inbound[t]);
    }
    for t in 0..n {
        for v in (0..n).filter(|&v| v != t) {
            let mut row = Row::new();
            for l in topo.out_links(NodeId(v)) {
                row.add(1.0, format!("xt_{}_{t}", l.0));
            }
            for l in topo.in_links(NodeId(v)) {
                row.add(-1.0, format!("xt_{}_{t}", l.0));
            }
            row.write(&mut out, &format!("c3_v{v}_t{t}"), "=", tm.get(NodeId(v), NodeId(t)));
        }
    }
    for link in topo.links() {
        let l = link.id.0;
        let mut row = Row::new();
        row.add(1.0, format!("x_{l}"));
        for t in 0..n {
            row.add(-1.0, format!("xt_{l}_{t}"));
        }
        row.write(&mut out, &format!("c4_l{l}"), "=", 0.0);
    }
    for link in topo.links() {
        let l = link.id.0;
        let mut row = Row::new();
        row.add(1.0, format!("x_{l}")).add(-link.capacity * beta, format!("p_{l}"));
        row.write(&mut out, &format!("c5_l{l}"), "<=", 0.0);
    }
    for link in &ip_links {
        let (l, s, d) = (link.id.0, link.src.0, link.dst.0);
        for t in 0..n {
            let (y, xt, u) = (format!("y_{s}_{t}"), format!("xt_{l}_{t}"), format!("u_{l}_{t}"));
            let mut row = Row::new();
            row.add(1.0, y.clone()).add(-1.0, xt.clone());
            row.write(&mut out, &format!("c6a_l{l}_t{t}"), ">=", 0.0);
            row.add(inbound[t], u.clone());
            row.write(&mut out, &format!("c6b_l{l}_t{t}"), "<=", inbound[t]);

            let mut row = Row::new();
            row.add(1.0, xt).add(-inbound[t], u.clone());
            row.write(&mut out, &format!("c7_l{l}_t{t}"), "<=", 0.0);

            let mut diff = Row::new();
            diff.add(1.0, format!("w_{l}")).add(1.0, format!("r_{d}_{t}")).add(-1.0, format!("r_{s}_{t}"));
            let mut row = Row { terms: diff.terms.clone() };
            row.add(big_m, u.clone());
            row.write(&mut out, &format!("c8_l{l}_t{t}"), "<=", big_m);
            let mut row = diff;
            row.add(1.0, u);
            row.write(&mut out, &format!("c9_l{l}_t{t}"), ">=", 1.0);
        }
    }
    for v in topo.nodes().iter().filter(|v| !topo.is_sdn(v.id)).map(|v| v.id) {
        for t in (0..n).filter(|&t| t != v.0) {
            let mut row = Row::new();
            for l in topo.out_links(v) {
                row.add(1.0, format!("u_{}_{t}", l.0));
            }
            row.write(&mut out, &format!("c10_v{}_t{t}", v.0), "=", 1.0);
        }
    }

    out.push_str("Bounds\n");
    for link in topo.links() {
        let _ = writeln!(out, " 1 <= w_{} <= {max_weight}", link.id.0);
    }
    for t in 0..n {
        let _ = writeln!(out, " r_{t}_{t} = 0");
    }

    out.push_str("Binary\n");
    for link in &ip_links {
        for t in 0..n {
            let _ = writeln!(out, " u_{}_{t}", link.id.0);
        }
    }
    for link in topo.links() {
        let _ = writeln!(out, " p_{}", link.id.0);
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(text: &str) -> usize {
        let body = text.split("Subject To\n").nth(1).unwrap().split("Bounds\n").next().unwrap();
        body.lines().filter(|l| l.starts_with(" c")).count()
    }

    /// Row tally straight from the constraint index sets:
    /// (2) per t, (3) per t and v != t, (4) and (5) per link, (6a)/(6b)/(7)/(8)/(9)
    /// per t and IP-sourced link, (10) per IP router and t != v.
    fn tally(nodes: usize, links: usize, ip_links: usize, ip_nodes: usize) -> usize {
        nodes + nodes * (nodes - 1) + 2 * links + 5 * nodes * ip_links + ip_nodes * (nodes - 1)
    }

    #[test]
    fn triangle_row_counts() {
        let ip = Topology::parse("node A ip\nnode B ip\nnode C ip\nlink A B 10\nlink A C 10\nlink C B 10\n").unwrap();
        let tm = TrafficMatrix::zeros(3);
        assert_eq!(rows(&export_lp(&ip, &tm, 0.8)), 117);
        assert_eq!(tally(3, 6, 6, 3), 117);

        let hybrid =
            Topology::parse("node A sdn\nnode B ip\nnode C ip\nlink A B 10\nlink A C 10\nlink C B 10\n").unwrap();
        assert_eq!(rows(&export_lp(&hybrid, &tm, 0.8)), 85);
        assert_eq!(tally(3, 6, 4, 2), 85);
    }

    #[test]
    fn sections_and_binaries() {
        let topo = Topology::parse("node A sdn\nnode B ip\nlink A B 10\n").unwrap();
        let tm = TrafficMatrix::parse("demand A B 2\n", &topo).unwrap();
        let text = export_lp(&topo, &tm, 0.5);
        let order: Vec<usize> =
            ["Minimize", "Subject To", "Bounds", "Binary", "End"].iter().map(|s| text.find(s).unwrap()).collect();
        assert!(order.windows(2).all(|w| w[0] < w[1]));
        assert!(text.contains(" obj: + p_0 + p_1\n"));
        assert!(text.contains(" c2_t1: + xt_0_1 = 2\n"));
        assert!(text.contains(" c5_l0: + x_0 - 5 p_0 <= 0\n"));
        assert!(text.contains(" 1 <= w_0 <= 65535\n"));
        // Only the IP-sourced link B->A gets shortest-path binaries.
        assert!(text.contains(" u_1_0\n") && !text.contains(" u_0_0\n"));
        assert!(text.contains(&format!(" c8_l1_t0: + w_1 + r_0_0 - r_1_0 + {} u_1_0 <= {}\n", 131071, 131071)));
    }

    #[test]
    fn long_rows_wrap() {
        let mut text = String::from("node hub ip\n");
        for i in 0..20 {
            text.push_str(&format!("node n{i} ip\nlink hub n{i} 10\n"));
        }
        let topo = Topology::parse(&text).unwrap();
        let lp = export_lp(&topo, &TrafficMatrix::zeros(21), 0.8);
        assert!(lp.lines().all(|l| l.len() < 255));
    }
}
