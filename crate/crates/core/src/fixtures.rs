//! Bundled topologies. Every node is an IP router; place SDN switches with
//! [`Topology::place_sdn`].

use crate::topology::Topology;
use crate::traffic::TrafficMatrix;

/// 23 nodes, 37 physical links.
pub const GEANT: &str = include_str!("../data/geant.topo");
/// 30 nodes, 69 physical links.
pub const SPRINTLINK: &str = include_str!("../data/sprintlink.topo");
/// SDN switch A on a triangle A-B-C, with D attached to A; all capacities 10.
pub const FIG3: &str = include_str!("../data/fig3.topo");
/// Demands for [`FIG3`]: A->B 1, A->C 3, C->B 3, D->B 2.
pub const FIG3_DEMANDS: &str = include_str!("../data/fig3.tm");
pub const TRIANGLE: &str = include_str!("../data/triangle.topo");

pub fn geant() -> Topology {
    Topology::parse(GEANT).expect("bundled topology parses")
}

pub fn sprintlink() -> Topology {
    Topology::parse(SPRINTLINK).expect("bundled topology parses")
}

pub fn fig3() -> (Topology, TrafficMatrix) {
    let topo = Topology::parse(FIG3).expect("bundled topology parses");
    let tm = TrafficMatrix::parse(FIG3_DEMANDS, &topo).expect("bundled demands parse");
    (topo, tm)
}

pub fn triangle() -> Topology {
    Topology::parse(TRIANGLE).expect("bundled topology parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{POP1_CAPACITY, POP2_CAPACITY};

    #[test]
    fn sizes() {
        let g = geant();
        assert_eq!((g.node_count(), g.physical_link_count(), g.link_count()), (23, 37, 74));
        let s = sprintlink();
        assert_eq!((s.node_count(), s.physical_link_count(), s.link_count()), (30, 69, 138));
        assert_eq!(fig3().0.link_count(), 8);
        assert_eq!(triangle().link_count(), 6);
    }

    #[test]
    fn capacities_follow_pop_rule() {
        for topo in [geant(), sprintlink()] {
            let mut reassigned = topo.clone();
            reassigned.assign_capacities(POP1_CAPACITY, POP2_CAPACITY);
            let before: Vec<f64> = topo.links().iter().map(|l| l.capacity).collect();
            let after: Vec<f64> = reassigned.links().iter().map(|l| l.capacity).collect();
            assert_eq!(before, after);
        }
    }

    #[test]
    fn no_bundled_sdn() {
        assert_eq!(geant().sdn_nodes().count(), 0);
        assert_eq!(sprintlink().sdn_nodes().count(), 0);
    }
}
