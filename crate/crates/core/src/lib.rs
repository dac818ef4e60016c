//! Energy-aware traffic engineering for hybrid IP/SDN networks.
//!
//! Links are switched off one at a time while two levers keep the remaining
//! links under a utilization bound: OSPF weight tuning on IP routers and
//! explicit traffic splitting on SDN switches.

pub mod experiment;
pub mod fixtures;
pub mod heate;
pub mod milp;
pub mod routing;
pub mod sdn_alloc;
pub mod topology;
pub mod traffic;
pub mod weight_search;
