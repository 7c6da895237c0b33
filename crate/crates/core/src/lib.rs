//! Distributed primal-dual throughput maximization on tree and line networks.
//!
//! Processors own demands that must be routed on one of several shared tree
//! (or line) networks. The crate builds tree decompositions, turns them into
//! layered decompositions, and runs a synchronous simulation of the
//! distributed two-phase primal-dual algorithm, together with an exact
//! oracle for certifying results on small inputs.

pub mod decomposition;
pub mod dist_sim;
pub mod generate;
pub mod layering;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod primal_dual;
pub mod rational;
