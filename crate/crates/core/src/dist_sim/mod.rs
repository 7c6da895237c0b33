//! Synchronous message-passing simulation of the distributed primal-dual
//! scheme: one node per processor, Luby MIS per step, and exact replay.

mod graph;
mod height;
mod mis;
mod sim;
mod trace;

pub use graph::{communication_graph, conflict_graph, Graph};
pub use height::{
    nominal_delta, run_overall_height, run_unit, HeightConfig, HeightRun, RunError,
};
pub use mis::{luby_mis, step_key, MisOutcome};
pub use sim::{
    run_distributed, DistRun, KillFailure, KillViolation, RoundStats, SimConfig, SimError,
    StageSteps,
};
pub use trace::{read_trace, replay_centralized, write_trace, ReplayError, TraceError, TraceLine};
