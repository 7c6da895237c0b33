//! Primal-dual engine: dual variables, the unit and narrow raise rules,
//! the reverse-order pruning phase and the sequential tree solver.

mod duals;
mod params;
mod raise;
mod second_phase;
mod sequential;

pub use duals::{min_satisfaction, scale_and_check_dual, slackness, DualCertificate, DualState};
pub use params::{default_narrow_c, stage_count, AlgoParams, ParamError, RaiseRule, XiPowers};
pub use raise::{
    apply_raise, beta_increment, raise, raise_amount, raise_height, raise_unit, xi_satisfied,
    RaiseError, RaiseRecord, Tuple,
};
pub use second_phase::{check_successor_coverage, second_phase, stack_from_records, StackEntry};
pub use sequential::{sequential_tree_solve, SequentialRun, SolveError};

use crate::model::HeightMode;

impl RaiseRule {
    /// Feasibility rule the pruning phase applies for this raise rule.
    pub fn feasibility(self) -> HeightMode {
        match self {
            RaiseRule::Unit => HeightMode::Unit,
            RaiseRule::Narrow => HeightMode::Height,
        }
    }
}
