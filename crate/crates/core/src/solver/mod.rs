//! Determinant roots, the proper-increment driver and alternation bounds.

mod asymptotic;
mod bounds;
mod det;
mod driver;
mod roots;

pub use asymptotic::{asymptotic_lambda1, disk_lambda1};
pub use bounds::{format_bound, parse_bound};
pub use det::{det_entries, det_sign, DetValue};
pub use driver::{
    bound_driver, bounds_from_history, confirmed_pairs, sweep, track_history, working_precision, BoundResult,
    DriverConfig, HistoryEntry, IncrementSchedule, Seed,
};
pub use roots::{bracket_roots, refine_root, weyl_step, DetFunction, RootEstimate, StepPolicy};
