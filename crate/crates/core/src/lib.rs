//! Scheduling independent tasks whose input must be transferred over one link
//! into a bounded memory before being computed on one processor.
//!
//! A task holds its memory from the start of its transfer until the end of its
//! computation. The crate provides a schedule validator, the list-scheduling
//! engine behind every heuristic, Johnson's rule for the unbounded case, exact
//! solvers for small instances, a MILP export, instance generators, trace I/O
//! and the capacity-sweep benchmark harness.

pub mod bench;
pub mod engine;
pub mod error;
pub mod exact;
pub mod generators;
pub mod heuristics;
pub mod johnson;
pub mod model;
pub mod trace_io;

pub use error::{Error, Result};
pub use heuristics::{run_heuristic, HeuristicId, HeuristicRun};
pub use model::{
    min_capacity, peak_memory, validate_schedule, workload_bounds, Instance, Schedule, ScheduleEntry, Size, Task,
    TaskId, Time, ValidationReport, EPS,
};
