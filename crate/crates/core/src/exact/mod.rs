//! Exact solvers, the windowed exact heuristic and the MILP export.

mod milp;
mod search;

pub use milp::{export_milp, Constraint, MilpModel, Sense, VarKind, STRICT_EPSILON};
pub use search::{free_order_search, same_order_search, Release, SearchResult, StartState};

use serde::{Deserialize, Serialize};

use crate::engine::{corrected_schedule, list_schedule, Selector};
use crate::error::{Error, Result};
use crate::johnson::johnson_order;
use crate::model::{Instance, Schedule, TaskId, Time};

pub const SAME_ORDER_LIMIT: usize = 8;
pub const FREE_ORDER_LIMIT: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SameOrderOptimum {
    pub order: Vec<TaskId>,
    pub makespan: Time,
    pub schedule: Schedule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeOrderOptimum {
    pub comm_order: Vec<TaskId>,
    pub comp_order: Vec<TaskId>,
    pub makespan: Time,
    pub schedule: Schedule,
}

fn check_size(instance: &Instance, limit: usize) -> Result<()> {
    if instance.len() > limit {
        return Err(Error::TooLarge { n: instance.len(), limit });
    }
    instance.ensure_feasible()
}

/// Best schedule among those using one order on both resources.
pub fn brute_force_same_order(instance: &Instance, limit: usize) -> Result<SameOrderOptimum> {
    check_size(instance, limit)?;
    let tasks = instance.tasks();
    let (order, starts, makespan) = same_order_search(tasks, instance.capacity());
    let mut schedule = Schedule::new();
    for (task, &(c, p)) in tasks.iter().zip(&starts) {
        schedule.insert(task, c, p);
    }
    Ok(SameOrderOptimum { order: order.iter().map(|&i| tasks[i].id).collect(), makespan, schedule })
}

/// Best schedule over every pair of communication and computation orders.
pub fn brute_force_free_order(instance: &Instance, limit: usize) -> Result<FreeOrderOptimum> {
    check_size(instance, limit)?;
    let tasks = instance.tasks();
    // Any feasible makespan tightens the pruning; Johnson-based ones are cheap.
    let johnson = johnson_order(tasks);
    let mut bound = list_schedule(instance, &johnson)?.makespan();
    for sel in [Selector::LargestComm, Selector::SmallestComm, Selector::MaxRatio] {
        bound = bound.min(corrected_schedule(instance, &johnson, sel)?.makespan());
    }
    let found = free_order_search(tasks, instance.capacity(), &StartState::default(), Some(bound))
        .expect("the bound comes from a feasible schedule");
    let mut schedule = Schedule::new();
    for (task, &(c, p)) in tasks.iter().zip(&found.starts) {
        schedule.insert(task, c, p);
    }
    Ok(FreeOrderOptimum {
        comm_order: found.comm_order.iter().map(|&i| tasks[i].id).collect(),
        comp_order: found.comp_order.iter().map(|&i| tasks[i].id).collect(),
        makespan: found.makespan,
        schedule,
    })
}

/// Solves consecutive windows of `k` tasks (in submission order) exactly.
///
/// Each window starts from the link and processor availability and the memory
/// still held by earlier windows; events already placed are never moved. Within
/// a window communication and computation orders may differ.
pub fn lp_k(instance: &Instance, k: usize) -> Result<Schedule> {
    if !(3..=6).contains(&k) {
        return Err(Error::Parameter(format!("window size must be within 3..=6, got {k}")));
    }
    instance.ensure_feasible()?;
    let mut state = StartState::default();
    let mut schedule = Schedule::new();
    for window in instance.tasks().chunks(k) {
        let found = free_order_search(window, instance.capacity(), &state, None)
            .expect("a window can always run sequentially after earlier ones drain");
        let mut comm_free = state.comm_free;
        for (task, &(c, p)) in window.iter().zip(&found.starts) {
            schedule.insert(task, c, p);
            comm_free = comm_free.max(c + task.comm_time);
            state.releases.push(Release { at: p + task.comp_time, mem: task.mem_req });
        }
        state.comm_free = comm_free;
        state.comp_free = found.makespan.max(state.comp_free);
        state.releases.retain(|r| r.at > comm_free);
    }
    Ok(schedule)
}
