//! Schedule construction for the three execution regimes: a fixed order
//! followed greedily, a dynamic choice at every free instant of the link, and a
//! fixed order corrected dynamically when its next task does not fit.
//!
//! In every regime the computation order equals the communication order.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{Instance, Schedule, Size, Task, TaskId, Time, EPS};

/// Tie-break criterion among the tasks that fit and induce minimum idle time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Selector {
    LargestComm,
    SmallestComm,
    /// Largest `comp_time / comm_time`; a zero communication time counts as +inf.
    MaxRatio,
}

impl Selector {
    fn score(self, t: &Task) -> f64 {
        match self {
            Selector::LargestComm => t.comm_time,
            Selector::SmallestComm => -t.comm_time,
            Selector::MaxRatio => {
                if t.comm_time == 0.0 {
                    f64::INFINITY
                } else {
                    t.comp_time / t.comm_time
                }
            }
        }
    }
}

/// Resource availability and memory occupancy while a schedule is built.
#[derive(Debug, Clone)]
pub struct EngineState<'a> {
    capacity: Size,
    /// Earliest instant the communication link is free.
    pub comm_free: Time,
    /// Earliest instant the computation resource is free.
    pub comp_free: Time,
    live: Vec<(TaskId, Time, Size)>,
    schedule: Schedule,
    tasks: &'a [Task],
}

impl<'a> EngineState<'a> {
    fn new(instance: &'a Instance) -> Self {
        EngineState {
            capacity: instance.capacity(),
            comm_free: 0.0,
            comp_free: 0.0,
            live: Vec::new(),
            schedule: Schedule::new(),
            tasks: instance.tasks(),
        }
    }

    /// Memory held at instant `t` by tasks already placed.
    pub fn live_mem(&self, t: Time) -> Size {
        self.live.iter().filter(|l| l.1 > t + EPS).map(|l| l.2).sum()
    }

    /// Ids of tasks holding memory at instant `t`.
    pub fn live_set(&self, t: Time) -> Vec<TaskId> {
        self.live.iter().filter(|l| l.1 > t + EPS).map(|l| l.0).collect()
    }

    fn fits(&self, task: &Task, t: Time) -> bool {
        self.live_mem(t) + task.mem_req <= self.capacity + EPS
    }

    /// Next computation end strictly after `t`.
    fn next_release(&self, t: Time) -> Option<Time> {
        self.live.iter().map(|l| l.1).filter(|&e| e > t + EPS).min_by(f64::total_cmp)
    }

    fn place(&mut self, pos: usize, t: Time) {
        let task = &self.tasks[pos];
        let comm_end = t + task.comm_time;
        let comp_start = comm_end.max(self.comp_free);
        let comp_end = comp_start + task.comp_time;
        self.schedule.insert(task, t, comp_start);
        self.comm_free = comm_end;
        self.comp_free = comp_end;
        self.live.retain(|l| l.1 > t + EPS);
        self.live.push((task.id, comp_end, task.mem_req));
    }

    /// Moves `t` to the next release; `None` when nothing is left to free.
    fn wait(&self, t: Time) -> Option<Time> {
        self.next_release(t)
    }

    /// Computation idle caused by starting `task`'s transfer at `t`.
    fn induced_idle(&self, task: &Task, t: Time) -> Time {
        (t + task.comm_time - self.comp_free).max(0.0)
    }

    fn choose(&self, candidates: &[usize], t: Time, selector: Selector) -> usize {
        let idle: Vec<Time> = candidates.iter().map(|&p| self.induced_idle(&self.tasks[p], t)).collect();
        let min_idle = idle.iter().copied().fold(f64::INFINITY, f64::min);
        let mut best: Option<(usize, f64)> = None;
        for (&p, &i) in candidates.iter().zip(&idle) {
            if i > min_idle + EPS {
                continue;
            }
            let task = &self.tasks[p];
            let score = selector.score(task);
            best = match best {
                None => Some((p, score)),
                Some((bp, bs)) => {
                    let better = if score.is_infinite() || bs.is_infinite() {
                        score > bs || (score == bs && task.id < self.tasks[bp].id)
                    } else {
                        score > bs + EPS || ((score - bs).abs() <= EPS && task.id < self.tasks[bp].id)
                    };
                    if better {
                        Some((p, score))
                    } else {
                        Some((bp, bs))
                    }
                }
            };
        }
        best.expect("non-empty candidate set").0
    }
}

/// Greedy earliest-start schedule for a fixed order on both resources.
///
/// Each transfer starts at the first instant, no earlier than the link being
/// free, at which its memory fits; computations follow in the same order.
pub fn list_schedule(instance: &Instance, order: &[TaskId]) -> Result<Schedule> {
    let positions = instance.positions(order)?;
    instance.ensure_feasible()?;
    Ok(list_schedule_positions(instance, &positions))
}

pub(crate) fn list_schedule_positions(instance: &Instance, positions: &[usize]) -> Schedule {
    let mut state = EngineState::new(instance);
    for &p in positions {
        let task = &instance.tasks()[p];
        let mut t = state.comm_free;
        while !state.fits(task, t) {
            t = state.wait(t).expect("a task that fits alone eventually fits");
        }
        state.place(p, t);
    }
    state.schedule
}

/// Johnson-style timing with memory ignored: transfers back to back.
pub fn infinite_schedule(tasks: &[Task], order: &[TaskId]) -> Result<Schedule> {
    let instance = Instance::unbounded(tasks.to_vec())?;
    list_schedule(&instance, order)
}

/// Picks the next transfer at every instant the link becomes free.
///
/// Candidates are the unscheduled tasks that fit in the memory left; among
/// those inducing the least computation idle time the selector decides, then
/// the smallest id. With no candidate the link waits for the next release.
pub fn dynamic_schedule(instance: &Instance, selector: Selector) -> Result<Schedule> {
    instance.ensure_feasible()?;
    let mut state = EngineState::new(instance);
    let mut remaining: Vec<usize> = (0..instance.len()).collect();
    let mut t = 0.0;
    while !remaining.is_empty() {
        let candidates: Vec<usize> =
            remaining.iter().copied().filter(|&p| state.fits(&instance.tasks()[p], t)).collect();
        if candidates.is_empty() {
            t = state.wait(t).expect("an empty memory fits any feasible task");
            continue;
        }
        let chosen = state.choose(&candidates, t, selector);
        state.place(chosen, t);
        remaining.retain(|&p| p != chosen);
        t = state.comm_free;
    }
    Ok(state.schedule)
}

/// Follows `base_order` while its head fits; otherwise picks a fitting task
/// dynamically and drops it from the remaining order.
pub fn corrected_schedule(instance: &Instance, base_order: &[TaskId], selector: Selector) -> Result<Schedule> {
    let mut remaining = instance.positions(base_order)?;
    instance.ensure_feasible()?;
    let mut state = EngineState::new(instance);
    let mut t = 0.0;
    while let Some(&head) = remaining.first() {
        if state.fits(&instance.tasks()[head], t) {
            state.place(head, t);
            remaining.remove(0);
            t = state.comm_free;
            continue;
        }
        let candidates: Vec<usize> =
            remaining[1..].iter().copied().filter(|&p| state.fits(&instance.tasks()[p], t)).collect();
        if candidates.is_empty() {
            t = state.wait(t).expect("an empty memory fits any feasible task");
            continue;
        }
        let chosen = state.choose(&candidates, t, selector);
        state.place(chosen, t);
        remaining.retain(|&p| p != chosen);
        t = state.comm_free;
    }
    Ok(state.schedule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{builtin_instance, BuiltinInstance};
    use crate::model::validate_schedule;

    fn ids(v: &[u64]) -> Vec<TaskId> {
        v.iter().map(|&i| TaskId(i)).collect()
    }

    // Task letters A,B,C,... in the worked examples map to ids 0,1,2,...
    const A: u64 = 0;
    const B: u64 = 1;
    const C: u64 = 2;
    const D: u64 = 3;
    const E: u64 = 4;

    #[test]
    fn static_example_fixed_orders() {
        let inst = builtin_instance(BuiltinInstance::StaticExample);
        let s = list_schedule(&inst, &ids(&[B, C, A, D])).unwrap();
        assert_eq!(s.makespan(), 15.0);
        assert_eq!(s.get(TaskId(A)).unwrap().comm_start, 9.0);
        let s = list_schedule(&inst, &ids(&[C, B, A, D])).unwrap();
        assert_eq!(s.makespan(), 14.0);
    }

    #[test]
    fn infinite_memory_timing() {
        let st = builtin_instance(BuiltinInstance::StaticExample);
        assert_eq!(infinite_schedule(st.tasks(), &ids(&[B, C, A, D])).unwrap().makespan(), 12.0);
        let gap = builtin_instance(BuiltinInstance::OrderGap);
        // A,C,D,B,E,F with A..F = 0..5
        assert_eq!(infinite_schedule(gap.tasks(), &ids(&[0, 2, 3, 1, 4, 5])).unwrap().makespan(), 22.0);
        let one = [Task::new(9, 3.0, 2.0)];
        assert_eq!(infinite_schedule(&one, &ids(&[9])).unwrap().makespan(), 5.0);
    }

    #[test]
    fn total_memory_capacity_matches_infinite() {
        let st = builtin_instance(BuiltinInstance::StaticExample);
        let total: Size = st.tasks().iter().map(|t| t.mem_req).sum();
        let order = ids(&[D, A, C, B]);
        let bounded = list_schedule(&st.with_capacity(total).unwrap(), &order).unwrap();
        assert_eq!(bounded, infinite_schedule(st.tasks(), &order).unwrap());
    }

    #[test]
    fn dynamic_example_selectors() {
        let inst = builtin_instance(BuiltinInstance::DynamicExample);
        for (sel, span, order) in [
            (Selector::LargestComm, 23.0, [B, D, A, C]),
            (Selector::SmallestComm, 25.0, [B, A, C, D]),
            (Selector::MaxRatio, 24.0, [B, C, A, D]),
        ] {
            let s = dynamic_schedule(&inst, sel).unwrap();
            assert_eq!(s.makespan(), span, "{sel:?}");
            assert_eq!(s.comm_order(), ids(&order), "{sel:?}");
            assert_eq!(s.comp_order(), ids(&order), "{sel:?}");
            assert!(validate_schedule(&inst, &s).unwrap().feasible);
        }
    }

    #[test]
    fn corrections_example_selectors() {
        let inst = builtin_instance(BuiltinInstance::CorrectionsExample);
        let base = ids(&[B, C, D, E, A]);
        for (sel, span, order) in [
            (Selector::LargestComm, 33.0, [B, D, A, E, C]),
            (Selector::SmallestComm, 35.0, [B, E, A, D, C]),
            (Selector::MaxRatio, 33.0, [B, D, E, A, C]),
        ] {
            let s = corrected_schedule(&inst, &base, sel).unwrap();
            assert_eq!(s.makespan(), span, "{sel:?}");
            assert_eq!(s.comm_order(), ids(&order), "{sel:?}");
            assert!(validate_schedule(&inst, &s).unwrap().feasible);
        }
    }

    #[test]
    fn corrections_never_trigger_with_ample_memory() {
        let inst = builtin_instance(BuiltinInstance::CorrectionsExample).with_capacity(100.0).unwrap();
        let base = ids(&[C, A, E, B, D]);
        let listed = list_schedule(&inst, &base).unwrap();
        for sel in [Selector::LargestComm, Selector::SmallestComm, Selector::MaxRatio] {
            assert_eq!(corrected_schedule(&inst, &base, sel).unwrap(), listed);
        }
    }

    #[test]
    fn max_ratio_prefers_zero_transfer() {
        let inst = Instance::new(vec![Task::new(0, 1.0, 50.0), Task::new(1, 0.0, 1.0)], 5.0).unwrap();
        let s = dynamic_schedule(&inst, Selector::MaxRatio).unwrap();
        assert_eq!(s.comm_order()[0], TaskId(1));
    }

    #[test]
    fn oversized_task_is_infeasible() {
        let inst = builtin_instance(BuiltinInstance::CorrectionsExample).with_capacity(7.5).unwrap();
        let order = ids(&[A, B, C, D, E]);
        assert!(matches!(list_schedule(&inst, &order), Err(crate::Error::Infeasible { .. })));
        assert!(dynamic_schedule(&inst, Selector::MaxRatio).is_err());
        assert!(corrected_schedule(&inst, &order, Selector::MaxRatio).is_err());
    }

    #[test]
    fn order_must_be_a_permutation() {
        let inst = builtin_instance(BuiltinInstance::StaticExample);
        assert!(list_schedule(&inst, &ids(&[A, B, C])).is_err());
        assert!(list_schedule(&inst, &ids(&[A, B, C, C])).is_err());
        assert!(list_schedule(&inst, &ids(&[A, B, C, 9])).is_err());
    }
}
