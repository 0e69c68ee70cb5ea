//! Domain types: tasks, instances, schedules and the feasibility validator.
//!
//! A task first transfers its input over the communication link, then runs on
//! the computation resource. It holds `mem_req` units of target memory over the
//! half-open interval `[comm_start, comp_end)`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Durations and instants, in abstract time units.
pub type Time = f64;
/// Memory amounts, in abstract capacity units.
pub type Size = f64;

/// Absolute tolerance used for every time and size comparison.
pub const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaskId(pub u64);

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: TaskId,
    pub comm_time: Time,
    pub comp_time: Time,
    pub mem_req: Size,
}

impl Task {
    /// A task whose memory requirement equals its communication time.
    pub fn new(id: u64, comm_time: Time, comp_time: Time) -> Self {
        Task { id: TaskId(id), comm_time, comp_time, mem_req: comm_time }
    }

    pub fn with_mem(id: u64, comm_time: Time, comp_time: Time, mem_req: Size) -> Self {
        Task { id: TaskId(id), comm_time, comp_time, mem_req }
    }

    /// Compute intensive: computation time not less than communication time.
    pub fn is_compute_intensive(&self) -> bool {
        self.comp_time >= self.comm_time
    }

    fn check(&self) -> Result<()> {
        for (name, v) in [("comm_time", self.comm_time), ("comp_time", self.comp_time), ("mem_req", self.mem_req)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Input(format!("task {}: {name} must be a non-negative number, got {v}", self.id)));
            }
        }
        Ok(())
    }
}

/// Checks value ranges and id uniqueness of a task list.
pub fn check_tasks(tasks: &[Task]) -> Result<()> {
    let mut seen = HashSet::with_capacity(tasks.len());
    for t in tasks {
        t.check()?;
        if !seen.insert(t.id) {
            return Err(Error::Input(format!("duplicate task id {}", t.id)));
        }
    }
    Ok(())
}

/// A task set in submission order plus the memory capacity of the target node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    tasks: Vec<Task>,
    capacity: Size,
}

impl Instance {
    pub fn new(tasks: Vec<Task>, capacity: Size) -> Result<Self> {
        check_tasks(&tasks)?;
        if capacity.is_nan() || capacity < 0.0 {
            return Err(Error::Input(format!("capacity must be non-negative, got {capacity}")));
        }
        Ok(Instance { tasks, capacity })
    }

    /// Same tasks with memory never binding.
    pub fn unbounded(tasks: Vec<Task>) -> Result<Self> {
        Self::new(tasks, Size::INFINITY)
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn capacity(&self) -> Size {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn with_capacity(&self, capacity: Size) -> Result<Self> {
        Self::new(self.tasks.clone(), capacity)
    }

    /// Position of every task id in the submission order.
    pub fn index(&self) -> HashMap<TaskId, usize> {
        self.tasks.iter().enumerate().map(|(i, t)| (t.id, i)).collect()
    }

    pub fn task(&self, id: TaskId) -> Option<&Task> {
        self.tasks.iter().find(|t| t.id == id)
    }

    /// Every task fits in memory on its own.
    pub fn is_feasible(&self) -> bool {
        self.tasks.iter().all(|t| t.mem_req <= self.capacity + EPS)
    }

    /// Fails with [`Error::Infeasible`] on the first task larger than the capacity.
    pub fn ensure_feasible(&self) -> Result<()> {
        match self.tasks.iter().find(|t| t.mem_req > self.capacity + EPS) {
            Some(t) => Err(Error::Infeasible { task: t.id, mem_req: t.mem_req, capacity: self.capacity }),
            None => Ok(()),
        }
    }

    /// Maps an order of task ids to positions, checking it is a permutation.
    pub fn positions(&self, order: &[TaskId]) -> Result<Vec<usize>> {
        let index = self.index();
        if order.len() != self.tasks.len() {
            return Err(Error::Input(format!("order has {} entries for {} tasks", order.len(), self.tasks.len())));
        }
        let mut used = vec![false; self.tasks.len()];
        order
            .iter()
            .map(|id| {
                let &p = index.get(id).ok_or_else(|| Error::Input(format!("unknown task id {id}")))?;
                if std::mem::replace(&mut used[p], true) {
                    return Err(Error::Input(format!("task id {id} repeated in order")));
                }
                Ok(p)
            })
            .collect()
    }
}

/// Start and end instants of one task on both resources.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slot {
    pub comm_start: Time,
    pub comm_end: Time,
    pub comp_start: Time,
    pub comp_end: Time,
}

impl Slot {
    pub fn new(task: &Task, comm_start: Time, comp_start: Time) -> Self {
        Slot { comm_start, comm_end: comm_start + task.comm_time, comp_start, comp_end: comp_start + task.comp_time }
    }

    fn shifted(self, by: Time) -> Self {
        Slot {
            comm_start: self.comm_start + by,
            comm_end: self.comm_end + by,
            comp_start: self.comp_start + by,
            comp_end: self.comp_end + by,
        }
    }
}

/// Serialized form of one schedule entry: `{id, comm_start, comp_start}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub id: TaskId,
    pub comm_start: Time,
    pub comp_start: Time,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    entries: BTreeMap<TaskId, Slot>,
}

impl Schedule {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuilds a schedule from bare start times, taking durations from `tasks`.
    pub fn from_entries(tasks: &[Task], entries: &[ScheduleEntry]) -> Result<Self> {
        let by_id: HashMap<TaskId, &Task> = tasks.iter().map(|t| (t.id, t)).collect();
        let mut schedule = Schedule::new();
        for e in entries {
            let task = by_id.get(&e.id).ok_or_else(|| Error::Input(format!("schedule names unknown task {}", e.id)))?;
            if schedule.entries.contains_key(&e.id) {
                return Err(Error::Input(format!("task {} scheduled twice", e.id)));
            }
            schedule.insert(task, e.comm_start, e.comp_start);
        }
        Ok(schedule)
    }

    pub fn insert(&mut self, task: &Task, comm_start: Time, comp_start: Time) {
        self.entries.insert(task.id, Slot::new(task, comm_start, comp_start));
    }

    pub fn get(&self, id: TaskId) -> Option<&Slot> {
        self.entries.get(&id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (TaskId, &Slot)> {
        self.entries.iter().map(|(&id, s)| (id, s))
    }

    /// Completion time of the last computation; 0 for an empty schedule.
    pub fn makespan(&self) -> Time {
        self.entries.values().map(|s| s.comp_end).fold(0.0, f64::max)
    }

    pub fn entries(&self) -> Vec<ScheduleEntry> {
        self.entries
            .iter()
            .map(|(&id, s)| ScheduleEntry { id, comm_start: s.comm_start, comp_start: s.comp_start })
            .collect()
    }

    /// Task ids by communication start (ties: earlier computation, then id).
    pub fn comm_order(&self) -> Vec<TaskId> {
        self.order_by(|s| (s.comm_start, s.comp_start))
    }

    /// Task ids by computation start (ties: earlier communication, then id).
    pub fn comp_order(&self) -> Vec<TaskId> {
        self.order_by(|s| (s.comp_start, s.comm_start))
    }

    fn order_by(&self, key: impl Fn(&Slot) -> (Time, Time)) -> Vec<TaskId> {
        let mut ids: Vec<(TaskId, (Time, Time))> = self.entries.iter().map(|(&id, s)| (id, key(s))).collect();
        ids.sort_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(a.1 .1.total_cmp(&b.1 .1)).then(a.0.cmp(&b.0)));
        ids.into_iter().map(|(id, _)| id).collect()
    }

    /// Moves every event of `other` by `offset` and adds it to this schedule.
    pub fn append_shifted(&mut self, other: &Schedule, offset: Time) {
        for (&id, slot) in &other.entries {
            self.entries.insert(id, slot.shifted(offset));
        }
    }
}

/// Completion time of the last computation; 0 for an empty schedule.
pub fn makespan(schedule: &Schedule) -> Time {
    schedule.makespan()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    CommOverlap,
    CompOverlap,
    Precedence,
    Memory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub tasks: Vec<TaskId>,
    pub time: Time,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.tasks.iter().map(|t| t.to_string()).collect();
        write!(f, "{:?} at t={} involving [{}]", self.kind, self.time, ids.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

/// Checks a schedule against every constraint of the instance.
///
/// Memory is only checked at communication starts: usage is piecewise constant
/// and only grows there. A task whose computation ends exactly at the instant
/// is no longer counted; one whose communication starts at it is.
pub fn validate_schedule(instance: &Instance, schedule: &Schedule) -> Result<ValidationReport> {
    for (id, _) in schedule.iter() {
        if instance.task(id).is_none() {
            return Err(Error::Input(format!("schedule names unknown task {id}")));
        }
    }
    if let Some(t) = instance.tasks().iter().find(|t| schedule.get(t.id).is_none()) {
        return Err(Error::Input(format!("task {} missing from schedule", t.id)));
    }

    // Recompute ends from the instance so a stale slot cannot hide a violation.
    let rows: Vec<(TaskId, Size, Slot)> = instance
        .tasks()
        .iter()
        .map(|t| {
            let s = schedule.get(t.id).expect("checked above");
            (t.id, t.mem_req, Slot::new(t, s.comm_start, s.comp_start))
        })
        .collect();

    let mut violations = Vec::new();

    for (id, _, s) in &rows {
        if s.comp_start < s.comm_end - EPS {
            violations.push(Violation { kind: ViolationKind::Precedence, tasks: vec![*id], time: s.comp_start });
        }
    }

    overlaps(&rows, |s| (s.comm_start, s.comm_end), ViolationKind::CommOverlap, &mut violations);
    overlaps(&rows, |s| (s.comp_start, s.comp_end), ViolationKind::CompOverlap, &mut violations);

    // Sweep acquisitions and releases in time order.
    let mut starts: Vec<usize> = (0..rows.len()).collect();
    starts.sort_by(|&a, &b| rows[a].2.comm_start.total_cmp(&rows[b].2.comm_start));
    let mut ends: Vec<usize> = (0..rows.len()).collect();
    ends.sort_by(|&a, &b| rows[a].2.comp_end.total_cmp(&rows[b].2.comp_end));
    let (mut acquired, mut released) = (0usize, 0usize);
    let mut live = vec![false; rows.len()];
    let mut live_mem = 0.0;
    let mut k = 0;
    while k < starts.len() {
        let t = rows[starts[k]].2.comm_start;
        while acquired < starts.len() && rows[starts[acquired]].2.comm_start <= t + EPS {
            let i = starts[acquired];
            if rows[i].2.comp_end > t + EPS {
                live[i] = true;
                live_mem += rows[i].1;
            }
            acquired += 1;
        }
        while released < ends.len() && rows[ends[released]].2.comp_end <= t + EPS {
            let i = ends[released];
            if live[i] {
                live[i] = false;
                live_mem -= rows[i].1;
            }
            released += 1;
        }
        if live_mem > instance.capacity() + EPS {
            // Recount exactly before reporting.
            let ids: Vec<TaskId> = rows
                .iter()
                .filter(|(_, _, s)| s.comm_start <= t + EPS && s.comp_end > t + EPS)
                .map(|(id, _, _)| *id)
                .collect();
            let used: Size = rows.iter().filter(|(id, _, _)| ids.contains(id)).map(|r| r.1).sum();
            if used > instance.capacity() + EPS {
                violations.push(Violation { kind: ViolationKind::Memory, tasks: ids, time: t });
            }
        }
        k = acquired;
    }

    Ok(ValidationReport { feasible: violations.is_empty(), violations })
}

fn overlaps(
    rows: &[(TaskId, Size, Slot)],
    interval: impl Fn(&Slot) -> (Time, Time),
    kind: ViolationKind,
    out: &mut Vec<Violation>,
) {
    // Zero-length intervals occupy no time and cannot collide.
    let mut iv: Vec<(Time, Time, TaskId)> = rows
        .iter()
        .map(|(id, _, s)| {
            let (a, b) = interval(s);
            (a, b, *id)
        })
        .filter(|(a, b, _)| b - a > EPS)
        .collect();
    iv.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.2.cmp(&y.2)));
    let mut reach: Option<(Time, TaskId)> = None;
    for (a, b, id) in iv {
        if let Some((end, holder)) = reach {
            if a < end - EPS {
                out.push(Violation { kind, tasks: vec![holder, id], time: a });
            }
            if b > end {
                reach = Some((b, id));
            }
        } else {
            reach = Some((b, id));
        }
    }
}

/// Smallest capacity at which every task can run on its own.
pub fn min_capacity(tasks: &[Task]) -> Result<Size> {
    if tasks.is_empty() {
        return Err(Error::Input("min_capacity of an empty task list".into()));
    }
    Ok(tasks.iter().map(|t| t.mem_req).fold(0.0, f64::max))
}

/// Largest amount of memory a schedule holds at any instant.
pub fn peak_memory(tasks: &[Task], schedule: &Schedule) -> Size {
    let held: Vec<(Time, Time, Size)> =
        tasks.iter().filter_map(|t| schedule.get(t.id).map(|s| (s.comm_start, s.comp_end, t.mem_req))).collect();
    held.iter()
        .map(|&(t, _, _)| held.iter().filter(|h| h.0 <= t + EPS && h.1 > t + EPS).map(|h| h.2).sum::<Size>())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkloadBounds {
    pub sum_comm: Time,
    pub sum_comp: Time,
    /// No schedule can be shorter than the busier resource.
    pub lower: Time,
    /// Makespan of the fully sequential, zero-overlap schedule.
    pub upper: Time,
}

pub fn workload_bounds(tasks: &[Task]) -> WorkloadBounds {
    let sum_comm: Time = tasks.iter().map(|t| t.comm_time).sum();
    let sum_comp: Time = tasks.iter().map(|t| t.comp_time).sum();
    WorkloadBounds { sum_comm, sum_comp, lower: sum_comm.max(sum_comp), upper: sum_comm + sum_comp }
}
