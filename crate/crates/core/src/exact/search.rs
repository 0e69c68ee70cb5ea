//! Depth-first branch and bound over event orders.
//!
//! For a fixed pair of orders the earliest-start schedule is optimal: delaying
//! an event never frees memory sooner. The free-order search therefore
//! enumerates order pairs through their greedy simulation: at each node it
//! either starts the next computation or the next transfer. A transfer is only
//! branched on when the next computation's input is not yet in memory, which is
//! tracked by a barrier on communication positions; this visits every order
//! pair exactly once.

use crate::model::{Size, Task, Time, EPS};

/// Memory held by tasks outside the search, released at known instants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Release {
    pub at: Time,
    pub mem: Size,
}

/// Resource state the search starts from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StartState {
    pub comm_free: Time,
    pub comp_free: Time,
    pub releases: Vec<Release>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// Task positions in communication order.
    pub comm_order: Vec<usize>,
    /// Task positions in computation order.
    pub comp_order: Vec<usize>,
    /// `(comm_start, comp_start)` per task position.
    pub starts: Vec<(Time, Time)>,
    pub makespan: Time,
}

/// Position of the first task identical to each task.
fn classes(tasks: &[Task]) -> Vec<usize> {
    (0..tasks.len())
        .map(|i| {
            (0..i)
                .find(|&j| {
                    let (a, b) = (&tasks[i], &tasks[j]);
                    a.comm_time == b.comm_time && a.comp_time == b.comp_time && a.mem_req == b.mem_req
                })
                .unwrap_or(i)
        })
        .collect()
}

struct FreeSearch<'a> {
    tasks: &'a [Task],
    class: Vec<usize>,
    capacity: Size,
    releases: Vec<Release>,
    // per task
    communicated: Vec<bool>,
    computed: Vec<bool>,
    pos: Vec<usize>,
    comm_start: Vec<Time>,
    comm_end: Vec<Time>,
    comp_start: Vec<Time>,
    comp_end: Vec<Time>,
    // running state
    comm_free: Time,
    comp_free: Time,
    barrier: usize,
    comm_seq: Vec<usize>,
    comp_seq: Vec<usize>,
    rem_comm: Time,
    rem_comp: Time,
    best: Time,
    found: Option<SearchResult>,
}

impl<'a> FreeSearch<'a> {
    fn lower_bound(&self) -> Time {
        let mut lb = self.comp_free + self.rem_comp;
        let min_comp = (0..self.tasks.len())
            .filter(|&i| !self.communicated[i])
            .map(|i| self.tasks[i].comp_time)
            .fold(f64::INFINITY, f64::min);
        if min_comp.is_finite() {
            lb = lb.max(self.comm_free + self.rem_comm + min_comp);
        }
        lb
    }

    fn mem_at(&self, t: Time) -> Size {
        let outside: Size = self.releases.iter().filter(|r| r.at > t + EPS).map(|r| r.mem).sum();
        let inside: Size = (0..self.tasks.len())
            .filter(|&i| self.communicated[i] && (!self.computed[i] || self.comp_end[i] > t + EPS))
            .map(|i| self.tasks[i].mem_req)
            .sum();
        outside + inside
    }

    /// Earliest instant at or after the link is free at which task `i` fits.
    fn earliest_fit(&self, i: usize) -> Option<Time> {
        let need = self.tasks[i].mem_req;
        let t0 = self.comm_free;
        if self.mem_at(t0) + need <= self.capacity + EPS {
            return Some(t0);
        }
        let mut times: Vec<Time> = self
            .releases
            .iter()
            .map(|r| r.at)
            .chain((0..self.tasks.len()).filter(|&j| self.computed[j]).map(|j| self.comp_end[j]))
            .filter(|&x| x > t0 + EPS)
            .collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        times.into_iter().find(|&t| self.mem_at(t) + need <= self.capacity + EPS)
    }

    fn dfs(&mut self) {
        let n = self.tasks.len();
        if self.comp_seq.len() == n {
            let value = self.comp_free;
            if value < self.best - EPS {
                self.best = value;
                self.found = Some(SearchResult {
                    comm_order: self.comm_seq.clone(),
                    comp_order: self.comp_seq.clone(),
                    starts: (0..n).map(|i| (self.comm_start[i], self.comp_start[i])).collect(),
                    makespan: value,
                });
            }
            return;
        }
        if self.lower_bound() >= self.best - EPS {
            return;
        }

        // Start a computation whose input is already in memory.
        for i in 0..n {
            if !self.communicated[i] || self.computed[i] || self.pos[i] < self.barrier {
                continue;
            }
            let shadowed = (0..i).any(|j| {
                self.class[j] == self.class[i] && self.communicated[j] && !self.computed[j] && self.pos[j] < self.pos[i]
            });
            if shadowed {
                continue;
            }
            let saved = (self.comp_free, self.barrier);
            let start = self.comm_end[i].max(self.comp_free);
            self.comp_start[i] = start;
            self.comp_end[i] = start + self.tasks[i].comp_time;
            self.computed[i] = true;
            self.comp_free = self.comp_end[i];
            self.rem_comp -= self.tasks[i].comp_time;
            self.barrier = 0;
            self.comp_seq.push(i);
            self.dfs();
            self.comp_seq.pop();
            self.rem_comp += self.tasks[i].comp_time;
            self.computed[i] = false;
            (self.comp_free, self.barrier) = saved;
        }

        // Or transfer another task; the next computation then comes from here on.
        for i in 0..n {
            if self.communicated[i] {
                continue;
            }
            if (0..i).any(|j| self.class[j] == self.class[i] && !self.communicated[j]) {
                continue;
            }
            let Some(t) = self.earliest_fit(i) else { continue };
            let saved = (self.comm_free, self.barrier);
            let p = self.comm_seq.len();
            self.comm_start[i] = t;
            self.comm_end[i] = t + self.tasks[i].comm_time;
            self.communicated[i] = true;
            self.pos[i] = p;
            self.comm_free = self.comm_end[i];
            self.rem_comm -= self.tasks[i].comm_time;
            self.barrier = p;
            self.comm_seq.push(i);
            self.dfs();
            self.comm_seq.pop();
            self.rem_comm += self.tasks[i].comm_time;
            self.communicated[i] = false;
            (self.comm_free, self.barrier) = saved;
        }
    }
}

/// Minimum-makespan schedule over all pairs of communication and computation
/// orders. `bound`, when given, must be the makespan of some feasible schedule;
/// it only speeds up pruning.
///
/// Returns `None` when no order pair is feasible.
pub fn free_order_search(
    tasks: &[Task],
    capacity: Size,
    start: &StartState,
    bound: Option<Time>,
) -> Option<SearchResult> {
    let n = tasks.len();
    if n == 0 {
        let makespan = start.comp_free;
        return Some(SearchResult { comm_order: vec![], comp_order: vec![], starts: vec![], makespan });
    }
    let mut s = FreeSearch {
        tasks,
        class: classes(tasks),
        capacity,
        releases: start.releases.iter().copied().filter(|r| r.at > start.comm_free + EPS).collect(),
        communicated: vec![false; n],
        computed: vec![false; n],
        pos: vec![0; n],
        comm_start: vec![0.0; n],
        comm_end: vec![0.0; n],
        comp_start: vec![0.0; n],
        comp_end: vec![0.0; n],
        comm_free: start.comm_free,
        comp_free: start.comp_free,
        barrier: 0,
        comm_seq: Vec::with_capacity(n),
        comp_seq: Vec::with_capacity(n),
        rem_comm: tasks.iter().map(|t| t.comm_time).sum(),
        rem_comp: tasks.iter().map(|t| t.comp_time).sum(),
        best: bound.map_or(f64::INFINITY, |b| b + 1e-6),
        found: None,
    };
    s.dfs();
    s.found
}

/// Order by task position, `(comm_start, comp_start)` per position, makespan.
type SameOrderFound = (Vec<usize>, Vec<(Time, Time)>, Time);

#[derive(Clone)]
struct Prefix {
    comm_free: Time,
    comp_free: Time,
    live: Vec<(Time, Size)>,
}

struct SameSearch<'a> {
    tasks: &'a [Task],
    /// Task positions sorted by id, the enumeration order.
    by_id: Vec<usize>,
    class: Vec<usize>,
    capacity: Size,
    used: Vec<bool>,
    seq: Vec<usize>,
    starts: Vec<(Time, Time)>,
    rem_comm: Time,
    rem_comp: Time,
    best: Time,
    found: Option<SameOrderFound>,
}

impl<'a> SameSearch<'a> {
    fn dfs(&mut self, state: &Prefix) {
        let n = self.tasks.len();
        if self.seq.len() == n {
            if state.comp_free < self.best - EPS {
                self.best = state.comp_free;
                self.found = Some((self.seq.clone(), self.starts.clone(), state.comp_free));
            }
            return;
        }
        let min_comp = (0..n).filter(|&i| !self.used[i]).map(|i| self.tasks[i].comp_time).fold(f64::INFINITY, f64::min);
        let lb = (state.comp_free + self.rem_comp).max(state.comm_free + self.rem_comm + min_comp);
        if lb >= self.best - EPS {
            return;
        }
        for k in 0..n {
            let i = self.by_id[k];
            if self.used[i] {
                continue;
            }
            if self.by_id[..k].iter().any(|&j| !self.used[j] && self.class[j] == self.class[i]) {
                continue;
            }
            let task = &self.tasks[i];
            let mut t = state.comm_free;
            loop {
                let held: Size = state.live.iter().filter(|l| l.0 > t + EPS).map(|l| l.1).sum();
                if held + task.mem_req <= self.capacity + EPS {
                    break;
                }
                t = state
                    .live
                    .iter()
                    .map(|l| l.0)
                    .filter(|&e| e > t + EPS)
                    .min_by(f64::total_cmp)
                    .expect("task fits in empty memory");
            }
            let comm_end = t + task.comm_time;
            let comp_start = comm_end.max(state.comp_free);
            let comp_end = comp_start + task.comp_time;
            let mut live: Vec<(Time, Size)> = state.live.iter().copied().filter(|l| l.0 > t + EPS).collect();
            live.push((comp_end, task.mem_req));
            let next = Prefix { comm_free: comm_end, comp_free: comp_end, live };
            self.used[i] = true;
            self.seq.push(i);
            self.starts[i] = (t, comp_start);
            self.rem_comm -= task.comm_time;
            self.rem_comp -= task.comp_time;
            self.dfs(&next);
            self.rem_comm += task.comm_time;
            self.rem_comp += task.comp_time;
            self.seq.pop();
            self.used[i] = false;
        }
    }
}

/// Minimum-makespan permutation schedule. Orders are enumerated by task id,
/// so the lexicographically smallest optimal order is returned.
pub fn same_order_search(tasks: &[Task], capacity: Size) -> SameOrderFound {
    let n = tasks.len();
    let mut by_id: Vec<usize> = (0..n).collect();
    by_id.sort_by_key(|&i| tasks[i].id);
    // Identical tasks are only tried in id order.
    let mut s = SameSearch {
        tasks,
        by_id,
        class: classes(tasks),
        capacity,
        used: vec![false; n],
        seq: Vec::with_capacity(n),
        starts: vec![(0.0, 0.0); n],
        rem_comm: tasks.iter().map(|t| t.comm_time).sum(),
        rem_comp: tasks.iter().map(|t| t.comp_time).sum(),
        best: f64::INFINITY,
        found: None,
    };
    s.dfs(&Prefix { comm_free: 0.0, comp_free: 0.0, live: vec![] });
    s.found.unwrap_or((vec![], vec![], 0.0))
}
