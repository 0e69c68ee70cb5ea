//! Reference implementations used as test oracles. Each one is written
//! directly from the problem definition and shares no code with the crate.
#![allow(dead_code)]

use xfersched::{Instance, Schedule, Task, TaskId};

pub const TOL: f64 = 1e-9;

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                go(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Makespan of a permutation with unlimited memory.
pub fn unbounded_makespan(tasks: &[Task], perm: &[usize]) -> f64 {
    let (mut link, mut proc_) = (0.0f64, 0.0f64);
    for &i in perm {
        link += tasks[i].comm_time;
        proc_ = proc_.max(link) + tasks[i].comp_time;
    }
    proc_
}

/// Earliest schedule for a fixed transfer order and computation order, as
/// `(comm_start, comp_start)` per task position; `None` when the pair deadlocks
/// on memory.
pub fn simulate_pair(tasks: &[Task], capacity: f64, comm: &[usize], comp: &[usize]) -> Option<Vec<(f64, f64)>> {
    let n = tasks.len();
    let mut starts = vec![(f64::NAN, f64::NAN); n];
    let mut comm_end = vec![f64::NAN; n];
    let mut comp_end = vec![f64::NAN; n];
    let (mut ci, mut pi) = (0, 0);
    let (mut link, mut proc_) = (0.0f64, 0.0f64);
    while pi < n {
        let next = comp[pi];
        if !comm_end[next].is_nan() {
            let s = comm_end[next].max(proc_);
            starts[next].1 = s;
            comp_end[next] = s + tasks[next].comp_time;
            proc_ = comp_end[next];
            pi += 1;
            continue;
        }
        let task = comm[ci];
        // Memory in use at instant t by tasks already transferred.
        let used = |t: f64| -> f64 {
            (0..n)
                .filter(|&j| !comm_end[j].is_nan() && (comp_end[j].is_nan() || comp_end[j] > t + TOL))
                .map(|j| tasks[j].mem_req)
                .sum()
        };
        let mut candidates: Vec<f64> = vec![link];
        candidates.extend((0..n).filter(|&j| !comp_end[j].is_nan() && comp_end[j] > link).map(|j| comp_end[j]));
        candidates.sort_by(f64::total_cmp);
        let t = candidates.into_iter().find(|&t| used(t) + tasks[task].mem_req <= capacity + TOL)?;
        starts[task].0 = t;
        comm_end[task] = t + tasks[task].comm_time;
        link = comm_end[task];
        ci += 1;
    }
    Some(starts)
}

pub fn makespan_of(tasks: &[Task], starts: &[(f64, f64)]) -> f64 {
    tasks.iter().zip(starts).map(|(t, s)| s.1 + t.comp_time).fold(0.0, f64::max)
}

/// Best makespan over identical transfer and computation orders.
pub fn same_order_optimum(inst: &Instance) -> f64 {
    let tasks = inst.tasks();
    permutations(tasks.len())
        .iter()
        .filter_map(|p| simulate_pair(tasks, inst.capacity(), p, p).map(|s| makespan_of(tasks, &s)))
        .fold(f64::INFINITY, f64::min)
}

/// Best makespan over every pair of transfer and computation orders.
pub fn free_order_optimum(inst: &Instance) -> f64 {
    let tasks = inst.tasks();
    let perms = permutations(tasks.len());
    let mut best = f64::INFINITY;
    for c in &perms {
        for p in &perms {
            if let Some(s) = simulate_pair(tasks, inst.capacity(), c, p) {
                best = best.min(makespan_of(tasks, &s));
            }
        }
    }
    best
}

/// Total idle inflicted on the processor by a back-to-back sequence.
pub fn chain_cost(tasks: &[Task], perm: &[usize]) -> f64 {
    perm.windows(2).map(|w| (tasks[w[1]].comm_time - tasks[w[0]].comp_time).max(0.0)).sum()
}

/// Pairwise feasibility check of a schedule, straight from the constraints.
pub fn is_feasible(inst: &Instance, schedule: &Schedule) -> bool {
    let tasks = inst.tasks();
    if schedule.len() != tasks.len() {
        return false;
    }
    let slot: Vec<(f64, f64, f64, f64)> = tasks
        .iter()
        .map(|t| {
            let s = schedule.get(t.id).expect("scheduled");
            (s.comm_start, s.comm_start + t.comm_time, s.comp_start, s.comp_start + t.comp_time)
        })
        .collect();
    for (i, a) in slot.iter().enumerate() {
        if a.0 < -TOL || a.1 > a.2 + TOL {
            return false;
        }
        for b in &slot[i + 1..] {
            let overlap =
                |s1: f64, e1: f64, s2: f64, e2: f64| e1 - s1 > TOL && e2 - s2 > TOL && s1 < e2 - TOL && s2 < e1 - TOL;
            if overlap(a.0, a.1, b.0, b.1) || overlap(a.2, a.3, b.2, b.3) {
                return false;
            }
        }
        let held: f64 =
            slot.iter().zip(tasks).filter(|(b, _)| b.0 <= a.0 + TOL && b.3 > a.0 + TOL).map(|(_, t)| t.mem_req).sum();
        if held > inst.capacity() + TOL {
            return false;
        }
    }
    true
}

pub fn ids(v: &[u64]) -> Vec<TaskId> {
    v.iter().map(|&i| TaskId(i)).collect()
}
