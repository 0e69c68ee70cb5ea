//! Ordering strategies and the single dispatch entry point.
//!
//! | id | regime | order |
//! |----|--------|-------|
//! | OS | static | submission order |
//! | OOSIM | static | Johnson order |
//! | IOCMS / DOCPS | static | transfer time up / computation time down |
//! | IOCCS / DOCCS | static | transfer + computation up / down |
//! | GG | static | Gilmore-Gomory no-wait sequence |
//! | BP | static | First-Fit bins, bin by bin |
//! | LCMR / SCMR / MAMR | dynamic | largest transfer / smallest transfer / max comp-to-comm ratio |
//! | OOLCMR / OOSCMR / OOMAMR | corrected | Johnson order, dynamic choice on memory stalls |
//! | lp.k | windowed exact | see [`crate::exact::lp_k`] |
//!
//! Favorable situations, as a rough guide: the Johnson order is optimal when
//! memory never binds, and so are IOCMS on all-compute-intensive and DOCPS on
//! all-communication-intensive task sets. IOCCS and DOCCS suit moderate
//! capacities with mostly compute (resp. communication) intensive tasks. The
//! dynamic selectors are meant for tight memory, and the corrected variants for
//! moderate memory with a mix of task types.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::engine::{corrected_schedule, dynamic_schedule, list_schedule, Selector};
use crate::error::{Error, Result};
use crate::exact::lp_k;
use crate::johnson::{johnson_order, omim};
use crate::model::{Instance, Schedule, Size, Task, TaskId, Time, EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum HeuristicId {
    Os,
    Oosim,
    Iocms,
    Docps,
    Ioccs,
    Doccs,
    Gg,
    Bp,
    Lcmr,
    Scmr,
    Mamr,
    Oolcmr,
    Ooscmr,
    Oomamr,
    LpK(usize),
}

impl HeuristicId {
    pub const STATIC: [HeuristicId; 8] = [
        HeuristicId::Os,
        HeuristicId::Oosim,
        HeuristicId::Iocms,
        HeuristicId::Docps,
        HeuristicId::Ioccs,
        HeuristicId::Doccs,
        HeuristicId::Gg,
        HeuristicId::Bp,
    ];
    pub const DYNAMIC: [HeuristicId; 3] = [HeuristicId::Lcmr, HeuristicId::Scmr, HeuristicId::Mamr];
    pub const CORRECTED: [HeuristicId; 3] = [HeuristicId::Oolcmr, HeuristicId::Ooscmr, HeuristicId::Oomamr];

    /// Every strategy except the windowed exact solver.
    pub fn all() -> Vec<HeuristicId> {
        Self::STATIC.iter().chain(&Self::DYNAMIC).chain(&Self::CORRECTED).copied().collect()
    }

    pub fn name(&self) -> String {
        match self {
            HeuristicId::Os => "OS".into(),
            HeuristicId::Oosim => "OOSIM".into(),
            HeuristicId::Iocms => "IOCMS".into(),
            HeuristicId::Docps => "DOCPS".into(),
            HeuristicId::Ioccs => "IOCCS".into(),
            HeuristicId::Doccs => "DOCCS".into(),
            HeuristicId::Gg => "GG".into(),
            HeuristicId::Bp => "BP".into(),
            HeuristicId::Lcmr => "LCMR".into(),
            HeuristicId::Scmr => "SCMR".into(),
            HeuristicId::Mamr => "MAMR".into(),
            HeuristicId::Oolcmr => "OOLCMR".into(),
            HeuristicId::Ooscmr => "OOSCMR".into(),
            HeuristicId::Oomamr => "OOMAMR".into(),
            HeuristicId::LpK(k) => format!("lp.{k}"),
        }
    }
}

impl fmt::Display for HeuristicId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for HeuristicId {
    type Err = Error;

    /// Accepts the short names case-insensitively, and `lp.K`, `lpK`, `lp_K` or `LP_K(K)`.
    fn from_str(s: &str) -> Result<Self> {
        let up = s.trim().to_ascii_uppercase();
        if let Some(rest) = up.strip_prefix("LP") {
            let digits: String = rest.chars().filter(|c| c.is_ascii_digit()).collect();
            let k = digits.parse().map_err(|_| Error::Parameter(format!("unknown heuristic {s:?}")))?;
            return Ok(HeuristicId::LpK(k));
        }
        Self::all()
            .into_iter()
            .find(|h| h.name() == up)
            .ok_or_else(|| Error::Parameter(format!("unknown heuristic {s:?}")))
    }
}

impl From<HeuristicId> for String {
    fn from(h: HeuristicId) -> String {
        h.name()
    }
}

impl TryFrom<String> for HeuristicId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Pre-computed order for the sort-based static strategies.
pub fn static_order(tasks: &[Task], id: HeuristicId) -> Result<Vec<TaskId>> {
    let mut sorted: Vec<&Task> = tasks.iter().collect();
    let by = |key: fn(&Task) -> f64, ascending: bool| {
        move |a: &&Task, b: &&Task| {
            let (ka, kb) = (key(a), key(b));
            let ord = if ascending { ka.total_cmp(&kb) } else { kb.total_cmp(&ka) };
            ord.then(a.id.cmp(&b.id))
        }
    };
    match id {
        HeuristicId::Os => {}
        HeuristicId::Oosim => return Ok(johnson_order(tasks)),
        HeuristicId::Iocms => sorted.sort_by(by(|t| t.comm_time, true)),
        HeuristicId::Docps => sorted.sort_by(by(|t| t.comp_time, false)),
        HeuristicId::Ioccs => sorted.sort_by(by(|t| t.comm_time + t.comp_time, true)),
        HeuristicId::Doccs => sorted.sort_by(by(|t| t.comm_time + t.comp_time, false)),
        other => return Err(Error::Parameter(format!("{other} is not a sort-based static order"))),
    }
    Ok(sorted.into_iter().map(|t| t.id).collect())
}

/// Idle time on the computation resource when `next` follows `prev` back to back.
pub fn transition_cost(prev: &Task, next: &Task) -> Time {
    (next.comm_time - prev.comp_time).max(0.0)
}

pub fn sequence_cost(tasks: &[Task], order: &[TaskId]) -> Time {
    let seq: Vec<&Task> = order.iter().map(|id| tasks.iter().find(|t| t.id == *id).expect("known id")).collect();
    seq.windows(2).map(|w| transition_cost(w[0], w[1])).sum()
}

/// Gilmore-Gomory sequence minimizing the total transition cost.
///
/// Each task is a job moving a state from `comm_time` (start) to `comp_time`
/// (end); moving up costs the distance, moving down is free. A dummy job closes
/// the path into a tour at zero cost. The optimal assignment of end states to
/// start states is patched into one tour by a minimum spanning set of adjacent
/// interchanges. When the submission order already attains the optimum it is
/// kept.
pub fn gilmore_gomory_order(tasks: &[Task]) -> Vec<TaskId> {
    let n = tasks.len();
    if n <= 1 {
        return tasks.iter().map(|t| t.id).collect();
    }
    let top = tasks.iter().map(|t| t.comm_time).fold(0.0, f64::max);
    // Job n is the dummy.
    let start: Vec<f64> = tasks.iter().map(|t| t.comm_time).chain([0.0]).collect();
    let end: Vec<f64> = tasks.iter().map(|t| t.comp_time).chain([top]).collect();
    let jobs = n + 1;

    // Rank jobs by end state; the i-th smallest end is followed by the i-th smallest start.
    let mut by_end: Vec<usize> = (0..jobs).collect();
    by_end.sort_by(|&x, &y| end[x].total_cmp(&end[y]).then(x.cmp(&y)));
    let mut by_start: Vec<usize> = (0..jobs).collect();
    by_start.sort_by(|&x, &y| start[x].total_cmp(&start[y]).then(x.cmp(&y)));
    let b: Vec<f64> = by_end.iter().map(|&j| end[j]).collect();
    // succ[i]: start-rank of the successor of end-rank i.
    let mut succ: Vec<usize> = (0..jobs).collect();
    let a = |r: usize| start[by_start[r]];

    // Cycles of the assignment, over end ranks.
    let mut comp = vec![usize::MAX; jobs];
    let end_rank_of_job: Vec<usize> = {
        let mut r = vec![0; jobs];
        for (i, &j) in by_end.iter().enumerate() {
            r[j] = i;
        }
        r
    };
    let mut ncomp = 0;
    for s in 0..jobs {
        if comp[s] != usize::MAX {
            continue;
        }
        let mut i = s;
        while comp[i] == usize::MAX {
            comp[i] = ncomp;
            i = end_rank_of_job[by_start[succ[i]]];
        }
        ncomp += 1;
    }

    // Interchange costs between neighbouring end ranks.
    let mut edges: Vec<(f64, usize)> = (0..jobs - 1)
        .map(|i| {
            let lo = b[i].max(a(succ[i]));
            let hi = b[i + 1].min(a(succ[i + 1]));
            ((hi - lo).max(0.0), i)
        })
        .collect();
    edges.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

    let mut parent: Vec<usize> = (0..ncomp).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    let mut chosen = Vec::new();
    for &(_, i) in &edges {
        let (x, y) = (find(&mut parent, comp[i]), find(&mut parent, comp[i + 1]));
        if x != y {
            parent[x] = y;
            chosen.push(i);
        }
    }

    // Upward interchanges by decreasing index, then downward ones by increasing index.
    let (mut up, mut down): (Vec<usize>, Vec<usize>) = chosen.into_iter().partition(|&i| a(succ[i]) >= b[i]);
    up.sort_unstable_by(|x, y| y.cmp(x));
    down.sort_unstable();
    for i in up.into_iter().chain(down) {
        succ.swap(i, i + 1);
    }

    // Walk the tour from the dummy.
    let mut order = Vec::with_capacity(n);
    let mut job = n;
    for _ in 0..n {
        job = by_start[succ[end_rank_of_job[job]]];
        order.push(tasks[job].id);
    }
    debug_assert_eq!(by_start[succ[end_rank_of_job[job]]], n, "tour returns to the dummy");

    let submission: Vec<TaskId> = tasks.iter().map(|t| t.id).collect();
    if sequence_cost(tasks, &submission) <= sequence_cost(tasks, &order) + EPS {
        submission
    } else {
        order
    }
}

/// First-Fit over the submission order with bins the size of the memory;
/// tasks are emitted bin by bin in insertion order.
pub fn bin_packing_order(tasks: &[Task], capacity: Size) -> Result<Vec<TaskId>> {
    let mut bins: Vec<(Size, Vec<TaskId>)> = Vec::new();
    for t in tasks {
        if t.mem_req > capacity + EPS {
            return Err(Error::Infeasible { task: t.id, mem_req: t.mem_req, capacity });
        }
        match bins.iter_mut().find(|(load, _)| load + t.mem_req <= capacity + EPS) {
            Some((load, members)) => {
                *load += t.mem_req;
                members.push(t.id);
            }
            None => bins.push((t.mem_req, vec![t.id])),
        }
    }
    Ok(bins.into_iter().flat_map(|(_, members)| members).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicRun {
    pub heuristic: HeuristicId,
    pub schedule: Schedule,
    pub makespan: Time,
    /// Makespan over the infinite-memory optimum.
    pub ratio: f64,
}

/// Ratio of a makespan to a lower bound; 1 when both are zero.
pub fn ratio_to(makespan: Time, lower: Time) -> f64 {
    if lower <= EPS {
        if makespan <= EPS {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        makespan / lower
    }
}

pub fn heuristic_schedule(instance: &Instance, id: HeuristicId) -> Result<Schedule> {
    let tasks = instance.tasks();
    match id {
        HeuristicId::Os
        | HeuristicId::Oosim
        | HeuristicId::Iocms
        | HeuristicId::Docps
        | HeuristicId::Ioccs
        | HeuristicId::Doccs => list_schedule(instance, &static_order(tasks, id)?),
        HeuristicId::Gg => list_schedule(instance, &gilmore_gomory_order(tasks)),
        HeuristicId::Bp => list_schedule(instance, &bin_packing_order(tasks, instance.capacity())?),
        HeuristicId::Lcmr => dynamic_schedule(instance, Selector::LargestComm),
        HeuristicId::Scmr => dynamic_schedule(instance, Selector::SmallestComm),
        HeuristicId::Mamr => dynamic_schedule(instance, Selector::MaxRatio),
        HeuristicId::Oolcmr => corrected_schedule(instance, &johnson_order(tasks), Selector::LargestComm),
        HeuristicId::Ooscmr => corrected_schedule(instance, &johnson_order(tasks), Selector::SmallestComm),
        HeuristicId::Oomamr => corrected_schedule(instance, &johnson_order(tasks), Selector::MaxRatio),
        HeuristicId::LpK(k) => lp_k(instance, k),
    }
}

pub fn run_heuristic(instance: &Instance, id: HeuristicId) -> Result<HeuristicRun> {
    let schedule = heuristic_schedule(instance, id)?;
    let makespan = schedule.makespan();
    Ok(HeuristicRun { heuristic: id, ratio: ratio_to(makespan, omim(instance.tasks())), makespan, schedule })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{builtin_instance, BuiltinInstance};

    fn ids(v: &[u64]) -> Vec<TaskId> {
        v.iter().map(|&i| TaskId(i)).collect()
    }

    #[test]
    fn static_orders_of_static_example() {
        let t = builtin_instance(BuiltinInstance::StaticExample);
        let tasks = t.tasks();
        assert_eq!(static_order(tasks, HeuristicId::Iocms).unwrap(), ids(&[1, 3, 0, 2]));
        assert_eq!(static_order(tasks, HeuristicId::Docps).unwrap(), ids(&[2, 1, 0, 3]));
        assert_eq!(static_order(tasks, HeuristicId::Ioccs).unwrap(), ids(&[3, 1, 0, 2]));
        assert_eq!(static_order(tasks, HeuristicId::Doccs).unwrap(), ids(&[2, 0, 1, 3]));
        assert_eq!(static_order(tasks, HeuristicId::Oosim).unwrap(), ids(&[1, 2, 0, 3]));
        assert_eq!(static_order(tasks, HeuristicId::Os).unwrap(), ids(&[0, 1, 2, 3]));
        assert_eq!(static_order(&tasks[..1], HeuristicId::Doccs).unwrap(), ids(&[0]));
        assert!(static_order(tasks, HeuristicId::Mamr).is_err());
    }

    #[test]
    fn static_example_makespans() {
        let inst = builtin_instance(BuiltinInstance::StaticExample);
        for (h, span) in [
            (HeuristicId::Oosim, 15.0),
            (HeuristicId::Iocms, 16.0),
            (HeuristicId::Docps, 14.0),
            (HeuristicId::Ioccs, 16.0),
            (HeuristicId::Doccs, 17.0),
        ] {
            assert_eq!(run_heuristic(&inst, h).unwrap().makespan, span, "{h}");
        }
        let run = run_heuristic(&inst, HeuristicId::Oosim).unwrap();
        assert!((run.ratio - 1.25).abs() < 1e-12);
    }

    #[test]
    fn dispatch_dynamic_and_corrected() {
        let dy = builtin_instance(BuiltinInstance::DynamicExample);
        assert_eq!(run_heuristic(&dy, HeuristicId::Mamr).unwrap().makespan, 24.0);
        let co = builtin_instance(BuiltinInstance::CorrectionsExample);
        assert_eq!(run_heuristic(&co, HeuristicId::Oomamr).unwrap().makespan, 33.0);
        assert_eq!(run_heuristic(&co, HeuristicId::Oolcmr).unwrap().makespan, 33.0);
        assert_eq!(run_heuristic(&co, HeuristicId::Ooscmr).unwrap().makespan, 35.0);
    }

    #[test]
    fn gilmore_gomory_small_cases() {
        let x = Task::new(0, 1.0, 5.0);
        let y = Task::new(1, 4.0, 1.0);
        assert_eq!(gilmore_gomory_order(&[x, y]), ids(&[0, 1]));
        let same: Vec<Task> = (0..5).map(|i| Task::new(i, 3.0, 1.0)).collect();
        assert_eq!(gilmore_gomory_order(&same), ids(&[0, 1, 2, 3, 4]));
        let same: Vec<Task> = (0..5).map(|i| Task::new(i, 1.0, 3.0)).collect();
        assert_eq!(gilmore_gomory_order(&same), ids(&[0, 1, 2, 3, 4]));
        assert!(gilmore_gomory_order(&[]).is_empty());
    }

    #[test]
    fn gilmore_gomory_beats_bad_submission_order() {
        // Submission order pays 2; chaining by matching states pays 0.
        let tasks = vec![Task::new(0, 1.0, 1.0), Task::new(1, 3.0, 3.0), Task::new(2, 1.0, 3.0)];
        let order = gilmore_gomory_order(&tasks);
        assert_eq!(sequence_cost(&tasks, &order), 0.0);
        assert_eq!(sequence_cost(&tasks, &ids(&[0, 1, 2])), 2.0);
    }

    #[test]
    fn bin_packing_first_fit() {
        let co = builtin_instance(BuiltinInstance::CorrectionsExample);
        assert_eq!(bin_packing_order(co.tasks(), 9.0).unwrap(), ids(&[0, 1, 4, 2, 3]));
        assert_eq!(bin_packing_order(co.tasks(), 100.0).unwrap(), ids(&[0, 1, 2, 3, 4]));
        let exact: Vec<Task> = (0..3).map(|i| Task::new(i, 2.0, 1.0)).collect();
        assert_eq!(bin_packing_order(&exact, 2.0).unwrap(), ids(&[0, 1, 2]));
        assert!(matches!(bin_packing_order(co.tasks(), 7.0), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn names_round_trip() {
        for h in HeuristicId::all().into_iter().chain([HeuristicId::LpK(4)]) {
            assert_eq!(h.name().parse::<HeuristicId>().unwrap(), h);
        }
        assert_eq!("oolcmr".parse::<HeuristicId>().unwrap(), HeuristicId::Oolcmr);
        assert_eq!("LP_K(5)".parse::<HeuristicId>().unwrap(), HeuristicId::LpK(5));
        assert!("nope".parse::<HeuristicId>().is_err());
    }
}
