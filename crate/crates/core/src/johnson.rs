//! Johnson's rule for the unconstrained two-resource case and the resulting
//! lower bound (OMIM) used by every ratio metric.

use crate::engine::infinite_schedule;
use crate::error::{Error, Result};
use crate::model::{Task, TaskId, Time, EPS};

/// Compute-intensive tasks by non-decreasing transfer time, then the others by
/// non-increasing computation time. Ties keep the smallest id first.
pub fn johnson_order(tasks: &[Task]) -> Vec<TaskId> {
    let (mut first, mut second): (Vec<&Task>, Vec<&Task>) = tasks.iter().partition(|t| t.is_compute_intensive());
    first.sort_by(|a, b| a.comm_time.total_cmp(&b.comm_time).then(a.id.cmp(&b.id)));
    second.sort_by(|a, b| b.comp_time.total_cmp(&a.comp_time).then(a.id.cmp(&b.id)));
    first.into_iter().chain(second).map(|t| t.id).collect()
}

/// Optimal makespan with infinite memory.
pub fn omim(tasks: &[Task]) -> Time {
    infinite_schedule(tasks, &johnson_order(tasks)).expect("johnson order is a permutation of valid tasks").makespan()
}

/// Which case of the exchange argument a pair `(a, b)` falls under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwapCase {
    /// Both compute intensive, `a` transfers no longer than `b`.
    BothCompute,
    /// Both communication intensive, `a` computes no shorter than `b`.
    BothComm,
    /// `a` compute intensive, `b` communication intensive.
    Mixed,
}

pub fn swap_case(a: &Task, b: &Task) -> Option<SwapCase> {
    let (ca, cb) = (a.is_compute_intensive(), b.is_compute_intensive());
    if ca && cb && a.comm_time <= b.comm_time {
        Some(SwapCase::BothCompute)
    } else if !ca && !cb && a.comp_time >= b.comp_time {
        Some(SwapCase::BothComm)
    } else if ca && !cb {
        Some(SwapCase::Mixed)
    } else {
        None
    }
}

/// Computation-free instant after running `first` then `second` with the link
/// free from `link_free` and the processor free from `cpu_free`.
fn pair_completion(first: &Task, second: &Task, link_free: Time, cpu_free: Time) -> Time {
    let comp_first = (link_free + first.comm_time).max(cpu_free);
    let comp_second = (comp_first + first.comp_time).max(link_free + first.comm_time + second.comm_time);
    comp_second + second.comp_time
}

/// Checks that running `a` before `b` completes no later than `b` before `a`.
///
/// Fails when the pair satisfies none of the three exchange conditions.
pub fn check_swap_lemma(a: &Task, b: &Task, link_free: Time, cpu_free: Time) -> Result<bool> {
    if swap_case(a, b).is_none() {
        return Err(Error::Precondition(format!("tasks {} and {} satisfy no exchange condition", a.id, b.id)));
    }
    Ok(pair_completion(a, b, link_free, cpu_free) <= pair_completion(b, a, link_free, cpu_free) + EPS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{builtin_instance, BuiltinInstance};

    fn ids(v: &[u64]) -> Vec<TaskId> {
        v.iter().map(|&i| TaskId(i)).collect()
    }

    #[test]
    fn worked_example_orders() {
        let st = builtin_instance(BuiltinInstance::StaticExample);
        assert_eq!(johnson_order(st.tasks()), ids(&[1, 2, 0, 3]));
        let co = builtin_instance(BuiltinInstance::CorrectionsExample);
        assert_eq!(johnson_order(co.tasks()), ids(&[1, 2, 3, 4, 0]));
        let gap = builtin_instance(BuiltinInstance::OrderGap);
        assert_eq!(johnson_order(gap.tasks()), ids(&[0, 2, 3, 1, 4, 5]));
    }

    #[test]
    fn identical_tasks_keep_submission_order() {
        let tasks: Vec<Task> = [4, 2, 7, 1].iter().map(|&i| Task::new(i, 2.0, 1.0)).collect();
        assert_eq!(johnson_order(&tasks), ids(&[1, 2, 4, 7]));
        let tasks: Vec<Task> = (0..4).map(|i| Task::new(i, 2.0, 2.0)).collect();
        assert_eq!(johnson_order(&tasks), ids(&[0, 1, 2, 3]));
    }

    #[test]
    fn omim_values() {
        assert_eq!(omim(builtin_instance(BuiltinInstance::StaticExample).tasks()), 12.0);
        assert_eq!(omim(builtin_instance(BuiltinInstance::OrderGap).tasks()), 22.0);
        assert_eq!(omim(&[Task::new(0, 3.0, 2.5)]), 5.5);
        assert_eq!(omim(&[]), 0.0);
    }

    #[test]
    fn swap_lemma_examples() {
        let a = Task::new(0, 1.0, 3.0);
        let b = Task::new(1, 2.0, 4.0);
        assert_eq!(swap_case(&a, &b), Some(SwapCase::BothCompute));
        assert!(check_swap_lemma(&a, &b, 0.0, 0.0).unwrap());
        assert!(check_swap_lemma(&a, &a, 1.5, 0.0).unwrap());
        let a = Task::new(0, 3.0, 5.0);
        let b = Task::new(1, 4.0, 1.0);
        assert_eq!(swap_case(&a, &b), Some(SwapCase::Mixed));
        assert!(check_swap_lemma(&a, &b, 0.0, 2.0).unwrap());
        // Orig completes at 9, swapped at 12.
        assert_eq!(pair_completion(&a, &b, 0.0, 2.0), 9.0);
        assert_eq!(pair_completion(&b, &a, 0.0, 2.0), 12.0);
    }

    #[test]
    fn swap_lemma_rejects_unordered_pair() {
        let a = Task::new(0, 4.0, 1.0);
        let b = Task::new(1, 1.0, 4.0);
        assert!(matches!(check_swap_lemma(&a, &b, 0.0, 0.0), Err(Error::Precondition(_))));
    }
}
