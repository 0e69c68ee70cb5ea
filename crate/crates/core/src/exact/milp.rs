//! Mixed integer model of the problem and its CPLEX-LP rendering.
//!
//! Variables per task `i`: `s_i`, `e_i` (transfer start/end), `sp_i`, `ep_i`
//! (computation start/end). Per ordered pair `(i, j)`: `a_i_j = 1` when `j`
//! transfers before `i`, `b_i_j = 1` when `j` computes before `i`, and
//! `c_i_j = 1` when `j` has finished computing by the time `i` starts its
//! transfer. `L`, the sum of all durations, serves as big-M.

use std::fmt::Write as _;

use crate::model::Instance;

/// Offset used to turn `s_i < ep_j + c_i_j L` into a non-strict row.
pub const STRICT_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(f64, String)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpModel {
    pub variables: Vec<(String, VarKind)>,
    pub constraints: Vec<Constraint>,
    /// Big-M constant.
    pub big_m: f64,
}

fn row(name: String, terms: Vec<(f64, String)>, sense: Sense, rhs: f64) -> Constraint {
    Constraint { name, terms, sense, rhs }
}

impl MilpModel {
    pub fn build(instance: &Instance) -> Self {
        let tasks = instance.tasks();
        let n = tasks.len();
        let big_m: f64 = tasks.iter().map(|t| t.comm_time + t.comp_time).sum();
        let mut variables = vec![("l".to_string(), VarKind::Continuous)];
        for i in 0..n {
            for v in ["s", "e", "sp", "ep"] {
                variables.push((format!("{v}_{i}"), VarKind::Continuous));
            }
        }
        for v in ["a", "b", "c"] {
            for i in 0..n {
                for j in (0..n).filter(|&j| j != i) {
                    variables.push((format!("{v}_{i}_{j}"), VarKind::Binary));
                }
            }
        }

        let var = |p: &str, i: usize| format!("{p}_{i}");
        let pair = |p: &str, i: usize, j: usize| format!("{p}_{i}_{j}");
        let mut c = Vec::new();
        for (i, t) in tasks.iter().enumerate() {
            c.push(row(format!("comm_len_{i}"), vec![(1.0, var("e", i)), (-1.0, var("s", i))], Sense::Eq, t.comm_time));
            c.push(row(
                format!("comp_len_{i}"),
                vec![(1.0, var("ep", i)), (-1.0, var("sp", i))],
                Sense::Eq,
                t.comp_time,
            ));
            c.push(row(format!("done_{i}"), vec![(1.0, var("ep", i)), (-1.0, "l".into())], Sense::Le, 0.0));
            c.push(row(format!("input_{i}"), vec![(1.0, var("e", i)), (-1.0, var("sp", i))], Sense::Le, 0.0));
        }
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                // Exclusive use of the communication link.
                c.push(row(
                    format!("link_{i}_{j}"),
                    vec![(1.0, var("e", j)), (-1.0, var("s", i)), (big_m, pair("a", i, j))],
                    Sense::Le,
                    big_m,
                ));
                c.push(row(
                    format!("link_rev_{i}_{j}"),
                    vec![(1.0, var("e", i)), (-1.0, var("s", j)), (-big_m, pair("a", i, j))],
                    Sense::Le,
                    0.0,
                ));
                // Exclusive use of the computation resource.
                c.push(row(
                    format!("proc_{i}_{j}"),
                    vec![(1.0, var("ep", j)), (-1.0, var("sp", i)), (big_m, pair("b", i, j))],
                    Sense::Le,
                    big_m,
                ));
                c.push(row(
                    format!("proc_rev_{i}_{j}"),
                    vec![(1.0, var("ep", i)), (-1.0, var("sp", j)), (-big_m, pair("b", i, j))],
                    Sense::Le,
                    0.0,
                ));
                // c_i_j tracks whether j is done when i starts its transfer.
                c.push(row(
                    format!("done_before_{i}_{j}"),
                    vec![(1.0, var("ep", j)), (-1.0, var("s", i)), (big_m, pair("c", i, j))],
                    Sense::Le,
                    big_m,
                ));
                c.push(row(
                    format!("live_at_{i}_{j}"),
                    vec![(1.0, var("s", i)), (-1.0, var("ep", j)), (-big_m, pair("c", i, j))],
                    Sense::Le,
                    -STRICT_EPSILON,
                ));
            }
        }
        for (i, t) in tasks.iter().enumerate() {
            let mut terms = Vec::new();
            for (r, other) in tasks.iter().enumerate().filter(|&(r, _)| r != i) {
                terms.push((other.mem_req, pair("a", i, r)));
                terms.push((-other.mem_req, pair("c", i, r)));
            }
            c.push(row(format!("mem_{i}"), terms, Sense::Le, instance.capacity() - t.mem_req));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                c.push(row(
                    format!("a_sym_{i}_{j}"),
                    vec![(1.0, pair("a", i, j)), (1.0, pair("a", j, i))],
                    Sense::Eq,
                    1.0,
                ));
                c.push(row(
                    format!("b_sym_{i}_{j}"),
                    vec![(1.0, pair("b", i, j)), (1.0, pair("b", j, i))],
                    Sense::Eq,
                    1.0,
                ));
                c.push(row(
                    format!("c_sym_{i}_{j}"),
                    vec![(1.0, pair("c", i, j)), (1.0, pair("c", j, i))],
                    Sense::Le,
                    1.0,
                ));
            }
            for j in (0..n).filter(|&j| j != i) {
                c.push(row(
                    format!("c_a_{i}_{j}"),
                    vec![(1.0, pair("c", i, j)), (-1.0, pair("a", i, j))],
                    Sense::Le,
                    0.0,
                ));
                c.push(row(
                    format!("c_b_{i}_{j}"),
                    vec![(1.0, pair("c", i, j)), (-1.0, pair("b", i, j))],
                    Sense::Le,
                    0.0,
                ));
            }
        }
        MilpModel { variables, constraints: c, big_m }
    }

    /// CPLEX-LP text; variables are non-negative by the format's default.
    pub fn to_lp(&self) -> String {
        let mut out = String::new();
        out.push_str("\\ minimum makespan of transfers and computations under a memory capacity\n");
        out.push_str("Minimize\n obj: l\nSubject To\n");
        for con in &self.constraints {
            let mut line = format!(" {}:", con.name);
            if con.terms.is_empty() {
                line.push_str(" 0 l");
            }
            for (k, (coef, name)) in con.terms.iter().enumerate() {
                let sign = if *coef < 0.0 {
                    "-"
                } else if k == 0 {
                    ""
                } else {
                    "+"
                };
                let mag = coef.abs();
                if !sign.is_empty() {
                    let _ = write!(line, " {sign}");
                }
                if mag == 1.0 {
                    let _ = write!(line, " {name}");
                } else {
                    let _ = write!(line, " {mag} {name}");
                }
            }
            let op = match con.sense {
                Sense::Le => "<=",
                Sense::Eq => "=",
            };
            let _ = writeln!(out, "{line} {op} {}", con.rhs);
        }
        out.push_str("Binary\n");
        for (name, kind) in &self.variables {
            if *kind == VarKind::Binary {
                let _ = writeln!(out, " {name}");
            }
        }
        out.push_str("End\n");
        out
    }
}

/// The full model of `instance` in CPLEX-LP format.
pub fn export_milp(instance: &Instance) -> String {
    MilpModel::build(instance).to_lp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Task;

    #[test]
    fn two_task_model_shape() {
        let inst = Instance::new(vec![Task::new(0, 1.0, 2.0), Task::new(1, 2.0, 1.0)], 3.0).unwrap();
        let m = MilpModel::build(&inst);
        let starts = m.variables.iter().filter(|(n, _)| n.starts_with("s_") || n.starts_with("sp_")).count();
        assert_eq!(starts, 4);
        let binaries: Vec<&str> =
            m.variables.iter().filter(|(_, k)| *k == VarKind::Binary).map(|(n, _)| n.as_str()).collect();
        assert_eq!(binaries, ["a_0_1", "a_1_0", "b_0_1", "b_1_0", "c_0_1", "c_1_0"]);
        assert_eq!(m.big_m, 6.0);
        let text = m.to_lp();
        assert!(text.starts_with("\\"));
        assert!(text.contains("Minimize\n obj: l\n"));
        assert!(text.contains(" live_at_0_1: s_0 - ep_1 - 6 c_0_1 <= -0.000001\n"));
        assert!(text.contains(" mem_0: 2 a_0_1 - 2 c_0_1 <= 2\n"));
        assert!(text.contains(" link_0_1: e_1 - s_0 + 6 a_0_1 <= 6\n"));
        assert!(text.ends_with("End\n"));
    }

    #[test]
    fn single_task_model_has_no_pairs() {
        let inst = Instance::new(vec![Task::new(0, 3.0, 2.0)], 3.0).unwrap();
        let text = export_milp(&inst);
        assert!(text.contains(" mem_0: 0 l <= 0\n"));
        assert!(!text.contains("a_0"));
        assert!(text.contains(" comm_len_0: e_0 - s_0 = 3\n"));
    }

    #[test]
    fn export_is_deterministic() {
        let inst =
            Instance::new(vec![Task::new(0, 1.5, 2.0), Task::new(1, 2.0, 0.5), Task::new(2, 1.0, 1.0)], 3.0).unwrap();
        assert_eq!(export_milp(&inst), export_milp(&inst));
    }
}
