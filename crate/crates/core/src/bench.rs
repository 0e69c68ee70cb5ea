//! Capacity sweeps over workloads and their boxplot summaries.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heuristics::{heuristic_schedule, ratio_to, HeuristicId};
use crate::johnson::omim;
use crate::model::{min_capacity, Instance, Size, Task, Time};
use crate::trace_io::schedule_in_batches;

/// Capacity multiples of the minimum capacity covered by a sweep.
pub const CAPACITY_FACTORS: [f64; 9] = [1.0, 1.125, 1.25, 1.375, 1.5, 1.625, 1.75, 1.875, 2.0];

pub const CSV_HEADER: &str = "workload,capacity_factor,heuristic,makespan,ratio";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workload {
    pub id: String,
    pub tasks: Vec<Task>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub workload: String,
    pub capacity_factor: f64,
    pub heuristic: HeuristicId,
    pub makespan: Time,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub capacity_factor: f64,
    pub heuristic: HeuristicId,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<SweepRow>,
    pub summary: Vec<SummaryRow>,
}

pub fn capacities_from(tasks: &[Task]) -> Result<Vec<Size>> {
    let base = min_capacity(tasks)?;
    Ok(CAPACITY_FACTORS.iter().map(|f| base * f).collect())
}

/// Every workload at every capacity factor under every heuristic, in that
/// nesting order. The ratio is taken against the workload's unbatched
/// infinite-memory optimum. Cells run on the current rayon pool.
pub fn sweep(workloads: &[Workload], heuristics: &[HeuristicId], batch: Option<usize>) -> Result<Vec<SweepRow>> {
    let mut cells = Vec::new();
    for (w, workload) in workloads.iter().enumerate() {
        if heuristics.is_empty() {
            continue;
        }
        let caps = capacities_from(&workload.tasks)?;
        for (&factor, &capacity) in CAPACITY_FACTORS.iter().zip(&caps) {
            for &h in heuristics {
                cells.push((w, factor, capacity, h));
            }
        }
    }
    let lower: Vec<Time> = workloads.iter().map(|w| omim(&w.tasks)).collect();
    cells
        .into_par_iter()
        .map(|(w, factor, capacity, heuristic)| {
            let workload = &workloads[w];
            let instance = Instance::new(workload.tasks.clone(), capacity)?;
            let schedule = match batch {
                Some(size) => schedule_in_batches(&instance, heuristic, size)?,
                None => heuristic_schedule(&instance, heuristic)?,
            };
            let makespan = schedule.makespan();
            Ok(SweepRow {
                workload: workload.id.clone(),
                capacity_factor: factor,
                heuristic,
                makespan,
                ratio: ratio_to(makespan, lower[w]),
            })
        })
        .collect()
}

/// Type-7 sample quantile of sorted data (linear interpolation between order statistics).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Ratio quartiles per (capacity factor, heuristic), in order of first appearance.
pub fn summarize(rows: &[SweepRow]) -> Vec<SummaryRow> {
    let mut groups: Vec<((f64, HeuristicId), Vec<f64>)> = Vec::new();
    for r in rows {
        let key = (r.capacity_factor, r.heuristic);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r.ratio),
            None => groups.push((key, vec![r.ratio])),
        }
    }
    groups
        .into_iter()
        .map(|((capacity_factor, heuristic), mut v)| {
            v.sort_by(f64::total_cmp);
            SummaryRow {
                capacity_factor,
                heuristic,
                min: v[0],
                q1: quantile(&v, 0.25),
                median: quantile(&v, 0.5),
                q3: quantile(&v, 0.75),
                max: v[v.len() - 1],
            }
        })
        .collect()
}

pub fn write_csv(rows: &[SweepRow], mut sink: impl Write) -> Result<()> {
    writeln!(sink, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(sink, "{},{},{},{},{}", csv_field(&r.workload), r.capacity_factor, r.heuristic, r.makespan, r.ratio)?;
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_json(rows: &[SweepRow], sink: impl Write) -> Result<()> {
    let report = Report { rows: rows.to_vec(), summary: summarize(rows) };
    serde_json::to_writer_pretty(sink, &report).map_err(|e| Error::Io(e.into()))
}
