//! CSV task traces and batch decomposition.
//!
//! Format: header `task_id,comm_time,comp_time,mem_bytes`, one task per row in
//! submission order. The `mem_bytes` column may be omitted, in which case the
//! memory requirement equals the transfer time. Lines starting with `#` are
//! ignored.

use std::collections::HashSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heuristics::{heuristic_schedule, HeuristicId};
use crate::johnson::omim;
use crate::model::{Instance, Schedule, Task, TaskId, Time};

pub const DEFAULT_BATCH: usize = 100;

#[derive(Debug, Deserialize)]
struct Row {
    task_id: u64,
    comm_time: f64,
    comp_time: f64,
    #[serde(default)]
    mem_bytes: Option<f64>,
}

#[derive(Debug, Serialize)]
struct OutRow {
    task_id: u64,
    comm_time: f64,
    comp_time: f64,
    mem_bytes: f64,
}

pub fn read_trace(source: impl Read) -> Result<Vec<Task>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(source);
    let headers = reader.headers().map_err(|e| parse_error(&e, 1))?.clone();
    let expected = ["task_id", "comm_time", "comp_time", "mem_bytes"];
    let names: Vec<&str> = headers.iter().collect();
    if !(names == expected[..3] || names == expected) {
        return Err(Error::Parse {
            line: headers.position().map_or(1, |p| p.line()),
            msg: format!("bad header {names:?}"),
        });
    }
    let mut tasks = Vec::new();
    let mut seen = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_error(&e, 0))?;
        let line = record.position().map_or(0, |p| p.line());
        let row: Row = record.deserialize(Some(&headers)).map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        let mem = row.mem_bytes.unwrap_or(row.comm_time);
        for (name, v) in [("comm_time", row.comm_time), ("comp_time", row.comp_time), ("mem_bytes", mem)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Input(format!("line {line}: {name} must be a non-negative number, got {v}")));
            }
        }
        if !seen.insert(row.task_id) {
            return Err(Error::Input(format!("line {line}: duplicate task id {}", row.task_id)));
        }
        tasks.push(Task::with_mem(row.task_id, row.comm_time, row.comp_time, mem));
    }
    Ok(tasks)
}

fn parse_error(e: &csv::Error, fallback: u64) -> Error {
    let line = e.position().map_or(fallback, |p| p.line());
    Error::Parse { line, msg: e.to_string() }
}

/// Writes `tasks` in the trace format. Values use the shortest decimal that
/// reads back to the same `f64`.
pub fn write_trace(tasks: &[Task], sink: impl Write) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    if tasks.is_empty() {
        writer.write_record(["task_id", "comm_time", "comp_time", "mem_bytes"]).map_err(csv_io)?;
    }
    for t in tasks {
        writer
            .serialize(OutRow { task_id: t.id.0, comm_time: t.comm_time, comp_time: t.comp_time, mem_bytes: t.mem_req })
            .map_err(csv_io)?;
    }
    writer.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

pub fn trace_to_string(tasks: &[Task]) -> String {
    let mut buf = Vec::new();
    write_trace(tasks, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

/// Consecutive chunks of `size` tasks in submission order.
pub fn batch_tasks(tasks: &[Task], size: usize) -> Result<Vec<Vec<Task>>> {
    if size == 0 {
        return Err(Error::Parameter("batch size must be at least 1".into()));
    }
    Ok(tasks.chunks(size).map(<[Task]>::to_vec).collect())
}

/// Runs `heuristic` on each batch in turn. A batch starts only once the
/// previous one has finished computing, so memory is empty at every boundary.
pub fn schedule_in_batches(instance: &Instance, heuristic: HeuristicId, size: usize) -> Result<Schedule> {
    let mut schedule = Schedule::new();
    let mut offset: Time = 0.0;
    for batch in batch_tasks(instance.tasks(), size)? {
        let part = heuristic_schedule(&Instance::new(batch, instance.capacity())?, heuristic)?;
        schedule.append_shifted(&part, offset);
        offset += part.makespan();
    }
    Ok(schedule)
}

/// Sum of per-batch infinite-memory optima: the lower bound for batched runs.
pub fn batched_omim(tasks: &[Task], size: usize) -> Result<Time> {
    Ok(batch_tasks(tasks, size)?.iter().map(|b| omim(b)).sum())
}

/// Task ids in the order a trace lists them.
pub fn submission_order(tasks: &[Task]) -> Vec<TaskId> {
    tasks.iter().map(|t| t.id).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{builtin_instance, gen_synthetic, BuiltinInstance, Profile};
    use crate::heuristics::run_heuristic;
    use crate::model::validate_schedule;

    #[test]
    fn reads_one_row() {
        let tasks = read_trace("task_id,comm_time,comp_time,mem_bytes\n0,3,2,3\n".as_bytes()).unwrap();
        assert_eq!(tasks, vec![Task::with_mem(0, 3.0, 2.0, 3.0)]);
    }

    #[test]
    fn memory_column_is_optional() {
        let tasks = read_trace("task_id,comm_time,comp_time\n4,1.5,2\n2,3,0\n".as_bytes()).unwrap();
        assert_eq!(tasks, vec![Task::with_mem(4, 1.5, 2.0, 1.5), Task::with_mem(2, 3.0, 0.0, 3.0)]);
    }

    #[test]
    fn comments_are_skipped() {
        let text = "# produced by hand\ntask_id,comm_time,comp_time,mem_bytes\n# first\n0,1,1,1\n";
        assert_eq!(read_trace(text.as_bytes()).unwrap().len(), 1);
    }

    #[test]
    fn negative_value_is_rejected_with_its_line() {
        let text = "task_id,comm_time,comp_time,mem_bytes\n0,1,1,1\n1,-2,1,1\n";
        match read_trace(text.as_bytes()) {
            Err(Error::Input(msg)) => assert!(msg.starts_with("line 3"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_and_duplicate_rows() {
        let text = "task_id,comm_time,comp_time,mem_bytes\n0,1,1,1\n1,x,1,1\n";
        assert!(matches!(read_trace(text.as_bytes()), Err(Error::Parse { line: 3, .. })));
        let text = "task_id,comm_time,comp_time,mem_bytes\n0,1,1,1\n0,2,1,1\n";
        assert!(matches!(read_trace(text.as_bytes()), Err(Error::Input(_))));
        assert!(matches!(read_trace("id,a,b\n0,1,1\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn round_trip() {
        let tasks = builtin_instance(BuiltinInstance::StaticExample).tasks().to_vec();
        assert_eq!(read_trace(trace_to_string(&tasks).as_bytes()).unwrap(), tasks);
        assert_eq!(trace_to_string(&[]), "task_id,comm_time,comp_time,mem_bytes\n");
        assert_eq!(read_trace(trace_to_string(&[]).as_bytes()).unwrap(), vec![]);
        let halves = vec![Task::with_mem(7, 0.5, 12.5, 3.5)];
        assert_eq!(read_trace(trace_to_string(&halves).as_bytes()).unwrap(), halves);
        let odd = gen_synthetic(Profile::Heterogeneous, 20, 3, 1.0).unwrap();
        assert_eq!(read_trace(trace_to_string(&odd).as_bytes()).unwrap(), odd);
    }

    #[test]
    fn batch_sizes() {
        let tasks: Vec<Task> = (0..250).map(|i| Task::new(i, 1.0, 1.0)).collect();
        let sizes: Vec<usize> = batch_tasks(&tasks, 100).unwrap().iter().map(Vec::len).collect();
        assert_eq!(sizes, [100, 100, 50]);
        assert_eq!(batch_tasks(&tasks[..5], 100).unwrap().len(), 1);
        assert_eq!(batch_tasks(&tasks[..100], 100).unwrap().len(), 1);
        assert!(matches!(batch_tasks(&tasks, 0), Err(Error::Parameter(_))));
    }

    #[test]
    fn single_batch_matches_plain_run() {
        let inst = builtin_instance(BuiltinInstance::CorrectionsExample);
        let plain = run_heuristic(&inst, HeuristicId::Oolcmr).unwrap();
        assert_eq!(schedule_in_batches(&inst, HeuristicId::Oolcmr, 100).unwrap(), plain.schedule);
    }

    #[test]
    fn batches_run_back_to_back() {
        let inst = builtin_instance(BuiltinInstance::CorrectionsExample);
        let s = schedule_in_batches(&inst, HeuristicId::Oosim, 3).unwrap();
        assert!(validate_schedule(&inst, &s).unwrap().feasible);
        let tasks = inst.tasks();
        let first = run_heuristic(&Instance::new(tasks[..3].to_vec(), 9.0).unwrap(), HeuristicId::Oosim).unwrap();
        let second = run_heuristic(&Instance::new(tasks[3..].to_vec(), 9.0).unwrap(), HeuristicId::Oosim).unwrap();
        assert_eq!(s.makespan(), first.makespan + second.makespan);
        let second_start = tasks[3..].iter().map(|t| s.get(t.id).unwrap().comm_start).fold(f64::MAX, f64::min);
        assert_eq!(second_start, first.makespan);
        assert_eq!(batched_omim(tasks, 3).unwrap(), omim(&tasks[..3]) + omim(&tasks[3..]));
    }
}
