use thiserror::Error;

use crate::model::{Size, TaskId};

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("task {task} needs {mem_req} memory but capacity is {capacity}")]
    Infeasible { task: TaskId, mem_req: Size, capacity: Size },
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("{n} tasks exceed the exhaustive search limit of {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid witness: {0}")]
    Witness(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
