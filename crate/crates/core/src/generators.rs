//! Instance construction: the worked example task sets, the 3-Partition
//! gadget with its witness schedule, and seeded synthetic workloads.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, Schedule, Size, Task, TaskId, Time};

/// The small example task sets, tasks A, B, C, ... numbered 0, 1, 2, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuiltinInstance {
    /// Six tasks where every optimal schedule orders the two resources differently (capacity 10).
    OrderGap,
    /// Four tasks used for the static orders (capacity 6).
    StaticExample,
    /// Four tasks used for the dynamic selectors (capacity 6).
    DynamicExample,
    /// Five tasks used for the corrected orders (capacity 9).
    CorrectionsExample,
}

impl BuiltinInstance {
    pub const ALL: [BuiltinInstance; 4] = [
        BuiltinInstance::OrderGap,
        BuiltinInstance::StaticExample,
        BuiltinInstance::DynamicExample,
        BuiltinInstance::CorrectionsExample,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinInstance::OrderGap => "order-gap",
            BuiltinInstance::StaticExample => "static-example",
            BuiltinInstance::DynamicExample => "dynamic-example",
            BuiltinInstance::CorrectionsExample => "corrections-example",
        }
    }
}

impl fmt::Display for BuiltinInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BuiltinInstance {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown built-in instance {s:?}")))
    }
}

/// Tasks of a worked example with memory equal to transfer time, and its capacity.
pub fn builtin_instance(which: BuiltinInstance) -> Instance {
    let (rows, capacity): (&[(Time, Time)], Size) = match which {
        BuiltinInstance::OrderGap => (&[(0.0, 5.0), (4.0, 3.0), (1.0, 6.0), (3.0, 7.0), (6.0, 0.5), (7.0, 0.5)], 10.0),
        BuiltinInstance::StaticExample => (&[(3.0, 2.0), (1.0, 3.0), (4.0, 4.0), (2.0, 1.0)], 6.0),
        BuiltinInstance::DynamicExample => (&[(3.0, 2.0), (1.0, 6.0), (4.0, 6.0), (5.0, 1.0)], 6.0),
        BuiltinInstance::CorrectionsExample => (&[(4.0, 1.0), (2.0, 6.0), (8.0, 8.0), (5.0, 4.0), (3.0, 2.0)], 9.0),
    };
    let tasks = rows.iter().enumerate().map(|(i, &(cm, cp))| Task::new(i as u64, cm, cp)).collect();
    Instance::new(tasks, capacity).expect("built-in instances are valid")
}

/// A 3-Partition question: can `a` be split into `m` triplets of equal sum?
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreePartitionInput {
    pub a: Vec<u64>,
    pub m: usize,
}

impl ThreePartitionInput {
    pub fn new(a: Vec<u64>, m: usize) -> Result<Self> {
        if m == 0 || a.len() != 3 * m {
            return Err(Error::Input(format!("need 3m integers, got {} for m = {m}", a.len())));
        }
        if let Some(v) = a.iter().find(|&&v| v <= 1) {
            return Err(Error::Input(format!("all integers must exceed 1, got {v}")));
        }
        if a.iter().sum::<u64>() % m as u64 != 0 {
            return Err(Error::Input("sum is not divisible by m".into()));
        }
        Ok(ThreePartitionInput { a, m })
    }

    /// Target triplet sum.
    pub fn b(&self) -> u64 {
        self.a.iter().sum::<u64>() / self.m as u64
    }

    pub fn x(&self) -> u64 {
        self.a.iter().copied().max().unwrap_or(0)
    }

    /// Transfer time of the separator tasks.
    pub fn b_prime(&self) -> u64 {
        self.b() + 6 * self.x()
    }

    /// Makespan a schedule reaches exactly when the answer is yes.
    pub fn target(&self) -> Time {
        (self.m as u64 * (self.b_prime() + 3)) as Time
    }

    /// Task id of `A_i` (0-based index into `a`).
    pub fn item_id(&self, i: usize) -> TaskId {
        TaskId((self.m + 1 + i) as u64)
    }
}

/// The reduction instance and its target makespan.
///
/// Separators `K_0..K_m` get ids `0..=m`; item `A_i` gets id `m + 1 + i`.
pub fn gen_3partition(input: &ThreePartitionInput) -> Result<(Instance, Time)> {
    let input = ThreePartitionInput::new(input.a.clone(), input.m)?;
    let m = input.m;
    let bp = input.b_prime() as Time;
    let x = input.x();
    let mut tasks = Vec::with_capacity(4 * m + 1);
    tasks.push(Task::new(0, 0.0, 3.0));
    for k in 1..m {
        tasks.push(Task::new(k as u64, bp, 3.0));
    }
    tasks.push(Task::new(m as u64, bp, 0.0));
    for (i, &a) in input.a.iter().enumerate() {
        tasks.push(Task::new(input.item_id(i).0, 1.0, (a + 2 * x) as Time));
    }
    Ok((Instance::new(tasks, bp + 3.0)?, input.target()))
}

/// Builds the idle-free schedule of length exactly the target from a solution.
///
/// Triplet `k` transfers while separator `K_{k-1}` computes, then computes
/// while `K_k` transfers.
pub fn schedule_from_triplets(input: &ThreePartitionInput, triplets: &[[usize; 3]]) -> Result<Schedule> {
    let (instance, _) = gen_3partition(input)?;
    let m = input.m;
    if triplets.len() != m {
        return Err(Error::Witness(format!("expected {m} triplets, got {}", triplets.len())));
    }
    let mut seen = vec![false; input.a.len()];
    for tr in triplets {
        for &i in tr {
            if i >= seen.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Witness(format!("item index {i} is out of range or repeated")));
            }
        }
        let sum: u64 = tr.iter().map(|&i| input.a[i]).sum();
        if sum != input.b() {
            return Err(Error::Witness(format!("triplet {tr:?} sums to {sum}, expected {}", input.b())));
        }
    }

    let task = |id: TaskId| *instance.task(id).expect("gadget task");
    let bp = input.b_prime() as Time;
    let mut schedule = Schedule::new();
    schedule.insert(&task(TaskId(0)), 0.0, 0.0);
    let mut seg = 0.0;
    for (k, tr) in triplets.iter().enumerate() {
        for (slot, &i) in tr.iter().enumerate() {
            schedule.insert(&task(input.item_id(i)), seg + slot as Time, 0.0);
        }
        let sep = task(TaskId(k as u64 + 1));
        schedule.insert(&sep, seg + 3.0, seg + 3.0 + bp);
        let mut comp = seg + 3.0;
        for &i in tr {
            let item = task(input.item_id(i));
            let comm_start = schedule.get(item.id).expect("inserted above").comm_start;
            schedule.insert(&item, comm_start, comp);
            comp += item.comp_time;
        }
        seg += 3.0 + bp;
    }
    Ok(schedule)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Near-identical tasks, coefficient of variation under 10%.
    Homogeneous,
    /// Transfer and computation times log-uniform over two decades.
    Heterogeneous,
}

impl FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "homogeneous" => Ok(Profile::Homogeneous),
            "heterogeneous" => Ok(Profile::Heterogeneous),
            _ => Err(Error::Input(format!("unknown profile {s:?}"))),
        }
    }
}

/// Seeded synthetic workload with memory equal to transfer time.
///
/// Computation times are rescaled so that the total transfer time is `bias`
/// times the total computation time. These are stand-ins for tile-based
/// chemistry kernels, not recorded traces.
pub fn gen_synthetic(profile: Profile, n: usize, seed: u64, bias: f64) -> Result<Vec<Task>> {
    if n == 0 {
        return Err(Error::Input("n must be at least 1".into()));
    }
    if !(bias.is_finite() && bias > 0.0) {
        return Err(Error::Parameter(format!("bias must be positive, got {bias}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || -> (Time, Time) {
        match profile {
            // Uniform on [0.85, 1.15] has a coefficient of variation of about 8.7%.
            Profile::Homogeneous => (100.0 * rng.gen_range(0.85..=1.15), 100.0 * rng.gen_range(0.85..=1.15)),
            Profile::Heterogeneous => (10f64.powf(rng.gen_range(0.0..2.0)), 10f64.powf(rng.gen_range(0.0..2.0))),
        }
    };
    let raw: Vec<(Time, Time)> = (0..n).map(|_| draw()).collect();
    let sum_comm: Time = raw.iter().map(|r| r.0).sum();
    let sum_comp: Time = raw.iter().map(|r| r.1).sum();
    let scale = sum_comm / (bias * sum_comp);
    Ok(raw.into_iter().enumerate().map(|(i, (cm, cp))| Task::new(i as u64, cm, cp * scale)).collect())
}
