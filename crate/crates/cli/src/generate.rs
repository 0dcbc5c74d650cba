//! Seeded random task-system generation.
//!
//! Per-task utilizations are drawn with UUniFast (resampled until every share
//! is at most 1), then turned into integral wcets against periods drawn from a
//! pool. Rounding means the achieved utilization only approximates the target.

use std::fmt;
use std::str::FromStr;

use edf_exact_core::{PeriodicTask, TaskSystem, Ticks};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MAX_UUNIFAST_ROUNDS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenerateError {
    #[error("task count must be at least 1")]
    NoTasks,
    #[error("cpu count must be at least 1")]
    NoCpus,
    #[error("period pool must be non-empty and contain only periods ≥ 1")]
    BadPeriodPool,
    #[error("utilization target must be positive")]
    NonPositiveUtilization,
    #[error("utilization target {target} exceeds the capacity of {cpus} cpu(s)")]
    ExceedsCapacity { target: Utilization, cpus: usize },
    #[error("utilization target {target} exceeds {tasks}, the most {tasks} task(s) can carry")]
    ExceedsTaskCount { target: Utilization, tasks: usize },
    #[error(
        "utilization target {target} is below {floor}, the least {tasks} task(s) with wcet ≥ 1 \
         and periods from the pool can reach"
    )]
    BelowFloor {
        target: Utilization,
        floor: Utilization,
        tasks: usize,
    },
    #[error("could not split utilization {0} into per-task shares ≤ 1")]
    Unsplittable(Utilization),
}

/// Non-negative rational utilization, written `p/q`, an integer, or a decimal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Utilization(pub Ratio<u64>);

impl Utilization {
    pub fn as_f64(self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }
}

impl fmt::Display for Utilization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self.0.denom() == 1 {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Utilization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("`{s}` is not a utilization (expected p/q, an integer or a decimal)");
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p: u64 = p.trim().parse().map_err(|_| bad())?;
            let q: u64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            return Ok(Utilization(Ratio::new(p, q)));
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || frac.len() > 9 || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let int: u64 = if int.is_empty() {
                0
            } else {
                int.parse().map_err(|_| bad())?
            };
            let scale = 10u64.pow(frac.len() as u32);
            let frac: u64 = frac.parse().map_err(|_| bad())?;
            let numer = int
                .checked_mul(scale)
                .and_then(|x| x.checked_add(frac))
                .ok_or_else(bad)?;
            return Ok(Utilization(Ratio::new(numer, scale)));
        }
        s.parse::<u64>()
            .map(|n| Utilization(Ratio::from_integer(n)))
            .map_err(|_| bad())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeadlineMode {
    /// `deadline == period`
    #[default]
    Implicit,
    /// `deadline` uniform in `[wcet, period]`
    Constrained,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub seed: u64,
    pub task_count: usize,
    pub cpu_count: usize,
    pub period_pool: Vec<Ticks>,
    pub max_offset: Ticks,
    pub utilization_target: Utilization,
    pub deadline_mode: DeadlineMode,
}

impl GeneratorSpec {
    pub fn check(&self) -> Result<(), GenerateError> {
        if self.task_count == 0 {
            return Err(GenerateError::NoTasks);
        }
        if self.cpu_count == 0 {
            return Err(GenerateError::NoCpus);
        }
        if self.period_pool.is_empty() || self.period_pool.contains(&0) {
            return Err(GenerateError::BadPeriodPool);
        }
        let target = self.utilization_target;
        if *target.0.numer() == 0 {
            return Err(GenerateError::NonPositiveUtilization);
        }
        if target.0 > Ratio::from_integer(self.cpu_count as u64) {
            return Err(GenerateError::ExceedsCapacity {
                target,
                cpus: self.cpu_count,
            });
        }
        if target.0 > Ratio::from_integer(self.task_count as u64) {
            return Err(GenerateError::ExceedsTaskCount {
                target,
                tasks: self.task_count,
            });
        }
        let longest = *self.period_pool.iter().max().expect("checked non-empty");
        let floor = Utilization(Ratio::new(self.task_count as u64, longest));
        if target < floor {
            return Err(GenerateError::BelowFloor {
                target,
                floor,
                tasks: self.task_count,
            });
        }
        Ok(())
    }
}

fn uunifast<R: Rng>(rng: &mut R, total: f64, n: usize) -> Option<Vec<f64>> {
    if total >= n as f64 {
        return Some(vec![1.0; n]);
    }
    for _ in 0..MAX_UUNIFAST_ROUNDS {
        let mut shares = Vec::with_capacity(n);
        let mut rest = total;
        for i in 1..n {
            let next = rest * rng.gen::<f64>().powf(1.0 / (n - i) as f64);
            shares.push(rest - next);
            rest = next;
        }
        shares.push(rest);
        if shares.iter().all(|&u| u <= 1.0) {
            return Some(shares);
        }
    }
    None
}

/// Draws one task system. The same spec always yields the same system.
pub fn generate(spec: &GeneratorSpec) -> Result<TaskSystem, GenerateError> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let periods: Vec<Ticks> = (0..spec.task_count)
        .map(|_| spec.period_pool[rng.gen_range(0..spec.period_pool.len())])
        .collect();
    let shares = uunifast(&mut rng, spec.utilization_target.as_f64(), spec.task_count)
        .ok_or(GenerateError::Unsplittable(spec.utilization_target))?;
    let tasks = periods
        .iter()
        .zip(shares)
        .map(|(&period, share)| {
            let wcet = ((share * period as f64).round() as Ticks).clamp(1, period);
            let deadline = match spec.deadline_mode {
                DeadlineMode::Implicit => period,
                DeadlineMode::Constrained => rng.gen_range(wcet..=period),
            };
            let offset = rng.gen_range(0..=spec.max_offset);
            PeriodicTask::new(offset, wcet, deadline, period)
        })
        .collect();
    Ok(TaskSystem::new(tasks, spec.cpu_count))
}
