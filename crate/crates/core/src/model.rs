//! Periodic task model and the scalar quantities derived from it.
//!
//! All timing parameters are integral ticks. Every derived quantity (release
//! instants, deadlines, the hyperperiod, the simulation bound) is computed with
//! checked arithmetic: overflowing the tick domain is reported as
//! [`ModelError::Overflow`] instead of wrapping.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

/// Time instants and durations, in ticks.
pub type Ticks = u64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("arithmetic overflow while computing {0}")]
    Overflow(&'static str),
    #[error("job numbers start at 1, got {0}")]
    JobNumberZero(u64),
    #[error("task index {index} out of range for a system of {len} tasks")]
    NoSuchTask { index: usize, len: usize },
    #[error("invalid task system: {0}")]
    Invalid(ValidationReport),
}

/// A periodic task `(offset, wcet, deadline, period)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PeriodicTask {
    pub offset: Ticks,
    pub wcet: Ticks,
    pub deadline: Ticks,
    pub period: Ticks,
}

impl PeriodicTask {
    pub const fn new(offset: Ticks, wcet: Ticks, deadline: Ticks, period: Ticks) -> Self {
        Self {
            offset,
            wcet,
            deadline,
            period,
        }
    }

    /// Implicit-deadline task (`deadline == period`).
    pub const fn implicit(offset: Ticks, wcet: Ticks, period: Ticks) -> Self {
        Self::new(offset, wcet, period, period)
    }
}

impl fmt::Display for PeriodicTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(O={}, C={}, D={}, T={})",
            self.offset, self.wcet, self.deadline, self.period
        )
    }
}

/// Identity of one job: the `job_number`-th release (1-based) of the task at
/// position `task` (0-based) in the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JobId {
    pub task: usize,
    pub job: u64,
}

impl JobId {
    pub const fn new(task: usize, job: u64) -> Self {
        Self { task, job }
    }
}

impl fmt::Display for JobId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "τ{},{}", self.task + 1, self.job)
    }
}

/// Ordered tasks plus the number of identical CPUs.
///
/// Task order is part of the system's identity: it is the tie-breaker of
/// last resort when two jobs share a deadline.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TaskSystem {
    pub tasks: Vec<PeriodicTask>,
    pub cpus: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    NoTasks,
    NoCpus,
    WcetZero,
    PeriodZero,
    DeadlineZero,
    DeadlineExceedsPeriod,
}

impl Rule {
    pub fn describe(self) -> &'static str {
        match self {
            Rule::NoTasks => "task system must contain at least one task",
            Rule::NoCpus => "cpu count must be ≥ 1",
            Rule::WcetZero => "wcet must be ≥ 1",
            Rule::PeriodZero => "period must be ≥ 1",
            Rule::DeadlineZero => "deadline must be ≥ 1",
            Rule::DeadlineExceedsPeriod => "deadline exceeds period",
        }
    }
}

/// One broken rule. `task` is `None` for system-level rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub task: Option<usize>,
    pub field: &'static str,
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.task {
            Some(i) => write!(
                f,
                "task {} `{}`: {}",
                i + 1,
                self.field,
                self.rule.describe()
            ),
            None => write!(f, "`{}`: {}", self.field, self.rule.describe()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (n, v) in self.violations.iter().enumerate() {
            if n > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl TaskSystem {
    pub fn new(tasks: Vec<PeriodicTask>, cpus: usize) -> Self {
        Self { tasks, cpus }
    }

    /// Builds the system and rejects it unless it passes [`validate`](Self::validate).
    pub fn try_new(tasks: Vec<PeriodicTask>, cpus: usize) -> Result<Self, ModelError> {
        let system = Self::new(tasks, cpus);
        let report = system.validate();
        if report.is_ok() {
            Ok(system)
        } else {
            Err(ModelError::Invalid(report))
        }
    }

    /// Collects every violated model rule; an empty report means the system is usable.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.tasks.is_empty() {
            violations.push(Violation {
                task: None,
                field: "tasks",
                rule: Rule::NoTasks,
            });
        }
        if self.cpus == 0 {
            violations.push(Violation {
                task: None,
                field: "cpus",
                rule: Rule::NoCpus,
            });
        }
        for (i, t) in self.tasks.iter().enumerate() {
            let mut push = |field, rule| {
                violations.push(Violation {
                    task: Some(i),
                    field,
                    rule,
                })
            };
            if t.wcet == 0 {
                push("wcet", Rule::WcetZero);
            }
            if t.period == 0 {
                push("period", Rule::PeriodZero);
            }
            if t.deadline == 0 {
                push("deadline", Rule::DeadlineZero);
            }
            if t.deadline > t.period {
                push("deadline", Rule::DeadlineExceedsPeriod);
            }
        }
        ValidationReport { violations }
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn task(&self, index: usize) -> Result<&PeriodicTask, ModelError> {
        self.tasks.get(index).ok_or(ModelError::NoSuchTask {
            index,
            len: self.tasks.len(),
        })
    }

    /// Least common multiple of all periods.
    pub fn hyperperiod(&self) -> Result<Ticks, ModelError> {
        self.tasks.iter().try_fold(1u64, |acc, t| {
            if t.period == 0 {
                return Err(ModelError::Overflow("hyperperiod (zero period)"));
            }
            let g = acc.gcd(&t.period);
            (acc / g)
                .checked_mul(t.period)
                .ok_or(ModelError::Overflow("hyperperiod"))
        })
    }

    /// Largest first-release offset.
    pub fn o_max(&self) -> Ticks {
        self.tasks.iter().map(|t| t.offset).max().unwrap_or(0)
    }

    /// Sum of all worst-case execution times.
    pub fn c_tau(&self) -> Result<Ticks, ModelError> {
        self.tasks.iter().try_fold(0u64, |acc, t| {
            acc.checked_add(t.wcet)
                .ok_or(ModelError::Overflow("sum of wcets"))
        })
    }

    /// Simulation bound `o_max + (c_tau + 1) * hyperperiod`.
    pub fn t_up(&self) -> Result<Ticks, ModelError> {
        let p = self.hyperperiod()?;
        let rounds = self
            .c_tau()?
            .checked_add(1)
            .ok_or(ModelError::Overflow("t_up"))?;
        rounds
            .checked_mul(p)
            .and_then(|span| span.checked_add(self.o_max()))
            .ok_or(ModelError::Overflow("t_up"))
    }

    /// `o_max + k * hyperperiod`.
    pub fn aligned_instant(&self, k: u64) -> Result<Ticks, ModelError> {
        k.checked_mul(self.hyperperiod()?)
            .and_then(|span| span.checked_add(self.o_max()))
            .ok_or(ModelError::Overflow("hyperperiod-aligned instant"))
    }

    pub fn release_time(&self, job: JobId) -> Result<Ticks, ModelError> {
        if job.job == 0 {
            return Err(ModelError::JobNumberZero(job.job));
        }
        let t = self.task(job.task)?;
        (job.job - 1)
            .checked_mul(t.period)
            .and_then(|span| span.checked_add(t.offset))
            .ok_or(ModelError::Overflow("release time"))
    }

    pub fn abs_deadline(&self, job: JobId) -> Result<Ticks, ModelError> {
        let release = self.release_time(job)?;
        release
            .checked_add(self.tasks[job.task].deadline)
            .ok_or(ModelError::Overflow("absolute deadline"))
    }

    /// Number of jobs a task releases per hyperperiod.
    pub fn jobs_per_hyperperiod(&self, task: usize) -> Result<u64, ModelError> {
        Ok(self.hyperperiod()? / self.task(task)?.period)
    }

    /// True when every task has the same first release.
    pub fn is_synchronous(&self) -> bool {
        self.tasks.windows(2).all(|w| w[0].offset == w[1].offset)
    }

    /// Release instant of the task's latest job released at or before `t`,
    /// with that job's number. `None` before the first release.
    pub fn last_release(&self, task: usize, t: Ticks) -> Option<(u64, Ticks)> {
        let spec = self.tasks.get(task)?;
        if t < spec.offset {
            return None;
        }
        let n = (t - spec.offset) / spec.period;
        Some((n + 1, spec.offset + n * spec.period))
    }
}

/// Actual execution time of every job: the worst case unless overridden.
///
/// Every resolved time is clamped into `[1, wcet]`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum ExecutionModel {
    #[default]
    Wcet,
    /// Per-job overrides; jobs not listed take their wcet.
    Table(BTreeMap<JobId, Ticks>),
    /// Pseudo-random per-job times derived from `(seed, task, job)`.
    Seeded { seed: u64 },
}

impl ExecutionModel {
    /// Execution time of `job` under this model.
    pub fn budget(&self, system: &TaskSystem, job: JobId) -> Ticks {
        let wcet = system.tasks[job.task].wcet;
        let actual = match self {
            ExecutionModel::Wcet => wcet,
            ExecutionModel::Table(map) => map.get(&job).copied().unwrap_or(wcet),
            ExecutionModel::Seeded { seed } => {
                let h = mix(
                    mix(*seed ^ (job.task as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)) ^ job.job,
                );
                1 + h % wcet.max(1)
            }
        };
        actual.clamp(1, wcet.max(1))
    }

    /// Model that shortens every job by `by` ticks, never below one.
    pub fn reduced_by(system: &TaskSystem, by: Ticks, jobs_per_task: u64) -> Self {
        let mut map = BTreeMap::new();
        for (i, t) in system.tasks.iter().enumerate() {
            for j in 1..=jobs_per_task {
                map.insert(JobId::new(i, j), t.wcet.saturating_sub(by).max(1));
            }
        }
        ExecutionModel::Table(map)
    }
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ce1() -> TaskSystem {
        TaskSystem::new(
            vec![
                PeriodicTask::implicit(0, 2, 3),
                PeriodicTask::implicit(4, 3, 4),
                PeriodicTask::implicit(1, 3, 6),
            ],
            2,
        )
    }

    fn ce2() -> TaskSystem {
        TaskSystem::new(
            vec![
                PeriodicTask::implicit(225, 90, 161),
                PeriodicTask::implicit(115, 40, 161),
                PeriodicTask::implicit(0, 72, 161),
                PeriodicTask::implicit(129, 120, 161),
            ],
            2,
        )
    }

    #[test]
    fn counterexamples_validate() {
        assert!(ce1().validate().is_ok());
        assert!(ce2().validate().is_ok());
    }

    #[test]
    fn deadline_beyond_period_is_reported() {
        let s = TaskSystem::new(vec![PeriodicTask::new(0, 1, 5, 4)], 1);
        let report = s.validate();
        assert!(report.has(Rule::DeadlineExceedsPeriod));
        assert_eq!(report.violations[0].task, Some(0));
        assert!(report.to_string().contains("deadline exceeds period"));
    }

    #[test]
    fn zero_wcet_is_reported() {
        let s = TaskSystem::new(vec![PeriodicTask::new(0, 0, 3, 3)], 1);
        assert!(s.validate().has(Rule::WcetZero));
        assert!(s.validate().to_string().contains("wcet must be ≥ 1"));
    }

    #[test]
    fn report_lists_every_violation() {
        let s = TaskSystem::new(
            vec![PeriodicTask::new(0, 0, 5, 4), PeriodicTask::new(0, 4, 3, 3)],
            0,
        );
        let r = s.validate();
        assert!(r.has(Rule::NoCpus));
        assert!(r.has(Rule::WcetZero));
        assert!(r.has(Rule::DeadlineExceedsPeriod));
        assert_eq!(r.violations.len(), 3);
        assert!(TaskSystem::new(vec![], 1).validate().has(Rule::NoTasks));
    }

    #[test]
    fn hyperperiods() {
        assert_eq!(ce1().hyperperiod(), Ok(12));
        assert_eq!(ce2().hyperperiod(), Ok(161));
        let single = TaskSystem::new(vec![PeriodicTask::implicit(0, 1, 7)], 1);
        assert_eq!(single.hyperperiod(), Ok(7));
    }

    #[test]
    fn hyperperiod_overflow_is_an_error() {
        let s = TaskSystem::new(
            vec![
                PeriodicTask::implicit(0, 1, u64::MAX - 1),
                PeriodicTask::implicit(0, 1, u64::MAX - 2),
            ],
            1,
        );
        assert!(matches!(s.hyperperiod(), Err(ModelError::Overflow(_))));
        assert!(matches!(s.t_up(), Err(ModelError::Overflow(_))));
    }

    #[test]
    fn t_up_values() {
        assert_eq!(ce1().t_up(), Ok(112));
        assert_eq!(ce2().t_up(), Ok(52_228));
        let single = TaskSystem::new(vec![PeriodicTask::implicit(0, 1, 5)], 1);
        assert_eq!(single.t_up(), Ok(10));
        let big = TaskSystem::new(vec![PeriodicTask::implicit(u64::MAX, 1, 2)], 1);
        assert!(matches!(big.t_up(), Err(ModelError::Overflow(_))));
    }

    #[test]
    fn release_and_deadline_arithmetic() {
        let s = ce1();
        assert_eq!(s.release_time(JobId::new(1, 1)), Ok(4));
        assert_eq!(s.abs_deadline(JobId::new(1, 1)), Ok(8));
        assert_eq!(s.release_time(JobId::new(0, 5)), Ok(12));
        assert_eq!(s.abs_deadline(JobId::new(0, 5)), Ok(15));
        assert_eq!(s.release_time(JobId::new(2, 1)), Ok(1));
        assert_eq!(
            s.release_time(JobId::new(0, 0)),
            Err(ModelError::JobNumberZero(0))
        );
        assert!(matches!(
            s.release_time(JobId::new(7, 1)),
            Err(ModelError::NoSuchTask { .. })
        ));
        let far = TaskSystem::new(vec![PeriodicTask::implicit(1, 1, u64::MAX / 2)], 1);
        assert!(matches!(
            far.release_time(JobId::new(0, 4)),
            Err(ModelError::Overflow(_))
        ));
    }

    #[test]
    fn last_release_lookup() {
        let s = ce1();
        assert_eq!(s.last_release(1, 3), None);
        assert_eq!(s.last_release(1, 4), Some((1, 4)));
        assert_eq!(s.last_release(1, 7), Some((1, 4)));
        assert_eq!(s.last_release(1, 8), Some((2, 8)));
    }

    #[test]
    fn execution_models_stay_in_range() {
        let s = ce2();
        let m = ExecutionModel::Seeded { seed: 9 };
        for task in 0..s.len() {
            for job in 1..50 {
                let b = m.budget(&s, JobId::new(task, job));
                assert!((1..=s.tasks[task].wcet).contains(&b));
            }
        }
        let reduced = ExecutionModel::reduced_by(&ce1(), 1, 3);
        assert_eq!(reduced.budget(&ce1(), JobId::new(0, 1)), 1);
        assert_eq!(reduced.budget(&ce1(), JobId::new(1, 3)), 2);
        assert_eq!(reduced.budget(&ce1(), JobId::new(1, 4)), 3);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn system() -> impl Strategy<Value = TaskSystem> {
            prop::collection::vec((0u64..20, 1u64..12, 1u64..12), 1..5)
                .prop_flat_map(|raw| {
                    let tasks: Vec<_> = raw
                        .into_iter()
                        .map(|(o, c, t)| PeriodicTask::new(o, c.min(t), t, t))
                        .collect();
                    let deadlines: Vec<_> = tasks.iter().map(|t| t.wcet..=t.period).collect();
                    (Just(tasks), deadlines, 1usize..4)
                })
                .prop_map(|(mut tasks, deadlines, m)| {
                    for (t, d) in tasks.iter_mut().zip(deadlines) {
                        t.deadline = d;
                    }
                    TaskSystem::new(tasks, m)
                })
        }

        proptest! {
            #[test]
            fn release_spacing_and_deadline_order(s in system(), j in 1u64..40) {
                for i in 0..s.len() {
                    let r1 = s.release_time(JobId::new(i, j)).unwrap();
                    let r2 = s.release_time(JobId::new(i, j + 1)).unwrap();
                    prop_assert_eq!(r2 - r1, s.tasks[i].period);
                    prop_assert!(s.abs_deadline(JobId::new(i, j)).unwrap() <= r2);
                }
            }

            #[test]
            fn derived_quantities_are_consistent(s in system()) {
                let p = s.hyperperiod().unwrap();
                for t in &s.tasks {
                    prop_assert_eq!(p % t.period, 0);
                }
                prop_assert_eq!(s.t_up().unwrap() % p, s.o_max() % p);
                prop_assert!(s.validate().is_ok());
            }
        }
    }
}
