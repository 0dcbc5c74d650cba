//! Configurations, steady-phase detection and the exact global-EDF test.
//!
//! A *configuration* at instant `t` is the per-task amount of execution each
//! task's latest job has received since its release. A job released exactly at
//! `t` has received nothing, so its entry is 0. Configurations are only defined
//! once every task has been released, i.e. for `t >= o_max`.
//!
//! Because the scheduler is deterministic and ranks jobs one hyperperiod apart
//! identically, two equal configurations `P` ticks apart (at hyperperiod-aligned
//! instants) mean the schedule repeats from there on.

mod exact;
mod properties;

use std::fmt;

use crate::model::{JobId, ModelError, TaskSystem, Ticks, ValidationReport};
use crate::trace::{Miss, ScheduleTrace};

pub use exact::{
    analyze, exact_test, leung_test, predictability_probe, run_to_steady, synchronous_test,
    ExactAnalysis, LeungVerdict, SteadyRun, TestMode,
};
pub use properties::{
    execution_profile, monotonicity_violations, periodicity_violations, ExecutionProfile,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid task system: {0}")]
    Invalid(ValidationReport),
    #[error("configuration undefined at t={at}: not every task is released before o_max={o_max}")]
    UndefinedConfiguration { at: Ticks, o_max: Ticks },
    #[error("instant {at} lies beyond the trace horizon {horizon}")]
    BeyondTrace { at: Ticks, horizon: Ticks },
    #[error("configurations have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("task system is asynchronous: the synchronous shortcut does not apply")]
    NotSynchronous,
    #[error("no repeated configuration by t_up={t_up}: the simulation bound was exceeded")]
    BoundExceeded { t_up: Ticks },
}

/// Per-task execution since the latest release, sampled at `sampled_at`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub sampled_at: Ticks,
    pub values: Vec<Ticks>,
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C({}) = (", self.sampled_at)?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Where the schedule becomes periodic: configurations at
/// `o_max + (k-1)P` and `o_max + kP` are the first aligned pair that match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SteadyPhase {
    pub k: u64,
    pub periodic_from: Ticks,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    /// No deadline is ever missed. `steady` is absent when the run does not
    /// establish periodicity (non-worst-case execution models).
    Schedulable {
        steady: Option<SteadyPhase>,
    },
    DeadlineMiss {
        job: JobId,
        at: Ticks,
    },
}

impl Verdict {
    pub fn is_schedulable(&self) -> bool {
        matches!(self, Verdict::Schedulable { .. })
    }

    pub fn steady_k(&self) -> Option<u64> {
        match self {
            Verdict::Schedulable { steady } => steady.map(|s| s.k),
            Verdict::DeadlineMiss { .. } => None,
        }
    }
}

impl From<Miss> for Verdict {
    fn from(m: Miss) -> Self {
        Verdict::DeadlineMiss {
            job: m.job,
            at: m.at,
        }
    }
}

pub(crate) fn ensure_valid(system: &TaskSystem) -> Result<(), AnalysisError> {
    let report = system.validate();
    if report.is_ok() {
        Ok(())
    } else {
        Err(AnalysisError::Invalid(report))
    }
}

/// Execution task `task` received in `[last release <= t, t)`; `None` before
/// its first release.
pub fn execution_since_release(
    system: &TaskSystem,
    trace: &ScheduleTrace,
    task: usize,
    t: Ticks,
) -> Result<Option<Ticks>, AnalysisError> {
    if t > trace.horizon {
        return Err(AnalysisError::BeyondTrace {
            at: t,
            horizon: trace.horizon,
        });
    }
    let Some((_, release)) = system.last_release(task, t) else {
        return Ok(None);
    };
    let mut executed = 0;
    for segs in &trace.cpus {
        let first = segs.partition_point(|s| s.end <= release);
        for seg in segs[first..].iter().take_while(|s| s.start < t) {
            if seg.occupant.is_some_and(|j| j.task == task) {
                executed += seg.end.min(t) - seg.start.max(release);
            }
        }
    }
    Ok(Some(executed))
}

/// Configuration of the schedule recorded in `trace` at instant `t`.
pub fn configuration_at(
    system: &TaskSystem,
    trace: &ScheduleTrace,
    t: Ticks,
) -> Result<Configuration, AnalysisError> {
    let o_max = system.o_max();
    if t < o_max {
        return Err(AnalysisError::UndefinedConfiguration { at: t, o_max });
    }
    let values = (0..system.len())
        .map(|i| execution_since_release(system, trace, i, t).map(|e| e.unwrap_or(0)))
        .collect::<Result<_, _>>()?;
    Ok(Configuration {
        sampled_at: t,
        values,
    })
}

/// `a ⪰ b`: every task has executed at least as much in `a` as in `b`.
pub fn config_dominates(a: &Configuration, b: &Configuration) -> Result<bool, AnalysisError> {
    if a.values.len() != b.values.len() {
        return Err(AnalysisError::LengthMismatch(
            a.values.len(),
            b.values.len(),
        ));
    }
    Ok(a.values.iter().zip(&b.values).all(|(x, y)| x >= y))
}
