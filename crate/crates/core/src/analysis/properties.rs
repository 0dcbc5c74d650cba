//! Checks of structural properties every valid worst-case EDF schedule has.

use crate::model::{JobId, TaskSystem, Ticks};
use crate::trace::ScheduleTrace;

use super::AnalysisError;

/// Per-task cumulative execution: `cumulative[i][t]` is the execution task `i`
/// received in `[0, t)`, for `t` in `0..=horizon`.
#[derive(Debug, Clone)]
pub struct ExecutionProfile {
    pub cumulative: Vec<Vec<Ticks>>,
}

pub fn execution_profile(system: &TaskSystem, trace: &ScheduleTrace) -> ExecutionProfile {
    let horizon = trace.horizon as usize;
    let mut per_tick = vec![vec![0 as Ticks; horizon]; system.len()];
    for seg in trace.cpus.iter().flatten() {
        if let Some(job) = seg.occupant {
            for t in seg.start..seg.end.min(trace.horizon) {
                per_tick[job.task][t as usize] += 1;
            }
        }
    }
    let cumulative = per_tick
        .into_iter()
        .map(|ticks| {
            let mut acc = Vec::with_capacity(horizon + 1);
            acc.push(0);
            let mut sum = 0;
            for x in ticks {
                sum += x;
                acc.push(sum);
            }
            acc
        })
        .collect();
    ExecutionProfile { cumulative }
}

impl ExecutionProfile {
    /// Execution of `task` since its latest release at or before `t`.
    pub fn since_release(&self, system: &TaskSystem, task: usize, t: Ticks) -> Option<Ticks> {
        let (_, release) = system.last_release(task, t)?;
        let cum = &self.cumulative[task];
        Some(cum[t as usize] - cum[release as usize])
    }
}

/// Every `(task, t)` with `t >= offset` and `t + P <= horizon` where the task
/// has executed more since its release at `t + P` than at `t`.
pub fn monotonicity_violations(
    system: &TaskSystem,
    trace: &ScheduleTrace,
) -> Result<Vec<(usize, Ticks)>, AnalysisError> {
    let p = system.hyperperiod()?;
    let profile = execution_profile(system, trace);
    let mut out = Vec::new();
    let Some(last) = trace.horizon.checked_sub(p) else {
        return Ok(out);
    };
    for (i, task) in system.tasks.iter().enumerate() {
        for t in task.offset..=last {
            let now = profile.since_release(system, i, t);
            let later = profile.since_release(system, i, t + p);
            if let (Some(a), Some(b)) = (now, later) {
                if a < b {
                    out.push((i, t));
                }
            }
        }
    }
    Ok(out)
}

/// Ticks `t` in `[from, from + P)` where the jobs running during `[t+P, t+P+1)`
/// are not the jobs running during `[t, t+1)` shifted by one hyperperiod.
///
/// CPU placement is ignored; only the set of executing jobs is compared.
pub fn periodicity_violations(
    system: &TaskSystem,
    trace: &ScheduleTrace,
    from: Ticks,
) -> Result<Vec<Ticks>, AnalysisError> {
    let p = system.hyperperiod()?;
    let end = from
        .checked_add(p.saturating_mul(2))
        .ok_or(crate::model::ModelError::Overflow("periodicity window"))?;
    if end > trace.horizon {
        return Err(AnalysisError::BeyondTrace {
            at: end,
            horizon: trace.horizon,
        });
    }
    let shifts: Vec<u64> = (0..system.len())
        .map(|i| system.jobs_per_hyperperiod(i))
        .collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    for t in from..from + p {
        let mut expected: Vec<JobId> = trace
            .running_at(t)
            .into_iter()
            .map(|j| JobId::new(j.task, j.job + shifts[j.task]))
            .collect();
        let mut actual = trace.running_at(t + p);
        expected.sort_unstable();
        actual.sort_unstable();
        if expected != actual {
            out.push(t);
        }
    }
    Ok(out)
}
