//! Discrete-time global scheduler for identical CPUs.
//!
//! Each tick `[t, t+1)` the simulator releases the jobs due at `t`, ranks every
//! active job under the [`PriorityPolicy`], runs the `m` best for one tick and
//! retires the ones that completed. Deadlines are checked at the instant they
//! fall due; a job that reaches its deadline unfinished is recorded as missed
//! and dropped from the active set.

use std::cmp::Ordering;

use crate::model::{ExecutionModel, JobId, ModelError, TaskSystem, Ticks};
use crate::trace::{Event, EventKind, Miss, ScheduleTrace, TraceRecorder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PriorityPolicy {
    #[default]
    Edf,
    Llf,
}

impl PriorityPolicy {
    /// Strict total order over active jobs at instant `now`; `Less` ranks higher.
    pub fn compare(self, a: &ActiveJob, b: &ActiveJob, now: Ticks) -> Ordering {
        match self {
            PriorityPolicy::Edf => edf_key(a).cmp(&edf_key(b)),
            PriorityPolicy::Llf => llf_key(a, now).cmp(&llf_key(b, now)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActiveJob {
    pub id: JobId,
    pub release: Ticks,
    pub abs_deadline: Ticks,
    pub budget: Ticks,
    pub executed: Ticks,
}

impl ActiveJob {
    pub fn remaining(&self) -> Ticks {
        self.budget - self.executed
    }

    pub fn is_complete(&self) -> bool {
        self.executed >= self.budget
    }
}

/// EDF rank: earlier deadline first, then lower task index, then lower job number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdfKey {
    pub abs_deadline: Ticks,
    pub task: usize,
    pub job: u64,
}

pub fn edf_key(job: &ActiveJob) -> EdfKey {
    EdfKey {
        abs_deadline: job.abs_deadline,
        task: job.id.task,
        job: job.id.job,
    }
}

/// LLF rank: least laxity first, ties broken like [`EdfKey`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LlfKey {
    pub laxity: i128,
    pub abs_deadline: Ticks,
    pub task: usize,
    pub job: u64,
}

/// Laxity is `deadline - now - remaining work` and goes negative once the job
/// can no longer make its deadline.
pub fn llf_key(job: &ActiveJob, now: Ticks) -> LlfKey {
    LlfKey {
        laxity: job.abs_deadline as i128 - now as i128 - job.remaining() as i128,
        abs_deadline: job.abs_deadline,
        task: job.id.task,
        job: job.id.job,
    }
}

/// Places `selected` (ordered by priority) onto CPUs.
///
/// A job that ran in the previous tick keeps its CPU; the remaining jobs take
/// the free CPUs in priority order, lowest index first.
pub fn assign_cpus(previous: &[Option<JobId>], selected: &[JobId]) -> Vec<Option<JobId>> {
    debug_assert!(selected.len() <= previous.len());
    let mut next: Vec<Option<JobId>> = previous
        .iter()
        .map(|p| p.filter(|job| selected.contains(job)))
        .collect();
    let mut free = (0..next.len())
        .filter(|&cpu| next[cpu].is_none())
        .collect::<Vec<_>>()
        .into_iter();
    for job in selected {
        if next.contains(&Some(*job)) {
            continue;
        }
        if let Some(cpu) = free.next() {
            next[cpu] = Some(*job);
        }
    }
    next
}

/// Execution state of the latest released job of one task.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct TaskProgress {
    next_job: u64,
    next_release: Ticks,
    executed: Ticks,
}

/// Incremental simulator. The state always describes instant [`now`](Self::now):
/// everything in `[0, now)` has executed and deadlines at or before `now` have
/// been checked; releases at `now` happen in the next [`step`](Self::step).
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    system: &'a TaskSystem,
    policy: PriorityPolicy,
    exec: &'a ExecutionModel,
    now: Ticks,
    active: Vec<ActiveJob>,
    progress: Vec<TaskProgress>,
    on_cpu: Vec<Option<JobId>>,
    recorder: Option<TraceRecorder>,
    /// Completed jobs whose deadline check is still to be logged.
    awaiting_deadline: Vec<(Ticks, JobId)>,
    first_miss: Option<Miss>,
}

impl<'a> Simulator<'a> {
    pub fn new(
        system: &'a TaskSystem,
        policy: PriorityPolicy,
        exec: &'a ExecutionModel,
        record_trace: bool,
    ) -> Self {
        let progress = system
            .tasks
            .iter()
            .map(|t| TaskProgress {
                next_job: 1,
                next_release: t.offset,
                executed: 0,
            })
            .collect();
        Self {
            system,
            policy,
            exec,
            now: 0,
            active: Vec::with_capacity(system.len()),
            progress,
            on_cpu: vec![None; system.cpus],
            recorder: record_trace.then(|| TraceRecorder::new(system.cpus)),
            awaiting_deadline: Vec::new(),
            first_miss: None,
        }
    }

    pub fn now(&self) -> Ticks {
        self.now
    }

    pub fn first_miss(&self) -> Option<Miss> {
        self.first_miss
    }

    pub fn active_jobs(&self) -> &[ActiveJob] {
        &self.active
    }

    /// Occupants of the CPUs during the last executed tick.
    pub fn on_cpu(&self) -> &[Option<JobId>] {
        &self.on_cpu
    }

    /// Execution received by each task's latest job since its release, at
    /// instant `now`. A task released exactly at `now` reports 0, a task not
    /// yet released reports `None`.
    pub fn execution_since_release(&self) -> Vec<Option<Ticks>> {
        self.progress
            .iter()
            .map(|p| {
                if p.next_release == self.now {
                    Some(0)
                } else if p.next_job == 1 {
                    None
                } else {
                    Some(p.executed)
                }
            })
            .collect()
    }

    /// Simulates `[now, now+1)` and checks the deadlines due at `now + 1`.
    pub fn step(&mut self) -> Result<(), ModelError> {
        let t = self.now;
        self.release_due(t)?;

        let policy = self.policy;
        self.active.sort_by(|a, b| policy.compare(a, b, t));
        let selected: Vec<JobId> = self
            .active
            .iter()
            .take(self.system.cpus)
            .map(|j| j.id)
            .collect();
        self.on_cpu = assign_cpus(&self.on_cpu, &selected);
        if let Some(rec) = self.recorder.as_mut() {
            rec.push_tick(t, &self.on_cpu);
        }

        let next = t
            .checked_add(1)
            .ok_or(ModelError::Overflow("simulation clock"))?;
        for job in self.active.iter_mut().take(self.system.cpus) {
            job.executed += 1;
            self.progress[job.id.task].executed = job.executed;
        }

        if let Some(rec) = self.recorder.as_mut() {
            for job in self.active.iter().filter(|j| j.is_complete()) {
                rec.push_event(Event {
                    at: next,
                    kind: EventKind::Completion,
                    job: job.id,
                });
                if job.abs_deadline > next {
                    self.awaiting_deadline.push((job.abs_deadline, job.id));
                }
            }
        }

        self.now = next;
        self.check_deadlines();
        Ok(())
    }

    fn release_due(&mut self, t: Ticks) -> Result<(), ModelError> {
        for (task, spec) in self.system.tasks.iter().enumerate() {
            let p = &mut self.progress[task];
            if p.next_release != t {
                continue;
            }
            let id = JobId::new(task, p.next_job);
            let abs_deadline = t
                .checked_add(spec.deadline)
                .ok_or(ModelError::Overflow("absolute deadline"))?;
            self.active.push(ActiveJob {
                id,
                release: t,
                abs_deadline,
                budget: self.exec.budget(self.system, id),
                executed: 0,
            });
            p.executed = 0;
            p.next_job += 1;
            p.next_release = t
                .checked_add(spec.period)
                .ok_or(ModelError::Overflow("release time"))?;
            if let Some(rec) = self.recorder.as_mut() {
                rec.push_event(Event {
                    at: t,
                    kind: EventKind::Release {
                        deadline: abs_deadline,
                    },
                    job: id,
                });
            }
        }
        Ok(())
    }

    /// Checks deadlines due at `now` and retires completed or expired jobs.
    fn check_deadlines(&mut self) {
        let now = self.now;
        let mut due: Vec<(JobId, bool)> = self
            .active
            .iter()
            .filter(|j| j.abs_deadline == now)
            .map(|j| (j.id, j.is_complete()))
            .collect();
        if self.recorder.is_some() {
            self.awaiting_deadline.retain(|&(deadline, id)| {
                if deadline == now {
                    due.push((id, true));
                }
                deadline > now
            });
        }
        due.sort_unstable();
        self.active
            .retain(|j| !j.is_complete() && j.abs_deadline > now);
        for (job, met) in due {
            if !met && self.first_miss.is_none() {
                self.first_miss = Some(Miss { job, at: now });
            }
            if let Some(rec) = self.recorder.as_mut() {
                rec.push_event(Event {
                    at: now,
                    kind: EventKind::Deadline { met },
                    job,
                });
            }
        }
    }

    /// Steps until `now == until`, or until the first miss when `stop_on_miss`.
    pub fn run_until(
        &mut self,
        until: Ticks,
        stop_on_miss: bool,
    ) -> Result<Option<Miss>, ModelError> {
        while self.now < until {
            if stop_on_miss && self.first_miss.is_some() {
                break;
            }
            self.step()?;
        }
        Ok(self.first_miss)
    }

    pub fn into_trace(self) -> Option<ScheduleTrace> {
        self.recorder.map(TraceRecorder::finish)
    }
}

/// Runs `[0, horizon)` and returns the recorded trace with the first miss.
///
/// With `stop_on_miss` the run halts at the instant of the first miss and the
/// trace ends there.
pub fn simulate(
    system: &TaskSystem,
    policy: PriorityPolicy,
    exec: &ExecutionModel,
    horizon: Ticks,
    stop_on_miss: bool,
) -> Result<(ScheduleTrace, Option<Miss>), ModelError> {
    let mut sim = Simulator::new(system, policy, exec, true);
    let miss = sim.run_until(horizon, stop_on_miss)?;
    let trace = sim
        .into_trace()
        .unwrap_or_else(|| ScheduleTrace::empty(system.cpus));
    Ok((trace, miss))
}
