//! Naive reference simulator used only to cross-check [`engine`](crate::engine)
//! and [`analysis`](crate::analysis).
//!
//! Nothing here is incremental: at every tick the set of pending jobs, their
//! executed time and their rank are rebuilt from the task parameters and the
//! per-tick history recorded so far. It shares no scheduling code with the
//! engine, only the model and trace types.

use crate::analysis::{AnalysisError, Configuration, ExactAnalysis, SteadyPhase, Verdict};
use crate::engine::PriorityPolicy;
use crate::model::{ExecutionModel, JobId, ModelError, TaskSystem, Ticks};
use crate::trace::{Event, EventKind, Miss, ScheduleTrace, Segment};

struct Pending {
    id: JobId,
    deadline: Ticks,
    budget: Ticks,
    done: Ticks,
}

/// Reference counterpart of [`engine::simulate`](crate::engine::simulate)
/// without early stop.
pub fn oracle_simulate(
    system: &TaskSystem,
    policy: PriorityPolicy,
    exec: &ExecutionModel,
    horizon: Ticks,
) -> Result<(ScheduleTrace, Option<Miss>), ModelError> {
    let m = system.cpus;
    // history[t][cpu]
    let mut history: Vec<Vec<Option<JobId>>> = Vec::new();
    let mut events: Vec<Event> = Vec::new();

    let executed_before = |history: &[Vec<Option<JobId>>], id: JobId, from: Ticks, to: Ticks| {
        (from..to)
            .filter(|&tick| history[tick as usize].contains(&Some(id)))
            .count() as Ticks
    };

    for t in 0..horizon {
        let mut pending = Vec::new();
        for (i, task) in system.tasks.iter().enumerate() {
            let mut j = 1u64;
            loop {
                let release = task.offset + (j - 1) * task.period;
                if release > t {
                    break;
                }
                let deadline = release + task.deadline;
                let id = JobId { task: i, job: j };
                if release == t {
                    events.push(Event {
                        at: t,
                        kind: EventKind::Release { deadline },
                        job: id,
                    });
                }
                let budget = exec.budget(system, id);
                let done = executed_before(&history, id, release, t);
                if t < deadline && done < budget {
                    pending.push(Pending {
                        id,
                        deadline,
                        budget,
                        done,
                    });
                }
                j += 1;
            }
        }

        // selection sort by an explicitly spelled-out rank
        let rank = |p: &Pending| -> (i128, Ticks, usize, u64) {
            match policy {
                PriorityPolicy::Edf => (p.deadline as i128, p.deadline, p.id.task, p.id.job),
                PriorityPolicy::Llf => {
                    let slack = p.deadline as i128 - t as i128 - (p.budget - p.done) as i128;
                    (slack, p.deadline, p.id.task, p.id.job)
                }
            }
        };
        let mut chosen: Vec<JobId> = Vec::new();
        let mut used = vec![false; pending.len()];
        while chosen.len() < m {
            let mut best: Option<usize> = None;
            for k in 0..pending.len() {
                if used[k] {
                    continue;
                }
                if best.is_none_or(|b| rank(&pending[k]) < rank(&pending[b])) {
                    best = Some(k);
                }
            }
            match best {
                Some(b) => {
                    used[b] = true;
                    chosen.push(pending[b].id);
                }
                None => break,
            }
        }

        let mut row: Vec<Option<JobId>> = vec![None; m];
        if let Some(prev) = history.last() {
            for cpu in 0..m {
                if let Some(id) = prev[cpu] {
                    if chosen.contains(&id) {
                        row[cpu] = Some(id);
                    }
                }
            }
        }
        for id in &chosen {
            if row.contains(&Some(*id)) {
                continue;
            }
            let cpu = (0..m)
                .find(|&c| row[c].is_none())
                .expect("fewer jobs than cpus");
            row[cpu] = Some(*id);
        }
        history.push(row);

        for p in &pending {
            if chosen.contains(&p.id) && p.done + 1 == p.budget {
                events.push(Event {
                    at: t + 1,
                    kind: EventKind::Completion,
                    job: p.id,
                });
            }
        }
    }

    // deadline checks at every instant in (0, horizon]
    let mut first_miss: Option<Miss> = None;
    for (i, task) in system.tasks.iter().enumerate() {
        let mut j = 1u64;
        loop {
            let release = task.offset + (j - 1) * task.period;
            let deadline = release + task.deadline;
            if deadline > horizon {
                break;
            }
            let id = JobId { task: i, job: j };
            let met = executed_before(&history, id, release, deadline) >= exec.budget(system, id);
            events.push(Event {
                at: deadline,
                kind: EventKind::Deadline { met },
                job: id,
            });
            if !met {
                let earlier = first_miss.is_none_or(|f| (deadline, i) < (f.at, f.job.task));
                if earlier {
                    first_miss = Some(Miss {
                        job: id,
                        at: deadline,
                    });
                }
            }
            j += 1;
        }
    }
    events.sort();

    let mut cpus = vec![Vec::<Segment>::new(); m];
    for (cpu, segs) in cpus.iter_mut().enumerate() {
        let mut t = 0usize;
        while t < history.len() {
            let who = history[t][cpu];
            let mut end = t + 1;
            while end < history.len() && history[end][cpu] == who {
                end += 1;
            }
            segs.push(Segment {
                start: t as Ticks,
                end: end as Ticks,
                occupant: who,
            });
            t = end;
        }
    }

    Ok((
        ScheduleTrace {
            cpus,
            horizon,
            events,
        },
        first_miss,
    ))
}

/// Reference counterpart of [`analysis::configuration_at`](crate::analysis::configuration_at).
pub fn oracle_configuration(
    system: &TaskSystem,
    trace: &ScheduleTrace,
    t: Ticks,
) -> Result<Configuration, AnalysisError> {
    let o_max = system.tasks.iter().map(|x| x.offset).max().unwrap_or(0);
    if t < o_max {
        return Err(AnalysisError::UndefinedConfiguration { at: t, o_max });
    }
    if t > trace.horizon {
        return Err(AnalysisError::BeyondTrace {
            at: t,
            horizon: trace.horizon,
        });
    }
    let mut values = Vec::new();
    for (i, task) in system.tasks.iter().enumerate() {
        // walk releases forward to find the last one at or before t
        let mut last = task.offset;
        while last + task.period <= t {
            last += task.period;
        }
        let mut e = 0;
        for tick in last..t {
            for cpu in 0..trace.cpus.len() {
                for seg in &trace.cpus[cpu] {
                    if seg.start <= tick
                        && tick < seg.end
                        && seg.occupant.map(|o| o.task) == Some(i)
                    {
                        e += 1;
                    }
                }
            }
        }
        values.push(e);
    }
    Ok(Configuration {
        sampled_at: t,
        values,
    })
}

/// The exact test computed the slow way: simulate all of `[0, t_up]` with the
/// reference simulator, then read every aligned configuration off the trace.
pub fn oracle_analysis(system: &TaskSystem) -> Result<ExactAnalysis, AnalysisError> {
    let report = system.validate();
    if !report.is_ok() {
        return Err(AnalysisError::Invalid(report));
    }
    let t_up = system.t_up()?;
    let hyperperiod = system.hyperperiod()?;
    let o_max = system.o_max();
    let c_tau = system.c_tau()?;
    let (trace, miss) = oracle_simulate(system, PriorityPolicy::Edf, &ExecutionModel::Wcet, t_up)?;

    let mut configurations = Vec::new();
    let mut t = o_max;
    while t <= t_up {
        configurations.push(oracle_configuration(system, &trace, t)?);
        t += hyperperiod;
    }
    let verdict = match miss {
        Some(m) => Verdict::DeadlineMiss {
            job: m.job,
            at: m.at,
        },
        None => {
            let n = configurations.len();
            if configurations[n - 2].values != configurations[n - 1].values {
                return Err(AnalysisError::BoundExceeded { t_up });
            }
            let k = (1..n)
                .find(|&k| configurations[k - 1].values == configurations[k].values)
                .expect("tail pair matches") as u64;
            Verdict::Schedulable {
                steady: Some(SteadyPhase {
                    k,
                    periodic_from: o_max + (k - 1) * hyperperiod,
                }),
            }
        }
    };
    if let Verdict::DeadlineMiss { at, .. } = verdict {
        configurations.retain(|c| c.sampled_at < at);
    }
    Ok(ExactAnalysis {
        verdict,
        t_up,
        hyperperiod,
        o_max,
        c_tau,
        configurations,
    })
}
