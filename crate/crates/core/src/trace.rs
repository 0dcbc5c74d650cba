//! Run-length encoded schedule records.

use crate::model::{JobId, Ticks};

/// `[start, end)` on one CPU, occupied by a job or idle (`None`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Segment {
    pub start: Ticks,
    pub end: Ticks,
    pub occupant: Option<JobId>,
}

impl Segment {
    pub fn len(&self) -> Ticks {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, t: Ticks) -> bool {
        self.start <= t && t < self.end
    }
}

/// Something observable that happened at instant `at`.
///
/// The derived order (instant, then kind, then job) is the canonical order of
/// a trace's event log: completions recorded at `t` precede deadline checks at
/// `t`, which precede releases at `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event {
    pub at: Ticks,
    pub kind: EventKind,
    pub job: JobId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    Completion,
    /// Deadline check at the job's absolute deadline.
    Deadline {
        met: bool,
    },
    /// Release; carries the job's absolute deadline.
    Release {
        deadline: Ticks,
    },
}

/// First deadline miss of a run: `job` reached its absolute deadline `at`
/// without completing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Miss {
    pub job: JobId,
    pub at: Ticks,
}

/// Per-CPU run-length schedule over `[0, horizon)` plus the event log.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ScheduleTrace {
    pub cpus: Vec<Vec<Segment>>,
    pub horizon: Ticks,
    pub events: Vec<Event>,
}

impl ScheduleTrace {
    pub fn empty(cpu_count: usize) -> Self {
        Self {
            cpus: vec![Vec::new(); cpu_count],
            horizon: 0,
            events: Vec::new(),
        }
    }

    pub fn cpu_count(&self) -> usize {
        self.cpus.len()
    }

    /// Occupant of `cpu` during `[t, t+1)`; `None` when idle or outside the trace.
    pub fn occupant(&self, cpu: usize, t: Ticks) -> Option<JobId> {
        let segs = self.cpus.get(cpu)?;
        let idx = segs.partition_point(|s| s.end <= t);
        segs.get(idx)
            .filter(|s| s.contains(t))
            .and_then(|s| s.occupant)
    }

    /// Jobs executing during `[t, t+1)`, one entry per busy CPU.
    pub fn running_at(&self, t: Ticks) -> Vec<JobId> {
        (0..self.cpu_count())
            .filter_map(|cpu| self.occupant(cpu, t))
            .collect()
    }

    pub fn busy_cpus_at(&self, t: Ticks) -> usize {
        self.running_at(t).len()
    }

    /// Ticks of execution each task received in `[from, to)`.
    pub fn execution_in(&self, task_count: usize, from: Ticks, to: Ticks) -> Vec<Ticks> {
        let mut out = vec![0; task_count];
        for seg in self.cpus.iter().flatten() {
            if let Some(job) = seg.occupant {
                let lo = seg.start.max(from);
                let hi = seg.end.min(to);
                if lo < hi && job.task < task_count {
                    out[job.task] += hi - lo;
                }
            }
        }
        out
    }

    /// The trace cut down to `[0, horizon)`. Events after `horizon`, and releases
    /// at `horizon` itself, are dropped.
    pub fn truncated(&self, horizon: Ticks) -> ScheduleTrace {
        let horizon = horizon.min(self.horizon);
        let cpus = self
            .cpus
            .iter()
            .map(|segs| {
                segs.iter()
                    .filter(|s| s.start < horizon)
                    .map(|s| Segment {
                        end: s.end.min(horizon),
                        ..*s
                    })
                    .collect()
            })
            .collect();
        let events = self
            .events
            .iter()
            .filter(|e| {
                e.at < horizon || (e.at == horizon && !matches!(e.kind, EventKind::Release { .. }))
            })
            .copied()
            .collect();
        ScheduleTrace {
            cpus,
            horizon,
            events,
        }
    }
}

/// Appends one tick at a time, merging with the previous segment when the
/// occupant is unchanged.
#[derive(Debug, Clone)]
pub struct TraceRecorder {
    trace: ScheduleTrace,
}

impl TraceRecorder {
    pub fn new(cpu_count: usize) -> Self {
        Self {
            trace: ScheduleTrace::empty(cpu_count),
        }
    }

    /// Records `[t, t+1)`; `t` must equal the current horizon.
    pub fn push_tick(&mut self, t: Ticks, occupants: &[Option<JobId>]) {
        debug_assert_eq!(t, self.trace.horizon);
        for (segs, &occupant) in self.trace.cpus.iter_mut().zip(occupants) {
            match segs.last_mut() {
                Some(last) if last.end == t && last.occupant == occupant => last.end = t + 1,
                _ => segs.push(Segment {
                    start: t,
                    end: t + 1,
                    occupant,
                }),
            }
        }
        self.trace.horizon = t + 1;
    }

    pub fn push_event(&mut self, event: Event) {
        self.trace.events.push(event);
    }

    pub fn horizon(&self) -> Ticks {
        self.trace.horizon
    }

    pub fn finish(mut self) -> ScheduleTrace {
        self.trace.events.sort_unstable();
        self.trace
    }
}
