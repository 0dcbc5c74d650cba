//! JSON interchange formats: task sets, schedule traces and analysis reports.
//!
//! All documents are written canonically: integers only, keys in a fixed
//! order, two-space indentation, UTF-8, one trailing newline. Task and CPU
//! indices are 1-based in every document.

use serde::{Deserialize, Serialize};

use crate::analysis::{ExactAnalysis, Verdict};
use crate::model::{JobId, PeriodicTask, TaskSystem, Ticks, ValidationReport};
use crate::trace::{Event, EventKind, ScheduleTrace, Segment};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{what}: line {line}, column {column}: {message}")]
    Parse {
        what: &'static str,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid task system: {0}")]
    Invalid(ValidationReport),
    #[error("malformed trace: {0}")]
    Trace(String),
}

impl FormatError {
    fn parse(what: &'static str, err: serde_json::Error) -> Self {
        FormatError::Parse {
            what,
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}

fn canonical<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("integer-only documents serialize");
    out.push('\n');
    out
}

// ---------------------------------------------------------------------------
// task sets

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskSetDoc {
    cpus: usize,
    tasks: Vec<TaskDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskDoc {
    offset: Ticks,
    wcet: Ticks,
    deadline: Ticks,
    period: Ticks,
}

pub fn task_set_to_json(system: &TaskSystem) -> String {
    canonical(&TaskSetDoc {
        cpus: system.cpus,
        tasks: system
            .tasks
            .iter()
            .map(|t| TaskDoc {
                offset: t.offset,
                wcet: t.wcet,
                deadline: t.deadline,
                period: t.period,
            })
            .collect(),
    })
}

/// Parses without validating.
pub fn parse_task_set_unchecked(text: &str) -> Result<TaskSystem, FormatError> {
    let doc: TaskSetDoc =
        serde_json::from_str(text).map_err(|e| FormatError::parse("task set", e))?;
    Ok(TaskSystem::new(
        doc.tasks
            .into_iter()
            .map(|t| PeriodicTask::new(t.offset, t.wcet, t.deadline, t.period))
            .collect(),
        doc.cpus,
    ))
}

/// Parses and validates a task-set document.
pub fn parse_task_set(text: &str) -> Result<TaskSystem, FormatError> {
    let system = parse_task_set_unchecked(text)?;
    let report = system.validate();
    if report.is_ok() {
        Ok(system)
    } else {
        Err(FormatError::Invalid(report))
    }
}

// ---------------------------------------------------------------------------
// traces

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceDoc {
    cpus: usize,
    horizon: Ticks,
    segments: Vec<SegmentDoc>,
    events: Vec<EventDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentDoc {
    cpu: usize,
    start: Ticks,
    end: Ticks,
    task: Option<usize>,
    job: Option<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventDoc {
    at: Ticks,
    kind: EventKindDoc,
    task: usize,
    job: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    deadline: Option<Ticks>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    met: Option<bool>,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
#[serde(rename_all = "lowercase")]
enum EventKindDoc {
    Release,
    Completion,
    Deadline,
}

pub fn trace_to_json(trace: &ScheduleTrace) -> String {
    let segments = trace
        .cpus
        .iter()
        .enumerate()
        .flat_map(|(cpu, segs)| {
            segs.iter().map(move |s| SegmentDoc {
                cpu: cpu + 1,
                start: s.start,
                end: s.end,
                task: s.occupant.map(|j| j.task + 1),
                job: s.occupant.map(|j| j.job),
            })
        })
        .collect();
    let events = trace
        .events
        .iter()
        .map(|e| {
            let (kind, deadline, met) = match e.kind {
                EventKind::Release { deadline } => (EventKindDoc::Release, Some(deadline), None),
                EventKind::Completion => (EventKindDoc::Completion, None, None),
                EventKind::Deadline { met } => (EventKindDoc::Deadline, None, Some(met)),
            };
            EventDoc {
                at: e.at,
                kind,
                task: e.job.task + 1,
                job: e.job.job,
                deadline,
                met,
            }
        })
        .collect();
    canonical(&TraceDoc {
        cpus: trace.cpu_count(),
        horizon: trace.horizon,
        segments,
        events,
    })
}

pub fn parse_trace(text: &str) -> Result<ScheduleTrace, FormatError> {
    let doc: TraceDoc = serde_json::from_str(text).map_err(|e| FormatError::parse("trace", e))?;
    let bad = |msg: String| Err(FormatError::Trace(msg));
    let mut cpus = vec![Vec::<Segment>::new(); doc.cpus];
    for s in doc.segments {
        if s.cpu == 0 || s.cpu > doc.cpus {
            return bad(format!("segment cpu {} outside 1..={}", s.cpu, doc.cpus));
        }
        if s.start >= s.end || s.end > doc.horizon {
            return bad(format!(
                "segment [{}, {}) on cpu {} is empty or beyond horizon {}",
                s.start, s.end, s.cpu, doc.horizon
            ));
        }
        let occupant = match (s.task, s.job) {
            (None, None) => None,
            (Some(task), Some(job)) if task >= 1 && job >= 1 => Some(JobId::new(task - 1, job)),
            _ => {
                return bad(format!(
                    "segment [{}, {}) on cpu {} needs both task and job (1-based) or neither",
                    s.start, s.end, s.cpu
                ))
            }
        };
        let lane = &mut cpus[s.cpu - 1];
        if lane.last().is_some_and(|prev| prev.end > s.start) {
            return bad(format!("overlapping segments on cpu {}", s.cpu));
        }
        lane.push(Segment {
            start: s.start,
            end: s.end,
            occupant,
        });
    }
    let mut events = Vec::with_capacity(doc.events.len());
    for e in doc.events {
        if e.task == 0 || e.job == 0 {
            return bad(format!("event at {} has a zero task or job index", e.at));
        }
        let kind = match (e.kind, e.deadline, e.met) {
            (EventKindDoc::Release, Some(deadline), None) => EventKind::Release { deadline },
            (EventKindDoc::Completion, None, None) => EventKind::Completion,
            (EventKindDoc::Deadline, None, Some(met)) => EventKind::Deadline { met },
            _ => {
                return bad(format!(
                    "event at {} has fields inconsistent with its kind",
                    e.at
                ))
            }
        };
        events.push(Event {
            at: e.at,
            kind,
            job: JobId::new(e.task - 1, e.job),
        });
    }
    Ok(ScheduleTrace {
        cpus,
        horizon: doc.horizon,
        events,
    })
}

// ---------------------------------------------------------------------------
// reports

#[derive(Serialize)]
struct ReportDoc {
    verdict: &'static str,
    steady_k: Option<u64>,
    t_up: Ticks,
    hyperperiod: Ticks,
    o_max: Ticks,
    c_tau: Ticks,
    miss: Option<MissDoc>,
    configurations: Vec<ConfigDoc>,
}

#[derive(Serialize)]
struct MissDoc {
    task: usize,
    job: u64,
    at: Ticks,
}

#[derive(Serialize)]
struct ConfigDoc {
    t: Ticks,
    e: Vec<Ticks>,
}

pub fn report_to_json(analysis: &ExactAnalysis) -> String {
    let (verdict, miss) = match analysis.verdict {
        Verdict::Schedulable { .. } => ("schedulable", None),
        Verdict::DeadlineMiss { job, at } => (
            "miss",
            Some(MissDoc {
                task: job.task + 1,
                job: job.job,
                at,
            }),
        ),
    };
    canonical(&ReportDoc {
        verdict,
        steady_k: analysis.verdict.steady_k(),
        t_up: analysis.t_up,
        hyperperiod: analysis.hyperperiod,
        o_max: analysis.o_max,
        c_tau: analysis.c_tau,
        miss,
        configurations: analysis
            .configurations
            .iter()
            .map(|c| ConfigDoc {
                t: c.sampled_at,
                e: c.values.clone(),
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{simulate, PriorityPolicy};
    use crate::model::ExecutionModel;
    use proptest::prelude::*;

    const CE1: &str = r#"{
  "cpus": 2,
  "tasks": [
    {
      "offset": 0,
      "wcet": 2,
      "deadline": 3,
      "period": 3
    },
    {
      "offset": 4,
      "wcet": 3,
      "deadline": 4,
      "period": 4
    },
    {
      "offset": 1,
      "wcet": 3,
      "deadline": 6,
      "period": 6
    }
  ]
}
"#;

    #[test]
    fn canonical_task_set_layout() {
        let s = parse_task_set(CE1).unwrap();
        assert_eq!(s.tasks[1], PeriodicTask::implicit(4, 3, 4));
        assert_eq!(task_set_to_json(&s), CE1);
    }

    #[test]
    fn parse_errors_carry_location() {
        let err =
            parse_task_set("{\n  \"cpus\": 2,\n  \"tasks\": [ {\"offset\": -1} ]\n}").unwrap_err();
        match err {
            FormatError::Parse { line, column, .. } => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("unexpected {other}"),
        }
        assert!(matches!(
            parse_task_set("{\"cpus\": 1, \"tasks\": [], \"extra\": 0}"),
            Err(FormatError::Parse { .. })
        ));
        assert!(matches!(
            parse_task_set(
                "{\"cpus\": 1, \"tasks\": [{\"offset\":0,\"wcet\":1,\"deadline\":5,\"period\":4}]}"
            ),
            Err(FormatError::Invalid(_))
        ));
    }

    #[test]
    fn malformed_traces_are_rejected() {
        let doc = |segs: &str| {
            format!("{{\"cpus\":1,\"horizon\":4,\"segments\":[{segs}],\"events\":[]}}")
        };
        assert!(parse_trace(&doc(
            r#"{"cpu":2,"start":0,"end":1,"task":null,"job":null}"#
        ))
        .is_err());
        assert!(parse_trace(&doc(
            r#"{"cpu":1,"start":0,"end":5,"task":null,"job":null}"#
        ))
        .is_err());
        assert!(parse_trace(&doc(r#"{"cpu":1,"start":0,"end":1,"task":1,"job":null}"#)).is_err());
        assert!(parse_trace(&doc(r#"{"cpu":1,"start":0,"end":2,"task":1,"job":1},{"cpu":1,"start":1,"end":3,"task":null,"job":null}"#)).is_err());
        let ok = parse_trace(&doc(r#"{"cpu":1,"start":0,"end":2,"task":1,"job":1}"#)).unwrap();
        assert_eq!(ok.occupant(0, 1), Some(JobId::new(0, 1)));
    }

    proptest! {
        #[test]
        fn task_set_and_trace_round_trip(
            raw in prop::collection::vec((0u64..10, 1u64..5, 0u64..4), 1..4),
            m in 1usize..3,
            horizon in 0u64..60,
        ) {
            let tasks: Vec<_> = raw.iter()
                .map(|&(o, c, slack)| PeriodicTask::new(o, c, c + slack, c + slack + 1))
                .collect();
            let s = TaskSystem::new(tasks, m);
            let text = task_set_to_json(&s);
            prop_assert_eq!(&parse_task_set(&text).unwrap(), &s);
            prop_assert_eq!(task_set_to_json(&parse_task_set(&text).unwrap()), text);

            let (trace, _) = simulate(&s, PriorityPolicy::Edf, &ExecutionModel::Wcet, horizon, false).unwrap();
            let json = trace_to_json(&trace);
            let back = parse_trace(&json).unwrap();
            prop_assert_eq!(&back, &trace);
            prop_assert_eq!(trace_to_json(&back), json);
        }
    }
}
