use crate::engine::{PriorityPolicy, Simulator};
use crate::model::{ExecutionModel, JobId, TaskSystem, Ticks};
use crate::trace::{Miss, ScheduleTrace};

use super::{ensure_valid, AnalysisError, Configuration, SteadyPhase, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TestMode {
    /// Stop at the first pair of equal aligned configurations.
    #[default]
    EarlyExit,
    /// Always simulate through `t_up`, then require `C(t_up - P) == C(t_up)`.
    Literal,
}

/// Verdict of the exact test together with the quantities it was derived from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactAnalysis {
    pub verdict: Verdict,
    pub t_up: Ticks,
    pub hyperperiod: Ticks,
    pub o_max: Ticks,
    pub c_tau: Ticks,
    /// Configurations sampled at `o_max + kP`, `k = 0, 1, ...`.
    pub configurations: Vec<Configuration>,
}

/// Result of simulating until the steady phase is detected, a deadline is
/// missed, or `t_up` is reached.
#[derive(Debug, Clone)]
pub struct SteadyRun {
    pub steady: Option<SteadyPhase>,
    pub miss: Option<Miss>,
    pub configurations: Vec<Configuration>,
    pub trace: Option<ScheduleTrace>,
    /// Whether the last two aligned configurations matched when the run stopped.
    pub tail_matches: bool,
}

fn snapshot(sim: &Simulator<'_>) -> Configuration {
    Configuration {
        sampled_at: sim.now(),
        values: sim
            .execution_since_release()
            .into_iter()
            .map(|e| e.unwrap_or(0))
            .collect(),
    }
}

fn drive(
    system: &TaskSystem,
    policy: PriorityPolicy,
    mode: TestMode,
    record_trace: bool,
) -> Result<SteadyRun, AnalysisError> {
    ensure_valid(system)?;
    let rounds = system.c_tau()? + 1;
    // computed up front so overflow is reported before simulating anything
    system.t_up()?;
    let exec = ExecutionModel::Wcet;
    let mut sim = Simulator::new(system, policy, &exec, record_trace);
    let mut configurations: Vec<Configuration> = Vec::new();
    let mut steady = None;
    let mut miss = None;

    for k in 0..=rounds {
        let target = system.aligned_instant(k)?;
        if let Some(m) = sim.run_until(target, true)? {
            miss = Some(m);
            break;
        }
        let current = snapshot(&sim);
        let repeated = configurations
            .last()
            .is_some_and(|prev| prev.values == current.values);
        configurations.push(current);
        if repeated && steady.is_none() {
            steady = Some(SteadyPhase {
                k,
                periodic_from: system.aligned_instant(k - 1)?,
            });
            if mode == TestMode::EarlyExit {
                break;
            }
        }
    }

    let tail_matches = miss.is_none()
        && match configurations.as_slice() {
            [.., a, b] => a.values == b.values,
            _ => false,
        };
    Ok(SteadyRun {
        steady,
        miss,
        configurations,
        trace: sim.into_trace(),
        tail_matches,
    })
}

/// Simulates under `policy` with worst-case execution times until the steady
/// phase, the first miss, or `t_up`, recording the trace.
pub fn run_to_steady(
    system: &TaskSystem,
    policy: PriorityPolicy,
) -> Result<SteadyRun, AnalysisError> {
    drive(system, policy, TestMode::EarlyExit, true)
}

/// Exact global-EDF schedulability test with its supporting data.
///
/// The system is simulated with every job taking its wcet. Any deadline miss
/// before the steady phase makes it unschedulable; otherwise it is schedulable
/// as soon as two configurations one hyperperiod apart, sampled at
/// `o_max + kP`, coincide. A match is guaranteed by `k = c_tau + 1`; failing
/// that is reported as [`AnalysisError::BoundExceeded`].
pub fn analyze(system: &TaskSystem, mode: TestMode) -> Result<ExactAnalysis, AnalysisError> {
    let run = drive(system, PriorityPolicy::Edf, mode, false)?;
    let t_up = system.t_up()?;
    let verdict = match (run.miss, run.steady) {
        (Some(m), _) => Verdict::from(m),
        (None, Some(steady)) if mode == TestMode::EarlyExit || run.tail_matches => {
            Verdict::Schedulable {
                steady: Some(steady),
            }
        }
        (None, _) => return Err(AnalysisError::BoundExceeded { t_up }),
    };
    Ok(ExactAnalysis {
        verdict,
        t_up,
        hyperperiod: system.hyperperiod()?,
        o_max: system.o_max(),
        c_tau: system.c_tau()?,
        configurations: run.configurations,
    })
}

pub fn exact_test(system: &TaskSystem) -> Result<Verdict, AnalysisError> {
    analyze(system, TestMode::EarlyExit).map(|a| a.verdict)
}

/// Schedulability of a synchronous system, decided on `[c, c + P)` where `c`
/// is the common offset.
pub fn synchronous_test(system: &TaskSystem) -> Result<Verdict, AnalysisError> {
    ensure_valid(system)?;
    if !system.is_synchronous() {
        return Err(AnalysisError::NotSynchronous);
    }
    let start = system.o_max();
    let end = system.aligned_instant(1)?;
    let exec = ExecutionModel::Wcet;
    let mut sim = Simulator::new(system, PriorityPolicy::Edf, &exec, false);
    Ok(match sim.run_until(end, true)? {
        Some(m) => Verdict::from(m),
        None => Verdict::Schedulable {
            steady: Some(SteadyPhase {
                k: 1,
                periodic_from: start,
            }),
        },
    })
}

/// Simulates `[0, t_up)` with the actual execution times from `exec`.
///
/// For a system that passes [`exact_test`] this never reports a miss as long
/// as `exec` keeps every job within `[1, wcet]`.
pub fn predictability_probe(
    system: &TaskSystem,
    exec: &ExecutionModel,
) -> Result<Verdict, AnalysisError> {
    ensure_valid(system)?;
    let t_up = system.t_up()?;
    let mut sim = Simulator::new(system, PriorityPolicy::Edf, exec, false);
    Ok(match sim.run_until(t_up, true)? {
        Some(m) => Verdict::from(m),
        None => Verdict::Schedulable { steady: None },
    })
}

/// Outcome of [`leung_test`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LeungVerdict {
    Accept,
    RejectByMiss {
        job: JobId,
        at: Ticks,
    },
    RejectByConfigMismatch {
        at_1: Ticks,
        at_2: Ticks,
        first: Configuration,
        second: Configuration,
        /// `first - second`, per task.
        diff: Vec<i64>,
    },
}

/// **Incorrect** feasibility check kept for demonstration only.
///
/// Accepts when no deadline is missed up to `o_max + 2P` and the
/// configurations at `o_max + P` and `o_max + 2P` are equal. Schedulable
/// systems whose steady phase starts later are wrongly rejected, so this never
/// produces a [`Verdict`]; use [`exact_test`] to decide schedulability.
pub fn leung_test(system: &TaskSystem) -> Result<LeungVerdict, AnalysisError> {
    ensure_valid(system)?;
    let at_1 = system.aligned_instant(1)?;
    let at_2 = system.aligned_instant(2)?;
    let exec = ExecutionModel::Wcet;
    let mut sim = Simulator::new(system, PriorityPolicy::Edf, &exec, false);
    if let Some(m) = sim.run_until(at_1, true)? {
        return Ok(LeungVerdict::RejectByMiss {
            job: m.job,
            at: m.at,
        });
    }
    let first = snapshot(&sim);
    if let Some(m) = sim.run_until(at_2, true)? {
        return Ok(LeungVerdict::RejectByMiss {
            job: m.job,
            at: m.at,
        });
    }
    let second = snapshot(&sim);
    if first.values == second.values {
        return Ok(LeungVerdict::Accept);
    }
    let diff = first
        .values
        .iter()
        .zip(&second.values)
        .map(|(a, b)| *a as i64 - *b as i64)
        .collect();
    Ok(LeungVerdict::RejectByConfigMismatch {
        at_1,
        at_2,
        first,
        second,
        diff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PeriodicTask;

    fn overloaded() -> TaskSystem {
        TaskSystem::new(
            vec![
                PeriodicTask::implicit(0, 3, 4),
                PeriodicTask::implicit(0, 3, 4),
            ],
            1,
        )
    }

    fn light() -> TaskSystem {
        TaskSystem::new(
            vec![
                PeriodicTask::implicit(0, 1, 3),
                PeriodicTask::implicit(0, 1, 3),
            ],
            1,
        )
    }

    #[test]
    fn overload_misses_at_first_deadline() {
        let v = exact_test(&overloaded()).unwrap();
        assert_eq!(
            v,
            Verdict::DeadlineMiss {
                job: JobId::new(1, 1),
                at: 4
            }
        );
        assert_eq!(synchronous_test(&overloaded()).unwrap(), v);
        assert_eq!(
            leung_test(&overloaded()).unwrap(),
            LeungVerdict::RejectByMiss {
                job: JobId::new(1, 1),
                at: 4
            }
        );
    }

    #[test]
    fn light_synchronous_system() {
        let v = exact_test(&light()).unwrap();
        assert_eq!(v.steady_k(), Some(1));
        assert_eq!(synchronous_test(&light()).unwrap(), v);
        assert_eq!(leung_test(&light()).unwrap(), LeungVerdict::Accept);
    }

    #[test]
    fn single_task_with_room_is_schedulable() {
        for (c, d, t) in [(1, 1, 1), (2, 3, 5), (4, 4, 4), (3, 7, 9)] {
            let s = TaskSystem::new(vec![PeriodicTask::new(2, c, d, t)], 1);
            assert!(synchronous_test(&s).unwrap().is_schedulable());
            assert!(exact_test(&s).unwrap().is_schedulable());
        }
    }

    #[test]
    fn wcet_beyond_deadline_misses() {
        let s = TaskSystem::new(vec![PeriodicTask::new(0, 4, 3, 5)], 2);
        assert_eq!(
            exact_test(&s).unwrap(),
            Verdict::DeadlineMiss {
                job: JobId::new(0, 1),
                at: 3
            }
        );
    }

    #[test]
    fn asynchronous_rejected_by_shortcut() {
        let s = TaskSystem::new(
            vec![
                PeriodicTask::implicit(0, 1, 3),
                PeriodicTask::implicit(1, 1, 3),
            ],
            1,
        );
        assert_eq!(synchronous_test(&s), Err(AnalysisError::NotSynchronous));
    }

    #[test]
    fn invalid_system_rejected() {
        let s = TaskSystem::new(vec![PeriodicTask::new(0, 1, 5, 4)], 1);
        assert!(matches!(exact_test(&s), Err(AnalysisError::Invalid(_))));
        assert!(matches!(leung_test(&s), Err(AnalysisError::Invalid(_))));
    }

    #[test]
    fn literal_mode_agrees_and_samples_every_round() {
        let s = TaskSystem::new(
            vec![
                PeriodicTask::implicit(0, 2, 3),
                PeriodicTask::implicit(1, 2, 4),
            ],
            2,
        );
        let early = analyze(&s, TestMode::EarlyExit).unwrap();
        let literal = analyze(&s, TestMode::Literal).unwrap();
        assert_eq!(early.verdict, literal.verdict);
        assert_eq!(literal.configurations.len() as u64, s.c_tau().unwrap() + 2);
        assert_eq!(
            literal.configurations.last().unwrap().sampled_at,
            s.t_up().unwrap()
        );
    }

    #[test]
    fn probe_with_wcet_matches_exact_kind() {
        let v = predictability_probe(&overloaded(), &ExecutionModel::Wcet).unwrap();
        assert!(!v.is_schedulable());
        let v = predictability_probe(&light(), &ExecutionModel::Wcet).unwrap();
        assert!(v.is_schedulable());
    }
}
