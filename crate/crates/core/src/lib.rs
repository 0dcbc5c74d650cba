//! Exact schedulability analysis for global-EDF on identical multiprocessors.
//!
//! The crate models asynchronous periodic constrained-deadline task systems,
//! simulates them tick by tick under a deterministic global scheduler, and
//! decides schedulability exactly by simulating until the schedule provably
//! repeats, at the latest by `t_up = o_max + (c_tau + 1) * P`.
//!
//! - [`model`]: tasks, systems, job arithmetic, validation.
//! - [`engine`]: the simulator and its priority policies.
//! - [`analysis`]: configurations, the exact test and related checks.
//! - [`oracle`]: an independent naive simulator for cross-checking.
//! - [`io`]: the JSON interchange formats.

pub mod analysis;
pub mod engine;
pub mod io;
pub mod model;
pub mod oracle;
pub mod trace;

pub use analysis::{
    analyze, config_dominates, configuration_at, exact_test, leung_test, predictability_probe,
    synchronous_test, AnalysisError, Configuration, ExactAnalysis, LeungVerdict, SteadyPhase,
    TestMode, Verdict,
};
pub use engine::{simulate, PriorityPolicy};
pub use model::{ExecutionModel, JobId, ModelError, PeriodicTask, TaskSystem, Ticks};
pub use trace::{Miss, ScheduleTrace};
