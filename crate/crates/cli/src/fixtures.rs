//! Built-in counterexample task systems.
//!
//! `ce1`: three tasks on two CPUs whose schedule only becomes periodic three
//! hyperperiods after `o_max`, so checking the configurations at `o_max + P`
//! and `o_max + 2P` wrongly rejects it.
//!
//! `ce2`: four tasks with a common period of 161 on two CPUs (total
//! utilization exactly 2) whose steady phase starts dozens of hyperperiods in.

use edf_exact_core::{PeriodicTask, TaskSystem};

pub const NAMES: [&str; 2] = ["ce1", "ce2"];

pub fn ce1() -> TaskSystem {
    TaskSystem::new(
        vec![
            PeriodicTask::implicit(0, 2, 3),
            PeriodicTask::implicit(4, 3, 4),
            PeriodicTask::implicit(1, 3, 6),
        ],
        2,
    )
}

pub fn ce2() -> TaskSystem {
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

pub fn by_name(name: &str) -> Option<TaskSystem> {
    match name {
        "ce1" => Some(ce1()),
        "ce2" => Some(ce2()),
        _ => None,
    }
}
