#![allow(dead_code)]

use edf_exact_core::{PeriodicTask, TaskSystem};
use rand::Rng;

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

/// n ≤ 4, m ≤ 3, offsets ≤ 6, wcet ≤ 5, periods in {2,3,4,6}.
pub fn small_system<R: Rng>(rng: &mut R) -> TaskSystem {
    const PERIODS: [u64; 4] = [2, 3, 4, 6];
    let n = rng.gen_range(1..=4);
    let tasks = (0..n)
        .map(|_| {
            let period = PERIODS[rng.gen_range(0..PERIODS.len())];
            let deadline = rng.gen_range(1..=period);
            let wcet = rng.gen_range(1..=5u64.min(period));
            PeriodicTask::new(rng.gen_range(0..=6), wcet, deadline, period)
        })
        .collect();
    TaskSystem::new(tasks, rng.gen_range(1..=3))
}
