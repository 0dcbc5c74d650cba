//! Human-readable reports.

use std::fmt::Write as _;

use edf_exact_core::{ExactAnalysis, LeungVerdict, Verdict};

/// Whether `EDF_EXACT_COLOR` asks for ANSI colors (`1`); anything else is off.
pub fn color_from_env() -> bool {
    std::env::var("EDF_EXACT_COLOR").is_ok_and(|v| v == "1")
}

fn paint(text: &str, code: &str, color: bool) -> String {
    if color {
        format!("\x1b[{code}m{text}\x1b[0m")
    } else {
        text.to_string()
    }
}

fn tuple(values: &[u64]) -> String {
    let inner: Vec<String> = values.iter().map(u64::to_string).collect();
    format!("({})", inner.join(", "))
}

pub fn verdict_line(verdict: &Verdict, color: bool) -> String {
    match verdict {
        Verdict::Schedulable { steady: Some(s) } => format!(
            "{} (steady phase from t={}, k={})",
            paint("schedulable", "32", color),
            s.periodic_from,
            s.k
        ),
        Verdict::Schedulable { steady: None } => paint("schedulable", "32", color),
        Verdict::DeadlineMiss { job, at } => format!(
            "{}: task {} job {} misses its deadline at t={}",
            paint("deadline miss", "31", color),
            job.task + 1,
            job.job,
            at
        ),
    }
}

pub fn analysis_text(a: &ExactAnalysis, color: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "verdict: {}", verdict_line(&a.verdict, color));
    let _ = writeln!(
        out,
        "hyperperiod: {}  o_max: {}  c_tau: {}  t_up: {}",
        a.hyperperiod, a.o_max, a.c_tau, a.t_up
    );
    if !a.configurations.is_empty() {
        let _ = writeln!(out, "configurations:");
        for c in &a.configurations {
            let _ = writeln!(out, "  t={:<8} {}", c.sampled_at, tuple(&c.values));
        }
    }
    out
}

pub fn leung_text(v: &LeungVerdict, color: bool) -> String {
    match v {
        LeungVerdict::Accept => format!("leung: {}\n", paint("accept", "32", color)),
        LeungVerdict::RejectByMiss { job, at } => format!(
            "leung: {} (task {} job {} misses its deadline at t={})\n",
            paint("reject", "31", color),
            job.task + 1,
            job.job,
            at
        ),
        LeungVerdict::RejectByConfigMismatch {
            at_1,
            at_2,
            first,
            second,
            diff,
        } => {
            let d: Vec<String> = diff.iter().map(i64::to_string).collect();
            format!(
                "leung: {} (configuration mismatch: C({at_1}) = {} but C({at_2}) = {}, difference ({}))\n",
                paint("reject", "31", color),
                tuple(&first.values),
                tuple(&second.values),
                d.join(", ")
            )
        }
    }
}
