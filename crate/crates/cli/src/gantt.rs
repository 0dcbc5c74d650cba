//! ASCII and SVG renderings of schedule traces.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use edf_exact_core::trace::EventKind;
use edf_exact_core::{ScheduleTrace, Ticks};
use num_integer::Integer;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GanttError {
    #[error("window [{from}, {to}) is not inside the trace [0, {horizon})")]
    Window {
        from: Ticks,
        to: Ticks,
        horizon: Ticks,
    },
}

/// Resolves an optional `[from, to)` window against the trace horizon.
pub fn window(
    trace: &ScheduleTrace,
    from: Option<Ticks>,
    to: Option<Ticks>,
) -> Result<(Ticks, Ticks), GanttError> {
    let from = from.unwrap_or(0);
    let to = to.unwrap_or(trace.horizon);
    if from > to || to > trace.horizon {
        return Err(GanttError::Window {
            from,
            to,
            horizon: trace.horizon,
        });
    }
    Ok((from, to))
}

/// Glyph for a 0-based task index: `1`-`9`, then `a`-`z`, then `A`-`Z`.
pub fn glyph(task: usize) -> char {
    const GLYPHS: &[u8] = b"123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";
    GLYPHS.get(task).map_or('#', |&b| b as char)
}

/// One row per CPU, one column per tick; idle ticks are `.`.
///
/// An empty window renders as an empty string.
pub fn render_ascii(trace: &ScheduleTrace, from: Ticks, to: Ticks) -> String {
    if from == to {
        return String::new();
    }
    let label_width = format!("cpu{}", trace.cpu_count()).len();
    let mut out = String::new();
    let _ = writeln!(out, "{:label_width$}  t = {from}..{to}", "");
    for cpu in 0..trace.cpu_count() {
        let row: String = (from..to)
            .map(|t| trace.occupant(cpu, t).map_or('.', |j| glyph(j.task)))
            .collect();
        let _ = writeln!(out, "{:label_width$} |{row}|", format!("cpu{}", cpu + 1));
    }
    out
}

/// Offsets and periods recovered from the release events in the trace.
///
/// Returns `None` unless every task seen releases at least twice.
pub fn release_pattern(trace: &ScheduleTrace) -> Option<Vec<(Ticks, Ticks)>> {
    let mut releases: BTreeMap<usize, Vec<(u64, Ticks)>> = BTreeMap::new();
    for e in &trace.events {
        if let EventKind::Release { .. } = e.kind {
            releases
                .entry(e.job.task)
                .or_default()
                .push((e.job.job, e.at));
        }
    }
    if releases.is_empty() || releases.keys().copied().ne(0..releases.len()) {
        return None;
    }
    releases
        .values()
        .map(|rs| {
            let &[(j1, r1), (j2, r2), ..] = rs.as_slice() else {
                return None;
            };
            let period = (r2 - r1) / (j2 - j1);
            let offset = r1.checked_sub((j1 - 1) * period)?;
            Some((offset, period))
        })
        .collect()
}

/// `o_max + kP` instants inside `[from, to]`, when the release pattern is recoverable.
pub fn aligned_instants(trace: &ScheduleTrace, from: Ticks, to: Ticks) -> Vec<Ticks> {
    let Some(pattern) = release_pattern(trace) else {
        return Vec::new();
    };
    let o_max = pattern.iter().map(|p| p.0).max().unwrap_or(0);
    let hyper = pattern.iter().fold(1u64, |acc, p| acc.lcm(&p.1));
    let mut out = Vec::new();
    let mut t = o_max;
    while t <= to {
        if t >= from {
            out.push(t);
        }
        t += hyper;
    }
    out
}

const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac",
];
const TICK_WIDTH: u64 = 16;
const BAND_HEIGHT: u64 = 28;
const BAND_GAP: u64 = 12;
const MARGIN_LEFT: u64 = 56;
const MARGIN_TOP: u64 = 24;

/// SVG with one band per CPU, segments colored by task, release (up) and
/// deadline (down) tick marks, and gridlines at hyperperiod-aligned instants.
pub fn render_svg(trace: &ScheduleTrace, from: Ticks, to: Ticks) -> String {
    let span = to - from;
    let width = MARGIN_LEFT + span * TICK_WIDTH + 16;
    let bands = trace.cpu_count() as u64;
    let height = MARGIN_TOP + bands * (BAND_HEIGHT + BAND_GAP) + 24;
    let x = |t: Ticks| MARGIN_LEFT + (t - from) * TICK_WIDTH;
    let band_y = |cpu: usize| MARGIN_TOP + cpu as u64 * (BAND_HEIGHT + BAND_GAP);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="monospace" font-size="10">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{width}" height="{height}" fill="white"/>"#
    );

    for cpu in 0..trace.cpu_count() {
        let y = band_y(cpu);
        let _ = writeln!(
            s,
            r##"<g class="band" data-cpu="{n}"><text x="4" y="{ty}">cpu{n}</text><rect x="{x0}" y="{y}" width="{w}" height="{BAND_HEIGHT}" fill="#f4f4f4" stroke="#999"/>"##,
            n = cpu + 1,
            ty = y + BAND_HEIGHT / 2 + 4,
            x0 = x(from),
            w = span * TICK_WIDTH,
        );
        for seg in &trace.cpus[cpu] {
            let Some(job) = seg.occupant else { continue };
            let (lo, hi) = (seg.start.max(from), seg.end.min(to));
            if lo >= hi {
                continue;
            }
            let _ = writeln!(
                s,
                r#"<rect class="segment" x="{}" y="{}" width="{}" height="{}" fill="{}"><title>task {} job {} [{}, {})</title></rect>"#,
                x(lo),
                y + 2,
                (hi - lo) * TICK_WIDTH,
                BAND_HEIGHT - 4,
                PALETTE[job.task % PALETTE.len()],
                job.task + 1,
                job.job,
                seg.start,
                seg.end,
            );
        }
        let _ = writeln!(s, "</g>");
    }

    let bottom = band_y(trace.cpu_count());
    for t in aligned_instants(trace, from, to) {
        let _ = writeln!(
            s,
            r##"<line class="grid" data-t="{t}" x1="{xt}" y1="{y1}" x2="{xt}" y2="{bottom}" stroke="#333" stroke-dasharray="4 2"/>"##,
            xt = x(t),
            y1 = MARGIN_TOP - 8,
        );
    }
    for e in &trace.events {
        if e.at < from || e.at > to {
            continue;
        }
        let (class, y1, y2) = match e.kind {
            EventKind::Release { .. } => ("release", MARGIN_TOP - 8, MARGIN_TOP - 2),
            EventKind::Deadline { .. } => {
                ("deadline", bottom - BAND_GAP + 2, bottom - BAND_GAP + 8)
            }
            EventKind::Completion => continue,
        };
        let _ = writeln!(
            s,
            r#"<line class="{class}" data-task="{task}" x1="{xt}" y1="{y1}" x2="{xt}" y2="{y2}" stroke="{color}" stroke-width="2"/>"#,
            task = e.job.task + 1,
            xt = x(e.at),
            color = PALETTE[e.job.task % PALETTE.len()],
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}">{from}</text><text x="{}" y="{}" text-anchor="end">{to}</text>"#,
        x(from),
        height - 6,
        x(to),
        height - 6,
    );
    s.push_str("</svg>\n");
    s
}
