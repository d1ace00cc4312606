//! Gantt renderings of a [`Schedule`].
//!
//! The SVG uses a fixed scale of [`PX_PER_UNIT`] pixels per time unit on the
//! x-axis and one row per processor.

use std::fmt::Write;

use crate::schedule::Schedule;

pub const PX_PER_UNIT: u64 = 4;
const ROW_HEIGHT: u64 = 28;
const BAR_HEIGHT: u64 = 20;
const LEFT_MARGIN: u64 = 48;
const TOP_MARGIN: u64 = 10;
const AXIS_HEIGHT: u64 = 24;

const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
];

/// One line per processor: `P0: [0..2) 0  [2..5) 1`.
pub fn render_text(s: &Schedule) -> String {
    let mut out = String::new();
    for (p, lane) in s.lanes().iter().enumerate() {
        let _ = write!(out, "P{p}:");
        for pl in lane {
            let _ = write!(out, " [{}..{}) {}", pl.start, pl.finish, pl.task);
        }
        out.push('\n');
    }
    let _ = writeln!(out, "makespan: {}", s.makespan);
    out
}

pub fn render_svg(s: &Schedule) -> String {
    let chart_width = s.makespan * PX_PER_UNIT;
    let width = LEFT_MARGIN + chart_width + 20;
    let rows_height = s.processors as u64 * ROW_HEIGHT;
    let height = TOP_MARGIN + rows_height + AXIS_HEIGHT;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="monospace" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="{width}" height="{height}" fill="white"/>"#);

    for (p, lane) in s.lanes().iter().enumerate() {
        let row_y = TOP_MARGIN + p as u64 * ROW_HEIGHT;
        let bar_y = row_y + (ROW_HEIGHT - BAR_HEIGHT) / 2;
        let _ = writeln!(
            out,
            r#"<text x="4" y="{}" dominant-baseline="middle">P{p}</text>"#,
            row_y + ROW_HEIGHT / 2
        );
        for pl in lane {
            let x = LEFT_MARGIN + pl.start * PX_PER_UNIT;
            let w = (pl.finish - pl.start) * PX_PER_UNIT;
            let color = PALETTE[pl.task % PALETTE.len()];
            let _ = writeln!(
                out,
                r#"<rect x="{x}" y="{bar_y}" width="{w}" height="{BAR_HEIGHT}" fill="{color}" stroke="black" stroke-width="0.5"><title>task {} [{}..{})</title></rect>"#,
                pl.task, pl.start, pl.finish
            );
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" text-anchor="middle" dominant-baseline="middle">{}</text>"#,
                x + w / 2,
                bar_y + BAR_HEIGHT / 2,
                pl.task
            );
        }
    }

    let axis_y = TOP_MARGIN + rows_height;
    let _ = writeln!(
        out,
        r#"<line x1="{LEFT_MARGIN}" y1="{axis_y}" x2="{}" y2="{axis_y}" stroke="black"/>"#,
        LEFT_MARGIN + chart_width
    );
    let step = tick_step(s.makespan);
    let mut t = 0;
    while t <= s.makespan {
        let x = LEFT_MARGIN + t * PX_PER_UNIT;
        let _ = writeln!(
            out,
            r#"<line x1="{x}" y1="{axis_y}" x2="{x}" y2="{}" stroke="black"/><text x="{x}" y="{}" text-anchor="middle">{t}</text>"#,
            axis_y + 4,
            axis_y + 16
        );
        t += step;
    }
    out.push_str("</svg>\n");
    out
}

/// Tick spacing giving roughly ten labels.
fn tick_step(makespan: u64) -> u64 {
    let raw = (makespan / 10).max(1);
    let mut step = 1;
    while step * 10 <= raw {
        step *= 10;
    }
    match raw / step {
        0 | 1 => step,
        2..=4 => step * 2,
        _ => step * 5,
    }
}
