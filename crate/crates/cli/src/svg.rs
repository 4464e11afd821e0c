//! Minimal SVG line plot of the robustness curves.
//!
//! x is `log10(T1 * omega_1)`, y is `-log10(1 - F)`. The wqc series is drawn
//! solid, the serial swap dashed. Ticks sit on integer decades.

use std::fmt::Write as _;

use wqc::analysis::SweepResult;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let (lo, hi) = (lo.floor(), hi.ceil());
    if hi > lo {
        (lo, hi)
    } else {
        (lo, lo + 1.0)
    }
}

fn polyline(out: &mut String, frame: &Frame, pts: &[(f64, f64)], style: &str) {
    let coords: Vec<String> = pts
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
        .collect();
    writeln!(
        out,
        r#"<polyline fill="none" stroke="black" stroke-width="1.5" {style} points="{}"/>"#,
        coords.join(" ")
    )
    .expect("writing to a String");
}

/// Renders the sweep; `omega_1` in rad/s.
pub fn render(result: &SweepResult, omega_1: f64) -> String {
    let wqc: Vec<(f64, f64)> = result
        .points
        .iter()
        .map(|p| ((p.t1 * omega_1).log10(), p.neg_log10_infidelity_wqc))
        .collect();
    let swap: Vec<(f64, f64)> = result
        .points
        .iter()
        .map(|p| ((p.t1 * omega_1).log10(), p.neg_log10_infidelity_swap))
        .collect();
    let (x0, x1) = bounds(wqc.iter().map(|p| p.0));
    let (y0, y1) = bounds(wqc.iter().chain(&swap).map(|p| p.1));
    let y0 = y0.min(0.0);
    let f = Frame { x0, x1, y0, y1 };

    let mut s = String::new();
    let w = &mut s;
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        w,
        r#"<rect x="{LEFT}" y="{TOP}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        WIDTH - LEFT - RIGHT,
        HEIGHT - TOP - BOTTOM
    )
    .unwrap();

    for i in (x0 as i64)..=(x1 as i64) {
        let x = f.px(i as f64);
        let yb = HEIGHT - BOTTOM;
        writeln!(
            w,
            r#"<line x1="{x:.2}" y1="{yb:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
            yb + 5.0
        )
        .unwrap();
        writeln!(
            w,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{i}</text>"#,
            yb + 20.0
        )
        .unwrap();
    }
    for j in (y0 as i64)..=(y1 as i64) {
        let y = f.py(j as f64);
        writeln!(
            w,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT:.2}" y2="{y:.2}" stroke="black"/>"#,
            LEFT - 5.0
        )
        .unwrap();
        writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{j}</text>"#,
            LEFT - 8.0,
            y + 4.0
        )
        .unwrap();
    }
    writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">log10(T1 omega_1)</text>"#,
        LEFT + (WIDTH - LEFT - RIGHT) / 2.0,
        HEIGHT - 15.0
    )
    .unwrap();
    writeln!(
        w,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">-log10(1 - F)</text>"#,
        TOP + (HEIGHT - TOP - BOTTOM) / 2.0,
        TOP + (HEIGHT - TOP - BOTTOM) / 2.0
    )
    .unwrap();

    polyline(w, &f, &wqc, "");
    polyline(w, &f, &swap, r#"stroke-dasharray="6,4""#);

    let (lx, ly) = (LEFT + 15.0, TOP + 20.0);
    writeln!(w, r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="black" stroke-width="1.5"/>"#, lx + 30.0).unwrap();
    writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}">wqc</text>"#,
        lx + 36.0,
        ly + 4.0
    )
    .unwrap();
    writeln!(
        w,
        r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="1.5" stroke-dasharray="6,4"/>"#,
        ly + 18.0,
        lx + 30.0,
        ly + 18.0
    )
    .unwrap();
    writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}">serial swap</text>"#,
        lx + 36.0,
        ly + 22.0
    )
    .unwrap();
    writeln!(w, "</svg>").unwrap();
    s
}
