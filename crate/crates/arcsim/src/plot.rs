//! Self-contained SVG rendering of a kinematic trace: feed rate over time
//! on top, tangential and normal acceleration below. No drawing deps; the
//! output is deterministic for identical traces.

use std::fmt::Write;

use crate::profile::KinematicTrace;

const WIDTH: f64 = 960.0;
const PANEL_H: f64 = 240.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_V: f64 = 28.0;

struct Panel {
    title: &'static str,
    y_label: &'static str,
    top: f64,
}

fn fmt(v: f64) -> String {
    format!("{v:.3}")
}

fn polyline(
    out: &mut String,
    xs: &[f64],
    ys: &[f64],
    x_range: (f64, f64),
    y_range: (f64, f64),
    panel: &Panel,
    color: &str,
) {
    let (x0, x1) = x_range;
    let (y0, y1) = y_range;
    let sx = (WIDTH - MARGIN_L - MARGIN_R) / (x1 - x0).max(1e-12);
    let sy = (PANEL_H - 2.0 * MARGIN_V) / (y1 - y0).max(1e-12);
    let mut points = String::new();
    for (x, y) in xs.iter().zip(ys) {
        let px = MARGIN_L + (x - x0) * sx;
        let py = panel.top + PANEL_H - MARGIN_V - (y - y0) * sy;
        let _ = write!(points, "{},{} ", fmt(px), fmt(py));
    }
    let _ = writeln!(
        out,
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.2\" points=\"{}\"/>",
        points.trim_end()
    );
}

fn axes(out: &mut String, panel: &Panel, x_range: (f64, f64), y_range: (f64, f64)) {
    let x_axis_y = panel.top + PANEL_H - MARGIN_V;
    let _ = writeln!(
        out,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333\"/>",
        fmt(MARGIN_L),
        fmt(x_axis_y),
        fmt(WIDTH - MARGIN_R),
        fmt(x_axis_y)
    );
    let _ = writeln!(
        out,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333\"/>",
        fmt(MARGIN_L),
        fmt(panel.top + MARGIN_V),
        fmt(MARGIN_L),
        fmt(x_axis_y)
    );
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"#333\">{}</text>",
        fmt(MARGIN_L),
        fmt(panel.top + MARGIN_V - 10.0),
        panel.title
    );
    for (frac, value) in [(0.0, y_range.0), (1.0, y_range.1)] {
        let y = panel.top + PANEL_H - MARGIN_V - frac * (PANEL_H - 2.0 * MARGIN_V);
        let _ = writeln!(
            out,
            "<text x=\"4\" y=\"{}\" font-size=\"10\" fill=\"#333\">{} {}</text>",
            fmt(y),
            fmt(value),
            panel.y_label
        );
    }
    for (frac, value) in [(0.0, x_range.0), (0.5, 0.5 * (x_range.0 + x_range.1)), (1.0, x_range.1)] {
        let x = MARGIN_L + frac * (WIDTH - MARGIN_L - MARGIN_R);
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"10\" fill=\"#333\">{} s</text>",
            fmt(x - 10.0),
            fmt(x_axis_y + 14.0),
            fmt(value)
        );
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        (0.0, 1.0)
    } else if (hi - lo).abs() < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo.min(0.0), hi)
    }
}

/// Render the trace as an SVG document.
pub fn render_trace_svg(trace: &KinematicTrace) -> String {
    let ts: Vec<f64> = trace.samples.iter().map(|s| s.t).collect();
    let feed: Vec<f64> = trace.samples.iter().map(|s| s.v_f * 60.0).collect();
    let a_t: Vec<f64> = trace.samples.iter().map(|s| s.a_t).collect();
    let a_n: Vec<f64> = trace.samples.iter().map(|s| s.a_n).collect();

    let x_range = range(ts.iter().copied());
    let feed_range = range(feed.iter().copied());
    let acc_range = range(a_t.iter().copied().chain(a_n.iter().copied()));

    let total_h = 2.0 * PANEL_H;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{total_h}\" viewBox=\"0 0 {WIDTH} {total_h}\">"
    );
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");

    let feed_panel = Panel {
        title: "feed rate",
        y_label: "m/min",
        top: 0.0,
    };
    axes(&mut out, &feed_panel, x_range, feed_range);
    polyline(&mut out, &ts, &feed, x_range, feed_range, &feed_panel, "#0057b7");

    let acc_panel = Panel {
        title: "tangential (blue) and normal (red) acceleration",
        y_label: "m/s^2",
        top: PANEL_H,
    };
    axes(&mut out, &acc_panel, x_range, acc_range);
    polyline(&mut out, &ts, &a_t, x_range, acc_range, &acc_panel, "#0057b7");
    polyline(&mut out, &ts, &a_n, x_range, acc_range, &acc_panel, "#c22");
    let _ = writeln!(out, "</svg>");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::TraceSample;

    #[test]
    fn renders_wellformed_svg() {
        let trace = KinematicTrace {
            samples: (0..100)
                .map(|k| {
                    let t = k as f64 * 1e-3;
                    TraceSample {
                        t,
                        s: t * 0.1,
                        x: t,
                        y: 0.0,
                        v_f: 0.1,
                        a_t: 0.0,
                        a_n: 0.33,
                        j_t: 0.0,
                        block: 0,
                    }
                })
                .collect(),
        };
        let svg = render_trace_svg(&trace);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert_eq!(svg, render_trace_svg(&trace));
    }
}
