//! Static SVG output.

use std::fmt::Write as _;

use crate::simulator::EpisodeLog;
use crate::world::WorldMap;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line chart with markers, axis ticks and a legend.
pub fn line_plot_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (70.0, 150.0, 40.0, 50.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let all = || series.iter().flat_map(|s| s.points.iter());
    let (x0, x1) = bounds(all().map(|p| p.0));
    let (y0, y1) = bounds(all().map(|p| p.1));
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + ph - (y - y0) / (y1 - y0) * ph;

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    );
    let _ = writeln!(svg, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>",
        left + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        "<rect x=\"{left}\" y=\"{top}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"black\"/>"
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (x, y) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            sx(x),
            top + ph + 16.0,
            format_tick(x)
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
            left - 6.0,
            sy(y) + 4.0,
            format_tick(y)
        );
        let _ = writeln!(
            svg,
            "<line x1=\"{left}\" x2=\"{:.1}\" y1=\"{:.1}\" y2=\"{:.1}\" stroke=\"#ddd\"/>",
            left + pw,
            sy(y),
            sy(y)
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
        left + pw / 2.0,
        h - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        "<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">{1}</text>",
        top + ph / 2.0,
        escape(y_label)
    );
    for (k, s) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let points: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{colour}\" stroke-width=\"2\"/>",
            points.join(" ")
        );
        for &(x, y) in &s.points {
            let _ = writeln!(
                svg,
                "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"{colour}\"/>",
                sx(x),
                sy(y)
            );
        }
        let ly = top + 14.0 + 18.0 * k as f64;
        let _ = writeln!(
            svg,
            "<line x1=\"{0}\" x2=\"{1}\" y1=\"{ly}\" y2=\"{ly}\" stroke=\"{colour}\" stroke-width=\"2\"/><text x=\"{2}\" y=\"{3}\">{4}</text>",
            left + pw + 12.0,
            left + pw + 32.0,
            left + pw + 38.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn format_tick(v: f64) -> String {
    if v.abs() >= 100.0 || v.fract().abs() < 1e-9 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

/// Map, reference paths and driven trajectory, one metre per 50 px with row 0 at the
/// bottom.
pub fn trajectory_svg(map: &WorldMap, log: &EpisodeLog) -> String {
    let scale = 50.0;
    let margin = 20.0;
    let (w, h) = (map.width as f64 * scale, map.height as f64 * scale);
    let px = |x: f64| margin + x * scale;
    let py = |y: f64| margin + h - y * scale;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" font-size=\"12\">\n",
        w + 2.0 * margin,
        h + 2.0 * margin + 20.0
    );
    let _ = writeln!(
        svg,
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<rect x=\"{margin}\" y=\"{margin}\" width=\"{w}\" height=\"{h}\" fill=\"none\" stroke=\"black\"/>"
    );
    for i in 1..map.width {
        let x = px(i as f64);
        let _ = writeln!(svg, "<line x1=\"{x}\" x2=\"{x}\" y1=\"{margin}\" y2=\"{}\" stroke=\"#eee\"/>", margin + h);
    }
    for i in 1..map.height {
        let y = py(i as f64);
        let _ = writeln!(svg, "<line x1=\"{margin}\" x2=\"{}\" y1=\"{y}\" y2=\"{y}\" stroke=\"#eee\"/>", margin + w);
    }
    for cell in &map.obstacles {
        let _ = writeln!(
            svg,
            "<rect x=\"{}\" y=\"{}\" width=\"{scale}\" height=\"{scale}\" fill=\"#444\"/>",
            px(cell.col as f64),
            py(cell.row as f64 + 1.0)
        );
    }
    for segment in &log.paths {
        let points: Vec<String> = segment
            .path
            .points
            .iter()
            .map(|p| format!("{:.1},{:.1}", px(p.x), py(p.y)))
            .collect();
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" stroke-dasharray=\"5 3\"/>",
            points.join(" ")
        );
    }
    let driven: Vec<String> = log
        .samples
        .iter()
        .map(|s| format!("{:.1},{:.1}", px(s.x), py(s.y)))
        .collect();
    let _ = writeln!(
        svg,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\"/>",
        driven.join(" ")
    );
    let mut marker = |cell: &crate::world::GridCell, colour: &str| {
        let _ = writeln!(
            svg,
            "<circle cx=\"{}\" cy=\"{}\" r=\"7\" fill=\"{colour}\"/>",
            px(cell.col as f64 + 0.5),
            py(cell.row as f64 + 0.5)
        );
    };
    marker(&map.start, "#2ca02c");
    for wp in &map.waypoints {
        marker(wp, "#ff7f0e");
    }
    marker(&map.goal, "#9467bd");
    let _ = writeln!(
        svg,
        "<text x=\"{margin}\" y=\"{}\">outcome {:?}; reference dashed, robot solid</text>",
        h + 2.0 * margin + 12.0,
        log.outcome
    );
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_plot_has_one_polyline_per_series() {
        let series = vec![
            Series {
                label: "a".into(),
                points: vec![(0.1, 1.0), (1.0, 2.0)],
            },
            Series {
                label: "b & c".into(),
                points: vec![(0.5, 3.0)],
            },
        ];
        let svg = line_plot_svg("t", "x", "y", &series);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("b &amp; c"));
    }

    #[test]
    fn empty_plot_is_still_valid() {
        let svg = line_plot_svg("t", "x", "y", &[]);
        assert!(!svg.contains("NaN"));
    }
}
