//! Self-contained SVG line charts.
//!
//! Coordinates are printed with two decimals so identical inputs give
//! identical bytes.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLOURS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    out: String,
    x_range: (f64, f64),
    y_range: (f64, f64),
}

impl Frame {
    fn new(title: &str, x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        let mut out = String::new();
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
        writeln!(out, r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title))
            .unwrap();
        Self { out, x_range, y_range }
    }

    fn x(&self, v: f64) -> f64 {
        LEFT + (v - self.x_range.0) / (self.x_range.1 - self.x_range.0) * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - BOTTOM - (v - self.y_range.0) / (self.y_range.1 - self.y_range.0) * (HEIGHT - TOP - BOTTOM)
    }

    fn axes(&mut self, x_label: &str, y_label: &str, x_ticks: &[(f64, String)], y_ticks: &[(f64, String)]) {
        let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
        writeln!(self.out, r#"<path d="M{x0:.2},{y1:.2} L{x0:.2},{y0:.2} L{x1:.2},{y0:.2}" fill="none" stroke="black"/>"#)
            .unwrap();
        for (v, label) in x_ticks {
            let x = self.x(*v);
            writeln!(self.out, r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, y0 + 5.0).unwrap();
            writeln!(self.out, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, y0 + 19.0, escape(label))
                .unwrap();
        }
        for (v, label) in y_ticks {
            let y = self.y(*v);
            writeln!(self.out, r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/>"#, x0 - 5.0).unwrap();
            writeln!(self.out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 8.0, y + 4.0, escape(label))
                .unwrap();
        }
        writeln!(
            self.out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 16.0,
            escape(x_label)
        )
        .unwrap();
        writeln!(
            self.out,
            r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(y_label)
        )
        .unwrap();
    }

    fn polyline(&mut self, points: &[(f64, f64)], colour: &str, dashed: bool) {
        let coords: Vec<String> = points.iter().map(|&(x, y)| format!("{:.2},{:.2}", self.x(x), self.y(y))).collect();
        let dash = if dashed { r#" stroke-dasharray="6,4""# } else { "" };
        writeln!(
            self.out,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="2"{dash}/>"#,
            coords.join(" ")
        )
        .unwrap();
    }

    fn legend(&mut self, row: usize, label: &str, colour: &str, dashed: bool) {
        let y = TOP + 14.0 + 18.0 * row as f64;
        let x = WIDTH - RIGHT - 220.0;
        let dash = if dashed { r#" stroke-dasharray="6,4""# } else { "" };
        writeln!(
            self.out,
            r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{colour}" stroke-width="2"{dash}/>"#,
            x + 24.0
        )
        .unwrap();
        writeln!(self.out, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, x + 30.0, y + 4.0, escape(label)).unwrap();
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

/// Sweep summary for plotting: mean and standard deviation of accuracy
/// (fractions) per condition.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSeries {
    pub baseline: (f64, f64),
    pub points: Vec<(f64, f64, f64)>,
}

/// Accuracy against noise level, one evenly spaced slot per σ, with
/// standard-deviation whiskers and the unaugmented mean as a dashed rule.
pub fn sweep_chart(series: &SweepSeries) -> String {
    let n = series.points.len().max(1);
    let values = series
        .points
        .iter()
        .flat_map(|p| [p.1 - p.2, p.1 + p.2])
        .chain([series.baseline.0 - series.baseline.1, series.baseline.0 + series.baseline.1]);
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let lo = ((lo * 100.0 - 2.0).floor() / 100.0).max(0.0);
    let hi = ((hi * 100.0 + 2.0).ceil() / 100.0).min(1.0);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (0.0, 1.0) };

    let mut frame = Frame::new("Accuracy with amplitude-perturbation augmentation", (-0.5, n as f64 - 0.5), (lo, hi));
    let x_ticks: Vec<(f64, String)> = series.points.iter().enumerate().map(|(i, p)| (i as f64, format!("{}", p.0))).collect();
    let y_ticks: Vec<(f64, String)> = (0..=4)
        .map(|i| {
            let v = lo + (hi - lo) * i as f64 / 4.0;
            (v, format!("{:.1}", v * 100.0))
        })
        .collect();
    frame.axes("standard deviation of noise", "accuracy (%)", &x_ticks, &y_ticks);

    frame.polyline(&[(-0.5, series.baseline.0), (n as f64 - 0.5, series.baseline.0)], "black", true);
    let line: Vec<(f64, f64)> = series.points.iter().enumerate().map(|(i, p)| (i as f64, p.1)).collect();
    frame.polyline(&line, COLOURS[0], false);
    for (i, p) in series.points.iter().enumerate() {
        let x = frame.x(i as f64);
        let (y_lo, y_hi, y) = (frame.y(p.1 - p.2), frame.y(p.1 + p.2), frame.y(p.1));
        writeln!(frame.out, r#"<line x1="{x:.2}" y1="{y_lo:.2}" x2="{x:.2}" y2="{y_hi:.2}" stroke="{}"/>"#, COLOURS[0]).unwrap();
        writeln!(frame.out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3.5" fill="{}"/>"#, COLOURS[0]).unwrap();
    }
    frame.legend(0, "with augmentation (mean ± sd)", COLOURS[0], false);
    frame.legend(1, "without augmentation", "black", true);
    frame.finish()
}

/// One labelled ROC curve.
#[derive(Debug, Clone, PartialEq)]
pub struct RocSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub auc: Option<f64>,
}

/// ROC curves on the unit square with the chance diagonal dashed.
pub fn roc_chart(title: &str, curves: &[RocSeries]) -> String {
    let mut frame = Frame::new(title, (0.0, 1.0), (0.0, 1.0));
    let ticks: Vec<(f64, String)> = (0..=5).map(|i| (i as f64 / 5.0, format!("{:.1}", i as f64 / 5.0))).collect();
    frame.axes("false positive rate", "true positive rate", &ticks, &ticks);
    frame.polyline(&[(0.0, 0.0), (1.0, 1.0)], "gray", true);
    for (i, c) in curves.iter().enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        frame.polyline(&c.points, colour, false);
        let label = match c.auc {
            Some(a) => format!("{} (AUC {a:.3})", c.label),
            None => format!("{} (AUC undefined)", c.label),
        };
        frame.legend(i, &label, colour, false);
    }
    frame.finish()
}
