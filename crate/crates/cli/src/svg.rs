//! Minimal SVG 1.1 line, scatter and heat-map renderer.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Style {
    Line,
    Markers,
}

#[derive(Clone, Debug)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
}

impl Series {
    pub fn line(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.into(),
            points,
            style: Style::Line,
        }
    }

    pub fn markers(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.into(),
            points,
            style: Style::Markers,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
}

#[derive(Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if log {
            lo = lo.floor();
            hi = hi.ceil();
        }
        if hi - lo < 1e-12 {
            hi = lo + 1.0;
        }
        Self { lo, hi, log }
    }

    fn unit(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    /// Tick positions in data units.
    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let span = (self.hi - self.lo) as usize;
            let step = span.div_ceil(8).max(1);
            (0..=span)
                .step_by(step)
                .map(|k| 10f64.powf(self.lo + k as f64))
                .collect()
        } else {
            (0..=5)
                .map(|k| self.lo + (self.hi - self.lo) * k as f64 / 5.0)
                .collect()
        }
    }
}

fn label(v: f64, log: bool) -> String {
    if log {
        format!("1e{}", v.log10().round())
    } else if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn frame(out: &mut String, title: &str, x_label: &str, y_label: &str) {
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>
<text x="{}" y="{}" text-anchor="middle">{}</text>
<text transform="translate(20,{}) rotate(-90)" text-anchor="middle">{}</text>"#,
        LEFT + (WIDTH - LEFT - RIGHT) / 2.0,
        escape(title),
        LEFT + (WIDTH - LEFT - RIGHT) / 2.0,
        HEIGHT - 15.0,
        escape(x_label),
        TOP + (HEIGHT - TOP - BOTTOM) / 2.0,
        escape(y_label),
    );
}

fn axes(out: &mut String, x: &Axis, y: &Axis) {
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for t in x.ticks() {
        let px = LEFT + x.unit(t) * pw;
        let _ = writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{}" x2="{px:.2}" y2="{}" stroke="black"/><text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 18.0,
            label(t, x.log)
        );
    }
    for t in y.ticks() {
        let py = TOP + (1.0 - y.unit(t)) * ph;
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            py + 4.0,
            label(t, y.log)
        );
    }
}

impl Plot {
    /// Renders the plot; on a log axis nonpositive values are dropped.
    pub fn render(&self) -> String {
        let keep =
            |p: &&(f64, f64)| p.0.is_finite() && p.1.is_finite() && (!self.log_y || p.1 > 0.0);
        let visible: Vec<Vec<(f64, f64)>> = self
            .series
            .iter()
            .map(|s| s.points.iter().filter(keep).copied().collect())
            .collect();
        let x = Axis::fit(visible.iter().flatten().map(|p| p.0), false);
        let y = Axis::fit(visible.iter().flatten().map(|p| p.1), self.log_y);
        let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
        let to_px = |p: &(f64, f64)| (LEFT + x.unit(p.0) * pw, TOP + (1.0 - y.unit(p.1)) * ph);

        let mut out = String::new();
        frame(&mut out, &self.title, &self.x_label, &self.y_label);
        axes(&mut out, &x, &y);
        for (k, (series, points)) in self.series.iter().zip(&visible).enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            match series.style {
                Style::Line => {
                    let path: Vec<String> = points
                        .iter()
                        .map(|p| {
                            let (px, py) = to_px(p);
                            format!("{px:.2},{py:.2}")
                        })
                        .collect();
                    let _ = writeln!(
                        out,
                        r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                        path.join(" ")
                    );
                }
                Style::Markers => {
                    for p in points {
                        let (px, py) = to_px(p);
                        let _ = writeln!(
                            out,
                            r#"<circle cx="{px:.2}" cy="{py:.2}" r="2.5" fill="{color}" fill-opacity="0.6"/>"#
                        );
                    }
                }
            }
            let ly = TOP + 10.0 + 18.0 * k as f64;
            let lx = WIDTH - RIGHT + 15.0;
            let _ = writeln!(
                out,
                r#"<rect x="{lx}" y="{}" width="12" height="4" fill="{color}"/><text x="{}" y="{}">{}</text>"#,
                ly - 4.0,
                lx + 18.0,
                ly + 1.0,
                escape(&series.name)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Heat map of `log10(value)` on a rectangular grid; `cells` are `(x, y, value)`
/// with `nx` distinct `x` values and `ny` distinct `y` values in row-major
/// order over `x`.
pub fn heatmap(
    title: &str,
    x_label: &str,
    y_label: &str,
    cells: &[(f64, f64, f64)],
    nx: usize,
    ny: usize,
) -> String {
    let logs: Vec<f64> = cells
        .iter()
        .map(|c| {
            if c.2 > 0.0 {
                c.2.log10()
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let finite = logs.iter().copied().filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min).max(-16.0);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() && hi > lo {
        (lo, hi)
    } else {
        (-16.0, 0.0)
    };
    let x = Axis::fit(cells.iter().map(|c| c.0), false);
    let y = Axis::fit(cells.iter().map(|c| c.1), false);
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let (cw, ch) = (pw / nx.max(1) as f64, ph / ny.max(1) as f64);

    let mut out = String::new();
    frame(&mut out, title, x_label, y_label);
    for (c, v) in cells.iter().zip(&logs) {
        let s = ((v.max(lo) - lo) / (hi - lo)).clamp(0.0, 1.0);
        let shade = (255.0 * (1.0 - s)).round() as u8;
        let px = LEFT + x.unit(c.0) * (pw - cw);
        let py = TOP + (1.0 - y.unit(c.1)) * (ph - ch);
        let _ = writeln!(
            out,
            r#"<rect x="{px:.2}" y="{py:.2}" width="{:.2}" height="{:.2}" fill="rgb(255,{shade},{shade})"/>"#,
            cw + 0.5,
            ch + 0.5
        );
    }
    axes(&mut out, &x, &y);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}">log10 in [{lo:.1}, {hi:.1}]</text>"#,
        WIDTH - RIGHT + 15.0,
        TOP + 10.0
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_plot_drops_nonpositive_points() {
        let plot = Plot {
            title: "t".into(),
            x_label: "n".into(),
            y_label: "v".into(),
            log_y: true,
            series: vec![Series::markers(
                "a",
                vec![(0.0, 1.0), (1.0, 0.0), (2.0, 1e-3)],
            )],
        };
        let svg = plot.render();
        assert!(svg.starts_with("<?xml"));
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg.contains(">1e-3<"));
    }

    #[test]
    fn empty_plot_still_renders() {
        let plot = Plot {
            title: "a < b".into(),
            x_label: String::new(),
            y_label: String::new(),
            log_y: false,
            series: vec![Series::line("s", vec![])],
        };
        let svg = plot.render();
        assert!(svg.contains("a &lt; b"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn heatmap_has_one_cell_per_value() {
        let cells = vec![
            (0.0, 1.0, 1.0),
            (0.0, 2.0, 0.1),
            (1.0, 1.0, 0.0),
            (1.0, 2.0, 1e-5),
        ];
        let svg = heatmap("h", "t", "n", &cells, 2, 2);
        assert_eq!(svg.matches("fill=\"rgb(").count(), 4);
    }
}
