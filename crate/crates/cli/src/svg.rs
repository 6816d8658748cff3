//! Minimal SVG output: line plots with axes, and a colour-coded scatter for
//! fields. Coordinates are written with fixed precision so reruns produce
//! identical bytes.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

impl Scale {
    fn map(self, v: f64) -> f64 {
        match self {
            Scale::Linear => v,
            Scale::Log => v.log10(),
        }
    }
}

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

pub struct Plot<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub x_scale: Scale,
    pub y_scale: Scale,
    pub series: Vec<Series<'a>>,
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn fit(points: impl Iterator<Item = (f64, f64)>) -> Option<Self> {
        let (mut x, mut y) = ((f64::INFINITY, f64::NEG_INFINITY), (f64::INFINITY, f64::NEG_INFINITY));
        for (a, b) in points {
            x = (x.0.min(a), x.1.max(a));
            y = (y.0.min(b), y.1.max(b));
        }
        if !(x.0.is_finite() && y.0.is_finite()) {
            return None;
        }
        let pad = |(lo, hi): (f64, f64)| if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        Some(Frame { x: pad(x), y: pad(y) })
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * MARGIN)
    }
}

fn header(s: &mut String, title: &str) {
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, escape(title));
}

fn axes(s: &mut String, f: &Frame, plot_x: (&str, Scale), plot_y: (&str, Scale)) {
    let (x0, x1, y0, y1) = (MARGIN, W - MARGIN, H - MARGIN, MARGIN);
    let _ = writeln!(s, r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" stroke="black" fill="none"/>"#);
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let xv = f.x.0 + t * (f.x.1 - f.x.0);
        let yv = f.y.0 + t * (f.y.1 - f.y.0);
        let (px, py) = (f.px(xv), f.py(yv));
        let _ = writeln!(s, r#"<path d="M{px:.2} {y0} L{px:.2} {:.2}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(
            s,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y0 + 18.0,
            tick(xv, plot_x.1)
        );
        let _ = writeln!(s, r#"<path d="M{:.2} {py:.2} L{x0} {py:.2}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 8.0,
            py + 4.0,
            tick(yv, plot_y.1)
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 15.0, escape(plot_x.0));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(plot_y.0)
    );
}

fn tick(v: f64, scale: Scale) -> String {
    match scale {
        Scale::Log => format!("1e{v:.1}"),
        Scale::Linear if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) => format!("{v:.2e}"),
        Scale::Linear => format!("{v:.3}"),
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot<'_> {
    /// Points that are not finite after scaling (e.g. nonpositive values on
    /// a log axis) are dropped.
    pub fn render(&self) -> String {
        let mapped: Vec<Vec<(f64, f64)>> = self
            .series
            .iter()
            .map(|s| {
                s.points
                    .iter()
                    .map(|&(x, y)| (self.x_scale.map(x), self.y_scale.map(y)))
                    .filter(|(x, y)| x.is_finite() && y.is_finite())
                    .collect()
            })
            .collect();
        let mut s = String::new();
        header(&mut s, self.title);
        let Some(frame) = Frame::fit(mapped.iter().flatten().copied()) else {
            s.push_str("<text x=\"320\" y=\"210\" text-anchor=\"middle\">no data</text>\n</svg>\n");
            return s;
        };
        axes(&mut s, &frame, (self.x_label, self.x_scale), (self.y_label, self.y_scale));
        for (k, (series, pts)) in self.series.iter().zip(&mapped).enumerate() {
            let color = COLORS[k % COLORS.len()];
            let mut d = String::new();
            for (i, &(x, y)) in pts.iter().enumerate() {
                let _ = write!(d, "{}{:.2} {:.2} ", if i == 0 { 'M' } else { 'L' }, frame.px(x), frame.py(y));
            }
            let _ = writeln!(s, r#"<path d="{}" stroke="{color}" stroke-width="1.5" fill="none"/>"#, d.trim_end());
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
                W - MARGIN - 150.0,
                MARGIN + 16.0 * k as f64,
                escape(series.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Scatter of `(x, y, value)` coloured on a blue–red ramp over the value range.
pub fn heat_map(title: &str, x_label: &str, y_label: &str, cells: &[(f64, f64, f64)]) -> String {
    let mut s = String::new();
    header(&mut s, title);
    let Some(frame) = Frame::fit(cells.iter().map(|&(x, y, _)| (x, y))) else {
        s.push_str("<text x=\"320\" y=\"210\" text-anchor=\"middle\">no data</text>\n</svg>\n");
        return s;
    };
    axes(&mut s, &frame, (x_label, Scale::Linear), (y_label, Scale::Linear));
    let (lo, hi) = cells.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), c| (a.min(c.2), b.max(c.2)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    for &(x, y, v) in cells {
        let t = ((v - lo) / span).clamp(0.0, 1.0);
        let (r, b) = ((255.0 * t).round() as u8, (255.0 * (1.0 - t)).round() as u8);
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="1.6" fill="#{r:02x}40{b:02x}"/>"##,
            frame.px(x),
            frame.py(y)
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}">range [{lo:.3e}, {hi:.3e}]</text>"#, MARGIN, H - 30.0);
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_axis_drops_nonpositive_points() {
        let plot = Plot {
            title: "t",
            x_label: "x",
            y_label: "y",
            x_scale: Scale::Log,
            y_scale: Scale::Log,
            series: vec![Series { label: "a", points: vec![(1.0, 1.0), (10.0, 0.0), (100.0, 10.0)] }],
        };
        let svg = plot.render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        let path = svg.lines().find(|l| l.contains("stroke-width")).unwrap();
        assert_eq!(path.matches('L').count(), 1);
    }

    #[test]
    fn empty_inputs_still_render() {
        assert!(heat_map("h", "x", "y", &[]).contains("no data"));
        let plot = Plot { title: "t", x_label: "", y_label: "", x_scale: Scale::Linear, y_scale: Scale::Linear, series: vec![] };
        assert!(plot.render().contains("no data"));
    }
}
