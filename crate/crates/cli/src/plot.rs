//! Minimal deterministic SVG line charts on log-log axes.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = ["#000000", "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e"];

pub struct Series {
    pub label: String,
    /// Points with nonpositive or non-finite coordinates are dropped.
    pub points: Vec<(f64, f64)>,
}

pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn fmt(v: f64) -> String {
    format!("{:.2}", v)
}

fn tick_label(v: f64) -> String {
    if (1e-2..1e4).contains(&v.abs()) {
        format!("{}", (v * 1e4).round() / 1e4)
    } else {
        format!("{v:.1e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn log_range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v.log10()), hi.max(v.log10()))
    });
    if !lo.is_finite() {
        return None;
    }
    if hi - lo < 1e-9 {
        Some((lo - 0.5, hi + 0.5))
    } else {
        let pad = 0.05 * (hi - lo);
        Some((lo - pad, hi + pad))
    }
}

impl Chart {
    fn usable(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.series
            .iter()
            .flat_map(|s| s.points.iter().copied())
            .filter(|&(x, y)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())
    }

    /// Renders the chart. `comment` is embedded as an XML comment.
    pub fn to_svg(&self, comment: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(out, "<!-- {} -->", comment.replace("--", "- -"));
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
            fmt((LEFT + WIDTH - RIGHT) / 2.0),
            escape(&self.title)
        );
        let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
        let _ = writeln!(
            out,
            r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        let xr = log_range(self.usable().map(|p| p.0));
        let yr = log_range(self.usable().map(|p| p.1));
        if let (Some((x0, x1)), Some((y0, y1))) = (xr, yr) {
            let sx = |x: f64| LEFT + (x.log10() - x0) / (x1 - x0) * pw;
            let sy = |y: f64| TOP + ph - (y.log10() - y0) / (y1 - y0) * ph;
            let mut xs: Vec<f64> = self.usable().map(|p| p.0).collect();
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            for x in xs {
                let px = fmt(sx(x));
                let _ = writeln!(
                    out,
                    r#"<line x1="{px}" y1="{}" x2="{px}" y2="{}" stroke="black"/><text x="{px}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
                    fmt(TOP + ph),
                    fmt(TOP + ph + 5.0),
                    fmt(TOP + ph + 18.0),
                    tick_label(x)
                );
            }
            for e in y0.ceil() as i32..=y1.floor() as i32 {
                let y = 10f64.powi(e);
                let py = fmt(sy(y));
                let _ = writeln!(
                    out,
                    r#"<line x1="{}" y1="{py}" x2="{LEFT}" y2="{py}" stroke="black"/><text x="{}" y="{py}" font-family="sans-serif" font-size="11" text-anchor="end" dominant-baseline="middle">{}</text>"#,
                    fmt(LEFT - 5.0),
                    fmt(LEFT - 8.0),
                    tick_label(y)
                );
            }
            for (idx, s) in self.series.iter().enumerate() {
                let color = COLORS[idx % COLORS.len()];
                let pts: Vec<String> = s
                    .points
                    .iter()
                    .filter(|&&(x, y)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())
                    .map(|&(x, y)| format!("{},{}", fmt(sx(x)), fmt(sy(y))))
                    .collect();
                let _ = writeln!(
                    out,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
                    pts.join(" ")
                );
                for p in &pts {
                    let (cx, cy) = p.split_once(',').unwrap();
                    let _ = writeln!(out, r#"<circle cx="{cx}" cy="{cy}" r="3" fill="{color}"/>"#);
                }
                let ly = TOP + 10.0 + 20.0 * idx as f64;
                let lx = WIDTH - RIGHT + 15.0;
                let _ = writeln!(
                    out,
                    r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{ly}" font-family="sans-serif" font-size="12" dominant-baseline="middle">{}</text>"#,
                    lx + 20.0,
                    lx + 26.0,
                    escape(&s.label)
                );
            }
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
            fmt(LEFT + pw / 2.0),
            fmt(HEIGHT - 15.0),
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="20" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 20 {})">{}</text>"#,
            fmt(TOP + ph / 2.0),
            fmt(TOP + ph / 2.0),
            escape(&self.y_label)
        );
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart() -> Chart {
        Chart {
            title: "AveMISE_sigma".into(),
            x_label: "T".into(),
            y_label: "MISE".into(),
            series: vec![
                Series {
                    label: "p=5".into(),
                    points: vec![(5.0, 0.1), (10.0, 0.05), (20.0, f64::NAN)],
                },
                Series {
                    label: "p=10".into(),
                    points: vec![(5.0, 0.2), (10.0, 0.08)],
                },
            ],
        }
    }

    #[test]
    fn svg_is_deterministic_and_complete() {
        let a = chart().to_svg("config_hash=ab seed=1");
        assert_eq!(a, chart().to_svg("config_hash=ab seed=1"));
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert!(a.contains("<!-- config_hash=ab seed=1 -->"));
        assert_eq!(a.matches("<polyline").count(), 2);
        assert!(!a.contains("NaN"));
    }

    #[test]
    fn empty_chart_still_renders() {
        let c = Chart {
            title: "x".into(),
            x_label: "T".into(),
            y_label: "y".into(),
            series: Vec::new(),
        };
        assert!(c.to_svg("").contains("</svg>"));
    }
}
