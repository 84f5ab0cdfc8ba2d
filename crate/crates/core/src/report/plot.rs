//! Static SVG charts. Coordinates are printed with two decimals so output is
//! byte-identical across runs.

use std::fmt::Write as _;

const W: f64 = 720.0;
const H: f64 = 420.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn header(out: &mut String, title: &str, y_label: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{:.2}" y="28" font-size="16" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        out,
        r#"<text transform="translate(18,{:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        TOP + (H - TOP - BOTTOM) / 2.0,
        escape(y_label)
    );
}

/// Linear map from `[lo, hi]` onto the plot's vertical extent.
struct YAxis {
    lo: f64,
    hi: f64,
}

impl YAxis {
    fn new(values: impl Iterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = values.fold((0.0f64, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if hi <= lo {
            hi = lo + 1.0;
        }
        let pad = (hi - lo) * 0.05;
        if lo < 0.0 {
            lo -= pad;
        }
        YAxis { lo, hi: hi + pad }
    }

    fn y(&self, v: f64) -> f64 {
        TOP + (self.hi - v) / (self.hi - self.lo) * (H - TOP - BOTTOM)
    }

    fn draw(&self, out: &mut String) {
        for i in 0..=4 {
            let v = self.lo + (self.hi - self.lo) * f64::from(i) / 4.0;
            let y = self.y(v);
            let _ = writeln!(
                out,
                r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
                W - RIGHT
            );
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, y + 4.0, tick(v));
        }
        let zero = self.y(0.0);
        let _ = writeln!(out, r#"<line x1="{LEFT}" y1="{zero:.2}" x2="{:.2}" y2="{zero:.2}" stroke="black"/>"#, W - RIGHT);
    }
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a >= 1e9 {
        format!("{:.2}B", v / 1e9)
    } else if a >= 1e6 {
        format!("{:.1}M", v / 1e6)
    } else if a >= 1e3 {
        format!("{:.1}K", v / 1e3)
    } else {
        format!("{v:.2}")
    }
}

/// One bar per category; negative values hang below the zero line.
pub fn bar_chart(title: &str, y_label: &str, bars: &[(String, f64)]) -> String {
    let mut out = String::new();
    header(&mut out, title, y_label);
    let axis = YAxis::new(bars.iter().map(|b| b.1));
    axis.draw(&mut out);
    let slot = (W - LEFT - RIGHT) / bars.len().max(1) as f64;
    for (i, (label, v)) in bars.iter().enumerate() {
        let x = LEFT + slot * i as f64 + slot * 0.2;
        let (y0, y1) = (axis.y(0.0), axis.y(*v));
        let colour = if *v < 0.0 { PALETTE[1] } else { PALETTE[0] };
        let _ = writeln!(
            out,
            r#"<rect x="{x:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{colour}"/>"#,
            y0.min(y1),
            slot * 0.6,
            (y0 - y1).abs()
        );
        let cx = x + slot * 0.3;
        let _ = writeln!(out, r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, H - BOTTOM + 18.0, escape(label));
        let label_y = if *v < 0.0 { y1 + 14.0 } else { y1 - 4.0 };
        let _ = writeln!(out, r#"<text x="{cx:.2}" y="{label_y:.2}" text-anchor="middle">{}</text>"#, tick(*v));
    }
    out.push_str("</svg>\n");
    out
}

/// Lines over a shared categorical x axis, one per named series.
pub fn line_chart(title: &str, y_label: &str, x: &[String], series: &[(String, Vec<f64>)]) -> String {
    let mut out = String::new();
    header(&mut out, title, y_label);
    let axis = YAxis::new(series.iter().flat_map(|s| s.1.iter().copied()));
    axis.draw(&mut out);
    let span = W - LEFT - RIGHT;
    let px = |i: usize| if x.len() < 2 { LEFT + span / 2.0 } else { LEFT + span * i as f64 / (x.len() - 1) as f64 };
    let every = x.len().div_ceil(8).max(1);
    for (i, label) in x.iter().enumerate().filter(|(i, _)| i % every == 0) {
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, px(i), H - BOTTOM + 18.0, escape(label));
    }
    for (k, (name, values)) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let points: Vec<String> = values.iter().enumerate().map(|(i, v)| format!("{:.2},{:.2}", px(i), axis.y(*v))).collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{colour}" stroke-width="2" points="{}"/>"#, points.join(" "));
        for p in &points {
            let (cx, cy) = p.split_once(',').expect("formatted pair");
            let _ = writeln!(out, r#"<circle cx="{cx}" cy="{cy}" r="3" fill="{colour}"/>"#);
        }
        let ly = TOP + 16.0 * k as f64;
        let _ = writeln!(out, r#"<rect x="{:.2}" y="{:.2}" width="10" height="10" fill="{colour}"/>"#, W - RIGHT + 12.0, ly);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, W - RIGHT + 28.0, ly + 9.0, escape(name));
    }
    out.push_str("</svg>\n");
    out
}
