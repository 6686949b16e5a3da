//! Self-contained SVG figures. Coordinates are printed with fixed precision
//! so that identical inputs give identical bytes.

use std::fmt::Write;

use crate::botsig::ScatterPoint;
use crate::topic::TopicCluster;

const W: f64 = 720.0;
const H: f64 = 540.0;
const MARGIN: f64 = 60.0;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Linear map from a data box onto the plotting area.
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let (x0, x1) = padded(xs);
        let (y0, y1) = padded(ys);
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * MARGIN)
    }
}

fn padded(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    let span = hi - lo;
    if span <= f64::EPSILON * hi.abs().max(1.0) {
        let pad = lo.abs().max(1.0) * 0.5;
        return (lo - pad, hi + pad);
    }
    (lo - span * 0.08, hi + span * 0.08)
}

fn open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, escape(title));
    s
}

fn axes(s: &mut String, f: &Frame, xlabel: &str, ylabel: &str) {
    let (l, r, t, b) = (MARGIN, W - MARGIN, MARGIN, H - MARGIN);
    let _ = writeln!(s, r#"<rect x="{l}" y="{t}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#, r - l, b - t);
    for i in 0..=4 {
        let fx = f.x0 + (f.x1 - f.x0) * i as f64 / 4.0;
        let fy = f.y0 + (f.y1 - f.y0) * i as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, f.px(fx), b + 18.0, tick(fx));
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, l - 6.0, f.py(fy) + 4.0, tick(fy));
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, W / 2.0, H - 16.0, escape(xlabel));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    );
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else if v.abs() >= 1.0 {
        format!("{v:.2}")
    } else {
        format!("{v:.3}")
    }
}

fn close(mut s: String) -> String {
    s.push_str("</svg>\n");
    s
}

/// Density against centrality with the quadrant threshold lines.
pub fn strategic_diagram(topics: &[TopicCluster], labels: &[String], thresholds: (f64, f64), stat: &str) -> String {
    let (c_bar, d_bar) = thresholds;
    let f = Frame::fit(
        topics.iter().map(|t| t.centrality).chain([c_bar]),
        topics.iter().map(|t| t.density).chain([d_bar]),
    );
    let mut s = open("Strategic diagram");
    axes(&mut s, &f, "centrality", "density");
    let (cx, dy) = (f.px(c_bar), f.py(d_bar));
    let _ = writeln!(
        s,
        r#"<line x1="{cx:.1}" y1="{MARGIN}" x2="{cx:.1}" y2="{:.1}" stroke="red" stroke-dasharray="6 4"/>"#,
        H - MARGIN
    );
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN}" y1="{dy:.1}" x2="{:.1}" y2="{dy:.1}" stroke="red" stroke-dasharray="6 4"/>"#,
        W - MARGIN
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" fill="red">{} centrality {}</text>"#,
        cx + 4.0,
        MARGIN + 14.0,
        escape(stat),
        tick(c_bar)
    );
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" fill="red">{} density {}</text>"#, MARGIN + 4.0, dy - 4.0, escape(stat), tick(d_bar));
    for (q, x, y) in [("Q1", W - MARGIN - 24.0, MARGIN + 30.0), ("Q2", MARGIN + 8.0, MARGIN + 30.0), ("Q3", MARGIN + 8.0, H - MARGIN - 8.0), ("Q4", W - MARGIN - 24.0, H - MARGIN - 8.0)] {
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{y:.1}" fill="gray" font-size="14">{q}</text>"#);
    }
    for (t, label) in topics.iter().zip(labels) {
        let colour = if t.relevant { "#d62728" } else { "#1f77b4" };
        let (x, y) = (f.px(t.centrality), f.py(t.density));
        let r = 4.0 + (t.size as f64).sqrt();
        let _ = writeln!(s, r#"<circle cx="{x:.1}" cy="{y:.1}" r="{r:.1}" fill="{colour}" fill-opacity="0.7"/>"#);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, x + r + 3.0, y + 4.0, escape(label));
    }
    close(s)
}

/// One point per user: topical entropy against mean daily volume. Points in
/// the region `entropy >= e_min && volume >= v_min` are highlighted.
pub fn entropy_volume(points: &[(f64, f64)], e_min: f64, v_min: f64) -> String {
    let f = Frame::fit(
        points.iter().map(|p| p.0).chain([0.0, e_min]),
        points.iter().map(|p| p.1).chain([0.0, v_min]),
    );
    let mut s = open("Topical entropy vs daily volume");
    axes(&mut s, &f, "topical entropy", "mean daily tweets");
    let (rx, ry) = (f.px(e_min), f.py(v_min));
    let _ = writeln!(
        s,
        r##"<rect x="{rx:.1}" y="{MARGIN}" width="{:.1}" height="{:.1}" fill="#ffdddd" stroke="red" stroke-dasharray="4 3"/>"##,
        (W - MARGIN - rx).max(0.0),
        (ry - MARGIN).max(0.0)
    );
    for &(e, v) in points {
        let hot = e >= e_min && v >= v_min;
        let colour = if hot { "#d62728" } else { "#1f77b4" };
        let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="2.5" fill="{colour}" fill-opacity="0.6"/>"#, f.px(e), f.py(v));
    }
    close(s)
}

/// Retweeters around the influencer at the origin. Marker size follows
/// influence, diamonds mark retweeters of several influencers and red marks
/// high-volume accounts.
pub fn retweeter_scatter(influencer: &str, points: &[ScatterPoint]) -> String {
    let f = Frame { x0: -1.15, x1: 1.15, y0: -1.15, y1: 1.15 };
    let mut s = open(&format!("Retweeters of {influencer}"));
    let max_size = points.iter().map(|p| p.size).fold(0.0, f64::max);
    for p in points {
        let r = 2.5 + if max_size > 0.0 { 9.0 * (p.size / max_size).sqrt() } else { 0.0 };
        let colour = if p.high_volume { "#d62728" } else { "#1f77b4" };
        let (x, y) = (f.px(p.x), f.py(p.y));
        if p.multi_influencer {
            let _ = writeln!(
                s,
                r#"<polygon points="{:.1},{:.1} {:.1},{:.1} {:.1},{:.1} {:.1},{:.1}" fill="{colour}" fill-opacity="0.7"><title>{}</title></polygon>"#,
                x,
                y - r,
                x + r,
                y,
                x,
                y + r,
                x - r,
                y,
                escape(&p.retweeter_id)
            );
        } else {
            let _ = writeln!(
                s,
                r#"<circle cx="{x:.1}" cy="{y:.1}" r="{r:.1}" fill="{colour}" fill-opacity="0.7"><title>{}</title></circle>"#,
                escape(&p.retweeter_id)
            );
        }
    }
    let (ox, oy) = (f.px(0.0), f.py(0.0));
    let _ = writeln!(s, r#"<circle cx="{ox:.1}" cy="{oy:.1}" r="8" fill="black"/>"#);
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-weight="bold">{}</text>"#, ox + 10.0, oy - 10.0, escape(influencer));
    let legend = [
        ("circle", "#1f77b4", "retweets one influencer"),
        ("diamond", "#1f77b4", "retweets several influencers"),
        ("circle", "#d62728", "high daily volume"),
    ];
    for (i, (shape, colour, text)) in legend.iter().enumerate() {
        let y = H - 44.0 + i as f64 * 14.0;
        let x = W - 200.0;
        if *shape == "circle" {
            let _ = writeln!(s, r#"<circle cx="{x:.1}" cy="{:.1}" r="4" fill="{colour}"/>"#, y - 4.0);
        } else {
            let _ = writeln!(
                s,
                r#"<polygon points="{x:.1},{:.1} {:.1},{:.1} {x:.1},{:.1} {:.1},{:.1}" fill="{colour}"/>"#,
                y - 9.0,
                x + 5.0,
                y - 4.0,
                y + 1.0,
                x - 5.0,
                y - 4.0
            );
        }
        let _ = writeln!(s, r#"<text x="{:.1}" y="{y:.1}">{text}</text>"#, x + 10.0);
    }
    close(s)
}
