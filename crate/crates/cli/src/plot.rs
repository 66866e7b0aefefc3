//! Static SVG figures: per-snapshot statistics lines and 2-d embedding
//! scatters with 1-σ ellipses.

use std::fmt::Write as _;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// Highlight colours, in order: the migrating node red, the control green.
pub const HIGHLIGHT: [&str; 4] = ["#d62728", "#2ca02c", "#1f77b4", "#ff7f0e"];

#[derive(Clone, Copy, Debug)]
struct Scale {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Scale {
    fn new(lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> Self {
        let (lo, hi) = if hi - lo > 1e-12 {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        };
        Self { lo, hi, px_lo, px_hi }
    }

    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }

    fn len(&self, d: f64) -> f64 {
        d / (self.hi - self.lo) * (self.px_hi - self.px_lo).abs()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open(out: &mut String, w: f64, h: f64) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
}

fn axes(out: &mut String, x: Scale, y: Scale, ticks_x: &[f64], ticks_y: &[f64]) {
    let (x0, x1, y0, y1) = (x.px_lo, x.px_hi, y.px_lo, y.px_hi);
    writeln!(
        out,
        r##"<path d="M{x0:.1} {y1:.1} V{y0:.1} H{x1:.1}" fill="none" stroke="#333"/>"##
    )
    .unwrap();
    for &t in ticks_x {
        let px = x.map(t);
        writeln!(
            out,
            r##"<line x1="{px:.1}" y1="{y0:.1}" x2="{px:.1}" y2="{:.1}" stroke="#333"/><text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"##,
            y0 + 4.0,
            y0 + 17.0,
            tick_label(t)
        )
        .unwrap();
    }
    for &t in ticks_y {
        let py = y.map(t);
        writeln!(
            out,
            r##"<line x1="{:.1}" y1="{py:.1}" x2="{x0:.1}" y2="{py:.1}" stroke="#333"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
            x0 - 4.0,
            x0 - 6.0,
            py + 4.0,
            tick_label(t)
        )
        .unwrap();
    }
}

fn tick_label(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e6 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn ticks(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..=count)
        .map(|i| lo + (hi - lo) * i as f64 / count as f64)
        .collect()
}

/// Line chart of several series over snapshot indices `0..len`.
pub fn line_plot(title: &str, x_label: &str, series: &[(&str, &[f64])]) -> String {
    let (w, h) = (640.0, 400.0);
    let len = series.iter().map(|s| s.1.len()).max().unwrap_or(0);
    let finite = series.iter().flat_map(|s| s.1.iter()).copied().filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((0.0f64, 0.0f64), |(a, b), v| (a.min(v), b.max(v)));
    let hi = if hi > lo { hi * 1.05 } else { lo + 1.0 };
    let x = Scale::new(0.0, len.saturating_sub(1).max(1) as f64, 70.0, w - 150.0);
    let y = Scale::new(lo, hi, h - 50.0, 40.0);

    let mut out = String::new();
    open(&mut out, w, h);
    writeln!(
        out,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        w / 2.0,
        escape(title)
    )
    .unwrap();
    let xt: Vec<f64> = (0..len).map(|t| t as f64).collect();
    axes(&mut out, x, y, &xt, &ticks(lo, hi, 4));
    writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (x.px_lo + x.px_hi) / 2.0,
        h - 12.0,
        escape(x_label)
    )
    .unwrap();
    for (i, (name, values)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .map(|(t, &v)| format!("{:.1},{:.1}", x.map(t as f64), y.map(v)))
            .collect();
        writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            pts.join(" ")
        )
        .unwrap();
        for p in &pts {
            let (px, py) = p.split_once(',').unwrap();
            writeln!(out, r#"<circle cx="{px}" cy="{py}" r="3" fill="{color}"/>"#).unwrap();
        }
        let ly = 50.0 + 20.0 * i as f64;
        writeln!(
            out,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            w - 135.0,
            w - 110.0,
            w - 104.0,
            ly + 4.0,
            escape(name)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

/// One node of an embedding panel: id, 2-d mean and per-axis σ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmbeddedNode {
    pub node: usize,
    pub mean: [f64; 2],
    pub sigma: [f64; 2],
}

/// Row of scatter panels, one per snapshot, all sharing one coordinate
/// frame. Highlighted nodes get their 1-σ ellipse and a label.
pub fn embedding_plot(panels: &[(String, Vec<EmbeddedNode>)], highlight: &[usize]) -> String {
    let (pw, ph, pad) = (260.0, 260.0, 30.0);
    let w = pad + panels.len() as f64 * (pw + pad);
    let h = ph + 2.0 * pad + 20.0;
    let all = panels.iter().flat_map(|p| p.1.iter());
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for n in all {
        let reach = if highlight.contains(&n.node) { n.sigma } else { [0.0; 2] };
        for d in 0..2 {
            lo[d] = lo[d].min(n.mean[d] - reach[d]);
            hi[d] = hi[d].max(n.mean[d] + reach[d]);
        }
    }
    if !lo[0].is_finite() {
        lo = [-1.0; 2];
        hi = [1.0; 2];
    }
    // square frame so ellipses keep their aspect ratio
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-6) * 1.1;
    let centre = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];

    let mut out = String::new();
    open(&mut out, w, h);
    for (i, (title, nodes)) in panels.iter().enumerate() {
        let left = pad + i as f64 * (pw + pad);
        let top = pad + 20.0;
        let x = Scale::new(centre[0] - span / 2.0, centre[0] + span / 2.0, left, left + pw);
        let y = Scale::new(centre[1] - span / 2.0, centre[1] + span / 2.0, top + ph, top);
        writeln!(
            out,
            r##"<rect x="{left:.1}" y="{top:.1}" width="{pw}" height="{ph}" fill="none" stroke="#999"/><text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="14">{}</text>"##,
            left + pw / 2.0,
            top - 8.0,
            escape(title)
        )
        .unwrap();
        for n in nodes.iter().filter(|n| !highlight.contains(&n.node)) {
            writeln!(
                out,
                r##"<circle cx="{:.1}" cy="{:.1}" r="2.5" fill="#888" fill-opacity="0.7"/>"##,
                x.map(n.mean[0]),
                y.map(n.mean[1])
            )
            .unwrap();
        }
        for (k, &id) in highlight.iter().enumerate() {
            let Some(n) = nodes.iter().find(|n| n.node == id) else {
                continue;
            };
            let color = HIGHLIGHT[k % HIGHLIGHT.len()];
            let (cx, cy) = (x.map(n.mean[0]), y.map(n.mean[1]));
            writeln!(
                out,
                r#"<ellipse cx="{cx:.1}" cy="{cy:.1}" rx="{:.1}" ry="{:.1}" fill="{color}" fill-opacity="0.15" stroke="{color}" stroke-width="1.5"/><circle cx="{cx:.1}" cy="{cy:.1}" r="3.5" fill="{color}"/><text x="{:.1}" y="{:.1}" fill="{color}">{id}</text>"#,
                x.len(n.sigma[0]),
                y.len(n.sigma[1]),
                cx + 5.0,
                cy - 5.0
            )
            .unwrap();
        }
    }
    out.push_str("</svg>\n");
    out
}
