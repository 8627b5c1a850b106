//! Static SVG line charts of sweep aggregates: one chart per (metric, tree),
//! one polyline per scheme, with 95% CI whiskers.

use std::fmt::Write as _;

use crate::assignment::Scheme;
use crate::experiment::AggregateRow;
use crate::session::TreeKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Throughput,
    Pdr,
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::Throughput, Metric::Pdr];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Throughput => "throughput",
            Metric::Pdr => "pdr",
        }
    }

    fn label(self) -> &'static str {
        match self {
            Metric::Throughput => "mean throughput (Mbps)",
            Metric::Pdr => "mean PDR",
        }
    }

    fn value(self, r: &AggregateRow) -> (f64, f64) {
        match self {
            Metric::Throughput => (r.mean_throughput / 1e6, r.ci95_throughput / 1e6),
            Metric::Pdr => (r.mean_pdr, r.ci95_pdr),
        }
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 110.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

fn color(s: Scheme) -> &'static str {
    match s {
        Scheme::Pos => "#1f77b4",
        Scheme::Masa => "#ff7f0e",
        Scheme::Mdr => "#2ca02c",
        Scheme::Rs => "#d62728",
    }
}

/// Renders one chart, or `None` when `rows` holds nothing for `tree`.
pub fn render_svg(rows: &[AggregateRow], metric: Metric, tree: TreeKind) -> Option<String> {
    let rows: Vec<&AggregateRow> = rows.iter().filter(|r| r.tree == tree).collect();
    if rows.is_empty() {
        return None;
    }
    let variable = rows[0].variable;
    let mut schemes: Vec<Scheme> = rows.iter().map(|r| r.scheme).collect();
    schemes.sort();
    schemes.dedup();

    let xs = rows.iter().map(|r| r.value);
    let (x_min, x_max) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    let (y_lo, y_hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| {
        let (m, ci) = metric.value(r);
        (a.min(m - ci), b.max(m + ci))
    });
    let y_min = y_lo.min(0.0);
    let y_max = if y_hi > y_min { y_hi * 1.05 } else { y_min + 1.0 };
    let x_span = if x_max > x_min { x_max - x_min } else { 1.0 };

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |x: f64| MARGIN_LEFT + (x - x_min) / x_span * plot_w;
    let py = |y: f64| MARGIN_TOP + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15">{} vs {} ({})</text>"#,
        WIDTH / 2.0,
        metric.label(),
        variable,
        tree.as_str().to_uppercase()
    );
    // Axes.
    let (x0, y0, x1, y1) = (MARGIN_LEFT, MARGIN_TOP + plot_h, MARGIN_LEFT + plot_w, MARGIN_TOP);
    let _ = writeln!(
        svg,
        r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" fill="none" stroke="black"/>"#
    );
    let mut ticks: Vec<f64> = rows.iter().map(|r| r.value).collect();
    ticks.sort_by(f64::total_cmp);
    ticks.dedup();
    for x in &ticks {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="11">{x}</text>"#,
            px(*x),
            y0 + 16.0
        );
    }
    for k in 0..=4 {
        let y = y_min + (y_max - y_min) * k as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="11">{:.3}</text>"#,
            x0 - 6.0,
            py(y) + 4.0,
            y
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="12">{variable}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );

    for (i, &scheme) in schemes.iter().enumerate() {
        let mut pts: Vec<&&AggregateRow> = rows.iter().filter(|r| r.scheme == scheme).collect();
        pts.sort_by(|a, b| a.value.total_cmp(&b.value));
        let c = color(scheme);
        let coords: Vec<String> = pts
            .iter()
            .map(|r| format!("{:.2},{:.2}", px(r.value), py(metric.value(r).0)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline data-scheme="{scheme}" points="{}" fill="none" stroke="{c}" stroke-width="2"/>"#,
            coords.join(" ")
        );
        for r in pts {
            let (m, ci) = metric.value(r);
            let x = px(r.value);
            let _ = writeln!(
                svg,
                r#"<path d="M{x:.2},{:.2} L{x:.2},{:.2} M{:.2},{:.2} L{:.2},{:.2} M{:.2},{:.2} L{:.2},{:.2}" stroke="{c}" fill="none"/>"#,
                py(m - ci),
                py(m + ci),
                x - 4.0,
                py(m - ci),
                x + 4.0,
                py(m - ci),
                x - 4.0,
                py(m + ci),
                x + 4.0,
                py(m + ci)
            );
            let _ = writeln!(
                svg,
                r#"<circle cx="{x:.2}" cy="{:.2}" r="3" fill="{c}"/>"#,
                py(m)
            );
        }
        let ly = MARGIN_TOP + 10.0 + 18.0 * i as f64;
        let lx = WIDTH - MARGIN_RIGHT + 15.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{c}" stroke-width="2"/><text x="{}" y="{}" font-family="sans-serif" font-size="12">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            scheme.as_str().to_uppercase()
        );
    }
    svg.push_str("</svg>\n");
    Some(svg)
}
