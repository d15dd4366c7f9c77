//! A small hand-written SVG renderer for fit overlays.

use std::fmt::Write as _;

/// Columns of a fit's overlay table.
#[derive(Clone, Debug, PartialEq)]
pub struct Overlay {
    pub centers: Vec<f64>,
    pub empirical: Vec<f64>,
    pub components: Vec<Vec<f64>>,
    pub mixture: Vec<f64>,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 48.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Tick positions at a 1-2-5 step covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].into_iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn label(v: f64) -> String {
    let s = format!("{:.4}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

/// Histogram dots, dashed weighted components and the solid mixture curve.
pub fn overlay_svg(o: &Overlay) -> String {
    let (x0, x1) = (o.centers[0], o.centers[o.centers.len() - 1]);
    let x1 = if x1 > x0 { x1 } else { x0 + 1.0 };
    let ymax = o
        .empirical
        .iter()
        .chain(&o.mixture)
        .chain(o.components.iter().flatten())
        .copied()
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE)
        * 1.05;
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * (WIDTH - LEFT - RIGHT);
    let py = |y: f64| HEIGHT - BOTTOM - y / ymax * (HEIGHT - TOP - BOTTOM);
    let line = |ys: &[f64]| {
        o.centers
            .iter()
            .zip(ys)
            .map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut s = String::new();
    let _ = writeln!(s, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    let _ = writeln!(s, "<!-- gigmix-cli {} -->", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"11\">"
    );
    let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let (bx, by) = (HEIGHT - BOTTOM, LEFT);
    let _ = writeln!(
        s,
        "<path d=\"M{by},{TOP} V{bx} H{:.2}\" fill=\"none\" stroke=\"black\"/>",
        WIDTH - RIGHT
    );
    for t in ticks(x0, x1) {
        let _ = writeln!(
            s,
            "<line x1=\"{0:.2}\" y1=\"{bx}\" x2=\"{0:.2}\" y2=\"{1}\" stroke=\"black\"/><text x=\"{0:.2}\" y=\"{2}\" text-anchor=\"middle\">{3}</text>",
            px(t),
            bx + 4.0,
            bx + 16.0,
            label(t)
        );
    }
    for t in ticks(0.0, ymax) {
        let _ = writeln!(
            s,
            "<line x1=\"{0}\" y1=\"{1:.2}\" x2=\"{by}\" y2=\"{1:.2}\" stroke=\"black\"/><text x=\"{2}\" y=\"{3:.2}\" text-anchor=\"end\">{4}</text>",
            by - 4.0,
            py(t),
            by - 6.0,
            py(t) + 4.0,
            label(t)
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">x</text>",
        0.5 * (LEFT + WIDTH - RIGHT),
        HEIGHT - 8.0
    );
    let _ = writeln!(
        s,
        "<text transform=\"translate(16 {:.2}) rotate(-90)\" text-anchor=\"middle\">density</text>",
        0.5 * (TOP + HEIGHT - BOTTOM)
    );
    for (j, c) in o.components.iter().enumerate() {
        let _ = writeln!(
            s,
            "<polyline class=\"component\" points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>",
            line(c),
            PALETTE[j % PALETTE.len()]
        );
    }
    let _ = writeln!(
        s,
        "<polyline class=\"mixture\" points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>",
        line(&o.mixture)
    );
    for (&x, &y) in o.centers.iter().zip(&o.empirical) {
        let _ = writeln!(s, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2\" fill=\"black\"/>", px(x), py(y));
    }
    s.push_str("</svg>\n");
    s
}
