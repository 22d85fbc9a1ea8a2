//! Minimal, timestamp-free SVG emitters: diagram scatter plots, distance
//! heatmaps, and planar layout scatters. Output is deterministic — byte
//! identical across re-runs of the same inputs.

use pdrb_core::{PersistenceDiagram, PlanarLayout};

use crate::formats::SquareMatrix;

/// Fixed qualitative palette, cycled per input file.
pub const PALETTE: [&str; 8] = [
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666",
];

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Scatter plot of one or more diagrams: the diagonal, one marker per
/// pair, per-file palette colors, axes labeled birth/death, and a legend
/// in input order.
pub fn plot_svg(diagrams: &[(String, PersistenceDiagram)]) -> String {
    const MARGIN: f64 = 70.0;
    const AREA: f64 = 440.0;
    let legend_width = 180.0;
    let width = MARGIN * 2.0 + AREA + legend_width;
    let height = MARGIN * 2.0 + AREA;

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (_, d) in diagrams {
        for p in d.points() {
            lo = lo.min(p.birth);
            hi = hi.max(p.death);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let x = |v: f64| MARGIN + (v - lo) / (hi - lo) * AREA;
    let y = |v: f64| MARGIN + AREA - (v - lo) / (hi - lo) * AREA;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>\n"
    ));
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333333\"/>\n",
        fmt(MARGIN),
        fmt(MARGIN + AREA),
        fmt(MARGIN + AREA),
        fmt(MARGIN + AREA)
    ));
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333333\"/>\n",
        fmt(MARGIN),
        fmt(MARGIN),
        fmt(MARGIN),
        fmt(MARGIN + AREA)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"14\">birth</text>\n",
        fmt(MARGIN + AREA / 2.0),
        fmt(MARGIN + AREA + 40.0)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"14\" transform=\"rotate(-90 {} {})\">death</text>\n",
        fmt(MARGIN - 40.0),
        fmt(MARGIN + AREA / 2.0),
        fmt(MARGIN - 40.0),
        fmt(MARGIN + AREA / 2.0)
    ));
    // Range tick labels.
    for (v, tx, ty, anchor) in [
        (lo, x(lo), MARGIN + AREA + 20.0, "middle"),
        (hi, x(hi), MARGIN + AREA + 20.0, "middle"),
        (lo, MARGIN - 8.0, y(lo) + 4.0, "end"),
        (hi, MARGIN - 8.0, y(hi) + 4.0, "end"),
    ] {
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"{anchor}\" font-family=\"monospace\" font-size=\"11\" fill=\"#555555\">{}</text>\n",
            fmt(tx),
            fmt(ty),
            fmt(v)
        ));
    }
    // The diagonal birth = death.
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n",
        fmt(x(lo)),
        fmt(y(lo)),
        fmt(x(hi)),
        fmt(y(hi))
    ));
    // Points.
    for (i, (_, d)) in diagrams.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        for p in d.points() {
            svg.push_str(&format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{color}\" fill-opacity=\"0.85\"/>\n",
                fmt(x(p.birth)),
                fmt(y(p.death))
            ));
        }
    }
    // Legend, one swatch per input in input order.
    for (i, (label, _)) in diagrams.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let ly = MARGIN + i as f64 * 22.0;
        svg.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{color}\"/>\n",
            fmt(MARGIN + AREA + 24.0),
            fmt(ly)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\">{}</text>\n",
            fmt(MARGIN + AREA + 42.0),
            fmt(ly + 10.0),
            escape(label)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn heat_color(t: f64) -> String {
    // White to deep blue, channel-wise linear.
    let lerp = |a: f64, b: f64| (a + t.clamp(0.0, 1.0) * (b - a)).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        lerp(247.0, 8.0),
        lerp(251.0, 48.0),
        lerp(255.0, 107.0)
    )
}

/// Heatmap of a distance matrix; rows and columns keep the input order.
pub fn heatmap_svg(matrix: &SquareMatrix, labels: &[String]) -> String {
    let n = matrix.size;
    const CELL: f64 = 26.0;
    const MARGIN: f64 = 48.0;
    let side = MARGIN + n as f64 * CELL + 12.0;
    let peak = matrix.entries.iter().cloned().fold(0.0_f64, f64::max);
    let scale = if peak > 0.0 { peak } else { 1.0 };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{side}\" height=\"{side}\" viewBox=\"0 0 {side} {side}\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{side}\" height=\"{side}\" fill=\"#ffffff\"/>\n"
    ));
    for row in 0..n {
        for col in 0..n {
            let v = matrix.at(row, col);
            svg.push_str(&format!(
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" stroke=\"#cccccc\" stroke-width=\"0.5\"><title>{} vs {}: {}</title></rect>\n",
                fmt(MARGIN + col as f64 * CELL),
                fmt(MARGIN + row as f64 * CELL),
                fmt(CELL),
                fmt(CELL),
                heat_color(v / scale),
                escape(&labels[row]),
                escape(&labels[col]),
                crate::formats::format_f64(v)
            ));
        }
    }
    for i in 0..n {
        let center = MARGIN + (i as f64 + 0.5) * CELL;
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\">{i}</text>\n",
            fmt(center),
            fmt(MARGIN - 8.0)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">{i}</text>\n",
            fmt(MARGIN - 8.0),
            fmt(center + 4.0)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Scatter of a planar layout: three atom vertices plus one marker per
/// encoded input.
pub fn layout_svg(layout: &PlanarLayout, labels: &[String]) -> String {
    const MARGIN: f64 = 50.0;
    const AREA: f64 = 420.0;
    let side = MARGIN * 2.0 + AREA;

    let mut lo_x = f64::INFINITY;
    let mut hi_x = f64::NEG_INFINITY;
    let mut lo_y = f64::INFINITY;
    let mut hi_y = f64::NEG_INFINITY;
    for &(px, py) in layout.atom_positions.iter().chain(layout.points.iter()) {
        lo_x = lo_x.min(px);
        hi_x = hi_x.max(px);
        lo_y = lo_y.min(py);
        hi_y = hi_y.max(py);
    }
    let span = (hi_x - lo_x).max(hi_y - lo_y).max(1e-12);
    let pad = 0.08 * span;
    let (lo_x, lo_y, span) = (lo_x - pad, lo_y - pad, span + 2.0 * pad);
    let x = |v: f64| MARGIN + (v - lo_x) / span * AREA;
    let y = |v: f64| MARGIN + AREA - (v - lo_y) / span * AREA;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{side}\" height=\"{side}\" viewBox=\"0 0 {side} {side}\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{side}\" height=\"{side}\" fill=\"#ffffff\"/>\n"
    ));
    // Triangle edges between the atoms.
    for (a, b) in [(0, 1), (1, 2), (2, 0)] {
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\"/>\n",
            fmt(x(layout.atom_positions[a].0)),
            fmt(y(layout.atom_positions[a].1)),
            fmt(x(layout.atom_positions[b].0)),
            fmt(y(layout.atom_positions[b].1))
        ));
    }
    for (j, &(px, py)) in layout.atom_positions.iter().enumerate() {
        svg.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"7\" fill=\"#333333\"/>\n",
            fmt(x(px)),
            fmt(y(py))
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"13\">atom-{j}</text>\n",
            fmt(x(px) + 10.0),
            fmt(y(py) - 8.0)
        ));
    }
    for (i, &(px, py)) in layout.points.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        svg.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{color}\" fill-opacity=\"0.85\"><title>{}</title></circle>\n",
            fmt(x(px)),
            fmt(y(py)),
            escape(labels.get(i).map(String::as_str).unwrap_or("input"))
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
