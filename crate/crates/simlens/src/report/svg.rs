//! Standalone SVG rendering for heatmaps, scatter plots and saliency bars.
//!
//! Output is plain string building with fixed-precision floats, so a given
//! input always produces the same bytes. The color ramp is a fixed 3-stop
//! linear ramp over [min, max]: #313695 (low) -> #f7f7f7 (mid) -> #a50026
//! (high). A constant matrix maps every cell to mid-ramp.

use std::fmt::Write;

use ndarray::Array2;

use crate::dimred::Projection2D;
use crate::saliency::SaliencyVector;

const RAMP: [(u8, u8, u8); 3] = [(0x31, 0x36, 0x95), (0xf7, 0xf7, 0xf7), (0xa5, 0x00, 0x26)];

/// Categorical palette for fragments in scatter plots.
const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

fn lerp(a: u8, b: u8, t: f64) -> u8 {
    (a as f64 + (b as f64 - a as f64) * t).round() as u8
}

fn ramp_color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let (lo, hi, local) = if t < 0.5 {
        (RAMP[0], RAMP[1], t * 2.0)
    } else {
        (RAMP[1], RAMP[2], (t - 0.5) * 2.0)
    };
    format!(
        "#{:02x}{:02x}{:02x}",
        lerp(lo.0, hi.0, local),
        lerp(lo.1, hi.1, local),
        lerp(lo.2, hi.2, local)
    )
}

fn f(v: f64) -> String {
    format!("{v:.6}")
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Heat-map of a similarity or fragment matrix. Numeric values are embedded
/// in the cells when the matrix is at most 12 x 12.
pub fn render_heatmap(values: &Array2<f64>, row_labels: &[String], col_labels: &[String], title: &str) -> String {
    let (rows, cols) = values.dim();
    let cell = 28.0;
    let left = 110.0;
    let top = 60.0;
    let width = left + cols as f64 * cell + 20.0;
    let height = top + rows as f64 * cell + 90.0;

    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let constant = (max - min).abs() < 1e-300;

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        f(width), f(height), f(width), f(height)
    );
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"24\" font-family=\"monospace\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
        f(width / 2.0), escape(title)
    );
    for r in 0..rows {
        for c in 0..cols {
            let v = values[[r, c]];
            let t = if constant { 0.5 } else { (v - min) / (max - min) };
            let x = left + c as f64 * cell;
            let y = top + r as f64 * cell;
            let _ = write!(
                svg,
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
                f(x), f(y), f(cell), f(cell), ramp_color(t)
            );
            if rows <= 12 && cols <= 12 {
                let fg = if !constant && (t < 0.25 || t > 0.75) { "#ffffff" } else { "#000000" };
                let _ = write!(
                    svg,
                    "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"8\" fill=\"{}\" text-anchor=\"middle\">{:.2}</text>\n",
                    f(x + cell / 2.0), f(y + cell / 2.0 + 3.0), fg, v
                );
            }
        }
    }
    for (r, label) in row_labels.iter().enumerate().take(rows) {
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"9\" text-anchor=\"end\">{}</text>\n",
            f(left - 6.0), f(top + r as f64 * cell + cell / 2.0 + 3.0), escape(label)
        );
    }
    for (c, label) in col_labels.iter().enumerate().take(cols) {
        let x = left + c as f64 * cell + cell / 2.0;
        let y = top + rows as f64 * cell + 10.0;
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"9\" text-anchor=\"end\" transform=\"rotate(-60 {} {})\">{}</text>\n",
            f(x), f(y), f(x), f(y), escape(label)
        );
    }
    // ramp legend
    let ly = height - 26.0;
    for i in 0..40 {
        let t = i as f64 / 39.0;
        let _ = write!(
            svg,
            "<rect x=\"{}\" y=\"{}\" width=\"4\" height=\"10\" fill=\"{}\"/>\n",
            f(left + i as f64 * 4.0), f(ly), ramp_color(t)
        );
    }
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"9\">{:.3}</text>\n",
        f(left), f(ly + 22.0), min
    );
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"9\" text-anchor=\"end\">{:.3}</text>\n",
        f(left + 160.0), f(ly + 22.0), max
    );
    svg.push_str("</svg>\n");
    svg
}

/// Scatter plot of a 2-D projection, one color per fragment id, legend,
/// axes auto-scaled with a 5% margin. Coincident points degrade to a unit
/// window around them.
pub fn render_scatter(projection: &Projection2D, title: &str) -> String {
    let points = &projection.points;
    let n = points.nrows();
    let width = 480.0;
    let height = 420.0;
    let (left, top, right, bottom) = (50.0, 50.0, 20.0, 40.0);

    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for i in 0..n {
        xmin = xmin.min(points[[i, 0]]);
        xmax = xmax.max(points[[i, 0]]);
        ymin = ymin.min(points[[i, 1]]);
        ymax = ymax.max(points[[i, 1]]);
    }
    let pad = |lo: &mut f64, hi: &mut f64| {
        let span = *hi - *lo;
        if span < 1e-300 {
            *lo -= 0.5;
            *hi += 0.5;
        } else {
            *lo -= span * 0.05;
            *hi += span * 0.05;
        }
    };
    pad(&mut xmin, &mut xmax);
    pad(&mut ymin, &mut ymax);

    let plot_w = width - left - right;
    let plot_h = height - top - bottom;
    let sx = |x: f64| left + (x - xmin) / (xmax - xmin) * plot_w;
    let sy = |y: f64| top + (ymax - y) / (ymax - ymin) * plot_h;

    // stable fragment order of first appearance
    let mut fragments: Vec<String> = Vec::new();
    for label in &projection.source_labels {
        if !fragments.contains(&label.fragment_id) {
            fragments.push(label.fragment_id.clone());
        }
    }

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        f(width), f(height), f(width), f(height)
    );
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"24\" font-family=\"monospace\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
        f(width / 2.0), escape(title)
    );
    let _ = write!(
        svg,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888888\"/>\n",
        f(left), f(top), f(plot_w), f(plot_h)
    );
    for i in 0..n {
        let color = projection
            .source_labels
            .get(i)
            .and_then(|l| fragments.iter().position(|id| *id == l.fragment_id))
            .map(|idx| PALETTE[idx % PALETTE.len()])
            .unwrap_or("#000000");
        let _ = write!(
            svg,
            "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{}\" fill-opacity=\"0.75\"/>\n",
            f(sx(points[[i, 0]])), f(sy(points[[i, 1]])), color
        );
    }
    for (idx, id) in fragments.iter().enumerate() {
        let y = top + 14.0 + idx as f64 * 16.0;
        let _ = write!(
            svg,
            "<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{}\"/>\n",
            f(left + plot_w - 120.0), f(y - 3.0), PALETTE[idx % PALETTE.len()]
        );
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"10\">{}</text>\n",
            f(left + plot_w - 110.0), f(y), escape(id)
        );
    }
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"middle\">{} (seed {})</text>\n",
        f(width / 2.0), f(height - 12.0), projection.method, projection.seed
    );
    svg.push_str("</svg>\n");
    svg
}

/// Two stacked bar panels, one per fragment, bar height proportional to
/// each token's saliency score.
pub fn render_saliency(
    s1: &SaliencyVector,
    tokens1: &[String],
    s2: &SaliencyVector,
    tokens2: &[String],
) -> String {
    let panel_h = 180.0;
    let bar_w = 9.0;
    let cols = s1.scores.len().max(s2.scores.len()).max(1);
    let width = 60.0 + cols as f64 * bar_w + 20.0;
    let height = 2.0 * (panel_h + 60.0);
    let max_score = s1
        .scores
        .iter()
        .chain(s2.scores.iter())
        .cloned()
        .fold(0.0_f64, f64::max)
        .max(1e-300);

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        f(width), f(height), f(width), f(height)
    );
    let panel = |svg: &mut String, s: &SaliencyVector, tokens: &[String], offset: f64| {
        let _ = write!(
            svg,
            "<text x=\"60\" y=\"{}\" font-family=\"monospace\" font-size=\"12\">{} vs {}</text>\n",
            f(offset + 16.0), escape(&s.fragment_id), escape(&s.paired_fragment_id)
        );
        let base = offset + 30.0 + panel_h;
        for (i, &score) in s.scores.iter().enumerate() {
            let h = score / max_score * panel_h;
            let x = 60.0 + i as f64 * bar_w;
            let _ = write!(
                svg,
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
                f(x), f(base - h), f(bar_w - 1.5), f(h), ramp_color(score / max_score)
            );
            if let Some(token) = tokens.get(i) {
                let short: String = token.chars().take(6).collect();
                let _ = write!(
                    svg,
                    "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"6\" text-anchor=\"end\" transform=\"rotate(-90 {} {})\">{}</text>\n",
                    f(x + bar_w / 2.0), f(base + 8.0), f(x + bar_w / 2.0), f(base + 8.0), escape(&short)
                );
            }
        }
    };
    panel(&mut svg, s1, tokens1, 0.0);
    panel(&mut svg, s2, tokens2, panel_h + 60.0);
    svg.push_str("</svg>\n");
    svg
}
