//! Minimal SVG bar chart of the `F_n` distribution of a cell.

use std::fmt::Write as _;

use crate::harness::CellSummary;

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 300.0;
const MARGIN: f64 = 40.0;

/// Bars for every value between the smallest and largest observed `F_n`;
/// values inside `[k_low, k_high]` are drawn in a second colour.
pub fn histogram_svg(cell: &CellSummary) -> String {
    let lo = *cell.f_distribution.keys().next().unwrap_or(&0);
    let hi = *cell.f_distribution.keys().next_back().unwrap_or(&0);
    let max = cell.f_distribution.values().copied().max().unwrap_or(1).max(1) as f64;
    let slots = (hi - lo + 1) as f64;
    let bar_w = (WIDTH - 2.0 * MARGIN) / slots;
    let plot_h = HEIGHT - 2.0 * MARGIN;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle">F_n, n = {}, p = {}, {} trials (top-2 mass {:.3})</text>"#,
        WIDTH / 2.0,
        cell.n,
        cell.p,
        cell.trials,
        cell.top2_mass
    );
    for v in lo..=hi {
        let count = cell.f_distribution.get(&v).copied().unwrap_or(0);
        let h = plot_h * count as f64 / max;
        let x = MARGIN + (v - lo) as f64 * bar_w;
        let y = HEIGHT - MARGIN - h;
        let inside = (v as i64) >= cell.k_low && (v as i64) <= cell.k_high;
        let fill = if inside { "#d95f02" } else { "#1b9e77" };
        let _ = writeln!(
            s,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{h:.2}" fill="{fill}"/>"#,
            bar_w * 0.9
        );
        let cx = x + bar_w * 0.45;
        let _ = writeln!(s, r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle">{v}</text>"#, HEIGHT - MARGIN + 14.0);
        if count > 0 {
            let _ = writeln!(s, r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle">{count}</text>"#, y - 3.0);
        }
    }
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/>"#,
        HEIGHT - MARGIN,
        WIDTH - MARGIN
    );
    s.push_str("</svg>\n");
    s
}

/// File name used by `report --plot-dir` for a cell.
pub fn histogram_file_name(cell: &CellSummary) -> String {
    format!("hist_n{}_p{}.svg", cell.n, cell.p)
}
