//! Self-contained SVG heatmaps.

use std::fmt::Write;

use crate::reduced::HalfPlaneGrid;

const STOPS: [(f64, [f64; 3]); 5] = [
    (0.0, [68.0, 1.0, 84.0]),
    (0.25, [59.0, 82.0, 139.0]),
    (0.5, [33.0, 145.0, 140.0]),
    (0.75, [94.0, 201.0, 98.0]),
    (1.0, [253.0, 231.0, 37.0]),
];

fn color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let i = STOPS.iter().position(|s| s.0 >= t).unwrap_or(STOPS.len() - 1).max(1);
    let (t0, c0) = STOPS[i - 1];
    let (t1, c1) = STOPS[i];
    let w = (t - t0) / (t1 - t0);
    let c: Vec<u8> = (0..3).map(|k| (c0[k] + w * (c1[k] - c0[k])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Heatmap of nodal values, `rho` to the right and `x3` upwards, downsampled to at most
/// `max_cells` cells per axis.
pub fn heatmap(grid: &HalfPlaneGrid<f64>, values: &[f64], title: &str, max_cells: usize) -> String {
    let stride_r = grid.n_rho.div_ceil(max_cells.max(1));
    let stride_z = grid.n_x3.div_ceil(max_cells.max(1));
    let nr = grid.n_rho.div_ceil(stride_r);
    let nz = grid.n_x3.div_ceil(stride_z);
    let vmax = values.iter().cloned().fold(0.0f64, f64::max).max(f64::MIN_POSITIVE);
    let cell = 4usize;
    let (w, h) = (nr * cell, nz * cell);
    let (left, top, bottom) = (50usize, 30usize, 40usize);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="11">"#,
        w + left + 80,
        h + top + bottom
    );
    let _ = writeln!(s, r#"<text x="{left}" y="18">{title}</text>"#);
    for a in 0..nr {
        for b in 0..nz {
            let k = grid.idx(a * stride_r, b * stride_z);
            let y = top + (nz - 1 - b) * cell;
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{y}" width="{cell}" height="{cell}" fill="{}"/>"#,
                left + a * cell,
                color(values[k] / vmax)
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{left}" y="{}">rho {:.3} .. {:.3}</text>"#,
        top + h + 16,
        grid.rho_min,
        grid.rho_max
    );
    let _ = writeln!(
        s,
        r#"<text x="4" y="{}">x3 {:.2} .. {:.2}</text>"#,
        top + h + 32,
        grid.x3_min,
        grid.x3_max
    );
    let bar_x = left + w + 20;
    for i in 0..=20 {
        let t = i as f64 / 20.0;
        let y = top + ((1.0 - t) * (h.saturating_sub(cell)) as f64) as usize;
        let _ = writeln!(s, r#"<rect x="{bar_x}" y="{y}" width="12" height="{cell}" fill="{}"/>"#, color(t));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}">{vmax:.3}</text>"#, bar_x + 16, top + 8);
    let _ = writeln!(s, r#"<text x="{}" y="{}">0</text>"#, bar_x + 16, top + h);
    s.push_str("</svg>\n");
    s
}
