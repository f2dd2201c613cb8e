//! Heatmaps as one `<rect>` per grid cell.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{CliError, CliResult};

const CELL: f64 = 8.0;
const BAR: f64 = 16.0;

/// Five-stop blue-to-yellow ramp, linearly interpolated.
const STOPS: [(f64, [f64; 3]); 5] = [
    (0.0, [68.0, 1.0, 84.0]),
    (0.25, [59.0, 82.0, 139.0]),
    (0.5, [33.0, 145.0, 140.0]),
    (0.75, [94.0, 201.0, 98.0]),
    (1.0, [253.0, 231.0, 37.0]),
];

fn color(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let k = STOPS.iter().rposition(|(s, _)| *s <= t).unwrap_or(0).min(STOPS.len() - 2);
    let ((s0, c0), (s1, c1)) = (STOPS[k], STOPS[k + 1]);
    let w = (t - s0) / (s1 - s0);
    let c: Vec<u8> = (0..3).map(|i| (c0[i] + w * (c1[i] - c0[i])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Render `values` on an `nx × ny` grid (`x` fastest, `y` up) with a
/// color bar and its range in the title.
pub fn heatmap(values: &[f64], nx: usize, ny: usize, title: &str) -> String {
    let finite = values.iter().copied().filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let (w, h) = (nx as f64 * CELL, ny as f64 * CELL);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" shape-rendering="crispEdges">"#,
        w + 3.0 * BAR,
        h + 2.0 * BAR
    );
    let _ = writeln!(
        s,
        r#"<text x="0" y="{}" font-family="sans-serif" font-size="11">{title} [{lo:.4e}, {hi:.4e}]</text>"#,
        BAR - 4.0
    );
    for j in 0..ny {
        for i in 0..nx {
            let v = values[j * nx + i];
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{}" width="{CELL}" height="{CELL}" fill="{}"/>"#,
                i as f64 * CELL,
                BAR + (ny - 1 - j) as f64 * CELL,
                color((v - lo) / span)
            );
        }
    }
    let steps = 32;
    for k in 0..steps {
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{:.3}" width="{BAR}" height="{:.3}" fill="{}"/>"#,
            w + BAR,
            BAR + h * (steps - 1 - k) as f64 / steps as f64,
            h / steps as f64,
            color(k as f64 / (steps - 1) as f64)
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_heatmap(path: &Path, values: &[f64], nx: usize, ny: usize, title: &str) -> CliResult<()> {
    std::fs::write(path, heatmap(values, nx, ny, title)).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_endpoints() {
        assert_eq!(color(0.0), "#440154");
        assert_eq!(color(1.0), "#fde725");
        assert_eq!(color(f64::NAN), "#440154");
    }

    #[test]
    fn one_rect_per_cell_plus_bar() {
        let svg = heatmap(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0], 3, 2, "t");
        assert_eq!(svg.matches("<rect").count(), 6 + 32);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn constant_field_renders() {
        let svg = heatmap(&[2.0; 4], 2, 2, "flat");
        assert!(svg.contains("#440154"));
    }
}
