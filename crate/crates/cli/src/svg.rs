//! Minimal hand-written SVG: a color-mapped grid and a top-down course map.

use std::fmt::Write;

use fars_core::course::{CourseSpec, SPAWN};
use fars_core::fuzzy::SurfaceGrid;

/// Blue → yellow ramp for `t ∈ [0, 1]`.
fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(48.0, 250.0), lerp(18.0, 230.0), lerp(120.0, 40.0))
}

/// Heatmap of `grid` with v̂ across and d̂ upwards; colors span the grid's
/// own minimum and maximum.
pub fn surface_heatmap(grid: &SurfaceGrid, title: &str) -> String {
    let (cell, margin) = (480.0 / grid.nx.max(grid.ny) as f64, 60.0);
    let (w, h) = (cell * grid.nx as f64, cell * grid.ny as f64);
    let lo = grid.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = grid.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" font-family="sans-serif" font-size="12">"#,
        w + 2.0 * margin,
        h + 2.0 * margin
    );
    let _ = writeln!(s, r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{title}</text>"#, margin + w / 2.0);
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            let x = margin + i as f64 * cell;
            let y = margin + h - (j + 1) as f64 * cell;
            let _ = writeln!(
                s,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                cell + 0.05,
                cell + 0.05,
                ramp((grid.at(i, j) - lo) / span)
            );
        }
    }
    let _ = writeln!(s, r#"<rect x="{margin}" y="{margin}" width="{w:.2}" height="{h:.2}" fill="none" stroke="black"/>"#);
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{f:.2}</text>"#, margin + f * w, margin + h + 16.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{f:.2}</text>"#, margin - 6.0, margin + h - f * h + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">normalized velocity v̂</text>"#, margin + w / 2.0, margin + h + 36.0);
    let _ = writeln!(
        s,
        r#"<text transform="translate({:.1},{:.1}) rotate(-90)" text-anchor="middle">normalized distance d̂</text>"#,
        margin - 40.0,
        margin + h / 2.0
    );
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">reward {lo:.3} … {hi:.3}</text>"#, margin + w, margin - 8.0);
    s.push_str("</svg>\n");
    s
}

/// Top-down (x–y) view: bounds, spawn, each gate as a line across its
/// opening with its normal, and the goal.
pub fn course_map(course: &CourseSpec, title: &str) -> String {
    let (min, max) = (course.bounds.min, course.bounds.max);
    let scale = 720.0 / (max.x - min.x).max(max.y - min.y);
    let margin = 40.0;
    let (w, h) = ((max.x - min.x) * scale, (max.y - min.y) * scale);
    // y grows upwards in the world, downwards in SVG
    let px = |x: f64| margin + (x - min.x) * scale;
    let py = |y: f64| margin + (max.y - y) * scale;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" font-family="sans-serif" font-size="12">"#,
        w + 2.0 * margin,
        h + 2.0 * margin
    );
    let _ = writeln!(s, r#"<text x="{margin}" y="24" font-size="14">{title}</text>"#);
    let _ = writeln!(s, r##"<rect x="{margin}" y="{margin}" width="{w:.2}" height="{h:.2}" fill="#f7f7f7" stroke="#999"/>"##);
    let _ = writeln!(s, r##"<circle cx="{:.2}" cy="{:.2}" r="5" fill="#2a7"/>"##, px(SPAWN.x), py(SPAWN.y));
    for g in &course.gates {
        let n = g.normal();
        let (tx, ty) = (-n.y * g.radius(), n.x * g.radius());
        let (cx, cy) = (g.center.x, g.center.y);
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#c33" stroke-width="4"/>"##,
            px(cx - tx),
            py(cy - ty),
            px(cx + tx),
            py(cy + ty)
        );
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#c33" stroke-dasharray="3 2"/>"##,
            px(cx),
            py(cy),
            px(cx + 0.4 * n.x),
            py(cy + 0.4 * n.y)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{} (z {:.2})</text>"#,
            px(cx),
            py(cy) - 12.0,
            g.index + 1,
            g.center.z
        );
    }
    let _ = writeln!(s, r##"<circle cx="{:.2}" cy="{:.2}" r="7" fill="none" stroke="#36c" stroke-width="2"/>"##, px(course.goal.x), py(course.goal.y));
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">goal</text>"#, px(course.goal.x) + 10.0, py(course.goal.y) + 4.0);
    s.push_str("</svg>\n");
    s
}
