//! Minimal SVG line plots rendered from result tables.

use std::fmt::Write;

use super::output::Table;

const W: f64 = 720.0;
const H: f64 = 440.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 190.0, 30.0, 50.0); // left right top bottom
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn nice_range(lo: f64, hi: f64) -> (f64, f64) {
    if lo == hi {
        return (lo - 1.0, hi + 1.0);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the table's plot spec, or `None` when it has none or no finite
/// data.
pub fn render_svg(table: &Table) -> Option<String> {
    let spec = table.plot.as_ref()?;
    let x = table.numeric(&spec.x)?;
    let series: Vec<(String, Vec<f64>)> = spec
        .ys
        .iter()
        .filter_map(|n| table.numeric(n).map(|v| (n.clone(), v)))
        .collect();
    let finite = |v: &f64| v.is_finite();
    let xs: Vec<f64> = x.iter().copied().filter(finite).collect();
    let ys: Vec<f64> = series.iter().flat_map(|s| s.1.iter().copied().filter(finite)).collect();
    if xs.is_empty() || ys.is_empty() {
        return None;
    }
    let (x0, x1) = nice_range(xs.iter().copied().fold(f64::INFINITY, f64::min), xs.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    let (y0, y1) = nice_range(ys.iter().copied().fold(f64::INFINITY, f64::min), ys.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    let (ml, mr, mt, mb) = MARGIN;
    let pw = W - ml - mr;
    let ph = H - mt - mb;
    let px = |v: f64| ml + (v - x0) / (x1 - x0) * pw;
    let py = |v: f64| mt + (1.0 - (v - y0) / (y1 - y0)) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for i in 0..=5 {
        let fx = x0 + (x1 - x0) * i as f64 / 5.0;
        let fy = y0 + (y1 - y0) * i as f64 / 5.0;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{:.3}</text>"#, px(fx), H - mb + 16.0, fx);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.3}</text>"#, ml - 6.0, py(fy) + 4.0, fy);
        let _ = writeln!(s, r##"<line x1="{ml}" x2="{:.1}" y1="{:.1}" y2="{:.1}" stroke="#ddd"/>"##, ml + pw, py(fy), py(fy));
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, ml + pw / 2.0, H - 10.0, escape(&spec.x));
    let _ = writeln!(s, r#"<text x="16" y="{:.1}" transform="rotate(-90 16 {:.1})" text-anchor="middle">{}</text>"#, mt + ph / 2.0, mt + ph / 2.0, escape(&spec.y_label));
    for (i, (name, v)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut d = String::new();
        let mut pen_up = true;
        for (&xv, &yv) in x.iter().zip(v) {
            if !(xv.is_finite() && yv.is_finite()) {
                pen_up = true;
                continue;
            }
            let _ = write!(d, "{}{:.2},{:.2} ", if pen_up { "M" } else { "L" }, px(xv), py(yv));
            pen_up = false;
        }
        let _ = writeln!(s, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.4"/>"#, d.trim_end());
        let ly = mt + 14.0 * i as f64 + 8.0;
        let _ = writeln!(s, r#"<line x1="{:.1}" x2="{:.1}" y1="{ly:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#, W - mr + 10.0, W - mr + 28.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, W - mr + 32.0, ly + 4.0, escape(name));
    }
    s.push_str("</svg>\n");
    Some(s)
}
