//! SVG swarm plots of SHAP values.

use std::fmt::Write as _;

use psox_core::seed::rng_for;
use rand::Rng as _;

const WIDTH: f64 = 860.0;
const LEFT: f64 = 190.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 50.0;
const BAND: f64 = 44.0;
const LOW: (f64, f64, f64) = (30.0, 136.0, 229.0);
const HIGH: (f64, f64, f64) = (255.0, 13.0, 87.0);

/// One horizontal band: `(shap value, feature value)` per point.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub feature: String,
    pub points: Vec<(f64, f64)>,
}

fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let mix = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(LOW.0, HIGH.0), mix(LOW.1, HIGH.1), mix(LOW.2, HIGH.2))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the bands top to bottom. Point heights are jittered with a
/// generator keyed by `seed`, so the output is reproducible.
pub fn swarm_plot(title: &str, bands: &[Band], seed: u64) -> String {
    let height = TOP + BAND * bands.len() as f64 + 60.0;
    let span =
        bands.iter().flat_map(|b| b.points.iter().map(|p| p.0.abs())).filter(|v| v.is_finite()).fold(0.0f64, f64::max);
    let span = if span > 0.0 { span * 1.05 } else { 1.0 };
    let plot_w = WIDTH - LEFT - RIGHT;
    let sx = |v: f64| LEFT + (v + span) / (2.0 * span) * plot_w;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ =
        writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title));
    let zero = sx(0.0);
    let bottom = TOP + BAND * bands.len() as f64;
    let _ = writeln!(
        s,
        r##"<line x1="{zero:.2}" y1="{TOP}" x2="{zero:.2}" y2="{bottom}" stroke="#999" stroke-width="1"/>"##
    );
    for (bi, band) in bands.iter().enumerate() {
        let cy = TOP + BAND * (bi as f64 + 0.5);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end" dominant-baseline="middle">{}</text>"#,
            LEFT - 10.0,
            cy,
            escape(&band.feature)
        );
        let (lo, hi) = band
            .points
            .iter()
            .map(|p| p.1)
            .filter(|v| v.is_finite())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        let mut rng = rng_for(seed, &[bi as u64]);
        for &(shap, value) in &band.points {
            if !shap.is_finite() {
                continue;
            }
            let t = if hi > lo { (value - lo) / (hi - lo) } else { 0.5 };
            let jitter: f64 = rng.random_range(-0.35..0.35) * BAND;
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}" fill-opacity="0.8"/>"#,
                sx(shap),
                cy + jitter,
                ramp(t)
            );
        }
    }
    let axis_y = bottom + 20.0;
    for v in [-span, 0.0, span] {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{axis_y}" text-anchor="middle">{:.3e}</text>"#, sx(v), v);
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{}" text-anchor="middle">SHAP value</text>"#,
        LEFT + plot_w / 2.0,
        axis_y + 18.0
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" fill="{}">low</text>"#, WIDTH - RIGHT - 70.0, TOP - 10.0, ramp(0.0));
    let _ = writeln!(s, r#"<text x="{}" y="{}" fill="{}">high</text>"#, WIDTH - RIGHT - 35.0, TOP - 10.0, ramp(1.0));
    s.push_str("</svg>\n");
    s
}
