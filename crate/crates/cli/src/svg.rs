//! Minimal SVG scatter plot of `log2(lhs/rhs)` against `k`.

use std::fmt::Write as _;

pub struct Plot {
    pub title: String,
    pub ks: Vec<f64>,
    pub ratios: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// Reference slope, drawn through the centroid of the data.
    pub predicted: f64,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render(plot: &Plot) -> String {
    let (k0, k1) = plot.ks.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), k| (a.min(*k), b.max(*k)));
    let (k0, k1) = (k0 - 0.5, k1 + 0.5);
    let kc = plot.ks.iter().sum::<f64>() / plot.ks.len() as f64;
    let yc = plot.ratios.iter().sum::<f64>() / plot.ratios.len() as f64;
    let fitted = |k: f64| plot.intercept + plot.slope * k;
    let reference = |k: f64| yc + plot.predicted * (k - kc);

    let mut ys: Vec<f64> = plot.ratios.clone();
    ys.extend([fitted(k0), fitted(k1), reference(k0), reference(k1)]);
    let (mut y0, mut y1) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(*y), b.max(*y)));
    if y1 - y0 < 0.2 {
        let mid = (y0 + y1) / 2.0;
        y0 = mid - 0.1;
        y1 = mid + 0.1;
    }
    let pad = 0.08 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);

    let px = |k: f64| LEFT + (k - k0) / (k1 - k0) * (W - LEFT - RIGHT);
    let py = |y: f64| TOP + (y1 - y) / (y1 - y0) * (H - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(&plot.title));
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - LEFT - RIGHT,
        H - TOP - BOTTOM
    );
    let kfirst = k0.ceil() as i64;
    let klast = k1.floor() as i64;
    for k in kfirst..=klast {
        let x = px(k as f64);
        let _ = writeln!(s, r#"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/>"#, H - BOTTOM, H - BOTTOM + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{k}</text>"#, H - BOTTOM + 18.0);
    }
    let step = nice_step(y1 - y0);
    let mut y = (y0 / step).ceil() * step;
    while y <= y1 {
        let yy = py(y);
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{yy:.1}" x2="{:.1}" y2="{yy:.1}" stroke="#ddd"/>"##, W - RIGHT);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.3}</text>"#, LEFT - 6.0, yy + 4.0, y);
        y += step;
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">k</text>"#, (LEFT + W - RIGHT) / 2.0, H - 10.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">log2(lhs / rhs)</text>"#,
        (TOP + H - BOTTOM) / 2.0
    );
    let line = |s: &mut String, f: &dyn Fn(f64) -> f64, color: &str, dash: &str| {
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="1.5" stroke-dasharray="{dash}"/>"#,
            px(k0),
            py(f(k0)),
            px(k1),
            py(f(k1))
        );
    };
    line(&mut s, &fitted, "#1f77b4", "none");
    line(&mut s, &reference, "#d62728", "6 4");
    for (k, r) in plot.ks.iter().zip(&plot.ratios) {
        let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="4" fill="black"/>"#, px(*k), py(*r));
    }
    let lx = LEFT + 12.0;
    let _ = writeln!(s, r##"<line x1="{lx}" y1="{0}" x2="{1}" y2="{0}" stroke="#1f77b4" stroke-width="1.5"/>"##, TOP + 14.0, lx + 24.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}">fitted slope {:.4}</text>"#, lx + 30.0, TOP + 18.0, plot.slope);
    let _ = writeln!(
        s,
        r##"<line x1="{lx}" y1="{0}" x2="{1}" y2="{0}" stroke="#d62728" stroke-width="1.5" stroke-dasharray="6 4"/>"##,
        TOP + 32.0,
        lx + 24.0
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}">predicted slope {:.4}</text>"#, lx + 30.0, TOP + 36.0, plot.predicted);
    s.push_str("</svg>\n");
    s
}
