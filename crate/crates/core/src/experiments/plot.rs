use std::fmt::Write as _;

use crate::error::{Error, Result};

/// One series of a grouped bar chart: a pmf over `k = 1..` and the mass
/// above its last entry.
#[derive(Debug, Clone, PartialEq)]
pub struct PmfSeries {
    pub label: String,
    pub pmf: Vec<f64>,
    pub overflow: f64,
}

const PALETTE: [&str; 6] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"];

/// Standalone SVG grouped bar chart of posterior mass by `k`, one colour
/// per series, for `k = 1..=k_max`.
///
/// Every series must be a probability vector (pmf plus overflow summing to
/// one within `1e-6`).
pub fn posterior_svg(series: &[PmfSeries], k_max: usize, title: &str) -> Result<String> {
    if series.is_empty() {
        return Err(Error::domain("nothing to plot"));
    }
    if k_max == 0 {
        return Err(Error::domain("k_max must be at least 1"));
    }
    for s in series {
        let total: f64 = s.pmf.iter().sum::<f64>() + s.overflow;
        if s.pmf.iter().chain([&s.overflow]).any(|p| !(p.is_finite() && *p >= 0.0))
            || (total - 1.0).abs() > 1e-6
        {
            return Err(Error::domain(format!(
                "series '{}' is not a probability vector: mass sums to {total}",
                s.label
            )));
        }
    }

    let (width, height) = (720.0, 420.0);
    let (left, right, top, bottom) = (60.0, 20.0, 50.0, 50.0);
    let plot_w = width - left - right;
    let plot_h = height - top - bottom;
    let ymax = series
        .iter()
        .flat_map(|s| s.pmf.iter().take(k_max))
        .fold(0.0f64, |a, &b| a.max(b));
    // round the axis up to a tenth
    let ymax = ((ymax * 10.0).ceil() / 10.0).max(0.1);
    let group_w = plot_w / k_max as f64;
    let bar_w = 0.8 * group_w / series.len() as f64;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        width / 2.0,
        escape(title)
    );
    // axes and ticks
    let y0 = top + plot_h;
    let _ = writeln!(
        svg,
        r#"<line x1="{left}" y1="{y0}" x2="{}" y2="{y0}" stroke="black"/>"#,
        left + plot_w
    );
    let _ = writeln!(svg, r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{y0}" stroke="black"/>"#);
    for i in 0..=5 {
        let v = ymax * i as f64 / 5.0;
        let y = y0 - plot_h * i as f64 / 5.0;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{v:.2}</text>"#,
            left - 6.0,
            y + 4.0
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{left}" y1="{y:.1}" x2="{}" y2="{y:.1}" stroke="#ddd"/>"##,
            left + plot_w
        );
    }
    for k in 1..=k_max {
        let x = left + group_w * (k as f64 - 0.5);
        let _ = writeln!(
            svg,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{k}</text>"#,
            y0 + 16.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">k</text>"#,
        left + plot_w / 2.0,
        height - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">posterior probability</text>"#,
        top + plot_h / 2.0,
        top + plot_h / 2.0
    );

    for (si, s) in series.iter().enumerate() {
        let colour = PALETTE[si % PALETTE.len()];
        let _ = writeln!(svg, r#"<g class="series" fill="{colour}">"#);
        for (i, &p) in s.pmf.iter().take(k_max).enumerate() {
            if p <= 0.0 {
                continue;
            }
            let h = plot_h * p / ymax;
            let x = left + group_w * i as f64 + 0.1 * group_w + bar_w * si as f64;
            let _ = writeln!(
                svg,
                r#"<rect x="{x:.2}" y="{:.2}" width="{bar_w:.2}" height="{h:.2}"><title>{} k={}: {p:.4}</title></rect>"#,
                y0 - h,
                escape(&s.label),
                i + 1
            );
        }
        let _ = writeln!(svg, "</g>");
        let ly = top + 16.0 * si as f64;
        let lx = left + plot_w - 110.0;
        let _ = writeln!(
            svg,
            r#"<rect class="legend" x="{lx}" y="{}" width="12" height="12" fill="{colour}"/><text x="{}" y="{}">{}</text>"#,
            ly - 10.0,
            lx + 18.0,
            ly,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(label: &str, pmf: Vec<f64>) -> PmfSeries {
        PmfSeries {
            label: label.into(),
            pmf,
            overflow: 0.0,
        }
    }

    #[test]
    fn point_mass_is_one_full_bar() {
        let svg = posterior_svg(&[series("LB", vec![0.0, 0.0, 1.0])], 5, "t").unwrap();
        let bars: Vec<&str> = svg.lines().filter(|l| l.contains("<title>")).collect();
        assert_eq!(bars.len(), 1);
        // full height: axis top at 50, plot height 320
        assert!(bars[0].contains(r#"y="50.00""#) && bars[0].contains(r#"height="320.00""#));
    }

    #[test]
    fn three_legends() {
        let p = vec![0.2, 0.3, 0.5];
        let s = [series("LB", p.clone()), series("UN", p.clone()), series("PO", p)];
        let svg = posterior_svg(&s, 3, "galaxy").unwrap();
        assert_eq!(svg.matches(r#"class="legend""#).count(), 3);
        for l in ["LB", "UN", "PO"] {
            assert!(svg.contains(&format!(">{l}</text>")));
        }
    }

    #[test]
    fn refuses_unnormalised() {
        assert!(posterior_svg(&[series("x", vec![0.5, 0.4])], 2, "t").is_err());
        assert!(posterior_svg(&[series("x", vec![0.5, 0.5 + 2e-6])], 2, "t").is_err());
        assert!(posterior_svg(&[series("x", vec![0.5, 0.5 + 5e-7])], 2, "t").is_ok());
    }
}
