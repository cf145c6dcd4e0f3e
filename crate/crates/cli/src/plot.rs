//! Static SVG scatter plots of metric scores against mean ratings.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use simpeval_core::corpus::Dimension;
use simpeval_core::stats::{pearson, PairedSeries, ScoreTable};
use simpeval_core::{DimensionMeans, Metric};

const WIDTH: f64 = 420.0;
const HEIGHT: f64 = 320.0;
const MARGIN: f64 = 48.0;

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

pub fn scatter_svg(title: &str, x_label: &str, y_label: &str, points: &[(f64, f64)]) -> String {
    let (x0, x1) = range(points.iter().map(|p| p.0));
    let (y0, y1) = range(points.iter().map(|p| p.1));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        svg,
        r#"<path d="M{left} {top} L{left} {bottom} L{right} {bottom}" stroke="black" fill="none"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{left}" y="{}" text-anchor="middle">{x0:.3}</text>"#,
        bottom + 14.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{right}" y="{}" text-anchor="middle">{x1:.3}</text>"#,
        bottom + 14.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{bottom}" text-anchor="end">{y0:.2}</text>"#,
        left - 4.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="end">{y1:.2}</text>"#,
        left - 4.0,
        top + 4.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    for &(x, y) in points {
        let _ = writeln!(
            svg,
            r##"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="#1f77b4" fill-opacity="0.7"/>"##,
            sx(x),
            sy(y)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// One plot per (metric, dimension) cell with at least one point. Returns
/// the number of files written.
pub fn write_plots(dir: &Path, means: &[DimensionMeans], scores: &ScoreTable) -> io::Result<usize> {
    fs::create_dir_all(dir)?;
    let mut metrics: Vec<Metric> = scores.values().flat_map(|m| m.keys().copied()).collect();
    metrics.sort();
    metrics.dedup();
    let mut sorted: Vec<&DimensionMeans> = means.iter().collect();
    sorted.sort_by(|a, b| a.instance_id.cmp(&b.instance_id));

    let mut written = 0;
    for metric in metrics {
        for dim in Dimension::ALL {
            let points: Vec<(f64, f64)> = sorted
                .iter()
                .filter_map(|m| {
                    let x = scores.get(&m.instance_id)?.get(&metric)?;
                    Some((*x, m.get(dim)?))
                })
                .collect();
            if points.is_empty() {
                continue;
            }
            let title = match pearson(&PairedSeries::new(
                metric.as_str(),
                dim.as_str(),
                points.clone(),
            )) {
                Ok(c) => format!(
                    "{} vs {} (r = {:.3}, n = {})",
                    metric.display_name(),
                    dim.display_name(),
                    c.r,
                    c.n
                ),
                Err(_) => format!(
                    "{} vs {} (n = {})",
                    metric.display_name(),
                    dim.display_name(),
                    points.len()
                ),
            };
            let svg = scatter_svg(&title, metric.display_name(), dim.display_name(), &points);
            fs::write(
                dir.join(format!("{}_{}.svg", metric.as_str(), dim.as_str())),
                svg,
            )?;
            written += 1;
        }
    }
    Ok(written)
}
