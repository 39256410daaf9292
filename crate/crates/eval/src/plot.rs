//! SVG line charts of a sweep.

use std::path::Path;

use plotters::prelude::*;

use crate::error::{EvalError, Result};
use crate::report::ReductionRow;
use crate::workflow::MetricsRow;

type Series<'a> = (&'a str, RGBColor, Vec<(f64, f64)>);

fn line_chart(path: &Path, title: &str, y_max: f64, series: &[Series<'_>]) -> Result<()> {
    let err = |e: &dyn std::fmt::Display| EvalError::Plot(e.to_string());
    let xs = series.iter().flat_map(|s| s.2.iter().map(|p| p.0));
    let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| {
        (l.min(x), h.max(x))
    });
    if !lo.is_finite() {
        return Err(EvalError::Plot("no data".into()));
    }
    let root = SVGBackend::new(path, (720, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| err(&e))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(48)
        .build_cartesian_2d(lo..hi.max(lo + 1.0), 0.0..y_max)
        .map_err(|e| err(&e))?;
    chart
        .configure_mesh()
        .x_desc("number of SCDs")
        .draw()
        .map_err(|e| err(&e))?;
    for (name, color, points) in series {
        let color = *color;
        chart
            .draw_series(LineSeries::new(points.clone(), color.stroke_width(2)))
            .map_err(|e| err(&e))?
            .label(*name)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| err(&e))?;
    root.present().map_err(|e| err(&e))?;
    Ok(())
}

/// Writes `avg_distance.svg`, `proportion.svg` and `reduction.svg`.
pub fn plot_sweep(dir: &Path, metrics: &[MetricsRow], reduction: &[ReductionRow]) -> Result<()> {
    let pts = |f: fn(&MetricsRow) -> f64| {
        metrics
            .iter()
            .map(|m| (m.k as f64, f(m)))
            .collect::<Vec<_>>()
    };
    line_chart(
        &dir.join("avg_distance.svg"),
        "average distance of differing rows",
        1.0,
        &[
            ("faulty / baseline", MAGENTA, pts(|m| m.avg_fb)),
            ("faulty / refreshed", RED, pts(|m| m.avg_fr)),
            ("refreshed / baseline", BLUE, pts(|m| m.avg_rb)),
        ],
    )?;
    line_chart(
        &dir.join("proportion.svg"),
        "proportion of differing rows",
        1.0,
        &[
            ("faulty / baseline", MAGENTA, pts(|m| m.pd_fb)),
            ("faulty / refreshed", RED, pts(|m| m.pd_fr)),
            ("refreshed / baseline", BLUE, pts(|m| m.pd_rb)),
        ],
    )?;
    let red: Vec<(f64, f64)> = reduction
        .iter()
        .map(|r| (r.k as f64, r.reduction))
        .collect();
    let top = red.iter().map(|p| p.1.abs()).fold(0.0, f64::max).max(0.05) * 1.2;
    line_chart(
        &dir.join("reduction.svg"),
        "reduction of average distance",
        top,
        &[("faulty/baseline minus refreshed/baseline", GREEN, red)],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_svgs() {
        let dir = tempfile::tempdir().unwrap();
        let m = [
            MetricsRow {
                k: 5,
                pd_fb: 0.2,
                pd_fr: 0.3,
                pd_rb: 0.4,
                avg_fb: 0.5,
                avg_fr: 0.4,
                avg_rb: 0.3,
            },
            MetricsRow {
                k: 10,
                pd_fb: 0.1,
                pd_fr: 0.2,
                pd_rb: 0.3,
                avg_fb: 0.4,
                avg_fr: 0.3,
                avg_rb: 0.2,
            },
        ];
        let r: Vec<ReductionRow> = m.iter().map(ReductionRow::from).collect();
        plot_sweep(dir.path(), &m, &r).unwrap();
        for f in ["avg_distance.svg", "proportion.svg", "reduction.svg"] {
            let s = std::fs::read_to_string(dir.path().join(f)).unwrap();
            assert!(s.contains("<svg") && s.contains("polyline"), "{f}");
        }
    }
}
