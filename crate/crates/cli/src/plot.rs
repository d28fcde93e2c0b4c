//! Static SVG plots of overlaid curves.

use std::path::Path;

use plotters::prelude::*;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// P_D against P_FA.
    Roc,
    /// P_D against per-band SNR in dB.
    Snr,
}

impl std::str::FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "roc" => Ok(Axis::Roc),
            "snr" => Ok(Axis::Snr),
            other => Err(format!("unknown axis `{other}` (expected roc or snr)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

fn plot_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Io(std::io::Error::other(format!("plot: {e}")))
}

pub fn write_svg(path: &Path, title: &str, axis: Axis, series: &[Series]) -> Result<(), CliError> {
    let (x_range, x_desc) = match axis {
        Axis::Roc => (0.0..1.0, "P_FA"),
        Axis::Snr => {
            let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).filter(|x| x.is_finite());
            let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
            let (lo, hi) = if lo < hi { (lo, hi) } else { (-10.0, 10.0) };
            (lo..hi, "SNR (dB)")
        }
    };

    let root = SVGBackend::new(path, (900, 650)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(15)
        .x_label_area_size(45)
        .y_label_area_size(55)
        .build_cartesian_2d(x_range, 0.0..1.0)
        .map_err(plot_err)?;
    chart.configure_mesh().x_desc(x_desc).y_desc("P_D").draw().map_err(plot_err)?;

    for (i, s) in series.iter().enumerate() {
        let color = Palette99::pick(i).to_rgba();
        let style = ShapeStyle::from(&color).stroke_width(2);
        let pts: Vec<(f64, f64)> = s.points.iter().copied().filter(|p| p.0.is_finite()).collect();
        let anno = if s.dashed {
            chart
                .draw_series(DashedLineSeries::new(pts, 6, 4, style))
                .map_err(plot_err)?
        } else {
            chart.draw_series(LineSeries::new(pts, style)).map_err(plot_err)?
        };
        anno.label(s.label.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
    }
    chart
        .configure_series_labels()
        .position(SeriesLabelPosition::LowerRight)
        .background_style(WHITE.mix(0.85))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}
