use std::path::Path;

use plotters::prelude::*;

use crate::config::PlotKind;
use crate::error::{CliError, Result};
use crate::output::read_csv;
use crate::sweep::COLUMNS;

type Series = (String, Vec<(f64, f64)>);

fn column(name: &str) -> usize {
    COLUMNS.iter().position(|c| *c == name).expect("known column")
}

/// Collects `(value, column)` curves per nonlinearity, skipping `NA` cells.
fn series(records: &[csv::StringRecord], columns: &[&str]) -> Result<Vec<Series>> {
    let mut gs: Vec<String> = Vec::new();
    for r in records {
        let g = r[column("g")].to_string();
        if !gs.contains(&g) {
            gs.push(g);
        }
    }
    let parse = |cell: &str, what: &str| -> Result<Option<f64>> {
        if cell == "NA" {
            return Ok(None);
        }
        cell.parse::<f64>()
            .map(Some)
            .map_err(|_| CliError::Plot(format!("malformed {what} cell `{cell}`")))
    };
    let mut out = Vec::new();
    for g in &gs {
        for c in columns {
            let mut pts = Vec::new();
            for r in records.iter().filter(|r| &r[column("g")] == g) {
                let x = parse(&r[column("value")], "value")?.ok_or_else(|| CliError::Plot("NA sweep value".into()))?;
                if let Some(y) = parse(&r[column(c)], c)? {
                    pts.push((x, y));
                }
            }
            if !pts.is_empty() {
                let name = if gs.len() > 1 { format!("{c} ({g})") } else { c.to_string() };
                out.push((name, pts));
            }
        }
    }
    Ok(out)
}

/// Renders gain or capacity curves from a sweep CSV to an SVG file.
pub fn emit_plot(csv_text: &str, kind: PlotKind, path: &Path) -> Result<()> {
    let records = read_csv(csv_text)?;
    if records.is_empty() {
        return Err(CliError::Plot("no rows to plot".into()));
    }
    let (columns, y_label): (&[&str], &str) = match kind {
        PlotKind::Gains => (&["k_y", "k_x", "k_n"], "regression gain"),
        PlotKind::Capacity => (&["c_snr_x", "c_snr_y", "c_mse", "c_awgn", "mi_histogram"], "bits per use"),
        PlotKind::None => return Err(CliError::Usage("plot kind `none` draws nothing".into())),
    };
    let curves = series(&records, columns)?;
    if curves.is_empty() {
        return Err(CliError::Plot("every plotted cell is NA".into()));
    }
    let x_label = records[0][column("variable")].to_string();
    let pts = curves.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for (x, y) in pts {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    let pad = |a: f64, b: f64| {
        let w = (b - a).abs().max(1e-9 * a.abs().max(1.0));
        (a - 0.05 * w, b + 0.05 * w)
    };
    let (x0, x1) = pad(x0, x1);
    let (y0, y1) = pad(y0, y1);

    let root = SVGBackend::new(path, (900, 600)).into_drawing_area();
    let draw = |e: DrawingAreaErrorKind<_>| CliError::Plot(e.to_string());
    root.fill(&WHITE).map_err(draw)?;
    let mut chart = ChartBuilder::on(&root)
        .margin(20)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(draw)?;
    chart
        .configure_mesh()
        .x_desc(x_label)
        .y_desc(y_label)
        .draw()
        .map_err(draw)?;
    for (i, (name, p)) in curves.iter().enumerate() {
        let color = Palette99::pick(i).to_rgba();
        chart
            .draw_series(LineSeries::new(p.iter().copied(), color.stroke_width(2)))
            .map_err(draw)?
            .label(name.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
        chart
            .draw_series(p.iter().map(|(x, y)| Circle::new((*x, *y), 3, color.filled())))
            .map_err(draw)?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(draw)?;
    root.present().map_err(draw)?;
    Ok(())
}
