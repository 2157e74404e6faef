use std::collections::BTreeMap;
use std::path::Path;

use plotters::prelude::*;
use serde::{Deserialize, Serialize};

use crate::BenchError;

/// One measured cell: a query run in one mode at one input size.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub query: String,
    pub mode: String,
    pub size: usize,
    /// Median over the repeated runs.
    pub wall_clock_ms: f64,
    pub fetch_count: u64,
    pub api_call_count: u64,
    pub result_count: usize,
    pub expected: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub accuracy: Option<f64>,
    pub f1: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

/// Median of `values`; the mean of the middle pair for even lengths.
pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    }
}

impl BenchReport {
    pub fn find(&self, query: &str, mode: &str, size: usize) -> Option<&BenchRow> {
        self.rows
            .iter()
            .find(|r| r.query == query && r.mode == mode && r.size == size)
    }

    pub fn errors(&self) -> impl Iterator<Item = &BenchRow> {
        self.rows.iter().filter(|r| r.error.is_some())
    }

    pub fn to_csv(&self) -> Result<String, BenchError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8_lossy(&bytes).into_owned())
    }

    pub fn from_csv(text: &str) -> Result<Self, BenchError> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let rows = r.deserialize().collect::<Result<Vec<BenchRow>, _>>()?;
        Ok(Self { rows })
    }

    pub fn to_json(&self) -> Result<String, BenchError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Log-log plot of median time against size, one line per query and mode.
    pub fn write_svg(&self, path: &Path, title: &str) -> Result<(), BenchError> {
        let mut series: BTreeMap<(String, String), Vec<(f64, f64)>> = BTreeMap::new();
        for r in self.rows.iter().filter(|r| r.error.is_none() && r.size > 0) {
            series
                .entry((r.query.clone(), r.mode.clone()))
                .or_default()
                .push((r.size as f64, r.wall_clock_ms.max(1e-3)));
        }
        let points = series.values().flatten();
        let (mut x_max, mut y_min, mut y_max) = (10.0f64, f64::MAX, 1.0f64);
        for &(x, y) in points {
            x_max = x_max.max(x);
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
        if y_min == f64::MAX {
            y_min = 1e-3;
        }
        let plot = |e: &dyn std::fmt::Display| BenchError::Plot(e.to_string());

        let root = SVGBackend::new(path, (800, 560)).into_drawing_area();
        root.fill(&WHITE).map_err(|e| plot(&e))?;
        let mut chart = ChartBuilder::on(&root)
            .caption(title, ("sans-serif", 22))
            .margin(16)
            .x_label_area_size(40)
            .y_label_area_size(60)
            .build_cartesian_2d(
                (1.0f64..x_max * 2.0).log_scale(),
                (y_min / 2.0..y_max * 2.0).log_scale(),
            )
            .map_err(|e| plot(&e))?;
        chart
            .configure_mesh()
            .x_desc("rows")
            .y_desc("median ms")
            .draw()
            .map_err(|e| plot(&e))?;
        for (i, ((query, mode), mut pts)) in series.into_iter().enumerate() {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let color = Palette99::pick(i).to_rgba();
            chart
                .draw_series(LineSeries::new(pts.clone(), color.stroke_width(2)))
                .map_err(|e| plot(&e))?
                .label(format!("{query} {mode}"))
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color));
            chart
                .draw_series(pts.into_iter().map(|p| Circle::new(p, 3, color.filled())))
                .map_err(|e| plot(&e))?;
        }
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()
            .map_err(|e| plot(&e))?;
        root.present().map_err(|e| plot(&e))?;
        Ok(())
    }
}
