//! Grid search for the contextual model's delay exponent and window.

use serde::Serialize;

use super::{ContextualEventModel, Generator, Setting};
use crate::coincidence::{
    estimate_correlation, match_coincidences, max_deviation, standard_delta_grid, CoincidenceWindow, ScanPoint,
};
use crate::quantum::singlet_correlation;
use crate::{seed, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationCell {
    pub exponent: f64,
    pub window: CoincidenceWindow,
    /// Max over the 13-point grid of `|ê(Δ) + cos Δ|`.
    pub max_deviation: f64,
    pub mean_match_fraction: f64,
    pub points: Vec<ScanPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub n_pairs: u64,
    pub cells: Vec<CalibrationCell>,
    /// Index into `cells` of the smallest max deviation.
    pub best: usize,
}

impl CalibrationReport {
    pub fn best_cell(&self) -> &CalibrationCell {
        &self.cells[self.best]
    }

    pub fn cell(&self, exponent: f64, window: CoincidenceWindow) -> Option<&CalibrationCell> {
        self.cells.iter().find(|c| c.exponent == exponent && c.window == window)
    }
}

/// Scan every `(exponent, window)` cell over the standard Δ grid. Each cell
/// equals a `correlation_scan` with the same seed.
///
/// All cells reuse the same per-point seeds, so differences between cells
/// reflect the parameters rather than sampling noise. Ties keep the earlier
/// cell in row-major order.
pub fn calibrate_contextual(
    base: &ContextualEventModel,
    exponents: &[f64],
    windows: &[CoincidenceWindow],
    n_pairs: u64,
    seed: u64,
) -> Result<CalibrationReport> {
    if exponents.is_empty() || windows.is_empty() {
        return Err(Error::InvalidParameter("calibration grids must be nonempty".into()));
    }
    let grid = standard_delta_grid();
    let b = Setting::new("b", 0.0)?;
    let mut cells = Vec::with_capacity(exponents.len() * windows.len());
    for &d in exponents {
        let generator = Generator::Contextual(base.with_exponent(d)?);
        // one event set per grid point, shared by every window of this row
        let mut rows: Vec<Vec<ScanPoint>> = vec![Vec::with_capacity(grid.len()); windows.len()];
        for (k, &delta) in grid.iter().enumerate() {
            let a = Setting::new("a", delta)?;
            let (sa, sb) = generator.sample(&a, &b, n_pairs, seed::derive(seed, &[k as u64]))?;
            for (row, &w) in rows.iter_mut().zip(windows) {
                let estimate = estimate_correlation(&match_coincidences(&sa, &sb, w)?)?;
                row.push(ScanPoint {
                    delta,
                    estimate,
                    match_fraction: estimate.n_matched as f64 / n_pairs as f64,
                    singlet: singlet_correlation(a.angle, b.angle),
                });
            }
        }
        for (points, &w) in rows.into_iter().zip(windows) {
            cells.push(CalibrationCell {
                exponent: d,
                window: w,
                max_deviation: max_deviation(&points),
                mean_match_fraction: points.iter().map(|p| p.match_fraction).sum::<f64>() / points.len() as f64,
                points,
            });
        }
    }
    let best = (0..cells.len())
        .min_by(|&i, &j| {
            cells[i]
                .max_deviation
                .total_cmp(&cells[j].max_deviation)
                .then(i.cmp(&j))
        })
        .expect("nonempty grid");
    Ok(CalibrationReport { n_pairs, cells, best })
}
