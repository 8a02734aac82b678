//! Frequency sweeps of an [`Inductor`] and their CSV export.

use std::io::Write;

use crate::em_model::{Inductor, OperatingPoint, PerformancePoint};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};

pub const SWEEP_CSV_HEADER: &str =
    "f_hz,l_h,r_winding_ohm,r_core_ohm,q,p_eddy_w,p_hys_w,p_cu_w,efficiency";

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSeries {
    pub points: Vec<(f64, PerformancePoint)>,
}

/// Logarithmic grid from `f_start` with `points_per_decade` points per decade,
/// ending at `f_stop` (appended if it falls between grid points).
pub fn log_grid(f_start: f64, f_stop: f64, points_per_decade: u32) -> Result<Vec<f64>> {
    if !(f_start.is_finite() && f_start > 0.0) {
        return Err(Error::InvalidGrid(format!("f_start must be > 0, got {f_start}")));
    }
    if !(f_stop.is_finite() && f_stop >= f_start) {
        return Err(Error::InvalidGrid(format!(
            "f_stop ({f_stop}) must be >= f_start ({f_start})"
        )));
    }
    if points_per_decade == 0 {
        return Err(Error::InvalidGrid("points per decade must be >= 1".into()));
    }
    let ppd = points_per_decade as f64;
    let steps = ((f_stop / f_start).log10() * ppd + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=steps)
        .map(|i| f_start * 10f64.powf(i as f64 / ppd))
        .collect();
    let last = *grid.last().expect("at least one point");
    if (last - f_stop).abs() <= 1e-9 * f_stop {
        *grid.last_mut().unwrap() = f_stop;
    } else if last < f_stop {
        grid.push(f_stop);
    }
    Ok(grid)
}

pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("grid is empty".into()));
    }
    for (i, &f) in grid.iter().enumerate() {
        if !(f.is_finite() && f > 0.0) {
            return Err(Error::InvalidGrid(format!("point {i} is not a positive frequency: {f}")));
        }
        if i > 0 && f <= grid[i - 1] {
            return Err(Error::InvalidGrid(format!(
                "frequencies must be strictly increasing ({} then {f})",
                grid[i - 1]
            )));
        }
    }
    Ok(())
}

/// Evaluates the inductor at every grid frequency using `template` for the
/// drive current, waveform factor and flux density. Output order follows the
/// grid irrespective of the execution strategy.
pub fn frequency_sweep(
    inductor: &Inductor,
    template: &OperatingPoint,
    grid: &[f64],
    exec: Execution,
) -> Result<SweepSeries> {
    validate_grid(grid)?;
    let results = exec::map_indexed(exec, grid.len(), |i| {
        let f = grid[i];
        inductor
            .performance(&template.at(f))
            .map(|p| (f, p))
            .map_err(|e| Error::AtFrequency {
                f_hz: f,
                source: Box::new(e),
            })
    });
    let points = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SweepSeries { points })
}

impl SweepSeries {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|(f, _)| *f)
    }

    /// Frequency and value of the largest Q in the series.
    pub fn q_peak(&self) -> Option<(f64, f64)> {
        self.points
            .iter()
            .map(|(f, p)| (*f, p.q))
            .fold(None, |best, (f, q)| match best {
                Some((_, bq)) if bq >= q => best,
                _ => Some((f, q)),
            })
    }

    /// `L(f_last) / L(f_first)`.
    pub fn inductance_retention(&self) -> Option<f64> {
        let first = self.points.first()?.1.l_eff;
        let last = self.points.last()?.1.l_eff;
        Some(last / first)
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "{SWEEP_CSV_HEADER}")?;
        for (f, p) in &self.points {
            writeln!(
                out,
                "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                f,
                p.l_eff,
                p.r_winding_ac,
                p.r_core,
                p.q,
                p.losses.p_eddy,
                p.losses.p_hys,
                p.losses.p_cu,
                p.efficiency
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decade_grid_structure() {
        let g = log_grid(1e3, 10e6, 20).unwrap();
        assert_eq!(g.len(), 81);
        assert_eq!(g[0], 1e3);
        assert_eq!(*g.last().unwrap(), 10e6);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        validate_grid(&g).unwrap();
    }

    #[test]
    fn single_point_and_partial_decade() {
        assert_eq!(log_grid(5e5, 5e5, 10).unwrap(), vec![5e5]);
        let g = log_grid(1e3, 5e3, 1).unwrap();
        assert_eq!(g, vec![1e3, 5e3]);
    }

    #[test]
    fn invalid_grids() {
        assert!(log_grid(1e6, 1e3, 10).is_err());
        assert!(log_grid(0.0, 1e3, 10).is_err());
        assert!(log_grid(1e3, 1e4, 0).is_err());
        assert!(validate_grid(&[]).is_err());
        assert!(validate_grid(&[1e3, 1e3]).is_err());
        assert!(validate_grid(&[2e3, 1e3]).is_err());
        assert!(validate_grid(&[-1.0]).is_err());
    }
}
