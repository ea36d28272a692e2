//! Transparency-window detection and trend analysis on absorption spectra.
//!
//! A transparency window is a contiguous run of grid points whose Im chi
//! falls below a fraction of the background absorption (the median of
//! Im chi over the grid). Edges are refined by linear interpolation to the
//! threshold crossing, so widths do not quantize to the grid step. Runs
//! touching the grid boundary are rejected: their extent is not measurable.
//! Runs resolved by fewer than five points are reported as a grid-too-coarse
//! error rather than silently measured.
//!
//! Grids with interior holes wider than three times the median spacing
//! split runs at the hole (the edge defaults to the hole midpoint); windows
//! straddling such holes are therefore reported per side. The bundled
//! analysis grids are hole-free.
//!
//! All positions and widths are reported in Gamma units.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math;
use crate::susceptibility::Spectrum;

/// Default window threshold: Im chi below this fraction of background.
pub const DEFAULT_THRESHOLD_FRACTION: f64 = 0.1;

/// Default relative spread below which a trend series counts as constant.
pub const DEFAULT_TREND_TOLERANCE: f64 = 0.02;

/// One detected transparency window, Gamma units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    /// Midpoint of the two threshold crossings.
    pub center: f64,
    /// Distance between the threshold crossings.
    pub width: f64,
    /// Residual absorption at the window minimum relative to background;
    /// 0 means perfect transparency, values near 1 a shallow dip.
    pub depth: f64,
    pub left_edge: f64,
    pub right_edge: f64,
}

/// Windows plus anomalous-dispersion intervals for one spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub windows: Vec<Window>,
    /// Intervals (Gamma units) where d(Re chi)/d omega < 0.
    pub anomalous_intervals: Vec<(f64, f64)>,
    /// Median Im chi over the grid.
    pub background: f64,
    pub threshold_fraction: f64,
}

/// Window-detection failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("spectrum has fewer than 2 points")]
    NoData,
    #[error("threshold fraction must be in (0, 1), got {0}")]
    BadThreshold(f64),
    #[error("window candidate near omega = {at_omega_over_gamma} Gamma resolved by only {points} grid points; refine the grid")]
    TooCoarse {
        points: usize,
        at_omega_over_gamma: f64,
    },
    #[error("background absorption is not positive ({0}); windows are undefined")]
    NonPositiveBackground(f64),
}

fn anomalous_intervals(xs: &[f64], re: &[f64]) -> Vec<(f64, f64)> {
    let n = xs.len();
    let mut negative: Vec<bool> = Vec::with_capacity(n);
    for i in 0..n {
        let (lo, hi) = if i == 0 {
            (0, 1)
        } else if i == n - 1 {
            (n - 2, n - 1)
        } else {
            (i - 1, i + 1)
        };
        negative.push((re[hi] - re[lo]) / (xs[hi] - xs[lo]) < 0.0);
    }
    // Collect negative-slope runs, merging runs separated by fewer than
    // three positive points (derivative noise at window centers).
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut start: Option<usize> = None;
    for i in 0..n {
        match (negative[i], start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, n - 1));
    }
    let mut merged: Vec<(usize, usize)> = Vec::new();
    for run in runs {
        match merged.last_mut() {
            Some(last) if run.0 - last.1 < 3 => last.1 = run.1,
            _ => merged.push(run),
        }
    }
    merged.iter().map(|&(a, b)| (xs[a], xs[b])).collect()
}

/// Detects transparency windows in the absorption spectrum.
pub fn find_windows(
    spectrum: &Spectrum,
    threshold_fraction: f64,
) -> Result<WindowReport, AnalysisError> {
    if !(threshold_fraction > 0.0 && threshold_fraction < 1.0) {
        return Err(AnalysisError::BadThreshold(threshold_fraction));
    }
    let xs = &spectrum.grid.omega_over_gamma;
    let im = spectrum.im_chi();
    let n = xs.len();
    if n < 2 {
        return Err(AnalysisError::NoData);
    }
    let background = math::median(&im);
    if !(background > 0.0) {
        return Err(AnalysisError::NonPositiveBackground(background));
    }
    let threshold = threshold_fraction * background;

    let spacings: Vec<f64> = xs.windows(2).map(|p| p[1] - p[0]).collect();
    let gap_limit = 3.0 * math::median(&spacings);

    // Below-threshold runs, split at grid holes.
    let mut runs: Vec<(usize, usize, bool, bool)> = Vec::new(); // (i0, i1, split_l, split_r)
    let mut start: Option<usize> = None;
    let mut split_left = false;
    for i in 0..n {
        let below = im[i] < threshold;
        if below {
            if let Some(s) = start {
                if xs[i] - xs[i - 1] > gap_limit {
                    runs.push((s, i - 1, split_left, true));
                    start = Some(i);
                    split_left = true;
                }
            } else {
                start = Some(i);
                split_left = false;
            }
        } else if let Some(s) = start {
            runs.push((s, i - 1, split_left, false));
            start = None;
        }
    }
    if let Some(s) = start {
        runs.push((s, n - 1, split_left, false));
    }

    let mut windows: Vec<Window> = Vec::new();
    for &(i0, i1, split_l, split_r) in &runs {
        // Boundary-touching runs are unmeasurable (no crossing on one side).
        if (i0 == 0 && !split_l) || (i1 == n - 1 && !split_r) {
            continue;
        }
        let points = i1 - i0 + 1;
        if points < 5 {
            return Err(AnalysisError::TooCoarse {
                points,
                at_omega_over_gamma: 0.5 * (xs[i0] + xs[i1]),
            });
        }
        let left_edge = if split_l {
            0.5 * (xs[i0 - 1] + xs[i0])
        } else {
            let (x0, x1, y0, y1) = (xs[i0 - 1], xs[i0], im[i0 - 1], im[i0]);
            x0 + (threshold - y0) * (x1 - x0) / (y1 - y0)
        };
        let right_edge = if split_r {
            0.5 * (xs[i1] + xs[i1 + 1])
        } else {
            let (x0, x1, y0, y1) = (xs[i1], xs[i1 + 1], im[i1], im[i1 + 1]);
            x0 + (threshold - y0) * (x1 - x0) / (y1 - y0)
        };
        let mut min_im = im[i0];
        for &v in &im[i0..=i1] {
            min_im = min_im.min(v);
        }
        windows.push(Window {
            center: 0.5 * (left_edge + right_edge),
            width: right_edge - left_edge,
            depth: min_im.max(0.0) / background,
            left_edge,
            right_edge,
        });
    }

    Ok(WindowReport {
        windows,
        anomalous_intervals: anomalous_intervals(xs, &spectrum.re_chi()),
        background,
        threshold_fraction,
    })
}

/// Verdict for one observable across a parameter ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendVerdict {
    /// Spread at or below the tolerance times the reference scale.
    Constant,
    /// Strictly increasing beyond the constant tolerance.
    Increasing,
    /// Strictly decreasing beyond the constant tolerance.
    Decreasing,
    /// Neither constant nor monotone.
    Mixed,
    /// Window counts differ across the ladder; per-window observables are
    /// not comparable.
    StructuralChange,
}

/// One observable sequence with its verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSeries {
    pub values: Vec<f64>,
    pub verdict: TrendVerdict,
}

/// Trends of window observables across a ladder of spectra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    pub window_counts: Vec<usize>,
    /// Mean window center per report; constancy judged against the mean
    /// width (centers sit near zero, so a relative spread is meaningless).
    pub position: TrendSeries,
    /// Mean window width per report.
    pub width: TrendSeries,
    /// Mean residual depth per report.
    pub depth: TrendSeries,
    /// |center_2 - center_1| per report; only when every report has
    /// exactly two windows.
    pub separation: Option<TrendSeries>,
}

fn spread(values: &[f64]) -> (f64, f64) {
    let mut lo = values[0];
    let mut hi = values[0];
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

fn verdict_for(values: &[f64], reference: f64, tol: f64) -> TrendVerdict {
    let (lo, hi) = spread(values);
    if hi - lo <= tol * libm::fabs(reference) {
        return TrendVerdict::Constant;
    }
    if values.windows(2).all(|p| p[1] > p[0]) {
        return TrendVerdict::Increasing;
    }
    if values.windows(2).all(|p| p[1] < p[0]) {
        return TrendVerdict::Decreasing;
    }
    TrendVerdict::Mixed
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for v in values {
        sum += v;
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Compares window observables across at least two reports.
///
/// The constant check runs first: a series whose total spread stays within
/// `tol` times its scale is Constant even if the residual drift happens to
/// be monotone. Position constancy is judged against the mean width.
pub fn window_trend(reports: &[WindowReport], tol: f64) -> Result<TrendReport, AnalysisError> {
    if reports.len() < 2 {
        return Err(AnalysisError::NoData);
    }
    let window_counts: Vec<usize> = reports.iter().map(|r| r.windows.len()).collect();
    let counts_match = window_counts.windows(2).all(|p| p[0] == p[1]) && window_counts[0] > 0;

    let positions: Vec<f64> = reports
        .iter()
        .map(|r| mean(r.windows.iter().map(|w| w.center)))
        .collect();
    let widths: Vec<f64> = reports
        .iter()
        .map(|r| mean(r.windows.iter().map(|w| w.width)))
        .collect();
    let depths: Vec<f64> = reports
        .iter()
        .map(|r| mean(r.windows.iter().map(|w| w.depth)))
        .collect();

    let mean_width = mean(widths.iter().copied());
    let series = |values: Vec<f64>, reference: f64| {
        let verdict = if counts_match {
            verdict_for(&values, reference, tol)
        } else {
            TrendVerdict::StructuralChange
        };
        TrendSeries { values, verdict }
    };

    let separation = if counts_match && window_counts[0] == 2 {
        let values: Vec<f64> = reports
            .iter()
            .map(|r| libm::fabs(r.windows[1].center - r.windows[0].center))
            .collect();
        let reference = mean(values.iter().copied());
        Some(series(values, reference))
    } else {
        None
    };

    let depth_ref = mean(depths.iter().copied());
    Ok(TrendReport {
        window_counts,
        position: series(positions, mean_width),
        width: series(widths, mean_width),
        depth: series(depths, depth_ref),
        separation,
    })
}
