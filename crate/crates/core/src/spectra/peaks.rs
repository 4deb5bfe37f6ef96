use super::sweep::{ProbeSetup, Slice};
use crate::error::{ArmError, Result};

/// Minimum normalized height for a maximum to count as a peak.
pub const PEAK_THRESHOLD: f64 = 0.5;

/// Maxima closer than this many grid steps are merged.
const MERGE_STEPS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// Grid index of the sampled maximum.
    pub index: usize,
    /// Refined center (GHz).
    pub omega: f64,
    /// Refined height in slice-normalized units.
    pub height: f64,
}

/// Vertex of the parabola through three points with distinct abscissae.
///
/// Falls back to the middle point when the parabola is not concave; the
/// vertex is clamped to `[x0, x2]`.
pub fn parabolic_vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let denom = (x[0] - x[1]) * (x[0] - x[2]) * (x[1] - x[2]);
    let a = (x[2] * (y[1] - y[0]) + x[1] * (y[0] - y[2]) + x[0] * (y[2] - y[1])) / denom;
    let b = (x[2] * x[2] * (y[0] - y[1]) + x[1] * x[1] * (y[2] - y[0]) + x[0] * x[0] * (y[1] - y[2])) / denom;
    if !(a < 0.0) || !a.is_finite() {
        return (x[1], y[1]);
    }
    let c = y[0] - a * x[0] * x[0] - b * x[0];
    let xv = (-b / (2.0 * a)).clamp(x[0], x[2]);
    (xv, a * xv * xv + b * xv + c)
}

fn check_slice(slice: &Slice) -> Result<()> {
    let n = slice.len();
    if n < 3 {
        return Err(ArmError::MalformedSlice(format!("need at least 3 grid points, got {n}")));
    }
    if slice.transmission.len() != n {
        return Err(ArmError::MalformedSlice("grid and transmission lengths differ".into()));
    }
    if slice.omega_p.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ArmError::MalformedSlice("probe grid is not strictly increasing".into()));
    }
    if slice.transmission.iter().any(|t| !t.is_finite()) {
        return Err(ArmError::MalformedSlice("non-finite transmission".into()));
    }
    Ok(())
}

/// Indices of sampled local maxima (a plateau counts once, at its left edge).
fn local_maxima(y: &[f64]) -> Vec<usize> {
    let n = y.len();
    (0..n)
        .filter(|&i| (i == 0 || y[i] > y[i - 1]) && (i + 1 == n || y[i] >= y[i + 1]))
        .collect()
}

fn local_step(x: &[f64], i: usize) -> f64 {
    let n = x.len();
    let lo = i.saturating_sub(1);
    let hi = (i + 1).min(n - 1);
    (x[hi] - x[lo]) / (hi - lo) as f64
}

/// Drop the lower of any two peaks closer than the merge distance.
fn merge(mut peaks: Vec<Peak>, x: &[f64]) -> Vec<Peak> {
    peaks.sort_by(|a, b| b.height.total_cmp(&a.height).then(a.index.cmp(&b.index)));
    let mut kept: Vec<Peak> = Vec::new();
    for p in peaks {
        let close = kept
            .iter()
            .any(|k| (k.omega - p.omega).abs() <= MERGE_STEPS * local_step(x, k.index).max(local_step(x, p.index)));
        if !close {
            kept.push(p);
        }
    }
    kept.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    kept
}

/// Peaks of a normalized slice above [`PEAK_THRESHOLD`], refined by
/// three-point parabolic interpolation and sorted by frequency.
pub fn find_peaks(slice: &Slice) -> Result<Vec<Peak>> {
    check_slice(slice)?;
    let (x, y) = (&slice.omega_p, &slice.transmission);
    let n = x.len();
    let peaks = local_maxima(y)
        .into_iter()
        .filter(|&i| y[i] > PEAK_THRESHOLD)
        .map(|i| {
            let (omega, height) = if i == 0 || i + 1 == n {
                (x[i], y[i])
            } else {
                parabolic_vertex([x[i - 1], x[i], x[i + 1]], [y[i - 1], y[i], y[i + 1]])
            };
            Peak { index: i, omega, height }
        })
        .collect();
    Ok(merge(peaks, x))
}

fn separation(peaks: &[Peak]) -> Result<Option<f64>> {
    match peaks.len() {
        0 => Err(ArmError::MalformedSlice("no maximum above half height".into())),
        1 => Ok(None),
        _ => {
            let mut by_height = peaks.to_vec();
            by_height.sort_by(|a, b| b.height.total_cmp(&a.height));
            Ok(Some((by_height[0].omega - by_height[1].omega).abs()))
        }
    }
}

/// Separation of the two strongest peaks, or `None` for a single peak.
pub fn extract_splitting(slice: &Slice) -> Result<Option<f64>> {
    separation(&find_peaks(slice)?)
}

/// Peaks located on the grid of `slice` and then refined against the model
/// itself by golden-section search, so that thresholds and separations do
/// not depend on how well the grid happens to sample narrow lines.
pub fn refined_peaks(setup: &ProbeSetup, slice: &Slice) -> Result<Vec<Peak>> {
    check_slice(slice)?;
    let x = &slice.omega_p;
    let mag: Vec<f64> = slice.amplitude.iter().map(|a| a.norm()).collect();
    let n = x.len();
    let mut raw = Vec::new();
    for i in local_maxima(&mag) {
        let (lo, hi) = (x[i.saturating_sub(1)], x[(i + 1).min(n - 1)]);
        let (omega, height) = setup.refine_peak(lo, hi)?;
        raw.push(Peak { index: i, omega, height });
    }
    let top = raw.iter().map(|p| p.height).fold(0.0, f64::max);
    if !(top > 0.0) {
        return Err(ArmError::MalformedSlice("no response in slice".into()));
    }
    let peaks = raw
        .into_iter()
        .map(|p| Peak {
            height: p.height / top,
            ..p
        })
        .filter(|p| p.height > PEAK_THRESHOLD)
        .collect();
    Ok(merge(peaks, x))
}

/// [`extract_splitting`] on model-refined peaks.
pub fn refined_splitting(setup: &ProbeSetup, slice: &Slice) -> Result<Option<f64>> {
    separation(&refined_peaks(setup, slice)?)
}
