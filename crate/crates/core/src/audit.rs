//! Growth-slope fitting for the counting audits.

use std::collections::BTreeMap;

/// Least-squares slope of `ln y` against `ln x`, ignoring non-positive points.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|&(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Slope of the upper envelope: points sharing an `x` collapse to their
/// largest `y`. Needs at least `min_sizes` distinct positive `x` values.
pub fn envelope_slope(points: &[(f64, f64)], min_sizes: usize) -> Option<f64> {
    let mut env: BTreeMap<u64, f64> = BTreeMap::new();
    for &(x, y) in points {
        if x > 0.0 && y > 0.0 {
            let e = env.entry(x.to_bits()).or_insert(y);
            *e = e.max(y);
        }
    }
    if env.len() < min_sizes {
        return None;
    }
    let pts: Vec<(f64, f64)> = env.into_iter().map(|(x, y)| (f64::from_bits(x), y)).collect();
    log_log_slope(&pts)
}
