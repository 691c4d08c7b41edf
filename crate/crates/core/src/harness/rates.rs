use serde::Serialize;

use crate::trace::SolverTrace;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateReport {
    pub slope: f64,
    pub theory_slope: Option<f64>,
    pub bound_violations: Option<u64>,
    pub window: (u64, u64),
}

/// Least-squares slope of `ln gap` against `ln k` over `k ∈ [k_min, k_max]`.
///
/// The window is cut at the first non-positive gap.
pub fn fit_rate(trace: &SolverTrace, window: (u64, u64)) -> Result<RateReport> {
    let (lo, hi) = window;
    let mut pts = Vec::new();
    for (i, row) in trace.rows.iter().enumerate() {
        if row.k < lo.max(1) || row.k > hi {
            continue;
        }
        match trace.fit_gap(i) {
            Some(g) if g > 0.0 && g.is_finite() => pts.push(((row.k as f64).ln(), g.ln(), row.k)),
            _ => break,
        }
    }
    if pts.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "no positive gaps to fit in window [{lo}, {hi}]"
        )));
    }
    let used = (pts[0].2, pts[pts.len() - 1].2);
    let xy: Vec<(f64, f64)> = pts.iter().map(|p| (p.0, p.1)).collect();
    Ok(RateReport {
        slope: least_squares_slope(&xy),
        theory_slope: None,
        bound_violations: None,
        window: used,
    })
}

pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Rows `k ≥ 1` whose gap exceeds `bound(k)`.
pub fn count_violations(trace: &SolverTrace, bound: impl Fn(u64) -> f64) -> u64 {
    trace
        .rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.k >= 1)
        .filter(|(i, r)| trace.fit_gap(*i).is_some_and(|g| g > bound(r.k)))
        .count() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::TraceRecorder;

    fn synthetic(gap: impl Fn(f64) -> f64) -> SolverTrace {
        let mut rec = TraceRecorder::new("synthetic", Some(0.0));
        for k in 0..=1000u64 {
            rec.record(k, gap(k.max(1) as f64), None, 0.0);
        }
        rec.finish()
    }

    #[test]
    fn recovers_known_slopes() {
        let r = fit_rate(&synthetic(|k| 7.0 / k), (1, 1000)).unwrap();
        assert!((r.slope + 1.0).abs() < 0.01);
        let r = fit_rate(&synthetic(|k| 7.0 / (k * k)), (1, 1000)).unwrap();
        assert!((r.slope + 2.0).abs() < 0.01);
        let r = fit_rate(&synthetic(|_| 3.0), (1, 1000)).unwrap();
        assert!(r.slope.abs() < 1e-12);
    }

    #[test]
    fn window_shrinks_at_zero_gap() {
        let r = fit_rate(
            &synthetic(|k| if k > 100.0 { 0.0 } else { 1.0 / k }),
            (10, 1000),
        )
        .unwrap();
        assert_eq!(r.window, (10, 100));
        assert!(fit_rate(&synthetic(|_| 0.0), (1, 10)).is_err());
    }

    #[test]
    fn violations_use_exact_bound() {
        let t = synthetic(|k| 1.0 / k);
        assert_eq!(count_violations(&t, |k| 1.0 / k as f64), 0);
        assert_eq!(count_violations(&t, |k| 0.5 / k as f64), 1000);
    }
}
