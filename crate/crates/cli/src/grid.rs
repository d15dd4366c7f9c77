//! Log-spaced evaluation grids for density tables.

/// `n` points spaced evenly in `ln x` from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let last = (n - 1).max(1) as f64;
    (0..n).map(|i| (a + (b - a) * i as f64 / last).exp()).collect()
}

/// Decades scanned on either side of `center`.
const REACH: f64 = 8.0;
/// Depth below the peak, in log-density, at which a curve counts as negligible.
const DEPTH: f64 = 30.0;

/// Range around `center` outside of which every log-density lies more than
/// [`DEPTH`] below its own peak, or `REACH` decades away if it never does.
pub fn auto_range(log_pdfs: &[&dyn Fn(f64) -> f64], center: f64) -> (f64, f64) {
    let scan = log_grid(center * 10f64.powf(-REACH), center * 10f64.powf(REACH), 1601);
    let mut lo = usize::MAX;
    let mut hi = 0;
    for f in log_pdfs {
        let v: Vec<f64> = scan.iter().map(|&x| f(x)).map(|l| if l.is_nan() { f64::NEG_INFINITY } else { l }).collect();
        let peak = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !peak.is_finite() {
            continue;
        }
        let keep: Vec<usize> = (0..v.len()).filter(|&i| v[i] >= peak - DEPTH).collect();
        lo = lo.min(keep[0].saturating_sub(1));
        hi = hi.max((keep[keep.len() - 1] + 1).min(scan.len() - 1));
    }
    if lo >= hi {
        return (center / 10.0, center * 10.0);
    }
    (scan[lo], scan[hi])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints_and_spacing() {
        let g = log_grid(0.01, 100.0, 5);
        assert_eq!(g.len(), 5);
        assert!((g[0] - 0.01).abs() < 1e-15 && (g[4] - 100.0).abs() < 1e-12);
        assert!((g[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn range_covers_a_gamma_bulk() {
        let f = |x: f64| 2.0 * x.ln() - x;
        let (lo, hi) = auto_range(&[&f], 1.0);
        assert!(lo < 1e-6 && hi > 35.0 && hi < 60.0, "{lo} {hi}");
    }
}
