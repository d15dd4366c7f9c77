//! Observation ingest and normalized histograms.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parsed observations plus the number of rows that were dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadedSamples {
    pub values: Vec<f64>,
    /// Rows that were non-numeric or not strictly positive.
    pub rejected: usize,
}

/// Reads the first field of every row of a CSV file.
///
/// A first row that does not parse as a number is taken as a header.
pub fn load_samples(path: &Path) -> Result<LoadedSamples> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let loaded = parse_samples(&text);
    if loaded.values.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "{} has no positive numeric rows",
            path.display()
        )));
    }
    Ok(loaded)
}

/// The parsing half of [`load_samples`].
pub fn parse_samples(text: &str) -> LoadedSamples {
    let mut values = Vec::new();
    let mut rejected = 0;
    let rows = text.lines().map(str::trim).filter(|l| !l.is_empty());
    for (i, row) in rows.enumerate() {
        let field = row.split(',').next().unwrap_or("").trim().trim_matches('"');
        match field.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => values.push(v),
            Ok(_) => rejected += 1,
            Err(_) if i == 0 => {}
            Err(_) => rejected += 1,
        }
    }
    LoadedSamples { values, rejected }
}

/// An equal-width histogram normalized to unit area.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    edges: Vec<f64>,
    counts: Vec<u64>,
    total: u64,
    density: Vec<f64>,
}

/// Bin-count limits of the automatic rule.
pub const MIN_BINS: usize = 10;
pub const MAX_BINS: usize = 512;

impl Histogram {
    /// Builds a histogram from explicit edges and counts.
    pub fn from_counts(edges: Vec<f64>, counts: Vec<u64>) -> Result<Self> {
        if edges.len() != counts.len() + 1 || counts.is_empty() {
            return Err(Error::validation("histogram needs one more edge than counts"));
        }
        if !(edges[0] >= 0.0) || edges.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::validation(
                "histogram edges must be nonnegative, finite and strictly increasing",
            ));
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::EmptyDataset("histogram has no counts".into()));
        }
        let density = counts
            .iter()
            .zip(edges.windows(2))
            .map(|(&c, w)| c as f64 / (total as f64 * (w[1] - w[0])))
            .collect();
        Ok(Self {
            edges,
            counts,
            total,
            density,
        })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.edges[0], self.edges[self.edges.len() - 1])
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Median of the binned data, by linear interpolation inside the bin.
    pub fn median(&self) -> f64 {
        let half = self.total as f64 / 2.0;
        let mut acc = 0.0;
        for (i, &c) in self.counts.iter().enumerate() {
            let next = acc + c as f64;
            if next >= half && c > 0 {
                let frac = (half - acc) / c as f64;
                return self.edges[i] + frac * (self.edges[i + 1] - self.edges[i]);
            }
            acc = next;
        }
        self.edges[self.edges.len() - 1]
    }

    /// CSV with columns `left_edge,right_edge,count,density`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("left_edge,right_edge,count,density\n");
        for i in 0..self.bins() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                self.edges[i],
                self.edges[i + 1],
                self.counts[i],
                self.density[i]
            );
        }
        out
    }
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

/// Freedman–Diaconis bin count, clamped to `[MIN_BINS, MAX_BINS]`.
pub fn freedman_diaconis_bins(sorted: &[f64]) -> usize {
    let n = sorted.len() as f64;
    let iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    let span = sorted[sorted.len() - 1] - sorted[0];
    let width = 2.0 * iqr / n.cbrt();
    if !(width > 0.0) {
        return MAX_BINS;
    }
    ((span / width).ceil() as usize).clamp(MIN_BINS, MAX_BINS)
}

/// Bins `samples` into equal-width bins spanning `[min, max]`.
pub fn build_histogram(samples: &[f64], bins: Option<usize>) -> Result<Histogram> {
    if samples.len() < MIN_BINS {
        return Err(Error::InsufficientData {
            needed: MIN_BINS,
            got: samples.len(),
        });
    }
    if let Some(&bad) = samples.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::domain(format!("samples must be finite and > 0, got {bad}")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    if hi <= lo {
        return Err(Error::DegenerateRange(lo));
    }
    let b = match bins {
        Some(0) => return Err(Error::validation("bin count must be at least 1")),
        Some(b) => b,
        None => freedman_diaconis_bins(&sorted),
    };
    let width = (hi - lo) / b as f64;
    let mut edges: Vec<f64> = (0..b).map(|i| lo + width * i as f64).collect();
    edges.push(hi);
    let mut counts = vec![0u64; b];
    for &x in &sorted {
        // Guard the computed index against rounding at the edges.
        let mut i = (((x - lo) / width) as usize).min(b - 1);
        while i > 0 && x < edges[i] {
            i -= 1;
        }
        while i + 1 < b && x >= edges[i + 1] {
            i += 1;
        }
        counts[i] += 1;
    }
    Histogram::from_counts(edges, counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_plain_header_and_filtered_rows() {
        assert_eq!(parse_samples("1.0\n2.5\n0.3\n").values, vec![1.0, 2.5, 0.3]);
        let h = parse_samples("value\n1.0\n");
        assert_eq!((h.values, h.rejected), (vec![1.0], 0));
        let f = parse_samples("1.0\n-2.0\n3.0\n");
        assert_eq!((f.values, f.rejected), (vec![1.0, 3.0], 1));
        let g = parse_samples("1.0\nabc\n0\n");
        assert_eq!((g.values, g.rejected), (vec![1.0], 2));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_samples(Path::new("/nonexistent/gigmix/data.csv")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(err.to_string().contains("/nonexistent/gigmix/data.csv"));
    }

    #[test]
    fn unit_interval_ten_bins() {
        let s: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let mut s2 = s.clone();
        s2[0] = 1e-9;
        s2[999] = 1.0;
        let h = build_histogram(&s2, Some(10)).unwrap();
        assert_eq!(h.bins(), 10);
        for w in h.edges().windows(2) {
            assert!((w[1] - w[0] - 0.1).abs() < 1e-9);
        }
        let area: f64 = h
            .density()
            .iter()
            .zip(h.edges().windows(2))
            .map(|(d, w)| d * (w[1] - w[0]))
            .sum();
        assert!((area - 1.0).abs() < 1e-12);
        assert_eq!(h.total(), 1000);
    }

    #[test]
    fn degenerate_and_small_inputs() {
        assert!(matches!(build_histogram(&[2.0; 20], None), Err(Error::DegenerateRange(_))));
        assert!(matches!(
            build_histogram(&[1.0, 2.0], None),
            Err(Error::InsufficientData { needed: 10, got: 2 })
        ));
    }

    #[test]
    fn right_edge_lands_in_last_bin() {
        let s: Vec<f64> = (1..=20).map(f64::from).collect();
        let h = build_histogram(&s, Some(19)).unwrap();
        assert_eq!(h.counts()[18], 2);
        assert_eq!(h.counts().iter().sum::<u64>(), 20);
    }
}
