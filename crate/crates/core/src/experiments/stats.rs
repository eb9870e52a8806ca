//! Order statistics and histograms for run summaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linearly interpolated quantile (Hyndman-Fan type 7) of unsorted data.
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("quantile of empty data".into()));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!("quantile level {q} outside [0, 1]")));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(sorted_quantile(&v, q))
}

fn sorted_quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Five-number summary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Quartiles {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("summary of empty data".into()));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidArgument("summary of data containing NaN".into()));
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Ok(Self {
            count: v.len(),
            min: v[0],
            q1: sorted_quantile(&v, 0.25),
            median: sorted_quantile(&v, 0.5),
            q3: sorted_quantile(&v, 0.75),
            max: v[v.len() - 1],
        })
    }
}

/// `bins` equal-width bins; `edges` has `bins + 1` entries and the last bin
/// is closed on the right.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Columnar text `lo hi count`, one bin per row.
    pub fn to_table(&self) -> String {
        let mut out = String::from("lo\thi\tcount\n");
        for (w, c) in self.edges.windows(2).zip(&self.counts) {
            out.push_str(&format!("{:.10e}\t{:.10e}\t{c}\n", w[0], w[1]));
        }
        out
    }
}

/// Histogram over `range`, or over the data's span when `None`. A span of
/// zero width is widened by half a unit on each side.
pub fn histogram(values: &[f64], bins: usize, range: Option<(f64, f64)>) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::InvalidArgument("histogram needs at least one bin".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("histogram of non-finite data".into()));
    }
    let (mut lo, mut hi) = match range {
        Some(r) => r,
        None if values.is_empty() => (0.0, 1.0),
        None => values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v))),
    };
    if !(lo <= hi) {
        return Err(Error::InvalidArgument(format!("histogram range [{lo}, {hi}] is empty")));
    }
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins)
        .map(|k| if k == bins { hi } else { lo + k as f64 * width })
        .collect();
    let mut counts = vec![0; bins];
    for &v in values {
        if v < lo || v > hi {
            continue;
        }
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    Ok(Histogram { edges, counts })
}
