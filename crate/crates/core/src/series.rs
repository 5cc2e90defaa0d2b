//! Observations, segmentations and prefix-sum sufficient statistics.
//!
//! All positions are 1-based: observations are `y_1..y_n`, a changepoint at
//! `t` ends a segment at `y_t`, and valid changepoints lie in `1..=n-1`.

use std::fmt;

use crate::error::{Error, Result, SegmentationError};
use crate::math::{ln_factorial, CompensatedSum};

/// Largest integer that an `f64` represents exactly.
const MAX_EXACT_INT: f64 = 9_007_199_254_740_992.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DataKind {
    /// Nonnegative integer counts (Poisson segments).
    Counts,
    /// 0/1 outcomes (Bernoulli segments).
    Binary,
    /// Real-valued measurements (Gaussian segments).
    Real,
}

impl DataKind {
    pub fn name(self) -> &'static str {
        match self {
            DataKind::Counts => "counts",
            DataKind::Binary => "binary",
            DataKind::Real => "real",
        }
    }
}

impl fmt::Display for DataKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A time-ordered series `y_1..y_n` tagged with its data kind.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    kind: DataKind,
}

impl TimeSeries {
    /// Validates `values` against `kind`. Errors name the offending 1-based index.
    pub fn new(values: Vec<f64>, kind: DataKind) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooShort(values.len()));
        }
        for (i, &v) in values.iter().enumerate() {
            let reason = if !v.is_finite() {
                Some("not finite")
            } else {
                match kind {
                    DataKind::Counts if v < 0.0 => Some("counts must be nonnegative"),
                    DataKind::Counts if v.fract() != 0.0 => Some("counts must be integers"),
                    DataKind::Counts if v > MAX_EXACT_INT => Some("count too large"),
                    DataKind::Binary if v != 0.0 && v != 1.0 => Some("binary data must be 0 or 1"),
                    _ => None,
                }
            };
            if let Some(reason) = reason {
                return Err(Error::InvalidValue {
                    kind,
                    index: i + 1,
                    value: v,
                    reason,
                });
            }
        }
        Ok(Self { values, kind })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> DataKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Checks `0 < τ_1 < … < τ_k < n`.
pub fn validate_segmentation(taus: &[usize], n: usize) -> std::result::Result<(), SegmentationError> {
    for (i, &position) in taus.iter().enumerate() {
        if position == 0 {
            return Err(SegmentationError::NonPositive { position });
        }
        if position >= n {
            return Err(SegmentationError::OutOfRange { position, n });
        }
        if i > 0 {
            let previous = taus[i - 1];
            if previous == position {
                return Err(SegmentationError::Duplicate { position });
            }
            if previous > position {
                return Err(SegmentationError::Unsorted { previous, position });
            }
        }
    }
    Ok(())
}

/// Sorted changepoint positions `τ_1 < … < τ_k` for a series of length `n`.
/// `τ_0 = 0` and `τ_{k+1} = n` are implicit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Segmentation {
    n: usize,
    taus: Vec<usize>,
}

impl Segmentation {
    pub fn new(taus: Vec<usize>, n: usize) -> std::result::Result<Self, SegmentationError> {
        validate_segmentation(&taus, n)?;
        Ok(Self { n, taus })
    }

    /// No changepoints.
    pub fn empty(n: usize) -> Self {
        Self { n, taus: Vec::new() }
    }

    pub(crate) fn from_sorted_unchecked(taus: Vec<usize>, n: usize) -> Self {
        debug_assert!(validate_segmentation(&taus, n).is_ok());
        Self { n, taus }
    }

    /// Builds from the indicator `z_1..z_n` (`z_t = 1` iff changepoint at `t`, `z_n = 0`).
    pub fn from_indicator(z: &[bool]) -> std::result::Result<Self, SegmentationError> {
        let n = z.len();
        if n > 0 && z[n - 1] {
            return Err(SegmentationError::OutOfRange { position: n, n });
        }
        let taus = z.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i + 1).collect();
        Ok(Self { n, taus })
    }

    /// Indicator vector of length `n`; entry `t - 1` is `z_t`.
    pub fn to_indicator(&self) -> Vec<bool> {
        let mut z = vec![false; self.n];
        for &t in &self.taus {
            z[t - 1] = true;
        }
        z
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.taus.len()
    }

    pub fn taus(&self) -> &[usize] {
        &self.taus
    }

    pub fn into_taus(self) -> Vec<usize> {
        self.taus
    }

    pub fn contains(&self, t: usize) -> bool {
        self.taus.binary_search(&t).is_ok()
    }

    /// Segment bounds `(s, t)`, inclusive and 1-based, in time order.
    pub fn segments(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let ends = self.taus.iter().copied().chain(std::iter::once(self.n));
        let starts = std::iter::once(0).chain(self.taus.iter().copied());
        starts.zip(ends).map(|(a, b)| (a + 1, b))
    }

    /// Neighbours `(τ_{j-1}, τ_{j+1})` of the changepoint at 0-based index `j`.
    pub fn neighbours(&self, j: usize) -> (usize, usize) {
        let left = if j == 0 { 0 } else { self.taus[j - 1] };
        let right = self.taus.get(j + 1).copied().unwrap_or(self.n);
        (left, right)
    }

    /// The changepoints bracketing a non-changepoint position `t`.
    pub fn enclosing_gap(&self, t: usize) -> (usize, usize) {
        let idx = self.taus.partition_point(|&x| x < t);
        let left = if idx == 0 { 0 } else { self.taus[idx - 1] };
        let right = self.taus.get(idx).copied().unwrap_or(self.n);
        (left, right)
    }

    pub(crate) fn insert(&mut self, t: usize) {
        let idx = self.taus.partition_point(|&x| x < t);
        debug_assert!(self.taus.get(idx) != Some(&t));
        self.taus.insert(idx, t);
    }

    pub(crate) fn remove(&mut self, t: usize) {
        let idx = self
            .taus
            .binary_search(&t)
            .expect("removing a position that is not a changepoint");
        self.taus.remove(idx);
    }

    /// Replaces the changepoint at index `j`; the new position must stay between neighbours.
    pub(crate) fn set(&mut self, j: usize, t: usize) {
        debug_assert!({
            let (l, r) = self.neighbours(j);
            l < t && t < r
        });
        self.taus[j] = t;
    }

    /// Applies an elementary edit, validating the result.
    pub fn apply(&self, edit: Edit) -> std::result::Result<Self, SegmentationError> {
        let mut taus = self.taus.clone();
        match edit {
            Edit::Add { t } => taus.push(t),
            Edit::Delete { t } => {
                let idx = taus
                    .iter()
                    .position(|&x| x == t)
                    .ok_or(SegmentationError::NotElementaryEdit)?;
                taus.remove(idx);
            }
            Edit::Move { from, to } => {
                let idx = taus
                    .iter()
                    .position(|&x| x == from)
                    .ok_or(SegmentationError::NotElementaryEdit)?;
                taus[idx] = to;
            }
        }
        taus.sort_unstable();
        Self::new(taus, self.n)
    }

    /// The single add, delete or move that turns `self` into `other`, if any.
    pub fn edit_to(&self, other: &Segmentation) -> std::result::Result<Edit, SegmentationError> {
        if self.n != other.n {
            return Err(SegmentationError::NotElementaryEdit);
        }
        let only_self: Vec<usize> = self.taus.iter().copied().filter(|t| !other.contains(*t)).collect();
        let only_other: Vec<usize> = other.taus.iter().copied().filter(|t| !self.contains(*t)).collect();
        match (only_self.as_slice(), only_other.as_slice()) {
            ([], [t]) => Ok(Edit::Add { t: *t }),
            ([t], []) => Ok(Edit::Delete { t: *t }),
            ([from], [to]) => Ok(Edit::Move { from: *from, to: *to }),
            _ => Err(SegmentationError::NotElementaryEdit),
        }
    }
}

/// One elementary change to a segmentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edit {
    Add { t: usize },
    Delete { t: usize },
    Move { from: usize, to: usize },
}

/// Prefix sums over a series so that any segment statistic costs O(1).
///
/// Index `t` of each prefix array holds the statistic over `y_1..y_t`;
/// index 0 is zero.
#[derive(Debug, Clone)]
pub struct SufficientStats {
    n: usize,
    kind: DataKind,
    prefix_sum: Vec<f64>,
    prefix_count: Option<Vec<u64>>,
    prefix_sumsq: Option<Vec<f64>>,
    prefix_logfact: Option<Vec<f64>>,
    center: f64,
    centered_sum: Option<Vec<f64>>,
    centered_sumsq: Option<Vec<f64>>,
}

/// Builds prefix sums. Counts and binary data use exact integer prefixes;
/// real data uses compensated summation, plus a second set of prefixes
/// over values centred at the series mean for well-conditioned
/// within-segment sums of squares.
pub fn build_stats(series: &TimeSeries) -> SufficientStats {
    let values = series.values();
    let n = values.len();
    let kind = series.kind();
    let mut prefix_sum = Vec::with_capacity(n + 1);
    prefix_sum.push(0.0);

    match kind {
        DataKind::Counts | DataKind::Binary => {
            let mut counts = Vec::with_capacity(n + 1);
            counts.push(0u64);
            let mut logfact = (kind == DataKind::Counts).then(|| {
                let mut v = Vec::with_capacity(n + 1);
                v.push(0.0);
                v
            });
            let mut running = 0u64;
            let mut lf = CompensatedSum::default();
            for &y in values {
                let c = y as u64;
                running = running.checked_add(c).expect("count prefix overflow");
                counts.push(running);
                prefix_sum.push(running as f64);
                if let Some(v) = logfact.as_mut() {
                    lf.add(ln_factorial(c));
                    v.push(lf.value());
                }
            }
            SufficientStats {
                n,
                kind,
                prefix_sum,
                prefix_count: Some(counts),
                prefix_sumsq: None,
                prefix_logfact: logfact,
                center: 0.0,
                centered_sum: None,
                centered_sumsq: None,
            }
        }
        DataKind::Real => {
            let mut mean = CompensatedSum::default();
            for &y in values {
                mean.add(y);
            }
            let center = mean.value() / n as f64;

            let mut sumsq = vec![0.0];
            let mut csum = vec![0.0];
            let mut csumsq = vec![0.0];
            let (mut s, mut ss, mut cs, mut css) = (
                CompensatedSum::default(),
                CompensatedSum::default(),
                CompensatedSum::default(),
                CompensatedSum::default(),
            );
            for &y in values {
                s.add(y);
                ss.add(y * y);
                let d = y - center;
                cs.add(d);
                css.add(d * d);
                prefix_sum.push(s.value());
                sumsq.push(ss.value());
                csum.push(cs.value());
                csumsq.push(css.value());
            }
            SufficientStats {
                n,
                kind,
                prefix_sum,
                prefix_count: None,
                prefix_sumsq: Some(sumsq),
                prefix_logfact: None,
                center,
                centered_sum: Some(csum),
                centered_sumsq: Some(csumsq),
            }
        }
    }
}

impl SufficientStats {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> DataKind {
        self.kind
    }

    /// `S[0..=n]`.
    pub fn prefix_sum(&self) -> &[f64] {
        &self.prefix_sum
    }

    /// `SS[0..=n]`, real data only.
    pub fn prefix_sumsq(&self) -> Option<&[f64]> {
        self.prefix_sumsq.as_deref()
    }

    /// `LF[0..=n]` with `LF[t] = Σ_{i≤t} ln(y_i!)`, count data only.
    pub fn prefix_logfact(&self) -> Option<&[f64]> {
        self.prefix_logfact.as_deref()
    }

    /// Checks `1 ≤ s ≤ t ≤ n`.
    pub fn check_range(&self, s: usize, t: usize) -> Result<()> {
        if s == 0 || s > t || t > self.n {
            return Err(Error::SegmentRange { s, t, n: self.n });
        }
        Ok(())
    }

    #[inline]
    pub fn segment_sum(&self, s: usize, t: usize) -> f64 {
        match &self.prefix_count {
            Some(c) => (c[t] - c[s - 1]) as f64,
            None => self.prefix_sum[t] - self.prefix_sum[s - 1],
        }
    }

    /// Exact integer segment total for count and binary data.
    #[inline]
    pub fn segment_count(&self, s: usize, t: usize) -> u64 {
        let c = self
            .prefix_count
            .as_ref()
            .expect("segment_count requires count or binary data");
        c[t] - c[s - 1]
    }

    /// Largest segment total, i.e. the whole-series count.
    pub fn total_count(&self) -> u64 {
        self.prefix_count.as_ref().map_or(0, |c| c[self.n])
    }

    #[inline]
    pub fn segment_sumsq(&self, s: usize, t: usize) -> f64 {
        let ss = self.prefix_sumsq.as_ref().expect("sum of squares requires real data");
        ss[t] - ss[s - 1]
    }

    #[inline]
    pub fn segment_logfact(&self, s: usize, t: usize) -> f64 {
        let lf = self.prefix_logfact.as_ref().expect("log-factorials require count data");
        lf[t] - lf[s - 1]
    }

    #[inline]
    pub fn segment_mean(&self, s: usize, t: usize) -> f64 {
        let m = (t - s + 1) as f64;
        match &self.centered_sum {
            Some(cs) => self.center + (cs[t] - cs[s - 1]) / m,
            None => self.segment_sum(s, t) / m,
        }
    }

    /// Within-segment sum of squared deviations `Σ (y_i − ȳ)²`, real data only.
    #[inline]
    pub fn segment_sse(&self, s: usize, t: usize) -> f64 {
        let cs = self.centered_sum.as_ref().expect("sse requires real data");
        let css = self.centered_sumsq.as_ref().expect("sse requires real data");
        let m = (t - s + 1) as f64;
        let d = cs[t] - cs[s - 1];
        (css[t] - css[s - 1] - d * d / m).max(0.0)
    }
}
