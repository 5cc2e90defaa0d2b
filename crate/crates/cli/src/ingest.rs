//! Reading observation files into a [`TimeSeries`].

use chrono::NaiveDate;
use cpseg_core::{DataKind, TimeSeries};

use crate::error::{CliError, Result};

/// One number per line. Blank lines and `#` comments are skipped, a single
/// surrounding pair of quotes is removed, and a non-numeric first line is
/// taken as a column header.
pub fn parse_values(text: &str, origin: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    let mut seen_line = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let first = !seen_line;
        seen_line = true;
        let err = |message: String| CliError::Parse {
            path: origin.to_string(),
            line: i + 1,
            message,
        };
        if line.contains(',') || line.contains(char::is_whitespace) {
            return Err(err(format!("expected a single column, found `{line}`")));
        }
        let field = unquote(line);
        match field.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if first && field.starts_with(|c: char| c.is_alphabetic()) => {}
            Err(_) => return Err(err(format!("`{field}` is not a number"))),
        }
    }
    Ok(values)
}

fn unquote(field: &str) -> &str {
    field
        .strip_prefix('"')
        .and_then(|f| f.strip_suffix('"'))
        .unwrap_or(field)
}

/// One ISO `YYYY-MM-DD` date per line; blank lines and `#` comments are skipped.
pub fn parse_dates(text: &str, origin: &str) -> Result<Vec<NaiveDate>> {
    let mut dates = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let field = unquote(line);
        let date = NaiveDate::parse_from_str(field, "%Y-%m-%d").map_err(|e| CliError::Parse {
            path: origin.to_string(),
            line: i + 1,
            message: format!("`{field}` is not an ISO date: {e}"),
        })?;
        dates.push(date);
    }
    Ok(dates)
}

/// Counts events in consecutive bins of `bin_days` days starting at `start`.
/// `end` is the last day covered; the final bin may be partial.
pub fn bin_events(dates: &[NaiveDate], start: NaiveDate, end: NaiveDate, bin_days: u32) -> Result<Vec<f64>> {
    if bin_days == 0 {
        return Err(CliError::Config("bin_days must be positive".into()));
    }
    if end < start {
        return Err(CliError::Config(format!("end {end} precedes start {start}")));
    }
    let bin_of = |d: NaiveDate| ((d - start).num_days() / i64::from(bin_days)) as usize;
    let mut counts = vec![0.0; bin_of(end) + 1];
    for &d in dates {
        if d < start || d > end {
            return Err(CliError::Data(format!("event {d} lies outside {start}..={end}")));
        }
        counts[bin_of(d)] += 1.0;
    }
    Ok(counts)
}

pub fn parse_date(text: &str, key: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(text.trim(), "%Y-%m-%d")
        .map_err(|e| CliError::Config(format!("`{key}` = `{text}` is not an ISO date: {e}")))
}

pub fn to_series(values: Vec<f64>, kind: DataKind) -> Result<TimeSeries> {
    Ok(TimeSeries::new(values, kind)?)
}
