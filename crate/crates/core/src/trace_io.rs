//! CSV traces in, CSV robustness series out.
//!
//! Inputs have a header of variable paths, optionally preceded by a `time`
//! column. Lines starting with `#` are comments. Outputs have a `time`
//! column followed by one column per formula; poles are written as `inf`
//! and `-inf`, finite values in their shortest round-tripping form.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use csv::{ReaderBuilder, StringRecord, Trim};
use thiserror::Error;

use crate::ext::ExtReal;
use crate::formula::VarRef;
use crate::oracle::{DiscreteTrace, TraceError};
use crate::time::{Decimal, Duration};

#[derive(Debug, Error)]
pub enum TraceIoError {
    /// Opening or creating `path` failed; the message leaves the path to
    /// the caller.
    #[error("{source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}, column {column}: {message}")]
    Format { line: u64, column: usize, message: String },
    #[error("line {line}: time {time} is not sample {index} of period {period}")]
    NonUniformTime { line: u64, index: usize, time: f64, period: Duration },
    #[error("line {line}: time {time} does not advance past {last}")]
    NonMonotoneTime { line: u64, time: f64, last: f64 },
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("write failed: {0}")]
    Write(#[from] std::io::Error),
}

fn format_err(line: u64, column: usize, message: impl Into<String>) -> TraceIoError {
    TraceIoError::Format { line, column, message: message.into() }
}

fn csv_err(e: csv::Error) -> TraceIoError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(e) => TraceIoError::Write(e),
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            format_err(line, 0, format!("row has {len} fields, header has {expected_len}"))
        }
        kind => format_err(line, 0, format!("{kind:?}")),
    }
}

fn open(path: &Path) -> Result<File, TraceIoError> {
    File::open(path).map_err(|source| TraceIoError::Io { path: path.to_path_buf(), source })
}

/// A parsed input table: optional time column plus variable columns.
struct Table {
    times: Option<Vec<(u64, f64)>>,
    vars: Vec<VarRef>,
    columns: Vec<Vec<f64>>,
}

fn parse_number(field: &str, line: u64, column: usize) -> Result<f64, TraceIoError> {
    let x: f64 = field.parse().map_err(|_| format_err(line, column, format!("`{field}` is not a number")))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format_err(line, column, format!("`{field}` is not finite")))
    }
}

fn read_table(input: impl Read) -> Result<Table, TraceIoError> {
    let mut rdr = ReaderBuilder::new().comment(Some(b'#')).trim(Trim::All).from_reader(input);
    let header = rdr.headers().map_err(csv_err)?.clone();
    let has_time = header.get(0) == Some("time");
    let mut vars = Vec::new();
    for (i, name) in header.iter().enumerate().skip(usize::from(has_time)) {
        let var = VarRef::new(name).ok_or_else(|| format_err(1, i + 1, format!("`{name}` is not a variable path")))?;
        if vars.contains(&var) {
            return Err(format_err(1, i + 1, format!("duplicate column `{name}`")));
        }
        vars.push(var);
    }
    let mut table = Table { times: has_time.then(Vec::new), columns: vec![Vec::new(); vars.len()], vars };
    let mut record = StringRecord::new();
    while rdr.read_record(&mut record).map_err(csv_err)? {
        let line = record.position().map_or(0, |p| p.line());
        let mut fields = record.iter().enumerate();
        if let Some(times) = &mut table.times {
            let (_, f) = fields.next().expect("nonempty record");
            times.push((line, parse_number(f, line, 1)?));
        }
        for (i, f) in fields {
            table.columns[i - usize::from(has_time)].push(parse_number(f, line, i + 1)?);
        }
    }
    Ok(table)
}

/// Reads a sampled trace. A `time` column, when present, must hold
/// `k · period` in row `k` (within one part in 10⁹), in the period's unit.
pub fn parse_discrete_trace(input: impl Read, period: Duration) -> Result<DiscreteTrace, TraceIoError> {
    let table = read_table(input)?;
    if let Some(times) = &table.times {
        let p = period.value.to_f64();
        for (k, &(line, time)) in times.iter().enumerate() {
            let expected = k as f64 * p;
            if (time - expected).abs() > 1e-9 * expected.abs().max(p) {
                return Err(TraceIoError::NonUniformTime { line, index: k, time, period });
            }
        }
    }
    let columns: BTreeMap<VarRef, Vec<f64>> = table.vars.into_iter().zip(table.columns).collect();
    Ok(DiscreteTrace::new(period, columns)?)
}

pub fn read_discrete_trace(path: &Path, period: Duration) -> Result<DiscreteTrace, TraceIoError> {
    parse_discrete_trace(open(path)?, period)
}

/// One batch of `(time, value)` events per variable, in column order.
pub type DenseBatches = Vec<(String, Vec<(f64, f64)>)>;

/// Reads a timed trace into per-variable event lists. Times must be
/// strictly increasing.
pub fn parse_dense_batches(input: impl Read) -> Result<DenseBatches, TraceIoError> {
    let table = read_table(input)?;
    let times = table.times.ok_or_else(|| format_err(1, 1, "a timed trace needs a leading `time` column"))?;
    for w in times.windows(2) {
        let ((_, last), (line, time)) = (w[0], w[1]);
        if time <= last {
            return Err(TraceIoError::NonMonotoneTime { line, time, last });
        }
    }
    Ok(table
        .vars
        .into_iter()
        .zip(table.columns)
        .map(|(v, col)| (v.as_str().to_string(), times.iter().map(|&(_, t)| t).zip(col).collect()))
        .collect())
}

pub fn read_dense_batches(path: &Path) -> Result<DenseBatches, TraceIoError> {
    parse_dense_batches(open(path)?)
}

/// Robustness values of several formulas over common time points.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Series {
    pub names: Vec<String>,
    pub rows: Vec<(f64, Vec<ExtReal>)>,
}

impl Series {
    pub fn new(names: Vec<String>) -> Self {
        Series { names, rows: Vec::new() }
    }

    /// Merges per-formula step signals onto the union of their breakpoints.
    /// Every signal must start at the first breakpoint.
    pub fn from_segments(names: Vec<String>, signals: &[Vec<(f64, ExtReal)>]) -> Self {
        let mut times: Vec<f64> = signals.iter().flatten().map(|s| s.0).collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        let mut cursors = vec![0usize; signals.len()];
        let rows = times
            .into_iter()
            .map(|t| {
                let values = signals
                    .iter()
                    .zip(&mut cursors)
                    .map(|(s, i)| {
                        while *i + 1 < s.len() && s[*i + 1].0 <= t {
                            *i += 1;
                        }
                        s[*i].1
                    })
                    .collect();
                (t, values)
            })
            .collect();
        Series { names, rows }
    }

    /// Values of one formula, in row order.
    pub fn column(&self, name: &str) -> Option<Vec<ExtReal>> {
        let k = self.names.iter().position(|n| n == name)?;
        Some(self.rows.iter().map(|r| r.1[k]).collect())
    }
}

pub fn write_series_to(out: impl Write, series: &Series) -> Result<(), TraceIoError> {
    let mut w = csv::Writer::from_writer(out);
    let header = std::iter::once("time").chain(series.names.iter().map(String::as_str));
    w.write_record(header).map_err(csv_err)?;
    for (t, values) in &series.rows {
        let fields = std::iter::once(t.to_string()).chain(values.iter().map(ExtReal::to_string));
        w.write_record(fields).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_series(path: &Path, series: &Series) -> Result<(), TraceIoError> {
    let file = File::create(path).map_err(|source| TraceIoError::Io { path: path.to_path_buf(), source })?;
    write_series_to(file, series)
}

fn parse_value(field: &str, line: u64, column: usize) -> Result<ExtReal, TraceIoError> {
    match field {
        "inf" => Ok(ExtReal::PosInf),
        "-inf" => Ok(ExtReal::NegInf),
        _ => parse_number(field, line, column).map(ExtReal::finite),
    }
}

pub fn parse_series(input: impl Read) -> Result<Series, TraceIoError> {
    let mut rdr = ReaderBuilder::new().comment(Some(b'#')).trim(Trim::All).from_reader(input);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.get(0) != Some("time") {
        return Err(format_err(1, 1, "a series starts with a `time` column"));
    }
    let mut series = Series::new(header.iter().skip(1).map(str::to_string).collect());
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        let t = parse_number(&record[0], line, 1)?;
        let values =
            record.iter().enumerate().skip(1).map(|(i, f)| parse_value(f, line, i + 1)).collect::<Result<_, _>>()?;
        series.rows.push((t, values));
    }
    Ok(series)
}

pub fn read_series(path: &Path) -> Result<Series, TraceIoError> {
    parse_series(open(path)?)
}

/// Sample times of a discrete run, as numbers in the period's unit.
pub fn sample_times(period: Duration, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| {
        let exact = period.value.checked_mul(Decimal::from_int(k as i128));
        exact.map_or(k as f64 * period.value.to_f64(), Decimal::to_f64)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::TimeUnit;

    fn secs(v: i128) -> Duration {
        Duration::seconds(Decimal::from_int(v))
    }

    fn a() -> VarRef {
        VarRef::new("a").unwrap()
    }

    #[test]
    fn discrete_with_time_column() {
        let w = parse_discrete_trace("time,a\n0,5\n1,1\n".as_bytes(), secs(1)).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(w.columns()[&a()], vec![5.0, 1.0]);
    }

    #[test]
    fn discrete_with_implicit_indices() {
        let w = parse_discrete_trace("# comment\na\n5\n1\n3\n".as_bytes(), secs(1)).unwrap();
        assert_eq!(w.columns()[&a()], vec![5.0, 1.0, 3.0]);
    }

    #[test]
    fn discrete_rejects_gaps() {
        let e = parse_discrete_trace("time,a\n0,5\n2,1\n".as_bytes(), secs(1)).unwrap_err();
        assert!(matches!(e, TraceIoError::NonUniformTime { line: 3, index: 1, .. }), "{e}");
    }

    #[test]
    fn discrete_time_in_period_unit() {
        let p = Duration::new(Decimal::from_int(100), TimeUnit::Ms).unwrap();
        let w = parse_discrete_trace("time,a\n0,1\n100,2\n200,3\n".as_bytes(), p).unwrap();
        assert_eq!(w.len(), 3);
        assert!(parse_discrete_trace("time,a\n0,1\n100.001,2\n".as_bytes(), p).is_err());
        assert!(parse_discrete_trace("time,a\n0,1\n100.00000001,2\n".as_bytes(), p).is_ok());
    }

    #[test]
    fn format_errors_carry_positions() {
        let e = parse_discrete_trace("time,a,b\n0,1,2\n1,x,2\n".as_bytes(), secs(1)).unwrap_err();
        assert!(matches!(e, TraceIoError::Format { line: 3, column: 2, .. }), "{e}");
        let e = parse_discrete_trace("a,b\n1,2\n3\n".as_bytes(), secs(1)).unwrap_err();
        assert!(matches!(e, TraceIoError::Format { line: 3, .. }), "{e}");
        let e = parse_discrete_trace("a\ninf\n".as_bytes(), secs(1)).unwrap_err();
        assert!(matches!(e, TraceIoError::Format { line: 2, column: 1, .. }), "{e}");
        assert!(parse_discrete_trace("a,a\n1,2\n".as_bytes(), secs(1)).is_err());
    }

    #[test]
    fn dense_batches() {
        let b = parse_dense_batches("time,a\n0,2\n1.5,4\n".as_bytes()).unwrap();
        assert_eq!(b, vec![("a".to_string(), vec![(0.0, 2.0), (1.5, 4.0)])]);
        let b = parse_dense_batches("time,a,b\n0,2,3\n".as_bytes()).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b[1].1, vec![(0.0, 3.0)]);
        let e = parse_dense_batches("time,a\n1,2\n0.5,4\n".as_bytes()).unwrap_err();
        assert!(matches!(e, TraceIoError::NonMonotoneTime { line: 3, .. }), "{e}");
        assert!(parse_dense_batches("a\n1\n".as_bytes()).is_err());
    }

    #[test]
    fn series_round_trip() {
        let mut s = Series::new(vec!["phi".into(), "psi".into()]);
        s.rows.push((0.0, vec![ExtReal::finite(2.0), ExtReal::PosInf]));
        s.rows.push((1.0, vec![ExtReal::finite(-2.0), ExtReal::NegInf]));
        s.rows.push((2.5, vec![ExtReal::finite(0.1 + 0.2), ExtReal::finite(1e-300)]));
        let mut buf = Vec::new();
        write_series_to(&mut buf, &s).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("time,phi,psi\n0,2,inf\n1,-2,-inf\n"), "{text}");
        assert_eq!(parse_series(text.as_bytes()).unwrap(), s);
    }

    #[test]
    fn empty_series_is_header_only() {
        let mut buf = Vec::new();
        write_series_to(&mut buf, &Series::new(vec!["phi".into()])).unwrap();
        assert_eq!(buf, b"time,phi\n");
    }

    #[test]
    fn merged_segments() {
        let s = Series::from_segments(
            vec!["p".into(), "q".into()],
            &[
                vec![(0.0, ExtReal::finite(1.0)), (2.0, ExtReal::NegInf)],
                vec![(0.0, ExtReal::ZERO), (1.0, ExtReal::PosInf)],
            ],
        );
        assert_eq!(s.rows.iter().map(|r| r.0).collect::<Vec<_>>(), vec![0.0, 1.0, 2.0]);
        assert_eq!(s.column("p").unwrap(), vec![ExtReal::finite(1.0), ExtReal::finite(1.0), ExtReal::NegInf]);
        assert_eq!(s.column("q").unwrap(), vec![ExtReal::ZERO, ExtReal::PosInf, ExtReal::PosInf]);
    }

    #[test]
    fn sample_times_are_exact() {
        let p = Duration::new(Decimal::new(1, 1), TimeUnit::S).unwrap();
        assert_eq!(sample_times(p, 4).collect::<Vec<_>>(), vec![0.0, 0.1, 0.2, 0.3]);
    }
}
