//! Event series and intensity-state paths, with the CSV formats shared by
//! every tool in the pipeline.

use crate::error::{Error, Result};
use std::path::Path;

/// A realized point-process path: event times in seconds, the event type of
/// each arrival, and optional marks (jump sizes).
///
/// Univariate series carry type 0 everywhere. Times are strictly increasing
/// and measured from the process origin at t = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSeries {
    times: Vec<f64>,
    types: Vec<u32>,
    marks: Option<Vec<f64>>,
}

impl EventSeries {
    pub fn new(times: Vec<f64>, types: Vec<u32>, marks: Option<Vec<f64>>) -> Result<Self> {
        if types.len() != times.len() {
            return Err(Error::InvalidSeries(format!(
                "types length {} != times length {}",
                types.len(),
                times.len()
            )));
        }
        if let Some(m) = &marks {
            if m.len() != times.len() {
                return Err(Error::InvalidSeries(format!(
                    "marks length {} != times length {}",
                    m.len(),
                    times.len()
                )));
            }
            if m.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
                return Err(Error::InvalidSeries("marks must be strictly positive".into()));
            }
        }
        if let Some(&first) = times.first() {
            if !(first >= 0.0) {
                return Err(Error::InvalidSeries(format!(
                    "first event time must be >= 0, got {first}"
                )));
            }
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidSeries(
                "event times must be strictly increasing".into(),
            ));
        }
        Ok(EventSeries { times, types, marks })
    }

    /// All events of type 0, no marks.
    pub fn univariate(times: Vec<f64>) -> Result<Self> {
        let types = vec![0; times.len()];
        Self::new(times, types, None)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn types(&self) -> &[u32] {
        &self.types
    }

    pub fn marks(&self) -> Option<&[f64]> {
        self.marks.as_deref()
    }

    /// Number of event types present, counted as `max type + 1`.
    pub fn num_types(&self) -> usize {
        self.types.iter().max().map_or(0, |&m| m as usize + 1)
    }

    /// Inter-arrival times measured from the origin: `tau_1 = t_1`,
    /// `tau_n = t_n - t_{n-1}`.
    pub fn inter_arrivals(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.times
            .iter()
            .map(|&t| {
                let tau = t - prev;
                prev = t;
                tau
            })
            .collect()
    }

    /// Events with time in `(0, horizon]` relative to `origin`, times shifted
    /// so the window start becomes the new process origin.
    pub fn rebase(&self, origin: f64) -> Result<EventSeries> {
        let mut times = Vec::new();
        let mut types = Vec::new();
        let mut marks = self.marks.as_ref().map(|_| Vec::new());
        for i in 0..self.len() {
            let t = self.times[i] - origin;
            if t > 0.0 {
                times.push(t);
                types.push(self.types[i]);
                if let (Some(out), Some(m)) = (marks.as_mut(), self.marks.as_ref()) {
                    out.push(m[i]);
                }
            }
        }
        EventSeries::new(times, types, marks)
    }

    /// Write as `time,type,mark` CSV. Times carry nine fractional digits;
    /// the mark column is left empty when the series has no marks.
    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut w = csv::Writer::from_path(&path)
            .map_err(|e| csv_err(&path, e))?;
        w.write_record(["time", "type", "mark"]).map_err(|e| csv_err(&path, e))?;
        for i in 0..self.len() {
            let mark = match &self.marks {
                Some(m) => format!("{}", m[i]),
                None => String::new(),
            };
            w.write_record([
                format!("{:.9}", self.times[i]),
                self.types[i].to_string(),
                mark,
            ])
            .map_err(|e| csv_err(&path, e))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_path(&path)
            .map_err(|e| csv_err(&path, e))?;
        let mut times = Vec::new();
        let mut types = Vec::new();
        let mut marks: Vec<f64> = Vec::new();
        let mut any_mark = false;
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| csv_err(&path, e))?;
            let t: f64 = parse_field(&path, i, rec.get(0))?;
            let ty: u32 = rec
                .get(1)
                .filter(|s| !s.is_empty())
                .map(|s| parse_str(&path, i, s))
                .transpose()?
                .unwrap_or(0);
            times.push(t);
            types.push(ty);
            match rec.get(2).filter(|s| !s.is_empty()) {
                Some(s) => {
                    marks.push(parse_str(&path, i, s)?);
                    any_mark = true;
                }
                None => marks.push(f64::NAN),
            }
        }
        if any_mark && marks.iter().any(|m| m.is_nan()) {
            return Err(Error::InvalidSeries(
                "mark column must be filled for all events or none".into(),
            ));
        }
        EventSeries::new(times, types, any_mark.then_some(marks))
    }
}

/// The discrete intensity state after each event: `lambda0` is the starting
/// value, `values[n]` the state at event n + 1.
///
/// This is the decay-recursion state, not the conditional intensity; with
/// non-exponential residuals the two differ between events.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaPath {
    pub lambda0: f64,
    pub values: Vec<f64>,
}

impl LambdaPath {
    /// One-column CSV with header `lambda` (state after each event).
    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        write_column_csv(path, "lambda", &self.values)
    }
}

/// One-column CSV with header `epsilon` (the residual exchange format).
pub fn write_residuals_csv<P: AsRef<Path>>(path: P, residuals: &[f64]) -> Result<()> {
    write_column_csv(path, "epsilon", residuals)
}

pub fn read_residuals_csv<P: AsRef<Path>>(path: P) -> Result<Vec<f64>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(&path)
        .map_err(|e| csv_err(&path, e))?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(&path, e))?;
        out.push(parse_field(&path, i, rec.get(0))?);
    }
    Ok(out)
}

pub(crate) fn write_column_csv<P: AsRef<Path>>(path: P, header: &str, values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
    w.write_record([header]).map_err(|e| csv_err(&path, e))?;
    for v in values {
        w.write_record([format!("{v}")]).map_err(|e| csv_err(&path, e))?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_err<P: AsRef<Path>, E: std::fmt::Display>(path: P, e: E) -> Error {
    Error::Csv {
        path: path.as_ref().display().to_string(),
        msg: e.to_string(),
    }
}

pub(crate) fn parse_field<P: AsRef<Path>, T: std::str::FromStr>(
    path: P,
    row: usize,
    field: Option<&str>,
) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    match field {
        Some(s) => parse_str(path, row, s),
        None => Err(Error::Csv {
            path: path.as_ref().display().to_string(),
            msg: format!("row {}: missing field", row + 2),
        }),
    }
}

pub(crate) fn parse_str<P: AsRef<Path>, T: std::str::FromStr>(
    path: P,
    row: usize,
    s: &str,
) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.trim().parse().map_err(|e| Error::Csv {
        path: path.as_ref().display().to_string(),
        msg: format!("row {}: {e}", row + 2),
    })
}
