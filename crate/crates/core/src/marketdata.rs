//! Quote-tape ingestion and the sparse-observation preprocessing.
//!
//! Quotes come in as `time_ns,bid,ask` CSV; mid-price change extraction
//! turns them into a strictly increasing sequence of price events with
//! direction and jump size. Sparsification walks a fixed grid of width
//! `dt`: whenever the prevailing price at a grid point differs from the
//! last recorded price, the last change event at or before that grid point
//! is recorded (the grid point itself never is), which keeps arrival times
//! on a continuous domain while thinning oscillation noise.

use crate::error::{Error, Result};
use crate::series::{csv_err, parse_field, EventSeries};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// A raw quote tape: nondecreasing times (seconds), best bid and ask.
/// Duplicate timestamps are allowed; consumers collapse them last-wins.
#[derive(Debug, Clone, PartialEq)]
pub struct QuoteSeries {
    times: Vec<f64>,
    bid: Vec<f64>,
    ask: Vec<f64>,
}

impl QuoteSeries {
    pub fn new(times: Vec<f64>, bid: Vec<f64>, ask: Vec<f64>) -> Result<Self> {
        if bid.len() != times.len() || ask.len() != times.len() {
            return Err(Error::InvalidSeries("quote column lengths disagree".into()));
        }
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidSeries("quote times must be nondecreasing".into()));
        }
        if times.first().is_some_and(|&t| t < 0.0) {
            return Err(Error::InvalidSeries("quote times must be nonnegative".into()));
        }
        if bid.iter().chain(&ask).any(|&p| !(p > 0.0)) {
            return Err(Error::InvalidSeries("quoted prices must be positive".into()));
        }
        Ok(QuoteSeries { times, bid, ask })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Read `time_ns,bid,ask` CSV. Timestamps are integer nanoseconds and
    /// become float seconds here, the only unit conversion in the pipeline.
    pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(&path)
            .map_err(|e| csv_err(&path, e))?;
        let mut times = Vec::new();
        let mut bid = Vec::new();
        let mut ask = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| csv_err(&path, e))?;
            let ns: i64 = parse_field(&path, i, rec.get(0))?;
            times.push(ns as f64 * 1e-9);
            bid.push(parse_field(&path, i, rec.get(1))?);
            ask.push(parse_field(&path, i, rec.get(2))?);
        }
        QuoteSeries::new(times, bid, ask)
    }
}

/// Mid-price change events: strictly increasing times, the new price after
/// each change, its direction, and the absolute jump size.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceEventSeries {
    pub times: Vec<f64>,
    pub prices: Vec<f64>,
    pub directions: Vec<i8>,
    pub jumps: Vec<f64>,
}

impl PriceEventSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// The price that prevailed before the first recorded change.
    pub fn initial_price(&self) -> Option<f64> {
        if self.is_empty() {
            None
        } else {
            Some(self.prices[0] - self.directions[0] as f64 * self.jumps[0])
        }
    }

    /// Convert to a model event series: type 0 for upticks, type 1 for
    /// downticks, the jump size as mark. Times are shifted by `origin` (the
    /// window start) so the model clock starts at 0.
    pub fn to_event_series(&self, origin: f64) -> Result<EventSeries> {
        let times: Vec<f64> = self.times.iter().map(|&t| t - origin).collect();
        let types: Vec<u32> = self.directions.iter().map(|&d| if d > 0 { 0 } else { 1 }).collect();
        EventSeries::new(times, types, Some(self.jumps.clone()))
    }

    /// `time,price,direction,jump` CSV.
    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut w = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
        w.write_record(["time", "price", "direction", "jump"])
            .map_err(|e| csv_err(&path, e))?;
        for i in 0..self.len() {
            w.write_record([
                format!("{:.9}", self.times[i]),
                format!("{}", self.prices[i]),
                self.directions[i].to_string(),
                format!("{}", self.jumps[i]),
            ])
            .map_err(|e| csv_err(&path, e))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(&path)
            .map_err(|e| csv_err(&path, e))?;
        let mut out = PriceEventSeries {
            times: Vec::new(),
            prices: Vec::new(),
            directions: Vec::new(),
            jumps: Vec::new(),
        };
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| csv_err(&path, e))?;
            out.times.push(parse_field(&path, i, rec.get(0))?);
            out.prices.push(parse_field(&path, i, rec.get(1))?);
            out.directions.push(parse_field(&path, i, rec.get(2))?);
            out.jumps.push(parse_field(&path, i, rec.get(3))?);
        }
        Ok(out)
    }
}

/// Counters from quote cleaning.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualityReport {
    pub crossed_skipped: usize,
    pub duplicates_collapsed: usize,
}

/// Extract mid-price change events strictly inside `(window.0, window.1)`.
///
/// Quotes at the same timestamp collapse to the last one; crossed records
/// (ask below bid) are skipped and counted. The reference mid at the window
/// start is the last valid quote at or before `window.0`; if none exists,
/// the first in-window quote seeds the reference without emitting an event.
pub fn midprice_events(
    quotes: &QuoteSeries,
    window: (f64, f64),
) -> Result<(PriceEventSeries, QualityReport)> {
    let (t0, t1) = window;
    if !(t0 < t1) {
        return Err(Error::InvalidParameter(format!(
            "window start {t0} must precede window end {t1}"
        )));
    }
    if quotes.is_empty() {
        return Err(Error::InvalidSeries("empty quote tape".into()));
    }
    let mut report = QualityReport::default();
    let mut out = PriceEventSeries {
        times: Vec::new(),
        prices: Vec::new(),
        directions: Vec::new(),
        jumps: Vec::new(),
    };
    let mut prev_mid: Option<f64> = None;
    let n = quotes.len();
    let mut i = 0;
    while i < n {
        // collapse equal timestamps, last record wins
        let t = quotes.times[i];
        let mut j = i;
        while j + 1 < n && quotes.times[j + 1] == t {
            j += 1;
        }
        report.duplicates_collapsed += j - i;
        let (bid, ask) = (quotes.bid[j], quotes.ask[j]);
        i = j + 1;
        if ask < bid {
            report.crossed_skipped += 1;
            continue;
        }
        if t >= t1 {
            break;
        }
        let mid = 0.5 * (bid + ask);
        if t <= t0 {
            prev_mid = Some(mid);
            continue;
        }
        match prev_mid {
            Some(p) if mid != p => {
                out.times.push(t);
                out.prices.push(mid);
                out.directions.push(if mid > p { 1 } else { -1 });
                out.jumps.push((mid - p).abs());
                prev_mid = Some(mid);
            }
            Some(_) => {}
            None => prev_mid = Some(mid),
        }
    }
    Ok((out, report))
}

/// Sparse observation: walk grid points `dt, 2 dt, ...`; when the prevailing
/// price at a grid point differs from the last recorded price, record the
/// last change event at or before that grid point, then continue. Output
/// directions and jumps are recomputed from consecutive recorded prices.
pub fn sparsify(events: &PriceEventSeries, dt: f64) -> Result<PriceEventSeries> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let mut out = PriceEventSeries {
        times: Vec::new(),
        prices: Vec::new(),
        directions: Vec::new(),
        jumps: Vec::new(),
    };
    if events.is_empty() {
        return Ok(out);
    }
    let initial = events.initial_price().expect("nonempty");
    let mut last_recorded = initial;
    let last_time = *events.times.last().expect("nonempty");
    let n_grid = (last_time / dt).ceil() as u64;
    // index of the latest event with time <= grid point
    let mut idx: i64 = -1;
    for g in 1..=n_grid {
        let grid_t = g as f64 * dt;
        while (idx + 1) < events.len() as i64 && events.times[(idx + 1) as usize] <= grid_t {
            idx += 1;
        }
        if idx < 0 {
            continue; // no change yet, prevailing price is still the initial
        }
        let prevailing = events.prices[idx as usize];
        if prevailing != last_recorded {
            let t_star = events.times[idx as usize];
            let jump = prevailing - last_recorded;
            out.times.push(t_star);
            out.prices.push(prevailing);
            out.directions.push(if jump > 0.0 { 1 } else { -1 });
            out.jumps.push(jump.abs());
            last_recorded = prevailing;
        }
    }
    Ok(out)
}
