//! Daily price history and its `date,h01..hNN` CSV form.

use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{invalid, ScenarioError};

/// Ordered daily price vectors (EUR/MWh), one per calendar date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceHistory {
    dates: Vec<NaiveDate>,
    prices: Vec<Vec<f64>>,
}

impl PriceHistory {
    pub fn new(dates: Vec<NaiveDate>, prices: Vec<Vec<f64>>) -> Result<Self, ScenarioError> {
        if dates.len() != prices.len() {
            return Err(invalid(format!("{} dates but {} price rows", dates.len(), prices.len())));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("dates must be strictly increasing"));
        }
        if let Some(first) = prices.first() {
            let periods = first.len();
            if periods == 0 {
                return Err(invalid("each day needs at least one period"));
            }
            for (d, row) in prices.iter().enumerate() {
                if row.len() != periods {
                    return Err(invalid(format!("{} has {} periods, expected {periods}", dates[d], row.len())));
                }
                if row.iter().any(|p| !p.is_finite()) {
                    return Err(invalid(format!("{} contains a non-finite price", dates[d])));
                }
            }
        }
        Ok(Self { dates, prices })
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Periods per day (0 for an empty history).
    pub fn periods(&self) -> usize {
        self.prices.first().map_or(0, Vec::len)
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn prices(&self) -> &[Vec<f64>] {
        &self.prices
    }

    pub fn day(&self, index: usize) -> (NaiveDate, &[f64]) {
        (self.dates[index], &self.prices[index])
    }

    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        self.dates.binary_search(&date).ok()
    }

    pub fn prices_on(&self, date: NaiveDate) -> Option<&[f64]> {
        self.index_of(date).map(|i| self.prices[i].as_slice())
    }

    /// Number of days strictly before `date`.
    pub fn count_before(&self, date: NaiveDate) -> usize {
        self.dates.partition_point(|d| *d < date)
    }

    /// Days `[start, end)` by position.
    pub fn slice(&self, start: usize, end: usize) -> PriceHistory {
        Self { dates: self.dates[start..end].to_vec(), prices: self.prices[start..end].to_vec() }
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self, ScenarioError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.get(0).map(str::to_ascii_lowercase).as_deref() != Some("date") {
            return Err(invalid("first column must be 'date'"));
        }
        let periods = headers.len() - 1;
        for (h, name) in headers.iter().skip(1).enumerate() {
            let expected = hour_column(h);
            if !name.eq_ignore_ascii_case(&expected) {
                return Err(invalid(format!("column {} is '{name}', expected '{expected}'", h + 2)));
            }
        }
        let mut dates = Vec::new();
        let mut prices = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let raw = rec.get(0).unwrap_or_default();
            let date = NaiveDate::parse_from_str(raw, "%Y-%m-%d")
                .map_err(|e| invalid(format!("row {}: bad date '{raw}': {e}", line + 2)))?;
            if rec.len() != periods + 1 {
                return Err(invalid(format!("row {} has {} price columns, expected {periods}", line + 2, rec.len() - 1)));
            }
            let row = rec
                .iter()
                .skip(1)
                .map(|v| v.parse::<f64>().map_err(|e| invalid(format!("row {}: bad price '{v}': {e}", line + 2))))
                .collect::<Result<Vec<f64>, _>>()?;
            dates.push(date);
            prices.push(row);
        }
        Self::new(dates, prices)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), ScenarioError> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["date".to_string()];
        header.extend((0..self.periods()).map(hour_column));
        wtr.write_record(&header)?;
        for (date, row) in self.dates.iter().zip(&self.prices) {
            let mut rec = vec![date.format("%Y-%m-%d").to_string()];
            // `{}` on f64 prints the shortest representation that parses back exactly
            rec.extend(row.iter().map(|p| format!("{p}")));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ScenarioError> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// `h01`, `h02`, ... for zero-based period `h`.
pub(crate) fn hour_column(h: usize) -> String {
    format!("h{:02}", h + 1)
}
