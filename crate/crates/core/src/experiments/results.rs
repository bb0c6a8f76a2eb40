//! Sweep results and their long-format CSV files.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::config::SweepAxis;
use super::ExperimentError;
use crate::agents::AgentKind;

/// A maximal surplus at or below this counts as zero.
const ZERO_SURPLUS: f64 = 1e-9;

/// `100 * achieved / maximal`, or 100 when nothing could be earned.
pub fn achieved_percent(achieved: f64, maximal: f64) -> f64 {
    if maximal <= ZERO_SURPLUS {
        100.0
    } else {
        100.0 * achieved / maximal
    }
}

/// Outcome of one agent on one day at one sweep value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub agent: AgentKind,
    pub sweep_value: f64,
    pub day: NaiveDate,
    /// Realized surplus of the submitted group, EUR.
    #[serde(rename = "achieved_eur")]
    pub achieved: f64,
    /// Surplus of the best response to the realized prices, EUR.
    #[serde(rename = "maximal_eur")]
    pub maximal: f64,
    pub percent: f64,
    /// Distance from the scenarios to the realized prices (tightening sweeps).
    #[serde(rename = "d_w")]
    pub distance: Option<f64>,
}

/// A day that could not be evaluated; the sweep carries on without it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayFailure {
    pub agent: AgentKind,
    pub day: NaiveDate,
    pub message: String,
}

/// Mean over days at one sweep value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub agent: AgentKind,
    pub sweep_value: f64,
    pub days: usize,
    pub mean_percent: f64,
    /// Standard error of the mean percent (0 for a single day).
    pub std_error: f64,
    pub mean_d_w: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub records: Vec<SweepRecord>,
    pub failures: Vec<DayFailure>,
}

impl SweepResult {
    /// Sorts records and failures so the output does not depend on the order
    /// in which days finished.
    pub fn new(axis: SweepAxis, mut records: Vec<SweepRecord>, mut failures: Vec<DayFailure>) -> Self {
        records.sort_by(|a, b| {
            a.agent.cmp(&b.agent).then(a.sweep_value.total_cmp(&b.sweep_value)).then(a.day.cmp(&b.day))
        });
        failures.sort_by(|a, b| a.agent.cmp(&b.agent).then(a.day.cmp(&b.day)).then(a.message.cmp(&b.message)));
        Self { axis, records, failures }
    }

    /// Per agent and sweep value, in record order.
    pub fn summary(&self) -> Vec<PointSummary> {
        let mut out: Vec<PointSummary> = Vec::new();
        let mut start = 0;
        while start < self.records.len() {
            let key = (self.records[start].agent, self.records[start].sweep_value);
            let end = start
                + self.records[start..].iter().take_while(|r| (r.agent, r.sweep_value) == key).count();
            let group = &self.records[start..end];
            let n = group.len() as f64;
            let mean = group.iter().map(|r| r.percent).sum::<f64>() / n;
            let std_error = if group.len() > 1 {
                let var = group.iter().map(|r| (r.percent - mean).powi(2)).sum::<f64>() / (n - 1.0);
                (var / n).sqrt()
            } else {
                0.0
            };
            let distances: Option<Vec<f64>> = group.iter().map(|r| r.distance).collect();
            out.push(PointSummary {
                agent: key.0,
                sweep_value: key.1,
                days: group.len(),
                mean_percent: mean,
                std_error,
                mean_d_w: distances.map(|d| d.iter().sum::<f64>() / n),
            });
            start = end;
        }
        out
    }

    pub fn write_records<W: Write>(&self, writer: W) -> Result<(), ExperimentError> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.records {
            w.serialize(r)?;
        }
        if self.records.is_empty() {
            w.write_record(["agent", "sweep_value", "day", "achieved_eur", "maximal_eur", "percent", "d_w"])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_records<R: Read>(reader: R) -> Result<Vec<SweepRecord>, ExperimentError> {
        let mut r = csv::Reader::from_reader(reader);
        Ok(r.deserialize().collect::<Result<_, _>>()?)
    }

    fn write_rows<T: Serialize, W: Write>(rows: &[T], header: &[&str], writer: W) -> Result<(), ExperimentError> {
        let mut w = csv::Writer::from_writer(writer);
        if rows.is_empty() {
            w.write_record(header)?;
        }
        for row in rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// File names used by [`SweepResult::save`] for `axis`.
    pub fn paths(dir: &Path, axis: SweepAxis) -> [PathBuf; 3] {
        let name = axis.name();
        [
            dir.join(format!("{name}_sweep.csv")),
            dir.join(format!("{name}_summary.csv")),
            dir.join(format!("{name}_failures.csv")),
        ]
    }

    /// Writes the long-format records, the per-point summary and the failures
    /// into `dir`, returning the three paths.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<[PathBuf; 3], ExperimentError> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let paths = Self::paths(dir, self.axis);
        self.write_records(std::fs::File::create(&paths[0])?)?;
        Self::write_rows(
            &self.summary(),
            &["agent", "sweep_value", "days", "mean_percent", "std_error", "mean_d_w"],
            std::fs::File::create(&paths[1])?,
        )?;
        Self::write_rows(&self.failures, &["agent", "day", "message"], std::fs::File::create(&paths[2])?)?;
        Ok(paths)
    }

    /// Reads back what [`SweepResult::save`] wrote.
    pub fn load(dir: impl AsRef<Path>, axis: SweepAxis) -> Result<Self, ExperimentError> {
        let paths = Self::paths(dir.as_ref(), axis);
        let records = Self::read_records(std::fs::File::open(&paths[0])?)?;
        let failures = csv::Reader::from_reader(std::fs::File::open(&paths[2])?)
            .deserialize()
            .collect::<Result<_, _>>()?;
        Ok(Self { axis, records, failures })
    }
}
