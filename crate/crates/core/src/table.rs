//! Tabular results as written by the command-line tool: CSV with a header row
//! and 12 significant digits, or JSON that round-trips exactly.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{BhError, Result};
use crate::experiments::{SweepPoint, TimeSeries};

/// Significant digits of CSV values.
pub const CSV_DIGITS: usize = 12;

/// Named columns of numbers. Undefined values are NaN. JSON writes every
/// non-finite value as `null`, which reads back as NaN.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    #[serde(serialize_with = "rows_out", deserialize_with = "rows_in")]
    pub rows: Vec<Vec<f64>>,
}

impl PartialEq for Table {
    /// Exact comparison in which NaN equals NaN.
    fn eq(&self, other: &Self) -> bool {
        self.columns == other.columns
            && self.rows.len() == other.rows.len()
            && self.rows.iter().zip(&other.rows).all(|(a, b)| {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x == y || (x.is_nan() && y.is_nan()))
            })
    }
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(BhError::InvalidParameter(format!(
                "row has {} values for {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    /// `t` followed by the series columns.
    pub fn from_series(series: &TimeSeries) -> Self {
        let mut columns = vec!["t".to_string()];
        columns.extend(series.names().map(str::to_string));
        let rows = (0..series.len()).map(|i| series.row(i)).collect();
        Self { columns, rows }
    }

    /// One row per sweep point: `u_over_j, t_firstmax, ln_firstmax`.
    pub fn from_sweep(points: &[SweepPoint]) -> Self {
        let columns = ["u_over_j", "t_firstmax", "ln_firstmax"].map(String::from).to_vec();
        let rows = points
            .iter()
            .map(|p| {
                vec![
                    p.u_over_j,
                    p.t_first_max.unwrap_or(f64::NAN),
                    p.ln_first_max.unwrap_or(f64::NAN),
                ]
            })
            .collect();
        Self { columns, rows }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns).map_err(csv_error)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&x| format_value(x))).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let columns = r.headers().map_err(csv_error)?.iter().map(str::to_string).collect();
        let mut table = Self::new(columns);
        for record in r.records() {
            let record = record.map_err(csv_error)?;
            let row = record
                .iter()
                .map(|s| match s {
                    "nan" => Ok(f64::NAN),
                    _ => s.parse::<f64>().map_err(|e| BhError::InvalidParameter(format!("bad value {s:?}: {e}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            table.push(row)?;
        }
        Ok(table)
    }
}

/// A table together with the command and parameters that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    #[serde(flatten)]
    pub table: Table,
}

impl Record {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(json_error)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(json_error)
    }
}

/// `x` with [`CSV_DIGITS`] significant digits, `nan`/`inf`/`-inf` for non-finite values.
pub fn format_value(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", CSV_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent in scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..CSV_DIGITS as i32).contains(&exp) {
        let decimals = (CSV_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn rows_out<S: Serializer>(rows: &[Vec<f64>], s: S) -> std::result::Result<S::Ok, S::Error> {
    let nullable: Vec<Vec<Option<f64>>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x.is_finite().then_some(x)).collect())
        .collect();
    nullable.serialize(s)
}

fn rows_in<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<f64>>, D::Error> {
    let nullable = Vec::<Vec<Option<f64>>>::deserialize(d)?;
    Ok(nullable
        .into_iter()
        .map(|r| r.into_iter().map(|x| x.unwrap_or(f64::NAN)).collect())
        .collect())
}

fn csv_error(e: csv::Error) -> BhError {
    BhError::InvalidParameter(format!("csv: {e}"))
}

fn json_error(e: serde_json::Error) -> BhError {
    BhError::InvalidParameter(format!("json: {e}"))
}
