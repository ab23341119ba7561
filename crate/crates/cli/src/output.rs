//! CSV and JSON serialisation of trajectory tables.

use std::io::Write;

use serde_json::{Map, Value};

use crate::error::CliError;
use crate::scenario::{Row, SweepTable, HEADER};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// 17 significant digits, enough to round-trip any `f64`. Negative zero is
/// written as zero.
pub fn number(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

pub fn write_rows_csv<W: Write>(out: W, rows: &[Row]) -> Result<(), CliError> {
    let mut w = csv_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record(r.values().map(number))?;
    }
    w.flush()?;
    Ok(())
}

/// Long format: the swept value leads each row.
pub fn write_sweep_csv<W: Write>(out: W, table: &SweepTable) -> Result<(), CliError> {
    let mut w = csv_writer(out);
    w.write_record(std::iter::once(table.axis.key()).chain(HEADER))?;
    for (x, rows) in &table.blocks {
        for r in rows {
            w.write_record(std::iter::once(number(*x)).chain(r.values().map(number)))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_rows_json<W: Write>(mut out: W, rows: &[Row]) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn write_sweep_json<W: Write>(mut out: W, table: &SweepTable) -> Result<(), CliError> {
    let mut records = Vec::new();
    for (x, rows) in &table.blocks {
        for r in rows {
            let mut obj = Map::new();
            obj.insert(table.axis.key().into(), json_number(*x));
            if let Value::Object(fields) = serde_json::to_value(r)? {
                obj.extend(fields);
            }
            records.push(Value::Object(obj));
        }
    }
    serde_json::to_writer_pretty(&mut out, &records)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// JSON has no infinity; it is written as the string `"inf"`.
pub fn json_number(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else if x == f64::INFINITY {
        Value::from("inf")
    } else {
        Value::Null
    }
}
