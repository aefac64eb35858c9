use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use lozenge::exact::ExactRational;
use serde_json::{json, Value};

use crate::CliResult;

/// Exact rationals travel as strings so nothing is rounded.
pub fn rational_json(r: &ExactRational) -> Value {
    json!({ "num": r.numer().to_string(), "den": r.denom().to_string() })
}

pub fn rational_text(r: &ExactRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn sink(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

/// Writes a header and rows; every field is already formatted.
pub fn write_csv(path: Option<&Path>, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink(path)?);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(path: Option<&Path>, v: &Value) -> CliResult<()> {
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, v)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Shortest text that parses back to the same f64.
pub fn num(v: f64) -> String {
    format!("{v}")
}
