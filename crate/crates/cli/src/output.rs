//! Writing results as pretty JSON or as a one-row CSV summary.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::Format;

pub fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(File::create(path).with_context(|| format!("cannot write {}", path.display()))?),
        None => Box::new(std::io::stdout().lock()),
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("malformed JSON in {}", path.display()))
}

/// Pretty JSON, or a header plus one row of the top-level fields. Arrays of
/// scalars become space-separated lists; nested objects stay JSON.
pub fn emit<T: Serialize>(value: &T, format: Format, out: Option<&Path>) -> Result<()> {
    let mut w = sink(out)?;
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, value)?;
            writeln!(w)?;
        }
        Format::Csv => {
            let Value::Object(map) = serde_json::to_value(value)? else {
                anyhow::bail!("only objects can be written as CSV");
            };
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record(map.keys())?;
            csv.write_record(map.values().map(cell))?;
            csv.flush()?;
            return Ok(());
        }
    }
    w.flush()?;
    Ok(())
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(items) if items.iter().all(|x| !x.is_array() && !x.is_object()) => {
            items.iter().map(cell).collect::<Vec<_>>().join(" ")
        }
        other => other.to_string(),
    }
}
