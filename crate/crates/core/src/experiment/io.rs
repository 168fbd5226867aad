//! PMF files: a JSON array or a single CSV column.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::profile::Pmf;

pub fn parse_pmf(text: &str) -> Result<Pmf> {
    if text.trim_start().starts_with('[') {
        let values: Vec<f64> = serde_json::from_str(text)?;
        return Pmf::new(values);
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != 1 {
            return Err(Error::MalformedLine {
                line: k + 1,
                reason: format!("expected one column, found {}", record.len()),
            });
        }
        match record[0].parse::<f64>() {
            Ok(x) => values.push(x),
            // a header row is allowed
            Err(_) if k == 0 => {}
            Err(_) => {
                return Err(Error::MalformedLine {
                    line: k + 1,
                    reason: format!("not a number: {:?}", &record[0]),
                })
            }
        }
    }
    Pmf::new(values)
}

pub fn read_pmf(path: &Path) -> Result<Pmf> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_pmf(&text)
}
