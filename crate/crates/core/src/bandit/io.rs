use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::LinearBanditInstance;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `{ "arms": [[...], ...], "theta": [...], "noise_std": r }`
pub fn read_instance_json<T: Scalar>(path: &Path) -> Result<LinearBanditInstance<T>> {
    let reader = BufReader::new(File::open(path)?);
    Ok(serde_json::from_reader(reader)?)
}

pub fn write_instance_json<T: Scalar>(path: &Path, inst: &LinearBanditInstance<T>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, inst)?;
    w.write_all(b"\n")?;
    Ok(())
}

/// Headerless CSV, one arm per row.
pub fn read_arms_csv<T: Scalar>(path: &Path) -> Result<Vec<Vec<T>>> {
    parse_arms_csv(File::open(path)?)
}

pub(crate) fn parse_arms_csv<T: Scalar, R: Read>(input: R) -> Result<Vec<Vec<T>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let mut arms = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map(T::of)
                    .map_err(|_| Error::Parse(format!("row {}: bad number '{f}'", line + 1)))
            })
            .collect::<Result<Vec<T>>>()?;
        if let Some(first) = arms.first() {
            let first: &Vec<T> = first;
            if first.len() != row.len() {
                return Err(Error::Parse(format!(
                    "row {}: expected {} columns, got {}",
                    line + 1,
                    first.len(),
                    row.len()
                )));
            }
        }
        arms.push(row);
    }
    if arms.is_empty() {
        return Err(Error::Parse("arm file has no rows".into()));
    }
    Ok(arms)
}

pub fn write_arms_csv<T: Scalar>(path: &Path, arms: &[Vec<T>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    for a in arms {
        w.write_record(a.iter().map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
