//! Data file ingestion: CSV (header row, `x` column required, `weight`
//! column optional) and JSON Lines (one object per line with an `x` field
//! and an optional `weight` field).

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use psi_estimator::WeightedSample;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DataFormat {
    Csv,
    Jsonl,
}

/// How the `--weights` argument was interpreted.
enum WeightsMode {
    /// No argument: use the `weight` column/field when present, else 1.
    Auto,
    /// A comma-separated list of numbers, one per data row.
    Inline(Vec<f64>),
    /// The name of a column (CSV) or field (JSON Lines).
    Column(String),
}

fn weights_mode(arg: Option<&str>) -> WeightsMode {
    let Some(arg) = arg else {
        return WeightsMode::Auto;
    };
    let parsed: Result<Vec<f64>, _> = arg.split(',').map(|t| t.trim().parse()).collect();
    match parsed {
        Ok(values) if !values.is_empty() => WeightsMode::Inline(values),
        _ => WeightsMode::Column(arg.trim().to_owned()),
    }
}

/// Reads observations (and weights) from `path` and validates them as a
/// weighted sample: weights non-negative with at least one positive.
pub fn ingest(
    path: &Path,
    format: DataFormat,
    weights_arg: Option<&str>,
) -> Result<WeightedSample, CliError> {
    let mode = weights_mode(weights_arg);
    let (xs, weights) = match format {
        DataFormat::Csv => read_csv(path, &mode)?,
        DataFormat::Jsonl => read_jsonl(path, &mode)?,
    };
    if xs.is_empty() {
        return Err(CliError::Data(format!("{}: no data rows", path.display())));
    }
    let weights = match mode {
        WeightsMode::Inline(inline) => {
            if inline.len() != xs.len() {
                return Err(CliError::Usage(format!(
                    "--weights lists {} values but the file has {} rows",
                    inline.len(),
                    xs.len()
                )));
            }
            inline
        }
        _ => weights,
    };
    WeightedSample::from_parts(&xs, &weights)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn read_csv(path: &Path, mode: &WeightsMode) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        .clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let x_col = find("x").ok_or_else(|| {
        CliError::Data(format!(
            "{}: missing required column `x` (found: {})",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(", ")
        ))
    })?;
    let weight_col = match mode {
        WeightsMode::Column(name) => Some(find(name).ok_or_else(|| {
            CliError::Usage(format!("{}: no column named `{name}`", path.display()))
        })?),
        WeightsMode::Auto => find("weight"),
        WeightsMode::Inline(_) => None,
    };

    let mut xs = Vec::new();
    let mut weights = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(0, |p| p.line());
        let cell = |col: usize| {
            record.get(col).ok_or_else(|| {
                CliError::Data(format!(
                    "{}: line {line}: row has only {} fields",
                    path.display(),
                    record.len()
                ))
            })
        };
        xs.push(parse_cell(cell(x_col)?, "x", line, path)?);
        weights.push(match weight_col {
            Some(col) => parse_cell(cell(col)?, "weight", line, path)?,
            None => 1.0,
        });
    }
    Ok((xs, weights))
}

fn parse_cell(text: &str, col: &str, line: u64, path: &Path) -> Result<f64, CliError> {
    text.parse().map_err(|_| {
        CliError::Data(format!(
            "{}: line {line}: cannot parse `{text}` in column `{col}` as a number",
            path.display()
        ))
    })
}

fn read_jsonl(path: &Path, mode: &WeightsMode) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let file = File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut xs = Vec::new();
    let mut weights = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let number = i + 1;
        let line =
            line.map_err(|e| CliError::Data(format!("{}: line {number}: {e}", path.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line)
            .map_err(|e| CliError::Data(format!("{}: line {number}: {e}", path.display())))?;
        let object = value.as_object().ok_or_else(|| {
            CliError::Data(format!(
                "{}: line {number}: expected an object with an `x` field",
                path.display()
            ))
        })?;
        let field = |name: &str| object.get(name).and_then(serde_json::Value::as_f64);
        xs.push(field("x").ok_or_else(|| {
            CliError::Data(format!(
                "{}: line {number}: missing numeric field `x`",
                path.display()
            ))
        })?);
        weights.push(match mode {
            WeightsMode::Column(name) => field(name).ok_or_else(|| {
                CliError::Usage(format!(
                    "{}: line {number}: missing numeric field `{name}`",
                    path.display()
                ))
            })?,
            WeightsMode::Auto => match object.get("weight") {
                Some(v) => v.as_f64().ok_or_else(|| {
                    CliError::Data(format!(
                        "{}: line {number}: `weight` is not a number",
                        path.display()
                    ))
                })?,
                None => 1.0,
            },
            WeightsMode::Inline(_) => 1.0,
        });
    }
    Ok((xs, weights))
}
