//! CSV ingestion with a declared column mapping. Column headers carry unit
//! suffixes that are converted to SI on load; errors name the offending line
//! and column.

use anyhow::{anyhow, bail, Context, Result};
use std::path::Path;

use kramers::fit::models::LineObservation;
use kramers::fit::Observation;
use kramers::optical::Branch;

use crate::quantity::{column_unit, Dimension};

/// A parsed CSV table: headers plus raw string cells.
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// 1-based file line of each row, for error reporting.
    pub lines: Vec<usize>,
}

pub fn read_table(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let mut headers = Vec::new();
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let cells: Vec<String> = trimmed.split(',').map(|c| c.trim().to_string()).collect();
        if headers.is_empty() {
            headers = cells;
            continue;
        }
        if cells.len() != headers.len() {
            bail!(
                "{}: line {}: expected {} columns, found {}",
                path.display(),
                idx + 1,
                headers.len(),
                cells.len()
            );
        }
        rows.push(cells);
        lines.push(idx + 1);
    }
    if headers.is_empty() {
        bail!("{}: empty input (no header row)", path.display());
    }
    if rows.is_empty() {
        bail!("{}: empty input (no data rows)", path.display());
    }
    Ok(Table {
        headers,
        rows,
        lines,
    })
}

impl Table {
    /// Resolve a column by name or 0-based index.
    pub fn column(&self, spec: &str) -> Result<usize> {
        if let Ok(index) = spec.parse::<usize>() {
            if index < self.headers.len() {
                return Ok(index);
            }
            bail!("column index {index} out of range (have {})", self.headers.len());
        }
        self.headers
            .iter()
            .position(|h| h == spec)
            .ok_or_else(|| {
                anyhow!(
                    "no column named {spec:?}; available: {}",
                    self.headers.join(", ")
                )
            })
    }

    /// Numeric column converted to SI through its header unit suffix. A
    /// non-dimensionless `expected` demands a matching suffix on the header;
    /// dimensionless columns are read verbatim.
    pub fn numeric_column(&self, spec: &str, expected: Dimension) -> Result<Vec<f64>> {
        let col = self.column(spec)?;
        let header = &self.headers[col];
        let (dimension, factor) = if expected == Dimension::Dimensionless {
            (Dimension::Dimensionless, 1.0)
        } else {
            column_unit(header)
        };
        if expected != Dimension::Dimensionless && dimension != expected {
            bail!(
                "column {header:?} must carry a {expected:?} unit suffix (e.g. field_mT, offset_GHz, time_ms)"
            );
        }
        self.rows
            .iter()
            .zip(&self.lines)
            .map(|(row, line)| {
                row[col].parse::<f64>().map(|v| v * factor).map_err(|_| {
                    anyhow!(
                        "line {line}, column {header:?}: cannot parse {:?} as a number",
                        row[col]
                    )
                })
            })
            .collect()
    }

    pub fn text_column(&self, spec: &str) -> Result<Vec<String>> {
        let col = self.column(spec)?;
        Ok(self.rows.iter().map(|r| r[col].clone()).collect())
    }
}

/// Column mapping for plain (x, y[, sigma]) observations.
pub struct XyMapping<'a> {
    pub x: &'a str,
    pub x_dimension: Dimension,
    pub y: &'a str,
    pub y_dimension: Dimension,
    pub sigma: Option<&'a str>,
}

pub fn read_observations(path: &Path, mapping: &XyMapping) -> Result<Vec<Observation>> {
    let table = read_table(path)?;
    let xs = table.numeric_column(mapping.x, mapping.x_dimension)?;
    let ys = table.numeric_column(mapping.y, mapping.y_dimension)?;
    let sigmas = match mapping.sigma {
        Some(spec) => table.numeric_column(spec, mapping.y_dimension)?,
        None => vec![1.0; xs.len()],
    };
    Ok(xs
        .into_iter()
        .zip(ys)
        .zip(sigmas)
        .map(|((x, y), sigma)| Observation::with_sigma(x, y, sigma))
        .collect())
}

fn parse_branch(text: &str, line: usize, column: &str) -> Result<Branch> {
    match text.to_ascii_lowercase().as_str() {
        "upper" | "+" | "+1" => Ok(Branch::Upper),
        "lower" | "-" | "-1" => Ok(Branch::Lower),
        other => bail!(
            "line {line}, column {column:?}: branch must be upper/lower, got {other:?}"
        ),
    }
}

/// Read branch-tagged line observations: x column (field or angle), a
/// frequency offset column, and ground/excited branch columns.
pub fn read_line_observations(
    path: &Path,
    x_spec: &str,
    x_dimension: Dimension,
) -> Result<Vec<LineObservation>> {
    let table = read_table(path)?;
    let xs = table.numeric_column(x_spec, x_dimension)?;
    let offsets = table.numeric_column("offset_GHz", Dimension::Frequency).or_else(|_| {
        table.numeric_column("offset_Hz", Dimension::Frequency)
    })?;
    let ground = table.text_column("ground_branch")?;
    let excited = table.text_column("excited_branch")?;
    let sigma = table
        .numeric_column("sigma_MHz", Dimension::Frequency)
        .unwrap_or_else(|_| vec![1.0; xs.len()]);
    let mut out = Vec::with_capacity(xs.len());
    for k in 0..xs.len() {
        out.push(LineObservation {
            x: xs[k],
            frequency: offsets[k],
            sigma: sigma[k],
            ground_branch: parse_branch(&ground[k], table.lines[k], "ground_branch")?,
            excited_branch: parse_branch(&excited[k], table.lines[k], "excited_branch")?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("kramers-ingest-tests");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(format!("t{}.csv", rand::random::<u64>()));
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn observations_with_unit_scaling() {
        let path = write_temp("field_mT,shift_Hz\n44.5,120.5\n45.0,130.25\n");
        let obs = read_observations(
            &path,
            &XyMapping {
                x: "field_mT",
                x_dimension: Dimension::Field,
                y: "shift_Hz",
                y_dimension: Dimension::Frequency,
                sigma: None,
            },
        )
        .unwrap();
        assert_eq!(obs.len(), 2);
        assert!((obs[0].x - 0.0445).abs() < 1e-12);
        assert!((obs[1].y - 130.25).abs() < 1e-12);
    }

    #[test]
    fn bad_cell_names_line_and_column() {
        let path = write_temp("field_mT,shift_Hz\n44.5,120.5\n44.6,oops\n");
        let err = read_observations(
            &path,
            &XyMapping {
                x: "field_mT",
                x_dimension: Dimension::Field,
                y: "shift_Hz",
                y_dimension: Dimension::Frequency,
                sigma: None,
            },
        )
        .unwrap_err();
        let text = err.to_string();
        assert!(text.contains("line 3"), "{text}");
        assert!(text.contains("shift_Hz"), "{text}");
    }

    #[test]
    fn missing_unit_suffix_rejected() {
        let path = write_temp("field,shift_Hz\n44.5,120.5\n");
        let err = read_observations(
            &path,
            &XyMapping {
                x: "field",
                x_dimension: Dimension::Field,
                y: "shift_Hz",
                y_dimension: Dimension::Frequency,
                sigma: None,
            },
        )
        .unwrap_err();
        assert!(err.to_string().contains("unit suffix"), "{err}");
    }

    #[test]
    fn empty_files_rejected() {
        let path = write_temp("");
        assert!(read_table(&path).is_err());
        let path = write_temp("a,b\n");
        assert!(read_table(&path).is_err());
    }

    #[test]
    fn branch_tagged_lines() {
        let path = write_temp(
            "field_mT,offset_GHz,ground_branch,excited_branch\n75,1.86,lower,upper\n75,-1.86,upper,lower\n",
        );
        let obs = read_line_observations(&path, "field_mT", Dimension::Field).unwrap();
        assert_eq!(obs.len(), 2);
        assert_eq!(obs[0].ground_branch, Branch::Lower);
        assert!((obs[0].frequency - 1.86e9).abs() < 1.0);
    }
}
