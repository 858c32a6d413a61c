//! CSV interchange for spectra and sweep traces. Every numeric column carries
//! an explicit unit suffix in its header; floats are written in the shortest
//! representation that round-trips exactly.

use std::io::{BufRead, Write};
use thiserror::Error;

use crate::cavity::{SweepProbe, SweepSample};
use crate::optical::spectrum::Spectrum;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected {expected} columns, found {found}")]
    ColumnCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, column {column}: cannot parse {text:?} as a number")]
    BadNumber {
        line: usize,
        column: String,
        text: String,
    },
    #[error("missing `# length_cm=` header")]
    MissingLength,
    #[error("unexpected header {found:?}, expected {expected:?}")]
    BadHeader { found: String, expected: String },
    #[error("file contains no data rows")]
    Empty,
}

/// Write a transmission spectrum:
/// a `# length_cm=` comment, a header, then frequency/transmission rows.
pub fn write_spectrum<W: Write>(mut w: W, spec: &Spectrum) -> Result<(), CsvError> {
    writeln!(w, "# length_cm={}", spec.length_cm)?;
    writeln!(w, "frequency_Hz,transmission")?;
    for (f, t) in spec.frequency.iter().zip(&spec.transmission) {
        writeln!(w, "{f},{t}")?;
    }
    Ok(())
}

/// Read a spectrum written by [`write_spectrum`].
pub fn read_spectrum<R: BufRead>(r: R) -> Result<Spectrum, CsvError> {
    let mut length_cm = None;
    let mut frequency = Vec::new();
    let mut transmission = Vec::new();
    let mut saw_header = false;
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            if let Some(value) = rest.trim().strip_prefix("length_cm=") {
                length_cm = Some(value.trim().parse::<f64>().map_err(|_| {
                    CsvError::BadNumber {
                        line: line_no,
                        column: "length_cm".into(),
                        text: value.into(),
                    }
                })?);
            }
            continue;
        }
        if !saw_header {
            if trimmed != "frequency_Hz,transmission" {
                return Err(CsvError::BadHeader {
                    found: trimmed.into(),
                    expected: "frequency_Hz,transmission".into(),
                });
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 2 {
            return Err(CsvError::ColumnCount {
                line: line_no,
                expected: 2,
                found: fields.len(),
            });
        }
        let parse = |text: &str, column: &str| {
            text.trim().parse::<f64>().map_err(|_| CsvError::BadNumber {
                line: line_no,
                column: column.into(),
                text: text.into(),
            })
        };
        frequency.push(parse(fields[0], "frequency_Hz")?);
        transmission.push(parse(fields[1], "transmission")?);
    }
    if frequency.is_empty() {
        return Err(CsvError::Empty);
    }
    Ok(Spectrum {
        frequency,
        transmission,
        length_cm: length_cm.ok_or(CsvError::MissingLength)?,
    })
}

/// Column header of a sweep value for the given probe.
pub fn sweep_value_header(probe: SweepProbe) -> &'static str {
    match probe {
        SweepProbe::ZeroCrossingShift => "shift_Hz",
        SweepProbe::FixedProbeQuadrature => "quadrature",
    }
}

/// Write an EPR sweep trace: field_T plus the probe value; flagged samples
/// write an empty value cell.
pub fn write_sweep<W: Write>(
    mut w: W,
    samples: &[SweepSample],
    probe: SweepProbe,
) -> Result<(), CsvError> {
    writeln!(w, "field_T,{}", sweep_value_header(probe))?;
    for s in samples {
        if s.flagged {
            writeln!(w, "{},", s.field)?;
        } else {
            writeln!(w, "{},{}", s.field, s.value)?;
        }
    }
    Ok(())
}

/// Read a two-column numeric CSV (header required), returning (x, y) pairs.
/// Rows with an empty second cell are skipped (flagged sweep samples).
pub fn read_xy<R: BufRead>(r: R) -> Result<Vec<(f64, f64)>, CsvError> {
    let mut out = Vec::new();
    let mut saw_header = false;
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !saw_header {
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() < 2 {
            return Err(CsvError::ColumnCount {
                line: line_no,
                expected: 2,
                found: fields.len(),
            });
        }
        if fields[1].trim().is_empty() {
            continue;
        }
        let parse = |text: &str, column: &str| {
            text.trim().parse::<f64>().map_err(|_| CsvError::BadNumber {
                line: line_no,
                column: column.into(),
                text: text.into(),
            })
        };
        out.push((parse(fields[0], "x")?, parse(fields[1], "y")?));
    }
    if out.is_empty() {
        return Err(CsvError::Empty);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optical::spectrum::{linspace, synthesize_transmission, AbsorptionLine};

    #[test]
    fn spectrum_roundtrip_exact() {
        let line = AbsorptionLine::gaussian(1.23456789e9, 184e6, 10e9).unwrap();
        let spec =
            synthesize_transmission(&[line], 0.02, &linspace(0.0, 2.5e9, 101)).unwrap();
        let mut buf = Vec::new();
        write_spectrum(&mut buf, &spec).unwrap();
        let back = read_spectrum(buf.as_slice()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn sweep_roundtrip_with_flagged_rows() {
        let samples = vec![
            SweepSample {
                field: 0.044,
                value: 123.456,
                flagged: false,
            },
            SweepSample {
                field: 0.045,
                value: f64::NAN,
                flagged: true,
            },
            SweepSample {
                field: 0.046,
                value: -98.7,
                flagged: false,
            },
        ];
        let mut buf = Vec::new();
        write_sweep(&mut buf, &samples, SweepProbe::ZeroCrossingShift).unwrap();
        let xy = read_xy(buf.as_slice()).unwrap();
        assert_eq!(xy.len(), 2);
        assert_eq!(xy[0], (0.044, 123.456));
        assert_eq!(xy[1], (0.046, -98.7));
    }

    #[test]
    fn parse_errors_name_line_and_column() {
        let text = "frequency_Hz,transmission\n1.0,0.5\nbogus,0.4\n";
        let text = format!("# length_cm=0.02\n{text}");
        match read_spectrum(text.as_bytes()) {
            Err(CsvError::BadNumber { line, column, .. }) => {
                assert_eq!(line, 4);
                assert_eq!(column, "frequency_Hz");
            }
            other => panic!("{other:?}"),
        }

        match read_spectrum("# length_cm=0.1\nwrong,header\n".as_bytes()) {
            Err(CsvError::BadHeader { .. }) => {}
            other => panic!("{other:?}"),
        }

        match read_xy("x,y\n".as_bytes()) {
            Err(CsvError::Empty) => {}
            other => panic!("{other:?}"),
        }
    }
}
