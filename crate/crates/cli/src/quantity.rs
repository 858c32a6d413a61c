//! Parsing of unit-suffixed quantities ("48mT", "2.4GHz", "3.34ms"). Bare
//! numbers are rejected wherever a physical dimension is expected.

use anyhow::{bail, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Frequency,
    Field,
    Time,
    Length,
    Temperature,
    Angle,
    Dimensionless,
}

/// (suffix, dimension, factor to SI). Longest suffixes first so "mT" wins
/// over "T".
const UNITS: &[(&str, Dimension, f64)] = &[
    ("THz", Dimension::Frequency, 1e12),
    ("GHz", Dimension::Frequency, 1e9),
    ("MHz", Dimension::Frequency, 1e6),
    ("kHz", Dimension::Frequency, 1e3),
    ("Hz", Dimension::Frequency, 1.0),
    ("uT", Dimension::Field, 1e-6),
    ("mT", Dimension::Field, 1e-3),
    ("T", Dimension::Field, 1.0),
    ("ns", Dimension::Time, 1e-9),
    ("us", Dimension::Time, 1e-6),
    ("ms", Dimension::Time, 1e-3),
    ("s", Dimension::Time, 1.0),
    ("nm", Dimension::Length, 1e-9),
    ("um", Dimension::Length, 1e-6),
    ("mm", Dimension::Length, 1e-3),
    ("cm", Dimension::Length, 1e-2),
    ("m", Dimension::Length, 1.0),
    ("mK", Dimension::Temperature, 1e-3),
    ("K", Dimension::Temperature, 1.0),
    ("deg", Dimension::Angle, std::f64::consts::PI / 180.0),
    ("rad", Dimension::Angle, 1.0),
];

/// Parse `text` as a quantity of the expected dimension, returning its SI
/// value (frequencies in Hz, fields in T, angles in rad, ...).
pub fn parse_quantity(text: &str, expected: Dimension) -> Result<f64> {
    let trimmed = text.trim();
    if expected == Dimension::Dimensionless {
        return Ok(trimmed.parse::<f64>()?);
    }
    for (suffix, dimension, factor) in UNITS {
        if let Some(number) = trimmed.strip_suffix(suffix) {
            let number = number.trim();
            // guard against eating the exponent 'e' or a longer word
            if number.is_empty()
                || number
                    .chars()
                    .last()
                    .is_some_and(|c| !(c.is_ascii_digit() || c == '.'))
            {
                continue;
            }
            if *dimension != expected {
                bail!(
                    "{trimmed:?} has unit {suffix} but a {expected:?} value is expected"
                );
            }
            let value: f64 = number.parse().map_err(|_| {
                anyhow::anyhow!("cannot parse the numeric part of {trimmed:?}")
            })?;
            return Ok(value * factor);
        }
    }
    bail!(
        "{trimmed:?} carries no recognized unit suffix; unit-less numbers are rejected for {expected:?} values"
    )
}

/// Unit dimension implied by a CSV column header suffix, e.g. "field_mT" ->
/// (Field, 1e-3). Headers without a recognized suffix are dimensionless.
pub fn column_unit(header: &str) -> (Dimension, f64) {
    if let Some(pos) = header.rfind('_') {
        let suffix = &header[pos + 1..];
        for (unit, dimension, factor) in UNITS {
            if suffix == *unit {
                return (*dimension, *factor);
            }
        }
    }
    (Dimension::Dimensionless, 1.0)
}
