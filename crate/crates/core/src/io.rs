//! Output files: CSV tables, key-sorted JSON, plain PGM heatmaps and the run
//! manifest.
//!
//! Numbers are written with 17 significant digits and `'\n'` line endings so
//! that identical computations produce byte-identical files.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::density::DensityField;
use crate::error::Result;

/// Shortest format that round-trips every `f64`: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a CSV file with a single header row.
pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: AsRef<[String]>,
{
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        writeln!(w, "{}", row.as_ref().join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty-printed JSON with object keys in sorted order.
pub fn to_sorted_json<T: Serialize>(value: &T) -> Result<String> {
    // serde_json's map is ordered by key, so a round trip through `Value` sorts
    let v = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_sorted_json(value)?)?;
    Ok(())
}

/// Plain (P2) 16-bit PGM of a density field, imaginary axis pointing up.
///
/// Masked values are scaled linearly onto `0..=65535`; unmasked cells are 0.
pub fn pgm_string(field: &DensityField) -> String {
    const MAXVAL: f64 = 65535.0;
    let (nx, ny) = (field.grid.nx, field.grid.ny);
    let range = field.masked_range();
    let level = |k: usize| -> u32 {
        match (field.mask[k], range) {
            (true, Some((lo, hi))) if hi > lo => ((field.values[k] - lo) / (hi - lo) * MAXVAL).round() as u32,
            (true, Some(_)) => MAXVAL as u32,
            _ => 0,
        }
    };
    let mut out = format!("P2\n{nx} {ny}\n{}\n", MAXVAL as u32);
    for iy in (0..ny).rev() {
        let row: Vec<String> = (0..nx).map(|ix| level(iy * nx + ix).to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_pgm(path: &Path, field: &DensityField) -> Result<()> {
    fs::write(path, pgm_string(field))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Runtime {
    pub duration_seconds: f64,
    pub workers: usize,
}

/// What was run and with which parameters. `runtime` varies between runs and
/// is the only part excluded from reproducibility comparisons.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub parameters: serde_json::Value,
    pub runtime: Runtime,
}

impl RunManifest {
    pub fn new<P: Serialize>(command: &str, seed: u64, parameters: &P, duration_seconds: f64, workers: usize) -> Result<Self> {
        Ok(Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            parameters: serde_json::to_value(parameters)?,
            runtime: Runtime { duration_seconds, workers },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{Annulus, GridSpec};
    use std::collections::HashMap;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2f64.sqrt(), 1e-300, 0.0, 123456789.123456789] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn json_keys_are_sorted() {
        let mut m = HashMap::new();
        for k in ["zeta", "alpha", "mid"] {
            m.insert(k, 1);
        }
        let s = to_sorted_json(&m).unwrap();
        let (a, mid, z) = (s.find("alpha").unwrap(), s.find("mid").unwrap(), s.find("zeta").unwrap());
        assert!(a < mid && mid < z);
        assert!(s.ends_with('\n'));
    }

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        write_csv(&p, &["re", "im"], [vec![fmt_f64(1.0), fmt_f64(-0.5)]]).unwrap();
        let s = fs::read_to_string(&p).unwrap();
        assert_eq!(s, "re,im\n1.0000000000000000e0,-5.0000000000000000e-1\n");
    }

    #[test]
    fn pgm_scaling() {
        let field = DensityField {
            grid: GridSpec::square(1.0, 2),
            annulus: Annulus { inner: 0.5, outer: 0.9 },
            values: vec![1.0, 3.0, -1.0, 2.0],
            mask: vec![true, true, false, true],
        };
        let s = pgm_string(&field);
        // top row is iy = 1
        assert_eq!(s, "P2\n2 2\n65535\n0 32768\n0 65535\n");
    }
}
