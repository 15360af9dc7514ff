//! CSV and manifest emission. Floats are written with 17 significant
//! digits so files round-trip doubles losslessly.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::Result;

/// One CSV cell.
pub enum Field {
    F(f64),
    I(i64),
    U(usize),
    S(String),
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::F(v) => write!(f, "{v:.16e}"),
            Field::I(v) => write!(f, "{v}"),
            Field::U(v) => write!(f, "{v}"),
            Field::S(v) => write!(f, "{v}"),
        }
    }
}

pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<Field>>,
{
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let mut first = true;
        for field in row {
            if !first {
                write!(w, ",")?;
            }
            write!(w, "{field}")?;
            first = false;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

/// Run manifest written next to every artifact set.
#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest<C> {
    pub tool: String,
    pub version: String,
    pub config: C,
    pub wall_time_s: f64,
}

pub fn write_manifest<C: Serialize>(path: &Path, config: &C, wall_time_s: f64) -> Result<()> {
    let manifest = Manifest {
        tool: "jcdm".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config,
        wall_time_s,
    };
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, &manifest)
        .map_err(|e| crate::Error::Io(std::io::Error::other(e)))?;
    writeln!(w)?;
    Ok(())
}

pub fn read_manifest_config<C: for<'de> Deserialize<'de>>(path: &Path) -> Result<C> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| crate::Error::InvalidParams(format!("manifest parse: {e}")))?;
    let config = value
        .get("config")
        .ok_or_else(|| crate::Error::InvalidParams("manifest lacks a config field".into()))?;
    serde_json::from_value(config.clone())
        .map_err(|e| crate::Error::InvalidParams(format!("manifest config: {e}")))
}
