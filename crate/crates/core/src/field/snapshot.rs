//! Field snapshot files: one JSON header line, then the interior node values
//! as little-endian `f64` in row-major node order, components innermost.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{Grid, VectorField};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const SNAPSHOT_FORMAT: &str = "plap-field-v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotHeader {
    pub format: String,
    pub m: usize,
    pub n: usize,
    #[serde(rename = "N")]
    pub components: usize,
    pub tau: f64,
    pub step: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tool_version: Option<String>,
}

impl SnapshotHeader {
    pub fn for_field<T: Real>(u: &VectorField<T>, tau: f64, step: usize) -> Self {
        Self {
            format: SNAPSHOT_FORMAT.to_string(),
            m: u.grid().m(),
            n: u.grid().n(),
            components: u.components(),
            tau,
            step,
            config_hash: None,
            tool_version: None,
        }
    }
}

pub fn write_snapshot<T: Real, W: Write>(mut w: W, header: &SnapshotHeader, u: &VectorField<T>) -> Result<()> {
    if header.m != u.grid().m() || header.n != u.grid().n() || header.components != u.components() {
        return Err(Error::Shape("snapshot header does not describe the field".into()));
    }
    let line = serde_json::to_string(header).map_err(|e| Error::Snapshot(e.to_string()))?;
    w.write_all(line.as_bytes())?;
    w.write_all(b"\n")?;
    let mut bytes = Vec::with_capacity(u.values().len() * 8);
    for v in u.values() {
        bytes.extend_from_slice(&v.as_f64().to_le_bytes());
    }
    w.write_all(&bytes)?;
    Ok(())
}

pub fn read_snapshot<R: BufRead>(mut r: R) -> Result<(SnapshotHeader, VectorField<f64>)> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: SnapshotHeader =
        serde_json::from_str(line.trim_end()).map_err(|e| Error::Snapshot(format!("header: {e}")))?;
    if header.format != SNAPSHOT_FORMAT {
        return Err(Error::Snapshot(format!("unknown format {:?}", header.format)));
    }
    let grid = Grid::new(header.n, header.m)?;
    let count = grid.nodes() * header.components;
    let mut bytes = Vec::with_capacity(count * 8);
    r.read_to_end(&mut bytes)?;
    if bytes.len() != count * 8 {
        return Err(Error::Snapshot(format!("expected {} payload bytes, found {}", count * 8, bytes.len())));
    }
    let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
    let u = VectorField::from_values(grid, header.components, values)?;
    Ok((header, u))
}
