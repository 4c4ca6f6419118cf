//! Artifact writers. Every file carries the configuration hash and the tool
//! version; nothing time- or host-dependent is written.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use plap_core::field::{write_snapshot, SnapshotHeader, VectorField};

pub const TOOL_VERSION: &str = concat!("plap ", env!("CARGO_PKG_VERSION"));

#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    hash: String,
    written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn new(dir: &Path, hash: &str) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_owned(), hash: hash.to_owned(), written: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn into_written(self) -> Vec<PathBuf> {
        self.written
    }

    fn target(&mut self, name: &str) -> std::io::Result<PathBuf> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        self.written.push(path.clone());
        Ok(path)
    }

    /// JSON object with `config_hash` and `tool_version` added at top level.
    pub fn json<T: Serialize>(&mut self, name: &str, payload: &T) -> std::io::Result<PathBuf> {
        let mut obj = match serde_json::to_value(payload).map_err(std::io::Error::other)? {
            Value::Object(map) => map,
            other => {
                let mut m = Map::new();
                m.insert("data".into(), other);
                m
            }
        };
        obj.insert("config_hash".into(), Value::String(self.hash.clone()));
        obj.insert("tool_version".into(), Value::String(TOOL_VERSION.into()));
        let mut text = serde_json::to_string_pretty(&Value::Object(obj)).map_err(std::io::Error::other)?;
        text.push('\n');
        let path = self.target(name)?;
        fs::write(&path, text)?;
        Ok(path)
    }

    /// CSV preceded by one `#` comment line with the provenance fields.
    pub fn csv(&mut self, name: &str, body: &str) -> std::io::Result<PathBuf> {
        let path = self.target(name)?;
        fs::write(&path, format!("# config_hash={} tool_version={}\n{body}", self.hash, TOOL_VERSION))?;
        Ok(path)
    }

    pub fn field(&mut self, name: &str, u: &VectorField<f64>, tau: f64, step: usize) -> std::io::Result<PathBuf> {
        let path = self.target(name)?;
        let mut header = SnapshotHeader::for_field(u, tau, step);
        header.config_hash = Some(self.hash.clone());
        header.tool_version = Some(TOOL_VERSION.into());
        let w = BufWriter::new(File::create(&path)?);
        write_snapshot(w, &header, u).map_err(std::io::Error::other)?;
        Ok(path)
    }
}

/// Drops the provenance comment line of a CSV written by [`Artifacts::csv`].
pub fn strip_csv_header(text: &str) -> &str {
    match text.strip_prefix('#') {
        Some(rest) => rest.split_once('\n').map(|(_, body)| body).unwrap_or(""),
        None => text,
    }
}
