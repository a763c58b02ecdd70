//! CSV rendering, run manifest and atomic publication of outputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use metrorisk_core::timeseries::io::fmt_f64;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub fn num(v: f64) -> String {
    fmt_f64(v)
}

pub fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Serde name of a unit enum variant.
pub fn label<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

/// In-memory CSV table.
#[derive(Debug, Clone)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self {
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_header(header: Vec<String>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Files produced by one command, keyed by file name.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: BTreeMap<String, Vec<u8>>,
}

impl Artifacts {
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.insert(name.to_string(), bytes);
    }

    pub fn table(&mut self, name: &str, table: &Table) {
        self.add(name, table.to_bytes());
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.get(name).map(Vec::as_slice)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_sha256: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

pub const MANIFEST_FILE: &str = "run_manifest.json";

impl Manifest {
    pub fn new(command: &str, config_sha256: String, inputs: BTreeMap<String, String>, artifacts: &Artifacts) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_sha256,
            inputs,
            outputs: artifacts.files.iter().map(|(k, v)| (k.clone(), sha256_hex(v))).collect(),
        }
    }
}

/// Writes every artifact plus the manifest into a scratch directory under
/// `out`, then renames them into place.
pub fn publish(out: &Path, mut artifacts: Artifacts, manifest: &Manifest) -> Result<Vec<String>, CliError> {
    let mut json = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
    json.push(b'\n');
    artifacts.add(MANIFEST_FILE, json);
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let scratch = out.join(format!(".metrorisk-tmp-{}", std::process::id()));
    if scratch.exists() {
        fs::remove_dir_all(&scratch).map_err(|e| CliError::io(&scratch, e))?;
    }
    let result = (|| {
        fs::create_dir(&scratch).map_err(|e| CliError::io(&scratch, e))?;
        for (name, bytes) in &artifacts.files {
            let p = scratch.join(name);
            fs::write(&p, bytes).map_err(|e| CliError::io(&p, e))?;
        }
        // manifest last, so a present manifest implies a complete set
        let mut names: Vec<&String> = artifacts.files.keys().filter(|n| *n != MANIFEST_FILE).collect();
        names.push(artifacts.files.keys().find(|n| *n == MANIFEST_FILE).expect("manifest added"));
        for name in names {
            let dest = out.join(name);
            fs::rename(scratch.join(name), &dest).map_err(|e| CliError::io(&dest, e))?;
        }
        Ok(())
    })();
    let _ = fs::remove_dir_all(&scratch);
    result.map(|_| artifacts.files.keys().cloned().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_bytes() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "x,y".into()]);
        assert_eq!(t.to_bytes(), b"a,b\n1,\"x,y\"\n");
    }

    #[test]
    fn labels_and_numbers() {
        assert_eq!(label(&metrorisk_core::PairKind::Jump), "jump");
        assert_eq!(opt(None), "");
        assert_eq!(num(0.5), "0.5");
        assert_eq!(num(f64::NAN), "NaN");
    }

    #[test]
    fn publish_writes_all_and_cleans_scratch() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = Artifacts::default();
        a.add("x.csv", b"h\n1\n".to_vec());
        let m = Manifest::new("test", "abc".into(), BTreeMap::new(), &a);
        let names = publish(dir.path(), a, &m).unwrap();
        assert_eq!(names, vec!["run_manifest.json".to_string(), "x.csv".to_string()]);
        let entries: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(entries.len(), 2);
        let back: Manifest = serde_json::from_slice(&fs::read(dir.path().join(MANIFEST_FILE)).unwrap()).unwrap();
        assert_eq!(back.outputs["x.csv"], sha256_hex(b"h\n1\n"));
    }
}
