//! File access with hashing, atomic writes and run manifests.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use noisyor::NoisyOrNetwork;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Positive,
    Negative,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to re-run a command: its argument vector, the parsed
/// configuration, seeds, and hashes of what it read and wrote.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub command: String,
    pub argv: Vec<String>,
    pub config: serde_json::Map<String, serde_json::Value>,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
    pub elapsed_ms: f64,
    #[serde(skip)]
    started: Option<Instant>,
}

impl Manifest {
    pub fn start(argv: &[String]) -> Self {
        Manifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: argv.iter().skip(1).take_while(|a| !a.starts_with('-')).cloned().collect::<Vec<_>>().join(" "),
            argv: argv.to_vec(),
            config: Default::default(),
            seeds: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            elapsed_ms: 0.0,
            started: Some(Instant::now()),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }

    pub fn seed(&mut self, name: &str, seed: u64) {
        self.seeds.insert(name.to_string(), seed);
    }

    /// Merges the keys of `value` (an object) into the recorded configuration.
    pub fn config(&mut self, value: serde_json::Value) {
        if let serde_json::Value::Object(map) = value {
            self.config.extend(map);
        }
    }

    pub fn read_text(&mut self, path: &Path) -> Result<String> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.push(FileHash { path: path.display().to_string(), sha256: sha256_hex(&bytes) });
        String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))
    }

    pub fn read_network(&mut self, path: &Path) -> Result<NoisyOrNetwork> {
        let text = self.read_text(path)?;
        NoisyOrNetwork::from_json(&text).with_context(|| format!("parsing network {}", path.display()))
    }

    pub fn write_output(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        write_atomic(path, bytes)?;
        self.outputs.push(FileHash { path: path.display().to_string(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    /// Writes `<first output>.manifest.json`; commands without outputs leave
    /// no manifest.
    pub fn finish(mut self) -> Result<()> {
        let Some(first) = self.outputs.first() else {
            return Ok(());
        };
        let path = PathBuf::from(format!("{}.manifest.json", first.path));
        if let Some(t) = self.started {
            self.elapsed_ms = t.elapsed().as_secs_f64() * 1e3;
        }
        let mut json = serde_json::to_string_pretty(&self)?;
        json.push('\n');
        write_atomic(&path, json.as_bytes())
    }
}

pub fn load_network(path: &Path) -> Result<NoisyOrNetwork> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    NoisyOrNetwork::from_json(&text).with_context(|| format!("parsing network {}", path.display()))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

/// Temp file in the destination directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_known_input() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(sha256_file(&path).unwrap(), sha256_hex(b"two"));
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("o.txt");
        let argv: Vec<String> = ["noisyor", "sample", "--seed", "3"].iter().map(|s| s.to_string()).collect();
        let mut m = Manifest::start(&argv);
        assert_eq!(m.command, "sample");
        m.seed("sampling", 3);
        m.config(serde_json::json!({"count": 10}));
        m.write_output(&out, b"data").unwrap();
        m.finish().unwrap();
        let back = Manifest::load(&dir.path().join("o.txt.manifest.json")).unwrap();
        assert_eq!(back.argv, argv);
        assert_eq!(back.seeds["sampling"], 3);
        assert_eq!(back.config["count"], 10);
        assert_eq!(back.outputs[0].sha256, sha256_hex(b"data"));
    }

    #[test]
    fn manifest_without_outputs_writes_nothing() {
        let m = Manifest::start(&["noisyor".to_string(), "verify".to_string()]);
        m.finish().unwrap();
    }
}
