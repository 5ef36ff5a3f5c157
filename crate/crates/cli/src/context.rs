use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Per-invocation state: output directory, seeds and the manifest record.
pub struct Context {
    out_dir: PathBuf,
    seed: u64,
    subcommand: &'static str,
    args: serde_json::Value,
    seeds: BTreeMap<String, u64>,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'a str,
    seed: u64,
    args: &'a serde_json::Value,
    derived_seeds: &'a BTreeMap<String, u64>,
    inputs: &'a BTreeMap<String, String>,
    outputs: &'a BTreeMap<String, String>,
}

fn sha256_file(path: &Path) -> Result<String> {
    let mut h = Sha256::new();
    let mut f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    std::io::copy(&mut f, &mut h)?;
    Ok(hex::encode(h.finalize()))
}

/// Seed of one randomized operation, from (global seed, subcommand, operation).
pub fn derive_seed(seed: u64, subcommand: &str, operation: &str) -> u64 {
    let digest = Sha256::digest(format!("{seed}/{subcommand}/{operation}").as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

impl Context {
    pub fn new(out_dir: PathBuf, seed: u64, subcommand: &'static str, args: serde_json::Value) -> Result<Self> {
        fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
        Ok(Self {
            out_dir,
            seed,
            subcommand,
            args,
            seeds: BTreeMap::new(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        })
    }

    pub fn seed(&mut self, operation: &str) -> u64 {
        let s = derive_seed(self.seed, self.subcommand, operation);
        self.seeds.insert(operation.to_string(), s);
        s
    }

    pub fn open(&mut self, path: &Path) -> Result<BufReader<File>> {
        self.inputs.insert(path.display().to_string(), sha256_file(path)?);
        Ok(BufReader::new(File::open(path)?))
    }

    fn out_path(&self, name: &Path) -> PathBuf {
        if name.is_absolute() {
            name.to_path_buf()
        } else {
            self.out_dir.join(name)
        }
    }

    /// Writes an output file under the output directory and records its digest.
    pub fn write<F>(&mut self, name: &Path, body: F) -> Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> polarnet::Result<()>,
    {
        let path = self.out_path(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        body(&mut w).with_context(|| format!("writing {}", path.display()))?;
        w.flush()?;
        drop(w);
        self.outputs.insert(name.display().to_string(), sha256_file(&path)?);
        Ok(())
    }

    /// Writes `manifest_<subcommand>.json` next to the outputs.
    pub fn finish(self) -> Result<()> {
        let m = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand: self.subcommand,
            seed: self.seed,
            args: &self.args,
            derived_seeds: &self.seeds,
            inputs: &self.inputs,
            outputs: &self.outputs,
        };
        let path = self.out_dir.join(format!("manifest_{}.json", self.subcommand));
        let mut text = serde_json::to_string_pretty(&m)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}
