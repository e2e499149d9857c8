//! On-disk results store: one directory per battery run.
//!
//! ```text
//! <dir>/manifest.jsonl                       run configuration, one record
//! <dir>/cells/<profile>__<inventory>__r<n>.jsonl   one record per cell
//! <dir>/failures.jsonl                       cells that failed in the last run
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub model: String,
    pub backend: String,
    pub pack_id: String,
    pub seed: u64,
    pub replicates: u32,
    pub profiles: Vec<String>,
    pub inventories: Vec<String>,
    pub created_unix_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub model: String,
    pub provider: String,
    pub pack_id: String,
    pub seed: u64,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
}

/// One administered inventory for one `(profile, replicate)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub profile: String,
    pub inventory_id: String,
    pub replicate: u32,
    pub answers: BTreeMap<String, u8>,
    pub scores: BTreeMap<String, f64>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub profile: String,
    pub inventory_id: String,
    pub replicate: u32,
    pub error: String,
}

#[derive(Debug)]
pub struct ResultsStore {
    dir: PathBuf,
    write_lock: Mutex<()>,
}

pub(crate) fn now_ms() -> u128 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> HarnessError + '_ {
    move |e| HarnessError::Io(path.display().to_string(), e)
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

impl ResultsStore {
    /// Opens or creates the store at `dir`.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let dir = dir.as_ref().to_path_buf();
        let cells = dir.join("cells");
        fs::create_dir_all(&cells).map_err(io_err(&cells))?;
        Ok(ResultsStore {
            dir,
            write_lock: Mutex::new(()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.dir.join("manifest.jsonl")
    }

    pub fn failures_path(&self) -> PathBuf {
        self.dir.join("failures.jsonl")
    }

    pub fn cell_path(&self, profile: &str, inventory_id: &str, replicate: u32) -> PathBuf {
        self.dir
            .join("cells")
            .join(format!("{}__{}__r{replicate}.jsonl", sanitize(profile), sanitize(inventory_id)))
    }

    pub fn has_cell(&self, profile: &str, inventory_id: &str, replicate: u32) -> bool {
        self.cell_path(profile, inventory_id, replicate).is_file()
    }

    pub fn read_manifest(&self) -> Result<Option<Manifest>, HarnessError> {
        let path = self.manifest_path();
        if !path.is_file() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
        serde_json::from_str(line)
            .map(Some)
            .map_err(|e| HarnessError::Store(format!("{}: {e}", path.display())))
    }

    /// Writes the manifest; an existing one is merged (profiles and
    /// inventories are unioned) after checking the pack and seed still match.
    pub fn write_manifest(&self, m: &Manifest) -> Result<Manifest, HarnessError> {
        let merged = match self.read_manifest()? {
            Some(old) => {
                if old.pack_id != m.pack_id || old.seed != m.seed || old.backend != m.backend {
                    return Err(HarnessError::Store(format!(
                        "store at {} was created with pack `{}`, seed {}, backend `{}`",
                        self.dir.display(),
                        old.pack_id,
                        old.seed,
                        old.backend
                    )));
                }
                let mut merged = old.clone();
                for p in &m.profiles {
                    if !merged.profiles.contains(p) {
                        merged.profiles.push(p.clone());
                    }
                }
                for i in &m.inventories {
                    if !merged.inventories.contains(i) {
                        merged.inventories.push(i.clone());
                    }
                }
                merged.replicates = merged.replicates.max(m.replicates);
                merged
            }
            None => m.clone(),
        };
        self.write_atomic(&self.manifest_path(), &[&merged])?;
        Ok(merged)
    }

    pub fn write_cell(&self, cell: &CellRecord) -> Result<(), HarnessError> {
        self.write_atomic(&self.cell_path(&cell.profile, &cell.inventory_id, cell.replicate), &[cell])
    }

    pub fn write_failures(&self, failures: &[CellFailure]) -> Result<(), HarnessError> {
        let refs: Vec<&CellFailure> = failures.iter().collect();
        self.write_atomic(&self.failures_path(), &refs)
    }

    fn write_atomic<T: Serialize>(&self, path: &Path, records: &[&T]) -> Result<(), HarnessError> {
        let _guard = self.write_lock.lock().unwrap_or_else(|p| p.into_inner());
        let tmp = path.with_extension("jsonl.tmp");
        {
            let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
            for r in records {
                let line = serde_json::to_string(r).map_err(|e| HarnessError::Store(e.to_string()))?;
                writeln!(f, "{line}").map_err(io_err(&tmp))?;
            }
        }
        fs::rename(&tmp, path).map_err(io_err(path))
    }

    /// All cells, sorted by (profile, inventory, replicate).
    pub fn load_cells(&self) -> Result<Vec<CellRecord>, HarnessError> {
        let dir = self.dir.join("cells");
        let mut out = Vec::new();
        for entry in fs::read_dir(&dir).map_err(io_err(&dir))? {
            let path = entry.map_err(io_err(&dir))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("jsonl") {
                continue;
            }
            let f = fs::File::open(&path).map_err(io_err(&path))?;
            for line in BufReader::new(f).lines() {
                let line = line.map_err(io_err(&path))?;
                if line.trim().is_empty() {
                    continue;
                }
                let cell: CellRecord = serde_json::from_str(&line)
                    .map_err(|e| HarnessError::Store(format!("{}: {e}", path.display())))?;
                out.push(cell);
            }
        }
        out.sort_by(|a, b| {
            (a.profile.as_str(), a.inventory_id.as_str(), a.replicate).cmp(&(
                b.profile.as_str(),
                b.inventory_id.as_str(),
                b.replicate,
            ))
        });
        Ok(out)
    }

    pub fn load_failures(&self) -> Result<Vec<CellFailure>, HarnessError> {
        let path = self.failures_path();
        if !path.is_file() {
            return Ok(Vec::new());
        }
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| HarnessError::Store(e.to_string())))
            .collect()
    }
}
