use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Failure;

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Fixed-width float text so reruns produce byte-identical files.
pub fn num(v: f64) -> String {
    format!("{v:.17e}")
}

#[derive(Serialize)]
struct FileEntry {
    name: String,
    sha256: String,
    bytes: usize,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    problem: String,
    problem_sha256: Option<String>,
    settings: &'a BTreeMap<String, String>,
    status: &'a str,
    message: Option<String>,
    files: Vec<FileEntry>,
}

/// Output directory plus a record of every file written to it.
pub struct Artifacts {
    dir: PathBuf,
    files: BTreeMap<String, (String, usize)>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), files: BTreeMap::new() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), Failure> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        self.files.insert(name.to_string(), (sha256_hex(bytes), bytes.len()));
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, v: &T) -> Result<(), Failure> {
        let mut s = serde_json::to_string_pretty(v).map_err(|e| Failure::Io(e.to_string()))?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), Failure> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Failure::Io(e.to_string());
        w.write_record(header).map_err(io)?;
        for r in rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
        self.write(name, &bytes)
    }

    /// Writes manifest.json; it is never listed in itself.
    pub fn finish(
        self,
        command: &str,
        problem: &Path,
        settings: &BTreeMap<String, String>,
        outcome: &Result<(), Failure>,
    ) -> Result<(), Failure> {
        let problem_sha256 = fs::read(problem).ok().map(|b| sha256_hex(&b));
        let (status, message) = match outcome {
            Ok(()) => ("ok", None),
            Err(f) => (f.status(), Some(f.to_string())),
        };
        let files = self
            .files
            .iter()
            .filter(|(n, _)| n.as_str() != "manifest.json")
            .map(|(n, (h, b))| FileEntry { name: n.clone(), sha256: h.clone(), bytes: *b })
            .collect();
        let m = Manifest {
            tool: "borelsum",
            version: env!("CARGO_PKG_VERSION"),
            command,
            problem: problem.display().to_string(),
            problem_sha256,
            settings,
            status,
            message,
            files,
        };
        let mut s = serde_json::to_string_pretty(&m).map_err(|e| Failure::Io(e.to_string()))?;
        s.push('\n');
        let path = self.dir.join("manifest.json");
        fs::write(&path, s).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
    }
}
