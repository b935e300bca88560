//! Artifact writing: CSV formatting, a staging directory that is renamed into
//! place on success, and a sha256 manifest.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.sha256";

/// Fixed 17-significant-digit scientific notation.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// A CSV table with `# key=value` metadata lines above the header.
#[derive(Debug, Clone, Default)]
pub struct Table {
    meta: Vec<(String, String)>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            meta: Vec::new(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn numbers(&mut self, values: &[f64]) {
        self.row(values.iter().map(|v| num(*v)).collect());
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            // keep every metadata entry on one line
            let v = v.replace('\n', " ");
            let _ = writeln!(s, "# {k}={v}");
        }
        s.push_str(&self.header.join(","));
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest {
        let _ = write!(s, "{b:02x}");
    }
    s
}

/// Files are written under `<dir>/.staging-<pid>` and moved into `dir` by
/// [`OutputSet::commit`]. Dropping an uncommitted set removes the staging area.
#[derive(Debug)]
pub struct OutputSet {
    dir: PathBuf,
    staging: PathBuf,
    files: Vec<String>,
    committed: bool,
}

impl OutputSet {
    pub fn create(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        let staging = dir.join(format!(".staging-{}", std::process::id()));
        if staging.exists() {
            fs::remove_dir_all(&staging)?;
        }
        fs::create_dir(&staging)?;
        Ok(OutputSet {
            dir: dir.to_path_buf(),
            staging,
            files: Vec::new(),
            committed: false,
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> io::Result<()> {
        if name.contains('/') || name.contains('\\') || name == MANIFEST {
            return Err(io::Error::new(
                io::ErrorKind::InvalidInput,
                format!("bad artifact name {name}"),
            ));
        }
        fs::write(self.staging.join(name), contents.as_bytes())?;
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        Ok(())
    }

    /// Writes the manifest and renames every file into the output directory.
    pub fn commit(mut self) -> io::Result<Vec<PathBuf>> {
        self.files.sort();
        let mut manifest = String::new();
        for f in &self.files {
            let bytes = fs::read(self.staging.join(f))?;
            let _ = writeln!(manifest, "{}  {f}", sha256_hex(&bytes));
        }
        fs::write(self.staging.join(MANIFEST), manifest.as_bytes())?;
        let mut out = Vec::with_capacity(self.files.len() + 1);
        // the manifest goes last so it never describes files that are not in place
        for f in self.files.iter().map(String::as_str).chain([MANIFEST]) {
            let dst = self.dir.join(f);
            fs::rename(self.staging.join(f), &dst)?;
            out.push(dst);
        }
        fs::remove_dir(&self.staging)?;
        self.committed = true;
        Ok(out)
    }
}

impl Drop for OutputSet {
    fn drop(&mut self) {
        if !self.committed {
            let _ = fs::remove_dir_all(&self.staging);
        }
    }
}

/// Parses a manifest and checks each hash against the file next to it.
pub fn verify_manifest(dir: &Path) -> io::Result<Vec<(String, bool)>> {
    let text = fs::read_to_string(dir.join(MANIFEST))?;
    let mut out = Vec::new();
    for line in text.lines() {
        let Some((hash, name)) = line.split_once("  ") else {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("bad manifest line: {line}"),
            ));
        };
        let bytes = fs::read(dir.join(name))?;
        out.push((name.to_string(), sha256_hex(&bytes) == hash));
    }
    Ok(out)
}
