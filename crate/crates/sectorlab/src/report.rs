//! CSV and key=value artifact writers plus the run manifest.
//!
//! Floats are written with Rust's shortest round-trip formatting, so
//! identical runs produce byte-identical files.

use crate::analysis::{ClassificationReport, RotatingPlaneReport};
use crate::eigen::{Spectrum, SplittingCheck};
use crate::error::Result;
use crate::nonlinear::SolutionRecord;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Collects emitted artifacts and writes `MANIFEST.txt` with one
/// `sha256  relative-path` line per file, sorted by path.
#[derive(Debug, Default)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new() -> Self {
        Manifest::default()
    }

    /// Registers a file that already exists on disk.
    pub fn add(&mut self, dir: &Path, relative: &str) -> Result<()> {
        let bytes = std::fs::read(dir.join(relative))?;
        self.entries
            .push((relative.to_string(), sha256_hex(&bytes)));
        Ok(())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    /// Merges with any manifest already in `dir` (re-emitted paths replace
    /// their old hashes), so several commands can share one output
    /// directory and the manifest still lists every artifact.
    pub fn write(&mut self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("MANIFEST.txt");
        if let Ok(existing) = std::fs::read_to_string(&path) {
            for line in existing.lines() {
                if let Some((hash, rel)) = line.split_once("  ") {
                    if !self.entries.iter().any(|(r, _)| r == rel) {
                        self.entries.push((rel.to_string(), hash.to_string()));
                    }
                }
            }
        }
        self.entries.sort();
        let mut f = std::fs::File::create(&path)?;
        for (rel, hash) in &self.entries {
            writeln!(f, "{hash}  {rel}")?;
        }
        Ok(path)
    }
}

/// Writes a text file and registers it in the manifest.
pub fn emit(dir: &Path, relative: &str, body: &str, manifest: &mut Manifest) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(relative), body)?;
    manifest.add(dir, relative)
}

/// `index,eigenvalue,residual` rows.
pub fn spectrum_csv(spectrum: &Spectrum) -> String {
    let mut s = String::from("index,eigenvalue,residual\n");
    for (i, (l, r)) in spectrum
        .eigenvalues
        .iter()
        .zip(&spectrum.residuals)
        .enumerate()
    {
        s.push_str(&format!("{i},{l},{r}\n"));
    }
    s
}

/// `alpha,min_w,boundary_min` rows of a rotating-plane sweep.
pub fn alpha_sweep_csv(report: &RotatingPlaneReport) -> String {
    let mut s = String::from("alpha,min_w,boundary_min\n");
    for i in 0..report.alphas.len() {
        s.push_str(&format!(
            "{},{},{}\n",
            report.alphas[i], report.min_w[i], report.boundary_min[i]
        ));
    }
    s
}

pub fn kv_text(pairs: &[(&str, String)]) -> String {
    let mut s = String::new();
    for (k, v) in pairs {
        s.push_str(&format!("{k} = {v}\n"));
    }
    s
}

pub fn classification_kv(report: &ClassificationReport) -> String {
    let mut pairs = vec![
        ("verdict", report.verdict.to_string()),
        ("utheta_min", format!("{}", report.utheta_min)),
        ("utheta_max", format!("{}", report.utheta_max)),
        ("lambda1_gamma", format!("{}", report.lambda1_gamma)),
        ("lambda2_gamma", format!("{}", report.lambda2_gamma)),
        ("lambda1_dirichlet", format!("{}", report.lambda1_dirichlet)),
        ("utheta_alignment", format!("{}", report.utheta_alignment)),
        ("morse_index", format!("{}", report.morse.index)),
        ("zero_modes", format!("{}", report.morse.zero_modes)),
        ("zero_tol", format!("{}", report.zero_tol)),
        ("const_tol", format!("{}", report.const_tol)),
    ];
    for (i, note) in report.notes.iter().enumerate() {
        pairs.push(("note", format!("[{i}] {note}")));
    }
    let pairs: Vec<(&str, String)> = pairs;
    kv_text(&pairs)
}

/// Side-car metadata for a solution field file.
pub fn solution_kv(record: &SolutionRecord, extra: &[(&str, String)]) -> String {
    let mut pairs = vec![
        ("solver", record.provenance.solver.clone()),
        ("config_hash", record.provenance.config_hash.clone()),
        ("residual_norm", format!("{}", record.residual_norm)),
        ("energy", format!("{}", record.energy)),
        ("iterations", format!("{}", record.iterations)),
    ];
    if let Some(m) = record.morse {
        pairs.push(("morse_index", format!("{}", m.index)));
        pairs.push(("zero_modes", format!("{}", m.zero_modes)));
        pairs.push(("zero_tol", format!("{}", m.zero_tol)));
    }
    pairs.extend(extra.iter().cloned());
    kv_text(&pairs)
}

/// One `alpha,lhs,lambda1_low,lambda1_high,rhs,slack,holds` row per check.
pub fn splitting_csv(checks: &[SplittingCheck]) -> String {
    let mut s = String::from("alpha,lhs,lambda1_low,lambda1_high,rhs,slack,holds\n");
    for c in checks {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            c.alpha, c.lhs, c.lambda1_low, c.lambda1_high, c.rhs, c.slack, c.holds
        ));
    }
    s
}

/// Reads a key=value side-car back into pairs (round-trip support).
pub fn parse_kv(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| {
            l.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

/// Reads a CSV body back into (header, rows); all emitted CSVs are plain
/// comma-separated with no quoting.
pub fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines
        .next()
        .map(|h| h.split(',').map(str::to_string).collect())
        .unwrap_or_default();
    let rows = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}
