//! Run manifests and atomic artifact writing.
//!
//! A manifest is emitted alongside every run's outputs and pins everything
//! needed to reproduce them: the subcommand, the fully resolved
//! configuration, the seed, and the canonical argument list (minus `--out`,
//! so manifests are byte-identical wherever the artifacts land).

use crate::CliError;
use serde::Serialize;
use serde_json::Value;
use std::fs;
use std::path::Path;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub seed: Option<u64>,
    /// Fully resolved configuration after defaults and flag overrides.
    pub resolved: Value,
    /// Canonical arguments that reproduce the run (append `--out <dir>`).
    pub rerun_args: Vec<String>,
    /// Artifact filenames, relative to the output directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(subcommand: &'static str, seed: Option<u64>, resolved: Value) -> Self {
        RunManifest {
            tool: "contactless",
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            seed,
            resolved,
            rerun_args: vec![subcommand.to_string()],
            outputs: Vec::new(),
        }
    }

    pub fn arg(&mut self, flag: &str, value: impl ToString) {
        self.rerun_args.push(format!("--{flag}"));
        self.rerun_args.push(value.to_string());
    }
}

/// Writes every artifact and then the manifest, each atomically
/// (temporary file in the same directory, then rename).
pub struct OutDir<'a> {
    dir: &'a Path,
    manifest: RunManifest,
}

impl<'a> OutDir<'a> {
    pub fn create(dir: &'a Path, manifest: RunManifest) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Validation(format!("cannot create {}: {e}", dir.display())))?;
        Ok(OutDir { dir, manifest })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        write_atomic(self.dir, name, contents)?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text =
            serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
        text.push('\n');
        self.write(name, &text)
    }

    /// Writes `manifest.json` last, so a complete manifest implies complete
    /// artifacts.
    pub fn finish(self) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(&self.manifest)
            .map_err(|e| CliError::Internal(e.to_string()))?;
        text.push('\n');
        write_atomic(self.dir, "manifest.json", &text)
    }
}

fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let tmp = dir.join(format!(".tmp-{name}"));
    let target = dir.join(name);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, &target)?;
    Ok(())
}
