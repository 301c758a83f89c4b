//! Output files, hashes and manifests.

use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// Writes `bytes` to `path`, or to standard output when `path` is `None`.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Creates the output directory.
pub fn prepare_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

/// Run metadata written next to the outputs.
pub struct Manifest<'a> {
    pub command: &'a str,
    pub config_path: Option<&'a Path>,
    pub out_dir: &'a Path,
    pub config: &'a RunConfig,
    pub outputs: Vec<PathBuf>,
}

impl Manifest<'_> {
    /// Writes `manifest.toml`: the resolved config plus a `[manifest]` table
    /// with the command, version and a SHA-256 of every output file.
    pub fn write(&self) -> CliResult<()> {
        let mut info = toml::Table::new();
        info.insert("command".into(), self.command.into());
        info.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        info.insert("seed".into(), toml::Value::Integer(self.config.scenario.seed as i64));
        if let Some(p) = self.config_path {
            info.insert("config_path".into(), p.display().to_string().into());
        }
        info.insert("out_dir".into(), self.out_dir.display().to_string().into());
        let mut hashes = toml::Table::new();
        for file in &self.outputs {
            let name = file
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            hashes.insert(name, sha256_file(file)?.into());
        }
        info.insert("sha256".into(), toml::Value::Table(hashes));
        let doc = RunConfig {
            manifest: Some(info),
            ..self.config.clone()
        };
        let path = self.out_dir.join("manifest.toml");
        emit(Some(&path), doc.to_toml()?.as_bytes())
    }
}
