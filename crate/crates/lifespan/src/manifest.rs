//! `run.manifest`: what produced an output directory, in key-value form.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "run.manifest";

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    }))
}

#[derive(Debug, Default)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str, argv: &[String]) -> Self {
        let mut m = Self::default();
        m.push("version", env!("CARGO_PKG_VERSION"));
        m.push("command", command);
        for (i, a) in argv.iter().enumerate() {
            m.push(&format!("argv.{i}"), a);
        }
        m
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn input(&mut self, role: &str, path: &Path) -> CliResult<()> {
        self.push(&format!("input.{role}"), path.display());
        self.push(&format!("sha256.{role}"), sha256_file(path)?);
        Ok(())
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// Original command-line arguments, in order.
    pub fn argv(text: &str) -> Vec<String> {
        let mut args: Vec<(usize, String)> = text
            .lines()
            .filter_map(|l| l.split_once(" = "))
            .filter_map(|(k, v)| Some((k.strip_prefix("argv.")?.parse().ok()?, v.to_string())))
            .collect();
        args.sort_by_key(|(i, _)| *i);
        args.into_iter().map(|(_, v)| v).collect()
    }
}
