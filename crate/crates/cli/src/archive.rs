//! Binary solution archive.
//!
//! Layout, all integers little-endian:
//!
//! | bytes       | content                                           |
//! |-------------|---------------------------------------------------|
//! | 8           | magic `LEOHJB\0\x1a`                              |
//! | 4           | format version (`u32`)                            |
//! | 8           | header length `H` (`u64`)                         |
//! | H           | UTF-8 TOML: `[report]` and the canonical `[config]` |
//! | 8 N         | value function (`f64`, flat grid order)           |
//! | 4 N         | policy (`u32` control indices)                    |
//! | 4           | CRC-32 of every preceding byte                    |
//!
//! `N` is the node count of the echoed grid.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{ConfigFile, ProblemConfig};
use crate::CliError;

pub const MAGIC: [u8; 8] = *b"LEOHJB\0\x1a";
pub const VERSION: u32 = 1;

const PREFIX: usize = 8 + 4 + 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub iterations: usize,
    pub residual: f64,
    pub linear_iterations: usize,
    pub wall_time_s: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    report: Report,
    config: ConfigFile,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolutionArchive {
    pub config: ProblemConfig,
    pub report: Report,
    pub values: Vec<f64>,
    pub policy: Vec<u32>,
}

#[derive(Debug, thiserror::Error)]
pub enum ArchiveError {
    #[error("not a solution archive (bad magic)")]
    BadMagic,
    #[error("file is {0} bytes, too short for an archive")]
    TooShort(usize),
    #[error("checksum mismatch: stored {stored:08x}, computed {computed:08x} (truncated or corrupt)")]
    Checksum { stored: u32, computed: u32 },
    #[error("unsupported format version {0} (expected {VERSION})")]
    Version(u32),
    #[error("header length {0} exceeds the file")]
    HeaderLength(u64),
    #[error("header: {0}")]
    Header(String),
    #[error("payload holds {got} bytes, grid of {nodes} nodes needs {expected}")]
    Payload { nodes: usize, expected: usize, got: usize },
    #[error("{what} has {got} entries, grid has {nodes} nodes")]
    Length { what: &'static str, nodes: usize, got: usize },
}

impl SolutionArchive {
    pub fn to_bytes(&self) -> Result<Vec<u8>, ArchiveError> {
        let n = self.config.grid.len();
        if self.values.len() != n {
            return Err(ArchiveError::Length { what: "value function", nodes: n, got: self.values.len() });
        }
        if self.policy.len() != n {
            return Err(ArchiveError::Length { what: "policy", nodes: n, got: self.policy.len() });
        }
        let header = Header { report: self.report.clone(), config: self.config.file().clone() };
        let header = toml::to_string(&header).map_err(|e| ArchiveError::Header(e.to_string()))?;

        let mut out = Vec::with_capacity(PREFIX + header.len() + 12 * n + 4);
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(header.len() as u64).to_le_bytes());
        out.extend_from_slice(header.as_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for c in &self.policy {
            out.extend_from_slice(&c.to_le_bytes());
        }
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CliError> {
        if bytes.len() < MAGIC.len() || bytes[..8] != MAGIC {
            return Err(ArchiveError::BadMagic.into());
        }
        if bytes.len() < PREFIX + 4 {
            return Err(ArchiveError::TooShort(bytes.len()).into());
        }
        let (body, trailer) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(trailer.try_into().unwrap());
        let computed = crc32fast::hash(body);
        if stored != computed {
            return Err(ArchiveError::Checksum { stored, computed }.into());
        }
        let version = u32::from_le_bytes(body[8..12].try_into().unwrap());
        if version != VERSION {
            return Err(ArchiveError::Version(version).into());
        }
        let header_len = u64::from_le_bytes(body[12..20].try_into().unwrap());
        let rest = &body[PREFIX..];
        if header_len > rest.len() as u64 {
            return Err(ArchiveError::HeaderLength(header_len).into());
        }
        let (header, payload) = rest.split_at(header_len as usize);
        let header = std::str::from_utf8(header).map_err(|e| ArchiveError::Header(e.to_string()))?;
        let header: Header = toml::from_str(header).map_err(|e| ArchiveError::Header(e.to_string()))?;
        let config = ProblemConfig::from_file(header.config)?;

        let n = config.grid.len();
        if payload.len() != 12 * n {
            return Err(ArchiveError::Payload { nodes: n, expected: 12 * n, got: payload.len() }.into());
        }
        let (values, policy) = payload.split_at(8 * n);
        let values = values.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect();
        let policy = policy.chunks_exact(4).map(|b| u32::from_le_bytes(b.try_into().unwrap())).collect();
        Ok(SolutionArchive { config, report: header.report, values, policy })
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let bytes = self.to_bytes()?;
        std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|e| e.with_path(path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn archive() -> SolutionArchive {
        let config = ProblemConfig::parse("[grid]\ncounts = [4, 3, 3, 2]").unwrap();
        let n = config.grid.len();
        SolutionArchive {
            config,
            report: Report { iterations: 3, residual: 1.5e-8, linear_iterations: 40, wall_time_s: 0.25 },
            values: (0..n).map(|i| i as f64 * 1.25 - 3.0).collect(),
            policy: (0..n as u32).map(|i| i % 73).collect(),
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let a = archive();
        let bytes = a.to_bytes().unwrap();
        let b = SolutionArchive::from_bytes(&bytes).unwrap();
        assert_eq!(a, b);
        assert_eq!(b.to_bytes().unwrap(), bytes);
    }

    #[test]
    fn truncation_fails_the_checksum() {
        let bytes = archive().to_bytes().unwrap();
        let err = SolutionArchive::from_bytes(&bytes[..bytes.len() - 9]).unwrap_err();
        assert!(matches!(err, CliError::Archive(ArchiveError::Checksum { .. })), "{err}");
    }

    #[test]
    fn flipped_bit_fails_the_checksum() {
        let mut bytes = archive().to_bytes().unwrap();
        let k = bytes.len() - 30;
        bytes[k] ^= 0x10;
        let err = SolutionArchive::from_bytes(&bytes).unwrap_err();
        assert!(matches!(err, CliError::Archive(ArchiveError::Checksum { .. })));
    }

    #[test]
    fn foreign_file_is_rejected() {
        let err = SolutionArchive::from_bytes(b"t,rho,theta\n1,2,3\n").unwrap_err();
        assert!(matches!(err, CliError::Archive(ArchiveError::BadMagic)));
    }

    #[test]
    fn future_version_is_rejected() {
        let mut bytes = archive().to_bytes().unwrap();
        bytes[8] = 2;
        let body = bytes.len() - 4;
        let crc = crc32fast::hash(&bytes[..body]);
        bytes[body..].copy_from_slice(&crc.to_le_bytes());
        let err = SolutionArchive::from_bytes(&bytes).unwrap_err();
        assert!(matches!(err, CliError::Archive(ArchiveError::Version(2))));
    }

    #[test]
    fn length_mismatch_is_refused_on_save() {
        let mut a = archive();
        a.policy.pop();
        assert!(matches!(a.to_bytes(), Err(ArchiveError::Length { what: "policy", .. })));
    }
}
