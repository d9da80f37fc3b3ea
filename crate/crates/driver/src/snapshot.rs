//! Binary field snapshots: `SQG1`, format version, `n`, then `L, t, γ, κ`
//! and `n²` real-space values, all little-endian.

use std::fs;
use std::path::Path;

use sqg_core::{inverse_transform, Grid, RealField, SolverState};

use crate::error::{DriverError, Result};

pub const MAGIC: [u8; 4] = *b"SQG1";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 4 * 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub n: u32,
    pub length: f64,
    pub t: f64,
    pub gamma: f64,
    pub kappa: f64,
    /// Row-major, `x₂` fastest.
    pub values: Vec<f64>,
}

impl Snapshot {
    pub fn from_state(state: &SolverState) -> Result<Self> {
        let real = inverse_transform(&state.theta)?;
        let grid = real.grid();
        Ok(Self {
            n: grid.n() as u32,
            length: grid.length(),
            t: state.t,
            gamma: state.config.gamma,
            kappa: state.config.kappa,
            values: real.into_values(),
        })
    }

    pub fn field(&self) -> Result<RealField> {
        let grid = Grid::new(self.n as usize, self.length)?;
        Ok(RealField::new(grid, self.values.clone())?)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.values.len());
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&self.n.to_le_bytes());
        for x in [self.length, self.t, self.gamma, self.kappa] {
            out.extend_from_slice(&x.to_le_bytes());
        }
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Decodes a snapshot; `path` only labels errors.
    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let format = |message: String| DriverError::Format {
            path: path.to_path_buf(),
            message,
        };
        if bytes.len() < 4 || bytes[..4] != MAGIC {
            return Err(DriverError::BadMagic(path.to_path_buf()));
        }
        if bytes.len() < HEADER_LEN {
            return Err(format(format!("truncated header ({} bytes)", bytes.len())));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let version = u32_at(4);
        if version != VERSION {
            return Err(format(format!("unsupported format version {version}")));
        }
        let n = u32_at(8);
        let expected = (n as usize).checked_mul(n as usize).and_then(|c| c.checked_mul(8));
        if expected != Some(bytes.len() - HEADER_LEN) {
            return Err(format(format!(
                "payload of {} bytes does not hold {n}² values",
                bytes.len() - HEADER_LEN
            )));
        }
        let values = bytes[HEADER_LEN..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self {
            n,
            length: f64_at(12),
            t: f64_at(20),
            gamma: f64_at(28),
            kappa: f64_at(36),
            values,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| DriverError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| DriverError::io(path, e))?;
        Self::from_bytes(&bytes, path)
    }
}

/// `prefix_<t>.bin` with enough digits to keep sample times distinct.
pub fn file_name(prefix: &str, t: f64) -> String {
    format!("{prefix}_{t:.6}.bin")
}
