//! Shared JSON encoding of complex matrices: row-major nested arrays of
//! `[re, im]` pairs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};

pub type Entries = Vec<Vec<[f64; 2]>>;

pub fn to_entries(m: &CMatrix) -> Entries {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn from_entries(entries: &Entries) -> Result<CMatrix> {
    let rows = entries.len();
    let cols = entries.first().map_or(0, Vec::len);
    if entries.iter().any(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch("ragged matrix rows".into()));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| {
        let [re, im] = entries[i][j];
        c(re, im)
    }))
}

/// Wire form of a square matrix: `{"dim": n, "entries": [[[re, im], ...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Entries,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        Self {
            dim: m.nrows(),
            entries: to_entries(m),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let m = from_entries(&self.entries)?;
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "declared dim {} but entries are {}x{}",
                self.dim,
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(m)
    }
}
