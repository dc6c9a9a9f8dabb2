//! Finite point sets in the closed unit cube.

use crate::error::{Error, Result};

/// An `n`-point design in `[0, 1]^d`, stored row-major (one point per row).
///
/// Coordinates exactly 0 or 1 are accepted: stratified and digital
/// generators can touch the cube boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    data: Vec<f64>,
    n: usize,
    d: usize,
}

impl DesignMatrix {
    /// Builds a design from a flat row-major buffer of `n * d` coordinates.
    pub fn new(data: Vec<f64>, n: usize, d: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyDesign);
        }
        if d == 0 {
            return Err(Error::EmptyDimension);
        }
        if data.len() != n * d {
            return Err(Error::RaggedRow {
                row: data.len() / d.max(1),
                got: data.len() % d.max(1),
                expected: d,
            });
        }
        for (idx, &value) in data.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::CoordinateOutOfRange {
                    row: idx / d,
                    col: idx % d,
                    value,
                });
            }
        }
        Ok(Self { data, n, d })
    }

    /// Builds a design from one `Vec` per point.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDesign);
        }
        let d = rows[0].len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::RaggedRow {
                    row: i,
                    got: row.len(),
                    expected: d,
                });
            }
        }
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::new(data, rows.len(), d)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// The `i`-th point as a coordinate slice.
    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}
