use rug::Float;

use crate::error::{Error, Result};

/// Dense row-major matrix of MPFR reals at a fixed precision.
#[derive(Debug, Clone, PartialEq)]
pub struct XMatrix {
    rows: usize,
    cols: usize,
    bits: u32,
    entries: Vec<Float>,
}

impl XMatrix {
    /// Builds a matrix entry by entry, rounding each value to `bits`.
    pub fn from_fn<F>(rows: usize, cols: usize, bits: u32, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Float,
    {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let v = f(i, j);
                if !v.is_finite() {
                    return Err(Error::Domain(format!("non-finite matrix entry at ({i}, {j})")));
                }
                entries.push(Float::with_val(bits, v));
            }
        }
        Ok(Self {
            rows,
            cols,
            bits,
            entries,
        })
    }

    pub fn from_f64(rows: usize, cols: usize, bits: u32, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidParams(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Self::from_fn(rows, cols, bits, |i, j| Float::with_val(bits, data[i * cols + j]))
    }

    pub fn identity(n: usize, bits: u32) -> Self {
        Self::from_fn(n, n, bits, |i, j| Float::with_val(bits, (i == j) as u32))
            .expect("identity entries are finite")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Float {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Float) -> Result<()> {
        if !v.is_finite() {
            return Err(Error::Domain(format!("non-finite matrix entry at ({i}, {j})")));
        }
        self.entries[i * self.cols + j] = Float::with_val(self.bits, v);
        Ok(())
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn scale_row(&mut self, i: usize, c: &Float) {
        for j in 0..self.cols {
            self.entries[i * self.cols + j] *= c;
        }
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.entries.iter().map(Float::to_f64).collect()
    }

    pub(crate) fn entries(&self) -> &[Float] {
        &self.entries
    }
}
