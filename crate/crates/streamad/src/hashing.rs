//! Jenkins one-at-a-time hash and the sliding-window count tables
//! (histogram and count-min sketch) shared by all detectors.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Jenkins one-at-a-time hash over signed 32-bit key elements, all updates in
/// 32-bit unsigned wrapping arithmetic. The caller applies any modulo
/// reduction.
pub fn jenkins_hash(key: &[i32], seed: u32) -> Result<u32> {
    if key.is_empty() {
        return Err(Error::EmptyHashKey);
    }
    let mut h = seed;
    for &e in key {
        h = h.wrapping_add(e as u32);
        h = h.wrapping_add(h << 10);
        h ^= h >> 6;
    }
    h = h.wrapping_add(h << 3);
    h ^= h >> 11;
    h = h.wrapping_add(h << 15);
    Ok(h)
}

/// A w x columns count table over a sliding window of the last `window_len`
/// admitted samples. A ring buffer records, per admitted sample, the column
/// touched in each row, so expiry decrements exactly the cells that sample
/// incremented.
#[derive(Debug, Clone)]
pub struct SlidingCountTable {
    rows: usize,
    columns: usize,
    window_len: usize,
    counts: Vec<Vec<u32>>,
    ring: VecDeque<Vec<usize>>,
}

impl SlidingCountTable {
    pub fn new(rows: usize, columns: usize, window_len: usize) -> Result<Self> {
        if rows == 0 || columns == 0 || window_len == 0 {
            return Err(Error::InvalidParameter(
                "table rows, columns and window length must be positive".into(),
            ));
        }
        Ok(SlidingCountTable {
            rows,
            columns,
            window_len,
            counts: vec![vec![0; columns]; rows],
            ring: VecDeque::with_capacity(window_len),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    /// Number of samples currently inside the window.
    pub fn occupancy(&self) -> usize {
        self.ring.len()
    }

    fn check_cols(&self, cols: &[usize]) -> Result<()> {
        if cols.len() != self.rows {
            return Err(Error::RowCountMismatch {
                expected: self.rows,
                got: cols.len(),
            });
        }
        for &c in cols {
            if c >= self.columns {
                return Err(Error::ColumnIndexOutOfRange {
                    index: c,
                    columns: self.columns,
                });
            }
        }
        Ok(())
    }

    /// Admit one sample. The oldest sample is expired first when the window
    /// is full, then each row's count is read *before* its increment
    /// (read-then-update: a sample never counts itself).
    pub fn admit(&mut self, cols: &[usize]) -> Result<Vec<u32>> {
        self.check_cols(cols)?;
        if self.ring.len() == self.window_len {
            let old = self.ring.pop_front().expect("non-empty ring");
            for (row, &c) in old.iter().enumerate() {
                self.counts[row][c] -= 1;
            }
        }
        let mut before = Vec::with_capacity(self.rows);
        for (row, &c) in cols.iter().enumerate() {
            before.push(self.counts[row][c]);
            self.counts[row][c] += 1;
        }
        self.ring.push_back(cols.to_vec());
        Ok(before)
    }

    /// Minimum over rows of the counts at the given columns; does not mutate.
    pub fn query_min(&self, cols: &[usize]) -> Result<u32> {
        self.check_cols(cols)?;
        Ok(cols
            .iter()
            .enumerate()
            .map(|(row, &c)| self.counts[row][c])
            .min()
            .unwrap_or(0))
    }

    pub fn reset(&mut self) {
        for row in &mut self.counts {
            row.iter_mut().for_each(|c| *c = 0);
        }
        self.ring.clear();
    }
}
