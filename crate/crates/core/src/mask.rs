//! The universal graph representation: a dense 0/1 biadjacency matrix.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Provenance of an edge: which construction pass added it and which of the
/// four diagonal slots (1..=4) it belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeLabel {
    pub pass: u16,
    pub diagonal: u16,
}

impl EdgeLabel {
    pub const fn new(pass: u16, diagonal: u16) -> Self {
        EdgeLabel { pass, diagonal }
    }
}

/// An `rows x cols` 0/1 matrix. Rows are the left part of the bipartite
/// graph, columns the right part.
///
/// Bits are stored row-major in 64-bit words, each row padded to a whole
/// number of words. Labels are optional and only ever attached to set cells.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryMask {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    bits: Vec<u64>,
    labels: Option<BTreeMap<(u32, u32), EdgeLabel>>,
}

impl BinaryMask {
    /// All-zero mask.
    ///
    /// Panics when either side is zero; use [`BinaryMask::try_zeros`] for
    /// untrusted shapes.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::try_zeros(rows, cols).expect("mask sides must be positive")
    }

    pub fn try_zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::arg(format!("mask shape {rows}x{cols} has an empty side")));
        }
        if rows > u32::MAX as usize || cols > u32::MAX as usize {
            return Err(Error::arg(format!("mask shape {rows}x{cols} is too large")));
        }
        let words_per_row = cols.div_ceil(64);
        Ok(BinaryMask {
            rows,
            cols,
            words_per_row,
            bits: vec![0; rows * words_per_row],
            labels: None,
        })
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, true);
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a mask from rows of 0/1 values; any non-zero value is an edge.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(|row| row.as_ref().len()).unwrap_or(0);
        let mut m = Self::try_zeros(r, c)?;
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != c {
                return Err(Error::arg(format!("row {i} has {} entries, expected {c}", row.len())));
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0 {
                    m.set(i, j, true);
                }
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> (usize, u64) {
        debug_assert!(i < self.rows && j < self.cols, "({i}, {j}) outside {}x{}", self.rows, self.cols);
        (i * self.words_per_row + j / 64, 1u64 << (j % 64))
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        let (w, b) = self.index(i, j);
        self.bits[w] & b != 0
    }

    /// Sets or clears a cell. Clearing drops any label on the cell.
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        let (w, b) = self.index(i, j);
        if value {
            self.bits[w] |= b;
        } else {
            self.bits[w] &= !b;
            if let Some(labels) = &mut self.labels {
                labels.remove(&(i as u32, j as u32));
            }
        }
    }

    /// Sets a cell and records its label, enabling labels on the mask if
    /// they were absent.
    pub fn set_labeled(&mut self, i: usize, j: usize, label: EdgeLabel) {
        self.set(i, j, true);
        self.labels
            .get_or_insert_with(BTreeMap::new)
            .insert((i as u32, j as u32), label);
    }

    pub fn label(&self, i: usize, j: usize) -> Option<EdgeLabel> {
        self.labels.as_ref()?.get(&(i as u32, j as u32)).copied()
    }

    pub fn has_labels(&self) -> bool {
        self.labels.is_some()
    }

    pub fn labels(&self) -> impl Iterator<Item = ((usize, usize), EdgeLabel)> + '_ {
        self.labels
            .iter()
            .flat_map(|l| l.iter())
            .map(|(&(i, j), &l)| ((i as usize, j as usize), l))
    }

    /// Turns on an (initially empty) label table.
    pub fn enable_labels(&mut self) {
        self.labels.get_or_insert_with(BTreeMap::new);
    }

    pub fn clear_labels(&mut self) {
        self.labels = None;
    }

    /// Copy with the labels dropped, for comparing the mathematical content.
    pub fn unlabeled(&self) -> Self {
        let mut m = self.clone();
        m.labels = None;
        m
    }

    /// Row `i` as packed words, bit `j % 64` of word `j / 64` is column `j`.
    pub fn row_words(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words_per_row..(i + 1) * self.words_per_row]
    }

    pub fn words_per_row(&self) -> usize {
        self.words_per_row
    }

    pub fn edge_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// `e / (rows * cols)`
    pub fn density(&self) -> Rational {
        Rational::new(self.edge_count() as i64, (self.rows * self.cols) as i64)
    }

    pub fn row_degree(&self, i: usize) -> usize {
        self.row_words(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn row_degrees(&self) -> Vec<usize> {
        (0..self.rows).map(|i| self.row_degree(i)).collect()
    }

    pub fn col_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.cols];
        for (_, j) in self.edges() {
            deg[j] += 1;
        }
        deg
    }

    pub fn min_row_degree(&self) -> usize {
        self.row_degrees().into_iter().min().unwrap_or(0)
    }

    pub fn min_col_degree(&self) -> usize {
        self.col_degrees().into_iter().min().unwrap_or(0)
    }

    /// Set cells in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.rows).flat_map(move |i| {
            self.row_words(i).iter().enumerate().flat_map(move |(w, &word)| {
                let mut word = word;
                std::iter::from_fn(move || {
                    if word == 0 {
                        return None;
                    }
                    let t = word.trailing_zeros() as usize;
                    word &= word - 1;
                    Some((i, w * 64 + t))
                })
            })
        })
    }

    /// Out-neighbours of row `i`.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.cols).filter(|&j| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for (i, j) in self.edges() {
            t.set(j, i, true);
        }
        if let Some(labels) = &self.labels {
            t.labels = Some(labels.iter().map(|(&(i, j), &l)| ((j, i), l)).collect());
        }
        t
    }

    /// `A ⊆ B` over the set cells, labels ignored.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    /// Dense 0/1 rows, mainly for tests and fixtures.
    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) as u8).collect())
            .collect()
    }
}

impl fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryMask {}x{} ({} edges)", self.rows, self.cols, self.edge_count())?;
        for i in 0..self.rows {
            for j in 0..self.cols {
                f.write_str(if self.get(i, j) { "1" } else { "." })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
