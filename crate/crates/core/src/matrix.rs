//! Binary country x product adjacency matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary bipartite adjacency `M`: rows are countries, columns are products.
///
/// All-zero rows or columns may be stored, but the engine refuses to iterate
/// on them; use [`BipartiteMatrix::without_empty_lines`] first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct BipartiteMatrix {
    n_rows: usize,
    n_cols: usize,
    cells: Vec<bool>,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
}

/// Which lines were dropped by [`BipartiteMatrix::without_empty_lines`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct Sanitation {
    pub empty_rows: Vec<String>,
    pub empty_cols: Vec<String>,
}

impl Sanitation {
    pub fn is_clean(&self) -> bool {
        self.empty_rows.is_empty() && self.empty_cols.is_empty()
    }
}

fn default_labels(prefix: char, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

impl BipartiteMatrix {
    /// Builds a matrix from row-major 0/1 rows with default labels `c1..`, `p1..`.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut cells = Vec::with_capacity(n_rows * n_cols);
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n_cols {
                return Err(Error::RaggedRow {
                    row: r,
                    found: row.len(),
                    expected: n_cols,
                });
            }
            for (c, &v) in row.iter().enumerate() {
                match v {
                    0 => cells.push(false),
                    1 => cells.push(true),
                    other => {
                        return Err(Error::NonBinaryCell {
                            row: r,
                            col: c,
                            value: other.to_string(),
                        })
                    }
                }
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            cells,
            row_labels: default_labels('c', n_rows),
            col_labels: default_labels('p', n_cols),
        })
    }

    /// Parses whitespace-separated rows of `0`/`1` characters, e.g. `"110 011"`.
    pub fn from_pattern(pattern: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (r, row) in pattern.split_whitespace().enumerate() {
            let cells = row
                .chars()
                .enumerate()
                .map(|(c, ch)| match ch {
                    '0' => Ok(0u8),
                    '1' => Ok(1u8),
                    other => Err(Error::NonBinaryCell {
                        row: r,
                        col: c,
                        value: other.to_string(),
                    }),
                })
                .collect::<Result<Vec<u8>>>()?;
            rows.push(cells);
        }
        Self::from_rows(&rows)
    }

    pub fn from_cells(n_rows: usize, n_cols: usize, cells: Vec<bool>) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        if cells.len() != n_rows * n_cols {
            return Err(Error::ShapeMismatch(format!(
                "{} cells for a {n_rows}x{n_cols} matrix",
                cells.len()
            )));
        }
        Ok(Self {
            n_rows,
            n_cols,
            cells,
            row_labels: default_labels('c', n_rows),
            col_labels: default_labels('p', n_cols),
        })
    }

    pub fn with_labels(mut self, row_labels: Vec<String>, col_labels: Vec<String>) -> Result<Self> {
        if row_labels.len() != self.n_rows || col_labels.len() != self.n_cols {
            return Err(Error::ShapeMismatch(format!(
                "{} row labels and {} column labels for a {}x{} matrix",
                row_labels.len(),
                col_labels.len(),
                self.n_rows,
                self.n_cols
            )));
        }
        self.row_labels = row_labels;
        self.col_labels = col_labels;
        Ok(self)
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.n_cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.cells[row * self.n_cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[bool] {
        &self.cells[row * self.n_cols..(row + 1) * self.n_cols]
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    /// Diversification: number of products exported by each row.
    pub fn row_degrees(&self) -> Vec<usize> {
        (0..self.n_rows)
            .map(|r| self.row(r).iter().filter(|&&v| v).count())
            .collect()
    }

    /// Ubiquity: number of exporters of each column.
    pub fn col_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_cols];
        for r in 0..self.n_rows {
            for (d, &v) in deg.iter_mut().zip(self.row(r)) {
                *d += usize::from(v);
            }
        }
        deg
    }

    pub fn ones(&self) -> usize {
        self.cells.iter().filter(|&&v| v).count()
    }

    pub fn density(&self) -> f64 {
        self.ones() as f64 / self.cells.len() as f64
    }

    /// Labels of all-zero rows and columns.
    pub fn empty_lines(&self) -> Sanitation {
        let empty_rows = self
            .row_degrees()
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 0)
            .map(|(i, _)| self.row_labels[i].clone())
            .collect();
        let empty_cols = self
            .col_degrees()
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 0)
            .map(|(i, _)| self.col_labels[i].clone())
            .collect();
        Sanitation {
            empty_rows,
            empty_cols,
        }
    }

    /// Drops all-zero rows and columns. Removing a column never empties a
    /// row (the column had no ones), so a single pass suffices.
    pub fn without_empty_lines(&self) -> Result<(Self, Sanitation)> {
        let report = self.empty_lines();
        let rows: Vec<usize> = self
            .row_degrees()
            .iter()
            .enumerate()
            .filter(|(_, &d)| d > 0)
            .map(|(i, _)| i)
            .collect();
        let cols: Vec<usize> = self
            .col_degrees()
            .iter()
            .enumerate()
            .filter(|(_, &d)| d > 0)
            .map(|(i, _)| i)
            .collect();
        Ok((self.submatrix(&rows, &cols)?, report))
    }

    /// Matrix restricted to the given row and column indices, in that order.
    /// Also serves as a permutation when the index lists are bijections.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<Self> {
        if rows.is_empty() || cols.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        let mut cells = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            for &c in cols {
                cells.push(self.get(r, c));
            }
        }
        Ok(Self {
            n_rows: rows.len(),
            n_cols: cols.len(),
            cells,
            row_labels: rows.iter().map(|&r| self.row_labels[r].clone()).collect(),
            col_labels: cols.iter().map(|&c| self.col_labels[c].clone()).collect(),
        })
    }

    /// Rows rendered as `0`/`1` strings separated by spaces (inverse of
    /// [`BipartiteMatrix::from_pattern`]).
    pub fn to_pattern(&self) -> String {
        (0..self.n_rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .map(|&v| if v { '1' } else { '0' })
                    .collect::<String>()
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}
