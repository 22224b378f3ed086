//! The m×v clause/variable matrix over {−1, 0, +1}.

use serde::{Deserialize, Serialize};

use super::{Clause, Cnf, CnfError, Literal};

/// Row-major `rows × cols` grid of `i8` cells in {−1, 0, +1}.
///
/// Row `i` is clause `i`, column `j` is variable `j + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DenseEncoding {
    rows: usize,
    cols: usize,
    cells: Vec<i8>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// One token per clause (length `cols`).
    #[default]
    Rows,
    /// One token per variable (length `rows`).
    Columns,
}

impl DenseEncoding {
    pub fn from_cells(rows: usize, cols: usize, cells: Vec<i8>) -> Result<Self, CnfError> {
        if rows.checked_mul(cols) != Some(cells.len()) {
            return Err(CnfError::GridShape { rows, cols, got: cells.len() });
        }
        if let Some(pos) = cells.iter().position(|c| !(-1..=1).contains(c)) {
            return Err(CnfError::InvalidCell { row: pos / cols, col: pos % cols, value: cells[pos] });
        }
        Ok(DenseEncoding { rows, cols, cells })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseEncoding { rows, cols, cells: vec![0; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cells(&self) -> &[i8] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<i8> {
        self.cells
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> i8 {
        self.cells[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[i8] {
        &self.cells[row * self.cols..(row + 1) * self.cols]
    }

    /// Nonzero pattern (literal incidence graph) as a boolean grid.
    pub fn support(&self) -> Vec<bool> {
        self.cells.iter().map(|&c| c != 0).collect()
    }

    /// Tokens as patches: clauses (`Rows`) or variables (`Columns`).
    pub fn tokenize(&self, orientation: Orientation) -> Vec<Vec<i8>> {
        match orientation {
            Orientation::Rows => (0..self.rows).map(|i| self.row(i).to_vec()).collect(),
            Orientation::Columns => (0..self.cols).map(|j| (0..self.rows).map(|i| self.get(i, j)).collect()).collect(),
        }
    }

    /// Inverse of [`tokenize`](Self::tokenize).
    pub fn from_tokens(tokens: &[Vec<i8>], orientation: Orientation, other_dim: usize) -> Result<Self, CnfError> {
        let n_tok = tokens.len();
        if let Some(t) = tokens.iter().find(|t| t.len() != other_dim) {
            let (rows, cols) = match orientation {
                Orientation::Rows => (n_tok, other_dim),
                Orientation::Columns => (other_dim, n_tok),
            };
            return Err(CnfError::GridShape { rows, cols, got: t.len() * n_tok });
        }
        match orientation {
            Orientation::Rows => DenseEncoding::from_cells(n_tok, other_dim, tokens.concat()),
            Orientation::Columns => {
                let mut cells = vec![0i8; n_tok * other_dim];
                for (j, col) in tokens.iter().enumerate() {
                    for (i, &c) in col.iter().enumerate() {
                        cells[i * n_tok + j] = c;
                    }
                }
                DenseEncoding::from_cells(other_dim, n_tok, cells)
            }
        }
    }
}

pub fn tokenize(enc: &DenseEncoding, orientation: Orientation) -> Vec<Vec<i8>> {
    enc.tokenize(orientation)
}

impl Cnf {
    pub fn to_dense(&self) -> DenseEncoding {
        let cols = self.num_vars();
        let mut cells = vec![0i8; self.num_clauses() * cols];
        for (i, c) in self.clauses().iter().enumerate() {
            let row = &mut cells[i * cols..(i + 1) * cols];
            for l in c.literals() {
                row[l.var() as usize - 1] = l.sign();
            }
        }
        DenseEncoding { rows: self.num_clauses(), cols, cells }
    }

    /// Literals in each clause come out in increasing variable order.
    pub fn from_dense(enc: &DenseEncoding) -> Cnf {
        let clauses = (0..enc.rows)
            .map(|i| {
                let lits = enc
                    .row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c != 0)
                    .map(|(j, &c)| Literal::new(j as u32 + 1, c > 0))
                    .collect();
                Clause::from_distinct(lits)
            })
            .collect();
        Cnf::from_checked(enc.cols, clauses)
    }
}

pub fn to_dense(cnf: &Cnf) -> DenseEncoding {
    cnf.to_dense()
}

/// Validates cell values and shape, then decodes.
pub fn from_dense(rows: usize, cols: usize, cells: Vec<i8>) -> Result<Cnf, CnfError> {
    Ok(Cnf::from_dense(&DenseEncoding::from_cells(rows, cols, cells)?))
}
