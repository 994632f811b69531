use faer::Mat;

use crate::SolverError;

/// One stored entry of a symmetric block matrix. Only `row <= col` is
/// stored; the mirrored entry is implied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymEntry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// Sparse symmetric block-diagonal matrix (upper triangle).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseSym {
    pub entries: Vec<SymEntry>,
}

impl SparseSym {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `value` at `(row, col)` of `block`; the pair is reordered so that
    /// `row <= col`.
    pub fn push(&mut self, block: usize, row: usize, col: usize, value: f64) {
        let (row, col) = if row <= col { (row, col) } else { (col, row) };
        self.entries.push(SymEntry { block, row, col, value });
    }

    /// Frobenius inner product `<self, m>` with a dense block matrix.
    pub fn dot(&self, m: &[Mat<f64>]) -> f64 {
        self.entries
            .iter()
            .map(|e| {
                let b = &m[e.block];
                if e.row == e.col {
                    e.value * b[(e.row, e.row)]
                } else {
                    e.value * (b[(e.row, e.col)] + b[(e.col, e.row)])
                }
            })
            .sum()
    }

    /// `m += alpha * self`.
    pub fn add_to(&self, alpha: f64, m: &mut [Mat<f64>]) {
        for e in &self.entries {
            let b = &mut m[e.block];
            b[(e.row, e.col)] += alpha * e.value;
            if e.row != e.col {
                b[(e.col, e.row)] += alpha * e.value;
            }
        }
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| {
                let v = e.value * e.value;
                if e.row == e.col {
                    v
                } else {
                    2.0 * v
                }
            })
            .sum()
    }
}

/// `maximize c^T y  s.t.  C0 + sum_k y_k A_k >= 0` over a block-diagonal cone.
#[derive(Debug, Clone, Default)]
pub struct BlockSdp {
    pub block_sizes: Vec<usize>,
    pub constant: SparseSym,
    pub coefficients: Vec<SparseSym>,
    pub objective: Vec<f64>,
}

impl BlockSdp {
    pub fn num_vars(&self) -> usize {
        self.coefficients.len()
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.coefficients.len() != self.objective.len() {
            return Err(SolverError::Malformed(format!(
                "{} coefficient matrices but {} objective entries",
                self.coefficients.len(),
                self.objective.len()
            )));
        }
        let check = |m: &SparseSym, what: &str| -> Result<(), SolverError> {
            for e in &m.entries {
                let size = *self
                    .block_sizes
                    .get(e.block)
                    .ok_or_else(|| SolverError::Malformed(format!("{what}: block {} out of range", e.block)))?;
                if e.col >= size || e.row > e.col || !e.value.is_finite() {
                    return Err(SolverError::Malformed(format!(
                        "{what}: bad entry ({}, {}, {}) in block {} of size {size}",
                        e.row, e.col, e.value, e.block
                    )));
                }
            }
            Ok(())
        };
        check(&self.constant, "constant")?;
        for (k, a) in self.coefficients.iter().enumerate() {
            if a.entries.is_empty() {
                return Err(SolverError::Malformed(format!("variable {k} has no coefficients")));
            }
            check(a, "coefficient")?;
        }
        Ok(())
    }

    /// Dense `C0 + sum_k y_k A_k`.
    pub fn slack_at(&self, y: &[f64]) -> Vec<Mat<f64>> {
        let mut s: Vec<Mat<f64>> = self.block_sizes.iter().map(|&n| Mat::zeros(n, n)).collect();
        self.constant.add_to(1.0, &mut s);
        for (a, &yk) in self.coefficients.iter().zip(y) {
            a.add_to(yk, &mut s);
        }
        s
    }
}
