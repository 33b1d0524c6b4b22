//! Dense symmetric eigensolver wrappers.
//!
//! All spectral quantities go through one canonical route: a symmetric
//! eigendecomposition with eigenvalues sorted ascending, and pseudoinverses
//! formed by zeroing eigenvalues below `1e-9 * lambda_max` (a relative
//! cutoff, so the kernel detection is scale-robust).

use nalgebra::{DMatrix, DVector};

pub const KERNEL_RELATIVE_CUTOFF: f64 = 1e-9;

/// Eigendecomposition of a symmetric matrix, eigenvalues ascending with
/// matching eigenvector columns.
pub struct SymEigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

pub fn sym_eigen(m: &DMatrix<f64>) -> SymEigen {
    let decomp = m.clone().symmetric_eigen();
    let k = decomp.eigenvalues.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| decomp.eigenvalues[a].total_cmp(&decomp.eigenvalues[b]));
    let values = DVector::from_iterator(k, order.iter().map(|&i| decomp.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(k, k);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &decomp.eigenvectors.column(src));
    }
    SymEigen { values, vectors }
}

impl SymEigen {
    pub fn rank_cutoff(&self) -> f64 {
        let max = self.values.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        KERNEL_RELATIVE_CUTOFF * max
    }

    /// Moore-Penrose pseudoinverse from the decomposition.
    pub fn pseudoinverse(&self) -> DMatrix<f64> {
        let cutoff = self.rank_cutoff();
        let k = self.values.len();
        let mut out = DMatrix::zeros(k, k);
        for i in 0..k {
            let v = self.values[i];
            if v.abs() > cutoff {
                let col = self.vectors.column(i);
                out += col * col.transpose() / v;
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        let cutoff = self.rank_cutoff();
        self.values.iter().filter(|v| v.abs() > cutoff).count()
    }

    /// Columns spanning the range (eigenvalues above the cutoff).
    pub fn range_basis(&self) -> DMatrix<f64> {
        let cutoff = self.rank_cutoff();
        let cols: Vec<usize> = (0..self.values.len())
            .filter(|&i| self.values[i].abs() > cutoff)
            .collect();
        let mut out = DMatrix::zeros(self.vectors.nrows(), cols.len());
        for (dst, &src) in cols.iter().enumerate() {
            out.set_column(dst, &self.vectors.column(src));
        }
        out
    }
}

/// Largest absolute eigenvalue (spectral norm for symmetric input).
pub fn spectral_norm_sym(m: &DMatrix<f64>) -> f64 {
    sym_eigen(m)
        .values
        .iter()
        .fold(0.0f64, |a, &v| a.max(v.abs()))
}

/// M^t by binary exponentiation.
pub fn matrix_power(m: &DMatrix<f64>, t: u32) -> DMatrix<f64> {
    assert!(t >= 1);
    let mut result: Option<DMatrix<f64>> = None;
    let mut base = m.clone();
    let mut exp = t;
    loop {
        if exp & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => r * &base,
            });
        }
        exp >>= 1;
        if exp == 0 {
            break;
        }
        base = &base * &base;
    }
    result.unwrap()
}
