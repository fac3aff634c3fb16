//! Test-only oracles that do not go through the library's eigensolver.

#![allow(dead_code)]

use pptsq::{BipartiteOperator, Complex64, ComplexMatrix};

/// `H + shift·I` admits a Cholesky factorization iff `λ_min(H) > -shift`.
pub fn cholesky_psd(h: &ComplexMatrix, shift: f64) -> bool {
    let n = h.rows();
    let mut l = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for j in 0..n {
        let diag = h[(j, j)].re + shift - l[j][..j].iter().map(|x| x.norm_sqr()).sum::<f64>();
        if diag <= 0.0 {
            return false;
        }
        let ljj = diag.sqrt();
        l[j][j] = Complex64::new(ljj, 0.0);
        for i in j + 1..n {
            let dot: Complex64 = l[i][..j].iter().zip(&l[j][..j]).map(|(a, b)| a * b.conj()).sum();
            l[i][j] = (h[(i, j)] - dot) / ljj;
        }
    }
    true
}

/// Partial transpose on B by explicit index swap.
pub fn transpose_b(x: &BipartiteOperator) -> ComplexMatrix {
    let (da, db) = x.dims();
    ComplexMatrix::from_fn(da * db, da * db, |r, c| {
        let (i, k) = (r / db, r % db);
        let (j, l) = (c / db, c % db);
        x.matrix()[(i * db + l, j * db + k)]
    })
}

/// Independent PPT verdict: both `ρ` and `ρ^Γ` pass the shifted Cholesky test.
pub fn oracle_ppt(x: &BipartiteOperator, shift: f64) -> bool {
    cholesky_psd(x.matrix(), shift) && cholesky_psd(&transpose_b(x), shift)
}
