//! Dense linear-algebra helpers: scaling-and-squaring matrix exponential
//! and eigensolves for operators that are self-adjoint in a weighted inner
//! product.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant.  Dense and cubic per multiply; meant for cross-check
/// oracles at moderate size, not production evolution.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), a.ncols());
    let n = a.nrows();
    let theta13 = 5.371_920_351_148_152;
    let norm = one_norm(a);
    let s = if norm > theta13 {
        (norm / theta13).log2().ceil() as i32
    } else {
        0
    };
    let a = a / 2f64.powi(s);

    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let eye = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (B[13] * &a6 + B[11] * &a4 + B[9] * &a2)
        + B[7] * &a6
        + B[5] * &a4
        + B[3] * &a2
        + B[1] * &eye;
    let u = &a * u_inner;
    let v = &a6 * (B[12] * &a6 + B[10] * &a4 + B[8] * &a2)
        + B[6] * &a6
        + B[4] * &a4
        + B[2] * &a2
        + B[0] * &eye;
    let denom = &v - &u;
    let numer = &v + &u;
    let mut result = denom
        .lu()
        .solve(&numer)
        .expect("Pade denominator is invertible for scaled inputs");
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

fn one_norm(a: &DMatrix<f64>) -> f64 {
    let mut best = 0.0_f64;
    for j in 0..a.ncols() {
        let s: f64 = a.column(j).iter().map(|v| v.abs()).sum();
        best = best.max(s);
    }
    best
}

/// Eigenvalues (ascending) of an operator `M` that is self-adjoint with
/// respect to `<f, g>_w = sum_i w_i f_i g_i`.
///
/// `W^{1/2} M W^{-1/2}` is plainly symmetric; it is formed, symmetrized
/// against rounding, and handed to the dense symmetric eigensolver.
pub fn weighted_sym_eigenvalues(m: &DMatrix<f64>, w: &[f64]) -> Result<Vec<f64>> {
    Ok(weighted_sym_eigen(m, w)?.0)
}

/// Eigenvalues (ascending) and matching eigenvectors, the latter mapped
/// back to the original frame (w-orthonormal columns).
pub fn weighted_sym_eigen(m: &DMatrix<f64>, w: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    if m.ncols() != n || w.len() != n {
        return Err(Error::EigenFailed("dimension mismatch".into()));
    }
    if w.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::EigenFailed("weights must be positive".into()));
    }
    let sqrt_w: Vec<f64> = w.iter().map(|&x| x.sqrt()).collect();
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] = sqrt_w[i] * m[(i, j)] / sqrt_w[j];
        }
    }
    let sym = (&s + s.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(sym);
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailed("non-finite eigenvalue".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, col)] = eig.eigenvectors[(i, k)] / sqrt_w[i];
        }
    }
    Ok((values, vectors))
}
