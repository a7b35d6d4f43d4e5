use crate::{CMatrix, Error, Result};

/// Condition number beyond which a Gram matrix is treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Eigen-decomposition of a Hermitian matrix: real eigenvalues and the
/// unitary matrix of eigenvectors (as columns).
pub fn hermitian_eigen(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if a.nrows() != a.ncols() {
        return Err(Error::dim(format!("eigen of non-square {:?}", a.shape())));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::numeric("eigen of non-finite matrix"));
    }
    let eig = a.clone().symmetric_eigen();
    Ok((eig.eigenvalues.iter().copied().collect(), eig.eigenvectors))
}

/// Moore–Penrose pseudo-inverse `(HᴴH)⁻¹Hᴴ` of a tall, full-column-rank matrix.
pub fn pseudo_inverse(h: &CMatrix) -> Result<CMatrix> {
    let (rows, cols) = h.shape();
    if rows < cols {
        return Err(Error::contract(format!(
            "pseudo_inverse expects a tall matrix, got {rows}x{cols}"
        )));
    }
    let gram = h.adjoint() * h;
    let (values, vectors) = hermitian_eigen(&gram)?;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) || max / min > MAX_CONDITION {
        return Err(Error::numeric(format!(
            "HᴴH is rank deficient (eigenvalues {min:e}..{max:e})"
        )));
    }
    let mut scaled = vectors.clone();
    for (j, &lambda) in values.iter().enumerate() {
        scaled.column_mut(j).unscale_mut(lambda);
    }
    let gram_inv = scaled * vectors.adjoint();
    Ok(gram_inv * h.adjoint())
}

/// Moore–Penrose pseudo-inverse of a matrix of any rank: directions whose
/// Gram eigenvalue falls below `max / MAX_CONDITION` are treated as null.
///
/// Coincides with [`pseudo_inverse`] whenever that succeeds.
pub fn rank_truncated_pseudo_inverse(h: &CMatrix) -> Result<CMatrix> {
    let gram = h.adjoint() * h;
    let (values, vectors) = hermitian_eigen(&gram)?;
    let max = values.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(Error::numeric("pseudo-inverse of a zero matrix"));
    }
    let mut scaled = vectors.clone();
    for (j, &lambda) in values.iter().enumerate() {
        let inv = if lambda > max / MAX_CONDITION { 1.0 / lambda } else { 0.0 };
        scaled.column_mut(j).scale_mut(inv);
    }
    Ok(scaled * vectors.adjoint() * h.adjoint())
}
