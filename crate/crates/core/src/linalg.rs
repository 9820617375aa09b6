//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, Schur, SVD};

use crate::{Error, Result, C64};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Sweep cap for the iterative decompositions; the library default is
/// unbounded and can stall on unlucky inputs.
const MAX_SWEEPS: usize = 10_000;

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(values: &[C64]) -> f64 {
    values.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues of a square complex matrix via the Schur form.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    match m.nrows() {
        0 => Ok(Vec::new()),
        1 => Ok(vec![m[(0, 0)]]),
        _ => {
            let (_, t) = Schur::try_new(m.clone(), f64::EPSILON, MAX_SWEEPS)
                .ok_or(Error::EigenFailure)?
                .unpack();
            Ok(t.diagonal().iter().copied().collect())
        }
    }
}

/// `σ_0 = 1, σ_1, …, σ_n` of the given values.
pub fn elementary_symmetric(values: &[C64]) -> Vec<C64> {
    let mut sigma = vec![C64::new(0.0, 0.0); values.len() + 1];
    sigma[0] = C64::new(1.0, 0.0);
    for (k, &x) in values.iter().enumerate() {
        for a in (1..=k + 1).rev() {
            sigma[a] = sigma[a] + sigma[a - 1] * x;
        }
    }
    sigma
}

/// Full SVD with singular values in descending order. Wide inputs are padded
/// with zero rows so that `V` is square.
pub fn svd(m: &CMatrix) -> Result<(CMatrix, Vec<f64>, CMatrix)> {
    let (rows, cols) = m.shape();
    let padded = if rows < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = SVD::try_new(padded, true, true, f64::EPSILON, MAX_SWEEPS).ok_or(Error::EigenFailure)?;
    let u = svd.u.expect("U requested");
    let v = svd.v_t.expect("V requested").adjoint();
    Ok((u, svd.singular_values.iter().copied().collect(), v))
}

/// Orthonormal basis (as columns) of the numerical null space of `m`:
/// right singular vectors whose singular value is at most `threshold`.
pub fn null_space(m: &CMatrix, threshold: f64) -> Result<CMatrix> {
    let cols = m.ncols();
    if m.nrows() == 0 {
        return Ok(CMatrix::identity(cols, cols));
    }
    let (_, sv, v) = svd(m)?;
    let keep: Vec<usize> = (0..cols)
        .filter(|&k| sv.get(k).copied().unwrap_or(0.0) <= threshold)
        .collect();
    Ok(CMatrix::from_fn(cols, keep.len(), |r, c| v[(r, keep[c])]))
}

pub fn determinant(m: &CMatrix) -> C64 {
    if m.nrows() == 0 {
        return C64::new(1.0, 0.0);
    }
    m.clone().lu().determinant()
}

/// `A B − B A`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn elementary_symmetric_of_roots() {
        let s = elementary_symmetric(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        let expect = [1.0, 6.0, 11.0, 6.0];
        for (a, b) in s.iter().zip(expect) {
            assert!((a - c(b, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn null_space_of_rank_one() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]);
        let ns = null_space(&m, 1e-12).unwrap();
        assert_eq!(ns.ncols(), 1);
        assert!(frobenius(&(&m * &ns)) < 1e-14);
        let wide = CMatrix::from_row_slice(1, 3, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(null_space(&wide, 1e-12).unwrap().ncols(), 2);
    }

    #[test]
    fn eigenvalues_of_triangular() {
        let m = CMatrix::from_row_slice(2, 2, &[c(3.0, 0.0), c(1.0, 2.0), c(0.0, 0.0), c(5.0, 0.0)]);
        let mut ev: Vec<f64> = eigenvalues(&m).unwrap().iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] - 3.0).abs() < 1e-12 && (ev[1] - 5.0).abs() < 1e-12);
    }
}
