//! Small dense complex linear-algebra helpers shared across the crate.
//!
//! Everything here targets the small (n ≲ 10) matrices that arise from
//! network models; robustness is preferred over speed throughout.

use crate::error::{Error, Result};
use crate::{C64, CMatrix, CVector};

/// Iteration budget for the QR/Schur and SVD iterations.
const MAX_ITER: usize = 10_000;

/// Eigenvalues of a general complex square matrix via its Schur form.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues requires a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = m
        .clone()
        .try_schur(f64::EPSILON, MAX_ITER)
        .ok_or(Error::EigenFailure)?;
    let (_, t) = schur.unpack();
    Ok(t.diagonal().iter().copied().collect())
}

/// Largest real part over the spectrum of `m`.
pub fn spectral_abscissa(m: &CMatrix) -> Result<f64> {
    Ok(eigenvalues(m)?
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Largest eigenvalue magnitude (spectral radius).
pub fn spectral_radius(m: &CMatrix) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|l| l.norm()).fold(0.0, f64::max))
}

/// Singular values of `m`, descending.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    let svd = m
        .clone()
        .try_svd(false, false, f64::EPSILON, MAX_ITER)
        .ok_or(Error::EigenFailure)?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(s)
}

/// Spectral (operator 2-) norm.
pub fn spectral_norm(m: &CMatrix) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// Left singular vectors and singular values of `m`, columns ordered by
/// descending singular value.
pub fn left_singular_basis(m: &CMatrix) -> Result<(CMatrix, Vec<f64>)> {
    let svd = m
        .clone()
        .try_svd(true, false, f64::EPSILON, MAX_ITER)
        .ok_or(Error::EigenFailure)?;
    let u = svd.u.expect("left singular vectors requested");
    let s: Vec<f64> = svd.singular_values.iter().copied().collect();
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].partial_cmp(&s[i]).unwrap());
    let cols: Vec<CVector> = order.iter().map(|&i| u.column(i).into_owned()).collect();
    let sorted_s: Vec<f64> = order.iter().map(|&i| s[i]).collect();
    Ok((CMatrix::from_columns(&cols), sorted_s))
}

/// Solve `m x = b` by LU with partial pivoting.
pub fn solve(m: &CMatrix, b: &CVector) -> Option<CVector> {
    m.clone().lu().solve(b)
}

/// Hermitian part (m + m†)/2.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Largest entry magnitude.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry magnitude of a vector.
pub fn max_abs_vec(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Matrix exponential. nalgebra implements Padé scaling-and-squaring, which
/// covers the complex dense case used here.
pub fn expm(m: &CMatrix) -> CMatrix {
    m.exp()
}

/// Greedy nearest-neighbour pairing distance between two equal-size multisets
/// of complex numbers. Suitable when the sets agree up to small perturbations.
pub fn pairing_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len(), "pairing requires equal-size sets");
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for &z in a {
        let mut best = f64::INFINITY;
        let mut best_j = usize::MAX;
        for (j, &w) in b.iter().enumerate() {
            if !used[j] {
                let d = (z - w).norm();
                if d < best {
                    best = d;
                    best_j = j;
                }
            }
        }
        used[best_j] = true;
        worst = worst.max(best);
    }
    worst
}

/// Principal angles (radians, ascending) between the column spans of two
/// orthonormal bases.
///
/// Computed through the sine route: the singular values of Q − P(P†Q) are
/// the sines of the angles, which keeps near-zero angles accurate where the
/// cosine route bottoms out at √eps.
pub fn principal_angles(p: &CMatrix, q: &CMatrix) -> Result<Vec<f64>> {
    if p.nrows() != q.nrows() {
        return Err(Error::DimensionMismatch(
            "principal angles need bases of the same ambient space".into(),
        ));
    }
    let residual = q - p * (p.adjoint() * q);
    let mut sines = singular_values(&residual)?;
    sines.truncate(p.ncols().min(q.ncols()));
    let mut angles: Vec<f64> = sines.iter().map(|s| s.clamp(0.0, 1.0).asin()).collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(angles)
}

/// Composite Simpson integral of uniformly sampled complex values.
/// Falls back to the trapezoid rule on a trailing odd interval.
pub fn simpson(values: &[C64], h: f64) -> C64 {
    let n = values.len();
    if n < 2 {
        return C64::new(0.0, 0.0);
    }
    let intervals = n - 1;
    let even_intervals = intervals - (intervals % 2);
    let mut acc = C64::new(0.0, 0.0);
    if even_intervals >= 2 {
        acc += values[0] + values[even_intervals];
        let mut k = 1;
        while k < even_intervals {
            acc += values[k] * 4.0;
            if k + 1 < even_intervals {
                acc += values[k + 1] * 2.0;
            }
            k += 2;
        }
        acc *= h / 3.0;
    }
    if intervals % 2 == 1 {
        acc += (values[n - 2] + values[n - 1]) * (h / 2.0);
    }
    acc
}

/// Composite Simpson integral of uniformly sampled real values.
pub fn simpson_real(values: &[f64], h: f64) -> f64 {
    let complex: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
    simpson(&complex, h).re
}
