//! Dense-matrix and polynomial substrate shared by every other module.
//!
//! Matrices are `nalgebra` dynamic matrices. Rank decisions always go through
//! [`rank`] (or the null/range helpers) with a relative threshold on the
//! singular values, so callers can pin the floating-point policy explicitly.

mod eigen;
mod poly;

pub use eigen::{eigen, eigen_with_tol, jordan_like, EigenCluster, EigenStructure, JordanBlock, JordanLikeForm};
pub use poly::Polynomial;

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

pub type Complex64 = nalgebra::Complex<f64>;
pub type RealMatrix = DMatrix<f64>;
pub type ComplexMatrix = DMatrix<Complex64>;
pub type RealVector = DVector<f64>;
pub type ComplexVector = DVector<Complex64>;

pub(crate) const EPS: f64 = f64::EPSILON;

pub(crate) fn ensure_square(a: &RealMatrix) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::NonSquare { rows: a.nrows(), cols: a.ncols() });
    }
    Ok(a.nrows())
}

pub(crate) fn ensure_finite(a: &RealMatrix, what: &str) -> Result<()> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{what} has non-finite entries")))
    }
}

/// Build a matrix from row slices. Panics on ragged input; meant for fixtures.
pub fn mat(rows: &[&[f64]]) -> RealMatrix {
    let r = rows.len();
    let c = if r == 0 { 0 } else { rows[0].len() };
    assert!(rows.iter().all(|row| row.len() == c), "ragged matrix literal");
    RealMatrix::from_fn(r, c, |i, j| rows[i][j])
}

pub fn col(values: &[f64]) -> RealMatrix {
    RealMatrix::from_column_slice(values.len(), 1, values)
}

pub fn vector(values: &[f64]) -> RealVector {
    RealVector::from_column_slice(values)
}

pub fn to_complex(a: &RealMatrix) -> ComplexMatrix {
    a.map(|v| Complex64::new(v, 0.0))
}

/// Singular values sorted in decreasing order. Empty matrices have none.
pub fn singular_values(a: &RealMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn singular_values_complex(a: &ComplexMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Spectral norm (largest singular value).
pub fn norm2(a: &RealMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Default relative rank threshold: `max(rows, cols) * eps`.
pub fn default_rank_tol(a: &RealMatrix) -> f64 {
    a.nrows().max(a.ncols()).max(1) as f64 * EPS
}

fn count_above(s: &[f64], rel_tol: f64) -> usize {
    match s.first() {
        Some(&smax) if smax > 0.0 => s.iter().filter(|&&v| v > rel_tol * smax).count(),
        _ => 0,
    }
}

/// Numerical rank: singular values above `tol * sigma_max`.
///
/// `tol = None` uses [`default_rank_tol`]. The zero matrix has rank 0.
pub fn rank(a: &RealMatrix, tol: Option<f64>) -> usize {
    let tol = tol.unwrap_or_else(|| default_rank_tol(a));
    count_above(&singular_values(a), tol)
}

pub fn rank_complex(a: &ComplexMatrix, tol: f64) -> usize {
    count_above(&singular_values_complex(a), tol)
}

/// Ratio `sigma_min / sigma_max` for a square matrix (0 if singular or empty).
pub fn rcond(a: &RealMatrix) -> f64 {
    let s = singular_values(a);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 && s.len() == a.nrows().min(a.ncols()) => lo / hi,
        _ => 0.0,
    }
}

pub fn rcond_complex(a: &ComplexMatrix) -> f64 {
    let s = singular_values_complex(a);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        _ => 0.0,
    }
}

/// Orthonormal basis of the null space, as columns.
///
/// Wide matrices are padded with zero rows so the thin SVD exposes the full
/// right singular basis.
pub fn null_space(a: &RealMatrix, rel_tol: f64) -> RealMatrix {
    let (r, c) = a.shape();
    if c == 0 {
        return RealMatrix::zeros(0, 0);
    }
    let padded = if r < c {
        let mut p = RealMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cols: Vec<RealVector> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| smax == 0.0 || s <= rel_tol * smax)
        .map(|(i, _)| vt.row(i).transpose())
        .collect();
    columns_to_matrix(c, &cols)
}

/// Orthonormal basis of the null space of a complex matrix, as columns.
pub fn null_space_complex(a: &ComplexMatrix, rel_tol: f64) -> ComplexMatrix {
    let (r, c) = a.shape();
    if c == 0 {
        return ComplexMatrix::zeros(0, 0);
    }
    let padded = if r < c {
        let mut p = ComplexMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V^H");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut idx: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| smax == 0.0 || svd.singular_values[i] <= rel_tol * smax)
        .collect();
    idx.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let mut out = ComplexMatrix::zeros(c, idx.len());
    for (k, &i) in idx.iter().enumerate() {
        let v = vt.row(i).adjoint();
        out.set_column(k, &v);
    }
    out
}

/// Null vectors belonging to the `count` smallest singular values, regardless
/// of threshold.
pub(crate) fn smallest_right_singular_complex(a: &ComplexMatrix, count: usize) -> (ComplexMatrix, Vec<f64>) {
    let c = a.ncols();
    let padded = if a.nrows() < c {
        let mut p = ComplexMatrix::zeros(c, c);
        p.view_mut((0, 0), a.shape()).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V^H");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    idx.truncate(count);
    let mut out = ComplexMatrix::zeros(c, idx.len());
    for (k, &i) in idx.iter().enumerate() {
        out.set_column(k, &vt.row(i).adjoint());
    }
    let sv = idx.iter().map(|&i| svd.singular_values[i]).collect();
    (out, sv)
}

/// Orthonormal basis of the column space, as columns.
pub fn range_basis(a: &RealMatrix, rel_tol: f64) -> RealMatrix {
    let (r, c) = a.shape();
    if r == 0 || c == 0 {
        return RealMatrix::zeros(r, 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut idx: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| smax > 0.0 && svd.singular_values[i] > rel_tol * smax)
        .collect();
    idx.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let cols: Vec<RealVector> = idx.iter().map(|&i| u.column(i).into_owned()).collect();
    columns_to_matrix(r, &cols)
}

pub(crate) fn columns_to_matrix(rows: usize, cols: &[RealVector]) -> RealMatrix {
    let mut m = RealMatrix::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    m
}

/// Indices of columns that each increase the rank, scanning left to right.
pub fn independent_columns(a: &RealMatrix, rel_tol: f64) -> Vec<usize> {
    let scale = norm2(a);
    let mut chosen: Vec<usize> = Vec::new();
    if scale == 0.0 {
        return chosen;
    }
    let mut q: Vec<RealVector> = Vec::new();
    for j in 0..a.ncols() {
        let mut v = a.column(j).into_owned();
        // two passes of Gram-Schmidt against the accepted directions
        for _ in 0..2 {
            for qi in &q {
                let proj = qi.dot(&v);
                v -= qi * proj;
            }
        }
        let nv = v.norm();
        if nv > rel_tol * scale.max(a.column(j).norm()) && nv > rel_tol * scale {
            q.push(v / nv);
            chosen.push(j);
        }
    }
    chosen
}

/// Complete the columns of `basis` (n x k, full column rank) to a basis of
/// R^n with standard basis vectors.
///
/// At each step the unit vector with the largest residual after projection
/// onto the current span is appended (ties go to the lower index). The
/// returned matrix holds only the appended columns, each a raw `e_i`.
pub fn complete_basis(basis: &RealMatrix) -> RealMatrix {
    let n = basis.nrows();
    let mut q: Vec<RealVector> = Vec::new();
    for j in 0..basis.ncols() {
        let mut v = basis.column(j).into_owned();
        for _ in 0..2 {
            for qi in &q {
                let proj = qi.dot(&v);
                v -= qi * proj;
            }
        }
        let nv = v.norm();
        if nv > 0.0 {
            q.push(v / nv);
        }
    }
    let mut extra: Vec<RealVector> = Vec::new();
    while q.len() < n {
        let mut best: Option<(usize, f64, RealVector)> = None;
        for i in 0..n {
            let mut v = RealVector::zeros(n);
            v[i] = 1.0;
            for _ in 0..2 {
                for qi in &q {
                    let proj = qi.dot(&v);
                    v -= qi * proj;
                }
            }
            let nv = v.norm();
            if best.as_ref().map_or(true, |(_, b, _)| nv > *b + 1e-12) {
                best = Some((i, nv, v));
            }
        }
        let (i, nv, v) = best.expect("n > 0");
        q.push(v / nv);
        let mut e = RealVector::zeros(n);
        e[i] = 1.0;
        extra.push(e);
    }
    columns_to_matrix(n, &extra)
}

/// Solve `a x = b` with partial-pivot LU; rejects numerically singular `a`.
pub fn solve(a: &RealMatrix, b: &RealMatrix) -> Result<RealMatrix> {
    ensure_square(a)?;
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "solve: lhs has {} rows, rhs has {}",
            a.nrows(),
            b.nrows()
        )));
    }
    if a.nrows() == 0 {
        return Ok(b.clone());
    }
    if rcond(a) <= a.nrows() as f64 * EPS {
        return Err(Error::IllConditioned("linear system is singular".into()));
    }
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::IllConditioned("LU solve failed".into()))
}

pub fn inverse(a: &RealMatrix) -> Result<RealMatrix> {
    let n = ensure_square(a)?;
    solve(a, &RealMatrix::identity(n, n))
}

pub fn solve_complex(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.nrows() != a.ncols() {
        return Err(Error::NonSquare { rows: a.nrows(), cols: a.ncols() });
    }
    if a.nrows() == 0 {
        return Ok(b.clone());
    }
    if rcond_complex(a) <= a.nrows() as f64 * EPS {
        return Err(Error::IllConditioned("complex linear system is singular".into()));
    }
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::IllConditioned("complex LU solve failed".into()))
}

pub fn symmetrize(a: &RealMatrix) -> RealMatrix {
    (a + a.transpose()) * 0.5
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(a: &RealMatrix) -> Vec<f64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = symmetrize(a).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Factor a symmetric PSD matrix as `Q = C^T C` with `C = diag(sqrt(lambda)) V^T`.
///
/// Negative eigenvalues within round-off are clamped to zero.
pub fn psd_factor(q: &RealMatrix) -> RealMatrix {
    let n = q.nrows();
    if n == 0 {
        return RealMatrix::zeros(0, 0);
    }
    let eig = symmetrize(q).symmetric_eigen();
    let mut c = RealMatrix::zeros(n, n);
    for k in 0..n {
        let lam = eig.eigenvalues[k].max(0.0).sqrt();
        for j in 0..n {
            c[(k, j)] = lam * eig.eigenvectors[(j, k)];
        }
    }
    c
}

/// Definiteness classes reported by [`is_positive_definite`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Definiteness {
    PositiveDefinite,
    PositiveSemidefinite,
    Indefinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefinitenessReport {
    pub verdict: Definiteness,
    /// Leading principal minors, Δ1 … Δn.
    pub minors: Vec<f64>,
    pub min_eigenvalue: f64,
}

/// Sylvester leading-minor test, with semidefiniteness resolved by the
/// symmetric eigenvalues (minors alone cannot certify PSD).
pub fn is_positive_definite(m: &RealMatrix) -> Result<DefinitenessReport> {
    let n = ensure_square(m)?;
    ensure_finite(m, "M")?;
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let asym = (m - m.transpose()).norm();
    if asym > 1e-10 * scale {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let ms = symmetrize(m);
    let minors: Vec<f64> = (1..=n).map(|k| ms.view((0, 0), (k, k)).into_owned().determinant()).collect();
    let eigs = symmetric_eigenvalues(&ms);
    let min_eig = eigs.first().copied().unwrap_or(0.0);
    let tol = n.max(1) as f64 * EPS * norm2(&ms);
    let verdict = if n > 0 && minors.iter().all(|&d| d > 0.0) && min_eig > tol {
        Definiteness::PositiveDefinite
    } else if min_eig >= -tol {
        Definiteness::PositiveSemidefinite
    } else {
        Definiteness::Indefinite
    };
    Ok(DefinitenessReport { verdict, minors, min_eigenvalue: min_eig })
}

/// `e^{A t}` by scaling and squaring of the truncated power series.
///
/// `A t` is scaled by `2^-k` until its 1-norm is at most 1/2, the series is
/// summed until the next term is below machine precision, and the result is
/// squared `k` times.
pub fn expm(a: &RealMatrix, t: f64) -> Result<RealMatrix> {
    let n = ensure_square(a)?;
    ensure_finite(a, "A")?;
    if !t.is_finite() {
        return Err(Error::InvalidArgument("time must be finite".into()));
    }
    let ident = RealMatrix::identity(n, n);
    if t == 0.0 || n == 0 {
        return Ok(ident);
    }
    let at = a * t;
    let norm1 = (0..n)
        .map(|j| at.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    if norm1 > 0.5 {
        squarings = (norm1 / 0.5).log2().ceil() as u32;
    }
    let scaled = at / 2f64.powi(squarings as i32);
    let mut sum = ident.clone();
    let mut term = ident;
    for k in 1..=40 {
        term = &term * &scaled / k as f64;
        sum += &term;
        if term.norm() <= EPS * sum.norm() * 0.5 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
        if !sum.iter().all(|v| v.is_finite()) {
            return Err(Error::Overflow);
        }
    }
    if !sum.iter().all(|v| v.is_finite()) {
        return Err(Error::Overflow);
    }
    Ok(sum)
}

/// Coordinates of `x` in the basis given by the columns of `e`.
pub fn representation(e: &RealMatrix, x: &RealVector) -> Result<RealVector> {
    let n = ensure_square(e)?;
    if x.len() != n {
        return Err(Error::DimensionMismatch(format!("basis of order {n}, vector of length {}", x.len())));
    }
    if rank(e, None) < n {
        return Err(Error::SingularBasis);
    }
    let rhs = RealMatrix::from_column_slice(n, 1, x.as_slice());
    let beta = solve(e, &rhs).map_err(|_| Error::SingularBasis)?;
    Ok(beta.column(0).into_owned())
}

/// Grammian `G[i][j] = <v_i, v_j>` of the basis columns and the reciprocal
/// basis `R = V^{-1}` (rows `r_i` with `<r_i, v_j> = delta_ij`).
pub fn basis_grammian_and_reciprocal(v: &RealMatrix) -> Result<(RealMatrix, RealMatrix)> {
    let n = ensure_square(v)?;
    if rank(v, None) < n {
        return Err(Error::SingularBasis);
    }
    let g = v.transpose() * v;
    let r = inverse(v).map_err(|_| Error::SingularBasis)?;
    Ok((g, r))
}

/// Radical-inverse (van der Corput) value of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while index > 0 {
        out += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    out
}

pub(crate) const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Point `index` of the Halton sequence in `[0,1)^dim` (dim ≤ 16).
pub fn halton(index: u64, dim: usize) -> Vec<f64> {
    assert!(dim <= PRIMES.len(), "halton supports up to 16 dimensions");
    (0..dim).map(|d| radical_inverse(index, PRIMES[d])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &RealMatrix, b: &RealMatrix, tol: f64) -> bool {
        a.shape() == b.shape() && (a - b).amax() <= tol
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&mat(&[&[1.0, -2.0], &[1.0, -2.0]]), None), 1);
        assert_eq!(rank(&RealMatrix::identity(4, 4), None), 4);
        let m = mat(&[&[1.0, 3.0, 2.0, 1.0], &[2.0, 0.0, 1.0, -1.0], &[-1.0, 1.0, 0.0, 1.0]]);
        assert_eq!(rank(&m, None), 2);
        assert_eq!(rank(&RealMatrix::zeros(3, 2), None), 0);
    }

    #[test]
    fn definiteness_examples() {
        let p = mat(&[&[1.25, 0.25], &[0.25, 0.375]]);
        let r = is_positive_definite(&p).unwrap();
        assert_eq!(r.verdict, Definiteness::PositiveDefinite);
        assert!((r.minors[0] - 1.25).abs() < 1e-15);
        assert!((r.minors[1] - (1.25 * 0.375 - 0.0625)).abs() < 1e-14);

        let z = RealMatrix::zeros(3, 3);
        assert_eq!(is_positive_definite(&z).unwrap().verdict, Definiteness::PositiveSemidefinite);

        let ind = mat(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert_eq!(is_positive_definite(&ind).unwrap().verdict, Definiteness::Indefinite);

        let asym = mat(&[&[1.0, 2.0], &[0.0, 1.0]]);
        assert!(matches!(is_positive_definite(&asym), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn expm_examples() {
        let nil = mat(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(close(&expm(&nil, 1.0).unwrap(), &mat(&[&[1.0, 1.0], &[0.0, 1.0]]), 1e-15));

        let a = mat(&[&[0.0, 1.0], &[-2.0, -3.0]]);
        for &t in &[0.3f64, 1.0, 4.0] {
            let (e1, e2) = ((-t).exp(), (-2.0 * t).exp());
            let want = mat(&[&[2.0 * e1 - e2, e1 - e2], &[-2.0 * e1 + 2.0 * e2, -e1 + 2.0 * e2]]);
            assert!(close(&expm(&a, t).unwrap(), &want, 1e-12));
        }

        let rot = mat(&[&[0.0, std::f64::consts::PI], &[-std::f64::consts::PI, 0.0]]);
        assert!(close(&expm(&rot, 1.0).unwrap(), &mat(&[&[-1.0, 0.0], &[0.0, -1.0]]), 1e-13));

        let any = mat(&[&[3.0, 7.0], &[-1.0, 2.0]]);
        assert_eq!(expm(&any, 0.0).unwrap(), RealMatrix::identity(2, 2));
    }

    #[test]
    fn expm_large_argument_relative_accuracy() {
        // diagonalizable with known eigendecomposition, ||At|| about 50
        let m = mat(&[&[1.0, 1.0], &[-4.0, 2.0]]);
        let d = RealMatrix::from_diagonal(&vector(&[-4.0, 2.0]));
        let a = &m * &d * inverse(&m).unwrap();
        let t = 10.0f64;
        let want = &m * RealMatrix::from_diagonal(&vector(&[(-4.0 * t).exp(), (2.0 * t).exp()])) * inverse(&m).unwrap();
        let got = expm(&a, t).unwrap();
        assert!((got - &want).norm() <= 1e-10 * want.norm());
    }

    #[test]
    fn expm_overflow() {
        let a = mat(&[&[1000.0]]);
        assert_eq!(expm(&a, 1.0), Err(Error::Overflow));
    }

    #[test]
    fn representation_examples() {
        let e = mat(&[&[1.0, 0.0], &[1.0, 1.0]]);
        let b = representation(&e, &vector(&[2.0, 5.0])).unwrap();
        assert!((b - vector(&[2.0, 3.0])).amax() < 1e-14);

        let x = vector(&[0.3, -7.0, 2.5]);
        let b = representation(&RealMatrix::identity(3, 3), &x).unwrap();
        assert!((b - &x).amax() < 1e-15);

        let e = mat(&[&[1.0, 2.0, 1.0], &[1.0, 0.0, 0.0], &[1.0, 0.0, 1.0]]);
        let b = representation(&e, &vector(&[3.0, 2.0, 1.0])).unwrap();
        assert!((b - vector(&[2.0, 1.0, -1.0])).amax() < 1e-14);

        let sing = mat(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert_eq!(representation(&sing, &vector(&[1.0, 1.0])), Err(Error::SingularBasis));
    }

    #[test]
    fn grammian_and_reciprocal() {
        let (g, r) = basis_grammian_and_reciprocal(&RealMatrix::identity(3, 3)).unwrap();
        assert_eq!(g, RealMatrix::identity(3, 3));
        assert_eq!(r, RealMatrix::identity(3, 3));

        let s = 0.5f64.sqrt();
        let q = mat(&[&[s, s], &[s, -s]]);
        let (g, _) = basis_grammian_and_reciprocal(&q).unwrap();
        assert!(close(&g, &RealMatrix::identity(2, 2), 1e-15));

        let v = mat(&[&[1.0, 0.0], &[1.0, 1.0]]);
        let (g, r) = basis_grammian_and_reciprocal(&v).unwrap();
        assert!(close(&g, &mat(&[&[2.0, 1.0], &[1.0, 1.0]]), 1e-15));
        assert!(close(&r, &mat(&[&[1.0, 0.0], &[-1.0, 1.0]]), 1e-15));
        assert!(close(&(&r * &v), &RealMatrix::identity(2, 2), 1e-15));
    }

    #[test]
    fn completion_prefers_most_orthogonal_unit_vector() {
        let b = col(&[1.0, 1.0]);
        let extra = complete_basis(&b);
        assert_eq!(extra, col(&[1.0, 0.0]));
        let b = col(&[1.0, 0.0, 0.0]);
        let extra = complete_basis(&b);
        assert_eq!(extra.ncols(), 2);
        assert_eq!(rank(&RealMatrix::from_columns(&[b.column(0), extra.column(0), extra.column(1)]), None), 3);
    }

    #[test]
    fn null_and_range() {
        let m = mat(&[&[1.0, -2.0], &[1.0, -2.0]]);
        let ns = null_space(&m, 1e-12);
        assert_eq!(ns.ncols(), 1);
        assert!((&m * &ns).amax() < 1e-14);
        let rb = range_basis(&m, 1e-12);
        assert_eq!(rb.ncols(), 1);
        let wide = mat(&[&[1.0, 0.0, 0.0]]);
        assert_eq!(null_space(&wide, 1e-12).ncols(), 2);
    }

    #[test]
    fn psd_factor_reproduces() {
        let q = mat(&[&[4.0, 2.0], &[2.0, 1.0]]);
        let c = psd_factor(&q);
        assert!(close(&(c.transpose() * &c), &q, 1e-14));
    }

    #[test]
    fn halton_first_points() {
        assert_eq!(halton(1, 2), vec![0.5, 1.0 / 3.0]);
        assert_eq!(halton(2, 2), vec![0.25, 2.0 / 3.0]);
    }
}
