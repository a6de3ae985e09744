use super::{
    ensure_finite, ensure_square, norm2, rcond_complex, singular_values_complex, smallest_right_singular_complex,
    solve_complex, to_complex, Complex64, ComplexMatrix, RealMatrix,
};
use crate::error::{Error, Result};
use nalgebra::linalg::Schur;

/// Eigenvalues closer than `CLUSTER_TOL * (1 + |λ|)` are treated as one
/// repeated eigenvalue.
pub(crate) const CLUSTER_TOL: f64 = 1e-6;
const DEFAULT_NULLITY_TOL: f64 = 1e-9;

/// One distinct eigenvalue with its multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenCluster {
    pub value: Complex64,
    pub algebraic: usize,
    pub geometric: usize,
    /// Positions of this eigenvalue in [`EigenStructure::values`].
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenStructure {
    /// Eigenvalues repeated by algebraic multiplicity, ordered by real part
    /// then imaginary part.
    pub values: Vec<Complex64>,
    /// Column `k` is a unit eigenvector for `values[k]`. Defective clusters
    /// repeat their last eigenvector, so the matrix is then singular.
    pub right_vectors: ComplexMatrix,
    pub clusters: Vec<EigenCluster>,
    pub is_diagonalizable: bool,
}

impl EigenStructure {
    pub fn order(&self) -> usize {
        self.values.len()
    }

    /// Geometric multiplicity of the distinct eigenvalue nearest to `lambda`.
    pub fn geo_multiplicity(&self, lambda: Complex64) -> Option<usize> {
        self.clusters
            .iter()
            .min_by(|a, b| (a.value - lambda).norm().total_cmp(&(b.value - lambda).norm()))
            .map(|c| c.geometric)
    }

    pub fn max_real_part(&self) -> f64 {
        self.values.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn has_repeated(&self) -> bool {
        self.clusters.iter().any(|c| c.algebraic > 1)
    }
}

/// Real Schur eigenvalues. The unshifted-restart QR in the backend can stall
/// on highly symmetric inputs (companion matrices of even polynomials), so a
/// failed attempt is retried after a fixed orthogonal similarity.
pub(crate) fn schur_eigenvalues(a: &RealMatrix) -> Result<Vec<Complex64>> {
    if let Some(schur) = Schur::try_new(a.clone(), f64::EPSILON, 100_000) {
        return Ok(schur.complex_eigenvalues().iter().copied().collect());
    }
    let n = a.nrows();
    let v = nalgebra::DVector::from_fn(n, |i, _| 1.0 + (i as f64 + 1.0).sqrt()).normalize();
    let h = RealMatrix::identity(n, n) - &v * v.transpose() * 2.0;
    let rotated = &h * a * &h;
    Schur::try_new(rotated, f64::EPSILON, 100_000)
        .map(|s| s.complex_eigenvalues().iter().copied().collect())
        .ok_or_else(|| Error::BackendFailure("Schur iteration did not converge".into()))
}

fn normalize_phase(v: &mut nalgebra::DVector<Complex64>) {
    let nrm = v.norm();
    if nrm == 0.0 {
        return;
    }
    let mut best = 0;
    for i in 0..v.len() {
        if v[i].norm() > v[best].norm() + 1e-12 * nrm {
            best = i;
        }
    }
    let phase = v[best] / v[best].norm();
    let scale = phase.conj() / nrm;
    for x in v.iter_mut() {
        *x *= scale;
        if x.im.abs() <= 1e-15 {
            x.im = 0.0;
        }
    }
}

/// Group sorted eigenvalues into clusters (single linkage at `CLUSTER_TOL`).
fn cluster_values(mut vals: Vec<Complex64>) -> Vec<(Complex64, usize)> {
    vals.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    let mut used = vec![false; vals.len()];
    for i in 0..vals.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut group = vec![vals[i]];
        let mut k = 0;
        while k < group.len() {
            let g = group[k];
            for j in 0..vals.len() {
                if !used[j] && (vals[j] - g).norm() <= CLUSTER_TOL * (1.0 + g.norm()) {
                    used[j] = true;
                    group.push(vals[j]);
                }
            }
            k += 1;
        }
        groups.push(group);
    }
    let mut out: Vec<(Complex64, usize)> = groups
        .into_iter()
        .map(|g| {
            let n = g.len();
            let mean = g.iter().fold(Complex64::new(0.0, 0.0), |acc, v| acc + v) / n as f64;
            (mean, n)
        })
        .collect();
    out.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    out
}

/// Eigen decomposition with default tolerances (relative nullity threshold 1e-9).
pub fn eigen(a: &RealMatrix) -> Result<EigenStructure> {
    eigen_with_tol(a, DEFAULT_NULLITY_TOL)
}

/// Eigenvalues via real Schur form; eigenvectors and geometric multiplicities
/// from the null space of `A - λI`, thresholded at `nullity_tol` relative to
/// `||A|| + |λ|`.
pub fn eigen_with_tol(a: &RealMatrix, nullity_tol: f64) -> Result<EigenStructure> {
    let n = ensure_square(a)?;
    ensure_finite(a, "A")?;
    if n == 0 {
        return Ok(EigenStructure {
            values: Vec::new(),
            right_vectors: ComplexMatrix::zeros(0, 0),
            clusters: Vec::new(),
            is_diagonalizable: true,
        });
    }
    let raw = schur_eigenvalues(a)?;
    let mut clusters_raw = cluster_values(raw);
    // conjugate pairs must stay exact mirrors for real input
    let anorm = norm2(a);
    for (v, _) in clusters_raw.iter_mut() {
        if v.im.abs() <= CLUSTER_TOL * (1.0 + v.norm()) {
            v.im = 0.0;
        }
    }
    let ac = to_complex(a);
    let mut values = Vec::with_capacity(n);
    let mut vectors = ComplexMatrix::zeros(n, n);
    let mut clusters = Vec::new();
    let mut diag = true;
    let mut conj_cache: Vec<(Complex64, Vec<nalgebra::DVector<Complex64>>, usize)> = Vec::new();
    for (lambda, alg) in clusters_raw {
        let (vecs, geo) = if let Some(pos) = conj_cache
            .iter()
            .position(|(v, _, _)| (v.conj() - lambda).norm() <= CLUSTER_TOL * (1.0 + lambda.norm()) && lambda.im < 0.0)
        {
            let (_, vs, g) = &conj_cache[pos];
            (vs.iter().map(|v| v.map(|z| z.conj())).collect::<Vec<_>>(), *g)
        } else {
            let shifted = &ac - ComplexMatrix::identity(n, n) * lambda;
            let sv = singular_values_complex(&shifted);
            let thresh = nullity_tol * (anorm + lambda.norm()).max(f64::MIN_POSITIVE);
            let count = sv.iter().filter(|&&s| s <= thresh).count().clamp(1, alg);
            let (basis, _) = smallest_right_singular_complex(&shifted, count);
            let mut vs = Vec::with_capacity(count);
            for j in 0..count {
                let mut v = basis.column(j).into_owned();
                if lambda.im == 0.0 {
                    // real eigenvalue of a real matrix: rotate onto a real vector
                    normalize_phase(&mut v);
                    for z in v.iter_mut() {
                        z.im = 0.0;
                    }
                    let nrm = v.norm();
                    if nrm > 0.0 {
                        v /= Complex64::new(nrm, 0.0);
                    }
                }
                normalize_phase(&mut v);
                vs.push(v);
            }
            if lambda.im > 0.0 {
                conj_cache.push((lambda, vs.clone(), count));
            }
            (vs, count)
        };
        if geo < alg {
            diag = false;
        }
        let start = values.len();
        for k in 0..alg {
            values.push(lambda);
            let v = &vecs[k.min(vecs.len() - 1)];
            vectors.set_column(start + k, v);
        }
        clusters.push(EigenCluster { value: lambda, algebraic: alg, geometric: geo, indices: (start..start + alg).collect() });
    }
    Ok(EigenStructure { values, right_vectors: vectors, clusters, is_diagonalizable: diag })
}

/// One Jordan block: eigenvalue and size.
#[derive(Debug, Clone, PartialEq)]
pub struct JordanBlock {
    pub value: Complex64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JordanLikeForm {
    /// Generalized modal matrix; its columns are eigenvector chains with
    /// `(A - λI) x_k = x_{k-1}`.
    pub transform: ComplexMatrix,
    pub blocks: Vec<JordanBlock>,
    /// Block-diagonal Jordan matrix with ones on the superdiagonal inside
    /// each block.
    pub form: ComplexMatrix,
    /// `||T^{-1} A T - J|| / (1 + ||A||)`.
    pub residual: f64,
}

const JORDAN_MAX_ORDER: usize = 8;

fn matrix_power(m: &ComplexMatrix, k: usize) -> ComplexMatrix {
    let n = m.nrows();
    let mut out = ComplexMatrix::identity(n, n);
    for _ in 0..k {
        out = &out * m;
    }
    out
}

fn nullity_at(m: &ComplexMatrix, tol: f64, scale: f64) -> usize {
    let sv = singular_values_complex(m);
    sv.iter().filter(|&&s| s <= tol * scale.max(f64::MIN_POSITIVE)).count()
}

fn span_rank(cols: &[nalgebra::DVector<Complex64>], n: usize, tol: f64) -> usize {
    if cols.is_empty() {
        return 0;
    }
    let mut m = ComplexMatrix::zeros(n, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    super::rank_complex(&m, tol)
}

/// Jordan form by explicit eigenvector chains, for small matrices only.
///
/// Rank decisions on powers of `A - λI` use the relative threshold `tol`. If
/// the nullity sequence is inconsistent, or the resulting transform is badly
/// conditioned, the computation refuses with `IllConditioned` instead of
/// guessing a block structure.
pub fn jordan_like(a: &RealMatrix, tol: f64) -> Result<JordanLikeForm> {
    let n = ensure_square(a)?;
    if n > JORDAN_MAX_ORDER {
        return Err(Error::InvalidArgument(format!("jordan_like supports order <= {JORDAN_MAX_ORDER}, got {n}")));
    }
    let es = eigen(a)?;
    let ac = to_complex(a);
    let anorm = norm2(a).max(1.0);
    let ident = ComplexMatrix::identity(n, n);

    struct Chain {
        value: Complex64,
        cols: Vec<nalgebra::DVector<Complex64>>,
        pivot: usize,
    }
    let mut chains: Vec<Chain> = Vec::new();

    for cluster in &es.clusters {
        let lambda = cluster.value;
        let k = cluster.algebraic;
        let nmat = &ac - &ident * lambda;
        let scale = anorm + lambda.norm();
        let mut nullities = vec![0usize];
        for j in 1..=k {
            let p = matrix_power(&nmat, j);
            nullities.push(nullity_at(&p, tol, scale.powi(j as i32)));
        }
        if nullities[k] != k || nullities.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::IllConditioned(format!(
                "nullity sequence {nullities:?} inconsistent with algebraic multiplicity {k} at λ = {lambda}"
            )));
        }
        // blocks of size >= j
        let at_least: Vec<usize> = (0..=k + 1)
            .map(|j| if j == 0 || j > k { 0 } else { nullities[j] - nullities[j - 1] })
            .collect();
        if at_least.windows(2).skip(1).any(|w| w[1] > w[0]) {
            return Err(Error::IllConditioned("Weyr characteristic is not monotone".into()));
        }
        let mut chosen: Vec<nalgebra::DVector<Complex64>> = Vec::new();
        for s in (1..=k).rev() {
            let exact = at_least[s] - at_least.get(s + 1).copied().unwrap_or(0);
            if exact == 0 {
                continue;
            }
            let ker_s = smallest_right_singular_complex(&matrix_power(&nmat, s), nullities[s]).0;
            let ker_prev = if s > 1 {
                smallest_right_singular_complex(&matrix_power(&nmat, s - 1), nullities[s - 1]).0
            } else {
                ComplexMatrix::zeros(n, 0)
            };
            let mut base: Vec<_> = (0..ker_prev.ncols()).map(|j| ker_prev.column(j).into_owned()).collect();
            base.extend(chosen.iter().cloned());
            let mut picks = 0;
            for j in 0..ker_s.ncols() {
                if picks == exact {
                    break;
                }
                let cand = ker_s.column(j).into_owned();
                let before = span_rank(&base, n, 1e-8);
                let mut trial = base.clone();
                trial.push(cand.clone());
                if span_rank(&trial, n, 1e-8) > before {
                    let mut cols = vec![cand.clone()];
                    for _ in 1..s {
                        let next = &nmat * cols.last().unwrap();
                        cols.push(next);
                    }
                    cols.reverse();
                    base.extend(cols.iter().cloned());
                    chosen.extend(cols.iter().cloned());
                    let first = &cols[0];
                    let pivot = (0..n).max_by(|&x, &y| first[x].norm().total_cmp(&first[y].norm()).then(y.cmp(&x))).unwrap_or(0);
                    chains.push(Chain { value: lambda, cols, pivot });
                    picks += 1;
                }
            }
            if picks < exact {
                return Err(Error::IllConditioned(format!("could not find {exact} chains of length {s} at λ = {lambda}")));
            }
        }
    }

    chains.sort_by(|x, y| {
        x.pivot
            .cmp(&y.pivot)
            .then(x.value.re.total_cmp(&y.value.re))
            .then(x.value.im.total_cmp(&y.value.im))
            .then(y.cols.len().cmp(&x.cols.len()))
    });
    let mut transform = ComplexMatrix::zeros(n, n);
    let mut form = ComplexMatrix::zeros(n, n);
    let mut blocks = Vec::new();
    let mut c = 0;
    for ch in &chains {
        for (i, v) in ch.cols.iter().enumerate() {
            transform.set_column(c + i, v);
            form[(c + i, c + i)] = ch.value;
            if i > 0 {
                form[(c + i - 1, c + i)] = Complex64::new(1.0, 0.0);
            }
        }
        blocks.push(JordanBlock { value: ch.value, size: ch.cols.len() });
        c += ch.cols.len();
    }
    if c != n {
        return Err(Error::IllConditioned(format!("built {c} chain vectors for order {n}")));
    }
    if rcond_complex(&transform) < 1e-10 {
        return Err(Error::IllConditioned("generalized modal matrix is nearly singular".into()));
    }
    let t_inv = solve_complex(&transform, &ident)?;
    let back = &t_inv * &ac * &transform;
    let residual = (&back - &form).norm() / (1.0 + anorm);
    if residual > 1e-6 {
        return Err(Error::IllConditioned(format!("Jordan reconstruction residual {residual:e}")));
    }
    Ok(JordanLikeForm { transform, blocks, form, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::mat;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eigen_two_by_two_example() {
        let a = mat(&[&[0.0, 1.0], &[8.0, -2.0]]);
        let es = eigen(&a).unwrap();
        assert!((es.values[0] - c(-4.0, 0.0)).norm() < 1e-12);
        assert!((es.values[1] - c(2.0, 0.0)).norm() < 1e-12);
        let v1 = es.right_vectors.column(0);
        assert!((v1[1] / v1[0] - c(-4.0, 0.0)).norm() < 1e-12);
        let v2 = es.right_vectors.column(1);
        assert!((v2[1] / v2[0] - c(2.0, 0.0)).norm() < 1e-12);
        assert!(es.is_diagonalizable);
    }

    #[test]
    fn eigen_identity() {
        let es = eigen(&RealMatrix::identity(3, 3)).unwrap();
        assert_eq!(es.clusters.len(), 1);
        assert_eq!(es.clusters[0].algebraic, 3);
        assert_eq!(es.clusters[0].geometric, 3);
        assert!(es.is_diagonalizable);
    }

    #[test]
    fn eigen_defective_example() {
        let a = mat(&[&[1.0, 1.0, 2.0], &[0.0, 1.0, 3.0], &[0.0, 0.0, 2.0]]);
        let es = eigen(&a).unwrap();
        assert_eq!(es.geo_multiplicity(c(1.0, 0.0)), Some(1));
        assert_eq!(es.geo_multiplicity(c(2.0, 0.0)), Some(1));
        assert!(!es.is_diagonalizable);
        let sum: Complex64 = es.values.iter().sum();
        assert!((sum.re - 4.0).abs() < 1e-12);
    }

    #[test]
    fn complex_pairs_are_conjugate() {
        let a = mat(&[&[0.0, 1.0, 0.0], &[-2.0, -2.0, 1.0], &[0.0, 0.0, -3.0]]);
        let es = eigen(&a).unwrap();
        let cx: Vec<_> = es.values.iter().filter(|v| v.im != 0.0).collect();
        assert_eq!(cx.len(), 2);
        assert_eq!(*cx[0], cx[1].conj());
        for k in 0..3 {
            let v = es.right_vectors.column(k).into_owned();
            let r = &to_complex(&a) * &v - &v * es.values[k];
            assert!(r.norm() < 1e-12);
        }
    }

    #[test]
    fn jordan_example() {
        let a = mat(&[&[1.0, 1.0, 2.0], &[0.0, 1.0, 3.0], &[0.0, 0.0, 2.0]]);
        let j = jordan_like(&a, 1e-9).unwrap();
        assert_eq!(j.blocks, vec![JordanBlock { value: c(1.0, 0.0), size: 2 }, JordanBlock { value: c(2.0, 0.0), size: 1 }]);
        let want = to_complex(&mat(&[&[1.0, 1.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 2.0]]));
        assert!((&j.form - want).norm() < 1e-12);
        // chain property
        let n1 = to_complex(&a) - ComplexMatrix::identity(3, 3) * c(1.0, 0.0);
        let x1 = j.transform.column(0).into_owned();
        let x2 = j.transform.column(1).into_owned();
        assert!((&n1 * &x2 - &x1).norm() < 1e-10);
        assert!((&n1 * &x1).norm() < 1e-10);
    }

    #[test]
    fn jordan_diagonal_and_nilpotent() {
        let d = mat(&[&[3.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 2.0]]);
        let j = jordan_like(&d, 1e-9).unwrap();
        assert!(j.blocks.iter().all(|b| b.size == 1));
        assert!((&j.transform - ComplexMatrix::identity(3, 3)).norm() < 1e-14);

        let nil = mat(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let j = jordan_like(&nil, 1e-9).unwrap();
        assert_eq!(j.blocks, vec![JordanBlock { value: c(0.0, 0.0), size: 2 }]);
        // chain x = (1,0) eigenvector, y = (0,1) with N y = x
        assert!((j.transform[(0, 0)].norm() - 1.0).abs() < 1e-14);
        assert!(j.transform[(1, 0)].norm() < 1e-14);
    }

    #[test]
    fn jordan_rejects_large_order() {
        let a = RealMatrix::identity(9, 9);
        assert!(matches!(jordan_like(&a, 1e-9), Err(Error::InvalidArgument(_))));
    }
}
