//! Stability tests: eigenvalue trichotomy, Lyapunov equation, stability
//! subspaces, sampled quadratic Lyapunov certificates and BIBO.

use crate::error::{Error, Result};
use crate::model::{linearize_at_equilibrium, Equilibrium, NonlinearModel};
use crate::numkit::{
    eigen, ensure_finite, ensure_square, halton, is_positive_definite, norm2, rcond, solve, symmetrize, Complex64,
    Definiteness, DefinitenessReport, RealMatrix, RealVector,
};
use crate::realization::{TransferMatrix, CANCEL_TOL};
use rayon::prelude::*;

/// Largest order accepted by the dense vectorized Lyapunov solver.
pub const LYAPUNOV_MAX_ORDER: usize = 30;

/// Half-width of the band around the imaginary axis, `1e-9 (1 + ||A||)`.
pub fn axis_tol(a: &RealMatrix) -> f64 {
    1e-9 * (1.0 + norm2(a))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityKind {
    AsymptoticallyStable,
    StableIsl,
    Unstable,
}

impl StabilityKind {
    pub fn name(self) -> &'static str {
        match self {
            StabilityKind::AsymptoticallyStable => "asymptoticallyStable",
            StabilityKind::StableIsl => "stableISL",
            StabilityKind::Unstable => "unstable",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityVerdict {
    pub kind: StabilityKind,
    pub eigenvalues: Vec<Complex64>,
    /// Eigenvalues responsible for the verdict: right-half-plane ones, or
    /// defective ones on the axis. Empty for asymptotic stability.
    pub witnesses: Vec<Complex64>,
    /// Eigenvalues inside the axis band whose sign could flip with the tolerance.
    pub near_axis: Vec<Complex64>,
    pub tol: f64,
}

pub fn lti_stability(a: &RealMatrix) -> Result<StabilityVerdict> {
    ensure_square(a)?;
    let es = eigen(a)?;
    let tol = axis_tol(a);
    let mut witnesses = Vec::new();
    let mut near_axis = Vec::new();
    let mut kind = StabilityKind::AsymptoticallyStable;
    for c in &es.clusters {
        if c.value.re > tol {
            kind = StabilityKind::Unstable;
            witnesses.push(c.value);
        } else if c.value.re >= -tol {
            near_axis.push(c.value);
            if c.geometric < c.algebraic {
                kind = StabilityKind::Unstable;
                witnesses.push(c.value);
            } else if kind == StabilityKind::AsymptoticallyStable {
                kind = StabilityKind::StableIsl;
            }
        }
    }
    if kind == StabilityKind::Unstable {
        // axis eigenvalues only explain the verdict when they are defective
        witnesses.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    }
    Ok(StabilityVerdict { kind, eigenvalues: es.values, witnesses, near_axis, tol })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovCertificate {
    pub p: RealMatrix,
    pub q: RealMatrix,
    /// `||Aᵀ P + P A + Q||_F`
    pub residual: f64,
    pub definiteness: DefinitenessReport,
}

/// Index of the unknown `P[i][j]`, `i <= j`, in the packed upper triangle.
fn packed(i: usize, j: usize, n: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

/// Solve `Aᵀ P + P A = -Q` for symmetric `P` via the `n(n+1)/2` packed
/// linear system.
pub fn solve_lyapunov(a: &RealMatrix, q: &RealMatrix) -> Result<LyapunovCertificate> {
    let n = ensure_square(a)?;
    ensure_finite(a, "A")?;
    if q.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!("Q must be {n}x{n}")));
    }
    ensure_finite(q, "Q")?;
    let qs = q.norm().max(f64::MIN_POSITIVE);
    let asym = (q - q.transpose()).norm();
    if asym > 1e-10 * qs {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    if n > LYAPUNOV_MAX_ORDER {
        return Err(Error::InvalidArgument(format!("Lyapunov solver is limited to order {LYAPUNOV_MAX_ORDER}")));
    }
    let q = symmetrize(q);
    let size = n * (n + 1) / 2;
    let mut m = RealMatrix::zeros(size, size);
    let mut rhs = RealMatrix::zeros(size, 1);
    for i in 0..n {
        for j in i..n {
            let row = packed(i, j, n);
            // (Aᵀ P)_ij = Σ_k A_ki P_kj ; (P A)_ij = Σ_k P_ik A_kj
            for k in 0..n {
                m[(row, packed(k, j, n))] += a[(k, i)];
                m[(row, packed(i, k, n))] += a[(k, j)];
            }
            rhs[(row, 0)] = -q[(i, j)];
        }
    }
    if size > 0 && rcond(&m) <= 1e3 * size as f64 * f64::EPSILON {
        return Err(Error::SingularLyapunovOperator);
    }
    let x = solve(&m, &rhs).map_err(|_| Error::SingularLyapunovOperator)?;
    let mut p = RealMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = x[(packed(i, j, n), 0)];
            p[(i, j)] = v;
            p[(j, i)] = v;
        }
    }
    let residual = (a.transpose() * &p + &p * a + &q).norm();
    let definiteness = is_positive_definite(&p)?;
    Ok(LyapunovCertificate { p, q, residual, definiteness })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovTest {
    pub asymptotically_stable: bool,
    /// `None` when the Lyapunov operator is singular (some `λi + λj = 0`).
    pub certificate: Option<LyapunovCertificate>,
}

/// Lyapunov equation with `Q = I`; asymptotically stable iff `P` is PD.
/// The verdict is cross-checked against [`lti_stability`].
pub fn lyapunov_stability_test(a: &RealMatrix) -> Result<LyapunovTest> {
    let n = ensure_square(a)?;
    let eig = lti_stability(a)?;
    let eig_stable = eig.kind == StabilityKind::AsymptoticallyStable;
    let result = match solve_lyapunov(a, &RealMatrix::identity(n, n)) {
        Ok(cert) => LyapunovTest {
            asymptotically_stable: cert.definiteness.verdict == Definiteness::PositiveDefinite,
            certificate: Some(cert),
        },
        Err(Error::SingularLyapunovOperator) => LyapunovTest { asymptotically_stable: false, certificate: None },
        Err(e) => return Err(e),
    };
    if result.asymptotically_stable != eig_stable {
        return Err(Error::InternalInconsistency(format!(
            "Lyapunov test says {}, eigenvalue test says {}",
            result.asymptotically_stable,
            eig.kind.name()
        )));
    }
    Ok(result)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubspacePair {
    pub stable_basis: RealMatrix,
    pub unstable_basis: RealMatrix,
}

/// Real bases of `Σ_s = span{v : Re λ < 0}` and `Σ_u = span{v : Re λ >= 0}`.
/// A complex pair contributes `Re v` and `Im v`.
pub fn stability_subspaces(a: &RealMatrix) -> Result<SubspacePair> {
    let n = ensure_square(a)?;
    let es = eigen(a)?;
    if es.has_repeated() {
        return Err(Error::RepeatedEigenvalues);
    }
    let mut stable = Vec::new();
    let mut unstable = Vec::new();
    for (k, lam) in es.values.iter().enumerate() {
        if lam.im < 0.0 {
            continue;
        }
        let v = es.right_vectors.column(k);
        let target = if lam.re < 0.0 { &mut stable } else { &mut unstable };
        target.push(v.map(|z| z.re));
        if lam.im > 0.0 {
            target.push(v.map(|z| z.im));
        }
    }
    let to_mat = |cols: &[RealVector]| {
        let mut m = RealMatrix::zeros(n, cols.len());
        for (j, c) in cols.iter().enumerate() {
            m.set_column(j, c);
        }
        m
    };
    Ok(SubspacePair { stable_basis: to_mat(&stable), unstable_basis: to_mat(&unstable) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub certified: bool,
    /// Largest `2 xᵀ P f(x) / |x|²` over the samples.
    pub worst_value: f64,
    pub counterexample: Option<RealVector>,
    pub samples: usize,
}

pub const DEFAULT_SCAN_SAMPLES: usize = 10_000;
pub const DEFAULT_SCAN_MARGIN: f64 = 1e-9;

/// Sample the sublevel set `{xᵀ P x <= level}` with a Halton sequence and
/// test `∇V · f = 2 xᵀ P f(x) < -margin |x|²` at each point (`u = 0`, `t = 0`).
///
/// This is a falsification scan, not a proof: a certified result means no
/// sample violated the decrease condition.
pub fn quadratic_lyapunov_scan(
    model: &NonlinearModel,
    p: &RealMatrix,
    level: f64,
    samples: usize,
    margin: f64,
) -> Result<ScanResult> {
    let n = model.n;
    if p.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!("P must be {n}x{n}")));
    }
    if n == 0 || n > 16 {
        return Err(Error::InvalidArgument("scan supports 1 <= n <= 16".into()));
    }
    if !(level > 0.0 && level.is_finite()) {
        return Err(Error::InvalidArgument("level must be positive".into()));
    }
    let pd = is_positive_definite(p)?;
    if pd.verdict != Definiteness::PositiveDefinite {
        return Err(Error::InvalidArgument("P must be positive definite".into()));
    }
    let chol = symmetrize(p).cholesky().ok_or_else(|| Error::InvalidArgument("P is not Cholesky-factorable".into()))?;
    let lt = chol.l().transpose();
    let scale = level.sqrt();
    let mut pts = Vec::with_capacity(samples);
    let mut idx = 1u64;
    let cap = (samples as u64).saturating_mul(1u64 << n.min(20)).saturating_add(1000);
    while pts.len() < samples && idx < cap {
        let y: Vec<f64> = halton(idx, n).into_iter().map(|h| 2.0 * h - 1.0).collect();
        idx += 1;
        let r2: f64 = y.iter().map(|v| v * v).sum();
        if r2 > 0.0 && r2 <= 1.0 {
            let yv = RealVector::from_vec(y);
            // x = sqrt(level) L^{-T} y, so xᵀ P x = level |y|²
            let x = lt
                .clone()
                .solve_upper_triangular(&yv)
                .ok_or_else(|| Error::InvalidArgument("P is singular".into()))?
                * scale;
            pts.push(x);
        }
    }
    let u = RealVector::zeros(model.m);
    let values: Vec<Result<f64>> = pts
        .par_iter()
        .map(|x| {
            let f = model.eval_f(x, &u, 0.0)?;
            Ok(2.0 * x.dot(&(p * f)) / x.norm_squared())
        })
        .collect();
    let mut worst = f64::NEG_INFINITY;
    let mut worst_at = None;
    for (k, v) in values.into_iter().enumerate() {
        let v = v?;
        let v = if v.is_finite() { v } else { f64::INFINITY };
        if v > worst {
            worst = v;
            worst_at = Some(k);
        }
    }
    let certified = worst < -margin;
    Ok(ScanResult {
        certified,
        worst_value: worst,
        counterexample: if certified { None } else { worst_at.map(|k| pts[k].clone()) },
        samples: pts.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearizationVerdict {
    AsympStable,
    Unstable,
    Inconclusive,
}

impl LinearizationVerdict {
    pub fn name(self) -> &'static str {
        match self {
            LinearizationVerdict::AsympStable => "asympStable",
            LinearizationVerdict::Unstable => "unstable",
            LinearizationVerdict::Inconclusive => "inconclusive",
        }
    }
}

/// Stability of a nonlinear equilibrium from its linearization: Hurwitz means
/// asymptotically stable, a right-half-plane eigenvalue means unstable, and
/// anything on the axis says nothing.
pub fn linearization_verdict(model: &NonlinearModel, eq: &Equilibrium) -> Result<(LinearizationVerdict, RealMatrix)> {
    let lin = linearize_at_equilibrium(model, eq, None)?;
    let a = lin.a;
    let es = eigen(&a)?;
    let tol = axis_tol(&a);
    let max_re = es.max_real_part();
    let v = if es.values.is_empty() || max_re < -tol {
        LinearizationVerdict::AsympStable
    } else if max_re > tol {
        LinearizationVerdict::Unstable
    } else {
        LinearizationVerdict::Inconclusive
    };
    Ok((v, a))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiboVerdict {
    pub stable: bool,
    /// Poles of the reduced entries, row-major.
    pub poles: Vec<Complex64>,
    /// `(row, col, root)` for every cancelled numerator/denominator root.
    pub cancellations: Vec<(usize, usize, Complex64)>,
}

pub fn bibo_stability(tm: &TransferMatrix) -> Result<BiboVerdict> {
    let mut poles = Vec::new();
    let mut cancellations = Vec::new();
    let mut stable = true;
    for i in 0..tm.p() {
        for j in 0..tm.m() {
            let (g, cancelled) = tm.get(i, j).cancel(CANCEL_TOL)?;
            for c in cancelled {
                cancellations.push((i, j, c));
            }
            if !g.is_proper() {
                stable = false;
            }
            if g.num.is_zero() {
                continue;
            }
            for p in g.poles()? {
                if p.re >= -1e-9 * (1.0 + p.norm()) {
                    stable = false;
                }
                poles.push(p);
            }
        }
    }
    Ok(BiboVerdict { stable, poles, cancellations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin, find_equilibrium, Model, VectorField};
    use crate::numkit::{mat, vector};
    use crate::realization::RationalFunction;
    use std::sync::Arc;

    #[test]
    fn trichotomy_examples() {
        assert_eq!(lti_stability(&RealMatrix::zeros(2, 2)).unwrap().kind, StabilityKind::StableIsl);
        assert_eq!(lti_stability(&mat(&[&[0.0, 1.0], &[0.0, 0.0]])).unwrap().kind, StabilityKind::Unstable);
        let v = lti_stability(&mat(&[&[0.0, 1.0], &[2.0, 1.0]])).unwrap();
        assert_eq!(v.kind, StabilityKind::Unstable);
        assert_eq!(v.witnesses.len(), 1);
        assert!((v.witnesses[0] - Complex64::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn lyapunov_examples() {
        let c = solve_lyapunov(&mat(&[&[0.0, 1.0], &[-2.0, -2.0]]), &RealMatrix::identity(2, 2)).unwrap();
        assert!((c.p.clone() - mat(&[&[1.25, 0.25], &[0.25, 0.375]])).amax() < 1e-12);
        assert_eq!(c.definiteness.verdict, Definiteness::PositiveDefinite);
        let c = solve_lyapunov(&(-RealMatrix::identity(3, 3)), &RealMatrix::identity(3, 3)).unwrap();
        assert!((c.p - RealMatrix::identity(3, 3) * 0.5).amax() < 1e-14);
        let c = solve_lyapunov(&mat(&[&[-1.0, 1.0], &[-2.0, 3.0]]), &RealMatrix::identity(2, 2)).unwrap();
        assert_ne!(c.definiteness.verdict, Definiteness::PositiveDefinite);
        assert_eq!(
            solve_lyapunov(&mat(&[&[0.0, 1.0], &[-1.0, 0.0]]), &RealMatrix::identity(2, 2)),
            Err(Error::SingularLyapunovOperator)
        );
    }

    #[test]
    fn lyapunov_test_paths() {
        assert!(lyapunov_stability_test(&mat(&[&[0.0, 1.0], &[-2.0, -2.0]])).unwrap().asymptotically_stable);
        assert!(!lyapunov_stability_test(&RealMatrix::identity(2, 2)).unwrap().asymptotically_stable);
        let rot = mat(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        let t = lyapunov_stability_test(&rot).unwrap();
        assert!(!t.asymptotically_stable && t.certificate.is_none());
    }

    #[test]
    fn subspaces_example() {
        let a = mat(&[&[-2.0, 1.0, -1.0], &[-2.0, -5.0, 6.0], &[-1.0, -3.0, 4.0]]);
        let s = stability_subspaces(&a).unwrap();
        assert_eq!(s.stable_basis.ncols(), 2);
        assert_eq!(s.unstable_basis.ncols(), 1);
        let u = s.unstable_basis.column(0);
        assert!((u[1] - u[2]).abs() < 1e-10 && u[0].abs() < 1e-10);
    }

    #[test]
    fn scan_examples() {
        let f: VectorField = Arc::new(|x, _, _| vector(&[-x[0] - x[1], x[0] - x[1] + x[1].powi(3)]));
        let h: VectorField = Arc::new(|x, _, _| vector(&[x[0]]));
        let m = NonlinearModel::new(2, 1, 1, f, h);
        let r = quadratic_lyapunov_scan(&m, &RealMatrix::identity(2, 2), 1.0, 2000, 1e-9).unwrap();
        assert!(r.certified, "{r:?}");
        // far outside the region the cubic term wins
        let r = quadratic_lyapunov_scan(&m, &RealMatrix::identity(2, 2), 9.0, 2000, 1e-9).unwrap();
        assert!(!r.certified && r.counterexample.is_some());

        let Model::Nonlinear(vdp) = builtin("vanderpol", &Default::default()).unwrap() else { panic!() };
        let eps = 1.0 / 6.0;
        let p = mat(&[&[0.5, eps / 2.0], &[eps / 2.0, 0.5]]);
        assert!(quadratic_lyapunov_scan(&vdp, &p, 0.1, 2000, 1e-9).unwrap().certified);
    }

    #[test]
    fn linearization_verdicts() {
        let Model::Nonlinear(vdp) = builtin("vanderpol", &Default::default()).unwrap() else { panic!() };
        let eq = find_equilibrium(&vdp, &vector(&[0.0]), &vector(&[0.0, 0.0]), 1e-12).unwrap();
        assert_eq!(linearization_verdict(&vdp, &eq).unwrap().0, LinearizationVerdict::AsympStable);

        let f: VectorField = Arc::new(|x, _, _| vector(&[-x[0].powi(3)]));
        let h: VectorField = Arc::new(|x, _, _| vector(&[x[0]]));
        let cubic = NonlinearModel::new(1, 1, 1, f, h);
        let eq = Equilibrium { xe: vector(&[0.0]), ue: vector(&[0.0]), residual: 0.0 };
        assert_eq!(linearization_verdict(&cubic, &eq).unwrap().0, LinearizationVerdict::Inconclusive);

        let Model::Nonlinear(pend) = builtin("pendulum", &Default::default()).unwrap() else { panic!() };
        let eq = find_equilibrium(&pend, &vector(&[0.0]), &vector(&[3.0, 0.0]), 1e-12).unwrap();
        assert_eq!(linearization_verdict(&pend, &eq).unwrap().0, LinearizationVerdict::Unstable);
    }

    #[test]
    fn bibo_examples() {
        let g = RationalFunction::from_coeffs(&[1.0, -2.0], &[1.0, -1.0, -2.0]).unwrap();
        let v = bibo_stability(&TransferMatrix::siso(g)).unwrap();
        assert!(v.stable);
        assert_eq!(v.cancellations.len(), 1);
        assert!((v.cancellations[0].2 - Complex64::new(2.0, 0.0)).norm() < 1e-9);
        let g = RationalFunction::from_coeffs(&[1.0], &[1.0, 1.0]).unwrap();
        assert!(bibo_stability(&TransferMatrix::siso(g)).unwrap().stable);
        let g = RationalFunction::from_coeffs(&[1.0], &[1.0, 0.0]).unwrap();
        assert!(!bibo_stability(&TransferMatrix::siso(g)).unwrap().stable);
    }
}
