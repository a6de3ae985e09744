//! Linear-quadratic regulation: Riccati differential and algebraic equations,
//! Hamiltonian solutions, return difference and the symmetric root locus.

use crate::error::{Error, Result};
use crate::model::{builtin, LinearDynamics, Model, StateSpace};
use crate::numkit::{
    eigen, ensure_square, inverse, is_positive_definite, norm2, psd_factor, rcond_complex, singular_values_complex,
    col, mat, solve, solve_complex, symmetrize, to_complex, Complex64, ComplexMatrix, Definiteness,
    Polynomial, RealMatrix, RealVector,
};
use crate::realization::{leverrier_faddeev, RationalFunction};
use crate::stability::axis_tol;
use crate::structural::structural_analysis;
use crate::synthesis::spectrum_deviation;
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Riccati solutions whose entries exceed this magnitude are treated as escaping.
pub const ESCAPE_BOUND: f64 = 1e150;
/// Largest accepted condition number of `U11` in `P̄ = U21 U11⁻¹`.
pub const U11_COND_MAX: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    pub q: RealMatrix,
    pub r: RealMatrix,
    /// Terminal weight; ignored by the infinite-horizon solver.
    pub m: RealMatrix,
}

impl Weights {
    pub fn new(q: RealMatrix, r: RealMatrix, m: RealMatrix) -> Self {
        Self { q, r, m }
    }

    /// `(Q, R)` with a zero terminal weight.
    pub fn running(q: RealMatrix, r: RealMatrix) -> Self {
        let n = q.nrows();
        Self { q, r, m: RealMatrix::zeros(n, n) }
    }

    /// Shapes, symmetry, `Q, M ⪰ 0` and `R ≻ 0`.
    pub fn validate(&self, n: usize, m: usize) -> Result<()> {
        for (mat, rows, name) in [(&self.q, n, "Q"), (&self.r, m, "R"), (&self.m, n, "M")] {
            if mat.shape() != (rows, rows) {
                return Err(Error::DimensionMismatch(format!("{name} must be {rows}x{rows}")));
            }
        }
        for (mat, name) in [(&self.q, "Q"), (&self.m, "M")] {
            if n > 0 && is_positive_definite(mat)?.verdict == Definiteness::Indefinite {
                return Err(Error::InvalidArgument(format!("{name} must be positive semidefinite")));
            }
        }
        if m > 0 && is_positive_definite(&self.r)?.verdict != Definiteness::PositiveDefinite {
            return Err(Error::InvalidArgument("R must be positive definite".into()));
        }
        Ok(())
    }
}

/// `B R⁻¹ Bᵀ`.
fn s_matrix(b: &RealMatrix, r: &RealMatrix) -> Result<RealMatrix> {
    Ok(symmetrize(&(b * solve(r, &b.transpose())?)))
}

/// `[[A, -B R⁻¹ Bᵀ], [-Q, -Aᵀ]]`.
pub fn hamiltonian(a: &RealMatrix, b: &RealMatrix, q: &RealMatrix, r: &RealMatrix) -> Result<RealMatrix> {
    let n = ensure_square(a)?;
    let s = s_matrix(b, r)?;
    let mut h = RealMatrix::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(a);
    h.view_mut((0, n), (n, n)).copy_from(&(-s));
    h.view_mut((n, 0), (n, n)).copy_from(&(-q));
    h.view_mut((n, n), (n, n)).copy_from(&(-a.transpose()));
    Ok(h)
}

/// Time-indexed Riccati solution on an ascending grid with `P(t1) = M`.
#[derive(Debug, Clone, PartialEq)]
pub struct RdeSolution {
    pub times: Vec<f64>,
    pub p: Vec<RealMatrix>,
    /// `K(t) = R⁻¹ Bᵀ(t) P(t)`.
    pub k: Vec<RealMatrix>,
    /// Largest midpoint residual `‖Ṗ + Q + PA + AᵀP - P B R⁻¹ Bᵀ P‖_F`.
    pub residual: f64,
}

impl RdeSolution {
    /// Linear interpolation of `P` on the grid (clamped at the ends).
    pub fn p_at(&self, t: f64) -> RealMatrix {
        let ts = &self.times;
        if t <= ts[0] {
            return self.p[0].clone();
        }
        let last = ts.len() - 1;
        if t >= ts[last] {
            return self.p[last].clone();
        }
        let i = ts.partition_point(|&x| x <= t) - 1;
        let w = (t - ts[i]) / (ts[i + 1] - ts[i]);
        &self.p[i] * (1.0 - w) + &self.p[i + 1] * w
    }

    /// `V°(x0, t0) = x0ᵀ P(t0) x0`.
    pub fn value(&self, x0: &RealVector) -> f64 {
        x0.dot(&(&self.p[0] * x0))
    }
}

/// Default RDE grid: `2000 max(‖A‖, 1) (t1 - t0)` steps, clamped to `[1000, 200000]`.
pub fn default_rde_steps(a_norm: f64, horizon: f64) -> usize {
    let raw = (2000.0 * a_norm.max(1.0) * horizon).ceil();
    raw.clamp(1000.0, 200_000.0) as usize
}

fn riccati_rhs(p: &RealMatrix, a: &RealMatrix, s: &RealMatrix, q: &RealMatrix) -> RealMatrix {
    // dP/dτ with τ = t1 - t
    q + p * a + a.transpose() * p - p * s * p
}

/// Backward RK4 for `-Ṗ = Q + PA + AᵀP - P B R⁻¹ Bᵀ P`, `P(t1) = M`,
/// symmetrized after every step.
pub fn solve_rde(
    model: &dyn LinearDynamics,
    w: &Weights,
    t0: f64,
    t1: f64,
    steps: Option<usize>,
) -> Result<RdeSolution> {
    let (n, m) = (model.n(), model.m());
    w.validate(n, m)?;
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(Error::InvalidHorizon(format!("need finite t0 < t1, got [{t0}, {t1}]")));
    }
    let steps = steps.unwrap_or_else(|| default_rde_steps(norm2(&model.a_at(t0)), t1 - t0)).max(1);
    let h = (t1 - t0) / steps as f64;
    let rinv = inverse(&w.r)?;
    let coeffs = |t: f64| -> (RealMatrix, RealMatrix) {
        let b = model.b_at(t);
        (model.a_at(t), symmetrize(&(&b * &rinv * b.transpose())))
    };
    let mut rev_p = Vec::with_capacity(steps + 1);
    let mut rev_t = Vec::with_capacity(steps + 1);
    let mut p = symmetrize(&w.m);
    rev_p.push(p.clone());
    rev_t.push(t1);
    let mut residual = 0.0f64;
    for k in 0..steps {
        let t = t1 - h * k as f64;
        let tn = if k + 1 == steps { t0 } else { t1 - h * (k + 1) as f64 };
        let (a0, s0) = coeffs(t);
        let (am, sm) = coeffs(t - 0.5 * h);
        let (a1, s1) = coeffs(tn);
        let k1 = riccati_rhs(&p, &a0, &s0, &w.q);
        let k2 = riccati_rhs(&(&p + &k1 * (0.5 * h)), &am, &sm, &w.q);
        let k3 = riccati_rhs(&(&p + &k2 * (0.5 * h)), &am, &sm, &w.q);
        let k4 = riccati_rhs(&(&p + &k3 * h), &a1, &s1, &w.q);
        let next = symmetrize(&(&p + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)));
        if next.iter().any(|v| !v.is_finite() || v.abs() > ESCAPE_BOUND) {
            return Err(Error::FiniteEscape { t: tn });
        }
        // central difference at the midpoint against the right-hand side there
        let pmid = (&p + &next) * 0.5;
        let dp = (&next - &p) / h;
        residual = residual.max((dp - riccati_rhs(&pmid, &am, &sm, &w.q)).norm());
        p = next;
        rev_p.push(p.clone());
        rev_t.push(tn);
    }
    rev_p.reverse();
    rev_t.reverse();
    let k = rev_t
        .iter()
        .zip(&rev_p)
        .map(|(&t, p)| &rinv * model.b_at(t).transpose() * p)
        .collect();
    Ok(RdeSolution { times: rev_t, p: rev_p, k, residual })
}

/// Eigen-decomposition of the Hamiltonian with the stable directions paired
/// to their mirror images.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianPencil {
    pub h: RealMatrix,
    pub spectrum: Vec<Complex64>,
    /// `Λs`, the stable eigenvalues.
    pub stable: Vec<Complex64>,
    /// `[U11; U21]`, eigenvectors for `Λs`.
    pub stable_basis: ComplexMatrix,
    /// `[U12; U22]`, eigenvectors for `-Λs` in the same order; present only
    /// when the spectrum is simple.
    pub unstable_basis: Option<ComplexMatrix>,
}

/// Decompose the Hamiltonian; requires exactly `n` eigenvalues with
/// `Re λ < -tol` and no defective stable cluster.
pub fn hamiltonian_pencil(a: &RealMatrix, b: &RealMatrix, q: &RealMatrix, r: &RealMatrix) -> Result<HamiltonianPencil> {
    let n = ensure_square(a)?;
    let h = hamiltonian(a, b, q, r)?;
    let es = eigen(&h)?;
    let tol = axis_tol(&h);
    if es.values.iter().any(|l| l.re.abs() <= tol) {
        return Err(Error::AxisEigenvalue);
    }
    let stable_idx: Vec<usize> = (0..2 * n).filter(|&i| es.values[i].re < -tol).collect();
    if stable_idx.len() != n {
        return Err(Error::StableSpaceDefect(format!("found {} stable eigenvalues, need {n}", stable_idx.len())));
    }
    if es.clusters.iter().any(|c| c.value.re < 0.0 && c.geometric < c.algebraic) {
        return Err(Error::StableSpaceDefect("defective stable eigenvalue".into()));
    }
    let stable: Vec<Complex64> = stable_idx.iter().map(|&i| es.values[i]).collect();
    let mut stable_basis = ComplexMatrix::zeros(2 * n, n);
    for (k, &i) in stable_idx.iter().enumerate() {
        stable_basis.set_column(k, &es.right_vectors.column(i));
    }
    let unstable_basis = if es.has_repeated() {
        None
    } else {
        let mut ub = ComplexMatrix::zeros(2 * n, n);
        let mut used = vec![false; 2 * n];
        for (k, l) in stable.iter().enumerate() {
            let j = (0..2 * n)
                .filter(|&j| !used[j] && es.values[j].re > tol)
                .min_by(|&x, &y| (es.values[x] + l).norm().total_cmp(&(es.values[y] + l).norm()))
                .ok_or_else(|| Error::StableSpaceDefect("unpaired Hamiltonian eigenvalue".into()))?;
            used[j] = true;
            ub.set_column(k, &es.right_vectors.column(j));
        }
        Some(ub)
    };
    Ok(HamiltonianPencil { h, spectrum: es.values, stable, stable_basis, unstable_basis })
}

fn real_part_checked(p: &ComplexMatrix, what: &str) -> Result<RealMatrix> {
    let re = p.map(|z| z.re);
    let im = p.map(|z| z.im).amax();
    if im > 1e-8 * re.norm().max(f64::MIN_POSITIVE) && im > 1e-12 {
        return Err(Error::StableSpaceDefect(format!("{what} has imaginary part {im:e}")));
    }
    Ok(re)
}

/// Closed form `P(t) = [U21 + U22 E G E][U11 + U12 E G E]⁻¹`,
/// `E = e^{-Λs (t - t1)}`, `G = -[U22 - M U12]⁻¹ [U21 - M U11]`, on `times`.
pub fn solve_rde_hamiltonian(sys: &StateSpace, w: &Weights, t1: f64, times: &[f64]) -> Result<Vec<RealMatrix>> {
    let (n, m) = (sys.n(), sys.m());
    w.validate(n, m)?;
    let pencil = hamiltonian_pencil(&sys.a, &sys.b, &w.q, &w.r).map_err(|e| match e {
        Error::StableSpaceDefect(msg) if msg.contains("defective") => Error::RepeatedHamiltonianEigenvalues,
        other => other,
    })?;
    let ub = pencil.unstable_basis.as_ref().ok_or(Error::RepeatedHamiltonianEigenvalues)?;
    let u11 = pencil.stable_basis.rows(0, n).into_owned();
    let u21 = pencil.stable_basis.rows(n, n).into_owned();
    let u12 = ub.rows(0, n).into_owned();
    let u22 = ub.rows(n, n).into_owned();
    let mc = to_complex(&w.m);
    let g = -solve_complex(&(&u22 - &mc * &u12), &(&u21 - &mc * &u11))?;
    times
        .iter()
        .map(|&t| {
            let e = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                n,
                pencil.stable.iter().map(|l| (-l * (t - t1)).exp()),
            ));
            let ege = &e * &g * &e;
            let num = &u21 + &u22 * &ege;
            let den = &u11 + &u12 * &ege;
            // P = num den⁻¹  ⇔  denᵀ Pᵀ = numᵀ
            let pt = solve_complex(&den.transpose(), &num.transpose())?;
            Ok(symmetrize(&real_part_checked(&pt.transpose(), "P(t)")?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AreSolution {
    pub p: RealMatrix,
    pub k: RealMatrix,
    /// Stable Hamiltonian eigenvalues, equal to `eig(A - BK)`.
    pub closed_loop_poles: Vec<Complex64>,
    pub hamiltonian_spectrum: Vec<Complex64>,
    /// `‖AᵀP + PA + Q - P B R⁻¹ Bᵀ P‖_F`.
    pub residual: f64,
    pub positive_definite: bool,
}

impl AreSolution {
    pub fn value(&self, x0: &RealVector) -> f64 {
        x0.dot(&(&self.p * x0))
    }
}

/// Stabilizing solution `P̄ = U21 U11⁻¹` of the algebraic Riccati equation.
pub fn solve_are(sys: &StateSpace, w: &Weights) -> Result<AreSolution> {
    let (n, m) = (sys.n(), sys.m());
    let w = Weights::running(w.q.clone(), w.r.clone());
    w.validate(n, m)?;
    let cq = psd_factor(&w.q);
    let check = StateSpace::abc(sys.a.clone(), sys.b.clone(), cq)?;
    let st = structural_analysis(&check)?;
    if !st.stabilizable {
        return Err(Error::NotStabilizable);
    }
    if !st.detectable {
        return Err(Error::NotDetectable);
    }
    let pencil = hamiltonian_pencil(&sys.a, &sys.b, &w.q, &w.r)?;
    let u11 = pencil.stable_basis.rows(0, n).into_owned();
    let u21 = pencil.stable_basis.rows(n, n).into_owned();
    let rc = rcond_complex(&u11);
    if rc < 1.0 / U11_COND_MAX {
        return Err(Error::StableSpaceDefect(format!("U11 condition {:e}", 1.0 / rc)));
    }
    let pt = solve_complex(&u11.transpose(), &u21.transpose())?;
    let p = symmetrize(&real_part_checked(&pt.transpose(), "P")?);
    let s = s_matrix(&sys.b, &w.r)?;
    let residual = (sys.a.transpose() * &p + &p * &sys.a + &w.q - &p * &s * &p).norm();
    let scale = w.q.norm() + 2.0 * sys.a.norm() * p.norm() + p.norm().powi(2) * s.norm();
    if residual > 1e-8 * scale {
        return Err(Error::InternalInconsistency(format!("ARE residual {residual:e}")));
    }
    let k = solve(&w.r, &(sys.b.transpose() * &p))?;
    let achieved = eigen(&(&sys.a - &sys.b * &k))?.values;
    let dev = spectrum_deviation(&pencil.stable, &achieved);
    if dev > 1e-6 {
        return Err(Error::InternalInconsistency(format!("closed-loop poles deviate from the Hamiltonian by {dev:e}")));
    }
    let positive_definite = n > 0 && is_positive_definite(&p)?.verdict == Definiteness::PositiveDefinite;
    Ok(AreSolution {
        p,
        k,
        closed_loop_poles: pencil.stable,
        hamiltonian_spectrum: pencil.spectrum,
        residual,
        positive_definite,
    })
}

/// `n` logarithmically spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..count).map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyReport {
    pub omegas: Vec<f64>,
    /// `L(jω) = K (jωI - A)⁻¹ B`; scalar entries for single-input loops.
    pub loop_values: Vec<Option<Complex64>>,
    /// `|1 + L(jω)|`, or `σ_min(I + L(jω))` for multi-input loops.
    pub return_difference: Vec<f64>,
    /// `|S(jω)| = 1 / |1 + L(jω)|` (largest singular value for MIMO).
    pub sensitivity: Vec<f64>,
    pub min_return_difference: f64,
    pub min_at: f64,
    /// Largest relative residual of `R + Φ* Q Φ = (I + L)* R (I + L)`.
    pub identity_residual: f64,
}

/// Return difference of the state-feedback loop and the identity that
/// underlies Kalman's inequality.
pub fn return_difference_report(sys: &StateSpace, k: &RealMatrix, w: &Weights, omegas: &[f64]) -> Result<FrequencyReport> {
    let (n, m) = (sys.n(), sys.m());
    if k.shape() != (m, n) {
        return Err(Error::DimensionMismatch(format!("K must be {m}x{n}")));
    }
    let a = to_complex(&sys.a);
    let b = to_complex(&sys.b);
    let kc = to_complex(k);
    let qc = to_complex(&w.q);
    let rc = to_complex(&w.r);
    let ident = ComplexMatrix::identity(m, m);
    let rows: Vec<Result<(Option<Complex64>, f64, f64, f64)>> = omegas
        .par_iter()
        .map(|&om| {
            let si = ComplexMatrix::identity(n, n) * Complex64::new(0.0, om) - &a;
            let phi = solve_complex(&si, &b)?;
            let l = &kc * &phi;
            let rd = &ident + &l;
            let lhs = &rc + phi.adjoint() * &qc * &phi;
            let rhs = rd.adjoint() * &rc * &rd;
            let resid = (&lhs - &rhs).norm() / lhs.norm().max(f64::MIN_POSITIVE);
            let sv = singular_values_complex(&rd);
            let smin = sv.last().copied().unwrap_or(1.0);
            let scalar = if m == 1 { Some(l[(0, 0)]) } else { None };
            Ok((scalar, smin, 1.0 / smin, resid))
        })
        .collect();
    let mut report = FrequencyReport {
        omegas: omegas.to_vec(),
        loop_values: Vec::with_capacity(omegas.len()),
        return_difference: Vec::with_capacity(omegas.len()),
        sensitivity: Vec::with_capacity(omegas.len()),
        min_return_difference: f64::INFINITY,
        min_at: f64::NAN,
        identity_residual: 0.0,
    };
    for (i, row) in rows.into_iter().enumerate() {
        let (l, rd, s, resid) = row?;
        report.loop_values.push(l);
        report.return_difference.push(rd);
        report.sensitivity.push(s);
        report.identity_residual = report.identity_residual.max(resid);
        if rd < report.min_return_difference {
            report.min_return_difference = rd;
            report.min_at = omegas[i];
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SrlPoint {
    pub r: f64,
    /// All roots of `r a(s) a(-s) + Σ b_i(s) b_i(-s)`, sorted.
    pub roots: Vec<Complex64>,
    /// Left-half-plane roots: the optimal closed-loop poles for weight `r`.
    pub stable: Vec<Complex64>,
    /// Largest distance from a root's mirror `-λ` to the nearest root.
    pub symmetry_residual: f64,
}

fn srl_point(a: &Polynomial, bs: &[Polynomial], r: f64) -> Result<SrlPoint> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("SRL weight must be positive, got {r}")));
    }
    let mut poly = a.mul(&a.reflect()).scale(r);
    for b in bs {
        poly = poly.add(&b.mul(&b.reflect()));
    }
    let roots = poly.roots()?;
    let symmetry_residual = roots
        .iter()
        .map(|z| roots.iter().map(|w| (w + z).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let stable = roots.iter().copied().filter(|z| z.re < 0.0).collect();
    Ok(SrlPoint { r, roots, stable, symmetry_residual })
}

/// Symmetric root locus `1 + (1/r) P(-s) P(s) = 0` of a SISO plant.
pub fn symmetric_root_locus(plant: &RationalFunction, rs: &[f64]) -> Result<Vec<SrlPoint>> {
    let g = plant.normalized();
    rs.par_iter().map(|&r| srl_point(&g.den, std::slice::from_ref(&g.num), r)).collect()
}

/// Generalized locus for state weighting `Q = Cᵀ C` and input weight `r`:
/// roots of `r a(s) a(-s) + Σ_i b_i(s) b_i(-s)`, `b_i / a` the entries of
/// `C (sI - A)⁻¹ B` without cancellation.
pub fn state_weighted_root_locus(sys: &StateSpace, q: &RealMatrix, rs: &[f64]) -> Result<Vec<SrlPoint>> {
    let n = sys.n();
    if sys.m() != 1 {
        return Err(Error::InvalidArgument("state-weighted locus needs a single input".into()));
    }
    let c = psd_factor(q);
    let (a, ns) = leverrier_faddeev(&sys.a);
    let bs: Vec<Polynomial> = (0..c.nrows())
        .map(|i| {
            let coeffs: Vec<f64> = ns.iter().map(|nk| (c.row(i) * nk * &sys.b)[(0, 0)]).collect();
            Polynomial::new(if coeffs.is_empty() { vec![0.0] } else { coeffs })
        })
        .collect();
    debug_assert_eq!(a.degree(), n);
    rs.par_iter().map(|&r| srl_point(&a, &bs, r)).collect()
}

/// `V°(x0) = x0ᵀ P x0`.
pub fn lqr_value(p: &RealMatrix, x0: &RealVector) -> f64 {
    x0.dot(&(p * x0))
}

/// The regulator designs used for the return-difference checks: the
/// multivariate example, the hand-solved ARE, the scalar unstable plant, the
/// detectability example and the pendubot with `Q = I`.
pub fn lqr_fixtures() -> Vec<(&'static str, StateSpace, Weights)> {
    let one = || mat(&[&[1.0]]);
    let fixed = |a: RealMatrix, b: RealMatrix| StateSpace::ab(a, b).expect("fixture shapes are consistent");
    let Ok(Model::Lti(pendubot)) = builtin("pendubot", &BTreeMap::new()) else {
        unreachable!("pendubot is a linear builtin")
    };
    vec![
        (
            "multivariate",
            fixed(mat(&[&[0.0, -1.0], &[0.0, 0.0]]), RealMatrix::identity(2, 2)),
            Weights::running(mat(&[&[4.0, 2.0], &[2.0, 1.0]]), RealMatrix::identity(2, 2)),
        ),
        (
            "are_by_hand",
            fixed(mat(&[&[0.0, 1.0], &[0.0, -1.0]]), col(&[0.0, 1.0])),
            Weights::running(mat(&[&[1.0, 0.0], &[0.0, 0.0]]), one()),
        ),
        ("scalar", fixed(one(), one()), Weights::running(one(), one())),
        (
            "detectability",
            fixed(mat(&[&[-3.0, -2.0], &[1.0, 0.0]]), col(&[0.0, 1.0])),
            Weights::running(mat(&[&[1.0, 1.0], &[1.0, 1.0]]), one()),
        ),
        ("pendubot", pendubot, Weights::running(RealMatrix::identity(4, 4), one())),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::vector;
    use crate::realization::ccf;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn multivariate_example() {
        let sys = StateSpace::ab(mat(&[&[0.0, -1.0], &[0.0, 0.0]]), RealMatrix::identity(2, 2)).unwrap();
        let w = Weights::running(mat(&[&[4.0, 2.0], &[2.0, 1.0]]), RealMatrix::identity(2, 2));
        let s = solve_are(&sys, &w).unwrap();
        assert!((s.p.clone() - mat(&[&[2.0, 0.0], &[0.0, 1.0]])).amax() < 1e-8);
        assert!((s.k.clone() - mat(&[&[2.0, 0.0], &[0.0, 1.0]])).amax() < 1e-8);
        assert!(spectrum_deviation(&[c(-1.0, 0.0), c(-2.0, 0.0)], &s.closed_loop_poles) < 1e-8);
    }

    #[test]
    fn are_by_hand() {
        let sys = StateSpace::ab(mat(&[&[0.0, 1.0], &[0.0, -1.0]]), col(&[0.0, 1.0])).unwrap();
        let w = Weights::running(mat(&[&[1.0, 0.0], &[0.0, 0.0]]), mat(&[&[1.0]]));
        let s = solve_are(&sys, &w).unwrap();
        let r3 = 3f64.sqrt();
        assert!((s.p.clone() - mat(&[&[r3, 1.0], &[1.0, r3 - 1.0]])).amax() < 1e-8);
        assert!((s.k.clone() - mat(&[&[1.0, r3 - 1.0]])).amax() < 1e-8);
        assert!(spectrum_deviation(&[c(-r3 / 2.0, 0.5), c(-r3 / 2.0, -0.5)], &s.closed_loop_poles) < 1e-8);
        assert!(s.positive_definite);
    }

    #[test]
    fn hurwitz_zero_weight() {
        let sys = StateSpace::ab(mat(&[&[-1.0, 2.0], &[0.0, -3.0]]), col(&[0.0, 1.0])).unwrap();
        let s = solve_are(&sys, &Weights::running(RealMatrix::zeros(2, 2), mat(&[&[1.0]]))).unwrap();
        assert!(s.p.amax() < 1e-12 && s.k.amax() < 1e-12);
    }

    #[test]
    fn are_preconditions() {
        let sys = StateSpace::ab(mat(&[&[1.0, 0.0], &[0.0, -1.0]]), col(&[0.0, 1.0])).unwrap();
        let w = Weights::running(RealMatrix::identity(2, 2), mat(&[&[1.0]]));
        assert_eq!(solve_are(&sys, &w).unwrap_err(), Error::NotStabilizable);
        let sys = StateSpace::ab(mat(&[&[1.0, 0.0], &[0.0, -1.0]]), col(&[1.0, 1.0])).unwrap();
        let w = Weights::running(mat(&[&[0.0, 0.0], &[0.0, 1.0]]), mat(&[&[1.0]]));
        assert_eq!(solve_are(&sys, &w).unwrap_err(), Error::NotDetectable);
    }

    #[test]
    fn detectability_example() {
        let sys = StateSpace::ab(mat(&[&[-3.0, -2.0], &[1.0, 0.0]]), col(&[0.0, 1.0])).unwrap();
        let w = Weights::running(mat(&[&[1.0, 1.0], &[1.0, 1.0]]), mat(&[&[1.0]]));
        let s = solve_are(&sys, &w).unwrap();
        assert!((s.p.clone() - mat(&[&[1.0, 1.0], &[1.0, 1.0]]) * 0.24).amax() < 0.01);
        assert!(s.value(&vector(&[1.0, -1.0])).abs() < 1e-10);
        assert!(!s.positive_definite);
    }

    #[test]
    fn scalar_rde_converges() {
        let sys = StateSpace::ab(mat(&[&[1.0]]), mat(&[&[1.0]])).unwrap();
        let w = Weights::new(mat(&[&[1.0]]), mat(&[&[1.0]]), mat(&[&[5.0]]));
        let sol = solve_rde(&sys, &w, 0.0, 10.0, None).unwrap();
        assert!((sol.p[0][(0, 0)] - (1.0 + 2f64.sqrt())).abs() < 1e-4);
        assert_eq!(sol.p.last().unwrap()[(0, 0)], 5.0);
        let closed = solve_rde_hamiltonian(&sys, &w, 10.0, &[0.0, 5.0, 9.5, 10.0]).unwrap();
        for (t, pc) in [0.0, 5.0, 9.5, 10.0].iter().zip(&closed) {
            assert!((sol.p_at(*t) - pc).amax() < 1e-6, "t = {t}");
        }
        assert!((closed[3][(0, 0)] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn zero_weights_give_zero_riccati() {
        let sys = StateSpace::ab(mat(&[&[0.0, 1.0], &[-1.0, 0.3]]), col(&[0.0, 1.0])).unwrap();
        let w = Weights::new(RealMatrix::zeros(2, 2), mat(&[&[1.0]]), RealMatrix::zeros(2, 2));
        let sol = solve_rde(&sys, &w, 0.0, 1.0, Some(100)).unwrap();
        assert!(sol.p.iter().all(|p| p.amax() == 0.0));
    }

    #[test]
    fn fixed_point_terminal_weight() {
        let sys = StateSpace::ab(mat(&[&[0.0, 1.0], &[0.0, -1.0]]), col(&[0.0, 1.0])).unwrap();
        let w = Weights::running(mat(&[&[1.0, 0.0], &[0.0, 0.0]]), mat(&[&[1.0]]));
        let pbar = solve_are(&sys, &w).unwrap().p;
        let w = Weights::new(w.q, w.r, pbar.clone());
        let ps = solve_rde_hamiltonian(&sys, &w, 3.0, &[0.0, 1.5]).unwrap();
        assert!((ps[0].clone() - &pbar).amax() < 1e-9);
    }

    #[test]
    fn finite_escape_detected() {
        // no input: P grows like e^{100 τ} and passes the bound near τ = 3.5
        let sys = StateSpace::ab(mat(&[&[50.0]]), mat(&[&[0.0]])).unwrap();
        let w = Weights::new(mat(&[&[1.0]]), mat(&[&[1.0]]), mat(&[&[1.0]]));
        let r = solve_rde(&sys, &w, 0.0, 10.0, Some(2000));
        assert!(matches!(r, Err(Error::FiniteEscape { .. })));
    }

    #[test]
    fn srl_example() {
        let g = RationalFunction::from_coeffs(&[1.0], &[1.0, 1.0, 0.0]).unwrap();
        let pts = symmetric_root_locus(&g, &[1.0]).unwrap();
        let r3 = 3f64.sqrt();
        assert!(spectrum_deviation(&[c(-r3 / 2.0, 0.5), c(-r3 / 2.0, -0.5)], &pts[0].stable) < 1e-10);
        assert!(pts[0].symmetry_residual < 1e-8);
        let sys = ccf(&g).unwrap();
        let q = sys.c.transpose() * &sys.c;
        let are = solve_are(&sys, &Weights::running(q, mat(&[&[1.0]]))).unwrap();
        assert!(spectrum_deviation(&are.closed_loop_poles, &pts[0].stable) < 1e-6);
        // large r: optimal poles approach the reflected open-loop poles {0, -1}
        let far = symmetric_root_locus(&g, &[1e8]).unwrap();
        assert!(far[0].stable.iter().any(|z| (z + 1.0).norm() < 1e-3));
    }

    #[test]
    fn kalman_inequality_on_fixtures() {
        let grid = log_grid(1e-2, 1e3, 400);
        for (name, sys, w) in lqr_fixtures() {
            let s = solve_are(&sys, &w).unwrap();
            let rep = return_difference_report(&sys, &s.k, &w, &grid).unwrap();
            assert!(rep.min_return_difference >= 1.0 - 1e-6, "{name}: {}", rep.min_return_difference);
            assert!(rep.identity_residual <= 1e-7, "{name}: {}", rep.identity_residual);
        }
    }

    #[test]
    fn pendubot_generalized_srl() {
        let (_, sys, w) = lqr_fixtures().into_iter().find(|f| f.0 == "pendubot").unwrap();
        let are = solve_are(&sys, &w).unwrap();
        let pts = state_weighted_root_locus(&sys, &w.q, &[1.0]).unwrap();
        assert!(spectrum_deviation(&are.closed_loop_poles, &pts[0].stable) < 1e-4);
    }
}
