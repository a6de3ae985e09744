//! Controllability and observability: matrices, Hautus and modal tests,
//! grammians, Kalman decompositions, transmission zeros and minimum-energy
//! steering.

use crate::error::{Error, Result};
use crate::model::{LinearDynamics, StateSpace};
use crate::numkit::{
    complete_basis, eigen, ensure_square, independent_columns, inverse, norm2, null_space, range_basis, rank,
    rank_complex, singular_values_complex, solve_complex, symmetric_eigenvalues, symmetrize, to_complex, Complex64,
    ComplexMatrix, Polynomial, RealMatrix, RealVector,
};
use crate::response::{simulate_linear, transition_for, StateTransition, Trajectory};
use crate::stability::{axis_tol, solve_lyapunov};
use rayon::prelude::*;

/// Relative singular-value threshold for the rank tests in this module.
pub const STRUCTURAL_RANK_TOL: f64 = 1e-9;

/// `[B | AB | … | A^{n-1} B]`.
pub fn controllability_matrix(sys: &StateSpace) -> RealMatrix {
    krylov(&sys.a, &sys.b, sys.n())
}

/// `[C; CA; …; CA^{n-1}]`.
pub fn observability_matrix(sys: &StateSpace) -> RealMatrix {
    krylov(&sys.a.transpose(), &sys.c.transpose(), sys.n()).transpose()
}

pub(crate) fn krylov(a: &RealMatrix, b: &RealMatrix, steps: usize) -> RealMatrix {
    let (n, m) = b.shape();
    let mut out = RealMatrix::zeros(n, m * steps);
    let mut blk = b.clone();
    for k in 0..steps {
        out.view_mut((0, k * m), (n, m)).copy_from(&blk);
        blk = a * &blk;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeClass {
    pub value: Complex64,
    pub controllable: bool,
    pub observable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructuralReport {
    pub ctrb_matrix: RealMatrix,
    pub obsv_matrix: RealMatrix,
    pub ctrb_rank: usize,
    pub obsv_rank: usize,
    /// One entry per distinct eigenvalue.
    pub modes: Vec<ModeClass>,
    pub uncontrollable_modes: Vec<Complex64>,
    pub unobservable_modes: Vec<Complex64>,
    pub stabilizable: bool,
    pub detectable: bool,
    /// Orthonormal basis of `range(𝒞)`.
    pub controllable_basis: RealMatrix,
    /// Orthonormal basis of `null(𝒪)`.
    pub unobservable_basis: RealMatrix,
}

/// `rank [λI - A | B] < n`.
pub fn hautus_deficient(a: &RealMatrix, b: &RealMatrix, lambda: Complex64) -> bool {
    let n = a.nrows();
    let mut m = ComplexMatrix::zeros(n, n + b.ncols());
    m.view_mut((0, 0), (n, n)).copy_from(&(ComplexMatrix::identity(n, n) * lambda - to_complex(a)));
    m.view_mut((0, n), (n, b.ncols())).copy_from(&to_complex(b));
    rank_complex(&m, STRUCTURAL_RANK_TOL) < n
}

pub fn structural_analysis(sys: &StateSpace) -> Result<StructuralReport> {
    let n = ensure_square(&sys.a)?;
    let ctrb = controllability_matrix(sys);
    let obsv = observability_matrix(sys);
    let ctrb_rank = rank(&ctrb, Some(STRUCTURAL_RANK_TOL));
    let obsv_rank = rank(&obsv, Some(STRUCTURAL_RANK_TOL));
    let es = eigen(&sys.a)?;
    let ct = sys.c.transpose();
    let at = sys.a.transpose();
    let tol = axis_tol(&sys.a);
    let mut modes = Vec::new();
    let (mut unc, mut uno) = (Vec::new(), Vec::new());
    for cl in &es.clusters {
        let controllable = !hautus_deficient(&sys.a, &sys.b, cl.value);
        let observable = !hautus_deficient(&at, &ct, cl.value);
        if !controllable {
            unc.push(cl.value);
        }
        if !observable {
            uno.push(cl.value);
        }
        modes.push(ModeClass { value: cl.value, controllable, observable });
    }
    let stabilizable = unc.iter().all(|l| l.re < -tol);
    let detectable = uno.iter().all(|l| l.re < -tol);
    let controllable_basis = range_basis(&ctrb, STRUCTURAL_RANK_TOL);
    let unobservable_basis = if n == 0 { RealMatrix::zeros(0, 0) } else { null_space(&obsv, STRUCTURAL_RANK_TOL) };
    Ok(StructuralReport {
        ctrb_matrix: ctrb,
        obsv_matrix: obsv,
        ctrb_rank,
        obsv_rank,
        modes,
        uncontrollable_modes: unc,
        unobservable_modes: uno,
        stabilizable,
        detectable,
        controllable_basis,
        unobservable_basis,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrammianReport {
    pub matrix: RealMatrix,
    /// Ascending eigenvalues of the (symmetric) grammian.
    pub eigenvalues: Vec<f64>,
    /// `λmax / λmin`, infinite when singular.
    pub condition: f64,
    /// `(start, end)`; `end` is infinite for the Lyapunov route.
    pub horizon: (f64, f64),
}

impl GrammianReport {
    fn new(matrix: RealMatrix, horizon: (f64, f64)) -> Self {
        let matrix = symmetrize(&matrix);
        let eigenvalues = symmetric_eigenvalues(&matrix);
        let lo = eigenvalues.first().copied().unwrap_or(0.0);
        let hi = eigenvalues.last().copied().unwrap_or(0.0);
        let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        Self { matrix, eigenvalues, condition, horizon }
    }

    /// Singular when `λmin <= 1e-9 λmax` (or the grammian vanishes).
    pub fn is_singular(&self) -> bool {
        let lo = self.eigenvalues.first().copied().unwrap_or(0.0);
        let hi = self.eigenvalues.last().copied().unwrap_or(0.0);
        hi <= 0.0 || lo <= STRUCTURAL_RANK_TOL * hi
    }

    pub fn rank(&self) -> usize {
        let hi = self.eigenvalues.last().copied().unwrap_or(0.0);
        if hi <= 0.0 {
            return 0;
        }
        self.eigenvalues.iter().filter(|&&l| l > STRUCTURAL_RANK_TOL * hi).count()
    }
}

/// Composite Simpson nodes and weights on `[a, b]` with at most `step` spacing.
fn simpson_nodes(a: f64, b: f64, step: f64) -> Vec<(f64, f64)> {
    let mut k = ((b - a) / step).ceil().max(2.0) as usize;
    if k % 2 == 1 {
        k += 1;
    }
    let h = (b - a) / k as f64;
    (0..=k)
        .map(|i| {
            let w = if i == 0 || i == k {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let t = if i == k { b } else { a + h * i as f64 };
            (t, w * h / 3.0)
        })
        .collect()
}

fn check_interval(t0: f64, t1: f64, step: f64) -> Result<()> {
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(Error::InvalidHorizon(format!("need finite t0 < t1, got [{t0}, {t1}]")));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidArgument(format!("quadrature step must be positive, got {step}")));
    }
    Ok(())
}

/// Sum node contributions in index order so the result does not depend on
/// thread scheduling.
fn quadrature<F>(nodes: &[(f64, f64)], n: usize, f: F) -> Result<RealMatrix>
where
    F: Fn(f64) -> Result<RealMatrix> + Sync,
{
    let parts: Vec<Result<RealMatrix>> = nodes.par_iter().map(|&(t, w)| f(t).map(|m| m * w)).collect();
    let mut acc = RealMatrix::zeros(n, n);
    let mut comp = RealMatrix::zeros(n, n);
    for p in parts {
        // Kahan summation, entrywise
        let y = p? - &comp;
        let t = &acc + &y;
        comp = (&t - &acc) - y;
        acc = t;
    }
    Ok(acc)
}

/// `W(t0, tf) = ∫ φ(t0, τ) B(τ) Bᵀ(τ) φᵀ(t0, τ) dτ` by composite Simpson.
pub fn controllability_grammian(model: &dyn LinearDynamics, t0: f64, tf: f64, quad_step: f64) -> Result<GrammianReport> {
    check_interval(t0, tf, quad_step)?;
    let n = model.n();
    let stm = transition_for(model, t0, tf, quad_step.min((tf - t0) / 50.0))?;
    let nodes = simpson_nodes(t0, tf, quad_step);
    let w = quadrature(&nodes, n, |tau| {
        let g = stm.eval(t0, tau)? * model.b_at(tau);
        Ok(&g * g.transpose())
    })?;
    Ok(GrammianReport::new(w, (t0, tf)))
}

/// `H(t1, t0) = ∫ φᵀ(τ, t0) Cᵀ(τ) C(τ) φ(τ, t0) dτ` by composite Simpson.
pub fn observability_grammian(model: &dyn LinearDynamics, t0: f64, t1: f64, quad_step: f64) -> Result<GrammianReport> {
    check_interval(t0, t1, quad_step)?;
    let n = model.n();
    let stm = transition_for(model, t0, t1, quad_step.min((t1 - t0) / 50.0))?;
    let nodes = simpson_nodes(t0, t1, quad_step);
    let h = quadrature(&nodes, n, |tau| {
        let g = model.c_at(tau) * stm.eval(tau, t0)?;
        Ok(g.transpose() * g)
    })?;
    Ok(GrammianReport::new(h, (t0, t1)))
}

fn require_hurwitz(a: &RealMatrix) -> Result<()> {
    let es = eigen(a)?;
    if es.values.iter().any(|l| l.re >= -axis_tol(a)) {
        return Err(Error::InvalidArgument("infinite-horizon grammian needs a Hurwitz A".into()));
    }
    Ok(())
}

/// `∫_0^∞ e^{Aτ} B Bᵀ e^{Aᵀτ} dτ`, the solution of `A W + W Aᵀ + B Bᵀ = 0`.
pub fn controllability_grammian_infinite(sys: &StateSpace) -> Result<GrammianReport> {
    require_hurwitz(&sys.a)?;
    let cert = solve_lyapunov(&sys.a.transpose(), &(&sys.b * sys.b.transpose()))?;
    Ok(GrammianReport::new(cert.p, (0.0, f64::INFINITY)))
}

/// `∫_0^∞ e^{Aᵀτ} Cᵀ C e^{Aτ} dτ`, the solution of `Aᵀ H + H A + Cᵀ C = 0`.
pub fn observability_grammian_infinite(sys: &StateSpace) -> Result<GrammianReport> {
    require_hurwitz(&sys.a)?;
    let cert = solve_lyapunov(&sys.a, &(sys.c.transpose() * &sys.c))?;
    Ok(GrammianReport::new(cert.p, (0.0, f64::INFINITY)))
}

/// The LTI dual `(-Aᵀ, Cᵀ, Bᵀ)`, whose controllability grammian equals the
/// observability grammian of `sys`.
pub fn dual_system(sys: &StateSpace) -> StateSpace {
    StateSpace {
        a: -sys.a.transpose(),
        b: sys.c.transpose(),
        c: sys.b.transpose(),
        d: sys.d.transpose(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModalRow {
    pub value: Complex64,
    pub row_norm: f64,
    pub controllable: bool,
}

/// Rows of `B̄ = M⁻¹ B` for the eigenvector matrix `M`; a zero row marks an
/// uncontrollable mode.
pub fn modal_controllability_test(sys: &StateSpace) -> Result<Vec<ModalRow>> {
    let n = ensure_square(&sys.a)?;
    let es = eigen(&sys.a)?;
    if es.has_repeated() {
        return Err(Error::RepeatedEigenvalues);
    }
    let m = &es.right_vectors;
    let b = to_complex(&sys.b);
    let bbar = solve_complex(m, &b)?;
    let minv = solve_complex(m, &ComplexMatrix::identity(n, n))?;
    let tol = STRUCTURAL_RANK_TOL * minv.norm() * b.norm();
    Ok((0..n)
        .map(|i| {
            let row_norm = bbar.row(i).norm();
            ModalRow { value: es.values[i], row_norm, controllable: row_norm > tol }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KalmanKind {
    Kccf,
    Kocf,
}

impl KalmanKind {
    pub fn name(self) -> &'static str {
        match self {
            KalmanKind::Kccf => "KCCF",
            KalmanKind::Kocf => "KOCF",
        }
    }
}

/// `x̄ = P x`. KCCF: `Ā = [[A_c, A_12], [0, A_c̄]]`, `B̄ = [B_c; 0]`.
/// KOCF: `Ā = [[A_o, 0], [A_21, A_ō]]`, `C̄ = [C_o, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanDecomposition {
    pub kind: KalmanKind,
    pub transform: RealMatrix,
    pub transform_inv: RealMatrix,
    pub a_bar: RealMatrix,
    pub b_bar: RealMatrix,
    pub c_bar: RealMatrix,
    /// Dimension of the controllable (resp. observable) part.
    pub n1: usize,
    /// Largest entry of the blocks that should vanish.
    pub off_block_residual: f64,
}

impl KalmanDecomposition {
    /// Leading `n1 x n1` block.
    pub fn a11(&self) -> RealMatrix {
        self.a_bar.view((0, 0), (self.n1, self.n1)).into_owned()
    }

    /// Trailing block: the uncontrollable (resp. unobservable) dynamics.
    pub fn a22(&self) -> RealMatrix {
        let n = self.a_bar.nrows();
        self.a_bar.view((self.n1, self.n1), (n - self.n1, n - self.n1)).into_owned()
    }
}

/// `P⁻¹ = [independent columns of 𝒞 | e_i completion]` for KCCF; KOCF is
/// the KCCF of the transposed pair, transposed back.
pub fn kalman_decompose(sys: &StateSpace, kind: KalmanKind) -> Result<KalmanDecomposition> {
    let n = ensure_square(&sys.a)?;
    let (a, b) = match kind {
        KalmanKind::Kccf => (sys.a.clone(), sys.b.clone()),
        KalmanKind::Kocf => (sys.a.transpose(), sys.c.transpose()),
    };
    let ctrb = krylov(&a, &b, n);
    let idx = independent_columns(&ctrb, STRUCTURAL_RANK_TOL);
    let n1 = idx.len();
    let mut pinv = RealMatrix::zeros(n, n);
    for (k, &j) in idx.iter().enumerate() {
        pinv.set_column(k, &ctrb.column(j));
    }
    if n1 < n {
        let head = pinv.columns(0, n1).into_owned();
        let extra = complete_basis(&head);
        pinv.view_mut((0, n1), (n, n - n1)).copy_from(&extra);
    }
    let p = inverse(&pinv).map_err(|_| Error::InternalInconsistency("Kalman basis is singular".into()))?;
    let (transform, transform_inv) = match kind {
        KalmanKind::Kccf => (p, pinv),
        // dual: x̄ = P_d^{-T} x
        KalmanKind::Kocf => (pinv.transpose(), p.transpose()),
    };
    let a_bar = &transform * &sys.a * &transform_inv;
    let b_bar = &transform * &sys.b;
    let c_bar = &sys.c * &transform_inv;
    let off_block_residual = match kind {
        KalmanKind::Kccf => {
            let a21 = a_bar.view((n1, 0), (n - n1, n1)).amax();
            let b2 = b_bar.view((n1, 0), (n - n1, b_bar.ncols())).amax();
            a21.max(b2)
        }
        KalmanKind::Kocf => {
            let a12 = a_bar.view((0, n1), (n1, n - n1)).amax();
            let c2 = c_bar.view((0, n1), (c_bar.nrows(), n - n1)).amax();
            a12.max(c2)
        }
    };
    let scale = norm2(&sys.a).max(norm2(&sys.b)).max(norm2(&sys.c)).max(1.0);
    if off_block_residual > 1e-8 * scale * transform.norm() * transform_inv.norm() {
        return Err(Error::InternalInconsistency(format!(
            "Kalman decomposition off-block residual {off_block_residual:e}"
        )));
    }
    Ok(KalmanDecomposition { kind, transform, transform_inv, a_bar, b_bar, c_bar, n1, off_block_residual })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSet {
    pub zeros: Vec<Complex64>,
    /// Relative smallest singular value of the system pencil below which a
    /// candidate counts as a zero.
    pub rank_deficiency_tol: f64,
}

pub const ZERO_RANK_TOL: f64 = 1e-6;

fn system_pencil(sys: &StateSpace, s: Complex64) -> ComplexMatrix {
    let (n, m, p) = (sys.n(), sys.m(), sys.p());
    let mut mm = ComplexMatrix::zeros(n + p, n + m);
    mm.view_mut((0, 0), (n, n)).copy_from(&(ComplexMatrix::identity(n, n) * s - to_complex(&sys.a)));
    mm.view_mut((0, n), (n, m)).copy_from(&(-to_complex(&sys.b)));
    mm.view_mut((n, 0), (p, n)).copy_from(&to_complex(&sys.c));
    mm.view_mut((n, n), (p, m)).copy_from(&to_complex(&sys.d));
    mm
}

/// Finite `s` where `[[sI - A, -B], [C, D]]` drops rank, for square plants.
///
/// `det` of the pencil is a polynomial of degree at most `n`; it is recovered
/// exactly by DFT interpolation on a circle, its roots are the candidates,
/// and each candidate is confirmed by a singular-value test.
pub fn transmission_zeros(sys: &StateSpace) -> Result<ZeroSet> {
    let (n, m, p) = (sys.n(), sys.m(), sys.p());
    if p != m {
        return Err(Error::NonSquarePlant { p, m });
    }
    let samples = n + 1;
    let radius = (sys.a.norm() / (n.max(1) as f64).sqrt()).max(1.0);
    let pts: Vec<Complex64> = (0..samples)
        .map(|k| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / samples as f64))
        .collect();
    let vals: Vec<Complex64> = pts.iter().map(|&s| system_pencil(sys, s).determinant()).collect();
    let vmax = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if vmax == 0.0 {
        return Err(Error::DegeneratePencil);
    }
    // c_j r^j = (1/N) Σ_k v_k ω^{-jk}
    let mut ascending = Vec::with_capacity(samples);
    for j in 0..samples {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, v) in vals.iter().enumerate() {
            acc += v * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (j * k) as f64 / samples as f64);
        }
        let scaled = acc / samples as f64;
        let c = if scaled.norm() <= 1e-10 * vmax { 0.0 } else { scaled.re / radius.powi(j as i32) };
        ascending.push(c);
    }
    let desc: Vec<f64> = ascending.iter().rev().copied().collect();
    let poly = Polynomial::new(desc);
    if poly.is_zero() {
        return Err(Error::DegeneratePencil);
    }
    let mut zeros = Vec::new();
    for z in poly.roots()? {
        let sv = singular_values_complex(&system_pencil(sys, z));
        let (hi, lo) = (sv.first().copied().unwrap_or(0.0), sv.last().copied().unwrap_or(0.0));
        if hi > 0.0 && lo <= ZERO_RANK_TOL * hi {
            zeros.push(z);
        }
    }
    Ok(ZeroSet { zeros, rank_deficiency_tol: ZERO_RANK_TOL })
}

/// `u(t) = -Bᵀ(t) φᵀ(t0, t) η` with `η = W⁻¹(t0, tf) (x0 - φ(t0, tf) xf)`.
#[derive(Debug, Clone)]
pub struct MinimumEnergyControl {
    pub t0: f64,
    pub tf: f64,
    pub eta: RealVector,
    stm: StateTransition,
}

impl MinimumEnergyControl {
    pub fn at(&self, model: &dyn LinearDynamics, t: f64) -> Result<RealVector> {
        let phi = self.stm.eval(self.t0, t)?;
        Ok(-(model.b_at(t).transpose() * phi.transpose() * &self.eta))
    }
}

#[derive(Debug, Clone)]
pub struct SteerResult {
    pub control: MinimumEnergyControl,
    pub grammian: GrammianReport,
    pub trajectory: Trajectory,
    pub endpoint_error: f64,
}

/// Steer `x0` at `t0` to `xf` at `tf` with the minimum-energy control, then
/// confirm the endpoint by simulation.
pub fn minimum_energy_steer(
    model: &dyn LinearDynamics,
    x0: &RealVector,
    xf: &RealVector,
    t0: f64,
    tf: f64,
    step: f64,
) -> Result<SteerResult> {
    let n = model.n();
    if x0.len() != n || xf.len() != n {
        return Err(Error::DimensionMismatch(format!("x0 and xf must have length {n}")));
    }
    let grammian = controllability_grammian(model, t0, tf, step)?;
    if grammian.is_singular() {
        return Err(Error::SingularGrammian);
    }
    let stm = transition_for(model, t0, tf, step.min((tf - t0) / 50.0))?;
    let target = x0 - stm.eval(t0, tf)? * xf;
    let winv = inverse(&grammian.matrix).map_err(|_| Error::SingularGrammian)?;
    let eta = winv * target;
    let control = MinimumEnergyControl { t0, tf, eta, stm };
    let m = model.m();
    let u = |t: f64| control.at(model, t).unwrap_or_else(|_| RealVector::from_element(m, f64::NAN));
    let trajectory = simulate_linear(model, x0, &u, t0, tf, step)?;
    if trajectory.blew_up {
        return Err(Error::InternalInconsistency("steering simulation diverged".into()));
    }
    let endpoint_error = (trajectory.final_state() - xf).norm();
    if endpoint_error > 1e-4 * (1.0 + xf.norm()) {
        return Err(Error::InternalInconsistency(format!("steering endpoint error {endpoint_error:e}")));
    }
    Ok(SteerResult { control, grammian, trajectory, endpoint_error })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteReachability {
    /// `rank [B, AB, …, A^{r-1} B]` for `r = 1..=steps`.
    pub ranks: Vec<usize>,
    pub reachable: bool,
}

pub fn discrete_reachability(a: &RealMatrix, b: &RealMatrix, steps: usize) -> Result<DiscreteReachability> {
    let n = ensure_square(a)?;
    if b.nrows() != n {
        return Err(Error::DimensionMismatch(format!("B must have {n} rows")));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    let ranks: Vec<usize> = (1..=steps).map(|r| rank(&krylov(a, b, r), Some(STRUCTURAL_RANK_TOL))).collect();
    let reachable = ranks.last().copied() == Some(n);
    Ok(DiscreteReachability { ranks, reachable })
}
