//! Feedback design: pole placement, observers, observer-based compensators,
//! reduced-order observers, integral control and Diophantine design.

use crate::error::{Error, Result};
use crate::model::StateSpace;
use crate::numkit::{
    complete_basis, eigen, ensure_square, halton, inverse, rank, rcond, solve, Complex64, Polynomial, RealMatrix,
};
use crate::realization::{leverrier_faddeev, ss_to_tf, RationalFunction, TransferMatrix};
use crate::structural::{controllability_matrix, krylov, STRUCTURAL_RANK_TOL};

/// Relative tolerance on achieved versus requested poles.
pub const PLACEMENT_TOL: f64 = 1e-6;
/// Number of projection vectors tried by MIMO placement.
pub const PROJECTION_TRIES: u64 = 64;

/// Largest relative distance `|a - d| / (1 + |d|)` after greedily pairing
/// each requested value with its nearest unused achieved value.
pub fn spectrum_deviation(requested: &[Complex64], achieved: &[Complex64]) -> f64 {
    if requested.len() != achieved.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; achieved.len()];
    let mut worst = 0.0f64;
    for d in requested {
        let best = achieved
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .min_by(|x, y| (x.1 - d).norm().total_cmp(&(y.1 - d).norm()));
        match best {
            Some((i, a)) => {
                used[i] = true;
                worst = worst.max((a - d).norm() / (1.0 + d.norm()));
            }
            None => return f64::INFINITY,
        }
    }
    worst
}

/// Requested poles must be closed under conjugation.
pub fn check_conjugate_closed(poles: &[Complex64]) -> Result<()> {
    let mut used = vec![false; poles.len()];
    for i in 0..poles.len() {
        if used[i] {
            continue;
        }
        let p = poles[i];
        let tol = 1e-9 * (1.0 + p.norm());
        if p.im.abs() <= tol {
            used[i] = true;
            continue;
        }
        let partner = (0..poles.len()).find(|&j| j != i && !used[j] && (poles[j] - p.conj()).norm() <= tol);
        match partner {
            Some(j) => {
                used[i] = true;
                used[j] = true;
            }
            None => return Err(Error::ConjugacyViolation),
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    /// `u = -K x`.
    pub k: RealMatrix,
    pub achieved: Vec<Complex64>,
    /// Projection vector used for multi-input plants (`K = w k̄`).
    pub projection: Option<RealMatrix>,
}

/// Single-input placement through the controllable canonical form:
/// `P = 𝒞̄ 𝒞⁻¹`, `k̄_j = α_j - a_j`, `K = k̄ P`.
fn place_siso(a: &RealMatrix, b: &RealMatrix, target: &Polynomial) -> Result<RealMatrix> {
    let n = a.nrows();
    let ctrb = krylov(a, b, n);
    if rank(&ctrb, Some(STRUCTURAL_RANK_TOL)) < n {
        return Err(Error::Uncontrollable);
    }
    let (charpoly, _) = leverrier_faddeev(a);
    let mut abar = RealMatrix::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        abar[(i, i + 1)] = 1.0;
    }
    for j in 0..n {
        abar[(n - 1, j)] = -charpoly.coeff(j);
    }
    let mut bbar = RealMatrix::zeros(n, 1);
    bbar[(n - 1, 0)] = 1.0;
    let ctrb_bar = krylov(&abar, &bbar, n);
    // P 𝒞 = 𝒞̄  ⇒  𝒞ᵀ Pᵀ = 𝒞̄ᵀ
    let p = solve(&ctrb.transpose(), &ctrb_bar.transpose())
        .map_err(|_| Error::Uncontrollable)?
        .transpose();
    let kbar = RealMatrix::from_fn(1, n, |_, j| target.coeff(j) - charpoly.coeff(j));
    Ok(kbar * p)
}

/// Place the eigenvalues of `A - B K` at `poles`.
///
/// Multi-input plants are reduced to a single input `B w` with `w` drawn from
/// a fixed Halton sequence starting after `seed`; the resulting gain has rank one.
pub fn place_poles(a: &RealMatrix, b: &RealMatrix, poles: &[Complex64], seed: u64) -> Result<Placement> {
    let n = ensure_square(a)?;
    if b.nrows() != n {
        return Err(Error::DimensionMismatch(format!("B must have {n} rows")));
    }
    if poles.len() != n {
        return Err(Error::InvalidArgument(format!("expected {n} poles, got {}", poles.len())));
    }
    check_conjugate_closed(poles)?;
    let m = b.ncols();
    if n == 0 {
        return Ok(Placement { k: RealMatrix::zeros(m, 0), achieved: Vec::new(), projection: None });
    }
    if rank(&krylov(a, b, n), Some(STRUCTURAL_RANK_TOL)) < n {
        return Err(Error::Uncontrollable);
    }
    let target = Polynomial::from_roots(poles);
    let (k, projection) = if m == 1 {
        (place_siso(a, b, &target)?, None)
    } else {
        let mut found = None;
        for idx in 1..=PROJECTION_TRIES {
            let h = halton(seed + idx, m);
            let mut w = RealMatrix::from_fn(m, 1, |i, _| 2.0 * h[i] - 1.0);
            let nw = w.norm();
            if nw < 1e-3 {
                continue;
            }
            w /= nw;
            match place_siso(a, &(b * &w), &target) {
                Ok(kbar) => {
                    found = Some((&w * kbar, Some(w)));
                    break;
                }
                Err(Error::Uncontrollable) => continue,
                Err(e) => return Err(e),
            }
        }
        found.ok_or(Error::ProjectionFailed)?
    };
    let achieved = eigen(&(a - b * &k))?.values;
    let deviation = spectrum_deviation(poles, &achieved);
    if deviation > PLACEMENT_TOL {
        return Err(Error::PlacementMismatch { deviation });
    }
    Ok(Placement { k, achieved, projection })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverGain {
    /// `x̂' = A x̂ + B u + L (y - C x̂)`.
    pub l: RealMatrix,
    pub achieved: Vec<Complex64>,
}

/// `L = place(Aᵀ, Cᵀ)ᵀ`.
pub fn observer_gain(a: &RealMatrix, c: &RealMatrix, poles: &[Complex64], seed: u64) -> Result<ObserverGain> {
    let pl = place_poles(&a.transpose(), &c.transpose(), poles, seed).map_err(|e| match e {
        Error::Uncontrollable | Error::ProjectionFailed => Error::Unobservable,
        other => other,
    })?;
    Ok(ObserverGain { l: pl.k.transpose(), achieved: pl.achieved })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverFeedback {
    /// State `(x, e)` with `e = x - x̂`, input `v` in `u = -K x̂ + v`, output `y`.
    pub closed_loop: StateSpace,
    /// `G(s) = K (sI - [A - BK - LC])⁻¹ L`, mapping `y` to `-u`.
    pub compensator: TransferMatrix,
    pub compensator_realization: StateSpace,
    pub spectrum: Vec<Complex64>,
    /// Slowest decay rate of `A - LC` over that of `A - BK`. Reported only;
    /// observers are usually made two to five times faster.
    pub observer_speed_ratio: f64,
}

pub fn assemble_observer_feedback(sys: &StateSpace, k: &RealMatrix, l: &RealMatrix) -> Result<ObserverFeedback> {
    let (n, m, p) = (sys.n(), sys.m(), sys.p());
    if k.shape() != (m, n) || l.shape() != (n, p) {
        return Err(Error::DimensionMismatch(format!("K must be {m}x{n} and L {n}x{p}")));
    }
    let a_bk = &sys.a - &sys.b * k;
    let a_lc = &sys.a - l * &sys.c;
    let bk = &sys.b * k;
    let mut acl = RealMatrix::zeros(2 * n, 2 * n);
    acl.view_mut((0, 0), (n, n)).copy_from(&a_bk);
    acl.view_mut((0, n), (n, n)).copy_from(&bk);
    acl.view_mut((n, n), (n, n)).copy_from(&a_lc);
    let mut bcl = RealMatrix::zeros(2 * n, m);
    bcl.view_mut((0, 0), (n, m)).copy_from(&sys.b);
    let mut ccl = RealMatrix::zeros(p, 2 * n);
    ccl.view_mut((0, 0), (p, n)).copy_from(&sys.c);
    let closed_loop = StateSpace::new(acl, bcl, ccl, RealMatrix::zeros(p, m))?;

    let spectrum = eigen(&closed_loop.a)?.values;
    let e1 = eigen(&a_bk)?.values;
    let e2 = eigen(&a_lc)?.values;
    let union: Vec<Complex64> = e1.iter().chain(e2.iter()).copied().collect();
    let dev = spectrum_deviation(&union, &spectrum);
    if dev > PLACEMENT_TOL {
        return Err(Error::InternalInconsistency(format!("separation spectrum deviates by {dev:e}")));
    }
    let slowest = |v: &[Complex64]| v.iter().map(|z| z.re.abs()).fold(f64::INFINITY, f64::min);
    let observer_speed_ratio = slowest(&e2) / slowest(&e1);

    let comp = StateSpace::new(&a_bk - l * &sys.c, l.clone(), k.clone(), RealMatrix::zeros(m, p))?;
    let compensator = ss_to_tf(&comp)?;
    Ok(ObserverFeedback { closed_loop, compensator, compensator_realization: comp, spectrum, observer_speed_ratio })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedObserver {
    /// `(n - p) x p` gain placing `eig(A22 - L A12)`.
    pub gain: RealMatrix,
    /// Estimator with state `z = x̂2 - L y`, input `(y, u)` and output `x̂`.
    pub estimator: StateSpace,
    /// `x̄ = P x` with `x̄1 = y`.
    pub transform: RealMatrix,
}

/// Luenberger reduced-order observer in derivative-free form:
/// `ż = F z + [F L + A21 - L A11] y + (B2 - L B1) u`, `F = A22 - L A12`.
pub fn reduced_order_observer(sys: &StateSpace, poles: &[Complex64], seed: u64) -> Result<ReducedObserver> {
    let (n, m, p) = (sys.n(), sys.m(), sys.p());
    if rank(&sys.c, Some(STRUCTURAL_RANK_TOL)) < p || p > n {
        return Err(Error::RankDeficientC);
    }
    let r = n - p;
    let mut transform = RealMatrix::zeros(n, n);
    transform.view_mut((0, 0), (p, n)).copy_from(&sys.c);
    if r > 0 {
        let extra = complete_basis(&sys.c.transpose());
        transform.view_mut((p, 0), (r, n)).copy_from(&extra.transpose());
    }
    let pinv = inverse(&transform).map_err(|_| Error::RankDeficientC)?;
    let abar = &transform * &sys.a * &pinv;
    let bbar = &transform * &sys.b;
    let a11 = abar.view((0, 0), (p, p)).into_owned();
    let a12 = abar.view((0, p), (p, r)).into_owned();
    let a21 = abar.view((p, 0), (r, p)).into_owned();
    let a22 = abar.view((p, p), (r, r)).into_owned();
    let b1 = bbar.view((0, 0), (p, m)).into_owned();
    let b2 = bbar.view((p, 0), (r, m)).into_owned();

    let gain = if r == 0 {
        RealMatrix::zeros(0, p)
    } else {
        observer_gain(&a22, &a12, poles, seed)
            .map_err(|e| if e == Error::Unobservable { Error::SubpairUnobservable } else { e })?
            .l
    };
    let f = &a22 - &gain * &a12;
    let gy = &f * &gain + &a21 - &gain * &a11;
    let gu = &b2 - &gain * &b1;
    let mut be = RealMatrix::zeros(r, p + m);
    be.view_mut((0, 0), (r, p)).copy_from(&gy);
    be.view_mut((0, p), (r, m)).copy_from(&gu);
    // x̂ = P⁻¹ [y; z + L y]
    let mut ce_bar = RealMatrix::zeros(n, r);
    ce_bar.view_mut((p, 0), (r, r)).fill_with_identity();
    let mut de_bar = RealMatrix::zeros(n, p + m);
    de_bar.view_mut((0, 0), (p, p)).fill_with_identity();
    de_bar.view_mut((p, 0), (r, p)).copy_from(&gain);
    let estimator = StateSpace::new(f, be, &pinv * ce_bar, &pinv * de_bar)?;
    Ok(ReducedObserver { gain, estimator, transform })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegralDesign {
    pub k1: RealMatrix,
    pub k2: RealMatrix,
    /// `[[A, 0], [C, 0]]`
    pub a_aug: RealMatrix,
    /// `[[B], [0]]`
    pub b_aug: RealMatrix,
    /// `rank [[-A, B], [-C, 0]]`, which must equal `n + p`.
    pub zero_rank: usize,
    pub achieved: Vec<Complex64>,
}

impl IntegralDesign {
    /// Closed loop with state `(x, σ)`, `σ' = y - r`, `u = -K1 x - K2 σ`,
    /// inputs `(r, w)` where the disturbance `w` enters through `B`, output `y`.
    pub fn closed_loop(&self, sys: &StateSpace) -> Result<StateSpace> {
        let (n, m, p) = (sys.n(), sys.m(), sys.p());
        let mut a = RealMatrix::zeros(n + p, n + p);
        a.view_mut((0, 0), (n, n)).copy_from(&(&sys.a - &sys.b * &self.k1));
        a.view_mut((0, n), (n, p)).copy_from(&(-(&sys.b * &self.k2)));
        a.view_mut((n, 0), (p, n)).copy_from(&sys.c);
        let mut b = RealMatrix::zeros(n + p, p + m);
        b.view_mut((0, p), (n, m)).copy_from(&sys.b);
        b.view_mut((n, 0), (p, p)).copy_from(&(-RealMatrix::identity(p, p)));
        let mut c = RealMatrix::zeros(p, n + p);
        c.view_mut((0, 0), (p, n)).copy_from(&sys.c);
        StateSpace::new(a, b, c, RealMatrix::zeros(p, p + m))
    }
}

/// Integral action for constant references and disturbances: place the
/// spectrum of `Ã - B̃ K̃` with `K̃ = [K1 K2]`.
pub fn integral_control(sys: &StateSpace, poles: &[Complex64], seed: u64) -> Result<IntegralDesign> {
    let (n, m, p) = (sys.n(), sys.m(), sys.p());
    let ctrb = controllability_matrix(sys);
    if rank(&ctrb, Some(STRUCTURAL_RANK_TOL)) < n {
        return Err(Error::Uncontrollable);
    }
    let mut zm = RealMatrix::zeros(n + p, n + m);
    zm.view_mut((0, 0), (n, n)).copy_from(&(-&sys.a));
    zm.view_mut((0, n), (n, m)).copy_from(&sys.b);
    zm.view_mut((n, 0), (p, n)).copy_from(&(-&sys.c));
    let zero_rank = rank(&zm, Some(STRUCTURAL_RANK_TOL));
    if zero_rank < n + p {
        return Err(Error::ZeroAtOrigin);
    }
    let mut a_aug = RealMatrix::zeros(n + p, n + p);
    a_aug.view_mut((0, 0), (n, n)).copy_from(&sys.a);
    a_aug.view_mut((n, 0), (p, n)).copy_from(&sys.c);
    let mut b_aug = RealMatrix::zeros(n + p, m);
    b_aug.view_mut((0, 0), (n, m)).copy_from(&sys.b);
    let pl = place_poles(&a_aug, &b_aug, poles, seed)?;
    let k1 = pl.k.columns(0, n).into_owned();
    let k2 = pl.k.columns(n, p).into_owned();
    Ok(IntegralDesign { k1, k2, a_aug, b_aug, zero_rank, achieved: pl.achieved })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiophantineSolution {
    pub a: Polynomial,
    pub b: Polynomial,
    pub alpha_c: Polynomial,
    pub alpha_o: Polynomial,
    /// Monic, degree `n`.
    pub d: Polynomial,
    /// Degree below `n`.
    pub n: Polynomial,
    /// `max |a d + b n - α_c α_o| / max |α_c α_o|`.
    pub residual: f64,
    pub compensator: RationalFunction,
}

/// Solve `a d + b n = α_c α_o` for a plant `b / a` through its Sylvester
/// system; `d` is monic of degree `deg a` and `deg n < deg a`.
pub fn diophantine_design(plant: &RationalFunction, alpha_c: &Polynomial, alpha_o: &Polynomial) -> Result<DiophantineSolution> {
    let g = plant.normalized();
    let (a, b) = (g.den.clone(), g.num.clone());
    let n = a.degree();
    if n == 0 {
        return Err(Error::InvalidArgument("plant has no dynamics".into()));
    }
    if !g.is_proper() {
        return Err(Error::ImproperTransferFunction { num: b.degree(), den: n });
    }
    if alpha_c.degree() != n || alpha_o.degree() != n {
        return Err(Error::InvalidArgument(format!("target polynomials must have degree {n}")));
    }
    let target = alpha_c.mul(alpha_o);
    if (target.leading() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument("alpha_c * alpha_o must be monic".into()));
    }
    if !b.is_zero() {
        let bscale = b.max_abs();
        for r in a.roots()? {
            let scale = bscale * (1.0 + r.norm()).powi(b.degree() as i32);
            if b.eval_complex(r).norm() <= 1e-8 * scale {
                return Err(Error::CommonFactor);
            }
        }
    } else {
        return Err(Error::CommonFactor);
    }
    // unknowns: d_0..d_{n-1}, n_0..n_{n-1}; equations: coefficients s^0..s^{2n-1}
    let size = 2 * n;
    let mut s = RealMatrix::zeros(size, size);
    let mut rhs = RealMatrix::zeros(size, 1);
    for k in 0..size {
        for j in 0..n {
            if k >= j {
                s[(k, j)] = a.coeff(k - j);
                s[(k, n + j)] = b.coeff(k - j);
            }
        }
        rhs[(k, 0)] = target.coeff(k) - if k >= n { a.coeff(k - n) } else { 0.0 };
    }
    if rcond(&s) <= 1e-13 {
        return Err(Error::SingularSylvester);
    }
    let x = solve(&s, &rhs).map_err(|_| Error::SingularSylvester)?;
    let mut dc = vec![1.0];
    dc.extend((0..n).rev().map(|j| x[(j, 0)]));
    let d = Polynomial::new(dc);
    let nc: Vec<f64> = (0..n).rev().map(|j| x[(n + j, 0)]).collect();
    let np = Polynomial::new(nc);
    let lhs = a.mul(&d).add(&b.mul(&np));
    let residual = lhs.sub(&target).max_abs() / target.max_abs();
    if residual > 1e-8 {
        return Err(Error::InternalInconsistency(format!("Diophantine residual {residual:e}")));
    }
    let compensator = RationalFunction::new(np.clone(), d.clone())?;
    Ok(DiophantineSolution {
        a,
        b,
        alpha_c: alpha_c.clone(),
        alpha_o: alpha_o.clone(),
        d,
        n: np,
        residual,
        compensator,
    })
}
