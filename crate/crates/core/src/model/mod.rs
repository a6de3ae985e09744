//! Model records and linearization.

mod builtin;
mod schema;

pub use builtin::{builtin, satellite, BUILTIN_NAMES};
pub use schema::{matrix_from_json, model_from_json, vector_from_json};

use crate::error::{Error, Result};
use crate::numkit::{ensure_finite, inverse, rcond, solve, to_complex, Complex64, ComplexMatrix, RealMatrix, RealVector, EPS};
use std::fmt;
use std::sync::Arc;

/// The LTI quadruple `(A, B, C, D)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub a: RealMatrix,
    pub b: RealMatrix,
    pub c: RealMatrix,
    pub d: RealMatrix,
}

impl StateSpace {
    pub fn new(a: RealMatrix, b: RealMatrix, c: RealMatrix, d: RealMatrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::NonSquare { rows: n, cols: a.ncols() });
        }
        if b.nrows() != n {
            return Err(Error::DimensionMismatch(format!("B has {} rows, expected {n}", b.nrows())));
        }
        if c.ncols() != n {
            return Err(Error::DimensionMismatch(format!("C has {} columns, expected {n}", c.ncols())));
        }
        if d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "D is {}x{}, expected {}x{}",
                d.nrows(),
                d.ncols(),
                c.nrows(),
                b.ncols()
            )));
        }
        for (m, name) in [(&a, "A"), (&b, "B"), (&c, "C"), (&d, "D")] {
            ensure_finite(m, name)?;
        }
        Ok(Self { a, b, c, d })
    }

    /// `(A, B, C)` with `D = 0`.
    pub fn abc(a: RealMatrix, b: RealMatrix, c: RealMatrix) -> Result<Self> {
        let d = RealMatrix::zeros(c.nrows(), b.ncols());
        Self::new(a, b, c, d)
    }

    /// `(A, B)` with full-state output `C = I`, `D = 0`.
    pub fn ab(a: RealMatrix, b: RealMatrix) -> Result<Self> {
        let n = a.nrows();
        Self::abc(a, b, RealMatrix::identity(n, n))
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    /// `C (sI - A)^{-1} B + D`.
    pub fn transfer_at(&self, s: Complex64) -> Result<ComplexMatrix> {
        let n = self.n();
        let si = ComplexMatrix::identity(n, n) * s - to_complex(&self.a);
        let x = crate::numkit::solve_complex(&si, &to_complex(&self.b))?;
        Ok(to_complex(&self.c) * x + to_complex(&self.d))
    }
}

pub type MatrixFn = Arc<dyn Fn(f64) -> RealMatrix + Send + Sync>;
pub type VectorField = Arc<dyn Fn(&RealVector, &RealVector, f64) -> RealVector + Send + Sync>;

/// Linear time-varying model given by matrix-valued callables.
#[derive(Clone)]
pub struct LtvModel {
    pub a: MatrixFn,
    pub b: MatrixFn,
    pub c: MatrixFn,
    pub d: MatrixFn,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    /// Sorted times where the coefficients may jump.
    pub breaks: Vec<f64>,
}

impl fmt::Debug for LtvModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LtvModel")
            .field("n", &self.n)
            .field("m", &self.m)
            .field("p", &self.p)
            .field("breaks", &self.breaks)
            .finish_non_exhaustive()
    }
}

impl LtvModel {
    /// Dimensions are checked by sampling the callables at `probe_t`.
    pub fn new(a: MatrixFn, b: MatrixFn, c: MatrixFn, d: MatrixFn, mut breaks: Vec<f64>, probe_t: f64) -> Result<Self> {
        let (a0, b0, c0, d0) = (a(probe_t), b(probe_t), c(probe_t), d(probe_t));
        let ss = StateSpace::new(a0, b0, c0, d0)?;
        breaks.retain(|t| t.is_finite());
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        Ok(Self { a, b, c, d, n: ss.n(), m: ss.m(), p: ss.p(), breaks })
    }

    pub fn from_lti(sys: &StateSpace) -> Self {
        let (a, b, c, d) = (sys.a.clone(), sys.b.clone(), sys.c.clone(), sys.d.clone());
        Self {
            a: Arc::new(move |_| a.clone()),
            b: Arc::new(move |_| b.clone()),
            c: Arc::new(move |_| c.clone()),
            d: Arc::new(move |_| d.clone()),
            n: sys.n(),
            m: sys.m(),
            p: sys.p(),
            breaks: Vec::new(),
        }
    }

    /// Piecewise-linear interpolation of sampled matrices, held constant
    /// outside the sample range.
    pub fn from_samples(
        times: Vec<f64>,
        a: Vec<RealMatrix>,
        b: Vec<RealMatrix>,
        c: Vec<RealMatrix>,
        d: Vec<RealMatrix>,
    ) -> Result<Self> {
        let k = times.len();
        if k == 0 || a.len() != k || b.len() != k || c.len() != k || d.len() != k {
            return Err(Error::DimensionMismatch("sample arrays must be non-empty and of equal length".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("sample times must be strictly increasing".into()));
        }
        for i in 0..k {
            StateSpace::new(a[i].clone(), b[i].clone(), c[i].clone(), d[i].clone())?;
            if a[i].shape() != a[0].shape() || b[i].shape() != b[0].shape() || c[i].shape() != c[0].shape() {
                return Err(Error::DimensionMismatch(format!("sample {i} changes dimensions")));
            }
        }
        let times = Arc::new(times);
        let interp = |mats: Vec<RealMatrix>| -> MatrixFn {
            let mats = Arc::new(mats);
            let times = Arc::clone(&times);
            Arc::new(move |t: f64| interpolate(&times, &mats, t))
        };
        let (n, m, p) = (a[0].nrows(), b[0].ncols(), c[0].nrows());
        Ok(Self { a: interp(a), b: interp(b), c: interp(c), d: interp(d), n, m, p, breaks: Vec::new() })
    }
}

fn interpolate(times: &[f64], mats: &[RealMatrix], t: f64) -> RealMatrix {
    let k = times.len();
    if k == 1 || t <= times[0] {
        return mats[0].clone();
    }
    if t >= times[k - 1] {
        return mats[k - 1].clone();
    }
    let i = times.partition_point(|&x| x <= t) - 1;
    let w = (t - times[i]) / (times[i + 1] - times[i]);
    &mats[i] * (1.0 - w) + &mats[i + 1] * w
}

/// Uniform access to LTI and LTV coefficient matrices.
pub trait LinearDynamics: Sync {
    fn n(&self) -> usize;
    fn m(&self) -> usize;
    fn p(&self) -> usize;
    fn a_at(&self, t: f64) -> RealMatrix;
    fn b_at(&self, t: f64) -> RealMatrix;
    fn c_at(&self, t: f64) -> RealMatrix;
    fn d_at(&self, t: f64) -> RealMatrix;
    fn breaks(&self) -> &[f64] {
        &[]
    }
    /// Constant-coefficient fast path.
    fn as_lti(&self) -> Option<&StateSpace> {
        None
    }
}

impl LinearDynamics for StateSpace {
    fn n(&self) -> usize {
        StateSpace::n(self)
    }
    fn m(&self) -> usize {
        StateSpace::m(self)
    }
    fn p(&self) -> usize {
        StateSpace::p(self)
    }
    fn a_at(&self, _: f64) -> RealMatrix {
        self.a.clone()
    }
    fn b_at(&self, _: f64) -> RealMatrix {
        self.b.clone()
    }
    fn c_at(&self, _: f64) -> RealMatrix {
        self.c.clone()
    }
    fn d_at(&self, _: f64) -> RealMatrix {
        self.d.clone()
    }
    fn as_lti(&self) -> Option<&StateSpace> {
        Some(self)
    }
}

impl LinearDynamics for LtvModel {
    fn n(&self) -> usize {
        self.n
    }
    fn m(&self) -> usize {
        self.m
    }
    fn p(&self) -> usize {
        self.p
    }
    fn a_at(&self, t: f64) -> RealMatrix {
        (self.a)(t)
    }
    fn b_at(&self, t: f64) -> RealMatrix {
        (self.b)(t)
    }
    fn c_at(&self, t: f64) -> RealMatrix {
        (self.c)(t)
    }
    fn d_at(&self, t: f64) -> RealMatrix {
        (self.d)(t)
    }
    fn breaks(&self) -> &[f64] {
        &self.breaks
    }
}

/// A nominal state/input pair a builtin model is usually studied around.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    pub x: RealVector,
    pub u: RealVector,
}

/// `ẋ = f(x, u, t)`, `y = h(x, u, t)`.
#[derive(Clone)]
pub struct NonlinearModel {
    pub f: VectorField,
    pub h: VectorField,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub name: String,
    pub operating_point: Option<OperatingPoint>,
}

impl fmt::Debug for NonlinearModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlinearModel")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("m", &self.m)
            .field("p", &self.p)
            .field("operating_point", &self.operating_point)
            .finish_non_exhaustive()
    }
}

impl NonlinearModel {
    pub fn new(n: usize, m: usize, p: usize, f: VectorField, h: VectorField) -> Self {
        Self { f, h, n, m, p, name: String::new(), operating_point: None }
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn with_operating_point(mut self, x: RealVector, u: RealVector) -> Self {
        self.operating_point = Some(OperatingPoint { x, u });
        self
    }

    fn check_args(&self, x: &RealVector, u: &RealVector) -> Result<()> {
        if x.len() != self.n || u.len() != self.m {
            return Err(Error::DimensionMismatch(format!(
                "model expects x in R^{} and u in R^{}, got {} and {}",
                self.n,
                self.m,
                x.len(),
                u.len()
            )));
        }
        Ok(())
    }

    pub fn eval_f(&self, x: &RealVector, u: &RealVector, t: f64) -> Result<RealVector> {
        self.check_args(x, u)?;
        let v = (self.f)(x, u, t);
        if v.len() != self.n {
            return Err(Error::DimensionMismatch(format!("f returned length {}, expected {}", v.len(), self.n)));
        }
        Ok(v)
    }

    pub fn eval_h(&self, x: &RealVector, u: &RealVector, t: f64) -> Result<RealVector> {
        self.check_args(x, u)?;
        let v = (self.h)(x, u, t);
        if v.len() != self.p {
            return Err(Error::DimensionMismatch(format!("h returned length {}, expected {}", v.len(), self.p)));
        }
        Ok(v)
    }
}

/// Any of the three model kinds, as loaded from JSON.
#[derive(Debug, Clone)]
pub enum Model {
    Lti(StateSpace),
    Ltv(LtvModel),
    Nonlinear(NonlinearModel),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Lti(_) => "lti",
            Model::Ltv(_) => "ltv",
            Model::Nonlinear(_) => "nonlinear",
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        match self {
            Model::Lti(s) => (s.n(), s.m(), s.p()),
            Model::Ltv(l) => (l.n, l.m, l.p),
            Model::Nonlinear(nl) => (nl.n, nl.m, nl.p),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub xe: RealVector,
    pub ue: RealVector,
    pub residual: f64,
}

const NEWTON_MAX_ITER: usize = 100;

/// Default relative step for central differences, `eps^{1/3}`.
pub fn default_fd_step() -> f64 {
    EPS.cbrt()
}

/// Jacobian of `g` at `z` by central differences with step `step * (1 + |z_i|)`.
pub(crate) fn central_jacobian<F>(g: F, z: &RealVector, rows: usize, step: f64) -> Result<RealMatrix>
where
    F: Fn(&RealVector) -> Result<RealVector>,
{
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::StepTooSmall(format!("step {step} must be positive and finite")));
    }
    let mut jac = RealMatrix::zeros(rows, z.len());
    for j in 0..z.len() {
        let h = step * (1.0 + z[j].abs());
        let mut zp = z.clone();
        let mut zm = z.clone();
        zp[j] += h;
        zm[j] -= h;
        let width = zp[j] - zm[j];
        // the realized perturbation must dominate rounding in z itself
        if width <= 0.0 || width < 64.0 * EPS * (1.0 + z[j].abs()) {
            return Err(Error::StepTooSmall(format!("perturbation of component {j} is lost to rounding")));
        }
        let gp = g(&zp)?;
        let gm = g(&zm)?;
        let col = (gp - gm) / width;
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::StepTooSmall(format!("non-finite difference quotient in component {j}")));
        }
        jac.set_column(j, &col);
    }
    Ok(jac)
}

/// Newton's method on `f(·, ue, t)` from `x0`, with a finite-difference
/// Jacobian and step halving when the residual grows.
pub fn find_equilibrium(model: &NonlinearModel, ue: &RealVector, x0: &RealVector, tol: f64) -> Result<Equilibrium> {
    let t = 0.0;
    let mut x = x0.clone();
    let mut fx = model.eval_f(&x, ue, t)?;
    let mut res = fx.norm();
    for _ in 0..NEWTON_MAX_ITER {
        if res <= tol {
            return Ok(Equilibrium { xe: x, ue: ue.clone(), residual: res });
        }
        let jac = central_jacobian(|z| model.eval_f(z, ue, t), &x, model.n, default_fd_step())?;
        if rcond(&jac) <= model.n as f64 * EPS {
            return Err(Error::SingularJacobian);
        }
        let rhs = RealMatrix::from_column_slice(model.n, 1, fx.as_slice());
        let dx = solve(&jac, &rhs).map_err(|_| Error::SingularJacobian)?.column(0).into_owned();
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = &x - &dx * alpha;
            if let Ok(ft) = model.eval_f(&trial, ue, t) {
                let r = ft.norm();
                if r.is_finite() && r < res {
                    x = trial;
                    fx = ft;
                    res = r;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if res <= tol {
        return Ok(Equilibrium { xe: x, ue: ue.clone(), residual: res });
    }
    Err(Error::NoConvergence { max_iter: NEWTON_MAX_ITER, residual: res })
}

/// Jacobians of `f` and `h` at `(x, u, t)`.
pub fn jacobians(model: &NonlinearModel, x: &RealVector, u: &RealVector, t: f64, step: f64) -> Result<StateSpace> {
    let a = central_jacobian(|z| model.eval_f(z, u, t), x, model.n, step)?;
    let b = central_jacobian(|w| model.eval_f(x, w, t), u, model.n, step)?;
    let c = central_jacobian(|z| model.eval_h(z, u, t), x, model.p, step)?;
    let d = central_jacobian(|w| model.eval_h(x, w, t), u, model.p, step)?;
    StateSpace::new(a, b, c, d)
}

/// Linearization about an equilibrium; `step = None` uses [`default_fd_step`].
pub fn linearize_at_equilibrium(model: &NonlinearModel, eq: &Equilibrium, step: Option<f64>) -> Result<StateSpace> {
    jacobians(model, &eq.xe, &eq.ue, 0.0, step.unwrap_or_else(default_fd_step))
}

/// Linearization along sampled nominal trajectory `(times, xs, us)`.
///
/// The nominal is checked against `f` using difference quotients of the
/// samples: `max_k |ẋ_k - f(x_k, u_k, t_k)| / (1 + |f|)` must not exceed `tol`.
pub fn linearize_along_trajectory(
    model: &NonlinearModel,
    times: &[f64],
    xs: &[RealVector],
    us: &[RealVector],
    tol: f64,
) -> Result<LtvModel> {
    let k = times.len();
    if k == 0 || xs.len() != k || us.len() != k {
        return Err(Error::DimensionMismatch("trajectory samples must be non-empty and aligned".into()));
    }
    let mut worst = 0.0f64;
    if k >= 2 {
        for i in 0..k {
            let (lo, hi) = if i == 0 {
                (0, 1)
            } else if i == k - 1 {
                (k - 2, k - 1)
            } else {
                (i - 1, i + 1)
            };
            let xdot = (&xs[hi] - &xs[lo]) / (times[hi] - times[lo]);
            let f = model.eval_f(&xs[i], &us[i], times[i])?;
            worst = worst.max((xdot - &f).norm() / (1.0 + f.norm()));
        }
    } else {
        let f = model.eval_f(&xs[0], &us[0], times[0])?;
        worst = f.norm() / (1.0 + f.norm());
    }
    if !(worst <= tol) {
        return Err(Error::TrajectoryResidualTooLarge { residual: worst, tol });
    }
    let step = default_fd_step();
    let mut am = Vec::with_capacity(k);
    let mut bm = Vec::with_capacity(k);
    let mut cm = Vec::with_capacity(k);
    let mut dm = Vec::with_capacity(k);
    for i in 0..k {
        let j = jacobians(model, &xs[i], &us[i], times[i], step)?;
        am.push(j.a);
        bm.push(j.b);
        cm.push(j.c);
        dm.push(j.d);
    }
    LtvModel::from_samples(times.to_vec(), am, bm, cm, dm)
}

/// `(P A P^{-1}, P B, C P^{-1}, D)`.
pub fn similarity_transform(sys: &StateSpace, p: &RealMatrix) -> Result<StateSpace> {
    let n = sys.n();
    if p.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!("P must be {n}x{n}")));
    }
    if rcond(p) <= 1e3 * n as f64 * EPS {
        return Err(Error::SingularTransform);
    }
    let pinv = inverse(p).map_err(|_| Error::SingularTransform)?;
    StateSpace::new(p * &sys.a * &pinv, p * &sys.b, &sys.c * &pinv, sys.d.clone())
}
