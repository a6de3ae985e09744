//! State-transition matrices and forced responses.

use crate::error::{Error, Result};
use crate::model::{LinearDynamics, Model, NonlinearModel};
use crate::numkit::{
    eigen, expm, rcond, rcond_complex, solve, solve_complex, Complex64, ComplexMatrix, RealMatrix, RealVector,
};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StmMethod {
    Series,
    CayleyHamilton,
    Modal,
    LtvFundamental,
    PeanoBaker,
}

impl StmMethod {
    pub fn name(self) -> &'static str {
        match self {
            StmMethod::Series => "series",
            StmMethod::CayleyHamilton => "cayleyHamilton",
            StmMethod::Modal => "modal",
            StmMethod::LtvFundamental => "ltvFundamental",
            StmMethod::PeanoBaker => "peanoBaker",
        }
    }
}

/// Condition bound above which the Cayley–Hamilton Vandermonde system is refused.
pub const VANDERMONDE_COND_MAX: f64 = 1e12;
/// Reciprocal condition below which a fundamental matrix is declared singular.
pub const FUNDAMENTAL_RCOND_MIN: f64 = 1e-13;

#[derive(Debug, Clone)]
enum Evaluator {
    Series { a: RealMatrix },
    CayleyHamilton { lambdas: Vec<Complex64>, powers: Vec<RealMatrix>, vandermonde: ComplexMatrix },
    Modal { lambdas: Vec<Complex64>, m: ComplexMatrix, m_inv: ComplexMatrix },
    Fundamental(FundamentalGrid),
}

/// Evaluator for `φ(t, τ)`.
#[derive(Debug, Clone)]
pub struct StateTransition {
    n: usize,
    method: StmMethod,
    eval: Evaluator,
}

impl StateTransition {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn method(&self) -> StmMethod {
        self.method
    }

    pub fn eval(&self, t: f64, tau: f64) -> Result<RealMatrix> {
        match &self.eval {
            Evaluator::Series { a } => expm(a, t - tau),
            Evaluator::CayleyHamilton { powers, .. } => {
                let beta = self.cayley_hamilton_betas(t - tau)?;
                let mut phi = RealMatrix::zeros(self.n, self.n);
                for (b, ak) in beta.iter().zip(powers) {
                    phi += ak * *b;
                }
                Ok(phi)
            }
            Evaluator::Modal { lambdas, m, m_inv } => {
                let dt = t - tau;
                let mut scaled = m.clone();
                for (j, l) in lambdas.iter().enumerate() {
                    let col = m.column(j) * (l * dt).exp();
                    scaled.set_column(j, &col);
                }
                let phi = scaled * m_inv;
                let re = phi.map(|z| z.re);
                let im = phi.map(|z| z.im).amax();
                if im > 1e-9 * re.amax().max(1.0) {
                    return Err(Error::InternalInconsistency(format!("modal transition has imaginary residue {im:e}")));
                }
                Ok(re)
            }
            Evaluator::Fundamental(g) => g.phi(t, tau),
        }
    }

    /// `φ(t) = φ(t, 0)`.
    pub fn at(&self, t: f64) -> Result<RealMatrix> {
        self.eval(t, 0.0)
    }

    /// Coefficients `β_k(t)` with `e^{At} = Σ β_k(t) A^k`; only for the
    /// Cayley–Hamilton evaluator.
    pub fn cayley_hamilton_betas(&self, t: f64) -> Result<Vec<f64>> {
        let Evaluator::CayleyHamilton { lambdas, vandermonde, .. } = &self.eval else {
            return Err(Error::InvalidArgument("not a Cayley-Hamilton evaluator".into()));
        };
        let n = lambdas.len();
        let rhs = ComplexMatrix::from_fn(n, 1, |i, _| (lambdas[i] * t).exp());
        let beta = solve_complex(vandermonde, &rhs)?;
        Ok(beta.iter().map(|z| z.re).collect())
    }
}

fn square(a: &RealMatrix) -> Result<usize> {
    crate::numkit::ensure_square(a)?;
    crate::numkit::ensure_finite(a, "A")?;
    Ok(a.nrows())
}

pub fn stm_series(a: &RealMatrix) -> Result<StateTransition> {
    let n = square(a)?;
    Ok(StateTransition { n, method: StmMethod::Series, eval: Evaluator::Series { a: a.clone() } })
}

/// Distinct-eigenvalue Cayley–Hamilton route; the confluent case is refused.
pub fn stm_cayley_hamilton(a: &RealMatrix) -> Result<StateTransition> {
    let n = square(a)?;
    let es = eigen(a)?;
    if es.has_repeated() {
        return Err(Error::RepeatedEigenvalues);
    }
    let lambdas = es.values.clone();
    let vandermonde = ComplexMatrix::from_fn(n, n, |i, k| lambdas[i].powi(k as i32));
    let rc = rcond_complex(&vandermonde);
    let cond = if rc > 0.0 { 1.0 / rc } else { f64::INFINITY };
    if n > 0 && cond > VANDERMONDE_COND_MAX {
        return Err(Error::IllConditionedVandermonde { cond });
    }
    let mut powers = Vec::with_capacity(n);
    let mut p = RealMatrix::identity(n, n);
    for _ in 0..n {
        powers.push(p.clone());
        p = &p * a;
    }
    Ok(StateTransition { n, method: StmMethod::CayleyHamilton, eval: Evaluator::CayleyHamilton { lambdas, powers, vandermonde } })
}

/// `φ(t) = M e^{Λt} M^{-1}` from the eigenvectors of a diagonalizable `A`.
pub fn stm_modal(a: &RealMatrix) -> Result<StateTransition> {
    let n = square(a)?;
    let es = eigen(a)?;
    if !es.is_diagonalizable {
        return Err(Error::NotDiagonalizable);
    }
    let m = es.right_vectors.clone();
    if n > 0 && rcond_complex(&m) < 1e-12 {
        return Err(Error::NotDiagonalizable);
    }
    let m_inv = solve_complex(&m, &ComplexMatrix::identity(n, n)).map_err(|_| Error::NotDiagonalizable)?;
    Ok(StateTransition { n, method: StmMethod::Modal, eval: Evaluator::Modal { lambdas: es.values, m, m_inv } })
}

/// Samples of the fundamental matrix `U` with `U̇ = A(t) U`, `U(t0) = I`.
#[derive(Debug, Clone)]
pub struct FundamentalGrid {
    times: Vec<f64>,
    u: Vec<RealMatrix>,
    /// One-sided derivatives at the left and right end of each mesh interval.
    du_left: Vec<RealMatrix>,
    du_right: Vec<RealMatrix>,
}

impl FundamentalGrid {
    pub fn span(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().expect("non-empty grid"))
    }

    /// Cubic Hermite dense output of `U(t)`.
    pub fn u_at(&self, t: f64) -> Result<RealMatrix> {
        let (lo, hi) = self.span();
        let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        if t < lo - slack || t > hi + slack {
            return Err(Error::InvalidArgument(format!("t = {t} outside the integrated span [{lo}, {hi}]")));
        }
        let t = t.clamp(lo, hi);
        let k = self.times.len();
        if k == 1 {
            return Ok(self.u[0].clone());
        }
        let i = (self.times.partition_point(|&x| x <= t).max(1) - 1).min(k - 2);
        let (ta, tb) = (self.times[i], self.times[i + 1]);
        let h = tb - ta;
        let s = (t - ta) / h;
        if s == 0.0 {
            return Ok(self.u[i].clone());
        }
        if s == 1.0 {
            return Ok(self.u[i + 1].clone());
        }
        let h00 = 2.0 * s.powi(3) - 3.0 * s * s + 1.0;
        let h10 = s.powi(3) - 2.0 * s * s + s;
        let h01 = -2.0 * s.powi(3) + 3.0 * s * s;
        let h11 = s.powi(3) - s * s;
        Ok(&self.u[i] * h00 + &self.du_left[i] * (h10 * h) + &self.u[i + 1] * h01 + &self.du_right[i] * (h11 * h))
    }

    /// `U(t) · solve(U(τ), I)`.
    pub fn phi(&self, t: f64, tau: f64) -> Result<RealMatrix> {
        let ut = self.u_at(t)?;
        let utau = self.u_at(tau)?;
        let rc = rcond(&utau);
        if rc < FUNDAMENTAL_RCOND_MIN {
            return Err(Error::SingularFundamental { t: tau, cond: if rc > 0.0 { 1.0 / rc } else { f64::INFINITY } });
        }
        let n = utau.nrows();
        let inv = solve(&utau, &RealMatrix::identity(n, n))
            .map_err(|_| Error::SingularFundamental { t: tau, cond: 1.0 / rc })?;
        Ok(ut * inv)
    }
}

/// Mesh from `t0` to `t1` with spacing at most `step`, forced through every
/// break strictly inside the span. Returns the mesh and, per interval,
/// whether either endpoint is a break.
fn mesh_with_breaks(t0: f64, t1: f64, step: f64, breaks: &[f64]) -> (Vec<f64>, Vec<bool>) {
    let mut knots = vec![t0];
    knots.extend(breaks.iter().copied().filter(|&b| b > t0 && b < t1));
    knots.push(t1);
    let mut mesh = vec![t0];
    let mut at_break = Vec::new();
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let k = ((b - a) / step).ceil().max(1.0) as usize;
        let h = (b - a) / k as f64;
        for j in 1..=k {
            let t = if j == k { b } else { a + h * j as f64 };
            let left_break = j == 1 && a != t0;
            let right_break = j == k && b != t1;
            at_break.push(left_break || right_break);
            mesh.push(t);
        }
    }
    (mesh, at_break)
}

/// Time at which coefficients are sampled inside `[a, b]`; near breaks the
/// sample is pulled slightly inside so the one-sided value is used.
fn inside(t: f64, a: f64, b: f64, guard: bool) -> f64 {
    if !guard {
        return t;
    }
    let nu = 1e-9 * (b - a);
    t.clamp(a + nu, b - nu)
}

fn validate_step(t0: f64, t1: f64, step: f64) -> Result<()> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    if !(t0.is_finite() && t1.is_finite()) {
        return Err(Error::InvalidArgument("time span must be finite".into()));
    }
    Ok(())
}

/// RK4 integration of `U̇ = A(t) U` from `U(t0) = I` over `[t0, t0 + horizon]`.
pub fn fundamental_matrix_ltv(model: &dyn LinearDynamics, t0: f64, horizon: f64, step: f64) -> Result<StateTransition> {
    let t1 = t0 + horizon;
    validate_step(t0, t1, step)?;
    if horizon < 0.0 {
        return Err(Error::InvalidArgument("horizon must be non-negative".into()));
    }
    let n = model.n();
    let (mesh, guard) = mesh_with_breaks(t0, t1, step, model.breaks());
    let mut u = vec![RealMatrix::identity(n, n)];
    let mut du_left = Vec::new();
    let mut du_right = Vec::new();
    for (k, w) in mesh.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let h = b - a;
        let g = guard[k];
        let am = |t: f64| model.a_at(inside(t, a, b, g));
        let uk = &u[k];
        let (a0, amid, a1) = (am(a), am(a + 0.5 * h), am(b));
        let k1 = &a0 * uk;
        let k2 = &amid * (uk + &k1 * (0.5 * h));
        let k3 = &amid * (uk + &k2 * (0.5 * h));
        let k4 = &a1 * (uk + &k3 * h);
        let next = uk + (k1.clone() + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularFundamental { t: b, cond: f64::INFINITY });
        }
        let rc = rcond(&next);
        if rc < FUNDAMENTAL_RCOND_MIN {
            return Err(Error::SingularFundamental { t: b, cond: if rc > 0.0 { 1.0 / rc } else { f64::INFINITY } });
        }
        du_left.push(k1);
        du_right.push(&a1 * &next);
        u.push(next);
    }
    let grid = FundamentalGrid { times: mesh, u, du_left, du_right };
    Ok(StateTransition { n, method: StmMethod::LtvFundamental, eval: Evaluator::Fundamental(grid) })
}

/// Transition evaluator suited to the model: exact series for LTI, the
/// integrated fundamental matrix over `[t_lo, t_hi]` otherwise.
pub fn transition_for(model: &dyn LinearDynamics, t_lo: f64, t_hi: f64, step: f64) -> Result<StateTransition> {
    match model.as_lti() {
        Some(sys) => stm_series(&sys.a),
        None => fundamental_matrix_ltv(model, t_lo, t_hi - t_lo, step),
    }
}

/// Picard iterates `φ_{k+1}(σ) = I + ∫_{t0}^{σ} A(s) φ_k(s) ds` on a uniform
/// grid with the composite trapezoid rule; returns `φ_iterations(t, t0)`.
pub fn peano_baker(model: &dyn LinearDynamics, t0: f64, t: f64, iterations: usize, quad_step: f64) -> Result<RealMatrix> {
    if iterations == 0 {
        return Err(Error::InvalidArgument("iterations must be at least 1".into()));
    }
    validate_step(t0, t, quad_step)?;
    let n = model.n();
    let ident = RealMatrix::identity(n, n);
    if t == t0 {
        return Ok(ident);
    }
    let k = ((t - t0).abs() / quad_step).ceil().max(1.0) as usize;
    let h = (t - t0) / k as f64;
    let grid: Vec<f64> = (0..=k).map(|j| if j == k { t } else { t0 + h * j as f64 }).collect();
    let a: Vec<RealMatrix> = grid.iter().map(|&s| model.a_at(s)).collect();
    let mut phi = vec![ident.clone(); k + 1];
    for _ in 0..iterations {
        let integrand: Vec<RealMatrix> = a.iter().zip(&phi).map(|(ai, pi)| ai * pi).collect();
        let mut next = Vec::with_capacity(k + 1);
        let mut acc = RealMatrix::zeros(n, n);
        next.push(ident.clone());
        for j in 1..=k {
            acc += (&integrand[j - 1] + &integrand[j]) * (0.5 * h);
            next.push(&ident + &acc);
        }
        phi = next;
    }
    Ok(phi.pop().expect("grid is non-empty"))
}

/// Sampled response. `blew_up` marks a trajectory truncated at the first
/// non-finite (or astronomically large) state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<RealVector>,
    pub inputs: Vec<RealVector>,
    pub outputs: Vec<RealVector>,
    pub blew_up: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &RealVector {
        self.states.last().expect("trajectory has at least the initial sample")
    }

    /// Header `t,x1..xn,u1..um,y1..yp`; values in 17 significant digits.
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map_or(0, |v| v.len());
        let m = self.inputs.first().map_or(0, |v| v.len());
        let p = self.outputs.first().map_or(0, |v| v.len());
        let mut out = String::from("t");
        for (prefix, count) in [("x", n), ("u", m), ("y", p)] {
            for i in 1..=count {
                let _ = write!(out, ",{prefix}{i}");
            }
        }
        out.push('\n');
        for k in 0..self.times.len() {
            let _ = write!(out, "{}", fmt17(self.times[k]));
            for v in [&self.states[k], &self.inputs[k], &self.outputs[k]] {
                for x in v.iter() {
                    let _ = write!(out, ",{}", fmt17(*x));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

const BLOW_UP: f64 = 1e150;

fn is_blown(x: &RealVector) -> bool {
    x.iter().any(|v| !v.is_finite() || v.abs() > BLOW_UP)
}

pub type InputFn<'a> = &'a (dyn Fn(f64) -> RealVector + Sync);

fn input_at(u: InputFn, t: f64, m: usize) -> Result<RealVector> {
    let v = u(t);
    if v.len() != m {
        return Err(Error::DimensionMismatch(format!("input function returned length {}, expected {m}", v.len())));
    }
    Ok(v)
}

fn check_x0(x0: &RealVector, n: usize) -> Result<()> {
    if x0.len() != n {
        return Err(Error::DimensionMismatch(format!("x0 has length {}, expected {n}", x0.len())));
    }
    Ok(())
}

/// Forced response of a linear model.
///
/// LTI: exact `Φ_h` per step and Simpson quadrature of the convolution,
/// `x_{k+1} = Φ_h x_k + h/6 [Φ_h B u_k + 4 Φ_{h/2} B u_{k+1/2} + B u_{k+1}]`.
/// LTV: classical RK4 on a mesh forced through the declared breaks.
pub fn simulate_linear(model: &dyn LinearDynamics, x0: &RealVector, u: InputFn, t0: f64, t1: f64, step: f64) -> Result<Trajectory> {
    validate_step(t0, t1, step)?;
    if t1 < t0 {
        return Err(Error::InvalidArgument("t1 must not precede t0".into()));
    }
    let (n, m) = (model.n(), model.m());
    check_x0(x0, n)?;
    let (mesh, guard) = match model.as_lti() {
        Some(_) => mesh_with_breaks(t0, t1, step, &[]),
        None => mesh_with_breaks(t0, t1, step, model.breaks()),
    };
    let mut traj = Trajectory { times: vec![t0], states: vec![x0.clone()], inputs: Vec::new(), outputs: Vec::new(), blew_up: false };
    let u0 = input_at(u, t0, m)?;
    traj.outputs.push(model.c_at(t0) * x0 + model.d_at(t0) * &u0);
    traj.inputs.push(u0);
    let lti = model.as_lti().map(|sys| -> Result<_> {
        let h = if mesh.len() > 1 { mesh[1] - mesh[0] } else { 0.0 };
        let phi_h = expm(&sys.a, h)?;
        let phi_half = expm(&sys.a, 0.5 * h)?;
        Ok((h, &phi_h * &sys.b, &phi_half * &sys.b, phi_h))
    });
    let lti = lti.transpose()?;
    for (k, w) in mesh.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let h = b - a;
        let x = traj.states.last().expect("non-empty");
        let uk = traj.inputs.last().expect("non-empty").clone();
        let umid = input_at(u, a + 0.5 * h, m)?;
        let ub = input_at(u, b, m)?;
        let next = match (&lti, model.as_lti()) {
            (Some((h0, phib, phihb, phi_h)), Some(sys)) if (h - h0).abs() <= 1e-12 * h0.abs().max(1.0) => {
                phi_h * x + (phib * &uk + phihb * &umid * 4.0 + &sys.b * &ub) * (h / 6.0)
            }
            (_, Some(sys)) => {
                let phi = expm(&sys.a, h)?;
                let phi2 = expm(&sys.a, 0.5 * h)?;
                &phi * x + (&phi * &sys.b * &uk + &phi2 * &sys.b * &umid * 4.0 + &sys.b * &ub) * (h / 6.0)
            }
            _ => {
                let g = guard[k];
                let rhs = |t: f64, xs: &RealVector, us: &RealVector| {
                    let tt = inside(t, a, b, g);
                    model.a_at(tt) * xs + model.b_at(tt) * us
                };
                let k1 = rhs(a, x, &uk);
                let k2 = rhs(a + 0.5 * h, &(x + &k1 * (0.5 * h)), &umid);
                let k3 = rhs(a + 0.5 * h, &(x + &k2 * (0.5 * h)), &umid);
                let k4 = rhs(b, &(x + &k3 * h), &ub);
                x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
            }
        };
        if is_blown(&next) {
            traj.blew_up = true;
            break;
        }
        traj.outputs.push(model.c_at(b) * &next + model.d_at(b) * &ub);
        traj.times.push(b);
        traj.states.push(next);
        traj.inputs.push(ub);
    }
    Ok(traj)
}

/// Forced response of `ẋ = f(x, u, t)` by classical RK4.
pub fn simulate_nonlinear(model: &NonlinearModel, x0: &RealVector, u: InputFn, t0: f64, t1: f64, step: f64) -> Result<Trajectory> {
    validate_step(t0, t1, step)?;
    if t1 < t0 {
        return Err(Error::InvalidArgument("t1 must not precede t0".into()));
    }
    check_x0(x0, model.n)?;
    let (mesh, _) = mesh_with_breaks(t0, t1, step, &[]);
    let u0 = input_at(u, t0, model.m)?;
    let mut traj = Trajectory {
        times: vec![t0],
        states: vec![x0.clone()],
        outputs: vec![model.eval_h(x0, &u0, t0)?],
        inputs: vec![u0],
        blew_up: false,
    };
    for w in mesh.windows(2) {
        let (a, b) = (w[0], w[1]);
        let h = b - a;
        let x = traj.states.last().expect("non-empty").clone();
        let uk = traj.inputs.last().expect("non-empty").clone();
        let umid = input_at(u, a + 0.5 * h, model.m)?;
        let ub = input_at(u, b, model.m)?;
        let k1 = model.eval_f(&x, &uk, a)?;
        let k2 = model.eval_f(&(&x + &k1 * (0.5 * h)), &umid, a + 0.5 * h)?;
        let k3 = model.eval_f(&(&x + &k2 * (0.5 * h)), &umid, a + 0.5 * h)?;
        let k4 = model.eval_f(&(&x + &k3 * h), &ub, b)?;
        let next = &x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if is_blown(&next) {
            traj.blew_up = true;
            break;
        }
        traj.outputs.push(model.eval_h(&next, &ub, b)?);
        traj.times.push(b);
        traj.states.push(next);
        traj.inputs.push(ub);
    }
    Ok(traj)
}

pub fn simulate(model: &Model, x0: &RealVector, u: InputFn, t0: f64, t1: f64, step: f64) -> Result<Trajectory> {
    match model {
        Model::Lti(sys) => simulate_linear(sys, x0, u, t0, t1, step),
        Model::Ltv(ltv) => simulate_linear(ltv, x0, u, t0, t1, step),
        Model::Nonlinear(nl) => simulate_nonlinear(nl, x0, u, t0, t1, step),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LtvModel, StateSpace};
    use crate::numkit::{mat, vector};
    use std::sync::Arc;

    fn example_phi(t: f64) -> RealMatrix {
        let (e4, e2) = ((-4.0 * t).exp(), (2.0 * t).exp());
        mat(&[
            &[e4 / 3.0 + 2.0 * e2 / 3.0, -e4 / 6.0 + e2 / 6.0],
            &[-4.0 * e4 / 3.0 + 4.0 * e2 / 3.0, 2.0 * e4 / 3.0 + e2 / 3.0],
        ])
    }

    #[test]
    fn three_lti_methods_match_example() {
        let a = mat(&[&[0.0, 1.0], &[8.0, -2.0]]);
        let methods = [stm_series(&a).unwrap(), stm_cayley_hamilton(&a).unwrap(), stm_modal(&a).unwrap()];
        for t in [0.0, 0.1, 0.5, 1.0] {
            let want = example_phi(t);
            for m in &methods {
                assert!((m.at(t).unwrap() - &want).amax() < 1e-8, "{:?} at {t}", m.method());
            }
        }
    }

    #[test]
    fn cayley_hamilton_betas_example() {
        let a = mat(&[&[0.0, 1.0], &[-2.0, -3.0]]);
        let ch = stm_cayley_hamilton(&a).unwrap();
        for t in [0.25f64, 1.0] {
            let b = ch.cayley_hamilton_betas(t).unwrap();
            assert!((b[0] - (2.0 * (-t).exp() - (-2.0 * t).exp())).abs() < 1e-10);
            assert!((b[1] - ((-t).exp() - (-2.0 * t).exp())).abs() < 1e-10);
        }
        let li = RealMatrix::identity(2, 2) * 3.0;
        assert!(matches!(stm_cayley_hamilton(&li), Err(Error::RepeatedEigenvalues)));
    }

    #[test]
    fn modal_rejects_jordan_block() {
        let a = mat(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(stm_modal(&a), Err(Error::NotDiagonalizable)));
        let d = mat(&[&[-1.0, 0.0], &[0.0, 2.0]]);
        let phi = stm_modal(&d).unwrap().at(0.7).unwrap();
        assert!((phi - mat(&[&[(-0.7f64).exp(), 0.0], &[0.0, 1.4f64.exp()]])).amax() < 1e-13);
    }

    #[test]
    fn fundamental_matches_series_for_constant_a() {
        let a = mat(&[&[0.0, 1.0], &[-2.0, -0.5]]);
        let sys = StateSpace::ab(a.clone(), mat(&[&[0.0], &[1.0]])).unwrap();
        let ltv = LtvModel::from_lti(&sys);
        let f = fundamental_matrix_ltv(&ltv, 0.0, 2.0, 1e-3).unwrap();
        for (t, tau) in [(1.3, 0.2), (0.0, 2.0), (0.77, 0.77)] {
            let want = expm(&a, t - tau).unwrap();
            assert!((f.eval(t, tau).unwrap() - want).amax() < 1e-6);
        }
    }

    #[test]
    fn fundamental_conjugated_dynamics() {
        // A(t) = e^{-Ft} G e^{Ft}  ⇒  φ(t,s) = e^{-Ft} e^{(F+G)(t-s)} e^{Fs}
        let fm = mat(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        let gm = mat(&[&[-0.5, 0.2], &[0.0, -0.3]]);
        let (f2, g2) = (fm.clone(), gm.clone());
        let af: crate::model::MatrixFn = Arc::new(move |t| expm(&f2, -t).unwrap() * &g2 * expm(&f2, t).unwrap());
        let bf: crate::model::MatrixFn = Arc::new(|_| mat(&[&[0.0], &[1.0]]));
        let cf: crate::model::MatrixFn = Arc::new(|_| mat(&[&[1.0, 0.0]]));
        let df: crate::model::MatrixFn = Arc::new(|_| mat(&[&[0.0]]));
        let ltv = LtvModel::new(af, bf, cf, df, vec![], 0.0).unwrap();
        let phi = fundamental_matrix_ltv(&ltv, 0.0, 3.0, 1e-3).unwrap();
        let fg = &fm + &gm;
        for (t, s) in [(2.0, 0.5), (3.0, 0.0), (1.1, 2.9)] {
            let want = expm(&fm, -t).unwrap() * expm(&fg, t - s).unwrap() * expm(&fm, s).unwrap();
            assert!((phi.eval(t, s).unwrap() - want).amax() < 1e-5);
        }
    }

    #[test]
    fn peano_baker_error_halves_per_iteration() {
        let fm = mat(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        let gm = mat(&[&[-0.5, 0.2], &[0.0, -0.3]]);
        let f2 = fm.clone();
        let g2 = gm.clone();
        let af: crate::model::MatrixFn = Arc::new(move |t| expm(&f2, -t).unwrap() * &g2 * expm(&f2, t).unwrap());
        let bf: crate::model::MatrixFn = Arc::new(|_| mat(&[&[0.0], &[1.0]]));
        let cf: crate::model::MatrixFn = Arc::new(|_| mat(&[&[1.0, 0.0]]));
        let df: crate::model::MatrixFn = Arc::new(|_| mat(&[&[0.0]]));
        let ltv = LtvModel::new(af, bf, cf, df, vec![], 0.0).unwrap();
        let t = 1.5;
        let want = expm(&fm, -t).unwrap() * expm(&(&fm + &gm), t).unwrap();
        let errs: Vec<f64> =
            (1..=8).map(|k| (peano_baker(&ltv, 0.0, t, k, 1e-3).unwrap() - &want).norm()).collect();
        for w in errs.windows(2) {
            // below 1e-6 the quadrature error dominates
            if w[0] > 1e-6 {
                assert!(w[1] <= 0.5 * w[0], "{errs:?}");
            }
        }
        assert!(errs[7] < 1e-5);
    }

    #[test]
    fn peano_baker_two_iterations() {
        let a = mat(&[&[0.0, 1.0], &[-2.0, -3.0]]);
        let sys = StateSpace::ab(a.clone(), mat(&[&[0.0], &[1.0]])).unwrap();
        let t = 0.8;
        let got = peano_baker(&sys, 0.0, t, 2, 1e-3).unwrap();
        let want = RealMatrix::identity(2, 2) + &a * t + &a * &a * (t * t / 2.0);
        assert!((got - want).amax() < 1e-12);
        assert_eq!(peano_baker(&sys, 0.3, 0.3, 5, 1e-3).unwrap(), RealMatrix::identity(2, 2));
    }

    #[test]
    fn simulate_examples() {
        let sys = StateSpace::ab(mat(&[&[0.0, 1.0], &[8.0, -2.0]]), mat(&[&[0.0], &[1.0]])).unwrap();
        let zero = |_t: f64| vector(&[0.0]);
        let tr = simulate_linear(&sys, &vector(&[1.0, 0.0]), &zero, 0.0, 0.5, 0.01).unwrap();
        for &t in &[0.1, 0.5] {
            let k = tr.times.iter().position(|&s| (s - t).abs() < 1e-12).unwrap();
            let want = example_phi(t).column(0).into_owned();
            assert!((&tr.states[k] - want).amax() < 1e-6);
        }
        let tr = simulate_linear(&sys, &vector(&[0.0, 0.0]), &zero, 0.0, 1.0, 0.1).unwrap();
        assert!(tr.states.iter().all(|x| x.amax() == 0.0));

        let (a, b, ubar, x0) = (-0.7, 2.0, 1.5, 0.4);
        let s1 = StateSpace::abc(mat(&[&[a]]), mat(&[&[b]]), mat(&[&[1.0]])).unwrap();
        let step_in = move |_t: f64| vector(&[ubar]);
        let tr = simulate_linear(&s1, &vector(&[x0]), &step_in, 0.0, 2.0, 0.05).unwrap();
        let t: f64 = 2.0;
        let want = (a * t).exp() * x0 + b * ubar / a * ((a * t).exp() - 1.0);
        assert!((tr.final_state()[0] - want).abs() < 1e-7);
    }

    #[test]
    fn blow_up_is_flagged() {
        let sys = StateSpace::ab(mat(&[&[400.0]]), mat(&[&[0.0]])).unwrap();
        let zero = |_t: f64| vector(&[0.0]);
        let tr = simulate_linear(&sys, &vector(&[1.0]), &zero, 0.0, 10.0, 0.1).unwrap();
        assert!(tr.blew_up);
        assert!(tr.times.last().copied().unwrap() < 10.0);
    }

    #[test]
    fn csv_layout() {
        let tr = Trajectory {
            times: vec![0.0],
            states: vec![vector(&[1.0, 2.0])],
            inputs: vec![vector(&[0.5])],
            outputs: vec![vector(&[1.0])],
            blew_up: false,
        };
        let csv = tr.to_csv();
        assert!(csv.starts_with("t,x1,x2,u1,y1\n"));
        assert!(csv.contains("5.0000000000000000e-1"));
    }
}
