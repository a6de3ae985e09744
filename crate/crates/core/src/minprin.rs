//! Minimum-Principle solvers: the linear-quadratic two-point boundary-value
//! problem and two analytic bang-bang examples.
//!
//! The LQ solver works with the pencil `[[A, -B R⁻¹ Bᵀ], [-Q, -Aᵀ]]` on the
//! state `(x, λ)`, where `λ = ½ p` for the cost `∫ xᵀQx + uᵀRu`. Then
//! `u = -R⁻¹ Bᵀ λ` and a free coordinate with terminal weight `xᵀMx` obeys
//! `λ(t1) = M x(t1)`, the same convention the Riccati solvers use.

use crate::error::{Error, Result};
use crate::lqr::{hamiltonian, Weights};
use crate::model::StateSpace;
use crate::numkit::{expm, rcond, solve, vector, RealMatrix, RealVector};
use crate::response::Trajectory;
use rayon::prelude::*;

/// Reciprocal condition below which the endpoint map is treated as singular.
pub const PSI12_RCOND_MIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TpbvpProblem {
    pub sys: StateSpace,
    pub weights: Weights,
    pub x0: RealVector,
    /// Target values; entries at free coordinates are ignored.
    pub x1: RealVector,
    pub t0: f64,
    pub t1: f64,
    /// `true` where `x_j(t1)` is fixed, `false` where it is free and
    /// penalized through `M`.
    pub fixed: Vec<bool>,
}

impl TpbvpProblem {
    pub fn fixed_endpoints(sys: StateSpace, weights: Weights, x0: RealVector, x1: RealVector, t0: f64, t1: f64) -> Self {
        let n = sys.n();
        Self { sys, weights, x0, x1, t0, t1, fixed: vec![true; n] }
    }

    pub fn free_endpoint(sys: StateSpace, weights: Weights, x0: RealVector, t0: f64, t1: f64) -> Self {
        let n = sys.n();
        Self { sys, weights, x0, x1: RealVector::zeros(n), t0, t1, fixed: vec![false; n] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TpbvpSolution {
    pub trajectory: Trajectory,
    /// `λ(t)` on the trajectory grid.
    pub costate: Vec<RealVector>,
    pub lambda0: RealVector,
    /// `‖x(t1) - x1‖` over the fixed coordinates plus the transversality
    /// residual `‖λ_j(t1) - (M x(t1))_j‖` over the free ones.
    pub endpoint_residual: f64,
}

impl TpbvpSolution {
    pub fn controls(&self) -> &[RealVector] {
        &self.trajectory.inputs
    }
}

/// Solve the LQ two-point boundary-value problem through the transition
/// matrix `ψ(t1, t0)` of the Hamiltonian system. Samples are exact
/// (`z(t) = e^{H(t - t0)} z0`) on a grid with `steps` intervals.
pub fn solve_lq_tpbvp(prob: &TpbvpProblem, steps: usize) -> Result<TpbvpSolution> {
    let sys = &prob.sys;
    let (n, m) = (sys.n(), sys.m());
    prob.weights.validate(n, m)?;
    if prob.x0.len() != n || prob.x1.len() != n || prob.fixed.len() != n {
        return Err(Error::DimensionMismatch(format!("endpoints and mask must have length {n}")));
    }
    if !(prob.t0.is_finite() && prob.t1.is_finite() && prob.t1 > prob.t0) {
        return Err(Error::InvalidHorizon(format!("need finite t0 < t1, got [{}, {}]", prob.t0, prob.t1)));
    }
    let steps = steps.max(1);
    let h = hamiltonian(&sys.a, &sys.b, &prob.weights.q, &prob.weights.r)?;
    let psi = expm(&h, prob.t1 - prob.t0)?;
    let psi11 = psi.view((0, 0), (n, n)).into_owned();
    let psi12 = psi.view((0, n), (n, n)).into_owned();
    let psi21 = psi.view((n, 0), (n, n)).into_owned();
    let psi22 = psi.view((n, n), (n, n)).into_owned();
    let mw = &prob.weights.m;
    // Row j of the boundary system: fixed → x_j(t1) = x1_j,
    // free → λ_j(t1) - (M x(t1))_j = 0.
    let free_lam = &psi22 - mw * &psi12;
    let free_x = &psi21 - mw * &psi11;
    let mut lhs = RealMatrix::zeros(n, n);
    let mut rhs = RealVector::zeros(n);
    for j in 0..n {
        if prob.fixed[j] {
            lhs.row_mut(j).copy_from(&psi12.row(j));
            rhs[j] = prob.x1[j] - (psi11.row(j) * &prob.x0)[(0, 0)];
        } else {
            lhs.row_mut(j).copy_from(&free_lam.row(j));
            rhs[j] = -(free_x.row(j) * &prob.x0)[(0, 0)];
        }
    }
    if rcond(&lhs) < PSI12_RCOND_MIN {
        return Err(Error::SingularPsi12);
    }
    let lambda0 = solve(&lhs, &RealMatrix::from_column_slice(n, 1, rhs.as_slice()))?.column(0).into_owned();
    let mut z0 = RealVector::zeros(2 * n);
    z0.rows_mut(0, n).copy_from(&prob.x0);
    z0.rows_mut(n, n).copy_from(&lambda0);

    let dt = (prob.t1 - prob.t0) / steps as f64;
    let times: Vec<f64> = (0..=steps)
        .map(|k| if k == steps { prob.t1 } else { prob.t0 + dt * k as f64 })
        .collect();
    let samples: Vec<Result<RealVector>> = times.par_iter().map(|&t| Ok(expm(&h, t - prob.t0)? * &z0)).collect();
    let rb = solve(&prob.weights.r, &sys.b.transpose())?;
    let mut traj = Trajectory { times: times.clone(), states: vec![], inputs: vec![], outputs: vec![], blew_up: false };
    let mut costate = Vec::with_capacity(times.len());
    for z in samples {
        let z = z?;
        let x = z.rows(0, n).into_owned();
        let lam = z.rows(n, n).into_owned();
        let u = -(&rb * &lam);
        traj.outputs.push(&sys.c * &x + &sys.d * &u);
        traj.states.push(x);
        traj.inputs.push(u);
        costate.push(lam);
    }
    let x_end = traj.final_state();
    let lam_end = costate.last().expect("grid is nonempty");
    let trans = lam_end - mw * x_end;
    let endpoint_residual = (0..n)
        .map(|j| if prob.fixed[j] { (x_end[j] - prob.x1[j]).powi(2) } else { trans[j].powi(2) })
        .sum::<f64>()
        .sqrt();
    let fixed_norm = (0..n).filter(|&j| prob.fixed[j]).map(|j| prob.x1[j].powi(2)).sum::<f64>().sqrt();
    if endpoint_residual > 1e-6 * (1.0 + fixed_norm + x_end.norm()) {
        return Err(Error::InternalInconsistency(format!("TPBVP endpoint residual {endpoint_residual:e}")));
    }
    Ok(TpbvpSolution { trajectory: traj, costate, lambda0, endpoint_residual })
}

/// Largest `‖λ(t) - P(t) x(t)‖ / (1 + ‖x(t)‖)` over the grid, with `P`
/// supplied by the caller (normally a Riccati solution).
pub fn sweep_deviation(sol: &TpbvpSolution, p_at: impl Fn(f64) -> RealMatrix) -> f64 {
    let tr = &sol.trajectory;
    (0..tr.len())
        .map(|k| (&sol.costate[k] - p_at(tr.times[k]) * &tr.states[k]).norm() / (1.0 + tr.states[k].norm()))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianResiduals {
    /// `max ‖Δx/Δt - (A x + B u)‖` at interval midpoints.
    pub state: f64,
    /// `max ‖Δλ/Δt - (-Q x - Aᵀ λ)‖` at interval midpoints.
    pub costate: f64,
    /// `max ‖R u + Bᵀ λ‖`, i.e. `∇ᵤH = 0` up to the factor 2.
    pub stationarity: f64,
}

/// Finite-difference check of both canonical equations and of `∇ᵤH = 0`.
pub fn hamiltonian_residual(sol: &TpbvpSolution, prob: &TpbvpProblem) -> HamiltonianResiduals {
    let (a, b) = (&prob.sys.a, &prob.sys.b);
    let (q, r) = (&prob.weights.q, &prob.weights.r);
    let tr = &sol.trajectory;
    let mut res = HamiltonianResiduals { state: 0.0, costate: 0.0, stationarity: 0.0 };
    for k in 0..tr.len() {
        res.stationarity = res.stationarity.max((r * &tr.inputs[k] + b.transpose() * &sol.costate[k]).norm());
        if k + 1 == tr.len() {
            break;
        }
        let dt = tr.times[k + 1] - tr.times[k];
        let xm = (&tr.states[k] + &tr.states[k + 1]) * 0.5;
        let um = (&tr.inputs[k] + &tr.inputs[k + 1]) * 0.5;
        let lm = (&sol.costate[k] + &sol.costate[k + 1]) * 0.5;
        let dx = (&tr.states[k + 1] - &tr.states[k]) / dt;
        let dl = (&sol.costate[k + 1] - &sol.costate[k]) / dt;
        res.state = res.state.max((dx - (a * &xm + b * &um)).norm());
        res.costate = res.costate.max((dl + q * &xm + a.transpose() * &lm).norm());
    }
    res
}

/// One constant-control arc of a bang-bang solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Arc {
    pub start: f64,
    pub end: f64,
    pub u: f64,
    /// State at `start`.
    pub x_start: RealVector,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BangBangKind {
    /// `ẋ = u x`, `V = ∫ (u - 1) x dτ`, `0 ≤ u ≤ 1`.
    Bilinear,
    /// `ẍ = u`, `|u| ≤ 1`, minimum time to the origin.
    DoubleIntegratorMinTime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BangBangSolution {
    pub kind: BangBangKind,
    pub switching_times: Vec<f64>,
    pub arcs: Vec<Arc>,
    pub terminal_time: f64,
    pub cost: f64,
    /// Costate parameters: bilinear `[t1]`; double integrator `[p1, p2(0)]`.
    pub costate_params: Vec<f64>,
}

impl BangBangSolution {
    fn arc_at(&self, t: f64) -> Option<&Arc> {
        self.arcs.iter().find(|a| t < a.end).or(self.arcs.last())
    }

    /// Control at `t`; at a switching instant the later arc's value.
    pub fn control_at(&self, t: f64) -> f64 {
        self.arc_at(t).map_or(0.0, |a| a.u)
    }

    pub fn state_at(&self, t: f64) -> RealVector {
        let Some(arc) = self.arc_at(t) else {
            return self.final_state();
        };
        let tau = t.clamp(arc.start, arc.end) - arc.start;
        propagate_arc(self.kind, &arc.x_start, arc.u, tau)
    }

    pub fn final_state(&self) -> RealVector {
        match self.arcs.last() {
            Some(a) => propagate_arc(self.kind, &a.x_start, a.u, a.end - a.start),
            None => RealVector::zeros(2),
        }
    }

    pub fn costate_at(&self, t: f64) -> RealVector {
        match self.kind {
            BangBangKind::Bilinear => {
                let t1 = self.costate_params[0];
                let p = if t >= t1 - 1.0 { t - t1 } else { -(-t + t1 - 1.0).exp() };
                vector(&[p])
            }
            BangBangKind::DoubleIntegratorMinTime => {
                let (p1, p20) = (self.costate_params[0], self.costate_params[1]);
                vector(&[p1, p20 - p1 * t])
            }
        }
    }

    /// Sample on a uniform grid as a trajectory (output = state).
    pub fn sample(&self, steps: usize) -> Trajectory {
        let steps = steps.max(1);
        let t1 = self.terminal_time;
        let times: Vec<f64> = (0..=steps).map(|k| if k == steps { t1 } else { t1 * k as f64 / steps as f64 }).collect();
        let states: Vec<RealVector> = times.iter().map(|&t| self.state_at(t)).collect();
        Trajectory {
            inputs: times.iter().map(|&t| vector(&[self.control_at(t)])).collect(),
            outputs: states.clone(),
            states,
            times,
            blew_up: false,
        }
    }
}

fn propagate_arc(kind: BangBangKind, x: &RealVector, u: f64, tau: f64) -> RealVector {
    match kind {
        BangBangKind::Bilinear => vector(&[x[0] * (u * tau).exp()]),
        BangBangKind::DoubleIntegratorMinTime => {
            vector(&[x[0] + x[1] * tau + 0.5 * u * tau * tau, x[1] + u * tau])
        }
    }
}

/// Exact cost `∫ (u - 1) x dτ` of a piecewise-constant control on the
/// uniform grid of `[0, t1]`, together with the final state.
pub fn bilinear_cost(x0: f64, t1: f64, controls: &[f64]) -> (f64, f64) {
    let h = t1 / controls.len() as f64;
    let (mut x, mut cost) = (x0, 0.0);
    for &u in controls {
        let growth = (u * h).exp();
        cost += if u.abs() < 1e-300 { -x * h } else { (u - 1.0) * x * (growth - 1.0) / u };
        x *= growth;
    }
    (cost, x)
}

/// Analytic optimum of the bilinear example: `u = 1` until `t1 - 1`, then
/// `u = 0`. Horizons shorter than one time unit never reach the switching
/// condition `p + 1 = 0`, so `u ≡ 0` throughout.
pub fn solve_bilinear_bang_bang(x0: f64, t1: f64) -> Result<BangBangSolution> {
    if !(x0 > 0.0 && x0.is_finite()) {
        return Err(Error::InvalidArgument(format!("bilinear example needs x0 > 0, got {x0}")));
    }
    if !(t1 >= 0.0 && t1.is_finite()) {
        return Err(Error::InvalidHorizon(format!("need finite t1 ≥ 0, got {t1}")));
    }
    let ts = t1 - 1.0;
    let (arcs, switching_times, cost) = if ts > 0.0 {
        let plateau = x0 * ts.exp();
        (
            vec![
                Arc { start: 0.0, end: ts, u: 1.0, x_start: vector(&[x0]) },
                Arc { start: ts, end: t1, u: 0.0, x_start: vector(&[plateau]) },
            ],
            vec![ts],
            -plateau,
        )
    } else {
        (vec![Arc { start: 0.0, end: t1, u: 0.0, x_start: vector(&[x0]) }], vec![], -x0 * t1)
    };
    Ok(BangBangSolution {
        kind: BangBangKind::Bilinear,
        switching_times,
        arcs,
        terminal_time: t1,
        cost,
        costate_params: vec![t1],
    })
}

/// Locate the bilinear switch numerically: integrate `ṗ = 1 - u(p)(1 + p)`
/// backward from `p(t1) = 0` with RK4, choosing `u` by the sign of `1 + p`,
/// and bisect the first sign change of `1 + p` to `1e-10` in time.
pub fn bilinear_switch_numeric(t1: f64, steps: usize) -> Option<f64> {
    let rhs = |p: f64| if 1.0 + p < 0.0 { -p } else { 1.0 };
    // one RK4 step of length h backward in time, i.e. forward in s = t1 - t
    let step = |p: f64, h: f64| {
        let f = |p: f64| -rhs(p);
        let k1 = f(p);
        let k2 = f(p + 0.5 * h * k1);
        let k3 = f(p + 0.5 * h * k2);
        let k4 = f(p + h * k3);
        p + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    };
    let h = t1 / steps.max(1) as f64;
    let mut p = 0.0;
    for k in 0..steps.max(1) {
        let next = step(p, h);
        if 1.0 + next <= 0.0 {
            let (mut lo, mut hi) = (0.0, h);
            while hi - lo > 1e-10 {
                let mid = 0.5 * (lo + hi);
                if 1.0 + step(p, mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(t1 - (k as f64 * h + 0.5 * (lo + hi)));
        }
        p = next;
    }
    None
}

/// Minimum time from `x` to the origin for `ẍ = u`, `|u| ≤ 1`.
pub fn double_integrator_min_time(x: &RealVector) -> f64 {
    let (x1, x2) = (x[0], x[1]);
    let sigma = if x1 > -0.5 * x2 * x2.abs() { -1.0 } else { 1.0 };
    let ts = -sigma * x2 + (0.5 * x2 * x2 - sigma * x1).max(0.0).sqrt();
    ts + (x2 + sigma * ts).abs()
}

/// Closed-form two-arc minimum-time solution for the double integrator.
pub fn solve_double_integrator_min_time(x0: &RealVector) -> Result<BangBangSolution> {
    if x0.len() != 2 || !x0.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidArgument("double integrator state must be 2 finite values".into()));
    }
    let (x1, x2) = (x0[0], x0[1]);
    let scale = 1.0 + x1.abs() + x2 * x2;
    let mut sol = BangBangSolution {
        kind: BangBangKind::DoubleIntegratorMinTime,
        switching_times: vec![],
        arcs: vec![],
        terminal_time: 0.0,
        cost: 0.0,
        costate_params: vec![0.0, 0.0],
    };
    if x1 == 0.0 && x2 == 0.0 {
        return Ok(sol);
    }
    let curve_gap = x1 + 0.5 * x2 * x2.abs();
    if curve_gap.abs() <= 1e-12 * scale {
        // on the switching curve: one arc straight into the origin
        let u = -x2.signum();
        let t1 = x2.abs();
        sol.arcs.push(Arc { start: 0.0, end: t1, u, x_start: x0.clone() });
        sol.terminal_time = t1;
        sol.cost = t1;
        sol.costate_params = vec![0.0, -u];
        return Ok(sol);
    }
    let sigma = if curve_gap > 0.0 { -1.0 } else { 1.0 };
    let ts = -sigma * x2 + (0.5 * x2 * x2 - sigma * x1).sqrt();
    let xs = propagate_arc(sol.kind, x0, sigma, ts);
    let t1 = ts + xs[1].abs();
    sol.arcs.push(Arc { start: 0.0, end: ts, u: sigma, x_start: x0.clone() });
    sol.arcs.push(Arc { start: ts, end: t1, u: -sigma, x_start: xs });
    sol.switching_times.push(ts);
    sol.terminal_time = t1;
    sol.cost = t1;
    // p2(t) = -p1 (t - ts), sign(p1) = -σ so that u = -sign(p2); |p2(t1)| = 1
    let p1 = -sigma / (t1 - ts);
    sol.costate_params = vec![p1, p1 * ts];
    Ok(sol)
}

/// `|1 + p(t1)ᵀ A x(t1) + p(t1)ᵀ b u(t1)|`, the free-terminal-time condition
/// `H = 0` for the minimum-time double integrator.
pub fn min_time_terminal_residual(sol: &BangBangSolution) -> f64 {
    let t1 = sol.terminal_time;
    let x = sol.final_state();
    if sol.arcs.is_empty() {
        return 0.0;
    }
    let p = sol.costate_at(t1);
    let u = sol.arcs.last().map_or(0.0, |a| a.u);
    (1.0 + p[0] * x[1] + p[1] * u).abs()
}

/// Number of sign changes of `bᵀ e^{-Aᵀ t} p0` on `samples` uniform points of
/// `[0, horizon]`; for real distinct spectra this is at most `n - 1`.
pub fn switching_function_sign_changes(a: &RealMatrix, b: &RealVector, p0: &RealVector, horizon: f64, samples: usize) -> Result<usize> {
    let at = -a.transpose();
    let values: Vec<f64> = (0..=samples)
        .into_par_iter()
        .map(|k| Ok(b.dot(&(expm(&at, horizon * k as f64 / samples as f64)? * p0))))
        .collect::<Result<_>>()?;
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut last = 0.0f64;
    let mut changes = 0;
    for v in values {
        if v.abs() <= 1e-12 * scale {
            continue;
        }
        if last != 0.0 && v.signum() != last.signum() {
            changes += 1;
        }
        last = v;
    }
    Ok(changes)
}

/// Samples at which the bilinear control fails `u = argmin_{u ∈ grid} H`;
/// `H = x (u (1 + p) - 1)` is linear in `u`, so the grid minimizer is an
/// endpoint unless `1 + p = 0`.
pub fn bilinear_argmin_violations(sol: &BangBangSolution, samples: usize, u_grid: usize) -> Vec<f64> {
    let t1 = sol.terminal_time;
    (0..=samples)
        .map(|k| t1 * k as f64 / samples as f64)
        .filter(|&t| {
            let x = sol.state_at(t)[0];
            let p = sol.costate_at(t)[0];
            let u = sol.control_at(t);
            let ham = |v: f64| x * (v * (1.0 + p) - 1.0);
            let best = (0..=u_grid).map(|i| ham(i as f64 / u_grid as f64)).fold(f64::INFINITY, f64::min);
            ham(u) > best + 1e-12 * (1.0 + x.abs())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lqr::solve_rde;
    use crate::numkit::{col, mat};
    use crate::structural::minimum_energy_steer;

    fn double_integrator() -> StateSpace {
        StateSpace::ab(mat(&[&[0.0, 1.0], &[0.0, 0.0]]), col(&[0.0, 1.0])).unwrap()
    }

    #[test]
    fn minimum_energy_transfer() {
        let sys = double_integrator();
        let w = Weights::running(RealMatrix::zeros(2, 2), mat(&[&[1.0]]));
        let prob = TpbvpProblem::fixed_endpoints(sys.clone(), w, vector(&[0.0, 0.0]), vector(&[1.0, 0.0]), 0.0, 1.0);
        let sol = solve_lq_tpbvp(&prob, 200).unwrap();
        assert!((sol.trajectory.final_state() - vector(&[1.0, 0.0])).norm() < 1e-6);
        let steer = minimum_energy_steer(&sys, &prob.x0, &prob.x1, 0.0, 1.0, 1e-3).unwrap();
        for (t, u) in sol.trajectory.times.iter().zip(sol.controls()) {
            assert!((u[0] - (6.0 - 12.0 * t)).abs() < 1e-8, "t = {t}");
            assert!((u - steer.control.at(&sys, *t).unwrap()).norm() < 1e-5);
        }
        let res = hamiltonian_residual(&sol, &prob);
        assert!(res.state < 1e-4 && res.costate < 1e-4 && res.stationarity < 1e-12, "{res:?}");
    }

    #[test]
    fn natural_motion_needs_no_control() {
        let sys = StateSpace::ab(mat(&[&[0.0, 1.0], &[-2.0, -1.0]]), col(&[0.0, 1.0])).unwrap();
        let x0 = vector(&[1.0, -0.5]);
        let x1 = expm(&sys.a, 1.5).unwrap() * &x0;
        let w = Weights::running(RealMatrix::zeros(2, 2), mat(&[&[1.0]]));
        let sol = solve_lq_tpbvp(&TpbvpProblem::fixed_endpoints(sys, w, x0, x1, 0.0, 1.5), 50).unwrap();
        assert!(sol.lambda0.norm() < 1e-9);
        assert!(sol.controls().iter().all(|u| u.norm() < 1e-9));
    }

    #[test]
    fn sweep_matches_riccati() {
        let sys = StateSpace::ab(mat(&[&[0.0, 1.0], &[0.0, -1.0]]), col(&[0.0, 1.0])).unwrap();
        let w = Weights::new(mat(&[&[1.0, 0.0], &[0.0, 0.5]]), mat(&[&[2.0]]), mat(&[&[1.0, 0.2], &[0.2, 3.0]]));
        let prob = TpbvpProblem::free_endpoint(sys.clone(), w.clone(), vector(&[1.0, -1.0]), 0.0, 2.0);
        let sol = solve_lq_tpbvp(&prob, 100).unwrap();
        let rde = solve_rde(&sys, &w, 0.0, 2.0, Some(20_000)).unwrap();
        assert!(sweep_deviation(&sol, |t| rde.p_at(t)) < 1e-5);
    }

    #[test]
    fn unreachable_target_is_singular() {
        let sys = StateSpace::ab(mat(&[&[-1.0, 0.0], &[0.0, -2.0]]), col(&[1.0, 0.0])).unwrap();
        let w = Weights::running(RealMatrix::zeros(2, 2), mat(&[&[1.0]]));
        let prob = TpbvpProblem::fixed_endpoints(sys, w, vector(&[0.0, 0.0]), vector(&[0.0, 1.0]), 0.0, 1.0);
        assert_eq!(solve_lq_tpbvp(&prob, 10).unwrap_err(), Error::SingularPsi12);
    }

    #[test]
    fn perturbed_control_breaks_stationarity() {
        let sys = double_integrator();
        let w = Weights::running(RealMatrix::identity(2, 2), mat(&[&[1.0]]));
        let prob = TpbvpProblem::fixed_endpoints(sys, w, vector(&[1.0, 0.0]), vector(&[0.0, 0.0]), 0.0, 2.0);
        let mut sol = solve_lq_tpbvp(&prob, 100).unwrap();
        let base = hamiltonian_residual(&sol, &prob);
        sol.trajectory.inputs[40][0] += 0.1;
        assert!(hamiltonian_residual(&sol, &prob).stationarity > base.stationarity + 0.09);
    }

    #[test]
    fn bilinear_examples() {
        let sol = solve_bilinear_bang_bang(0.5, 2.0).unwrap();
        assert_eq!(sol.switching_times, vec![1.0]);
        assert!((sol.final_state()[0] - 0.5 * std::f64::consts::E).abs() < 1e-12);
        assert!((bilinear_switch_numeric(2.0, 2000).unwrap() - 1.0).abs() < 1e-8);
        let edge = solve_bilinear_bang_bang(0.5, 1.0).unwrap();
        assert!(edge.switching_times.is_empty() && edge.arcs.iter().all(|a| a.u == 0.0));
        assert_eq!(edge.final_state()[0], 0.5);
        let short = solve_bilinear_bang_bang(0.5, 0.4).unwrap();
        assert!((short.cost + 0.2).abs() < 1e-15);
        let bad = bilinear_argmin_violations(&sol, 1000, 50);
        assert!(bad.iter().all(|t| (t - 1.0).abs() <= 2e-3), "{bad:?}");
        let grid = vec![1.0; 10].into_iter().chain(vec![0.0; 10]).collect::<Vec<_>>();
        assert!((bilinear_cost(0.5, 2.0, &grid).0 - sol.cost).abs() < 1e-12);
    }

    #[test]
    fn double_integrator_examples() {
        let sol = solve_double_integrator_min_time(&vector(&[1.0, 0.0])).unwrap();
        assert_eq!(sol.switching_times.len(), 1);
        assert!((sol.switching_times[0] - 1.0).abs() < 1e-12 && (sol.terminal_time - 2.0).abs() < 1e-12);
        assert_eq!((sol.arcs[0].u, sol.arcs[1].u), (-1.0, 1.0));
        assert!(sol.final_state().norm() < 1e-12);
        assert!(min_time_terminal_residual(&sol) < 1e-12);
        let origin = solve_double_integrator_min_time(&vector(&[0.0, 0.0])).unwrap();
        assert_eq!(origin.terminal_time, 0.0);
        let curve = solve_double_integrator_min_time(&vector(&[0.5, -1.0])).unwrap();
        assert!(curve.switching_times.is_empty() && (curve.terminal_time - 1.0).abs() < 1e-12);
        assert!(min_time_terminal_residual(&curve) < 1e-12);
        assert!((double_integrator_min_time(&vector(&[1.0, 0.0])) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn switching_bound_for_real_spectra() {
        let a = mat(&[&[-1.0, 0.0, 0.0], &[0.0, -2.0, 0.0], &[0.0, 0.0, -3.0]]);
        let b = vector(&[1.0, 1.0, 1.0]);
        // y (y - 1.5)(y - 3) with y = e^t: two sign changes on [0, 2], the n - 1 bound
        let n = switching_function_sign_changes(&a, &b, &vector(&[4.5, -4.5, 1.0]), 2.0, 4000).unwrap();
        assert_eq!(n, 2);
    }
}
