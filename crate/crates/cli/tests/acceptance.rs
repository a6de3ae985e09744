//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs as a plain binary (`harness = false`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statespace_kit::lqr::{
    log_grid, lqr_fixtures, return_difference_report, solve_are, solve_rde, solve_rde_hamiltonian,
    symmetric_root_locus, Weights,
};
use statespace_kit::minprin::{
    bilinear_cost, double_integrator_min_time, min_time_terminal_residual, solve_bilinear_bang_bang,
    solve_double_integrator_min_time, solve_lq_tpbvp, sweep_deviation, TpbvpProblem,
};
use statespace_kit::model::{builtin, Model, StateSpace};
use statespace_kit::numkit::{col, eigen, mat, rank, vector, Complex64, Polynomial, RealMatrix, RealVector};
use statespace_kit::realization::{ccf, leverrier_faddeev, ss_to_tf, RationalFunction};
use statespace_kit::response::{simulate_linear, stm_cayley_hamilton, stm_modal, stm_series};
use statespace_kit::stability::{solve_lyapunov, stability_subspaces};
use statespace_kit::structural::{
    controllability_grammian, controllability_matrix, dual_system, kalman_decompose, observability_grammian,
    structural_analysis, transmission_zeros, KalmanKind, STRUCTURAL_RANK_TOL,
};
use statespace_kit::synthesis::{
    assemble_observer_feedback, diophantine_design, integral_control, observer_gain, place_poles, spectrum_deviation,
};
use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: statespace_kit::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn max_abs(m: &RealMatrix) -> f64 {
    m.amax()
}

/// Largest principal angle between the column spans of `a` and `b`.
fn subspace_angle(a: &RealMatrix, b: &RealMatrix) -> f64 {
    let qa = a.clone().qr().q();
    let qb = b.clone().qr().q();
    let sv = (qa.transpose() * qb).svd(false, false).singular_values;
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    smin.clamp(-1.0, 1.0).acos()
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> RealMatrix {
    RealMatrix::from_fn(rows, cols, |_, _| rng.random_range(lo..hi))
}

fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> RealMatrix {
    random_matrix(rng, n, n, -1.0, 1.0).qr().q()
}

fn min_gap(values: &[Complex64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            gap = gap.min((values[i] - values[j]).norm());
        }
    }
    gap
}

fn stable_poles(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    let mut poles = Vec::with_capacity(n);
    while poles.len() < n {
        let re = -rng.random_range(0.5..4.0) - 0.7 * poles.len() as f64;
        if n - poles.len() >= 2 && rng.random_bool(0.4) {
            let im = rng.random_range(0.5..2.0);
            poles.push(c(re, im));
            poles.push(c(re, -im));
        } else {
            poles.push(c(re, 0.0));
        }
    }
    poles
}

fn well_controllable(a: &RealMatrix, b: &RealMatrix) -> bool {
    let sv = controllability_matrix(&StateSpace::ab(a.clone(), b.clone()).unwrap()).svd(false, false).singular_values;
    let hi = sv.iter().copied().fold(0.0, f64::max);
    let lo = sv.iter().copied().fold(f64::INFINITY, f64::min);
    lo > 1e-3 * hi
}

fn criterion_1() -> Check {
    let a = mat(&[&[0.0, 1.0], &[8.0, -2.0]]);
    let exact = |t: f64| {
        let (p, q) = ((2.0 * t).exp(), (-4.0 * t).exp());
        mat(&[&[2.0 * p / 3.0 + q / 3.0, p / 6.0 - q / 6.0], &[4.0 * p / 3.0 - 4.0 * q / 3.0, p / 3.0 + 2.0 * q / 3.0]])
    };
    let methods = [lib(stm_series(&a))?, lib(stm_cayley_hamilton(&a))?, lib(stm_modal(&a))?];
    for t in [0.0, 0.1, 0.5, 1.0] {
        for m in &methods {
            let err = max_abs(&(lib(m.at(t))? - exact(t)));
            ensure(err <= 1e-8, || format!("{:?} at t = {t}: error {err:e}", m.method()))?;
        }
    }
    Ok(())
}

fn criterion_2() -> Check {
    let a = mat(&[&[0.0, 1.0], &[-2.0, -3.0]]);
    let ch = lib(stm_cayley_hamilton(&a))?;
    for t in [0.25, 1.0] {
        let b = lib(ch.cayley_hamilton_betas(t))?;
        let (e1, e2) = ((-t).exp(), (-2.0 * t).exp());
        let err = (b[0] - (2.0 * e1 - e2)).abs().max((b[1] - (e1 - e2)).abs());
        ensure(err <= 1e-10, || format!("t = {t}: beta error {err:e}"))?;
    }
    Ok(())
}

fn criterion_3() -> Check {
    let cert = lib(solve_lyapunov(&mat(&[&[0.0, 1.0], &[-2.0, -2.0]]), &RealMatrix::identity(2, 2)))?;
    let err = max_abs(&(&cert.p - mat(&[&[1.25, 0.25], &[0.25, 0.375]])));
    ensure(err <= 1e-10, || format!("P error {err:e}"))?;
    ensure(cert.definiteness.minors.iter().all(|&m| m > 0.0), || format!("minors {:?}", cert.definiteness.minors))
}

fn criterion_4() -> Check {
    let sys = lib(StateSpace::ab(mat(&[&[-2.0, 0.0], &[-1.0, -1.0]]), col(&[1.0, 1.0])))?;
    let st = lib(structural_analysis(&sys))?;
    ensure(st.ctrb_rank == 1, || format!("ctrb rank {}", st.ctrb_rank))?;
    ensure(
        st.uncontrollable_modes.len() == 1 && (st.uncontrollable_modes[0] - c(-1.0, 0.0)).norm() <= 1e-9,
        || format!("uncontrollable modes {:?}", st.uncontrollable_modes),
    )?;
    let k = lib(kalman_decompose(&sys, KalmanKind::Kccf))?;
    let ea = max_abs(&(&k.a_bar - mat(&[&[-2.0, -1.0], &[0.0, -1.0]])));
    let eb = max_abs(&(&k.b_bar - col(&[1.0, 0.0])));
    ensure(ea <= 1e-9 && eb <= 1e-9, || format!("KCCF errors A {ea:e}, B {eb:e}"))
}

fn criterion_5() -> Check {
    let a = mat(&[&[-2.0, 1.0, -1.0], &[-2.0, -5.0, 6.0], &[-1.0, -3.0, 4.0]]);
    let s = lib(stability_subspaces(&a))?;
    ensure(s.unstable_basis.ncols() == 1 && s.stable_basis.ncols() == 2, || "subspace dimensions".into())?;
    let au = subspace_angle(&s.unstable_basis, &col(&[0.0, 1.0, 1.0]));
    let as_ = subspace_angle(&s.stable_basis, &mat(&[&[1.0, 0.0], &[0.0, 2.0], &[0.0, 1.0]]));
    ensure(au <= 1e-6 && as_ <= 1e-6, || format!("angles {au:e}, {as_:e}"))
}

fn criterion_6() -> Check {
    let Model::Lti(p) = lib(builtin("pendubot", &BTreeMap::new()))? else {
        return Err("pendubot is not linear".into());
    };
    let tm = lib(ss_to_tf(&p))?;
    let g = tm.get(0, 0).normalized();
    let gain = g.num.leading();
    ensure((gain - 15.9549).abs() <= 1e-2, || format!("gain {gain}"))?;
    let zeros = lib(g.zeros())?;
    let mut zr: Vec<f64> = zeros.iter().map(|z| z.re).collect();
    zr.sort_by(f64::total_cmp);
    ensure(
        zeros.len() == 2 && (zr[0] + 6.5354).abs() <= 1e-3 && (zr[1] - 6.5354).abs() <= 1e-3,
        || format!("zeros {zeros:?}"),
    )?;
    let poles = lib(g.poles())?;
    let want = [c(-9.4109, 0.0), c(-5.6372, 0.0), c(5.6372, 0.0), c(9.4109, 0.0)];
    let dev = poles.iter().map(|p| want.iter().map(|w| (p - w).norm()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max);
    ensure(poles.len() == 4 && dev <= 1e-3, || format!("poles {poles:?}"))?;
    let tz = lib(transmission_zeros(&p))?;
    let d = spectrum_deviation(&zeros, &tz.zeros);
    ensure(tz.zeros.len() == 2 && d <= 1e-6, || format!("transmission zeros {:?} (deviation {d:e})", tz.zeros))
}

fn criterion_7() -> Check {
    let sys = lib(StateSpace::ab(mat(&[&[0.0, -1.0], &[0.0, 0.0]]), RealMatrix::identity(2, 2)))?;
    let s = lib(solve_are(&sys, &Weights::running(mat(&[&[4.0, 2.0], &[2.0, 1.0]]), RealMatrix::identity(2, 2))))?;
    let e = max_abs(&(&s.p - mat(&[&[2.0, 0.0], &[0.0, 1.0]])));
    ensure(e <= 1e-8, || format!("multivariate P error {e:e}"))?;
    let d = spectrum_deviation(&[c(-1.0, 0.0), c(-2.0, 0.0)], &s.closed_loop_poles);
    ensure(d <= 1e-8, || format!("multivariate poles {:?}", s.closed_loop_poles))?;

    let sys = lib(StateSpace::ab(mat(&[&[0.0, 1.0], &[0.0, -1.0]]), col(&[0.0, 1.0])))?;
    let s = lib(solve_are(&sys, &Weights::running(mat(&[&[1.0, 0.0], &[0.0, 0.0]]), mat(&[&[1.0]]))))?;
    let r3 = 3f64.sqrt();
    let e = max_abs(&(&s.p - mat(&[&[r3, 1.0], &[1.0, r3 - 1.0]])));
    ensure(e <= 1e-8, || format!("hand-solved P error {e:e}"))?;
    let want = [c(-r3 / 2.0, 0.5), c(-r3 / 2.0, -0.5)];
    let d = spectrum_deviation(&want, &s.closed_loop_poles);
    ensure(d <= 1e-8, || format!("hand-solved poles {:?}", s.closed_loop_poles))?;

    let scalar = lib(StateSpace::ab(mat(&[&[1.0]]), mat(&[&[1.0]])))?;
    for m in [0.0, 5.0] {
        let w = Weights::new(mat(&[&[1.0]]), mat(&[&[1.0]]), mat(&[&[m]]));
        let sol = lib(solve_rde(&scalar, &w, 0.0, 20.0, None))?;
        let e = (sol.p[0][(0, 0)] - (1.0 + 2f64.sqrt())).abs();
        ensure(e <= 1e-3, || format!("scalar RDE with M = {m}: P(0) off by {e:e}"))?;
    }
    Ok(())
}

fn criterion_8() -> Check {
    let g = lib(RationalFunction::from_coeffs(&[1.0], &[1.0, 1.0, 0.0]))?;
    let pts = lib(symmetric_root_locus(&g, &[1.0]))?;
    let sys = lib(ccf(&g))?;
    let q = sys.c.transpose() * &sys.c;
    let are = lib(solve_are(&sys, &Weights::running(q, mat(&[&[1.0]]))))?;
    let d = spectrum_deviation(&are.closed_loop_poles, &pts[0].stable);
    ensure(pts[0].stable.len() == 2 && d <= 1e-6, || format!("SRL {:?} vs ARE {:?}", pts[0].stable, are.closed_loop_poles))
}

fn criterion_9() -> Check {
    let grid = log_grid(1e-2, 1e3, 400);
    for (name, sys, w) in lqr_fixtures() {
        let s = lib(solve_are(&sys, &w))?;
        let rep = lib(return_difference_report(&sys, &s.k, &w, &grid))?;
        ensure(rep.min_return_difference >= 1.0 - 1e-6, || format!("{name}: min |1+L| = {}", rep.min_return_difference))?;
        ensure(rep.identity_residual <= 1e-7, || format!("{name}: identity residual {:e}", rep.identity_residual))?;
    }
    Ok(())
}

fn criterion_10() -> Check {
    let sys = lib(StateSpace::abc(mat(&[&[-2.0]]), mat(&[&[1.0]]), mat(&[&[1.0]])))?;
    let d = lib(integral_control(&sys, &[c(-2.0, 2.0), c(-2.0, -2.0)], 0))?;
    let (k1, k2) = (d.k1[(0, 0)], d.k2[(0, 0)]);
    ensure((k1 - 2.0).abs() <= 1e-12 && (k2 - 8.0).abs() <= 1e-12, || format!("(k1, k2) = ({k1}, {k2})"))?;
    let cl = lib(d.closed_loop(&sys))?;
    let (r, w) = (1.0, 0.7);
    let input = move |_: f64| vector(&[r, w]);
    let tr = lib(simulate_linear(&cl, &RealVector::zeros(2), &input, 0.0, 5.0, 1e-3))?;
    let y = tr.outputs.last().unwrap()[0];
    ensure((y - r).abs() <= 1e-4, || format!("|y(5) - r| = {:e}", (y - r).abs()))
}

fn criterion_11() -> Check {
    let plant = lib(RationalFunction::from_coeffs(&[1.0], &[1.0, 0.0, -1.0]))?;
    let ac = Polynomial::from_slice(&[1.0, 2.0, 2.0]);
    let ao = Polynomial::from_slice(&[1.0, 11.0, 30.0]);
    let s = lib(diophantine_design(&plant, &ac, &ao))?;
    let close = |p: &Polynomial, q: &[f64]| p.coeffs().len() == q.len() && p.coeffs().iter().zip(q).all(|(x, y)| (x - y).abs() <= 1e-10);
    ensure(close(&s.d, &[1.0, 13.0, 55.0]), || format!("d = {}", s.d))?;
    ensure(close(&s.n, &[95.0, 115.0]), || format!("n = {}", s.n))?;
    // independent re-multiplication
    let lhs = s.a.mul(&s.d).add(&s.b.mul(&s.n));
    let rhs = ac.mul(&ao);
    let res = lhs.sub(&rhs).max_abs() / rhs.max_abs();
    ensure(res <= 1e-10, || format!("multiplication residual {res:e}"))
}

fn criterion_12() -> Check {
    let b = lib(solve_bilinear_bang_bang(0.5, 2.0))?;
    ensure(b.switching_times.len() == 1 && (b.switching_times[0] - 1.0).abs() <= 1e-8, || format!("switches {:?}", b.switching_times))?;
    let x2 = b.final_state()[0];
    ensure((x2 - 0.5 * std::f64::consts::E).abs() <= 1e-8, || format!("x(2) = {x2}"))?;
    let d = lib(solve_double_integrator_min_time(&vector(&[1.0, 0.0])))?;
    ensure(d.switching_times.len() == 1 && (d.switching_times[0] - 1.0).abs() <= 1e-8, || format!("switches {:?}", d.switching_times))?;
    ensure((d.terminal_time - 2.0).abs() <= 1e-8, || format!("t1 = {}", d.terminal_time))?;
    let h = min_time_terminal_residual(&d);
    ensure(h <= 1e-6, || format!("terminal Hamiltonian residual {h:e}"))
}

fn criterion_13() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);

    // cross-method transition matrices, semigroup and inverse laws
    let mut done = 0;
    while done < 20 {
        let n = rng.random_range(2..5);
        let a = random_matrix(&mut rng, n, n, -2.0, 2.0);
        if min_gap(&lib(eigen(&a))?.values) < 0.05 {
            continue;
        }
        done += 1;
        let (t, s) = (rng.random_range(0.05..1.5), rng.random_range(0.05..1.0));
        let series = lib(stm_series(&a))?;
        let phi = lib(series.at(t))?;
        let scale = 1.0 + phi.norm();
        let modal = lib(lib(stm_modal(&a))?.at(t))?;
        let ch = lib(lib(stm_cayley_hamilton(&a))?.at(t))?;
        ensure((&modal - &phi).norm() <= 1e-7 * scale && (&ch - &phi).norm() <= 1e-7 * scale, || format!("phi methods disagree for {a}"))?;
        let composed = &phi * lib(series.at(s))?;
        ensure((lib(series.at(t + s))? - &composed).norm() <= 1e-9 * (1.0 + composed.norm()), || "semigroup law".into())?;
        let ident = &phi * lib(series.at(-t))?;
        ensure((ident - RealMatrix::identity(n, n)).norm() <= 1e-9 * scale * scale, || "inverse law".into())?;
    }

    // grammian rank equals controllability-matrix rank; half the fixtures
    // hide an uncontrollable block behind an orthogonal change of basis
    for k in 0..50 {
        let n = rng.random_range(2..5);
        let n1 = if k % 2 == 0 { n } else { rng.random_range(1..n) };
        let mut ab = random_matrix(&mut rng, n, n, -1.0, 1.0);
        let mut bb = random_matrix(&mut rng, n, 1, -1.0, 1.0);
        for i in n1..n {
            for j in 0..n1 {
                ab[(i, j)] = 0.0;
            }
            bb[(i, 0)] = 0.0;
        }
        let t = random_orthogonal(&mut rng, n);
        let sys = lib(StateSpace::ab(&t * ab * t.transpose(), &t * bb))?;
        let ctrb = rank(&controllability_matrix(&sys), Some(STRUCTURAL_RANK_TOL));
        let w = lib(controllability_grammian(&sys, 0.0, 5.0, 0.01))?;
        ensure(w.rank() == ctrb, || format!("grammian rank {} vs ctrb rank {ctrb} (n1 = {n1})", w.rank()))?;
    }

    // duality of grammians
    for _ in 0..10 {
        let n = rng.random_range(2..4);
        let sys = lib(StateSpace::abc(random_matrix(&mut rng, n, n, -1.0, 1.0), RealMatrix::zeros(n, 1), random_matrix(&mut rng, 1, n, -1.0, 1.0)))?;
        let h = lib(observability_grammian(&sys, 0.0, 2.0, 0.005))?;
        let w = lib(controllability_grammian(&dual_system(&sys), 0.0, 2.0, 0.005))?;
        ensure((&h.matrix - &w.matrix).norm() <= 1e-6 * (1.0 + h.matrix.norm()), || "duality H vs W".into())?;
    }

    // pole placement reproduces the requested characteristic polynomial
    let mut done = 0;
    while done < 50 {
        let n = rng.random_range(2..7);
        let a = random_matrix(&mut rng, n, n, -2.0, 2.0);
        let b = random_matrix(&mut rng, n, 1, -2.0, 2.0);
        if !well_controllable(&a, &b) {
            continue;
        }
        done += 1;
        let poles = stable_poles(&mut rng, n);
        let k = lib(place_poles(&a, &b, &poles, 0))?.k;
        let (got, _) = leverrier_faddeev(&(&a - &b * &k));
        let want = Polynomial::from_roots(&poles);
        for j in 0..=n {
            let (x, y) = (got.coeff(j), want.coeff(j));
            ensure((x - y).abs() <= 1e-6 * (1.0 + y.abs()), || format!("s^{j}: {x} vs {y}"))?;
        }
    }

    // separation principle
    let mut done = 0;
    while done < 10 {
        let n = rng.random_range(2..5);
        let a = random_matrix(&mut rng, n, n, -2.0, 2.0);
        let b = random_matrix(&mut rng, n, 1, -1.0, 1.0);
        let cm = random_matrix(&mut rng, 1, n, -1.0, 1.0);
        if !well_controllable(&a, &b) || !well_controllable(&a.transpose(), &cm.transpose()) {
            continue;
        }
        done += 1;
        let kp = stable_poles(&mut rng, n);
        let lp: Vec<Complex64> = stable_poles(&mut rng, n).iter().map(|p| p * 1.7).collect();
        let sys = lib(StateSpace::abc(a.clone(), b.clone(), cm.clone()))?;
        let k = lib(place_poles(&a, &b, &kp, 0))?.k;
        let l = lib(observer_gain(&a, &cm, &lp, 0))?.l;
        let fb = lib(assemble_observer_feedback(&sys, &k, &l))?;
        let union: Vec<Complex64> = kp.iter().chain(&lp).copied().collect();
        let d = spectrum_deviation(&union, &fb.spectrum);
        ensure(d <= 1e-6, || format!("separation deviation {d:e}"))?;
    }

    // Riccati differential equation against the Hamiltonian closed form
    let mut done = 0;
    while done < 5 {
        let sys = lib(StateSpace::ab(random_matrix(&mut rng, 2, 2, -1.5, 1.5), random_matrix(&mut rng, 2, 1, -1.0, 1.0)))?;
        let m = RealMatrix::from_diagonal(&RealVector::from_fn(2, |_, _| rng.random_range(0.0..2.0)));
        let w = Weights::new(RealMatrix::identity(2, 2), RealMatrix::identity(1, 1), m);
        let Ok(closed) = solve_rde_hamiltonian(&sys, &w, 1.0, &[0.0, 0.5]) else { continue };
        done += 1;
        let rde = lib(solve_rde(&sys, &w, 0.0, 1.0, Some(4000)))?;
        for (t, p) in [0.0, 0.5].iter().zip(&closed) {
            let e = (rde.p_at(*t) - p).norm();
            ensure(e <= 1e-6 * (1.0 + p.norm()), || format!("RDE vs closed form at t = {t}: {e:e}"))?;
        }
    }

    // sweep method: λ = P x along free-endpoint LQ solutions
    for _ in 0..5 {
        let sys = lib(StateSpace::ab(random_matrix(&mut rng, 2, 2, -1.5, 1.5), random_matrix(&mut rng, 2, 1, -1.0, 1.0)))?;
        let w = Weights::new(RealMatrix::identity(2, 2), RealMatrix::identity(1, 1), RealMatrix::identity(2, 2) * 0.5);
        let x0 = random_matrix(&mut rng, 2, 1, -2.0, 2.0).column(0).into_owned();
        let sol = lib(solve_lq_tpbvp(&TpbvpProblem::free_endpoint(sys.clone(), w.clone(), x0, 0.0, 1.5), 60))?;
        let rde = lib(solve_rde(&sys, &w, 0.0, 1.5, Some(15_000)))?;
        let d = sweep_deviation(&sol, |t| rde.p_at(t));
        ensure(d <= 1e-5, || format!("sweep deviation {d:e}"))?;
    }

    // Monte-Carlo dominance for both bang-bang examples
    let best = lib(solve_bilinear_bang_bang(0.5, 2.0))?.cost;
    for _ in 0..100 {
        let u: Vec<f64> = (0..40).map(|_| rng.random_range(0.0..=1.0)).collect();
        let cost = bilinear_cost(0.5, 2.0, &u).0;
        ensure(best <= cost + 1e-12, || format!("random control cost {cost} beats {best}"))?;
    }
    let x0 = vector(&[1.0, 0.0]);
    let tstar = lib(solve_double_integrator_min_time(&x0))?.terminal_time;
    for _ in 0..100 {
        let tau = rng.random_range(0.1..tstar);
        let h = tau / 10.0;
        let mut x = x0.clone();
        for _ in 0..10 {
            let u: f64 = rng.random_range(-1.0..=1.0);
            x = vector(&[x[0] + x[1] * h + 0.5 * u * h * h, x[1] + u * h]);
        }
        let total = tau + double_integrator_min_time(&x);
        ensure(total >= tstar - 1e-9, || format!("random prefix reaches the origin at {total} < {tstar}"))?;
    }
    Ok(())
}

fn run_cli(input: &Path, out: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_statespace-kit"))
        .args(["lqr", "--input"])
        .arg(input)
        .arg("--out")
        .arg(out)
        .args(["--tol", "rde_steps=2000", "--seed", "3"])
        .status()
        .map_err(|e| e.to_string())?;
    ensure(status.success(), || format!("cli exited with {status}"))
}

fn criterion_14() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("input.json");
    let doc = r#"{"model": {"type": "lti", "A": [[0, -1], [0, 0]], "B": [[1, 0], [0, 1]]},
                 "Q": [[4, 2], [2, 1]], "R": [[1, 0], [0, 1]], "horizon": [0, 3], "x0": [1, -1]}"#;
    std::fs::write(&input, doc).map_err(|e| e.to_string())?;
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_cli(&input, &a)?;
    run_cli(&input, &b)?;
    for name in ["report.json", "riccati.csv"] {
        let x = std::fs::read(a.join(name)).map_err(|e| e.to_string())?;
        let y = std::fs::read(b.join(name)).map_err(|e| e.to_string())?;
        ensure(x == y, || format!("{name} differs between runs"))?;
    }
    Ok(())
}

fn main() {
    let criteria: [(&str, fn() -> Check); 14] = [
        ("transition matrix golden", criterion_1),
        ("Cayley-Hamilton coefficients", criterion_2),
        ("Lyapunov golden", criterion_3),
        ("structural golden", criterion_4),
        ("stability subspaces", criterion_5),
        ("pendubot round trip", criterion_6),
        ("ARE goldens", criterion_7),
        ("SRL/ARE consistency", criterion_8),
        ("Kalman inequality", criterion_9),
        ("integral control", criterion_10),
        ("Diophantine design", criterion_11),
        ("bang-bang goldens", criterion_12),
        ("property suites", criterion_13),
        ("CLI determinism", criterion_14),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(()) => println!("PASS {:>2} {name}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
