//! One function per subcommand. Each reads what it needs from the input
//! document and fills an [`Outcome`]; nothing is written here.

use crate::input::Input;
use crate::report::{complex, complexes, floats, mat_json, num, poly_json, ss_json, vec_json, Outcome};
use serde_json::{json, Value};
use statespace_kit::lqr::{
    log_grid, return_difference_report, solve_are, solve_rde, state_weighted_root_locus, symmetric_root_locus, SrlPoint,
    Weights,
};
use statespace_kit::minprin::{
    bilinear_argmin_violations, bilinear_switch_numeric, hamiltonian_residual, min_time_terminal_residual,
    solve_bilinear_bang_bang, solve_double_integrator_min_time, solve_lq_tpbvp, TpbvpProblem,
};
use statespace_kit::model::{find_equilibrium, LinearDynamics, Model, StateSpace};
use statespace_kit::numkit::{eigen, RealMatrix, RealVector};
use statespace_kit::realization::{ccf, mimo_minimal_realization, minimality, modal_form, ocf, ss_to_tf};
use statespace_kit::response::{fmt17, simulate};
use statespace_kit::stability::{
    bibo_stability, linearization_verdict, lti_stability, lyapunov_stability_test, quadratic_lyapunov_scan,
    solve_lyapunov, stability_subspaces, LinearizationVerdict,
};
use statespace_kit::structural::{
    controllability_grammian, kalman_decompose, minimum_energy_steer, modal_controllability_test,
    observability_grammian, structural_analysis, transmission_zeros, GrammianReport, KalmanKind,
};
use statespace_kit::synthesis::{
    assemble_observer_feedback, diophantine_design, integral_control, observer_gain, place_poles,
    reduced_order_observer,
};
use statespace_kit::{Error, Result};
use std::collections::BTreeMap;

pub const COMMANDS: [&str; 15] = [
    "realize",
    "analyze",
    "stability",
    "structural",
    "place",
    "observer",
    "integral",
    "diophantine",
    "lqr",
    "srl",
    "margins",
    "simulate",
    "steer",
    "tpbvp",
    "mintime",
];

/// Overridable numeric settings (`--tol name=value`).
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    values: BTreeMap<&'static str, f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        let values = BTreeMap::from([
            ("sim_step", 1e-3),
            ("quad_step", 1e-3),
            ("rde_steps", 0.0),
            ("tpbvp_steps", 200.0),
            ("scan_samples", 10_000.0),
            ("scan_margin", 1e-9),
            ("equilibrium_tol", 1e-10),
        ]);
        Self { values }
    }
}

impl Tolerances {
    pub fn names() -> Vec<&'static str> {
        Self::default().values.keys().copied().collect()
    }

    /// Fails with the list of accepted names for an unknown key.
    pub fn set(&mut self, name: &str, value: f64) -> std::result::Result<(), String> {
        let Some(slot) = self.values.get_mut(name) else {
            return Err(format!("unknown tolerance {name:?}; expected one of {}", Self::names().join(", ")));
        };
        if !(value.is_finite() && value >= 0.0) {
            return Err(format!("tolerance {name} must be a finite non-negative number"));
        }
        *slot = value;
        Ok(())
    }

    pub fn get(&self, name: &str) -> f64 {
        self.values[name]
    }

    fn count(&self, name: &str) -> usize {
        self.get(name).round() as usize
    }

    pub fn to_json(&self) -> Value {
        Value::Object(self.values.iter().map(|(k, v)| ((*k).to_string(), num(*v))).collect())
    }
}

pub struct Context<'a> {
    pub input: &'a Input,
    pub tol: &'a Tolerances,
    pub seed: u64,
}

pub fn run(command: &str, ctx: &Context) -> Result<Outcome> {
    let mut out = Outcome::default();
    match command {
        "realize" => realize(ctx, &mut out)?,
        "analyze" => analyze(ctx, &mut out)?,
        "stability" => stability(ctx, &mut out)?,
        "structural" => structural(ctx, &mut out)?,
        "place" => place(ctx, &mut out)?,
        "observer" => observer(ctx, &mut out)?,
        "integral" => integral(ctx, &mut out)?,
        "diophantine" => diophantine(ctx, &mut out)?,
        "lqr" => lqr(ctx, &mut out)?,
        "srl" => srl(ctx, &mut out)?,
        "margins" => margins(ctx, &mut out)?,
        "simulate" => simulate_cmd(ctx, &mut out)?,
        "steer" => steer(ctx, &mut out)?,
        "tpbvp" => tpbvp(ctx, &mut out)?,
        "mintime" => mintime(ctx, &mut out)?,
        other => unreachable!("command {other} is validated by the argument parser"),
    }
    Ok(out)
}

fn realize(ctx: &Context, out: &mut Outcome) -> Result<()> {
    let tm = ctx.input.transfer("transfer")?;
    out.set("transfer", tm.to_json());
    if tm.p() == 1 && tm.m() == 1 {
        let g = tm.get(0, 0);
        out.set("poles", complexes(&g.poles()?));
        out.set("ccf", ss_json(&ccf(g)?));
        out.set("ocf", ss_json(&ocf(g)?));
        match modal_form(g) {
            Ok(s) => out.set("modal", ss_json(&s)),
            Err(e) => out.warn(format!("modal form unavailable: {e}")),
        }
    }
    match mimo_minimal_realization(&tm) {
        Ok(s) => {
            out.set("minimalOrder", json!(s.n()));
            out.set("minimal", ss_json(&s));
        }
        Err(e) if tm.p() == 1 && tm.m() == 1 => out.warn(format!("residue realization unavailable: {e}")),
        Err(e) => return Err(e),
    }
    Ok(())
}

fn modes_json(report: &statespace_kit::structural::StructuralReport) -> Value {
    Value::Array(
        report
            .modes
            .iter()
            .map(|m| json!({"value": complex(m.value), "controllable": m.controllable, "observable": m.observable}))
            .collect(),
    )
}

fn analyze(ctx: &Context, out: &mut Outcome) -> Result<()> {
    let sys = ctx.input.lti()?;
    let tm = ss_to_tf(&sys)?;
    if tm.any_cancelled() {
        out.warn("pole-zero cancellations were removed from the transfer matrix");
    }
    out.set("transfer", tm.to_json());
    out.set("poles", complexes(&eigen(&sys.a)?.values));
    if sys.p() == sys.m() {
        match transmission_zeros(&sys) {
            Ok(z) => out.set("transmissionZeros", complexes(&z.zeros)),
            Err(e) => out.warn(format!("transmission zeros unavailable: {e}")),
        }
    }
    let st = structural_analysis(&sys)?;
    out.set("modes", modes_json(&st));
    out.set("ctrbRank", json!(st.ctrb_rank));
    out.set("obsvRank", json!(st.obsv_rank));
    out.set("stabilizable", json!(st.stabilizable));
    out.set("detectable", json!(st.detectable));
    let mn = minimality(&sys);
    out.set("minimal", json!(mn.is_minimal));
    out.set("degreeDeficit", json!(mn.degree_deficit));
    Ok(())
}

fn stability(ctx: &Context, out: &mut Outcome) -> Result<()> {
    match ctx.input.model()? {
        Model::Lti(sys) => {
            let v = lti_stability(&sys.a)?;
            out.set("verdict", json!(v.kind.name()));
            out.set("eigenvalues", complexes(&v.eigenvalues));
            let lt = lyapunov_stability_test(&sys.a)?;
            out.set("lyapunovAsymptoticallyStable", json!(lt.asymptotically_stable));
            if let Some(c) = &lt.certificate {
                out.set("lyapunovP", mat_json(&c.p));
                out.set("lyapunovMinors", floats(&c.definiteness.minors));
            }
            match stability_subspaces(&sys.a) {
                Ok(s) => {
                    out.set("stableBasis", mat_json(&s.stable_basis));
                    out.set("unstableBasis", mat_json(&s.unstable_basis));
                }
                Err(e) => out.warn(format!("stability subspaces unavailable: {e}")),
            }
            let bibo = bibo_stability(&ss_to_tf(&sys)?)?;
            out.set("biboStable", json!(bibo.stable));
            out.set("transferPoles", complexes(&bibo.poles));
        }
        Model::Nonlinear(model) => {
            let op = model.operating_point.clone();
            let x0 = match ctx.input.opt_vector("x0")? {
                Some(x) => x,
                None => op.as_ref().map(|o| o.x.clone()).unwrap_or_else(|| RealVector::zeros(model.n)),
            };
            let ue = match ctx.input.opt_vector("ue")? {
                Some(u) => u,
                None => op.as_ref().map(|o| o.u.clone()).unwrap_or_else(|| RealVector::zeros(model.m)),
            };
            let eq = find_equilibrium(&model, &ue, &x0, ctx.tol.get("equilibrium_tol"))?;
            out.set("equilibrium", vec_json(&eq.xe));
            out.set("equilibriumResidual", num(eq.residual));
            let (verdict, a) = linearization_verdict(&model, &eq)?;
            out.set("verdict", json!(verdict.name()));
            out.set("jacobian", mat_json(&a));
            out.set("eigenvalues", complexes(&eigen(&a)?.values));
            if verdict == LinearizationVerdict::AsympStable {
                let cert = solve_lyapunov(&a, &RealMatrix::identity(model.n, model.n))?;
                let level = ctx.input.opt_number("level")?.unwrap_or(1.0);
                // the scan runs in deviation coordinates about the equilibrium
                let shifted = shift_to_equilibrium(&model, &eq.xe, &eq.ue);
                let scan = quadratic_lyapunov_scan(
                    &shifted,
                    &cert.p,
                    level,
                    ctx.tol.count("scan_samples"),
                    ctx.tol.get("scan_margin"),
                )?;
                out.set("lyapunovP", mat_json(&cert.p));
                out.set(
                    "regionScan",
                    json!({
                        "level": num(level),
                        "certified": scan.certified,
                        "worstValue": num(scan.worst_value),
                        "samples": scan.samples,
                        "counterexample": scan.counterexample.as_ref().map(vec_json),
                    }),
                );
            }
        }
        Model::Ltv(_) => {
            return Err(Error::InvalidArgument("stability analysis needs an LTI or nonlinear model".into()));
        }
    }
    Ok(())
}

fn shift_to_equilibrium(
    model: &statespace_kit::model::NonlinearModel,
    xe: &RealVector,
    ue: &RealVector,
) -> statespace_kit::model::NonlinearModel {
    let (f, h) = (model.f.clone(), model.h.clone());
    let (xf, uf) = (xe.clone(), ue.clone());
    let (xh, uh) = (xe.clone(), ue.clone());
    let fs: statespace_kit::model::VectorField = std::sync::Arc::new(move |x, u, t| f(&(x + &xf), &(u + &uf), t));
    let hs: statespace_kit::model::VectorField = std::sync::Arc::new(move |x, u, t| h(&(x + &xh), &(u + &uh), t));
    statespace_kit::model::NonlinearModel::new(model.n, model.m, model.p, fs, hs).with_name(&model.name)
}

fn grammian_json(g: &GrammianReport) -> Value {
    json!({
        "matrix": mat_json(&g.matrix),
        "eigenvalues": floats(&g.eigenvalues),
        "condition": num(g.condition),
        "rank": g.rank(),
        "singular": g.is_singular(),
        "horizon": [num(g.horizon.0), num(g.horizon.1)],
    })
}

fn structural(ctx: &Context, out: &mut Outcome) -> Result<()> {
    let model = ctx.input.model()?;
    let (t0, t1) = ctx.input.horizon("horizon")?.unwrap_or((0.0, 1.0));
    let quad = ctx.tol.get("quad_step");
    let dynamics: &dyn LinearDynamics = match &model {
        Model::Lti(s) => s,
        Model::Ltv(m) => m,
        Model::Nonlinear(_) => {
            return Err(Error::InvalidArgument("structural analysis needs a linear model".into()));
        }
    };
    out.set("controllabilityGrammian", grammian_json(&controllability_grammian(dynamics, t0, t1, quad)?));
    out.set("observabilityGrammian", grammian_json(&observability_grammian(dynamics, t0, t1, quad)?));
    let Model::Lti(sys) = &model else { return Ok(()) };
    let st = structural_analysis(sys)?;
    out.set("ctrbMatrix", mat_json(&st.ctrb_matrix));
    out.set("obsvMatrix", mat_json(&st.obsv_matrix));
    out.set("ctrbRank", json!(st.ctrb_rank));
    out.set("obsvRank", json!(st.obsv_rank));
    out.set("modes", modes_json(&st));
    out.set("uncontrollableModes", complexes(&st.uncontrollable_modes));
    out.set("unobservableModes", complexes(&st.unobservable_modes));
    out.set("stabilizable", json!(st.stabilizable));
    out.set("detectable", json!(st.detectable));
    for kind in [KalmanKind::Kccf, KalmanKind::Kocf] {
        match kalman_decompose(sys, kind) {
            Ok(k) => out.set(
                kind.name(),
                json!({
                    "transform": mat_json(&k.transform),
                    "A": mat_json(&k.a_bar),
                    "B": mat_json(&k.b_bar),
                    "C": mat_json(&k.c_bar),
                    "n1": k.n1,
                }),
            ),
            Err(e) => out.warn(format!("{} unavailable: {e}", kind.name())),
        }
    }
    match modal_controllability_test(sys) {
        Ok(rows) => out.set(
            "modalTest",
            Value::Array(
                rows.iter()
                    .map(|r| json!({"value": complex(r.value), "rowNorm": num(r.row_norm), "controllable": r.controllable}))
                    .collect(),
            ),
        ),
        Err(e) => out.warn(format!("modal controllability test unavailable: {e}")),
    }
    if sys.p() == sys.m() {
        match transmission_zeros(sys) {
            Ok(z) => out.set("transmissionZeros", complexes(&z.zeros)),
            Err(e) => out.warn(format!("transmission zeros unavailable: {e}")),
        }
    }
    Ok(())
}

fn place(ctx: &Context, out: &mut Outcome) -> Result<()> {
    let sys = ctx.input.lti()?;
    let poles = ctx.input.poles("poles")?;
    let p = place_poles(&sys.a, &sys.b, &poles, ctx.seed)?;
    out.set("K", mat_json(&p.k));
    out.set("achieved", complexes(&p.achieved));
    if let Some(w) = &p.projection {
        out.set("projection", mat_json(w));
    }
    Ok(())
}

fn observer(ctx: &Context, out: &mut Outcome) -> Result<()> {
    let sys = ctx.input.lti()?;
    let poles = ctx.input.poles("poles")?;
    if ctx.input.opt_bool("reduced")?.unwrap_or(false) {
        let r = reduced_order_observer(&sys, &poles, ctx.seed)?;
        out.set("gain", mat_json(&r.gain));
        out.set("estimator", ss_json(&r.estimator));
        out.set("transform", mat_json(&r.transform));
        return Ok(());
    }
    let l = observer_gain(&sys.a, &sys.c, &poles, ctx.seed)?;
    out.set("L", mat_json(&l.l));
    out.set("achieved", complexes(&l.achieved));
    if ctx.input.has("controller_poles") {
        let kp = ctx.input.poles("controller_poles")?;
        let k = place_poles(&sys.a, &sys.b, &kp, ctx.seed)?.k;
        let fb = assemble_observer_feedback(&sys, &k, &l.l)?;
        out.set("K", mat_json(&k));
        out.set("spectrum", complexes(&fb.spectrum));
        out.set("compensator", fb.compensator.to_json());
        out.set("compensatorRealization", ss_json(&fb.compensator_realization));
        out.set("observerSpeedRatio", num(fb.observer_speed_ratio));
        if fb.observer_speed_ratio < 2.0 {
            out.warn("observer is less than twice as fast as the regulator");
        }
    }
    Ok(())
}

fn integral(ctx: &Context, out: &mut Outcome) -> Result<()> {
    let sys = ctx.input.lti()?;
    let poles = ctx.input.poles("poles")?;
    let d = integral_control(&sys, &poles, ctx.seed)?;
    out.set("K1", mat_json(&d.k1));
    out.set("K2", mat_json(&d.k2));
    out.set("achieved", complexes(&d.achieved));
    out.set("zeroRank", json!(d.zero_rank));
    out.set("closedLoop", ss_json(&d.closed_loop(&sys)?));
    Ok(())
}

fn diophantine(ctx: &Context, out: &mut Outcome) -> Result<()> {
    let plant = ctx.input.rational("plant")?;
    let ac = ctx.input.polynomial("alpha_c")?;
    let ao = ctx.input.polynomial("alpha_o")?;
    let s = diophantine_design(&plant, &ac, &ao)?;
    out.set("d", poly_json(&s.d));
    out.set("n", poly_json(&s.n));
    out.set("residual", num(s.residual));
    out.set("compensator", s.compensator.to_json());
    Ok(())
}

fn weights(ctx: &Context, sys: &StateSpace) -> Result<Weights> {
    let q = ctx.input.matrix("Q")?;
    let r = ctx.input.matrix("R")?;
    let m = ctx.input.opt_matrix("M")?.unwrap_or_else(|| RealMatrix::zeros(sys.n(), sys.n()));
    let w = Weights::new(q, r, m);
    w.validate(sys.n(), sys.m())?;
    Ok(w)
}

fn lqr(ctx: &Context, out: &mut Outcome) -> Result<()> {
    let sys = ctx.input.lti()?;
    let w = weights(ctx, &sys)?;
    let x0 = ctx.input.opt_vector("x0")?;
    if let Some((t0, t1)) = ctx.input.horizon("horizon")? {
        let steps = ctx.tol.count("rde_steps");
        let sol = solve_rde(&sys, &w, t0, t1, (steps > 0).then_some(steps))?;
        out.set("P0", mat_json(&sol.p[0]));
        out.set("K0", mat_json(&sol.k[0]));
        out.set("rdeResidual", num(sol.residual));
        if let Some(x) = &x0 {
            out.set("finiteHorizonValue", num(sol.value(x)));
        }
        let mut csv = String::from("t");
        let n = sys.n();
        for i in 0..n {
            for j in 0..n {
                csv.push_str(&format!(",P{}{}", i + 1, j + 1));
            }
        }
        csv.push('\n');
        for (t, p) in sol.times.iter().zip(&sol.p) {
            csv.push_str(&fmt17(*t));
            for i in 0..n {
                for j in 0..n {
                    csv.push(',');
                    csv.push_str(&fmt17(p[(i, j)]));
                }
            }
            csv.push('\n');
        }
        out.file("riccati.csv", csv);
        if ctx.input.opt_bool("finite_only")?.unwrap_or(false) {
            return Ok(());
        }
    }
    let are = solve_are(&sys, &w)?;
    out.set("P", mat_json(&are.p));
    out.set("K", mat_json(&are.k));
    out.set("closedLoopPoles", complexes(&are.closed_loop_poles));
    out.set("hamiltonianSpectrum", complexes(&are.hamiltonian_spectrum));
    out.set("areResidual", num(are.residual));
    out.set("positiveDefinite", json!(are.positive_definite));
    if let Some(x) = &x0 {
        out.set("value", num(are.value(x)));
    }
    Ok(())
}

fn srl_csv(points: &[SrlPoint]) -> String {
    let mut csv = String::from("r,root_re,root_im,stable\n");
    for p in points {
        for z in &p.roots {
            csv.push_str(&format!("{},{},{},{}\n", fmt17(p.r), fmt17(z.re), fmt17(z.im), u8::from(z.re < 0.0)));
        }
    }
    csv
}

fn srl(ctx: &Context, out: &mut Outcome) -> Result<()> {
    let rs: Vec<f64> = match ctx.input.opt_vector("r")? {
        Some(v) => v.iter().copied().collect(),
        None => log_grid(1e-3, 1e3, 61),
    };
    let points = if ctx.input.has("plant") {
        symmetric_root_locus(&ctx.input.rational("plant")?, &rs)?
    } else {
        let sys = ctx.input.lti()?;
        state_weighted_root_locus(&sys, &ctx.input.matrix("Q")?, &rs)?
    };
    out.set(
        "points",
        Value::Array(
            points
                .iter()
                .map(|p| json!({"r": num(p.r), "stable": complexes(&p.stable), "symmetryResidual": num(p.symmetry_residual)}))
                .collect(),
        ),
    );
    out.file("srl.csv", srl_csv(&points));
    Ok(())
}

fn margins(ctx: &Context, out: &mut Outcome) -> Result<()> {
    let sys = ctx.input.lti()?;
    let w = weights(ctx, &sys)?;
    let lo = ctx.input.opt_number("omega_min")?.unwrap_or(1e-2);
    let hi = ctx.input.opt_number("omega_max")?.unwrap_or(1e3);
    let count = ctx.input.opt_number("omega_count")?.unwrap_or(400.0);
    if !(lo > 0.0 && hi > lo && count >= 2.0) {
        return Err(Error::InvalidArgument("need 0 < omega_min < omega_max and omega_count >= 2".into()));
    }
    let are = solve_are(&sys, &w)?;
    let rep = return_difference_report(&sys, &are.k, &w, &log_grid(lo, hi, count as usize))?;
    out.set("K", mat_json(&are.k));
    out.set("minReturnDifference", num(rep.min_return_difference));
    out.set("minAt", num(rep.min_at));
    out.set("identityResidual", num(rep.identity_residual));
    let mut csv = String::from("omega,L_re,L_im,return_difference,sensitivity\n");
    for k in 0..rep.omegas.len() {
        let (lr, li) = rep.loop_values[k].map_or((f64::NAN, f64::NAN), |l| (l.re, l.im));
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt17(rep.omegas[k]),
            fmt17(lr),
            fmt17(li),
            fmt17(rep.return_difference[k]),
            fmt17(rep.sensitivity[k])
        ));
    }
    out.file("margins.csv", csv);
    Ok(())
}

fn simulate_cmd(ctx: &Context, out: &mut Outcome) -> Result<()> {
    let model = ctx.input.model()?;
    let (n, m) = match &model {
        Model::Lti(s) => (s.n(), s.m()),
        Model::Ltv(l) => (l.n(), l.m()),
        Model::Nonlinear(nl) => (nl.n, nl.m),
    };
    let x0 = ctx.input.vector("x0")?;
    if x0.len() != n {
        return Err(Error::Schema { pointer: "/x0".into(), message: format!("expected {n} entries") });
    }
    let u = ctx.input.opt_vector("u")?.unwrap_or_else(|| RealVector::zeros(m));
    if u.len() != m {
        return Err(Error::Schema { pointer: "/u".into(), message: format!("expected {m} entries") });
    }
    let t0 = ctx.input.opt_number("t0")?.unwrap_or(0.0);
    let t1 = ctx.input.number("t1")?;
    let input = move |_: f64| u.clone();
    let tr = simulate(&model, &x0, &input, t0, t1, ctx.tol.get("sim_step"))?;
    out.set("finalState", vec_json(tr.final_state()));
    out.set("samples", json!(tr.len()));
    out.set("blewUp", json!(tr.blew_up));
    if tr.blew_up {
        out.warn("trajectory left the finite range; the run was truncated");
    }
    out.file("trajectory.csv", tr.to_csv());
    Ok(())
}

fn steer(ctx: &Context, out: &mut Outcome) -> Result<()> {
    let model = ctx.input.model()?;
    let dynamics: &dyn LinearDynamics = match &model {
        Model::Lti(s) => s,
        Model::Ltv(m) => m,
        Model::Nonlinear(_) => return Err(Error::InvalidArgument("steering needs a linear model".into())),
    };
    let x0 = ctx.input.vector("x0")?;
    let xf = ctx.input.vector("xf")?;
    let t0 = ctx.input.opt_number("t0")?.unwrap_or(0.0);
    let tf = ctx.input.number("tf")?;
    let r = minimum_energy_steer(dynamics, &x0, &xf, t0, tf, ctx.tol.get("sim_step"))?;
    out.set("endpointError", num(r.endpoint_error));
    out.set("eta", vec_json(&r.control.eta));
    out.set("grammian", grammian_json(&r.grammian));
    out.set("finalState", vec_json(r.trajectory.final_state()));
    out.file("trajectory.csv", r.trajectory.to_csv());
    Ok(())
}

fn tpbvp(ctx: &Context, out: &mut Outcome) -> Result<()> {
    let sys = ctx.input.lti()?;
    let n = sys.n();
    let w = weights(ctx, &sys)?;
    let x0 = ctx.input.vector("x0")?;
    let x1 = ctx.input.opt_vector("x1")?;
    let t0 = ctx.input.opt_number("t0")?.unwrap_or(0.0);
    let t1 = ctx.input.number("t1")?;
    let fixed = ctx.input.bool_list("fixed")?.unwrap_or_else(|| vec![x1.is_some(); n]);
    let prob = TpbvpProblem { sys, weights: w, x0, x1: x1.unwrap_or_else(|| RealVector::zeros(n)), t0, t1, fixed };
    let sol = solve_lq_tpbvp(&prob, ctx.tol.count("tpbvp_steps"))?;
    let res = hamiltonian_residual(&sol, &prob);
    out.set("lambda0", vec_json(&sol.lambda0));
    out.set("finalState", vec_json(sol.trajectory.final_state()));
    out.set("endpointResidual", num(sol.endpoint_residual));
    out.set(
        "residuals",
        json!({"state": num(res.state), "costate": num(res.costate), "stationarity": num(res.stationarity)}),
    );
    let mut csv = String::from("t");
    for i in 0..n {
        csv.push_str(&format!(",lambda{}", i + 1));
    }
    csv.push('\n');
    for (t, l) in sol.trajectory.times.iter().zip(&sol.costate) {
        csv.push_str(&fmt17(*t));
        for v in l.iter() {
            csv.push(',');
            csv.push_str(&fmt17(*v));
        }
        csv.push('\n');
    }
    out.file("trajectory.csv", sol.trajectory.to_csv());
    out.file("costate.csv", csv);
    Ok(())
}

fn mintime(ctx: &Context, out: &mut Outcome) -> Result<()> {
    let samples = ctx.input.opt_number("samples")?.unwrap_or(1000.0).max(1.0) as usize;
    let problem = ctx.input.opt_str("problem")?.unwrap_or("double-integrator");
    let sol = match problem {
        "double-integrator" => {
            let sol = solve_double_integrator_min_time(&ctx.input.vector("x0")?)?;
            out.set("residuals", json!({"terminalHamiltonian": num(min_time_terminal_residual(&sol))}));
            sol
        }
        "bilinear" => {
            let x0 = ctx.input.number("x0")?;
            let t1 = ctx.input.number("t1")?;
            let sol = solve_bilinear_bang_bang(x0, t1)?;
            let numeric = bilinear_switch_numeric(t1, (t1 * 1000.0).ceil().max(1.0) as usize);
            let bad = bilinear_argmin_violations(&sol, samples, 100);
            out.set(
                "residuals",
                json!({
                    "numericSwitch": numeric.map(num),
                    "switchDiscrepancy": match (numeric, sol.switching_times.first()) {
                        (Some(a), Some(b)) => num((a - b).abs()),
                        (None, None) => num(0.0),
                        _ => Value::Null,
                    },
                    "argminViolations": bad.len(),
                }),
            );
            sol
        }
        other => {
            return Err(Error::Schema {
                pointer: "/problem".into(),
                message: format!("unknown problem {other:?}; expected \"double-integrator\" or \"bilinear\""),
            })
        }
    };
    out.set("problem", json!(problem));
    out.set("switchingTimes", floats(&sol.switching_times));
    out.set("terminalTime", num(sol.terminal_time));
    out.set("cost", num(sol.cost));
    out.set("controls", floats(&sol.arcs.iter().map(|a| a.u).collect::<Vec<_>>()));
    out.set("finalState", vec_json(&sol.final_state()));
    out.file("trajectory.csv", sol.sample(samples).to_csv());
    Ok(())
}
