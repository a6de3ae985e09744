use super::{Model, NonlinearModel, StateSpace, VectorField};
use crate::error::{Error, Result};
use crate::numkit::{mat, vector, RealVector};
use std::collections::BTreeMap;
use std::sync::Arc;

pub const BUILTIN_NAMES: [&str; 5] = ["magnetic_ball", "pendulum", "vanderpol", "pendubot", "rlc"];

fn param(params: &BTreeMap<String, f64>, name: &str, default: f64) -> Result<f64> {
    let v = params.get(name).copied().unwrap_or(default);
    if !v.is_finite() {
        return Err(Error::InvalidArgument(format!("parameter {name} must be finite")));
    }
    Ok(v)
}

fn positive(params: &BTreeMap<String, f64>, name: &str, default: f64) -> Result<f64> {
    let v = param(params, name, default)?;
    if v <= 0.0 {
        return Err(Error::InvalidArgument(format!("parameter {name} must be positive")));
    }
    Ok(v)
}

fn reject_unknown(params: &BTreeMap<String, f64>, allowed: &[&str]) -> Result<()> {
    match params.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::InvalidArgument(format!("unknown parameter {k}"))),
        None => Ok(()),
    }
}

/// Registry lookup. Unset parameters default to 1.
///
/// - `magnetic_ball` (m, c, g, ue): `ẋ1 = x2`, `ẋ2 = g - (c/m) u²/x1²`, `y = x1`.
/// - `pendulum` (g, l, m): `ẋ1 = x2`, `ẋ2 = -(g/l) sin x1 + u/(m l²)`, `y = x1`.
/// - `vanderpol` (mu): `ẋ1 = x2`, `ẋ2 = -mu (1 - x1²) x2 - x1 + u`, `y = x1`.
/// - `pendubot`: the linearized double pendulum about its upright position.
/// - `rlc` (r, l, c): capacitor voltage and inductor current, `y = x1`.
pub fn builtin(name: &str, params: &BTreeMap<String, f64>) -> Result<Model> {
    match name {
        "magnetic_ball" => {
            reject_unknown(params, &["m", "c", "g", "ue"])?;
            let m = positive(params, "m", 1.0)?;
            let c = positive(params, "c", 1.0)?;
            let g = positive(params, "g", 1.0)?;
            let ue = param(params, "ue", 1.0)?;
            let f: VectorField = Arc::new(move |x, u, _| vector(&[x[1], g - (c / m) * u[0] * u[0] / (x[0] * x[0])]));
            let h: VectorField = Arc::new(|x, _, _| vector(&[x[0]]));
            let xe1 = (c / (m * g)).sqrt() * ue;
            Ok(Model::Nonlinear(
                NonlinearModel::new(2, 1, 1, f, h)
                    .with_name(name)
                    .with_operating_point(vector(&[xe1, 0.0]), vector(&[ue])),
            ))
        }
        "pendulum" => {
            reject_unknown(params, &["g", "l", "m"])?;
            let g = positive(params, "g", 1.0)?;
            let l = positive(params, "l", 1.0)?;
            let m = positive(params, "m", 1.0)?;
            let f: VectorField = Arc::new(move |x, u, _| vector(&[x[1], -(g / l) * x[0].sin() + u[0] / (m * l * l)]));
            let h: VectorField = Arc::new(|x, _, _| vector(&[x[0]]));
            Ok(Model::Nonlinear(
                NonlinearModel::new(2, 1, 1, f, h)
                    .with_name(name)
                    .with_operating_point(vector(&[std::f64::consts::PI, 0.0]), vector(&[0.0])),
            ))
        }
        "vanderpol" => {
            reject_unknown(params, &["mu"])?;
            let mu = param(params, "mu", 1.0)?;
            let f: VectorField = Arc::new(move |x, u, _| vector(&[x[1], -mu * (1.0 - x[0] * x[0]) * x[1] - x[0] + u[0]]));
            let h: VectorField = Arc::new(|x, _, _| vector(&[x[0]]));
            Ok(Model::Nonlinear(
                NonlinearModel::new(2, 1, 1, f, h)
                    .with_name(name)
                    .with_operating_point(vector(&[0.0, 0.0]), vector(&[0.0])),
            ))
        }
        "pendubot" => {
            reject_unknown(params, &[])?;
            Ok(Model::Lti(pendubot()))
        }
        "rlc" => {
            reject_unknown(params, &["r", "l", "c"])?;
            let r = positive(params, "r", 1.0)?;
            let l = positive(params, "l", 1.0)?;
            let c = positive(params, "c", 1.0)?;
            let a = mat(&[&[-1.0 / (r * c), 1.0 / c], &[-1.0 / l, 0.0]]);
            let b = mat(&[&[0.0], &[1.0 / l]]);
            Ok(Model::Lti(StateSpace::abc(a, b, mat(&[&[1.0, 0.0]]))?))
        }
        other => Err(Error::InvalidArgument(format!(
            "unknown builtin model {other:?}; expected one of {}",
            BUILTIN_NAMES.join(", ")
        ))),
    }
}

fn pendubot() -> StateSpace {
    let a = mat(&[
        &[0.0, 1.0, 0.0, 0.0],
        &[51.9243, 0.0, -13.9700, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
        &[-52.8376, 0.0, 68.4187, 0.0],
    ]);
    let b = mat(&[&[0.0], &[15.9549], &[0.0], &[-29.3596]]);
    let c = mat(&[&[1.0, 0.0, 0.0, 0.0]]);
    StateSpace::abc(a, b, c).expect("pendubot matrices are consistent")
}

/// Planar satellite in polar coordinates, `x = (r, ṙ, θ, θ̇)`, thrust inputs
/// `(u_r, u_θ)`, outputs `(r, θ)`. The gravitational constant is chosen so
/// that `r = r0`, `θ̇ = ω0` is a circular orbit.
pub fn satellite(r0: f64, w0: f64, m: f64) -> NonlinearModel {
    let k = m * r0.powi(3) * w0 * w0;
    let f: VectorField = Arc::new(move |x: &RealVector, u: &RealVector, _| {
        let (r, rd, wd) = (x[0], x[1], x[3]);
        vector(&[rd, r * wd * wd - k / (m * r * r) + u[0] / m, wd, -2.0 * rd * wd / r + u[1] / (m * r)])
    });
    let h: VectorField = Arc::new(|x, _, _| vector(&[x[0], x[2]]));
    NonlinearModel::new(4, 2, 2, f, h).with_name("satellite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{find_equilibrium, linearize_at_equilibrium};

    #[test]
    fn magnetic_ball_linearization() {
        let Model::Nonlinear(ball) = builtin("magnetic_ball", &BTreeMap::new()).unwrap() else { panic!() };
        let op = ball.operating_point.clone().unwrap();
        let eq = find_equilibrium(&ball, &op.u, &op.x, 1e-12).unwrap();
        let lin = linearize_at_equilibrium(&ball, &eq, None).unwrap();
        // alpha = 2 (c/m) ue^2 / xe1^3, beta = -2 (c/m) ue / xe1^2
        assert!((lin.a.clone() - mat(&[&[0.0, 1.0], &[2.0, 0.0]])).amax() < 1e-8);
        assert!((lin.b.clone() - mat(&[&[0.0], &[-2.0]])).amax() < 1e-8);
    }

    #[test]
    fn vanderpol_linearization() {
        let Model::Nonlinear(vdp) = builtin("vanderpol", &BTreeMap::new()).unwrap() else { panic!() };
        let eq = find_equilibrium(&vdp, &vector(&[0.0]), &vector(&[0.1, -0.1]), 1e-12).unwrap();
        let lin = linearize_at_equilibrium(&vdp, &eq, None).unwrap();
        assert!((lin.a - mat(&[&[0.0, 1.0], &[-1.0, -1.0]])).amax() < 1e-8);
    }

    #[test]
    fn pendubot_bit_exact() {
        let Model::Lti(p) = builtin("pendubot", &BTreeMap::new()).unwrap() else { panic!() };
        assert_eq!(p.n(), 4);
        assert_eq!(p.a[(1, 0)], 51.9243);
        assert_eq!(p.a[(3, 2)], 68.4187);
        assert_eq!(p.b[(3, 0)], -29.3596);
    }

    #[test]
    fn rejects_unknowns() {
        assert!(builtin("nope", &BTreeMap::new()).is_err());
        let mut p = BTreeMap::new();
        p.insert("zz".to_string(), 1.0);
        assert!(builtin("rlc", &p).is_err());
    }
}
