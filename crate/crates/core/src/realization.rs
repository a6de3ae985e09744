//! Transfer functions to state space and back.

use crate::error::{Error, Result};
use crate::model::StateSpace;
use crate::numkit::{
    mat, rank, singular_values_complex, solve_complex, Complex64, ComplexMatrix, Polynomial,
    RealMatrix,
};
use crate::structural::{controllability_matrix, observability_matrix};
use serde_json::{json, Value};

/// Two poles are the same pole when `|p_i - p_j| <= POLE_MATCH_TOL * (1 + |p_i|)`.
pub const POLE_MATCH_TOL: f64 = 1e-7;
/// Relative root distance below which a numerator and denominator root cancel.
pub const CANCEL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct RationalFunction {
    pub num: Polynomial,
    pub den: Polynomial,
}

impl RationalFunction {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidArgument("denominator is identically zero".into()));
        }
        if num.coeffs().iter().chain(den.coeffs()).any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coefficient".into()));
        }
        Ok(Self { num, den })
    }

    pub fn from_coeffs(num: &[f64], den: &[f64]) -> Result<Self> {
        Self::new(Polynomial::from_slice(num), Polynomial::from_slice(den))
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.num.eval_complex(s) / self.den.eval_complex(s)
    }

    pub fn is_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() <= self.den.degree()
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() < self.den.degree()
    }

    pub fn poles(&self) -> Result<Vec<Complex64>> {
        self.den.roots()
    }

    pub fn zeros(&self) -> Result<Vec<Complex64>> {
        if self.num.is_zero() {
            return Ok(Vec::new());
        }
        self.num.roots()
    }

    /// High-frequency gain `lead(num) / lead(den)`.
    pub fn gain(&self) -> f64 {
        self.num.leading() / self.den.leading()
    }

    /// Same function with a monic denominator.
    pub fn normalized(&self) -> Self {
        let l = self.den.leading();
        Self { num: self.num.scale(1.0 / l), den: self.den.scale(1.0 / l) }
    }

    /// `(D, remainder)` with `g = D + remainder` and the remainder strictly proper.
    pub fn split_direct(&self) -> Result<(f64, Self)> {
        if !self.is_proper() {
            return Err(Error::ImproperTransferFunction { num: self.num.degree(), den: self.den.degree() });
        }
        if self.num.is_zero() || self.num.degree() < self.den.degree() {
            return Ok((0.0, self.clone()));
        }
        let d = self.num.leading() / self.den.leading();
        let rem = self.num.sub(&self.den.scale(d));
        // the leading terms cancel exactly by construction; drop any residue
        let deg = self.den.degree();
        let coeffs: Vec<f64> = (0..deg).rev().map(|k| rem.coeff(k)).collect();
        Ok((d, Self { num: Polynomial::new(coeffs), den: self.den.clone() }))
    }

    /// Cancel numerator/denominator roots that agree to `tol` (relative).
    /// Returns the reduced function and the cancelled roots.
    pub fn cancel(&self, tol: f64) -> Result<(Self, Vec<Complex64>)> {
        if self.num.is_zero() {
            return Ok((Self { num: Polynomial::zero(), den: Polynomial::one() }, Vec::new()));
        }
        let zs = self.zeros()?;
        let ps = self.poles()?;
        let mut used = vec![false; ps.len()];
        let mut common = Vec::new();
        for z in &zs {
            let best = ps
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .min_by(|a, b| (a.1 - z).norm().total_cmp(&(b.1 - z).norm()));
            if let Some((i, p)) = best {
                if (p - z).norm() <= tol * (1.0 + p.norm()) {
                    used[i] = true;
                    common.push(*p);
                }
            }
        }
        if common.is_empty() {
            return Ok((self.clone(), common));
        }
        let f = Polynomial::from_roots(&common);
        let (num, _) = self.num.divrem(&f)?;
        let (den, _) = self.den.divrem(&f)?;
        Ok((Self { num, den }, common))
    }

    pub fn to_json(&self) -> Value {
        json!({"num": self.num.coeffs(), "den": self.den.coeffs()})
    }
}

/// `p x m` grid of rational functions.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    pub entries: Vec<Vec<RationalFunction>>,
    /// Roots cancelled per entry by [`ss_to_tf`]; empty when nothing was flagged.
    pub cancelled: Vec<Vec<Vec<Complex64>>>,
}

impl TransferMatrix {
    pub fn new(entries: Vec<Vec<RationalFunction>>) -> Result<Self> {
        let m = entries.first().map_or(0, |r| r.len());
        if entries.is_empty() || m == 0 || entries.iter().any(|r| r.len() != m) {
            return Err(Error::DimensionMismatch("transfer matrix rows must be non-empty and equal length".into()));
        }
        let cancelled = entries.iter().map(|r| vec![Vec::new(); r.len()]).collect();
        Ok(Self { entries, cancelled })
    }

    pub fn siso(g: RationalFunction) -> Self {
        Self { entries: vec![vec![g]], cancelled: vec![vec![Vec::new()]] }
    }

    pub fn p(&self) -> usize {
        self.entries.len()
    }

    pub fn m(&self) -> usize {
        self.entries[0].len()
    }

    pub fn get(&self, i: usize, j: usize) -> &RationalFunction {
        &self.entries[i][j]
    }

    pub fn eval(&self, s: Complex64) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.p(), self.m(), |i, j| self.entries[i][j].eval(s))
    }

    pub fn any_cancelled(&self) -> bool {
        self.cancelled.iter().flatten().any(|c| !c.is_empty())
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.entries.iter().map(|r| Value::Array(r.iter().map(|g| g.to_json()).collect())).collect())
    }
}

fn schema(pointer: String, message: &str) -> Error {
    Error::Schema { pointer, message: message.into() }
}

/// `{"num": [...], "den": [...]}`, coefficients highest degree first.
pub fn rational_from_json(v: &Value, pointer: &str) -> Result<RationalFunction> {
    let coeffs = |key: &str| -> Result<Vec<f64>> {
        let arr = v
            .get(key)
            .and_then(Value::as_array)
            .ok_or_else(|| schema(format!("{pointer}/{key}"), "expected an array of numbers"))?;
        if arr.is_empty() {
            return Err(schema(format!("{pointer}/{key}"), "empty coefficient list"));
        }
        arr.iter()
            .enumerate()
            .map(|(i, x)| {
                x.as_f64()
                    .filter(|f| f.is_finite())
                    .ok_or_else(|| schema(format!("{pointer}/{key}/{i}"), "expected a finite number"))
            })
            .collect()
    };
    let num = coeffs("num")?;
    let den = coeffs("den")?;
    RationalFunction::from_coeffs(&num, &den).map_err(|e| schema(format!("{pointer}/den"), &e.to_string()))
}

/// A single rational function object or a nested `p x m` grid of them.
pub fn transfer_matrix_from_json(v: &Value, pointer: &str) -> Result<TransferMatrix> {
    if v.is_object() {
        return Ok(TransferMatrix::siso(rational_from_json(v, pointer)?));
    }
    let rows = v.as_array().ok_or_else(|| schema(pointer.into(), "expected a transfer function or a grid"))?;
    let mut entries = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let cells = r.as_array().ok_or_else(|| schema(format!("{pointer}/{i}"), "expected a row array"))?;
        let row = cells
            .iter()
            .enumerate()
            .map(|(j, c)| rational_from_json(c, &format!("{pointer}/{i}/{j}")))
            .collect::<Result<Vec<_>>>()?;
        entries.push(row);
    }
    TransferMatrix::new(entries).map_err(|e| schema(pointer.into(), &e.to_string()))
}

fn static_gain(d: f64) -> Result<StateSpace> {
    StateSpace::new(RealMatrix::zeros(0, 0), RealMatrix::zeros(0, 1), RealMatrix::zeros(1, 0), mat(&[&[d]]))
}

/// Controllable canonical form: companion `A` with last row `(-a0 … -a_{n-1})`,
/// `B = e_n`, `C = (b0 … b_{n-1})`.
pub fn ccf(g: &RationalFunction) -> Result<StateSpace> {
    let (d, r) = g.normalized().split_direct()?;
    let n = r.den.degree();
    if n == 0 {
        return static_gain(d);
    }
    let mut a = RealMatrix::zeros(n, n);
    for i in 0..n - 1 {
        a[(i, i + 1)] = 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = -r.den.coeff(j);
    }
    let mut b = RealMatrix::zeros(n, 1);
    b[(n - 1, 0)] = 1.0;
    let c = RealMatrix::from_fn(1, n, |_, j| r.num.coeff(j));
    StateSpace::new(a, b, c, mat(&[&[d]]))
}

/// Observable canonical form: `A` with first column `(-a_{n-1} … -a0)` and
/// ones on the superdiagonal, `B = (b_{n-1} … b0)`, `C = e_1`.
pub fn ocf(g: &RationalFunction) -> Result<StateSpace> {
    let (d, r) = g.normalized().split_direct()?;
    let n = r.den.degree();
    if n == 0 {
        return static_gain(d);
    }
    let mut a = RealMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, 0)] = -r.den.coeff(n - 1 - i);
        if i + 1 < n {
            a[(i, i + 1)] = 1.0;
        }
    }
    let b = RealMatrix::from_fn(n, 1, |i, _| r.num.coeff(n - 1 - i));
    let mut c = RealMatrix::zeros(1, n);
    c[(0, 0)] = 1.0;
    StateSpace::new(a, b, c, mat(&[&[d]]))
}

fn sort_poles(p: &mut [Complex64]) {
    p.sort_by(|a, b| a.re.total_cmp(&b.re).then(b.im.total_cmp(&a.im)));
}

fn check_distinct(poles: &[Complex64]) -> bool {
    for i in 0..poles.len() {
        for j in i + 1..poles.len() {
            if (poles[i] - poles[j]).norm() <= POLE_MATCH_TOL * (1.0 + poles[i].norm()) {
                return false;
            }
        }
    }
    true
}

/// Snap near-real roots onto the real axis and make conjugate pairs exact.
fn clean_roots(mut r: Vec<Complex64>) -> Vec<Complex64> {
    for z in r.iter_mut() {
        if z.im.abs() <= POLE_MATCH_TOL * (1.0 + z.norm()) {
            z.im = 0.0;
        }
    }
    sort_poles(&mut r);
    r
}

/// Modal (diagonal) form from the partial-fraction expansion.
///
/// Real poles give diagonal entries with `B = k_i`, `C = 1`. A complex pair
/// `σ ± jω` with residue `k` at `σ + jω` gives the block `[[σ, ω], [-ω, σ]]`
/// with `B = (2 Re k, -2 Im k)` and `C = (1, 0)`. No cancellation is done, so
/// the result need not be minimal.
pub fn modal_form(g: &RationalFunction) -> Result<StateSpace> {
    let (d, r) = g.normalized().split_direct()?;
    let n = r.den.degree();
    if n == 0 {
        return static_gain(d);
    }
    let poles = clean_roots(r.den.roots()?);
    if !check_distinct(&poles) {
        return Err(Error::RepeatedPoles);
    }
    let dden = r.den.derivative();
    let mut a = RealMatrix::zeros(n, n);
    let mut b = RealMatrix::zeros(n, 1);
    let mut c = RealMatrix::zeros(1, n);
    let mut k = 0;
    for p in &poles {
        if p.im < 0.0 {
            continue;
        }
        let res = r.num.eval_complex(*p) / dden.eval_complex(*p);
        if p.im == 0.0 {
            a[(k, k)] = p.re;
            b[(k, 0)] = res.re;
            c[(0, k)] = 1.0;
            k += 1;
        } else {
            a[(k, k)] = p.re;
            a[(k, k + 1)] = p.im;
            a[(k + 1, k)] = -p.im;
            a[(k + 1, k + 1)] = p.re;
            b[(k, 0)] = 2.0 * res.re;
            b[(k + 1, 0)] = -2.0 * res.im;
            c[(0, k)] = 1.0;
            k += 2;
        }
    }
    if k != n {
        return Err(Error::InternalInconsistency("complex poles are not in conjugate pairs".into()));
    }
    StateSpace::new(a, b, c, mat(&[&[d]]))
}

/// Characteristic polynomial and adjugate coefficients by the
/// Leverrier–Faddeev recursion: `adj(sI - A) = Σ_k N_k s^{n-1-k}`.
pub fn leverrier_faddeev(a: &RealMatrix) -> (Polynomial, Vec<RealMatrix>) {
    let n = a.nrows();
    let ident = RealMatrix::identity(n, n);
    let mut coeffs = vec![1.0];
    let mut ns = Vec::with_capacity(n);
    let mut nk = ident.clone();
    for k in 1..=n {
        ns.push(nk.clone());
        let an = a * &nk;
        let ck = -an.trace() / k as f64;
        coeffs.push(ck);
        nk = an + &ident * ck;
    }
    (Polynomial::new(coeffs), ns)
}

/// `C (sI - A)^{-1} B + D` entrywise, with common factors cancelled at
/// [`CANCEL_TOL`] and recorded in `cancelled`.
pub fn ss_to_tf(sys: &StateSpace) -> Result<TransferMatrix> {
    let n = sys.n();
    let (charpoly, ns) = leverrier_faddeev(&sys.a);
    let (p, m) = (sys.p(), sys.m());
    let mut entries = Vec::with_capacity(p);
    let mut cancelled = Vec::with_capacity(p);
    let cn: Vec<RealMatrix> = ns.iter().map(|nk| &sys.c * nk * &sys.b).collect();
    for i in 0..p {
        let mut row = Vec::with_capacity(m);
        let mut crow = Vec::with_capacity(m);
        for j in 0..m {
            // numerator = Σ (C N_k B)_{ij} s^{n-1-k} + D_ij a(s)
            let mut coeffs = vec![0.0; n];
            for (k, mk) in cn.iter().enumerate() {
                coeffs[k] = mk[(i, j)];
            }
            let strict = Polynomial::new(coeffs);
            let num = strict.add(&charpoly.scale(sys.d[(i, j)]));
            let floor = 1e-12 * (cn.iter().map(|mk| mk.amax()).fold(0.0, f64::max) + sys.d[(i, j)].abs() * charpoly.max_abs());
            let num = Polynomial::new(num.coeffs().iter().map(|&c| if c.abs() <= floor { 0.0 } else { c }).collect());
            let g = RationalFunction::new(num, charpoly.clone())?;
            let (g, c) = g.cancel(CANCEL_TOL)?;
            row.push(g);
            crow.push(c);
        }
        entries.push(row);
        cancelled.push(crow);
    }
    Ok(TransferMatrix { entries, cancelled })
}

/// Partial-fraction data `P(s) = D + Σ R_i / (s - p_i)` over distinct poles.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidueExpansion {
    pub poles: Vec<Complex64>,
    pub residues: Vec<ComplexMatrix>,
    pub direct: RealMatrix,
}

pub fn residue_expansion(tm: &TransferMatrix) -> Result<ResidueExpansion> {
    let (p, m) = (tm.p(), tm.m());
    let mut direct = RealMatrix::zeros(p, m);
    let mut poles: Vec<Complex64> = Vec::new();
    let mut parts: Vec<(usize, usize, RationalFunction, Vec<Complex64>)> = Vec::new();
    for i in 0..p {
        for j in 0..m {
            let (d, r) = tm.get(i, j).normalized().split_direct()?;
            direct[(i, j)] = d;
            if r.num.is_zero() {
                continue;
            }
            let rp = clean_roots(r.den.roots()?);
            if !check_distinct(&rp) {
                return Err(Error::RepeatedPoleUnsupported);
            }
            for z in &rp {
                if !poles.iter().any(|q| (q - z).norm() <= POLE_MATCH_TOL * (1.0 + q.norm())) {
                    poles.push(*z);
                }
            }
            parts.push((i, j, r, rp));
        }
    }
    sort_poles(&mut poles);
    let mut residues = vec![ComplexMatrix::zeros(p, m); poles.len()];
    for (i, j, r, rp) in &parts {
        let dden = r.den.derivative();
        for z in rp {
            let k = poles
                .iter()
                .position(|q| (q - z).norm() <= POLE_MATCH_TOL * (1.0 + q.norm()))
                .expect("pole registered above");
            residues[k][(*i, *j)] += r.num.eval_complex(*z) / dden.eval_complex(*z);
        }
    }
    // drop poles whose residue vanished entirely (cancelled in every entry)
    let scale = residues.iter().map(|r| r.norm()).fold(0.0, f64::max);
    let keep: Vec<usize> = (0..poles.len()).filter(|&k| residues[k].norm() > 1e-12 * scale.max(1.0)).collect();
    Ok(ResidueExpansion {
        poles: keep.iter().map(|&k| poles[k]).collect(),
        residues: keep.iter().map(|&k| residues[k].clone()).collect(),
        direct,
    })
}

const RANK_DROP: f64 = 1e-8;
const AMBIGUOUS_BAND: (f64, f64) = (1e-12, 1e-5);

/// `R = C_i B_i` with `C_i` the independent columns of `R` (left to right)
/// and `B_i` the coefficients expressing every column in that basis.
fn factor_residue(r: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let sv = singular_values_complex(r);
    let smax = sv.first().copied().unwrap_or(0.0);
    for &s in &sv {
        let ratio = s / smax;
        if ratio > AMBIGUOUS_BAND.0 && ratio < AMBIGUOUS_BAND.1 {
            return Err(Error::RankAmbiguous { ratio });
        }
    }
    let (p, m) = r.shape();
    let mut q: Vec<nalgebra::DVector<Complex64>> = Vec::new();
    let mut sel = Vec::new();
    for j in 0..m {
        let mut v = r.column(j).into_owned();
        for _ in 0..2 {
            for qi in &q {
                let proj = qi.dotc(&v);
                v -= qi * proj;
            }
        }
        let nv = v.norm();
        if nv > RANK_DROP * smax {
            q.push(v / Complex64::new(nv, 0.0));
            sel.push(j);
        }
    }
    let ci = ComplexMatrix::from_fn(p, sel.len(), |a, b| r[(a, sel[b])]);
    let gram = ci.adjoint() * &ci;
    let bi = solve_complex(&gram, &(ci.adjoint() * r))?;
    Ok((ci, bi))
}

/// Minimal realization of a transfer matrix with simple poles.
///
/// Each residue `R_i` is factored as `C_i B_i` with inner dimension
/// `rank R_i`; the pole `p_i` is repeated that many times on the diagonal.
/// Complex pairs are folded into real blocks.
pub fn mimo_minimal_realization(tm: &TransferMatrix) -> Result<StateSpace> {
    let pfe = residue_expansion(tm)?;
    let (p, m) = (tm.p(), tm.m());
    let mut blocks: Vec<(RealMatrix, RealMatrix, RealMatrix)> = Vec::new();
    for (k, pole) in pfe.poles.iter().enumerate() {
        if pole.im < 0.0 {
            continue;
        }
        let (ci, bi) = factor_residue(&pfe.residues[k])?;
        let r = ci.ncols();
        if pole.im == 0.0 {
            let a = RealMatrix::identity(r, r) * pole.re;
            blocks.push((a, bi.map(|z| z.re), ci.map(|z| z.re)));
        } else {
            let (s, w) = (pole.re, pole.im);
            let mut a = RealMatrix::zeros(2 * r, 2 * r);
            for t in 0..r {
                a[(t, t)] = s;
                a[(r + t, r + t)] = s;
                a[(t, r + t)] = w;
                a[(r + t, t)] = -w;
            }
            let mut b = RealMatrix::zeros(2 * r, m);
            b.view_mut((0, 0), (r, m)).copy_from(&bi.map(|z| z.re));
            b.view_mut((r, 0), (r, m)).copy_from(&bi.map(|z| -z.im));
            let mut c = RealMatrix::zeros(p, 2 * r);
            c.view_mut((0, 0), (p, r)).copy_from(&ci.map(|z| 2.0 * z.re));
            c.view_mut((0, r), (p, r)).copy_from(&ci.map(|z| 2.0 * z.im));
            blocks.push((a, b, c));
        }
    }
    let n: usize = blocks.iter().map(|b| b.0.nrows()).sum();
    let mut a = RealMatrix::zeros(n, n);
    let mut b = RealMatrix::zeros(n, m);
    let mut c = RealMatrix::zeros(p, n);
    let mut off = 0;
    for (ab, bb, cb) in &blocks {
        let k = ab.nrows();
        a.view_mut((off, off), (k, k)).copy_from(ab);
        b.view_mut((off, 0), (k, m)).copy_from(bb);
        c.view_mut((0, off), (p, k)).copy_from(cb);
        off += k;
    }
    let sys = StateSpace::new(a, b, c, pfe.direct)?;
    let tol = Some(1e-9);
    if n > 0 && (rank(&controllability_matrix(&sys), tol) < n || rank(&observability_matrix(&sys), tol) < n) {
        return Err(Error::InternalInconsistency("residue realization is not minimal".into()));
    }
    Ok(sys)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Minimality {
    pub is_minimal: bool,
    /// `n - rank(O C)`, the number of states a minimal realization drops.
    pub degree_deficit: usize,
}

pub fn minimality(sys: &StateSpace) -> Minimality {
    let n = sys.n();
    if n == 0 {
        return Minimality { is_minimal: true, degree_deficit: 0 };
    }
    let hankel = observability_matrix(sys) * controllability_matrix(sys);
    let r = rank(&hankel, Some(1e-9));
    Minimality { is_minimal: r == n, degree_deficit: n - r }
}
