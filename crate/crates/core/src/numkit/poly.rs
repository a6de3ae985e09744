use super::{Complex64, RealMatrix};
use crate::error::{Error, Result};
use std::fmt;

/// Real polynomial with coefficients stored highest degree first.
///
/// The zero polynomial is `[0.0]`; leading zeros are stripped on
/// construction so `coeffs[0]` is nonzero for every other polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let first = coeffs.iter().position(|&c| c != 0.0);
        let coeffs = match first {
            Some(i) => coeffs[i..].to_vec(),
            None => vec![0.0],
        };
        Self { coeffs }
    }

    pub fn from_slice(coeffs: &[f64]) -> Self {
        Self::new(coeffs.to_vec())
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    /// `s`
    pub fn s() -> Self {
        Self::new(vec![1.0, 0.0])
    }

    /// Monic polynomial with the given roots. Complex roots must come in
    /// conjugate pairs; the imaginary residue is discarded.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (i, &ci) in c.iter().enumerate() {
                next[i] += ci;
                next[i + 1] -= ci * r;
            }
            c = next;
        }
        Self::new(c.iter().map(|z| z.re).collect())
    }

    pub fn from_real_roots(roots: &[f64]) -> Self {
        let r: Vec<Complex64> = roots.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_roots(&r)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficients lowest degree first.
    pub fn ascending(&self) -> Vec<f64> {
        self.coeffs.iter().rev().copied().collect()
    }

    /// Coefficient of `s^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> f64 {
        let d = self.degree();
        if k > d {
            0.0
        } else {
            self.coeffs[d - k]
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, &c| acc * s + c)
    }

    pub fn eval_complex(&self, s: Complex64) -> Complex64 {
        self.coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0.0; n];
        for (i, &c) in self.coeffs.iter().rev().enumerate() {
            out[n - 1 - i] += c;
        }
        for (i, &c) in other.coeffs.iter().rev().enumerate() {
            out[n - 1 - i] += c;
        }
        Self::new(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(1.0 / self.leading())
    }

    /// `p(-s)`
    pub fn reflect(&self) -> Self {
        let d = self.degree();
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| if (d - i) % 2 == 1 { -c } else { c })
                .collect(),
        )
    }

    pub fn derivative(&self) -> Self {
        let d = self.degree();
        if d == 0 {
            return Self::zero();
        }
        Self::new(self.coeffs[..d].iter().enumerate().map(|(i, &c)| c * (d - i) as f64).collect())
    }

    /// Quotient and remainder of long division by `divisor`.
    pub fn divrem(&self, divisor: &Self) -> Result<(Self, Self)> {
        if divisor.is_zero() {
            return Err(Error::InvalidArgument("division by the zero polynomial".into()));
        }
        let dd = divisor.degree();
        if self.degree() < dd || self.is_zero() {
            return Ok((Self::zero(), self.clone()));
        }
        let mut rem = self.coeffs.clone();
        let qlen = self.degree() - dd + 1;
        let mut q = vec![0.0; qlen];
        for i in 0..qlen {
            let f = rem[i] / divisor.coeffs[0];
            q[i] = f;
            for (j, &dc) in divisor.coeffs.iter().enumerate() {
                rem[i + j] -= f * dc;
            }
            rem[i] = 0.0;
        }
        let r = rem[qlen..].to_vec();
        Ok((Self::new(q), Self::new(r)))
    }

    /// Zero out coefficients smaller than `rel_tol` times the largest one.
    pub fn trim(&self, rel_tol: f64) -> Self {
        let m = self.coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        Self::new(self.coeffs.iter().map(|&c| if c.abs() <= rel_tol * m { 0.0 } else { c }).collect())
    }

    /// Roots as eigenvalues of the companion matrix, sorted by real then
    /// imaginary part. Conjugate pairs are exact mirrors.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let d = self.degree();
        if d == 0 {
            return Ok(Vec::new());
        }
        let lead = self.leading();
        let mut comp = RealMatrix::zeros(d, d);
        for j in 0..d {
            comp[(0, j)] = -self.coeffs[j + 1] / lead;
        }
        for i in 1..d {
            comp[(i, i - 1)] = 1.0;
        }
        if !comp.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("polynomial coefficients overflow the companion matrix".into()));
        }
        let mut r = super::eigen::schur_eigenvalues(&comp)?;
        r.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Ok(r)
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs()))
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.degree();
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate() {
            let p = d - i;
            if c == 0.0 && !(d == 0) {
                continue;
            }
            let sign = if c < 0.0 { "-" } else { "+" };
            if first {
                if c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match p {
                0 => write!(f, "{a}")?,
                1 if a == 1.0 => write!(f, "s")?,
                1 => write!(f, "{a} s")?,
                _ if a == 1.0 => write!(f, "s^{p}")?,
                _ => write!(f, "{a} s^{p}")?,
            }
        }
        Ok(())
    }
}
