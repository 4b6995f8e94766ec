//! Complex polynomials in one variable and matrix-valued polynomials.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::linalg::Schur;

use crate::error::{Error, Result};
use crate::linalg::{zeros, ComplexMatrix, C64};
use crate::loopgroup::MatrixLoop;

/// Trailing coefficients below this modulus are dropped.
pub const COEFF_EPS: f64 = 1e-12;

/// Polynomial Σ c_k z^k with `coeffs[k] = c_k`.
///
/// The coefficient list is normalized so the last entry is nonzero; the zero
/// polynomial has an empty list.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ComplexPoly {
    coeffs: Vec<C64>,
}

impl ComplexPoly {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.last().is_some_and(|c| c.norm() < COEFF_EPS) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Self::monomial(C64::new(1.0, 0.0), 0)
    }

    /// c·z^k
    pub fn monomial(c: C64, k: usize) -> Self {
        let mut v = vec![C64::new(0.0, 0.0); k + 1];
        v[k] = c;
        Self::new(v)
    }

    /// Monic polynomial with the given roots, times `lead`.
    pub fn from_roots(roots: &[C64], lead: C64) -> Self {
        let mut p = Self::new(vec![lead]);
        for r in roots {
            p = &p * &Self::new(vec![-r, C64::new(1.0, 0.0)]);
        }
        p
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Coefficient of z^k (zero past the end).
    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    /// Coefficients padded with zeros to at least `len` entries.
    pub fn padded(&self, len: usize) -> Vec<C64> {
        let mut v = self.coeffs.clone();
        if v.len() < len {
            v.resize(len, C64::new(0.0, 0.0));
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Multiply by z^k.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut v = vec![C64::new(0.0, 0.0); k];
        v.extend_from_slice(&self.coeffs);
        Self { coeffs: v }
    }

    /// Number of leading zero coefficients, i.e. the largest s with z^s | p.
    /// `None` for the zero polynomial.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| c.norm() >= COEFF_EPS)
    }

    /// Drop the factor z^s.
    pub fn unshift(&self, s: usize) -> Self {
        Self::new(self.coeffs.iter().skip(s).copied().collect())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Long division: self = q·d + r with deg r < deg d.
    pub fn divmod(&self, d: &ComplexPoly) -> Result<(ComplexPoly, ComplexPoly)> {
        let dd = d.degree().ok_or(Error::ZeroDivisor)?;
        let lead = d.coeffs[dd];
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Self::zero(), self.clone()));
        }
        let qlen = rem.len() - dd;
        let mut q = vec![C64::new(0.0, 0.0); qlen];
        for k in (0..qlen).rev() {
            let t = rem[k + dd] / lead;
            q[k] = t;
            for (i, dc) in d.coeffs.iter().enumerate() {
                rem[k + i] -= t * dc;
            }
            rem[k + dd] = C64::new(0.0, 0.0);
        }
        rem.truncate(dd);
        Ok((Self::new(q), Self::new(rem)))
    }

    /// All roots with multiplicity: eigenvalues of the companion matrix,
    /// each refined by one Newton step.
    pub fn roots(&self, tol: f64) -> Result<Vec<C64>> {
        let deg = self.degree().ok_or(Error::ZeroPolynomial)?;
        let s = self.valuation().unwrap_or(0);
        let mut roots = vec![C64::new(0.0, 0.0); s];
        let core = self.unshift(s);
        let n = deg - s;
        if n > 0 {
            let lead = core.coeffs[n];
            let mut comp = zeros(n, n);
            for i in 1..n {
                comp[(i, i - 1)] = C64::new(1.0, 0.0);
            }
            for i in 0..n {
                comp[(i, n - 1)] = -core.coeffs[i] / lead;
            }
            let schur = Schur::try_new(comp, f64::EPSILON, MAX_ROOT_ITER)
                .ok_or(Error::RootsNotConverged { iterations: MAX_ROOT_ITER })?;
            let eig = schur
                .eigenvalues()
                .ok_or(Error::RootsNotConverged { iterations: MAX_ROOT_ITER })?;
            let dp = core.derivative();
            for &r0 in eig.iter() {
                let pr = core.eval(r0);
                let dpr = dp.eval(r0);
                let mut r = r0;
                if dpr.norm() > 0.0 {
                    let cand = r0 - pr / dpr;
                    if core.eval(cand).norm() <= pr.norm() {
                        r = cand;
                    }
                }
                roots.push(r);
            }
        }
        let scale = self.norm().max(f64::MIN_POSITIVE);
        for r in &roots {
            // Residual relative to the size of the terms being summed, so that
            // large-modulus roots are judged fairly.
            let m = r.norm().max(1.0).powi(deg as i32);
            if self.eval(*r).norm() > tol * scale * m {
                return Err(Error::RootsNotConverged { iterations: MAX_ROOT_ITER });
            }
        }
        Ok(roots)
    }
}

const MAX_ROOT_ITER: usize = 10_000;

impl Add for &ComplexPoly {
    type Output = ComplexPoly;
    fn add(self, rhs: &ComplexPoly) -> ComplexPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPoly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &ComplexPoly {
    type Output = ComplexPoly;
    fn sub(self, rhs: &ComplexPoly) -> ComplexPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPoly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &ComplexPoly {
    type Output = ComplexPoly;
    fn mul(self, rhs: &ComplexPoly) -> ComplexPoly {
        if self.is_zero() || rhs.is_zero() {
            return ComplexPoly::zero();
        }
        let mut v = vec![C64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        ComplexPoly::new(v)
    }
}

impl Neg for &ComplexPoly {
    type Output = ComplexPoly;
    fn neg(self) -> ComplexPoly {
        self.scale(C64::new(-1.0, 0.0))
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for ComplexPoly {
            type Output = ComplexPoly;
            fn $m(self, rhs: ComplexPoly) -> ComplexPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

pub fn poly_eval(p: &ComplexPoly, z: C64) -> C64 {
    p.eval(z)
}

pub fn poly_divmod(p: &ComplexPoly, d: &ComplexPoly) -> Result<(ComplexPoly, ComplexPoly)> {
    p.divmod(d)
}

pub fn poly_roots(p: &ComplexPoly, tol: f64) -> Result<Vec<C64>> {
    p.roots(tol)
}

/// Σ z^k A^{(k)}, evaluated by Horner's rule on the coefficient matrices.
pub fn matpoly_eval(a: &MatrixLoop, z: C64) -> ComplexMatrix {
    let n = a.n();
    a.coeffs()
        .iter()
        .rev()
        .fold(zeros(n, n), |acc, ak| acc * z + ak)
}
