//! Unitary polynomial loops A(z) = Σ z^k A^{(k)}: validation, degree-one
//! factorization, diagonal-structure detection and the two-angle genus-3
//! family.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, c, cr, identity, max_abs, max_abs_diff, projection_residual, range_projection,
    unitarity_residual, zeros, ComplexMatrix, C64,
};
use crate::polyalg::{matpoly_eval, ComplexPoly, COEFF_EPS};

/// Tolerance for loop validation and projection identities.
pub const LOOP_TOL: f64 = 1e-10;
/// Tolerance for rebuilding a loop from its factorization.
pub const REBUILD_TOL: f64 = 1e-9;
/// Number of circle samples used by unitarity checks.
pub const CIRCLE_SAMPLES: usize = 128;

/// The k-th of `n` equally spaced points on the unit circle.
pub fn circle_point(k: usize, n: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64)
}

/// Polynomial loop with N×N coefficient matrices A^{(0)}…A^{(g−1)}.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixLoop {
    n: usize,
    coeffs: Vec<ComplexMatrix>,
}

impl MatrixLoop {
    /// Build from coefficient matrices; trailing zero matrices are dropped.
    pub fn new(mut coeffs: Vec<ComplexMatrix>) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| Error::InvalidLoop("no coefficient matrices".into()))?;
        let n = first.nrows();
        if n < 2 {
            return Err(Error::InvalidLoop(format!("scale must be at least 2, got {n}")));
        }
        for (k, m) in coeffs.iter().enumerate() {
            if m.shape() != (n, n) {
                return Err(Error::InvalidLoop(format!(
                    "coefficient {k} has shape {:?}, expected ({n}, {n})",
                    m.shape()
                )));
            }
            if m.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
                return Err(Error::InvalidLoop(format!("coefficient {k} has non-finite entries")));
            }
        }
        while coeffs.last().is_some_and(|m| max_abs(m) < COEFF_EPS) {
            coeffs.pop();
        }
        Ok(Self { n, coeffs })
    }

    pub fn identity(n: usize) -> Self {
        Self { n, coeffs: vec![identity(n)] }
    }

    pub fn constant(v: ComplexMatrix) -> Result<Self> {
        Self::new(vec![v])
    }

    /// Scale N.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[ComplexMatrix] {
        &self.coeffs
    }

    /// A^{(k)}, zero past the top degree.
    pub fn coeff(&self, k: usize) -> ComplexMatrix {
        self.coeffs.get(k).cloned().unwrap_or_else(|| zeros(self.n, self.n))
    }

    /// One plus the top degree with a nonzero coefficient.
    pub fn genus(&self) -> Result<usize> {
        self.coeffs
            .iter()
            .rposition(|m| max_abs(m) >= COEFF_EPS)
            .map(|k| k + 1)
            .ok_or(Error::ZeroLoop)
    }

    /// Entry A_{i,j}(z) as a polynomial.
    pub fn entry(&self, i: usize, j: usize) -> ComplexPoly {
        ComplexPoly::new(self.coeffs.iter().map(|m| m[(i, j)]).collect())
    }

    pub fn eval(&self, z: C64) -> ComplexMatrix {
        matpoly_eval(self, z)
    }

    /// Pointwise product A(z)B(z).
    pub fn mul(&self, other: &MatrixLoop) -> Result<MatrixLoop> {
        if self.n != other.n {
            return Err(Error::InvalidLoop("scale mismatch in product".into()));
        }
        let len = self.coeffs.len() + other.coeffs.len() - 1;
        let mut out = vec![zeros(self.n, self.n); len.max(1)];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        MatrixLoop::new(out)
    }

    /// Left multiplication by a constant matrix.
    pub fn left_mul(&self, v: &ComplexMatrix) -> Result<MatrixLoop> {
        MatrixLoop::new(self.coeffs.iter().map(|m| v * m).collect())
    }

    /// Block-diagonal direct sum A ⊕ B.
    pub fn direct_sum(&self, other: &MatrixLoop) -> Result<MatrixLoop> {
        let n = self.n + other.n;
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(len);
        for k in 0..len {
            let mut m = zeros(n, n);
            m.view_mut((0, 0), (self.n, self.n)).copy_from(&self.coeff(k));
            m.view_mut((self.n, self.n), (other.n, other.n))
                .copy_from(&other.coeff(k));
            out.push(m);
        }
        MatrixLoop::new(out)
    }

    /// Direct sum with the 1×1 constant loop 1 in the top-left corner.
    pub fn one_plus(&self) -> Result<MatrixLoop> {
        let len = self.coeffs.len();
        let n = self.n + 1;
        let mut out = Vec::with_capacity(len);
        for k in 0..len {
            let mut m = zeros(n, n);
            if k == 0 {
                m[(0, 0)] = cr(1.0);
            }
            m.view_mut((1, 1), (self.n, self.n)).copy_from(&self.coeffs[k]);
            out.push(m);
        }
        MatrixLoop::new(out)
    }

    pub fn to_json(&self) -> LoopFile {
        LoopFile {
            n: self.n,
            coeffs: self
                .coeffs
                .iter()
                .map(|m| {
                    (0..self.n)
                        .map(|i| (0..self.n).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn from_json(f: &LoopFile) -> Result<MatrixLoop> {
        let n = f.n;
        let mut coeffs = Vec::with_capacity(f.coeffs.len());
        for (k, rows) in f.coeffs.iter().enumerate() {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::InvalidLoop(format!("coefficient {k} is not {n}x{n}")));
            }
            coeffs.push(ComplexMatrix::from_fn(n, n, |i, j| {
                let [re, im] = rows[i][j];
                c(re, im)
            }));
        }
        MatrixLoop::new(coeffs)
    }

    pub fn from_json_str(s: &str) -> Result<MatrixLoop> {
        let f: LoopFile = serde_json::from_str(s)?;
        MatrixLoop::from_json(&f)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("loop serializes")
    }
}

/// On-disk loop format: coefficient matrices as row-major `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LoopFile {
    #[serde(rename = "N")]
    pub n: usize,
    pub coeffs: Vec<Vec<Vec<[f64; 2]>>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub unitary_on_circle: bool,
    pub coefficient_orthogonality: bool,
    /// max over circle samples of max |A(z)*A(z) − I|
    pub unitarity_residual: f64,
    /// max over shifts n of max |Σ_k A^{(k)*}A^{(k+n)} − δ_{0n} I|
    pub orthogonality_residual: f64,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.unitary_on_circle && self.coefficient_orthogonality
    }

    pub fn worst_residual(&self) -> f64 {
        self.unitarity_residual.max(self.orthogonality_residual)
    }
}

/// Σ_k A^{(k)*} A^{(k+shift)}.
pub fn coefficient_correlation(a: &MatrixLoop, shift: usize) -> ComplexMatrix {
    let g = a.coeffs().len();
    let mut acc = zeros(a.n(), a.n());
    for k in 0..g.saturating_sub(shift) {
        acc += a.coeffs()[k].adjoint() * &a.coeffs()[k + shift];
    }
    acc
}

pub fn validate_loop(a: &MatrixLoop, tol: f64) -> ValidationReport {
    let unitarity_residual = (0..CIRCLE_SAMPLES)
        .map(|k| unitarity_residual(&a.eval(circle_point(k, CIRCLE_SAMPLES))))
        .fold(0.0, f64::max);
    let g = a.coeffs().len();
    let mut orthogonality_residual: f64 = 0.0;
    for shift in 0..g.max(1) {
        let corr = coefficient_correlation(a, shift);
        let target = if shift == 0 { identity(a.n()) } else { zeros(a.n(), a.n()) };
        orthogonality_residual = orthogonality_residual.max(max_abs_diff(&corr, &target));
    }
    ValidationReport {
        unitary_on_circle: unitarity_residual <= tol,
        coefficient_orthogonality: orthogonality_residual <= tol,
        unitarity_residual,
        orthogonality_residual,
    }
}

pub fn genus(a: &MatrixLoop) -> Result<usize> {
    a.genus()
}

/// A(z) = V · Π_j (I − P_j + z^{r_j} P_j).
#[derive(Clone, Debug)]
pub struct Factorization {
    pub v: ComplexMatrix,
    pub factors: Vec<(ComplexMatrix, u32)>,
    /// Coefficientwise max deviation of the rebuilt loop from the source.
    pub residual: f64,
}

impl Factorization {
    /// Degree-one projections Q_0, Q_1, … with A(z) = V Π (Q_j^⊥ + z Q_j).
    pub fn ledger(&self) -> Vec<ComplexMatrix> {
        self.factors
            .iter()
            .flat_map(|(p, r)| std::iter::repeat_n(p.clone(), *r as usize))
            .collect()
    }

    pub fn rebuild(&self) -> Result<MatrixLoop> {
        build_loop(&self.v, &self.factors)
    }
}

/// The elementary loop I − P + z^r P.
pub fn elementary_factor(p: &ComplexMatrix, r: u32) -> Result<MatrixLoop> {
    let n = p.nrows();
    let mut coeffs = vec![zeros(n, n); r as usize + 1];
    coeffs[0] = identity(n) - p;
    coeffs[r as usize] += p;
    MatrixLoop::new(coeffs)
}

pub fn build_loop(v: &ComplexMatrix, factors: &[(ComplexMatrix, u32)]) -> Result<MatrixLoop> {
    if !v.is_square() {
        return Err(Error::InvalidLoop("V must be square".into()));
    }
    let res = unitarity_residual(v);
    if res > LOOP_TOL {
        return Err(Error::NotUnitary { residual: res });
    }
    let mut acc = MatrixLoop::constant(v.clone())?;
    for (p, r) in factors {
        if p.shape() != v.shape() {
            return Err(Error::InvalidLoop("factor shape differs from V".into()));
        }
        let pres = projection_residual(p);
        if pres > LOOP_TOL {
            return Err(Error::NotProjection { residual: pres });
        }
        acc = acc.mul(&elementary_factor(p, *r)?)?;
    }
    Ok(acc)
}

fn max_coeff_diff(a: &MatrixLoop, b: &MatrixLoop) -> f64 {
    let len = a.coeffs().len().max(b.coeffs().len());
    (0..len)
        .map(|k| max_abs_diff(&a.coeff(k), &b.coeff(k)))
        .fold(0.0, f64::max)
}

/// Peel degree-one factors off the right until a constant remains.
///
/// At each step Q projects onto the row space of the top coefficient; then
/// A(z)(Q^⊥ + z^{-1}Q) is again a polynomial loop of one lower degree.
pub fn factorize(a: &MatrixLoop) -> Result<Factorization> {
    let n = a.n();
    let mut cur: Vec<ComplexMatrix> = a.coeffs().to_vec();
    let mut peeled: Vec<ComplexMatrix> = Vec::new();
    if cur.is_empty() {
        return Err(Error::ZeroLoop);
    }
    while cur.len() > 1 {
        let top = cur.last().expect("nonempty");
        let q = range_projection(&top.adjoint(), LOOP_TOL);
        if q.trace().re < 0.5 {
            return Err(Error::FactorizationFailed { residual: max_abs(top) });
        }
        let qp = identity(n) - &q;
        // The z^{-1} term A^{(0)}Q must vanish for a unitary loop.
        let leak = max_abs(&(&cur[0] * &q));
        if leak > REBUILD_TOL {
            return Err(Error::FactorizationFailed { residual: leak });
        }
        let d = cur.len() - 1;
        let mut next = Vec::with_capacity(d);
        for k in 0..d {
            next.push(&cur[k] * &qp + &cur[k + 1] * &q);
        }
        cur = next;
        peeled.push(q);
    }
    let v = cur.pop().expect("constant term");
    peeled.reverse();
    let mut factors: Vec<(ComplexMatrix, u32)> = Vec::new();
    for q in peeled {
        match factors.last_mut() {
            Some((p, r)) if max_abs_diff(p, &q) < LOOP_TOL => *r += 1,
            _ => factors.push((q, 1)),
        }
    }
    let vres = unitarity_residual(&v);
    if vres > REBUILD_TOL {
        return Err(Error::FactorizationFailed { residual: vres });
    }
    let rebuilt = build_loop(&v, &factors)?;
    let residual = max_coeff_diff(&rebuilt, a);
    if residual > REBUILD_TOL {
        return Err(Error::FactorizationFailed { residual });
    }
    Ok(Factorization { v, factors, residual })
}

/// Point (θ, ρ) of the two-angle family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoParamPoint {
    pub theta: f64,
    pub rho: f64,
}

impl TwoParamPoint {
    pub fn new(theta: f64, rho: f64) -> Self {
        Self { theta, rho }
    }
}

/// Rank-one projection onto (cos θ, sin θ).
pub fn angle_projection(theta: f64) -> ComplexMatrix {
    let (s, co) = theta.sin_cos();
    linalg::from_real_rows(2, 2, &[co * co, co * s, co * s, s * s])
}

/// (1/√2)[[1, 1], [1, −1]]
pub fn hadamard() -> ComplexMatrix {
    linalg::from_real_rows(2, 2, &[1.0, 1.0, 1.0, -1.0]).scale(FRAC_1_SQRT_2)
}

/// A(z) = V (Q_θ^⊥ + z Q_θ)(Q_ρ^⊥ + z Q_ρ) with V the normalized Hadamard matrix.
pub fn two_param_loop(pt: TwoParamPoint) -> MatrixLoop {
    build_loop(
        &hadamard(),
        &[(angle_projection(pt.theta), 1), (angle_projection(pt.rho), 1)],
    )
    .expect("two-angle loop is well formed")
}

/// Closed-form lowpass coefficients a_0…a_5 of the two-angle family.
pub fn two_param_coeffs(pt: TwoParamPoint) -> [f64; 6] {
    let (s2t, c2t) = (2.0 * pt.theta).sin_cos();
    let (s2r, c2r) = (2.0 * pt.rho).sin_cos();
    let (sd, cd) = (2.0 * pt.theta - 2.0 * pt.rho).sin_cos();
    [
        0.25 * (1.0 - c2t - s2t - c2r - s2r + cd + sd),
        0.25 * (1.0 + c2t - s2t + c2r - s2r + cd - sd),
        0.5 * (1.0 - cd - sd),
        0.5 * (1.0 - cd + sd),
        0.25 * (1.0 + c2t + s2t + c2r + s2r + cd + sd),
        0.25 * (1.0 - c2t + s2t - c2r + s2r + cd - sd),
    ]
}

/// Whether min(1,|z|²)^{g−1} I ≤ A(z)*A(z) ≤ max(1,|z|²)^{g−1} I at every sample.
pub fn norm_bound_check(a: &MatrixLoop, zs: &[C64]) -> Result<bool> {
    let g = a.genus()? as i32;
    for &z in zs {
        let (lo, hi) = norm_bounds(z, g);
        let (emin, emax) = gram_eigen_range(a, z);
        let slack = 1e-9 * hi;
        if emin < lo - slack || emax > hi + slack {
            return Ok(false);
        }
    }
    Ok(true)
}

/// (min(1,|z|²)^{g−1}, max(1,|z|²)^{g−1})
pub fn norm_bounds(z: C64, g: i32) -> (f64, f64) {
    let r2 = z.norm_sqr();
    (r2.min(1.0).powi(g - 1), r2.max(1.0).powi(g - 1))
}

/// Smallest and largest eigenvalue of A(z)*A(z).
pub fn gram_eigen_range(a: &MatrixLoop, z: C64) -> (f64, f64) {
    let m = a.eval(z);
    let ev = linalg::hermitian_eigenvalues(&(m.adjoint() * m));
    (ev[0], ev[ev.len() - 1])
}

#[derive(Clone, Debug, PartialEq)]
pub enum DiagonalStructure {
    /// A(z) = V diag(z^{n_0}, …, z^{n_{N−1}}).
    FullyDiagonal { v: ComplexMatrix, exponents: Vec<usize> },
    /// A(z) = V (D_0(z) ⊕ B(z) ⊕ D_1(z)) with D_0, D_1 diagonal of sizes d0, d1.
    DiagonalCorner {
        d0: usize,
        b: usize,
        d1: usize,
        /// Exponents of the monomial columns in the leading and trailing blocks.
        exponents_d0: Vec<usize>,
        exponents_d1: Vec<usize>,
        /// Monomial columns strictly inside the middle block (only possible for N ≥ 3).
        interior_monomial_columns: Vec<usize>,
    },
    PurelyNonDiagonal,
}

/// If column j of A(z) is z^m times a constant vector, return (m, vector).
fn monomial_column(a: &MatrixLoop, j: usize) -> Option<(usize, Vec<C64>)> {
    let mut hit = None;
    for (k, m) in a.coeffs().iter().enumerate() {
        let col = m.column(j);
        if col.norm() > LOOP_TOL {
            if hit.is_some() {
                return None;
            }
            hit = Some((k, col.iter().copied().collect()));
        }
    }
    hit
}

pub fn detect_diagonal_structure(a: &MatrixLoop) -> DiagonalStructure {
    let n = a.n();
    let cols: Vec<Option<(usize, Vec<C64>)>> = (0..n).map(|j| monomial_column(a, j)).collect();
    if cols.iter().all(Option::is_some) {
        let mut v = zeros(n, n);
        let mut exponents = Vec::with_capacity(n);
        for (j, col) in cols.iter().enumerate() {
            let (e, vec) = col.as_ref().expect("all monomial");
            exponents.push(*e);
            for i in 0..n {
                v[(i, j)] = vec[i];
            }
        }
        return DiagonalStructure::FullyDiagonal { v, exponents };
    }
    let d0 = cols.iter().take_while(|c| c.is_some()).count();
    let d1 = cols.iter().rev().take_while(|c| c.is_some()).count();
    if d0 == 0 && d1 == 0 {
        return DiagonalStructure::PurelyNonDiagonal;
    }
    let exp = |j: usize| cols[j].as_ref().map(|(e, _)| *e).expect("monomial");
    let interior = (d0..n - d1).filter(|&j| cols[j].is_some()).collect();
    DiagonalStructure::DiagonalCorner {
        d0,
        b: n - d0 - d1,
        d1,
        exponents_d0: (0..d0).map(exp).collect(),
        exponents_d1: (n - d1..n).map(exp).collect(),
        interior_monomial_columns: interior,
    }
}

/// Handy named loops.
pub mod examples {
    use super::*;

    /// (1/√2)[[1, z], [z, −z²]]
    pub fn loop_b() -> MatrixLoop {
        let s = FRAC_1_SQRT_2;
        MatrixLoop::new(vec![
            linalg::from_real_rows(2, 2, &[s, 0.0, 0.0, 0.0]),
            linalg::from_real_rows(2, 2, &[0.0, s, s, 0.0]),
            linalg::from_real_rows(2, 2, &[0.0, 0.0, 0.0, -s]),
        ])
        .expect("well formed")
    }

    /// V diag(1, z) with V the Hadamard matrix.
    pub fn hadamard_diag_1_z() -> MatrixLoop {
        build_loop(&hadamard(), &[(linalg::from_real_rows(2, 2, &[0.0, 0.0, 0.0, 1.0]), 1)])
            .expect("well formed")
    }

    /// The constant Hadamard loop (the Haar filter pair).
    pub fn haar() -> MatrixLoop {
        MatrixLoop::constant(hadamard()).expect("well formed")
    }
}
