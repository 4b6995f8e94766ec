//! Subband filters m_0…m_{N−1}, their polyphase loop, and the sequence-space
//! isometries S_j.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, cr, unitarity_residual, zeros, ComplexMatrix, C64};
use crate::loopgroup::{circle_point, validate_loop, MatrixLoop, CIRCLE_SAMPLES, LOOP_TOL};
use crate::polyalg::ComplexPoly;

/// Filter bank at scale N: m_j(z) = Σ_k A_{j,k}(z^N) z^k.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterBank {
    n: usize,
    m: Vec<ComplexPoly>,
    /// Filter length N·g (coefficient vectors are padded to this length).
    taps: usize,
}

impl FilterBank {
    pub fn new(n: usize, m: Vec<ComplexPoly>) -> Result<Self> {
        if n < 2 || m.len() != n {
            return Err(Error::InvalidFilter(format!(
                "expected {n} filters at scale {n}, got {}",
                m.len()
            )));
        }
        let longest = m.iter().map(|p| p.coeffs().len()).max().unwrap_or(0).max(1);
        let taps = longest.div_ceil(n) * n;
        Ok(Self { n, m, taps })
    }

    /// Complete a bare lowpass sequence a_k (with Σ a_k = 2) into a two-band
    /// bank using the highpass rule.
    pub fn from_lowpass(a: &[C64]) -> Result<Self> {
        let b = highpass_from_lowpass(a)?;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let m0 = ComplexPoly::new(a.iter().map(|x| x * s).collect());
        let m1 = ComplexPoly::new(b.iter().map(|x| x * s).collect());
        let mut fb = Self::new(2, vec![m0, m1])?;
        fb.taps = fb.taps.max(a.len());
        Ok(fb)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> &[ComplexPoly] {
        &self.m
    }

    pub fn taps(&self) -> usize {
        self.taps
    }

    /// Genus implied by the filter length.
    pub fn genus(&self) -> usize {
        self.taps / self.n
    }

    /// Filter j as a coefficient vector of length N·g.
    pub fn filter_coeffs(&self, j: usize) -> Vec<C64> {
        self.m[j].padded(self.taps)
    }

    /// a_k = √N × (coefficients of m_0).
    pub fn lowpass(&self) -> Vec<C64> {
        let s = (self.n as f64).sqrt();
        self.filter_coeffs(0).into_iter().map(|x| x * s).collect()
    }

    /// √N × (coefficients of m_j).
    pub fn scaled(&self, j: usize) -> Vec<C64> {
        let s = (self.n as f64).sqrt();
        self.filter_coeffs(j).into_iter().map(|x| x * s).collect()
    }

    /// Real parts of the lowpass coefficients (for real families).
    pub fn lowpass_real(&self) -> Vec<f64> {
        self.lowpass().iter().map(|x| x.re).collect()
    }

    /// The modulation matrix (1/√N)(m_j(e^{2πik/N} z))_{j,k}.
    pub fn modulation_matrix(&self, z: C64) -> ComplexMatrix {
        let n = self.n;
        let s = 1.0 / (n as f64).sqrt();
        ComplexMatrix::from_fn(n, n, |j, k| self.m[j].eval(circle_point(k, n) * z) * s)
    }

    pub fn to_json(&self) -> FilterFile {
        FilterFile {
            n: self.n,
            m: (0..self.n)
                .map(|j| self.filter_coeffs(j).iter().map(|x| [x.re, x.im]).collect())
                .collect(),
        }
    }

    pub fn from_json(f: &FilterFile) -> Result<Self> {
        let m = f
            .m
            .iter()
            .map(|v| ComplexPoly::new(v.iter().map(|&[re, im]| c(re, im)).collect()))
            .collect();
        let mut fb = Self::new(f.n, m)?;
        let longest = f.m.iter().map(Vec::len).max().unwrap_or(0);
        fb.taps = fb.taps.max(longest.div_ceil(f.n) * f.n);
        Ok(fb)
    }
}

/// On-disk filter format: per-filter coefficient lists of `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FilterFile {
    #[serde(rename = "N")]
    pub n: usize,
    pub m: Vec<Vec<[f64; 2]>>,
}

pub fn filters_from_loop(a: &MatrixLoop) -> FilterBank {
    let n = a.n();
    let g = a.coeffs().len().max(1);
    let m = (0..n)
        .map(|j| {
            let mut v = vec![cr(0.0); n * g];
            for (p, ap) in a.coeffs().iter().enumerate() {
                for k in 0..n {
                    v[n * p + k] = ap[(j, k)];
                }
            }
            ComplexPoly::new(v)
        })
        .collect();
    FilterBank { n, m, taps: n * g }
}

/// Polyphase split: A^{(p)}_{j,k} is the coefficient of z^{Np+k} in m_j.
pub fn loop_from_filters(fb: &FilterBank) -> Result<MatrixLoop> {
    let n = fb.n();
    let g = fb.genus().max(1);
    let coeffs = (0..g)
        .map(|p| ComplexMatrix::from_fn(n, n, |j, k| fb.m()[j].coeff(n * p + k)))
        .collect();
    let a = MatrixLoop::new(coeffs)?;
    let report = validate_loop(&a, LOOP_TOL);
    if !report.is_valid() {
        return Err(Error::InvalidFilter(format!(
            "polyphase matrix is not unitary (residual {:.3e})",
            report.worst_residual()
        )));
    }
    Ok(a)
}

/// b_k = (−1)^k conj(a_{2g−1−k}).
pub fn highpass_from_lowpass(a: &[C64]) -> Result<Vec<C64>> {
    if !a.len().is_multiple_of(2) || a.is_empty() {
        return Err(Error::OddLength(a.len()));
    }
    let l = a.len();
    Ok((0..l)
        .map(|k| {
            let v = a[l - 1 - k].conj();
            if k % 2 == 0 {
                v
            } else {
                -v
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct QmfReport {
    /// max over circle samples of |Σ_k |m_0(z e^{2πik/N})|² − N|
    pub circle_residual: f64,
    /// |m_0(1) − √N|
    pub dc_residual: f64,
    /// max_l |Σ_k a_{k+Nl} conj(a_k) − N δ_{0l}|
    pub orthogonality_residual: f64,
}

impl QmfReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.circle_residual <= tol && self.dc_residual <= tol && self.orthogonality_residual <= tol
    }
}

/// Lowpass quadrature-mirror conditions on the first filter of a bank.
pub fn qmf_check(fb: &FilterBank) -> QmfReport {
    let n = fb.n();
    let nf = n as f64;
    let m0 = &fb.m()[0];
    let circle_residual = (0..CIRCLE_SAMPLES)
        .map(|s| {
            let z = circle_point(s, CIRCLE_SAMPLES);
            let tot: f64 = (0..n).map(|k| m0.eval(z * circle_point(k, n)).norm_sqr()).sum();
            (tot - nf).abs()
        })
        .fold(0.0, f64::max);
    let dc_residual = (m0.eval(cr(1.0)) - cr(nf.sqrt())).norm();
    let a = fb.lowpass();
    let len = a.len() as i64;
    let mut orthogonality_residual: f64 = 0.0;
    let mut l = 0i64;
    while l * n as i64 <= len {
        let mut acc = cr(0.0);
        for k in 0..len {
            let idx = k + l * n as i64;
            if (0..len).contains(&idx) {
                acc += a[idx as usize] * a[k as usize].conj();
            }
        }
        let target = if l == 0 { nf } else { 0.0 };
        orthogonality_residual = orthogonality_residual.max((acc - cr(target)).norm());
        l += 1;
    }
    QmfReport { circle_residual, dc_residual, orthogonality_residual }
}

/// Max deviation from unitarity of the modulation matrix over circle samples.
pub fn modulation_unitarity_residual(fb: &FilterBank, samples: usize) -> f64 {
    (0..samples)
        .map(|s| unitarity_residual(&fb.modulation_matrix(circle_point(s, samples))))
        .fold(0.0, f64::max)
}

/// Finitely supported two-sided sequence.
pub type SparseSeq = BTreeMap<i64, C64>;

fn insert_add(out: &mut SparseSeq, k: i64, v: C64) {
    *out.entry(k).or_insert(cr(0.0)) += v;
}

/// (S_j ξ)_k = Σ_l c_{k−lN} ξ_l with c the coefficients of m_j.
pub fn apply_s(fb: &FilterBank, j: usize, xi: &SparseSeq) -> SparseSeq {
    let n = fb.n() as i64;
    let cj = fb.filter_coeffs(j);
    let mut out = SparseSeq::new();
    for (&l, &x) in xi {
        for (p, &cp) in cj.iter().enumerate() {
            if cp != cr(0.0) {
                insert_add(&mut out, p as i64 + l * n, cp * x);
            }
        }
    }
    out
}

/// (S_j* η)_l = Σ_k conj(c_{k−lN}) η_k.
pub fn apply_s_adjoint(fb: &FilterBank, j: usize, eta: &SparseSeq) -> SparseSeq {
    let n = fb.n() as i64;
    let cj = fb.filter_coeffs(j);
    let mut out = SparseSeq::new();
    for (&k, &x) in eta {
        for (p, &cp) in cj.iter().enumerate() {
            let d = k - p as i64;
            if cp != cr(0.0) && d.rem_euclid(n) == 0 {
                insert_add(&mut out, d.div_euclid(n), cp.conj() * x);
            }
        }
    }
    out
}

fn power(fb: &FilterBank, xi: &SparseSeq, times: usize, adjoint: bool) -> SparseSeq {
    let mut cur = xi.clone();
    for _ in 0..times {
        cur = if adjoint { apply_s_adjoint(fb, 0, &cur) } else { apply_s(fb, 0, &cur) };
    }
    cur
}

pub fn seq_sub(a: &SparseSeq, b: &SparseSeq) -> SparseSeq {
    let mut out = a.clone();
    for (&k, &v) in b {
        insert_add(&mut out, k, -v);
    }
    out
}

pub fn seq_add(a: &SparseSeq, b: &SparseSeq) -> SparseSeq {
    let mut out = a.clone();
    for (&k, &v) in b {
        insert_add(&mut out, k, v);
    }
    out
}

pub fn seq_norm(a: &SparseSeq) -> f64 {
    a.values().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn seq_inner(a: &SparseSeq, b: &SparseSeq) -> C64 {
    a.iter()
        .filter_map(|(k, x)| b.get(k).map(|y| x.conj() * y))
        .sum()
}

/// P_n ξ = (S_0^{n−1} S_0*^{n−1} − S_0^n S_0*^n) ξ.
pub fn subband_projection(fb: &FilterBank, n: usize, xi: &SparseSeq) -> Result<SparseSeq> {
    if n == 0 {
        return Err(Error::InvalidFilter("subband index starts at 1".into()));
    }
    let upper = power(fb, &power(fb, xi, n - 1, true), n - 1, false);
    let lower = power(fb, &power(fb, xi, n, true), n, false);
    Ok(seq_sub(&upper, &lower))
}

/// S_0^n S_0*^n ξ
pub fn coarse_projection(fb: &FilterBank, n: usize, xi: &SparseSeq) -> SparseSeq {
    power(fb, &power(fb, xi, n, true), n, false)
}

#[derive(Clone, Debug)]
pub struct Filtration {
    /// Largest s such that z^s divides every m_i.
    pub s: usize,
    pub reduced: FilterBank,
    /// λ_0 of the polyphase loop of the input bank.
    pub lambda0: f64,
    /// The loop has the degenerate form V diag(1, b z^{g−1}) (λ_0 = 1).
    pub lambda0_is_one: bool,
}

/// Strip the common monomial factor z^s from all filters.
pub fn monomial_filtration(fb: &FilterBank) -> Result<Filtration> {
    let s = fb
        .m()
        .iter()
        .filter_map(ComplexPoly::valuation)
        .min()
        .unwrap_or(0);
    let m: Vec<ComplexPoly> = fb.m().iter().map(|p| p.unshift(s)).collect();
    let reduced = FilterBank::new(fb.n(), m)?;
    let a = loop_from_filters(fb)?;
    let lambda0: f64 = (0..a.n()).map(|i| a.coeff(0)[(i, 0)].norm_sqr()).sum();
    Ok(Filtration {
        s,
        reduced,
        lambda0,
        lambda0_is_one: (lambda0 - 1.0).abs() < LOOP_TOL,
    })
}

/// Dense matrix of S_j restricted to input indices `lo..=hi` (for tests and
/// diagnostics); rows indexed from `lo*N` to `hi*N + taps − 1`.
pub fn s_matrix(fb: &FilterBank, j: usize, lo: i64, hi: i64) -> (ComplexMatrix, i64) {
    let n = fb.n() as i64;
    let cj = fb.filter_coeffs(j);
    let row0 = lo * n;
    let rows = ((hi - lo) * n + cj.len() as i64) as usize;
    let cols = (hi - lo + 1) as usize;
    let mut m = zeros(rows, cols);
    for l in lo..=hi {
        for (p, &cp) in cj.iter().enumerate() {
            m[((l * n + p as i64 - row0) as usize, (l - lo) as usize)] += cp;
        }
    }
    (m, row0)
}
