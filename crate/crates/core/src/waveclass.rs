//! Vanishing moments, the Cohen cycle test, the tight-frame census, and
//! (θ, ρ) parameter scans of the two-angle family.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::cascade::{divergence_flags, DivergenceFlags};
use crate::cuntzrep::{classify, lambda0, Classification};
use crate::error::{Error, Result};
use crate::linalg::{c, C64};
use crate::loopgroup::{two_param_coeffs, two_param_loop, MatrixLoop, TwoParamPoint};
use crate::polyalg::ComplexPoly;

/// Relative tolerance of the cycle containment test.
pub const CYCLE_TOL: f64 = 1e-8;
/// Relative tolerance on the (1+z)-division remainder.
pub const MOMENT_TOL: f64 = 1e-9;
/// Coefficients below this are treated as zero for the embedding flags.
pub const EMBED_TOL: f64 = 1e-10;
pub const MAX_CYCLE_LEN: usize = 6;

/// Largest p with (1+z)^p | m0, by repeated synthetic division.
/// The remainder of each division is compared against `tol`·max|coeff|.
pub fn moment_order(m0: &ComplexPoly, tol: f64) -> usize {
    let scale = m0.max_abs_coeff().max(f64::MIN_POSITIVE);
    let mut p = 0;
    let mut cur = m0.coeffs().to_vec();
    while cur.len() > 1 {
        // divide by (z + 1): q_{k-1} = c_k − q_k, highest first
        let n = cur.len() - 1;
        let mut q = vec![C64::new(0.0, 0.0); n];
        let mut carry = C64::new(0.0, 0.0);
        for k in (1..=n).rev() {
            carry = cur[k] - carry;
            q[k - 1] = carry;
        }
        let rem = cur[0] - carry;
        if rem.norm() >= tol * scale {
            break;
        }
        p += 1;
        cur = q;
    }
    p
}

/// Orbit of z ↦ z² through roots of unity of order 2^k − 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cycle {
    /// Each point e^{2πi·num/den} as a reduced fraction (num, den).
    pub fractions: Vec<(u64, u64)>,
    pub length: usize,
    /// 2^k − 1
    pub root_order: u64,
}

impl Cycle {
    pub fn points(&self) -> Vec<C64> {
        self.fractions
            .iter()
            .map(|&(p, q)| C64::from_polar(1.0, 2.0 * PI * p as f64 / q as f64))
            .collect()
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn reduce(p: u64, q: u64) -> (u64, u64) {
    let d = gcd(p, q);
    (p / d, q / d)
}

/// All nontrivial cycles of the squaring map of length ≤ `max_len`, shortest
/// first, each starting at its smallest fraction.
pub fn enumerate_cycles(max_len: usize) -> Result<Vec<Cycle>> {
    if max_len > MAX_CYCLE_LEN {
        return Err(Error::Unsupported(format!("cycle length {max_len} > {MAX_CYCLE_LEN}")));
    }
    let mut out = Vec::new();
    for k in 1..=max_len {
        let m = (1u64 << k) - 1;
        let mut seen = vec![false; m as usize];
        for t in 1..m {
            if seen[t as usize] {
                continue;
            }
            let mut orbit = vec![t];
            let mut s = (2 * t) % m;
            while s != t {
                orbit.push(s);
                s = (2 * s) % m;
            }
            for &o in &orbit {
                seen[o as usize] = true;
            }
            // exact period k only; shorter orbits were found at their own k
            if orbit.len() == k {
                out.push(Cycle {
                    fractions: orbit.iter().map(|&o| reduce(o, m)).collect(),
                    length: k,
                    root_order: m,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum CohenClass {
    Strict,
    TightFrameOnly(Cycle),
}

impl CohenClass {
    pub fn cycle_length(&self) -> Option<usize> {
        match self {
            CohenClass::Strict => None,
            CohenClass::TightFrameOnly(c) => Some(c.length),
        }
    }

    pub fn label(&self) -> String {
        match self {
            CohenClass::Strict => "strict".into(),
            CohenClass::TightFrameOnly(c) => format!("tight_frame:{}", c.length),
        }
    }
}

/// Orthonormality of the translates fails exactly when the zero set of
/// m0(−z) contains a nontrivial cycle; a cycle cannot be longer than deg m0.
pub fn cohen_classify(m0: &ComplexPoly) -> Result<CohenClass> {
    let deg = m0.degree().ok_or(Error::ZeroPolynomial)?;
    let scale = m0.max_abs_coeff();
    let cycles = enumerate_cycles(deg.min(MAX_CYCLE_LEN))?;
    for cyc in cycles {
        let hit = cyc
            .points()
            .iter()
            .all(|&z| m0.eval(-z).norm() < CYCLE_TOL * scale);
        if hit {
            return Ok(CohenClass::TightFrameOnly(cyc));
        }
    }
    Ok(CohenClass::Strict)
}

/// m0(z) = Σ a_k z^k / √2 for real family coefficients.
pub fn lowpass_poly(a: &[f64]) -> ComplexPoly {
    ComplexPoly::new(a.iter().map(|&x| c(x * FRAC_1_SQRT_2, 0.0)).collect())
}

/// λ0 of the two-angle loop in closed form: |Q_θ^⊥ Q_ρ^⊥ e0|².
pub fn two_param_lambda0(pt: TwoParamPoint) -> f64 {
    let v = pt.rho.sin() * (pt.theta - pt.rho).cos();
    v * v
}

#[derive(Clone, Debug)]
pub struct CensusRecord {
    pub coeffs: [f64; 6],
    pub witness: TwoParamPoint,
    pub lambda0: f64,
    pub cycle_length: usize,
    pub classification: Classification,
    pub loop_: MatrixLoop,
}

/// The four coefficient rows of the family that give tight frames only.
pub const CENSUS_ROWS: [[f64; 6]; 4] = [
    [0.0, 0.0, 1.0, 0.0, 0.0, 1.0],
    [1.0, 0.0, 0.0, 1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0, 1.0, 0.0],
    [1.0, 0.0, 0.0, 0.0, 0.0, 1.0],
];

/// Solve for a witness (θ, ρ) of each census row on the lattice (π/4)·ℤ² ∩ [0, π)².
pub fn tight_frame_census() -> Result<Vec<CensusRecord>> {
    let lattice: Vec<f64> = (0..4).map(|k| k as f64 * FRAC_PI_4).collect();
    CENSUS_ROWS
        .iter()
        .map(|row| {
            let witness = lattice
                .iter()
                .flat_map(|&t| lattice.iter().map(move |&r| TwoParamPoint::new(t, r)))
                .find(|&pt| {
                    two_param_coeffs(pt)
                        .iter()
                        .zip(row)
                        .all(|(x, y)| (x - y).abs() < 1e-10)
                })
                .ok_or_else(|| Error::Unsupported(format!("no lattice witness for {row:?}")))?;
            let coeffs = two_param_coeffs(witness);
            let loop_ = two_param_loop(witness);
            let cycle_length = cohen_classify(&lowpass_poly(&coeffs))?
                .cycle_length()
                .ok_or_else(|| Error::Unsupported(format!("row {row:?} is not tight-frame-only")))?;
            Ok(CensusRecord {
                coeffs,
                witness,
                lambda0: lambda0(&loop_),
                cycle_length,
                classification: classify(&loop_)?,
                loop_,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbeddingFlags {
    /// a4 = a5 = 0: support [0, 3]
    pub embed0_3: bool,
    /// a0 = a5 = 0: support [1, 4]
    pub embed1_4: bool,
    /// a0 = a1 = 0: support [2, 5]
    pub embed2_5: bool,
}

pub fn embedding_flags(a: &[f64; 6]) -> EmbeddingFlags {
    let z = |k: usize| a[k].abs() < EMBED_TOL;
    EmbeddingFlags {
        embed0_3: z(4) && z(5),
        embed1_4: z(0) && z(5),
        embed2_5: z(0) && z(1),
    }
}

/// A line of the (θ, ρ) plane on which the family reduces to a four-tap one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmbeddingLine {
    /// Support interval of φ on the line.
    pub support: (u8, u8),
    /// Which angle is fixed, and its value.
    pub fixed: FixedAngle,
    /// Open intervals of the free angle on which φ is known to be continuous.
    /// Recorded as reference data only; nothing here verifies continuity.
    pub continuous: [(f64, f64); 2],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FixedAngle {
    Theta(f64),
    Rho(f64),
}

pub const EMBEDDING_LINES: [EmbeddingLine; 3] = [
    EmbeddingLine {
        support: (0, 3),
        fixed: FixedAngle::Theta(3.0 * FRAC_PI_4),
        continuous: [(0.0, FRAC_PI_4), (3.0 * FRAC_PI_4, PI)],
    },
    EmbeddingLine {
        support: (1, 4),
        fixed: FixedAngle::Rho(0.0),
        continuous: [(FRAC_PI_4, 2.0 * FRAC_PI_4), (2.0 * FRAC_PI_4, 3.0 * FRAC_PI_4)],
    },
    EmbeddingLine {
        support: (2, 5),
        fixed: FixedAngle::Theta(FRAC_PI_4),
        continuous: [(0.0, FRAC_PI_4), (3.0 * FRAC_PI_4, PI)],
    },
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRecord {
    pub theta: f64,
    pub rho: f64,
    pub coeffs: [f64; 6],
    pub lambda0: f64,
    pub flags: FlagsRecord,
    pub moment_order: usize,
    pub cohen: CohenClass,
    pub embedding: EmbeddingFlags,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FlagsRecord {
    pub diverges_left: bool,
    pub diverges_right: bool,
    pub marginal: bool,
}

impl From<DivergenceFlags> for FlagsRecord {
    fn from(f: DivergenceFlags) -> Self {
        Self { diverges_left: f.diverges_left, diverges_right: f.diverges_right, marginal: f.marginal }
    }
}

pub fn scan_point(pt: TwoParamPoint) -> Result<ScanRecord> {
    let coeffs = two_param_coeffs(pt);
    let m0 = lowpass_poly(&coeffs);
    Ok(ScanRecord {
        theta: pt.theta,
        rho: pt.rho,
        coeffs,
        lambda0: two_param_lambda0(pt),
        flags: divergence_flags(&coeffs).into(),
        moment_order: moment_order(&m0, MOMENT_TOL),
        cohen: cohen_classify(&m0)?,
        embedding: embedding_flags(&coeffs),
    })
}

/// Number of samples x0 + i·step in the half-open range [x0, x1).
pub fn axis_len(x0: f64, x1: f64, step: f64) -> usize {
    let n = (x1 - x0) / step;
    (n - 1e-9).ceil().max(0.0) as usize
}

/// One record per cell of [θ0, θ1) × [ρ0, ρ1); θ is the outer index.
/// Cells are computed in parallel on the current rayon pool and returned
/// in index order.
pub fn grid_scan(theta: (f64, f64), rho: (f64, f64), step: f64) -> Result<Vec<ScanRecord>> {
    if step.is_nan() || step <= 0.0 || !step.is_finite() {
        return Err(Error::Unsupported(format!("scan step must be positive, got {step}")));
    }
    let nt = axis_len(theta.0, theta.1, step);
    let nr = axis_len(rho.0, rho.1, step);
    (0..nt * nr)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / nr, idx % nr);
            scan_point(TwoParamPoint::new(
                theta.0 + i as f64 * step,
                rho.0 + j as f64 * step,
            ))
        })
        .collect()
}

pub const SCAN_HEADER: &str = "theta,rho,a0,a1,a2,a3,a4,a5,lambda0,div_left,div_right,marginal,moment_order,cohen,embed0_3,embed1_4,embed2_5";

/// Float with 17 significant digits, trailing zeros of the mantissa removed.
pub fn fmt_f64(x: f64) -> String {
    let s = format!("{x:.16e}");
    let (mant, exp) = s.split_once('e').expect("exponent form");
    let mant = if mant.contains('.') {
        mant.trim_end_matches('0').trim_end_matches('.')
    } else {
        mant
    };
    if exp == "0" {
        mant.to_string()
    } else {
        format!("{mant}e{exp}")
    }
}

fn b01(b: bool) -> u8 {
    b as u8
}

pub fn scan_csv_row(r: &ScanRecord) -> String {
    let mut s = String::new();
    let _ = write!(s, "{},{}", fmt_f64(r.theta), fmt_f64(r.rho));
    for a in r.coeffs {
        let _ = write!(s, ",{}", fmt_f64(a));
    }
    let _ = write!(
        s,
        ",{},{},{},{},{},{},{},{},{}",
        fmt_f64(r.lambda0),
        b01(r.flags.diverges_left),
        b01(r.flags.diverges_right),
        b01(r.flags.marginal),
        r.moment_order,
        r.cohen.label(),
        b01(r.embedding.embed0_3),
        b01(r.embedding.embed1_4),
        b01(r.embedding.embed2_5),
    );
    s
}

pub fn scan_csv(records: &[ScanRecord]) -> String {
    let mut out = String::from(SCAN_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&scan_csv_row(r));
        out.push('\n');
    }
    out
}

/// The moment curve cos2θ + cos2ρ = 1/2, parametrized by θ over the part
/// where it exists, ρ ∈ [0, π/2].
pub fn moment_curve_point(theta: f64) -> Option<TwoParamPoint> {
    let c2r = 0.5 - (2.0 * theta).cos();
    (c2r.abs() <= 1.0).then(|| TwoParamPoint::new(theta, 0.5 * c2r.acos()))
}

/// The point of the family with three vanishing moments in [0, π/2]².
pub fn ultra_smooth_point() -> TwoParamPoint {
    let s = (5.0f64 / 32.0).sqrt();
    TwoParamPoint::new(s.sqrt().acos(), (1.25 - s).sqrt().acos())
}

/// Reduce (θ, ρ) into [0, π)².
pub fn canonical_angles(pt: TwoParamPoint) -> TwoParamPoint {
    TwoParamPoint::new(pt.theta.rem_euclid(PI), pt.rho.rem_euclid(PI))
}
