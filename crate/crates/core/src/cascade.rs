//! Local cascade iteration for scaling and wavelet functions on dyadic grids.
//!
//! Level n holds φ^{(n)}(i·2^{-n}) for 0 ≤ i < q^{(n)}; values between grid
//! points are deliberately left undefined.

use std::ops::{Add, Mul};

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::loopgroup::{two_param_coeffs, TwoParamPoint};

/// q^{(n)} = (2g − 1)·2^n − 2(g − 1)
pub fn grid_size(g: usize, n: u32) -> usize {
    assert!(g >= 1);
    (2 * g - 1) * (1usize << n) - 2 * (g - 1)
}

/// Last grid point (q^{(n)} − 1)·2^{-n}.
pub fn grid_endpoint(g: usize, n: u32) -> f64 {
    (grid_size(g, n) - 1) as f64 / (1u64 << n) as f64
}

/// Values usable by the cascade: anything with +, × and a zero.
pub trait Scalar: Clone + Zero + Add<Output = Self> + Mul<Output = Self> {}
impl<T: Clone + Zero + Add<Output = T> + Mul<Output = T>> Scalar for T {}

#[derive(Clone, Debug, PartialEq)]
pub struct CascadeGrid<T> {
    pub g: usize,
    pub level: u32,
    pub values: Vec<T>,
}

impl<T: Scalar> CascadeGrid<T> {
    /// The level-0 grid [1].
    pub fn start(g: usize, one: T) -> Self {
        Self { g, level: 0, values: vec![one] }
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 / (1u64 << self.level) as f64
    }

    pub fn endpoint(&self) -> f64 {
        grid_endpoint(self.g, self.level)
    }

    /// Value at grid index i, zero outside the grid.
    pub fn at(&self, i: i64) -> T {
        if i < 0 {
            return T::zero();
        }
        self.values.get(i as usize).cloned().unwrap_or_else(T::zero)
    }
}

fn genus_of(a_len: usize) -> Result<usize> {
    if a_len == 0 || !a_len.is_multiple_of(2) {
        return Err(Error::OddLength(a_len));
    }
    Ok(a_len / 2)
}

/// One refinement: pad g−1 zeros on both sides, multiply each window of g
/// consecutive values by the g×2 matrix whose row r is (a_{2(g−1−r)}, a_{2(g−1−r)+1}),
/// and flatten the results.
pub fn cascade_step<T: Scalar>(grid: &CascadeGrid<T>, a: &[T]) -> Result<CascadeGrid<T>> {
    let g = genus_of(a.len())?;
    if g != grid.g {
        return Err(Error::LengthMismatch { expected: 2 * grid.g, got: a.len() });
    }
    let q = grid_size(g, grid.level);
    if grid.values.len() != q {
        return Err(Error::LengthMismatch { expected: q, got: grid.values.len() });
    }
    let mut padded = vec![T::zero(); g - 1];
    padded.extend(grid.values.iter().cloned());
    padded.extend(std::iter::repeat_n(T::zero(), g - 1));
    let windows = q + g - 1;
    let mut out = Vec::with_capacity(2 * windows);
    for w in 0..windows {
        for e in 0..2 {
            let mut acc = T::zero();
            for r in 0..g {
                let v = padded[w + r].clone();
                acc = acc + v * a[2 * (g - 1 - r) + e].clone();
            }
            out.push(acc);
        }
    }
    debug_assert_eq!(out.len(), grid_size(g, grid.level + 1));
    Ok(CascadeGrid { g, level: grid.level + 1, values: out })
}

/// Iterate `cascade_step` n times starting from [1].
pub fn cascade_run<T: Scalar>(a: &[T], one: T, n: u32) -> Result<CascadeGrid<T>> {
    let g = genus_of(a.len())?;
    let mut grid = CascadeGrid::start(g, one);
    for _ in 0..n {
        grid = cascade_step(&grid, a)?;
    }
    Ok(grid)
}

/// Real coefficients (the two-angle family).
pub fn cascade_real(a: &[f64], n: u32) -> Result<CascadeGrid<f64>> {
    cascade_run(a, 1.0, n)
}

/// General complex coefficients.
pub fn cascade_complex(a: &[Complex64], n: u32) -> Result<CascadeGrid<Complex64>> {
    cascade_run(a, Complex64::new(1.0, 0.0), n)
}

/// ψ^{(n)}(x) = Σ_k b_k φ^{(n)}(2x − k) on the level-(n+1) grid.
pub fn wavelet_run<T: Scalar>(a: &[T], b: &[T], one: T, n: u32) -> Result<CascadeGrid<T>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { expected: a.len(), got: b.len() });
    }
    let phi = cascade_run(a, one, n)?;
    Ok(wavelet_from_scaling(&phi, b))
}

/// Apply the highpass sequence to a level-n scaling grid.
pub fn wavelet_from_scaling<T: Scalar>(phi: &CascadeGrid<T>, b: &[T]) -> CascadeGrid<T> {
    let g = phi.g;
    let len = grid_size(g, phi.level + 1);
    let step = 1i64 << phi.level;
    let values = (0..len as i64)
        .map(|j| {
            b.iter().enumerate().fold(T::zero(), |acc, (k, bk)| {
                acc + bk.clone() * phi.at(j - k as i64 * step)
            })
        })
        .collect();
    CascadeGrid { g, level: phi.level + 1, values }
}

/// x = Σ_i d_i 2^{-i} as a reduced fraction (numerator, denominator).
pub fn term_position(digits: &[usize]) -> (u64, u64) {
    let n = digits.len() as u32;
    let num: u64 = digits
        .iter()
        .enumerate()
        .map(|(i, &d)| d as u64 * (1u64 << (n - 1 - i as u32)))
        .sum();
    let mut den = 1u64 << n;
    let mut num = num;
    while den > 1 && num.is_multiple_of(2) {
        num /= 2;
        den /= 2;
    }
    (num, den)
}

/// Grid index of a digit string at level `digits.len()`.
pub fn term_index(digits: &[usize]) -> usize {
    let n = digits.len() as u32;
    digits
        .iter()
        .enumerate()
        .map(|(i, &d)| d * (1usize << (n - 1 - i as u32)))
        .sum()
}

/// Exact decimal rendering of a dyadic rational i·2^{-n}.
pub fn dyadic_decimal(i: u64, n: u32) -> String {
    let int = i >> n;
    let frac = i & ((1u64 << n) - 1);
    if frac == 0 {
        return int.to_string();
    }
    // frac/2^n = frac·5^n/10^n
    let mut digits = (frac as u128) * 5u128.pow(n);
    let mut width = n as usize;
    while digits.is_multiple_of(10) {
        digits /= 10;
        width -= 1;
    }
    format!("{int}.{digits:0width$}")
}

#[derive(Clone, Debug)]
pub struct TransferMatrices {
    pub four_by_four: DMatrix<f64>,
    pub five_a: DMatrix<f64>,
    pub five_b: DMatrix<f64>,
    pub report: EigenReport,
}

#[derive(Clone, Debug)]
pub struct EigenReport {
    pub eigenvalues_four: Vec<Complex64>,
    pub eigenvalues_five_a: Vec<Complex64>,
    pub eigenvalues_five_b: Vec<Complex64>,
    /// max |(1,…,1)·M − (1,…,1)| over the three matrices
    pub constant_row_residual: f64,
    /// |(1,0,0,0,0)·five_a − a5·(1,0,0,0,0)|
    pub five_a_pair_residual: f64,
    /// |(0,0,0,0,1)·five_b − a0·(0,0,0,0,1)|
    pub five_b_pair_residual: f64,
}

fn left_residual(m: &DMatrix<f64>, v: &[f64], lambda: f64) -> f64 {
    let row = nalgebra::RowDVector::from_row_slice(v);
    let out = &row * m;
    out.iter()
        .zip(v)
        .map(|(x, y)| (x - lambda * y).abs())
        .fold(0.0, f64::max)
}

fn sorted_eigs(m: &DMatrix<f64>) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = m.complex_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

/// The refinement matrices acting (from the left) on windows of the genus-3 cascade.
pub fn transfer_matrices(a: &[f64]) -> Result<TransferMatrices> {
    if a.len() != 6 {
        return Err(Error::LengthMismatch { expected: 6, got: a.len() });
    }
    let four_by_four = DMatrix::from_row_slice(
        4,
        4,
        &[
            a[4], a[5], 0.0, 0.0, //
            a[2], a[3], a[4], a[5], //
            a[0], a[1], a[2], a[3], //
            0.0, 0.0, a[0], a[1],
        ],
    );
    let five_a = DMatrix::from_row_slice(
        5,
        5,
        &[
            a[5], 0.0, 0.0, 0.0, 0.0, //
            a[3], a[4], a[5], 0.0, 0.0, //
            a[1], a[2], a[3], a[4], a[5], //
            0.0, a[0], a[1], a[2], a[3], //
            0.0, 0.0, 0.0, a[0], a[1],
        ],
    );
    let five_b = DMatrix::from_row_slice(
        5,
        5,
        &[
            a[4], a[5], 0.0, 0.0, 0.0, //
            a[2], a[3], a[4], a[5], 0.0, //
            a[0], a[1], a[2], a[3], a[4], //
            0.0, 0.0, a[0], a[1], a[2], //
            0.0, 0.0, 0.0, 0.0, a[0],
        ],
    );
    let constant_row_residual = left_residual(&four_by_four, &[1.0; 4], 1.0)
        .max(left_residual(&five_a, &[1.0; 5], 1.0))
        .max(left_residual(&five_b, &[1.0; 5], 1.0));
    let report = EigenReport {
        eigenvalues_four: sorted_eigs(&four_by_four),
        eigenvalues_five_a: sorted_eigs(&five_a),
        eigenvalues_five_b: sorted_eigs(&five_b),
        constant_row_residual,
        five_a_pair_residual: left_residual(&five_a, &[1.0, 0.0, 0.0, 0.0, 0.0], a[5]),
        five_b_pair_residual: left_residual(&five_b, &[0.0, 0.0, 0.0, 0.0, 1.0], a[0]),
    };
    Ok(TransferMatrices { four_by_four, five_a, five_b, report })
}

/// Tolerance for the marginal (equal to one) divergence flag.
pub const MARGINAL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct DivergenceFlags {
    pub diverges_left: bool,
    pub diverges_right: bool,
    pub marginal: bool,
}

/// a0 > 1 or a5 > 1 make the end values of the cascade grow geometrically;
/// a coefficient equal to one is the marginal case.
pub fn divergence_flags(a: &[f64]) -> DivergenceFlags {
    let first = a[0];
    let last = a[a.len() - 1];
    let marginal = (first - 1.0).abs() <= MARGINAL_TOL || (last - 1.0).abs() <= MARGINAL_TOL;
    DivergenceFlags {
        diverges_left: first > 1.0 + MARGINAL_TOL,
        diverges_right: last > 1.0 + MARGINAL_TOL,
        marginal,
    }
}

#[derive(Clone, Debug, Default)]
pub struct SymmetryReport {
    /// grids at (θ, ρ) and (θ+π, ρ+π)
    pub periodicity: f64,
    /// φ_{θ,ρ}(x) vs φ_{π−θ,π−ρ}(x_f − x)
    pub reflection: f64,
    /// a_i(θ,ρ) vs a_{5−i}(−θ,−ρ)
    pub coefficient_reflection: f64,
    /// a_{2i+j}(θ,ρ) vs a_{2(2−i)+j}(θ−π/2, ρ−π/2)
    pub half_period: f64,
    /// a_2(θ,ρ) vs a_2(−θ, −ρ−π/4)
    pub twofold: f64,
    /// a_0(θ,ρ) vs a_0(π/4−ρ, θ−ρ+π/2)
    pub threefold: f64,
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn symmetry_check(theta: f64, rho: f64, n: u32) -> Result<SymmetryReport> {
    if n > 10 {
        return Err(Error::Unsupported("symmetry check is limited to n <= 10".into()));
    }
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
    let pt = TwoParamPoint::new(theta, rho);
    let a = two_param_coeffs(pt);
    let grid = cascade_real(&a, n)?;

    let per = cascade_real(&two_param_coeffs(TwoParamPoint::new(theta + PI, rho + PI)), n)?;
    let refl = cascade_real(&two_param_coeffs(TwoParamPoint::new(PI - theta, PI - rho)), n)?;
    let reversed: Vec<f64> = refl.values.iter().rev().copied().collect();

    let neg = two_param_coeffs(TwoParamPoint::new(-theta, -rho));
    let neg_rev: Vec<f64> = neg.iter().rev().copied().collect();

    let half = two_param_coeffs(TwoParamPoint::new(theta - FRAC_PI_2, rho - FRAC_PI_2));
    let half_perm: Vec<f64> = (0..6).map(|k| half[2 * (2 - k / 2) + k % 2]).collect();

    let two = two_param_coeffs(TwoParamPoint::new(-theta, -rho - FRAC_PI_4));
    let three = two_param_coeffs(TwoParamPoint::new(FRAC_PI_4 - rho, theta - rho + FRAC_PI_2));

    Ok(SymmetryReport {
        periodicity: max_diff(&grid.values, &per.values),
        reflection: max_diff(&grid.values, &reversed),
        coefficient_reflection: max_diff(&a, &neg_rev),
        half_period: max_diff(&a, &half_perm),
        twofold: (a[2] - two[2]).abs(),
        threefold: (a[0] - three[0]).abs(),
    })
}
