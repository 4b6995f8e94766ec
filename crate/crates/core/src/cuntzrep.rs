//! Finite-window analysis of the Cuntz representation attached to a loop.
//!
//! The window K = span{z^0, z^{-1}, …, z^{-r0}} is invariant under every
//! adjoint T_i*; the index k below always refers to the basis vector e_{-k}.

use crate::error::{Error, Result};
use crate::linalg::{
    self, column_span, cr, identity, max_abs, max_abs_diff, projection_residual, zeros,
    ComplexMatrix, C64,
};
use crate::loopgroup::{detect_diagonal_structure, DiagonalStructure, MatrixLoop, LOOP_TOL};

/// Singular values below this are treated as zero.
pub const NULL_TOL: f64 = 1e-9;
/// Singular values in [NULL_TOL, AMBIGUOUS_TOL] make a rank decision unreliable.
pub const AMBIGUOUS_TOL: f64 = 1e-7;

/// r0 = ⌊(gN − 1)/(N − 1)⌋
pub fn window_size(n: usize, g: usize) -> usize {
    assert!(n >= 2 && g >= 1, "window_size needs N >= 2 and g >= 1");
    (g * n - 1) / (n - 1)
}

/// Matrices of T_i*|_K in the basis e_0, e_{-1}, …, e_{-r0}.
#[derive(Clone, Debug)]
pub struct WindowRep {
    pub n: usize,
    pub g: usize,
    pub r0: usize,
    pub m: Vec<ComplexMatrix>,
}

impl WindowRep {
    pub fn new(a: &MatrixLoop) -> Result<Self> {
        let n = a.n();
        let g = a.genus()?;
        let r0 = window_size(n, g);
        let d = r0 + 1;
        let mut m = vec![zeros(d, d); n];
        for (i, mi) in m.iter_mut().enumerate() {
            for k in 0..d {
                // k = s·N − j with 0 ≤ j < N
                let s = k.div_ceil(n);
                let j = s * n - k;
                for (p, ap) in a.coeffs().iter().enumerate() {
                    let row = s + p;
                    let v = ap[(i, j)].conj();
                    if row < d {
                        mi[(row, k)] = v;
                    } else if v.norm() > 0.0 {
                        return Err(Error::InvalidLoop(format!(
                            "adjoint action leaves the window at row {row}"
                        )));
                    }
                }
            }
        }
        Ok(Self { n, g, r0, m })
    }

    pub fn dim(&self) -> usize {
        self.r0 + 1
    }

    /// σ(X) = Σ_i M_i† X M_i
    pub fn sigma(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let d = self.dim();
        self.m
            .iter()
            .fold(zeros(d, d), |acc, mi| acc + mi.adjoint() * x * mi)
    }

    /// Trace dual σ*(D) = Σ_i M_i D M_i†
    pub fn sigma_dual(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let d = self.dim();
        self.m
            .iter()
            .fold(zeros(d, d), |acc, mi| acc + mi * x * mi.adjoint())
    }

    /// σ as a d²×d² matrix acting on column-major vectorizations.
    pub fn sigma_matrix(&self) -> ComplexMatrix {
        self.superop(|x| self.sigma(x))
    }

    /// σ* as a d²×d² matrix.
    pub fn sigma_dual_matrix(&self) -> ComplexMatrix {
        self.superop(|x| self.sigma_dual(x))
    }

    fn superop(&self, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> ComplexMatrix {
        let d = self.dim();
        let mut l = zeros(d * d, d * d);
        for b in 0..d {
            for a in 0..d {
                let mut e = zeros(d, d);
                e[(a, b)] = cr(1.0);
                let s = f(&e);
                let col = linalg::vec_index(d, a, b);
                for jj in 0..d {
                    for ii in 0..d {
                        l[(linalg::vec_index(d, ii, jj), col)] = s[(ii, jj)];
                    }
                }
            }
        }
        l
    }
}

pub fn adjoint_matrices(a: &MatrixLoop) -> Result<Vec<ComplexMatrix>> {
    Ok(WindowRep::new(a)?.m)
}

/// λ0 = Σ_i |A^{(0)}_{i,0}|²
pub fn lambda0(a: &MatrixLoop) -> f64 {
    let a0 = a.coeff(0);
    (0..a.n()).map(|i| a0[(i, 0)].norm_sqr()).sum()
}

fn raw_r(coeffs: &[ComplexMatrix], n: usize, k: usize, l: usize) -> ComplexMatrix {
    let get = |p: usize| coeffs.get(p).cloned().unwrap_or_else(|| zeros(n, n));
    get(l).adjoint() * get(k)
}

/// R(k, l) = A^{(l)*} A^{(k)}
pub fn r_matrix(a: &MatrixLoop, k: usize, l: usize) -> Result<ComplexMatrix> {
    let g = a.genus()?;
    if k >= g || l >= g {
        return Err(Error::IndexOutOfRange { k, l, g });
    }
    Ok(raw_r(a.coeffs(), a.n(), k, l))
}

#[derive(Clone, Debug)]
pub struct MinimalSubspace {
    /// Orthonormal basis of 𝓛 as columns in window coordinates.
    pub basis: ComplexMatrix,
    pub dim: usize,
    pub singular_values: Vec<f64>,
}

/// Span of the conjugates of A_{i,j}(z) z^{k+j}, i, j ∈ {0,1}, 0 ≤ k < g.
pub fn minimal_subspace(a: &MatrixLoop) -> Result<MinimalSubspace> {
    if a.n() != 2 {
        return Err(Error::Unsupported("minimal subspace is implemented for N = 2".into()));
    }
    let g = a.genus()?;
    let d = window_size(2, g) + 1;
    let mut gens = zeros(d, 4 * g);
    let mut col = 0;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..g {
                // conj(z^{p+k+j}) = z^{-(p+k+j)}
                for (p, ap) in a.coeffs().iter().enumerate() {
                    gens[(p + k + j, col)] = ap[(i, j)].conj();
                }
                col += 1;
            }
        }
    }
    let (basis, singular_values) = column_span(&gens, NULL_TOL);
    let dim = basis.ncols();
    Ok(MinimalSubspace { basis, dim, singular_values })
}

#[derive(Clone, Debug)]
pub struct FixedSpace {
    pub dim: usize,
    /// Orthonormal (Frobenius) basis of {X : σ(X) = X}.
    pub basis: Vec<ComplexMatrix>,
    /// Singular values of σ − id, ascending.
    pub singular_values: Vec<f64>,
}

pub fn sigma_fixed_space(a: &MatrixLoop) -> Result<FixedSpace> {
    fixed_space_of(&WindowRep::new(a)?)
}

pub fn fixed_space_of(w: &WindowRep) -> Result<FixedSpace> {
    let d = w.dim();
    let l = w.sigma_matrix() - identity(d * d);
    let dec = linalg::svd(&l);
    // ascending, so the null directions come first
    let singular_values: Vec<f64> = dec.singular_values.iter().rev().copied().collect();
    let gray: Vec<f64> = singular_values
        .iter()
        .copied()
        .filter(|s| (NULL_TOL..=AMBIGUOUS_TOL).contains(s))
        .collect();
    if !gray.is_empty() {
        return Err(Error::RankAmbiguous { singular_values: gray });
    }
    let basis: Vec<ComplexMatrix> = (0..dec.singular_values.len())
        .rev()
        .filter(|&k| dec.singular_values[k] < NULL_TOL)
        .map(|k| {
            let v = dec.v.column(k);
            ComplexMatrix::from_fn(d, d, |i, j| v[linalg::vec_index(d, i, j)])
        })
        .collect();
    Ok(FixedSpace { dim: basis.len(), basis, singular_values })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Classification {
    Irreducible,
    Reducible(ReducibleData),
}

impl Classification {
    pub fn is_irreducible(&self) -> bool {
        matches!(self, Classification::Irreducible)
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Classification::Irreducible => "irreducible",
            Classification::Reducible(_) => "reducible",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReducibleData {
    pub fixed_dim: usize,
    /// Supports (window indices k of e_{-k}) of the minimal fixed projections.
    pub projections: Vec<Vec<usize>>,
    /// All extracted projections are diagonal in the window basis.
    pub projections_diagonal: bool,
    /// All extracted projections are σ-fixed.
    pub projections_fixed: bool,
    /// The fixed space is closed under products and commutative.
    pub fixed_space_abelian: bool,
    pub diagonal: DiagonalStructure,
}

/// Spectral projections of a generic self-adjoint element of the fixed space.
pub fn fixed_projections(w: &WindowRep, fs: &FixedSpace) -> Vec<ComplexMatrix> {
    let d = w.dim();
    let mut h = zeros(d, d);
    let mut t = 0usize;
    for b in &fs.basis {
        let re = (b + b.adjoint()).scale(0.5);
        let im = (b - b.adjoint()) * C64::new(0.0, -0.5);
        for part in [re, im] {
            // deterministic, generic-looking real weights
            let wgt = ((t as f64 + 1.0) * 0.618_033_988_749_895).fract() + 0.25;
            h += part * cr(wgt);
            t += 1;
        }
    }
    let eig = ((&h + h.adjoint()) * cr(0.5)).symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let spread = eig.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1e-300);
    let mut out: Vec<ComplexMatrix> = Vec::new();
    let mut last: Option<f64> = None;
    for k in order {
        let lam = eig.eigenvalues[k];
        let v = eig.eigenvectors.column(k);
        let pv = v * v.adjoint();
        match (last, out.last_mut()) {
            (Some(prev), Some(p)) if (lam - prev).abs() <= 1e-6 * spread => *p += pv,
            _ => out.push(pv),
        }
        last = Some(lam);
    }
    out
}

fn abelian_residual(fs: &FixedSpace) -> f64 {
    let mut worst: f64 = 0.0;
    for x in &fs.basis {
        for y in &fs.basis {
            let p = x * y;
            let q = y * x;
            worst = worst.max(max_abs_diff(&p, &q));
            // distance of the product from the span of the (orthonormal) basis
            let mut proj = zeros(p.nrows(), p.ncols());
            for b in &fs.basis {
                let coef: C64 = b.iter().zip(p.iter()).map(|(u, v)| u.conj() * v).sum();
                proj += b * coef;
            }
            worst = worst.max(max_abs_diff(&proj, &p));
        }
    }
    worst
}

pub fn classify(a: &MatrixLoop) -> Result<Classification> {
    let w = WindowRep::new(a)?;
    let fs = fixed_space_of(&w)?;
    if fs.dim == 1 {
        return Ok(Classification::Irreducible);
    }
    let projs = fixed_projections(&w, &fs);
    let mut projections = Vec::new();
    let mut projections_diagonal = true;
    let mut projections_fixed = true;
    for p in &projs {
        let off = max_abs(&(p - ComplexMatrix::from_diagonal(&p.diagonal())));
        projections_diagonal &= off < 1e-6;
        projections_fixed &= max_abs_diff(&w.sigma(p), p) < 1e-6;
        projections.push((0..w.dim()).filter(|&k| p[(k, k)].re > 0.5).collect());
    }
    Ok(Classification::Reducible(ReducibleData {
        fixed_dim: fs.dim,
        projections,
        projections_diagonal,
        projections_fixed,
        fixed_space_abelian: abelian_residual(&fs) < 1e-6,
        diagonal: detect_diagonal_structure(a),
    }))
}

/// Summary used by the command-line report.
#[derive(Clone, Debug)]
pub struct RepAnalysis {
    pub lambda0: f64,
    pub r0: usize,
    pub fixed_dim: usize,
    pub classification: Classification,
    pub minimal_subspace_dim: Option<usize>,
}

pub fn analyze(a: &MatrixLoop) -> Result<RepAnalysis> {
    let w = WindowRep::new(a)?;
    let classification = classify(a)?;
    let fixed_dim = match &classification {
        Classification::Irreducible => 1,
        Classification::Reducible(r) => r.fixed_dim,
    };
    let minimal_subspace_dim = if a.n() == 2 { Some(minimal_subspace(a)?.dim) } else { None };
    Ok(RepAnalysis { lambda0: lambda0(a), r0: w.r0, fixed_dim, classification, minimal_subspace_dim })
}

/// The 2×2 matrix [[R(1,1)_{00}, R(0,1)_{01}], [R(1,0)_{10}, R(0,0)_{11}]].
pub fn endpoint_matrix(coeffs: &[ComplexMatrix]) -> ComplexMatrix {
    let r = |k, l| raw_r(coeffs, 2, k, l);
    let mut m = zeros(2, 2);
    m[(0, 0)] = r(1, 1)[(0, 0)];
    m[(0, 1)] = r(0, 1)[(0, 1)];
    m[(1, 0)] = r(1, 0)[(1, 0)];
    m[(1, 1)] = r(0, 0)[(1, 1)];
    m
}

fn left_truncation(coeffs: &[ComplexMatrix]) -> usize {
    let lam0 = raw_r(coeffs, 2, 0, 0)[(0, 0)].re;
    if lam0 > LOOP_TOL {
        return 0;
    }
    let m = endpoint_matrix(coeffs);
    let has_one = m
        .clone()
        .eigenvalues()
        .map(|ev| ev.iter().any(|e| (e - cr(1.0)).norm() < NULL_TOL))
        .unwrap_or(true);
    if has_one {
        1
    } else {
        2
    }
}

/// Coefficients of z^{g−1} A(1/z) with the two columns swapped: the loop whose
/// window action is the reflection k ↦ r0 − k of the original one.
pub fn mirror_coeffs(a: &MatrixLoop, g: usize) -> Vec<ComplexMatrix> {
    (0..g)
        .map(|p| {
            let src = a.coeff(g - 1 - p);
            ComplexMatrix::from_fn(2, 2, |i, j| src[(i, 1 - j)])
        })
        .collect()
}

/// Endpoints (p, q) of the truncated window {e_{-p}, …, e_{-q}}.
pub fn truncate_window(a: &MatrixLoop) -> Result<(usize, usize)> {
    if a.n() != 2 {
        return Err(Error::Unsupported("window truncation is implemented for N = 2".into()));
    }
    let g = a.genus()?;
    let r0 = window_size(2, g);
    let p = left_truncation(a.coeffs());
    let q = r0 - left_truncation(&mirror_coeffs(a, g));
    if p > q {
        return Ok((p, p));
    }
    Ok((p, q))
}

/// Density D ≥ 0 with trace 1 and σ*(D) = D.
///
/// When ker(σ* − id) is one-dimensional the answer is unique and is read off
/// directly; it need not be diagonal once g ≥ 3 (the off-diagonal terms carry
/// R(1,0) and only cancel for special loops). Otherwise the search is
/// restricted to diagonal matrices, see [`diagonal_fixed_density`].
pub fn fixed_density_matrix(a: &MatrixLoop) -> Result<ComplexMatrix> {
    let w = WindowRep::new(a)?;
    let d = w.dim();
    let dec = linalg::svd(&(w.sigma_dual_matrix() - identity(d * d)));
    let null: Vec<usize> =
        (0..d * d).filter(|&k| dec.singular_values[k] < NULL_TOL).collect();
    if null.len() != 1 {
        return diagonal_fixed_density(&w);
    }
    let v = dec.v.column(null[0]);
    let x = ComplexMatrix::from_fn(d, d, |i, j| v[linalg::vec_index(d, i, j)]);
    let tr = x.trace();
    if tr.norm() < 1e-12 {
        return Err(Error::NoFixedDensity { residual: f64::INFINITY });
    }
    let x = x / tr;
    let mut dm = (&x + x.adjoint()) * cr(0.5);
    // exact zeros where the solver left rounding noise
    dm.iter_mut().for_each(|z| {
        if z.norm() < 1e-14 {
            *z = cr(0.0);
        }
    });
    let lowest = linalg::hermitian_eigenvalues(&dm).into_iter().fold(f64::INFINITY, f64::min);
    let residual = max_abs_diff(&w.sigma_dual(&dm), &dm);
    if lowest < -NULL_TOL || residual > NULL_TOL {
        return Err(Error::NoFixedDensity { residual: residual.max(-lowest) });
    }
    Ok(dm)
}

/// Diagonal solution of σ*(D) = D.
///
/// The diagonal of σ*(diag d) is W d with the column-stochastic
/// W[a,c] = Σ_i |M_i[a,c]|². Each closed class of W carries one stationary
/// vector; the result averages them.
pub fn diagonal_fixed_density(w: &WindowRep) -> Result<ComplexMatrix> {
    let d = w.dim();
    let mut wm = vec![vec![0.0f64; d]; d];
    for mi in &w.m {
        for r in 0..d {
            for c in 0..d {
                wm[r][c] += mi[(r, c)].norm_sqr();
            }
        }
    }
    // reachability: c → r when W[r][c] > 0
    let mut reach = vec![vec![false; d]; d];
    for (c, row) in reach.iter_mut().enumerate() {
        row[c] = true;
        for (r, hit) in row.iter_mut().enumerate() {
            if wm[r][c] > 1e-14 {
                *hit = true;
            }
        }
    }
    for k in 0..d {
        for i in 0..d {
            if reach[i][k] {
                for j in 0..d {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    let mut seen = vec![false; d];
    let mut dens = vec![0.0f64; d];
    let mut classes = 0usize;
    for s in 0..d {
        if seen[s] {
            continue;
        }
        let class: Vec<usize> = (0..d).filter(|&t| reach[s][t] && reach[t][s]).collect();
        for &t in &class {
            seen[t] = true;
        }
        let closed = class.iter().all(|&c| (0..d).all(|r| !reach[c][r] || class.contains(&r)));
        if !closed {
            continue;
        }
        let n = class.len();
        let sub = ComplexMatrix::from_fn(n, n, |i, j| {
            cr(wm[class[i]][class[j]] - if i == j { 1.0 } else { 0.0 })
        });
        let dec = linalg::svd(&sub);
        // the null vector of a real matrix is real up to a global phase
        let col = dec.v.column(n - 1);
        let pivot = col.iter().copied().max_by(|x, y| x.norm().total_cmp(&y.norm())).expect("nonempty");
        let phase = pivot.conj() / pivot.norm();
        let mut v: Vec<f64> = col.iter().map(|x| (x * phase).re).collect();
        let sum: f64 = v.iter().sum();
        if sum.abs() < 1e-300 {
            return Err(Error::NoFixedDensity { residual: f64::INFINITY });
        }
        for x in &mut v {
            *x = (*x / sum).max(0.0);
        }
        let sum: f64 = v.iter().sum();
        for (i, &c) in class.iter().enumerate() {
            dens[c] += v[i] / sum;
        }
        classes += 1;
    }
    if classes == 0 {
        return Err(Error::NoFixedDensity { residual: f64::INFINITY });
    }
    for x in &mut dens {
        *x /= classes as f64;
    }
    let dm = ComplexMatrix::from_fn(d, d, |i, j| if i == j { cr(dens[i]) } else { cr(0.0) });
    let residual = max_abs_diff(&w.sigma_dual(&dm), &dm);
    if residual > NULL_TOL {
        return Err(Error::NoFixedDensity { residual });
    }
    Ok(dm)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProjectionTest {
    pub is_projection: bool,
    pub all_commute: bool,
    pub product_is_zero: bool,
}

/// Tolerance for the projection-product flags.
pub const PRODUCT_TOL: f64 = 1e-9;

/// Flags for R = P_g ⋯ P_2 P_1 P_2 ⋯ P_g.
pub fn projection_product_test(ps: &[ComplexMatrix]) -> Result<ProjectionTest> {
    let first = ps.first().ok_or(Error::NotProjection { residual: f64::INFINITY })?;
    for p in ps {
        let res = projection_residual(p);
        if res > LOOP_TOL || p.shape() != first.shape() {
            return Err(Error::NotProjection { residual: res });
        }
    }
    let mut r = first.clone();
    for p in &ps[1..] {
        r = p * r * p;
    }
    let is_projection = max_abs_diff(&(&r * &r), &r) < PRODUCT_TOL;
    let mut all_commute = true;
    for (i, p) in ps.iter().enumerate() {
        for q in &ps[i + 1..] {
            all_commute &= max_abs_diff(&(p * q), &(q * p)) < PRODUCT_TOL;
        }
    }
    Ok(ProjectionTest { is_projection, all_commute, product_is_zero: max_abs(&r) < PRODUCT_TOL })
}
