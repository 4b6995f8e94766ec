//! Small dense complex helpers shared by the analysis modules.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(r, c)
}

/// Build a matrix from real row-major data.
pub fn from_real_rows(rows: usize, cols: usize, data: &[f64]) -> ComplexMatrix {
    assert_eq!(data.len(), rows * cols);
    ComplexMatrix::from_fn(rows, cols, |i, j| cr(data[i * cols + j]))
}

/// Largest entry modulus.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// max |U*U − I| entrywise.
pub fn unitarity_residual(u: &ComplexMatrix) -> f64 {
    let n = u.ncols();
    max_abs_diff(&(u.adjoint() * u), &identity(n))
}

/// Residual of the projection identities P = P* = P².
pub fn projection_residual(p: &ComplexMatrix) -> f64 {
    if !p.is_square() {
        return f64::INFINITY;
    }
    let herm = max_abs_diff(p, &p.adjoint());
    let idem = max_abs_diff(&(p * p), p);
    herm.max(idem)
}

/// Thin singular value decomposition A = U Σ V*, singular values descending.
///
/// `u` has one column per singular value (zero for σ = 0) and `v` is a full
/// unitary n×n matrix, so the trailing columns of `v` span the null space.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

const JACOBI_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi SVD.
///
/// Used instead of the library routine, whose complex 2×2 path returns wrong
/// factors for some rank-one inputs.
pub fn svd(m: &ComplexMatrix) -> Svd {
    let (rows, n) = m.shape();
    let mut a = m.clone();
    let mut v = identity(n);
    // columns below this squared norm are numerically zero and left alone
    let fro2: f64 = m.iter().map(|x| x.norm_sqr()).sum();
    let negligible = fro2 * (f64::EPSILON * f64::EPSILON) * 1e-4;
    for _ in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = a.column(p).iter().map(|x| x.norm_sqr()).sum();
                let beta: f64 = a.column(q).iter().map(|x| x.norm_sqr()).sum();
                let gamma: C64 = a.column(p).iter().zip(a.column(q).iter()).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if alpha <= negligible || beta <= negligible || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // rotate a_p and e^{-iφ} a_q, which have a real inner product
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for mat in [&mut a, &mut v] {
                    for r in 0..mat.nrows() {
                        let xp = mat[(r, p)];
                        let xq = mat[(r, q)] * phase.conj();
                        mat[(r, p)] = xp * cs - xq * sn;
                        mat[(r, q)] = xp * sn + xq * cs;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let mut u = zeros(rows, n);
    let mut vs = zeros(n, n);
    let mut singular_values = Vec::with_capacity(n);
    for (c, &j) in order.iter().enumerate() {
        let s = norms[j];
        if s > 0.0 {
            u.set_column(c, &(a.column(j) / cr(s)));
        }
        vs.set_column(c, &v.column(j));
        singular_values.push(s);
    }
    Svd { u, singular_values, v: vs }
}

/// Orthogonal projection onto the span of the columns of `m`, rank decided
/// by singular values above `tol`.
pub fn range_projection(m: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let (basis, _) = column_span(m, tol);
    &basis * basis.adjoint()
}

/// Orthonormal basis (as columns) of the column span, plus the singular values.
pub fn column_span(m: &ComplexMatrix, tol: f64) -> (ComplexMatrix, Vec<f64>) {
    let rows = m.nrows();
    if m.ncols() == 0 {
        return (zeros(rows, 0), vec![]);
    }
    let d = svd(m);
    let rank = d.singular_values.iter().filter(|&&s| s > tol).count();
    (d.u.columns(0, rank).into_owned(), d.singular_values)
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Vec<f64> {
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Column-major vectorization index helper: vec(X)[i + d*j] = X[(i,j)].
pub fn vec_index(d: usize, i: usize, j: usize) -> usize {
    i + d * j
}
