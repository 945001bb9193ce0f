//! Dense complex linear algebra: square roots, resolvents, orthonormal bases.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Largest admissible condition number of `I - zT` in [`solve_shifted`].
pub const MAX_SHIFT_CONDITION: f64 = 1e12;

pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// Spectral norm.
pub fn op_norm(a: &ComplexMatrix) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    let gram = if a.nrows() >= a.ncols() {
        a.adjoint() * a
    } else {
        a * a.adjoint()
    };
    let top = gram
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0f64, |m, &v| m.max(v));
    top.max(0.0).sqrt()
}

/// Spectral norm of a matrix known to be Hermitian (cheaper than [`op_norm`]).
pub fn hermitian_norm(h: &ComplexMatrix) -> f64 {
    if h.nrows() == 0 {
        return 0.0;
    }
    let sym = (h + h.adjoint()) * c64(0.5, 0.0);
    sym.symmetric_eigenvalues()
        .iter()
        .fold(0.0f64, |m, &v| m.max(v.abs()))
}

fn max_abs(a: &ComplexMatrix) -> f64 {
    a.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

/// Hermitian positive square root through a full eigendecomposition.
///
/// Eigenvalues in `[-tol * max(1, |A|), 0)` are clamped to zero; anything
/// further below is an error.
pub fn hermitian_sqrt(a: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "hermitian_sqrt needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    let scale = max_abs(a).max(1.0);
    let asymmetry = max_abs(&(a - a.adjoint()));
    if asymmetry > tol * scale {
        return Err(Error::NotHermitian { asymmetry });
    }
    let sym = (a + a.adjoint()) * c64(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let spread = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let window = tol * spread.max(1.0);
    let mut roots = DVector::<f64>::zeros(n);
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam < -window {
            return Err(Error::NegativeEigenvalue { value: lam });
        }
        roots[i] = lam.max(0.0).sqrt();
    }
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= c64(roots[j], 0.0);
    }
    Ok(&scaled * v.adjoint())
}

/// `(I - zT)^{-1}` by LU, refusing shifts whose condition number exceeds
/// [`MAX_SHIFT_CONDITION`].
pub fn solve_shifted(t: &ComplexMatrix, z: C64) -> Result<ComplexMatrix> {
    if !t.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "solve_shifted needs a square matrix, got {}x{}",
            t.nrows(),
            t.ncols()
        )));
    }
    let n = t.nrows();
    if n == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    let m = identity(n) - t * z;
    let sv = m.singular_values();
    let smax = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    let smin = sv.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if !(condition <= MAX_SHIFT_CONDITION) {
        return Err(Error::SingularShift { condition });
    }
    m.lu()
        .try_inverse()
        .ok_or(Error::SingularShift { condition })
}

/// A subspace of `C^ambient_dim`, stored through an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: ComplexMatrix,
}

impl Subspace {
    /// Wrap a matrix whose columns are already orthonormal (checked to 1e-10).
    pub fn from_orthonormal(basis: ComplexMatrix) -> Result<Self> {
        let k = basis.ncols();
        let gram = basis.adjoint() * &basis;
        let dev = max_abs(&(gram - identity(k)));
        if dev > 1e-10 {
            return Err(Error::DimensionMismatch(format!(
                "columns are not orthonormal (deviation {dev:.3e})"
            )));
        }
        Ok(Self {
            ambient_dim: basis.nrows(),
            basis,
        })
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: ComplexMatrix::zeros(ambient_dim, 0),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: identity(ambient_dim),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn into_basis(self) -> ComplexMatrix {
        self.basis
    }

    /// Orthogonal projection of `v` onto the subspace.
    pub fn project(&self, v: &ComplexVector) -> ComplexVector {
        &self.basis * (self.basis.adjoint() * v)
    }
}

/// Orthonormal basis of the column span of `vectors`.
///
/// Modified Gram-Schmidt with column pivoting: at each step the remaining
/// column of largest residual norm is taken (ties go to the lowest index), and
/// the process stops once that norm drops to `rank_tol` times the largest
/// input column norm.
pub fn orthonormalize(vectors: &ComplexMatrix, rank_tol: f64) -> Subspace {
    let m = vectors.nrows();
    let ncols = vectors.ncols();
    let col_norm = |w: &ComplexMatrix, j: usize| w.column(j).norm();
    let top = (0..ncols).fold(0.0f64, |a, j| a.max(col_norm(vectors, j)));
    if top == 0.0 || m == 0 {
        return Subspace::zero(m);
    }
    let threshold = rank_tol * top;
    let mut work = vectors.clone();
    let mut alive: Vec<usize> = (0..ncols).collect();
    let mut q: Vec<ComplexVector> = Vec::new();
    while !alive.is_empty() && q.len() < m {
        let mut best = alive[0];
        let mut best_norm = col_norm(&work, best);
        for &j in &alive[1..] {
            let nj = col_norm(&work, j);
            if nj > best_norm {
                best = j;
                best_norm = nj;
            }
        }
        if best_norm <= threshold {
            break;
        }
        let mut v: ComplexVector = work.column(best).into_owned();
        // second pass keeps orthogonality at roundoff level
        for qi in &q {
            let c = qi.dotc(&v);
            v.axpy(-c, qi, c64(1.0, 0.0));
        }
        let nv = v.norm();
        alive.retain(|&j| j != best);
        if nv <= threshold {
            continue;
        }
        v /= c64(nv, 0.0);
        for &j in &alive {
            let c = v.dotc(&work.column(j));
            let mut col = work.column_mut(j);
            col.axpy(-c, &v, c64(1.0, 0.0));
        }
        q.push(v);
    }
    let mut basis = ComplexMatrix::zeros(m, q.len());
    for (j, v) in q.iter().enumerate() {
        basis.set_column(j, v);
    }
    Subspace {
        ambient_dim: m,
        basis,
    }
}

pub fn projector(s: &Subspace) -> ComplexMatrix {
    &s.basis * s.basis.adjoint()
}

/// `|P_1 - P_2|` in operator norm.
pub fn subspace_distance(s1: &Subspace, s2: &Subspace) -> Result<f64> {
    if s1.ambient_dim != s2.ambient_dim {
        return Err(Error::DimensionMismatch(format!(
            "ambient dimensions {} and {}",
            s1.ambient_dim, s2.ambient_dim
        )));
    }
    let d = projector(s1) - projector(s2);
    Ok(hermitian_norm(&d).min(1.0))
}

/// `I_{k_1} ⊗ ... ⊗ A ⊗ ... ⊗ I_{k_r}` with `A` in slot `slot`.
pub fn embed_factor(dims: &[usize], slot: usize, a: &ComplexMatrix) -> ComplexMatrix {
    let left: usize = dims[..slot].iter().product();
    let right: usize = dims[slot + 1..].iter().product();
    identity(left).kronecker(a).kronecker(&identity(right))
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn hconcat(blocks: &[&ComplexMatrix]) -> ComplexMatrix {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = ComplexMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((0, at), (rows, b.ncols())).copy_from(b);
        at += b.ncols();
    }
    out
}
