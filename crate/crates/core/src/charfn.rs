//! Characteristic functions of single contractions and the quotient-model
//! checks built on them.

use serde::Serialize;

use crate::contraction::{defect, spectral_radius_estimate, ContractionTuple, NORM_SLACK};
use crate::dilation::{canonical_embedding, DilationModel};
use crate::error::{Error, Result};
use crate::hardy::{one_variable_symbol, HardyBasis};
use crate::linops::{
    c64, hermitian_norm, identity, op_norm, orthonormalize, solve_shifted, ComplexMatrix, Subspace,
    C64,
};

pub const RANK_TOL: f64 = 1e-10;
/// Degree limit for [`charfn_poly_truncate`].
pub const MAX_SYMBOL_DEGREE: usize = 100_000;

/// `θ_T` stored against orthonormal bases of `𝔇_T` and `𝔇_{T*}`.
#[derive(Debug, Clone)]
pub struct CharFn {
    t: ComplexMatrix,
    d_t: ComplexMatrix,
    d_ts: ComplexMatrix,
    defect_in: Subspace,
    defect_out: Subspace,
    rank_tol: f64,
}

pub fn charfn_build(t: &ComplexMatrix) -> Result<CharFn> {
    if !t.is_square() {
        return Err(Error::DimensionMismatch(
            "characteristic function of a non-square matrix".into(),
        ));
    }
    let norm = op_norm(t);
    if norm > 1.0 + NORM_SLACK {
        return Err(Error::NotContraction(format!("norm {norm}")));
    }
    let d_t = defect(t)?;
    let d_ts = defect(&t.adjoint())?;
    Ok(CharFn {
        defect_in: orthonormalize(&d_t, RANK_TOL),
        defect_out: orthonormalize(&d_ts, RANK_TOL),
        t: t.clone(),
        d_t,
        d_ts,
        rank_tol: RANK_TOL,
    })
}

impl CharFn {
    pub fn contraction(&self) -> &ComplexMatrix {
        &self.t
    }

    pub fn defect_in(&self) -> &Subspace {
        &self.defect_in
    }

    pub fn defect_out(&self) -> &Subspace {
        &self.defect_out
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    /// `dim 𝔇_{T*} × dim 𝔇_T`.
    pub fn shape(&self) -> (usize, usize) {
        (self.defect_out.dim(), self.defect_in.dim())
    }
}

/// `Q_out* [-T + z D_{T*} (I - zT*)^{-1} D_T] Q_in`.
pub fn charfn_eval(theta: &CharFn, z: C64) -> Result<ComplexMatrix> {
    let r = solve_shifted(&theta.t.adjoint(), z)?;
    let full = -&theta.t + &theta.d_ts * r * &theta.d_t * z;
    Ok(theta.defect_out.basis().adjoint() * full * theta.defect_in.basis())
}

/// `‖(I - θ(b)θ(a)*) - (1 - āb) Q_out* D_{T*} (I - bT*)^{-1} (I - āT)^{-1} D_{T*} Q_out‖`.
pub fn charfn_identity_check(theta: &CharFn, a: C64, b: C64) -> Result<f64> {
    let (ta, tb) = (charfn_eval(theta, a)?, charfn_eval(theta, b)?);
    let r = theta.defect_out.dim();
    let lhs = identity(r) - tb * ta.adjoint();
    let q = theta.defect_out.basis();
    let inner = &theta.d_ts
        * solve_shifted(&theta.t.adjoint(), b)?
        * solve_shifted(&theta.t, a.conj())?
        * &theta.d_ts;
    let rhs = q.adjoint() * inner * q * (c64(1.0, 0.0) - a.conj() * b);
    Ok(op_norm(&(lhs - rhs)))
}

/// `max_j ‖θ(z_j)* θ(z_j) - I‖` over `samples` equispaced points of the circle.
pub fn boundary_unitarity_check(theta: &CharFn, samples: usize) -> Result<f64> {
    let f = theta.defect_in.dim();
    let mut worst = 0.0f64;
    for j in 0..samples {
        let z = C64::from_polar(1.0, std::f64::consts::TAU * j as f64 / samples as f64);
        let th = charfn_eval(theta, z)?;
        worst = worst.max(op_norm(&(th.adjoint() * th - identity(f))));
    }
    Ok(worst)
}

/// Taylor polynomial of `θ_T` with a bound on the sup-norm of the remainder
/// over the closed disk.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolPolynomial {
    pub coeffs: Vec<ComplexMatrix>,
    pub tail_bound: f64,
}

impl SymbolPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, z: C64) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.coeffs[0].nrows(), self.coeffs[0].ncols());
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }
}

/// `θ_T(z) = -T + Σ_{k≥1} z^k D_{T*} T*^{k-1} D_T`, compressed, cut at the
/// first degree `d` with `‖D_{T*}‖ ‖D_T‖ ‖T^d‖ S_J / (1 - q) < tol`, where
/// `q = ‖T^J‖ < 1` and `S_J = Σ_{i<J} ‖T^i‖`.
pub fn charfn_poly_truncate(theta: &CharFn, tol: f64) -> Result<SymbolPolynomial> {
    let t = &theta.t;
    let m = t.nrows();
    let scale = op_norm(&theta.d_ts) * op_norm(&theta.d_t);
    let mut powers_norm = vec![1.0f64];
    let mut p = identity(m);
    let mut j = 0usize;
    let (q, s_j) = loop {
        p = &p * t;
        j += 1;
        let nrm = op_norm(&p);
        if nrm < 1.0 {
            break (nrm, powers_norm.iter().sum::<f64>());
        }
        powers_norm.push(nrm);
        if j > 10_000 {
            return Err(Error::NotContraction(format!(
                "no power of T below norm 1 (radius estimate {})",
                spectral_radius_estimate(t)
            )));
        }
    };
    let factor = scale * s_j / (1.0 - q);
    let qo = theta.defect_out.basis();
    let qi = theta.defect_in.basis();
    let left = qo.adjoint() * &theta.d_ts;
    let right = &theta.d_t * qi;
    let mut coeffs = vec![-(qo.adjoint() * t * qi)];
    let mut tpow = identity(m);
    let mut d = 0usize;
    loop {
        let bound = factor * op_norm(&tpow);
        if bound < tol || factor == 0.0 {
            return Ok(SymbolPolynomial {
                coeffs,
                tail_bound: bound,
            });
        }
        if d >= MAX_SYMBOL_DEGREE {
            return Err(Error::DegreeOverflow {
                degree: d,
                max: MAX_SYMBOL_DEGREE,
            });
        }
        // c_{d+1} = D_{T*} T*^d D_T
        let ts_pow = tpow.adjoint();
        coeffs.push(&left * ts_pow * &right);
        tpow = &tpow * t;
        d += 1;
    }
}

/// Outcome of the single-contraction projection identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionReport {
    /// `‖P_d (U U* - (I - M_θ M_θ*)) P_d‖`.
    pub residual: f64,
    pub safe_cutoff: usize,
    /// Bound on the residual due to cutting `θ` to a polynomial.
    pub tail_bound: f64,
    pub symbol_degree: usize,
}

/// Compares `U P_H U*` with `I - M_θ M_θ*` on all degrees `≤ d`. Both
/// compressions are exact there because `M_θ` is lower triangular in degree.
pub fn projection_identity_check(
    t: &ComplexMatrix,
    d: usize,
    tol: f64,
) -> Result<ProjectionReport> {
    let tuple = ContractionTuple::new(vec![t.clone()])?;
    let model = canonical_embedding(&tuple, d)?;
    let theta = charfn_build(t)?;
    let poly = charfn_poly_truncate(&theta, tol / 10.0)?;
    let r = model.defect_dim();
    let u = model.embedding()?;
    let left = u.clone() * u.adjoint();
    let basis_out = HardyBasis::new(1, d, r)?;
    let f = theta.defect_in.dim();
    let coeffs: Vec<ComplexMatrix> = poly.coeffs.iter().take(d + 1).cloned().collect();
    let right = if f == 0 {
        identity(basis_out.len())
    } else {
        let basis_in = basis_out.with_coeff_dim(f)?;
        let m = one_variable_symbol(0, &coeffs, &basis_in)?.into_matrix();
        identity(basis_out.len()) - &m * m.adjoint()
    };
    // truncation at degree d also drops the coefficients beyond it; their
    // effect is bounded by the tail of the series
    let tail = if poly.degree() > d {
        let rest: f64 = poly.coeffs[d + 1..].iter().map(op_norm).sum();
        2.0 * (rest + poly.tail_bound)
    } else {
        2.0 * poly.tail_bound
    };
    Ok(ProjectionReport {
        residual: hermitian_norm(&(left - right)),
        safe_cutoff: d,
        tail_bound: tail,
        symbol_degree: poly.degree().min(d),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientModelReport {
    /// `‖P_c (P_{H ⊖ Q} - P_R) P_c‖` on the degree-`c` section.
    pub distance: f64,
    pub safe_cutoff: usize,
    pub tail_bound: f64,
    pub symbol_degrees: Vec<usize>,
    pub defect_dim: usize,
    pub pass: bool,
}

/// Per-component symbol data for the quotient model.
struct ComponentSymbol {
    coeffs: Vec<ComplexMatrix>,
    tail: f64,
    degree: usize,
}

fn component_symbol(
    t: &ContractionTuple,
    k: usize,
    q: &ComplexMatrix,
    d: usize,
    tol: f64,
) -> Result<Option<ComponentSymbol>> {
    let tk = t.component(k);
    let mut fk = defect(tk)?;
    for (j, tj) in t.components().iter().enumerate() {
        if j != k {
            fk = fk * defect(&tj.adjoint())?;
        }
    }
    let fbasis = orthonormalize(&fk, RANK_TOL);
    if fbasis.dim() == 0 {
        return Ok(None);
    }
    let theta = charfn_build(tk)?;
    let poly = charfn_poly_truncate(&theta, tol)?;
    let m = tk.nrows();
    let d_ts = defect(&tk.adjoint())?;
    let d_t = defect(tk)?;
    let left = q.adjoint() * &d_ts;
    let right = &d_t * fbasis.basis();
    let mut coeffs = vec![-(q.adjoint() * tk * fbasis.basis())];
    let mut tpow = identity(m);
    let keep = poly.degree().min(d);
    for _ in 1..=keep {
        coeffs.push(&left * tpow.adjoint() * &right);
        tpow = &tpow * tk;
    }
    let mut tail = poly.tail_bound;
    for c in poly.coeffs.iter().skip(keep + 1) {
        tail += op_norm(c);
    }
    Ok(Some(ComponentSymbol {
        coeffs,
        tail,
        degree: keep,
    }))
}

/// Quotient characterization on the degree-`c` section with `c = ⌊d / n⌋`: compares the
/// projection onto the embedded copy of `H` with `Π_k (I - M_k M_k*)`, where
/// `M_k` multiplies by `θ_{T_k}(ζ_k)` from `H²_{F_k}` into `H²_{𝔇_{T*}}`.
/// Every intermediate of that product stays within degree `d`.
pub fn quotient_model_check(
    t: &ContractionTuple,
    d: usize,
    tol: f64,
) -> Result<QuotientModelReport> {
    let n = t.len();
    let c = d / n;
    if c == 0 {
        return Err(Error::UnsafeDegree(format!(
            "degree {d} leaves no section for {n} variables"
        )));
    }
    let model: DilationModel = canonical_embedding(t, c)?;
    let q = model.defect_basis().basis().clone();
    let r = q.ncols();
    let basis = HardyBasis::new(n, d, r)?;
    let cols = basis.count_up_to_degree(c);
    let mut y = ComplexMatrix::zeros(basis.len(), cols);
    for i in 0..cols {
        y[(i, i)] = c64(1.0, 0.0);
    }
    let mut tail = 0.0;
    let mut degrees = Vec::with_capacity(n);
    for k in (0..n).rev() {
        let Some(sym) = component_symbol(t, k, &q, d, tol / 10.0)? else {
            degrees.push(0);
            continue;
        };
        let f = sym.coeffs[0].ncols();
        let op = one_variable_symbol(k, &sym.coeffs, &basis.with_coeff_dim(f)?)?;
        let mm = op.matrix();
        let proj = mm.adjoint() * &y;
        y -= mm * proj;
        tail += 2.0 * sym.tail;
        degrees.push(sym.degree);
    }
    degrees.reverse();
    let y_c = y.rows(0, cols).into_owned();
    let u = model.embedding()?;
    let want = &u * u.adjoint();
    let distance = hermitian_norm(&(y_c - want));
    Ok(QuotientModelReport {
        distance,
        safe_cutoff: c,
        tail_bound: tail,
        symbol_degrees: degrees,
        defect_dim: r,
        pass: distance <= tol,
    })
}
