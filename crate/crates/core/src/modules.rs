//! Submodules and quotient modules of the truncated Hardy space.
//!
//! A submodule generated by an inner symbol `ψ` is carried by its section
//! `span{P_d(ψ ζ^β)}` together with a cutoff `c`: images of inputs of degree
//! `≤ c` are within [`SECTION_TAIL_TOL`] of the true elements. The compressed
//! projector `P_d P_S P_d = M M*` (with `M` the truncated multiplication
//! operator) is exact and is kept alongside.
//!
//! Tensor quotients are assembled from a Takenaka-Malmquist basis of each
//! one-variable model space `H² ⊖ ηH²`; `P_d P_Q P_d` is again exact.

use std::collections::{BTreeMap, HashMap};

use nalgebra::SymmetricEigen;
use serde::Serialize;

use crate::contraction::{mobius, mobius_series, series_mul, BlaschkeProduct};
use crate::error::{Error, Result};
use crate::hardy::{
    is_inner_on_truncation, mult_operator, scalar_kernel_vector, shift, HardyBasis, HardyOperator,
    HardyVector, KernelPoint, MatPoly, MultiIndex,
};
use crate::linops::{
    c64, hconcat, identity, op_norm, orthonormalize, projector, subspace_distance, ComplexMatrix,
    ComplexVector, Subspace, C64,
};

/// Truncation error allowed for the trusted part of a submodule section.
pub const SECTION_TAIL_TOL: f64 = 1e-6;
/// Truncation error allowed for a safe quotient element.
pub const QUOTIENT_TAIL_TOL: f64 = 1e-12;
pub const INNER_TOL: f64 = 1e-8;
/// Eigenvalue threshold of `T*(I - P_V)T` for a wandering direction.
pub const WANDERING_THRESHOLD: f64 = 0.5;
const RANK_TOL: f64 = 1e-10;
const MAX_SERIES_LEN: usize = 1 << 14;

/// Length after which the squared coefficients of a product of Möbius
/// factors with these zeros drop below roughly 1e-40.
fn series_length(zeros: &[C64], at_least: usize) -> usize {
    let r = zeros.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if r == 0.0 {
        return at_least.max(zeros.len() + 2);
    }
    let m = zeros.len().max(1) as f64;
    let mut len = 64.0f64;
    for _ in 0..8 {
        len = (92.2 + 2.0 * (m - 1.0) * len.ln()) / (-2.0 * r.ln()) + m + 8.0;
    }
    (len.ceil() as usize).clamp(at_least, MAX_SERIES_LEN.max(at_least))
}

fn weights(series: &[C64]) -> Vec<f64> {
    series.iter().map(|c| c.norm_sqr()).collect()
}

/// `out[k] = (Σ_{j>k} w_j)^{1/2}`, accumulated from the top.
fn suffix_tails(w: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; w.len()];
    let mut acc = 0.0f64;
    for k in (0..w.len()).rev() {
        out[k] = acc.sqrt();
        acc += w[k];
    }
    out
}

fn tail_at(tails: &[f64], k: usize) -> f64 {
    tails.get(k).copied().unwrap_or(0.0)
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `ζ^β v`, dropping everything past the truncation degree.
fn monomial_times(basis: &HardyBasis, v: &ComplexVector, beta: &[u32]) -> ComplexVector {
    let e = basis.coeff_dim();
    let d = basis.max_degree();
    let bd: usize = beta.iter().map(|&b| b as usize).sum();
    let mut out = ComplexVector::zeros(basis.len());
    if bd > d {
        return out;
    }
    let mut target = vec![0u32; basis.num_vars()];
    for i in 0..basis.monomials_up_to(d - bd) {
        let blk = v.rows(i * e, e);
        if blk.iter().all(|z| *z == C64::default()) {
            continue;
        }
        for (t, (a, b)) in target.iter_mut().zip(basis.monomial(i).iter().zip(beta)) {
            *t = a + b;
        }
        let o = basis.monomial_index(&target).expect("target within degree");
        out.rows_mut(o * e, e).copy_from(&blk);
    }
    out
}

fn columns(m: &ComplexMatrix, idx: &[usize]) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.nrows(), idx.len(), |i, j| m[(i, idx[j])])
}

fn shift_matrices(basis: &HardyBasis) -> Result<Vec<ComplexMatrix>> {
    (0..basis.num_vars())
        .map(|k| shift(k, basis).map(HardyOperator::into_matrix))
        .collect()
}

/// Sixteen points of the polydisc of radius 1/2, variable `k` at angle
/// `2π j (k+1) / 16` on the `j`-th point.
pub fn sample_grid(num_vars: usize) -> Vec<Vec<C64>> {
    (0..16)
        .map(|j| {
            (0..num_vars)
                .map(|k| C64::from_polar(0.5, std::f64::consts::TAU * (j * (k + 1)) as f64 / 16.0))
                .collect()
        })
        .collect()
}

/// Inner symbol generating a submodule.
#[derive(Debug, Clone, PartialEq)]
pub enum InnerSymbol {
    /// Matrix polynomial, assumed isometric on the torus.
    Polynomial(MatPoly),
    /// `Π b_k(ζ_{v_k})` over distinct variables `v_k`.
    Blaschke(Vec<(usize, BlaschkeProduct)>),
}

impl InnerSymbol {
    /// Product of one-variable Blaschke factors; factors in the same
    /// variable are merged.
    pub fn blaschke(factors: Vec<(usize, BlaschkeProduct)>) -> Result<Self> {
        let mut merged: BTreeMap<usize, BlaschkeProduct> = BTreeMap::new();
        for (v, b) in factors {
            let next = match merged.remove(&v) {
                Some(prev) => {
                    let f = prev.unimodular_factor() * b.unimodular_factor();
                    let mut zeros = prev.zeros().to_vec();
                    zeros.extend_from_slice(b.zeros());
                    BlaschkeProduct::new(f / f.norm(), zeros)?
                }
                None => b,
            };
            merged.insert(v, next);
        }
        Ok(Self::Blaschke(merged.into_iter().collect()))
    }

    /// The coordinate function `ζ_k`.
    pub fn variable(k: usize) -> Self {
        let mut p = MatPoly::zero(k + 1, 1, 1);
        p.add_term(MultiIndex::unit(k), identity(1))
            .expect("1x1 term");
        Self::Polynomial(p)
    }

    /// `(rows, cols)` of the symbol's values.
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Self::Polynomial(p) => (p.rows(), p.cols()),
            Self::Blaschke(_) => (1, 1),
        }
    }

    pub fn num_vars(&self) -> usize {
        match self {
            Self::Polynomial(p) => p.terms().keys().map(|a| a.support_len()).max().unwrap_or(0),
            Self::Blaschke(f) => f.iter().map(|(v, _)| v + 1).max().unwrap_or(0),
        }
    }

    /// Degree when the symbol is a polynomial.
    pub fn exact_degree(&self) -> Option<usize> {
        match self {
            Self::Polynomial(p) => Some(p.degree()),
            Self::Blaschke(f) => f
                .iter()
                .all(|(_, b)| b.zeros().iter().all(|z| *z == C64::default()))
                .then(|| f.iter().map(|(_, b)| b.degree()).sum()),
        }
    }

    /// Taylor polynomial of total degree `≤ d`.
    pub fn to_poly(&self, num_vars: usize, d: usize) -> Result<MatPoly> {
        match self {
            Self::Polynomial(p) => Ok(p.truncate(d)),
            Self::Blaschke(f) => {
                let mut acc = MatPoly::scalar_identity(num_vars, 1);
                for (v, b) in f {
                    let s = MatPoly::scalar_series(num_vars, *v, &b.series(d))?;
                    acc = acc.mul_truncated(&s, d)?;
                }
                Ok(acc)
            }
        }
    }

    pub fn eval(&self, lambda: &[C64]) -> ComplexMatrix {
        match self {
            Self::Polynomial(p) => p.eval(lambda),
            Self::Blaschke(f) => {
                let v = f.iter().fold(c64(1.0, 0.0), |acc, (k, b)| {
                    acc * b.eval(lambda.get(*k).copied().unwrap_or_default())
                });
                ComplexMatrix::from_element(1, 1, v)
            }
        }
    }

    /// `tails[k] = ‖(I - P_k) ψ‖` (Frobenius over columns), zero past the end.
    pub fn tails(&self) -> Vec<f64> {
        match self {
            Self::Polynomial(p) => {
                let mut w = vec![0.0; p.degree() + 1];
                for (a, c) in p.terms() {
                    w[a.degree()] += c.norm_squared();
                }
                suffix_tails(&w)
            }
            Self::Blaschke(f) => {
                let mut w = vec![1.0];
                for (_, b) in f {
                    let len = series_length(b.zeros(), 16);
                    w = convolve(&w, &weights(&b.series(len - 1)));
                }
                suffix_tails(&w)
            }
        }
    }

    pub fn tail(&self, k: usize) -> f64 {
        tail_at(&self.tails(), k)
    }

    /// Smallest `k` with `‖(I - P_k) ψ‖ ≤ tol`.
    pub fn tail_degree(&self, tol: f64) -> usize {
        let t = self.tails();
        (0..=t.len())
            .find(|&k| tail_at(&t, k) <= tol)
            .unwrap_or(t.len())
    }
}

/// Safe-degree section of a submodule.
#[derive(Debug, Clone)]
pub struct SubmoduleHandle {
    basis: HardyBasis,
    space: Subspace,
    images: ComplexMatrix,
    levels: Vec<usize>,
    section: ComplexMatrix,
    cutoff: usize,
    generator_hint: Option<InnerSymbol>,
}

impl SubmoduleHandle {
    pub fn basis(&self) -> &HardyBasis {
        &self.basis
    }

    /// Span of the truncated images of all inputs of degree `≤ d - 1`.
    pub fn space(&self) -> &Subspace {
        &self.space
    }

    /// Truncated images `P_d(ψ ζ^β)` spanning [`Self::space`].
    pub fn images(&self) -> &ComplexMatrix {
        &self.images
    }

    /// Input degree `|β|` of each image column.
    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    /// Span of the images whose level lies in `lo..=hi`.
    pub fn level_span(&self, lo: usize, hi: usize) -> Subspace {
        let idx: Vec<usize> = (0..self.levels.len())
            .filter(|&j| (lo..=hi).contains(&self.levels[j]))
            .collect();
        orthonormalize(&columns(&self.images, &idx), RANK_TOL)
    }

    /// Images of level `≤ cutoff - 1`; one more shift keeps them within the
    /// section tolerance.
    pub fn trusted(&self) -> Subspace {
        match self.cutoff {
            0 => Subspace::zero(self.basis.len()),
            c => self.level_span(0, c - 1),
        }
    }

    /// `P_d P_S P_d`.
    pub fn section_projector(&self) -> &ComplexMatrix {
        &self.section
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn generator_hint(&self) -> Option<&InnerSymbol> {
        self.generator_hint.as_ref()
    }
}

/// Submodule `ψ H²` of the truncated space over `basis` (the input side).
pub fn submodule_from_inner(symbol: &InnerSymbol, basis: &HardyBasis) -> Result<SubmoduleHandle> {
    let (_, ei) = symbol.shape();
    if ei != basis.coeff_dim() {
        return Err(Error::DimensionMismatch(format!(
            "symbol has {ei} columns, coefficient dimension is {}",
            basis.coeff_dim()
        )));
    }
    let n = basis.num_vars();
    if symbol.num_vars() > n {
        return Err(Error::DimensionMismatch(format!(
            "symbol uses {} variables, basis has {n}",
            symbol.num_vars()
        )));
    }
    let d = basis.max_degree();
    let k_star = symbol.tail_degree(SECTION_TAIL_TOL).min(d);
    let cutoff = d - k_star;
    let poly = symbol.to_poly(n, d)?;
    let m = mult_operator(&poly, basis)?;
    let out_basis = m.basis_out().clone();
    let op = HardyOperator::new(
        basis.clone(),
        out_basis.clone(),
        m.into_matrix(),
        k_star as i64,
        0,
    )?;
    let inner = is_inner_on_truncation(&op, INNER_TOL);
    if !inner.pass {
        return Err(Error::NotInner {
            residual: inner.residual,
        });
    }
    let m = op.into_matrix();
    let all = basis.count_up_to_degree(d.saturating_sub(1));
    let images = m.columns(0, all).into_owned();
    let levels = (0..all).map(|j| basis.degree_of(j)).collect();
    let space = orthonormalize(&images, RANK_TOL);
    let section = &m * m.adjoint();
    Ok(SubmoduleHandle {
        basis: out_basis,
        space,
        images,
        levels,
        section,
        cutoff,
        generator_hint: Some(symbol.clone()),
    })
}

fn homogeneous_degree(g: &HardyVector) -> Result<usize> {
    let basis = g.basis();
    let e = basis.coeff_dim();
    let mut found = None;
    for k in 0..=basis.max_degree() {
        let r = basis.degree_range(k);
        let mass: f64 = (r.start * e..r.end * e)
            .map(|i| g.coeffs()[i].norm_sqr())
            .sum();
        if mass > 1e-28 {
            if found.is_some() {
                return Err(Error::DimensionMismatch(
                    "generator is not homogeneous".into(),
                ));
            }
            found = Some(k);
        }
    }
    found.ok_or_else(|| Error::DimensionMismatch("zero generator".into()))
}

/// `ζ^β g` for every generator and every `β` with total degree at most `top`.
/// Entries are `(deg g, |β|, ζ^β g)`.
fn generator_images(
    gens: &[HardyVector],
    basis: &HardyBasis,
    top: usize,
) -> Result<Vec<(usize, usize, ComplexVector)>> {
    let mut out = Vec::new();
    for g in gens {
        if g.basis() != basis {
            return Err(Error::DimensionMismatch(
                "generator lives on a different basis".into(),
            ));
        }
        let delta = homogeneous_degree(g)?;
        if delta > top {
            continue;
        }
        for b in 0..basis.monomials_up_to(top - delta) {
            let beta = basis.monomial(b);
            out.push((
                delta,
                basis.monomial_degree(b),
                monomial_times(basis, g.coeffs(), beta),
            ));
        }
    }
    Ok(out)
}

fn stack(vectors: &[&ComplexVector], rows: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(rows, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        m.set_column(j, v);
    }
    m
}

/// Submodule generated by homogeneous polynomials; its section is exact.
pub fn submodule_from_generators(
    gens: &[HardyVector],
    basis: &HardyBasis,
) -> Result<SubmoduleHandle> {
    let d = basis.max_degree();
    let raw = generator_images(gens, basis, d)?;
    let all: Vec<&ComplexVector> = raw.iter().map(|(_, _, v)| v).collect();
    let images = stack(&all, basis.len());
    let levels = raw.iter().map(|(_, l, _)| *l).collect();
    let space = orthonormalize(&images, RANK_TOL);
    let top = raw.iter().map(|(delta, _, _)| *delta).max().unwrap_or(0);
    let section = projector(&space);
    Ok(SubmoduleHandle {
        basis: basis.clone(),
        space,
        images,
        levels,
        section,
        cutoff: d.saturating_sub(top),
        generator_hint: None,
    })
}

/// Submodule generated by `ζ_1` and `ζ_2`; not doubly commuting.
pub fn non_principal_fixture(basis: &HardyBasis) -> Result<SubmoduleHandle> {
    if basis.num_vars() < 2 || basis.coeff_dim() != 1 {
        return Err(Error::DimensionMismatch(
            "fixture needs two scalar variables".into(),
        ));
    }
    let gens = [
        HardyVector::monomial(basis, &MultiIndex::unit(0), 0)?,
        HardyVector::monomial(basis, &MultiIndex::unit(1), 0)?,
    ];
    submodule_from_generators(&gens, basis)
}

/// Commutator residuals of a restricted or compressed shift tuple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommutationReport {
    /// `max_{j≠k} ‖[X_j*, X_k]‖` on the checked columns.
    pub cross_commutator: f64,
    /// `max_{j<k} ‖[X_j, X_k]‖` on the checked columns.
    pub commutator: f64,
    pub columns_checked: usize,
    pub safe_cutoff: usize,
    pub pass: bool,
}

/// `[R_j*, R_k]` for `R_k = M_{ζ_k}|_S`, on the trusted columns of the section.
pub fn restriction_double_commutation(s: &SubmoduleHandle, tol: f64) -> Result<CommutationReport> {
    let trusted = s.trusted();
    let x = trusted.basis();
    if x.ncols() == 0 {
        return Err(Error::UnsafeDegree(format!(
            "submodule cutoff {} leaves no trusted columns",
            s.cutoff
        )));
    }
    let shifts = shift_matrices(&s.basis)?;
    let images: Vec<ComplexMatrix> = shifts.iter().map(|m| m * x).collect();
    let back: Vec<ComplexMatrix> = shifts
        .iter()
        .map(|m| &s.section * (m.adjoint() * x))
        .collect();
    let n = shifts.len();
    let (mut cross, mut comm) = (0.0f64, 0.0f64);
    for j in 0..n {
        for k in 0..n {
            if j == k {
                continue;
            }
            let lhs = &s.section * (shifts[j].adjoint() * &images[k]);
            let rhs = &shifts[k] * &back[j];
            cross = cross.max(op_norm(&(lhs - rhs)));
            if j < k {
                comm = comm.max(op_norm(
                    &(&shifts[j] * &images[k] - &shifts[k] * &images[j]),
                ));
            }
        }
    }
    Ok(CommutationReport {
        cross_commutator: cross,
        commutator: comm,
        columns_checked: x.ncols(),
        safe_cutoff: s.cutoff,
        pass: cross <= tol && comm <= tol,
    })
}

/// Outcome of [`wandering_generator_extract`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WanderingReport {
    pub dim: usize,
    /// Unit-norm generator, rotated onto the hint when there is one.
    pub generator: Option<HardyVector>,
    pub phase: Option<C64>,
    /// Max of `|g(λ) - ψ(λ)|` over [`sample_grid`].
    pub deviation: Option<f64>,
    /// Eigenvalues of `T*(I - P_V)T` in decreasing order.
    pub spectrum: Vec<f64>,
    pub safe_cutoff: usize,
}

fn hint_coefficients(hint: &InnerSymbol, basis: &HardyBasis) -> Result<ComplexVector> {
    let poly = hint.to_poly(basis.num_vars(), basis.max_degree())?;
    let mut v = ComplexVector::zeros(basis.len());
    for (alpha, c) in poly.terms() {
        if let Some(i) = basis.index_of(alpha, 0) {
            v[i] = c[(0, 0)];
        }
    }
    Ok(v)
}

/// `W = S ⊖ Σ_k ζ_k S` on the section, and the generator when `dim W = 1`.
///
/// Computed as `span(levels ≤ c) ⊖ span(levels 1..=c)`; both sides are within
/// the section tolerance of the true subspaces.
pub fn wandering_generator_extract(s: &SubmoduleHandle) -> Result<WanderingReport> {
    let basis = &s.basis;
    if basis.coeff_dim() != 1 {
        return Err(Error::DimensionMismatch(
            "extraction needs scalar coefficients".into(),
        ));
    }
    let low = s.level_span(0, s.cutoff);
    let t = low.basis();
    let mut report = WanderingReport {
        dim: 0,
        generator: None,
        phase: None,
        deviation: None,
        spectrum: Vec::new(),
        safe_cutoff: s.cutoff,
    };
    if t.ncols() == 0 {
        return Ok(report);
    }
    // shifts of the levels below the cutoff; higher levels are too truncated
    let v = if s.cutoff == 0 {
        Subspace::zero(basis.len())
    } else {
        s.level_span(1, s.cutoff)
    };
    let vt = v.basis().adjoint() * t;
    let g = identity(t.ncols()) - vt.adjoint() * vt;
    let g = (&g + g.adjoint()) * c64(0.5, 0.0);
    let eig = SymmetricEigen::new(g);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    report.spectrum = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let picked: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| eig.eigenvalues[i] > WANDERING_THRESHOLD)
        .collect();
    report.dim = picked.len();
    if picked.len() > 1 {
        return Err(Error::AmbiguousWandering { dim: picked.len() });
    }
    let Some(&i) = picked.first() else {
        return Ok(report);
    };
    let mut w: ComplexVector = t * eig.eigenvectors.column(i);
    w /= c64(w.norm(), 0.0);
    let grid = sample_grid(basis.num_vars());
    let phase = match &s.generator_hint {
        Some(hint) if hint.shape() == (1, 1) => {
            let h = hint_coefficients(hint, basis)?;
            let top = (0..h.len())
                .max_by(|&a, &b| h[a].norm().total_cmp(&h[b].norm()))
                .expect("non-empty basis");
            let u = w[top] / h[top];
            let u = u / u.norm();
            w *= u.conj();
            let gen = HardyVector::new(basis.clone(), w.clone())?;
            let dev = grid.iter().fold(0.0f64, |m, lam| {
                m.max((gen.eval(lam)[0] - hint.eval(lam)[(0, 0)]).norm())
            });
            report.deviation = Some(dev);
            u
        }
        _ => {
            let top = (0..w.len())
                .max_by(|&a, &b| w[a].norm().total_cmp(&w[b].norm()))
                .expect("non-empty basis");
            let u = w[top] / w[top].norm();
            w *= u.conj();
            u
        }
    };
    report.phase = Some(phase);
    report.generator = Some(HardyVector::new(basis.clone(), w)?);
    Ok(report)
}

/// Distance between the section and the shift-invariant span of `generator`,
/// both taken over inputs of degree `≤ d - 1`.
pub fn regeneration_distance(s: &SubmoduleHandle, generator: &HardyVector) -> Result<f64> {
    let basis = &s.basis;
    if generator.basis() != basis {
        return Err(Error::DimensionMismatch(
            "generator lives on a different basis".into(),
        ));
    }
    let top = basis.monomials_up_to(basis.max_degree().saturating_sub(1));
    let cols: Vec<ComplexVector> = (0..top)
        .map(|b| monomial_times(basis, generator.coeffs(), basis.monomial(b)))
        .collect();
    let span = orthonormalize(
        &stack(&cols.iter().collect::<Vec<_>>(), basis.len()),
        RANK_TOL,
    );
    subspace_distance(&span, &s.space)
}

/// Lowest homogeneous degree of the section and how much of it `Σ ζ_k S` reaches.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObstructionReport {
    pub k0: usize,
    /// Norm of the degree-`k0` rows of the section basis.
    pub section_norm: f64,
    /// Norm of the degree-`k0` rows of the shifted section; zero by degree count.
    pub shifted_norm: f64,
}

pub fn lowest_degree_obstruction(s: &SubmoduleHandle) -> Result<ObstructionReport> {
    let basis = &s.basis;
    let e = basis.coeff_dim();
    let t = s.space.basis();
    let rows_norm = |m: &ComplexMatrix, k: usize| {
        let r = basis.degree_range(k);
        op_norm(&m.rows(r.start * e, (r.end - r.start) * e).into_owned())
    };
    let k0 = (0..=basis.max_degree())
        .find(|&k| rows_norm(t, k) > 1e-8)
        .ok_or_else(|| Error::UnsafeDegree("section is zero".into()))?;
    let shifts = shift_matrices(basis)?;
    let moved: Vec<ComplexMatrix> = shifts.iter().map(|m| m * t).collect();
    let v = hconcat(&moved.iter().collect::<Vec<_>>());
    Ok(ObstructionReport {
        k0,
        section_norm: rows_norm(t, k0),
        shifted_norm: rows_norm(&v, k0),
    })
}

/// Which model-space vector and which free monomial an element is built from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ElementLabel {
    /// Index into the model basis of each listed variable.
    pub model: Vec<usize>,
    /// Exponents on the remaining variables (zero on the listed ones).
    pub free: Vec<u32>,
}

/// Section of a quotient module with its compressed shifts.
#[derive(Debug, Clone)]
pub struct QuotientHandle {
    basis: HardyBasis,
    space: Subspace,
    section: ComplexMatrix,
    elements: ComplexMatrix,
    degrees: Vec<usize>,
    labels: Option<Vec<ElementLabel>>,
    safe: Vec<usize>,
    compressions: Vec<HardyOperator>,
    jordan: Vec<ComplexMatrix>,
    cutoff: Option<usize>,
}

impl QuotientHandle {
    pub fn basis(&self) -> &HardyBasis {
        &self.basis
    }

    /// Span of the safe elements.
    pub fn space(&self) -> &Subspace {
        &self.space
    }

    /// `P_d P_Q P_d`.
    pub fn section_projector(&self) -> &ComplexMatrix {
        &self.section
    }

    /// Truncated orthonormal basis of `Q`, one column per element.
    pub fn elements(&self) -> &ComplexMatrix {
        &self.elements
    }

    /// Free degree (tensor quotients) or total degree (graded quotients) of
    /// each element.
    pub fn element_degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn labels(&self) -> Option<&[ElementLabel]> {
        self.labels.as_deref()
    }

    /// Columns of [`Self::elements`] that stay accurate through two shifts.
    pub fn safe_columns(&self) -> &[usize] {
        &self.safe
    }

    /// `P_d P_Q M_{ζ_k} P_Q P_d`, one per variable.
    pub fn compressions(&self) -> &[HardyOperator] {
        &self.compressions
    }

    /// One-variable Jordan blocks of the listed model spaces, in the
    /// Takenaka-Malmquist basis.
    pub fn jordan_blocks(&self) -> &[ComplexMatrix] {
        &self.jordan
    }

    /// Largest free degree among the safe elements.
    pub fn cutoff(&self) -> Option<usize> {
        self.cutoff
    }

    fn safe_matrix(&self) -> Result<ComplexMatrix> {
        if self.safe.is_empty() {
            return Err(Error::UnsafeDegree(format!(
                "no quotient element is accurate at degree {}",
                self.basis.max_degree()
            )));
        }
        Ok(columns(&self.elements, &self.safe))
    }
}

/// Orthonormal basis `e_i = √(1-|a_i|²)/(1-ā_i z) · Π_{l<i} (z-a_l)/(1-ā_l z)`
/// of `H² ⊖ ηH²` as coefficient sequences of length `len`.
fn model_basis(eta: &BlaschkeProduct, len: usize) -> Vec<Vec<C64>> {
    let mut prefix = vec![C64::default(); len];
    prefix[0] = c64(1.0, 0.0);
    let mut out = Vec::with_capacity(eta.degree());
    for &a in eta.zeros() {
        let s = (1.0 - a.norm_sqr()).sqrt();
        let mut p = c64(s, 0.0);
        let kern: Vec<C64> = (0..len)
            .map(|_| {
                let v = p;
                p *= a.conj();
                v
            })
            .collect();
        out.push(series_mul(&prefix, &kern));
        let b: Vec<C64> = mobius_series(a, len - 1).into_iter().map(|c| -c).collect();
        prefix = series_mul(&prefix, &b);
    }
    out
}

/// `J[l, i] = ⟨z e_i, e_l⟩`.
fn jordan_block(model: &[Vec<C64>]) -> ComplexMatrix {
    let m = model.len();
    ComplexMatrix::from_fn(m, m, |l, i| {
        (1..model[i].len())
            .map(|j| model[i][j - 1] * model[l][j].conj())
            .sum()
    })
}

/// Compressions `Π M_k Π` with `Π = B B*`.
fn compress(basis: &HardyBasis, elements: &ComplexMatrix) -> Result<Vec<HardyOperator>> {
    let d = basis.max_degree() as i64;
    shift_matrices(basis)?
        .into_iter()
        .map(|m| {
            let inner = elements.adjoint() * (m * elements);
            let c = elements * inner * elements.adjoint();
            HardyOperator::new(basis.clone(), basis.clone(), c, 1, -d)
        })
        .collect()
}

/// `⊗_k (H² ⊖ η_k H²)` in variables `0..len` and `H²` in the rest.
pub fn quotient_tensor_build(
    inner_list: &[BlaschkeProduct],
    basis: &HardyBasis,
) -> Result<QuotientHandle> {
    let n = basis.num_vars();
    let d = basis.max_degree();
    let r = inner_list.len();
    if r > n {
        return Err(Error::DimensionMismatch(format!(
            "{r} model spaces for {n} variables"
        )));
    }
    if basis.coeff_dim() != 1 {
        return Err(Error::DimensionMismatch(
            "tensor quotients need scalar coefficients".into(),
        ));
    }
    if let Some(b) = inner_list.iter().find(|b| b.degree() == 0) {
        return Err(Error::DimensionMismatch(format!(
            "constant inner factor {}",
            b.unimodular_factor()
        )));
    }
    if let Some(b) = inner_list.iter().find(|b| b.degree() > d) {
        return Err(Error::DegreeOverflow {
            degree: b.degree(),
            max: d,
        });
    }
    let models: Vec<Vec<Vec<C64>>> = inner_list
        .iter()
        .map(|b| model_basis(b, series_length(b.zeros(), d + 16)))
        .collect();
    let jordan: Vec<ComplexMatrix> = models.iter().map(|m| jordan_block(m)).collect();

    let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
    for m in &models {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                (0..m.len()).map(move |i| {
                    let mut next = c.clone();
                    next.push(i);
                    next
                })
            })
            .collect();
    }
    let combo_tails: Vec<Vec<f64>> = combos
        .iter()
        .map(|c| {
            let w = c
                .iter()
                .zip(&models)
                .fold(vec![1.0], |acc, (&i, m)| convolve(&acc, &weights(&m[i])));
            suffix_tails(&w)
        })
        .collect();

    let free: Vec<usize> = (0..basis.num_monomials())
        .filter(|&i| basis.monomial(i)[..r].iter().all(|&a| a == 0))
        .collect();
    let free_pos: HashMap<usize, usize> = free.iter().enumerate().map(|(p, &i)| (i, p)).collect();
    let nc = combos.len();
    let mut elements = ComplexMatrix::zeros(basis.len(), free.len() * nc);
    let mut target = vec![0u32; n];
    for g in 0..basis.num_monomials() {
        let gamma = basis.monomial(g);
        target.copy_from_slice(gamma);
        target[..r].iter_mut().for_each(|a| *a = 0);
        let b = basis
            .monomial_index(&target)
            .expect("free part within degree");
        let col0 = free_pos[&b] * nc;
        for (ci, c) in combos.iter().enumerate() {
            let v = c.iter().enumerate().fold(c64(1.0, 0.0), |acc, (k, &i)| {
                acc * models[k][i][gamma[k] as usize]
            });
            elements[(g, col0 + ci)] = v;
        }
    }
    let mut labels = Vec::with_capacity(elements.ncols());
    let mut degrees = Vec::with_capacity(elements.ncols());
    let mut safe = Vec::new();
    let mut cutoff = None;
    for (p, &b) in free.iter().enumerate() {
        let fd = basis.monomial_degree(b);
        for (ci, c) in combos.iter().enumerate() {
            let col = p * nc + ci;
            labels.push(ElementLabel {
                model: c.clone(),
                free: basis.monomial(b).to_vec(),
            });
            degrees.push(fd);
            if fd + 2 <= d && tail_at(&combo_tails[ci], d - fd - 2) <= QUOTIENT_TAIL_TOL {
                safe.push(col);
                cutoff = Some(cutoff.map_or(fd, |c: usize| c.max(fd)));
            }
        }
    }
    let section = &elements * elements.adjoint();
    let space = orthonormalize(&columns(&elements, &safe), RANK_TOL);
    let compressions = compress(basis, &elements)?;
    Ok(QuotientHandle {
        basis: basis.clone(),
        space,
        section,
        elements,
        degrees,
        labels: Some(labels),
        safe,
        compressions,
        jordan,
        cutoff,
    })
}

/// Quotient by the submodule generated by homogeneous polynomials.
pub fn quotient_from_generators(
    gens: &[HardyVector],
    basis: &HardyBasis,
) -> Result<QuotientHandle> {
    let d = basis.max_degree();
    let e = basis.coeff_dim();
    let images = generator_images(gens, basis, d)?;
    let mut cols: Vec<ComplexVector> = Vec::new();
    let mut degrees = Vec::new();
    for k in 0..=d {
        let r = basis.degree_range(k);
        let (lo, h) = (r.start * e, (r.end - r.start) * e);
        let here: Vec<ComplexVector> = images
            .iter()
            .filter(|(delta, l, _)| delta + l == k)
            .map(|(_, _, v)| v.rows(lo, h).into_owned())
            .collect();
        let s = orthonormalize(&stack(&here.iter().collect::<Vec<_>>(), h), RANK_TOL);
        let comp = identity(h) - projector(&s);
        let q = orthonormalize(&comp, RANK_TOL);
        for j in 0..q.dim() {
            let mut v = ComplexVector::zeros(basis.len());
            v.rows_mut(lo, h).copy_from(&q.basis().column(j));
            cols.push(v);
            degrees.push(k);
        }
    }
    let elements = stack(&cols.iter().collect::<Vec<_>>(), basis.len());
    let safe: Vec<usize> = (0..degrees.len())
        .filter(|&j| degrees[j] + 2 <= d)
        .collect();
    let cutoff = safe.iter().map(|&j| degrees[j]).max();
    let section = &elements * elements.adjoint();
    let space = orthonormalize(&columns(&elements, &safe), RANK_TOL);
    let compressions = compress(basis, &elements)?;
    Ok(QuotientHandle {
        basis: basis.clone(),
        space,
        section,
        elements,
        degrees,
        labels: None,
        safe,
        compressions,
        jordan: Vec::new(),
        cutoff,
    })
}

/// `H² ⊖ (ζ_1 - ζ_2)H²`; its compressions do not doubly commute.
pub fn diagonal_quotient_fixture(basis: &HardyBasis) -> Result<QuotientHandle> {
    if basis.num_vars() < 2 || basis.coeff_dim() != 1 {
        return Err(Error::DimensionMismatch(
            "fixture needs two scalar variables".into(),
        ));
    }
    let g = HardyVector::monomial(basis, &MultiIndex::unit(0), 0)?.into_coeffs()
        - HardyVector::monomial(basis, &MultiIndex::unit(1), 0)?.into_coeffs();
    quotient_from_generators(&[HardyVector::new(basis.clone(), g)?], basis)
}

/// `[C_j*, C_k]` and `[C_j, C_k]` on the safe elements.
pub fn compression_double_commutation(q: &QuotientHandle, tol: f64) -> Result<CommutationReport> {
    let x = q.safe_matrix()?;
    let c: Vec<&ComplexMatrix> = q.compressions.iter().map(|o| o.matrix()).collect();
    let fwd: Vec<ComplexMatrix> = c.iter().map(|m| *m * &x).collect();
    let back: Vec<ComplexMatrix> = c.iter().map(|m| m.adjoint() * &x).collect();
    let (mut cross, mut comm) = (0.0f64, 0.0f64);
    for j in 0..c.len() {
        for k in 0..c.len() {
            if j == k {
                continue;
            }
            let lhs = c[j].adjoint() * &fwd[k];
            let rhs = c[k] * &back[j];
            cross = cross.max(op_norm(&(lhs - rhs)));
            if j < k {
                comm = comm.max(op_norm(&(c[j] * &fwd[k] - c[k] * &fwd[j])));
            }
        }
    }
    Ok(CommutationReport {
        cross_commutator: cross,
        commutator: comm,
        columns_checked: x.ncols(),
        safe_cutoff: q.cutoff.unwrap_or(0),
        pass: cross <= tol && comm <= tol,
    })
}

/// `‖C_k X - X'‖` on the safe elements, where `X'` is the image predicted by
/// `J ⊗ I` (listed variable) or by the free shift (other variables).
pub fn jordan_structure_residual(q: &QuotientHandle, k: usize) -> Result<f64> {
    let labels = q
        .labels
        .as_ref()
        .ok_or_else(|| Error::DimensionMismatch("quotient has no tensor labels".into()))?;
    let c = q.compressions.get(k).ok_or_else(|| {
        Error::IndexOutOfRange(format!("variable {k} of {}", q.compressions.len()))
    })?;
    let x = q.safe_matrix()?;
    let index: HashMap<&ElementLabel, usize> =
        labels.iter().enumerate().map(|(i, l)| (l, i)).collect();
    let mut predicted = ComplexMatrix::zeros(q.basis.len(), q.safe.len());
    for (j, &col) in q.safe.iter().enumerate() {
        let label = &labels[col];
        if k < q.jordan.len() {
            let jb = &q.jordan[k];
            for l in 0..jb.nrows() {
                let mut to = label.clone();
                to.model[k] = l;
                let src = index[&to];
                let coef = jb[(l, label.model[k])];
                let mut dst = predicted.column_mut(j);
                dst.axpy(coef, &q.elements.column(src), c64(1.0, 0.0));
            }
        } else {
            let mut to = label.clone();
            to.free[k] += 1;
            let src = *index
                .get(&to)
                .ok_or_else(|| Error::UnsafeDegree("shifted element past the truncation".into()))?;
            predicted.set_column(j, &q.elements.column(src));
        }
    }
    Ok(op_norm(&(c.matrix() * x - predicted)))
}

/// Outcome of [`kernel_eigen_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelEigenReport {
    pub residual: f64,
    /// `r · ‖(I - P_d) K_λ‖` for `r` symbols.
    pub tail_bound: f64,
    /// `μ_k = b_k(λ_k)`.
    pub mu: Vec<C64>,
    pub pass: bool,
}

/// `‖Π_k (I - Φ_k Φ_k*) K_λ - K_λ‖` with `Φ_k = φ_{μ_k}(M_{b_k(ζ_k)})`.
pub fn kernel_eigen_check(
    symbols: &[BlaschkeProduct],
    lambda: &KernelPoint,
    basis: &HardyBasis,
) -> Result<KernelEigenReport> {
    let n = basis.num_vars();
    if symbols.len() > n || lambda.support_len() > n {
        return Err(Error::DimensionMismatch(format!(
            "{} symbols and a point on {} variables over {n} variables",
            symbols.len(),
            lambda.support_len()
        )));
    }
    let d = basis.max_degree();
    let y = scalar_kernel_vector(lambda, basis)?.into_coeffs();
    let mut v = y.clone();
    let mut mu = Vec::with_capacity(symbols.len());
    for (k, b) in symbols.iter().enumerate() {
        let m = mult_operator(&MatPoly::scalar_series(n, k, &b.series(d))?, basis)?.into_matrix();
        let m_k = b.eval(lambda.get(k));
        let phi = mobius(&m, m_k)?;
        v -= &phi * (phi.adjoint() * &v);
        mu.push(m_k);
    }
    let residual = (v - y).norm();
    let tail_bound = symbols.len() as f64 * lambda.kernel_tail_sqr(d).sqrt();
    Ok(KernelEigenReport {
        residual,
        tail_bound,
        mu,
        pass: residual <= tail_bound + 1e-12,
    })
}

/// Both sides of the product formula for `P_Q ζ^α`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductFormulaReport {
    /// `Π_k (P_{J_k} z^{α_k})(ζ_k) · Π_{rest} ζ_k^{α_k}`, truncated.
    pub formula: HardyVector,
    /// `Π_k (I - Θ_k Θ_k*) ζ^α` on a longer truncation, cut back to `d`.
    pub direct: HardyVector,
    pub distance: f64,
}

/// `(I - T T*) v` with `T` the lower-triangular Toeplitz matrix of `eta`.
fn toeplitz_complement(eta: &[C64], v: &[C64]) -> Vec<C64> {
    let l = v.len();
    let mut adj = vec![C64::default(); l];
    for (i, a) in adj.iter_mut().enumerate() {
        *a = (i..l).map(|j| eta[j - i].conj() * v[j]).sum();
    }
    (0..l)
        .map(|i| v[i] - (0..=i).map(|j| eta[i - j] * adj[j]).sum::<C64>())
        .collect()
}

pub fn projector_product_formula(
    inner_list: &[BlaschkeProduct],
    alpha: &MultiIndex,
    basis: &HardyBasis,
) -> Result<ProductFormulaReport> {
    let n = basis.num_vars();
    let d = basis.max_degree();
    let r = inner_list.len();
    if r > n || alpha.support_len() > n {
        return Err(Error::DimensionMismatch(
            "α or the inner list uses unmaterialized variables".into(),
        ));
    }
    if basis.coeff_dim() != 1 {
        return Err(Error::DimensionMismatch(
            "product formula needs scalar coefficients".into(),
        ));
    }
    if alpha.degree() > d {
        return Err(Error::DegreeOverflow {
            degree: alpha.degree(),
            max: d,
        });
    }
    let exps = alpha.padded(n);

    // formula side: one-variable projections from the model bases
    let factors: Vec<Vec<C64>> = inner_list
        .iter()
        .zip(&exps)
        .map(|(b, &a)| {
            let model = model_basis(b, series_length(b.zeros(), d + 16));
            let mut p = vec![C64::default(); d + 1];
            for e in &model {
                let w = e.get(a as usize).copied().unwrap_or_default().conj();
                for (j, pj) in p.iter_mut().enumerate() {
                    *pj += w * e[j];
                }
            }
            p
        })
        .collect();
    let mut formula = ComplexVector::zeros(basis.len());
    for g in 0..basis.num_monomials() {
        let gamma = basis.monomial(g);
        if gamma[r..] != exps[r..] {
            continue;
        }
        formula[g] = factors
            .iter()
            .enumerate()
            .fold(c64(1.0, 0.0), |acc, (k, f)| acc * f[gamma[k] as usize]);
    }

    // direct side: Toeplitz complements on a longer truncation in the
    // variables that matter
    let m = r.max(alpha.support_len()).max(1);
    let model_tail = inner_list
        .iter()
        .map(|b| {
            let model = model_basis(b, series_length(b.zeros(), d + 16));
            model
                .iter()
                .map(|e| suffix_tails(&weights(e)))
                .map(|t| {
                    (0..=t.len())
                        .find(|&k| tail_at(&t, k) <= 1e-17)
                        .unwrap_or(t.len())
                })
                .max()
                .unwrap_or(0)
        })
        .max()
        .unwrap_or(0);
    let big = HardyBasis::new(m, d + model_tail + 2, 1)?;
    let dd = big.max_degree();
    let mut v = vec![C64::default(); big.len()];
    v[big.monomial_index(&exps[..m]).expect("α within degree")] = c64(1.0, 0.0);
    for (k, b) in inner_list.iter().enumerate() {
        let eta = b.series(dd);
        let mut idx = vec![0u32; m];
        for g in 0..big.num_monomials() {
            if big.monomial(g)[k] != 0 {
                continue;
            }
            idx.copy_from_slice(big.monomial(g));
            let len = dd - big.monomial_degree(g) + 1;
            let slots: Vec<usize> = (0..len)
                .map(|j| {
                    idx[k] = j as u32;
                    big.monomial_index(&idx).expect("slice within degree")
                })
                .collect();
            let slice: Vec<C64> = slots.iter().map(|&s| v[s]).collect();
            for (s, val) in slots.iter().zip(toeplitz_complement(&eta, &slice)) {
                v[*s] = val;
            }
        }
    }
    let mut direct = ComplexVector::zeros(basis.len());
    let mut full = vec![0u32; n];
    for g in 0..big.num_monomials() {
        if big.monomial_degree(g) > d {
            break;
        }
        full[..m].copy_from_slice(big.monomial(g));
        let o = basis.monomial_index(&full).expect("within degree");
        direct[o] = v[g];
    }
    let distance = (&formula - &direct).norm();
    Ok(ProductFormulaReport {
        formula: HardyVector::new(basis.clone(), formula)?,
        direct: HardyVector::new(basis.clone(), direct)?,
        distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hardy::{HardyBasis, KernelPoint};
    use proptest::prelude::*;

    fn phi(a: f64) -> BlaschkeProduct {
        BlaschkeProduct::from_zeros(vec![c64(a, 0.0)]).unwrap()
    }

    fn z_power(m: usize) -> BlaschkeProduct {
        BlaschkeProduct::from_zeros(vec![C64::default(); m]).unwrap()
    }

    fn coordinate_block(basis: &HardyBasis, keep: impl Fn(&[u32]) -> bool) -> Subspace {
        let idx: Vec<usize> = (0..basis.num_monomials())
            .filter(|&i| keep(basis.monomial(i)))
            .collect();
        Subspace::from_orthonormal(columns(&identity(basis.len()), &idx)).unwrap()
    }

    #[test]
    fn multiples_of_first_variable() {
        let basis = HardyBasis::new(2, 5, 1).unwrap();
        let s = submodule_from_inner(&InnerSymbol::variable(0), &basis).unwrap();
        let want = coordinate_block(&basis, |m| m[0] >= 1);
        assert!(subspace_distance(s.space(), &want).unwrap() < 1e-12);
        assert_eq!(s.cutoff(), 4);
    }

    #[test]
    fn z_squared_section() {
        let basis = HardyBasis::new(1, 8, 1).unwrap();
        let sym = InnerSymbol::blaschke(vec![(0, z_power(2))]).unwrap();
        let s = submodule_from_inner(&sym, &basis).unwrap();
        let want = coordinate_block(&basis, |m| m[0] >= 2);
        assert_eq!(s.space().dim(), 7);
        assert!(subspace_distance(s.space(), &want).unwrap() < 1e-12);
    }

    #[test]
    fn mobius_section_dimension() {
        let basis = HardyBasis::new(1, 20, 1).unwrap();
        let sym = InnerSymbol::blaschke(vec![(0, phi(0.5))]).unwrap();
        let s = submodule_from_inner(&sym, &basis).unwrap();
        assert_eq!(s.space().dim(), 20);
    }

    #[test]
    fn non_inner_symbol_rejected() {
        let basis = HardyBasis::new(1, 6, 1).unwrap();
        let half = MatPoly::constant(1, ComplexMatrix::from_element(1, 1, c64(0.5, 0.0)));
        let err = submodule_from_inner(&InnerSymbol::Polynomial(half), &basis).unwrap_err();
        assert!(matches!(err, Error::NotInner { residual } if (residual - 0.75).abs() < 1e-12));
    }

    #[test]
    fn full_space_restriction_commutes() {
        let basis = HardyBasis::new(2, 6, 1).unwrap();
        let one = MatPoly::scalar_identity(2, 1);
        let s = submodule_from_inner(&InnerSymbol::Polynomial(one), &basis).unwrap();
        let r = restriction_double_commutation(&s, 1e-12).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn mobius_restriction_commutes() {
        let basis = HardyBasis::new(2, 24, 1).unwrap();
        let sym = InnerSymbol::blaschke(vec![(0, phi(0.3))]).unwrap();
        let s = submodule_from_inner(&sym, &basis).unwrap();
        let r = restriction_double_commutation(&s, 1e-5).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn non_principal_fixture_fails() {
        let basis = HardyBasis::new(2, 4, 1).unwrap();
        let s = non_principal_fixture(&basis).unwrap();
        let r = restriction_double_commutation(&s, 1e-6).unwrap();
        assert!(!r.pass);
        assert!(r.cross_commutator >= 0.1, "{r:?}");
        assert!(matches!(
            wandering_generator_extract(&s),
            Err(Error::AmbiguousWandering { dim: 2 })
        ));
    }

    #[test]
    fn extract_z_squared() {
        let basis = HardyBasis::new(1, 10, 1).unwrap();
        let sym = InnerSymbol::blaschke(vec![(0, z_power(2))]).unwrap();
        let s = submodule_from_inner(&sym, &basis).unwrap();
        let w = wandering_generator_extract(&s).unwrap();
        assert_eq!(w.dim, 1);
        let g = w.generator.unwrap();
        assert!((g.coeffs()[2] - c64(1.0, 0.0)).norm() < 1e-12);
        assert!(w.deviation.unwrap() < 1e-12);
    }

    #[test]
    fn extract_full_space() {
        let basis = HardyBasis::new(2, 5, 1).unwrap();
        let one = MatPoly::scalar_identity(2, 1);
        let s = submodule_from_inner(&InnerSymbol::Polynomial(one), &basis).unwrap();
        let w = wandering_generator_extract(&s).unwrap();
        let g = w.generator.unwrap();
        assert!((g.coeffs()[0] - c64(1.0, 0.0)).norm() < 1e-12);
        assert!((g.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn extract_mobius_generator() {
        let basis = HardyBasis::new(1, 30, 1).unwrap();
        let sym = InnerSymbol::blaschke(vec![(0, phi(0.5))]).unwrap();
        let s = submodule_from_inner(&sym, &basis).unwrap();
        let w = wandering_generator_extract(&s).unwrap();
        assert_eq!(w.dim, 1);
        assert!(w.deviation.unwrap() <= 1e-7, "{:?}", w.deviation);
        let g = w.generator.unwrap();
        assert!(regeneration_distance(&s, &g).unwrap() < 1e-6);
    }

    #[test]
    fn obstruction_at_lowest_degree() {
        let basis = HardyBasis::new(2, 6, 1).unwrap();
        let s = non_principal_fixture(&basis).unwrap();
        let o = lowest_degree_obstruction(&s).unwrap();
        assert_eq!(o.k0, 1);
        assert!(o.section_norm > 0.5);
        assert_eq!(o.shifted_norm, 0.0);
    }

    #[test]
    fn submodule_section_is_shift_invariant() {
        let basis = HardyBasis::new(2, 12, 1).unwrap();
        let sym = InnerSymbol::blaschke(vec![(0, phi(0.4)), (1, phi(-0.2))]).unwrap();
        let s = submodule_from_inner(&sym, &basis).unwrap();
        let m = mult_operator(&sym.to_poly(2, 12).unwrap(), &basis)
            .unwrap()
            .into_matrix();
        let inputs = m.columns(0, basis.count_up_to_degree(10)).into_owned();
        let p = projector(s.space());
        for sh in shift_matrices(&basis).unwrap() {
            let moved = &sh * &inputs;
            assert!(op_norm(&(&moved - &p * &moved)) < 1e-10);
        }
    }

    #[test]
    fn quotient_by_z_is_constants() {
        let basis = HardyBasis::new(1, 6, 1).unwrap();
        let q = quotient_tensor_build(&[z_power(1)], &basis).unwrap();
        let want = coordinate_block(&basis, |m| m[0] == 0);
        assert!(subspace_distance(q.space(), &want).unwrap() < 1e-12);
        assert!(op_norm(q.compressions()[0].matrix()) < 1e-14);
        assert!(q.jordan_blocks()[0].norm() < 1e-14);
    }

    #[test]
    fn quotient_by_z_squared_is_nilpotent_block() {
        let basis = HardyBasis::new(1, 6, 1).unwrap();
        let q = quotient_tensor_build(&[z_power(2)], &basis).unwrap();
        let j = &q.jordan_blocks()[0];
        let want = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)],
        );
        assert!((j - want).norm() < 1e-14);
        let c = q.compressions()[0].matrix();
        let mut expect = ComplexMatrix::zeros(7, 7);
        expect[(1, 0)] = c64(1.0, 0.0);
        assert!((c - expect).norm() < 1e-14);
    }

    #[test]
    fn two_variable_tensor_quotient() {
        let basis = HardyBasis::new(2, 42, 1).unwrap();
        let q = quotient_tensor_build(&[z_power(2), phi(0.5)], &basis).unwrap();
        assert_eq!(q.safe_columns().len(), 2);
        assert!(jordan_structure_residual(&q, 0).unwrap() <= 1e-10);
        assert!(jordan_structure_residual(&q, 1).unwrap() <= 1e-10);
        let r = compression_double_commutation(&q, 1e-10).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn tensor_quotient_with_free_variable() {
        let basis = HardyBasis::new(2, 26, 1).unwrap();
        let q = quotient_tensor_build(&[phi(0.3)], &basis).unwrap();
        assert!(q.cutoff().unwrap() >= 2);
        for k in 0..2 {
            assert!(jordan_structure_residual(&q, k).unwrap() <= 1e-10);
        }
        let r = compression_double_commutation(&q, 1e-10).unwrap();
        assert!(r.pass, "{r:?}");
        // adjoint-shift invariance of the safe section
        let x = columns(q.elements(), q.safe_columns());
        let p = projector(q.space());
        let big = projector(&orthonormalize(q.elements(), 1e-10));
        for sh in shift_matrices(&basis).unwrap() {
            let back = sh.adjoint() * &x;
            assert!(op_norm(&(&back - &big * &back)) < 1e-10);
            assert!(p.nrows() == back.nrows());
        }
    }

    #[test]
    fn full_space_quotient_commutes() {
        let basis = HardyBasis::new(2, 6, 1).unwrap();
        let q = quotient_tensor_build(&[], &basis).unwrap();
        let r = compression_double_commutation(&q, 1e-12).unwrap();
        assert!(r.pass);
        assert_eq!(q.space().dim(), basis.count_up_to_degree(4));
    }

    #[test]
    fn diagonal_quotient_fails() {
        let basis = HardyBasis::new(2, 6, 1).unwrap();
        let q = diagonal_quotient_fixture(&basis).unwrap();
        let r = compression_double_commutation(&q, 1e-6).unwrap();
        assert!(!r.pass);
        assert!(r.cross_commutator > 0.1, "{r:?}");
        assert!(r.commutator < 1e-12);
    }

    #[test]
    fn degree_overflow_for_long_model_space() {
        let basis = HardyBasis::new(1, 3, 1).unwrap();
        assert!(matches!(
            quotient_tensor_build(&[z_power(5)], &basis),
            Err(Error::DegreeOverflow { degree: 5, max: 3 })
        ));
    }

    #[test]
    fn kernel_check_at_origin() {
        let basis = HardyBasis::new(3, 5, 1).unwrap();
        let r = kernel_eigen_check(
            &[z_power(1), z_power(1), z_power(1)],
            &KernelPoint::origin(),
            &basis,
        )
        .unwrap();
        assert!(r.residual < 1e-15);
    }

    #[test]
    fn kernel_check_geometric_tail() {
        let basis = HardyBasis::new(1, 30, 1).unwrap();
        let lam = KernelPoint::new(vec![c64(0.5, 0.0)]).unwrap();
        let r = kernel_eigen_check(&[z_power(1)], &lam, &basis).unwrap();
        assert!(r.residual <= 0.5f64.powi(29));
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn kernel_check_mobius_symbol() {
        let basis = HardyBasis::new(1, 30, 1).unwrap();
        let lam = KernelPoint::new(vec![c64(0.5, 0.0)]).unwrap();
        let r = kernel_eigen_check(&[phi(0.3)], &lam, &basis).unwrap();
        assert!((r.mu[0] - c64(-0.2 / 0.85, 0.0)).norm() < 1e-15);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn product_formula_examples() {
        let b1 = HardyBasis::new(1, 8, 1).unwrap();
        let r = projector_product_formula(&[z_power(1)], &MultiIndex::zero(), &b1).unwrap();
        assert!((r.formula.coeffs()[0] - c64(1.0, 0.0)).norm() < 1e-14);
        assert!(r.distance < 1e-14);
        let r = projector_product_formula(&[z_power(2)], &MultiIndex::unit(0), &b1).unwrap();
        assert!((r.direct.coeffs()[1] - c64(1.0, 0.0)).norm() < 1e-14);
        assert!(r.distance < 1e-14);
        let b25 = HardyBasis::new(1, 25, 1).unwrap();
        let r = projector_product_formula(&[phi(0.5)], &MultiIndex::zero(), &b25).unwrap();
        assert!(r.distance <= 1e-10, "{}", r.distance);
    }

    #[test]
    fn product_formula_two_variables() {
        let basis = HardyBasis::new(3, 10, 1).unwrap();
        let alpha = MultiIndex::new(vec![1, 2, 1]);
        let r = projector_product_formula(&[phi(0.4), z_power(2)], &alpha, &basis).unwrap();
        assert!(r.distance <= 1e-10, "{}", r.distance);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn random_blaschke_generators_recovered(
            r1 in 0.0f64..0.4, t1 in 0.0f64..6.0,
            r2 in 0.0f64..0.4, t2 in 0.0f64..6.0,
        ) {
            let basis = HardyBasis::new(2, 24, 1).unwrap();
            let b1 = BlaschkeProduct::from_zeros(vec![C64::from_polar(r1, t1)]).unwrap();
            let b2 = BlaschkeProduct::from_zeros(vec![C64::from_polar(r2, t2)]).unwrap();
            let sym = InnerSymbol::blaschke(vec![(0, b1), (1, b2)]).unwrap();
            let s = submodule_from_inner(&sym, &basis).unwrap();
            let r = restriction_double_commutation(&s, 1e-5).unwrap();
            prop_assert!(r.pass);
            let w = wandering_generator_extract(&s).unwrap();
            prop_assert!(w.deviation.unwrap() <= 1e-7);
        }

        #[test]
        fn jordan_structure_of_random_quotients(r in 0.0f64..0.3, t in 0.0f64..6.0, m in 1usize..3) {
            let basis = HardyBasis::new(2, 24, 1).unwrap();
            let zeros = vec![C64::from_polar(r, t); m];
            let q = quotient_tensor_build(&[BlaschkeProduct::from_zeros(zeros).unwrap()], &basis).unwrap();
            prop_assert!(jordan_structure_residual(&q, 0).unwrap() <= 1e-10);
            prop_assert!(compression_double_commutation(&q, 1e-10).unwrap().pass);
        }
    }
}
