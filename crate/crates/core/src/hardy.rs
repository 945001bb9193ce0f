//! Degree-truncated vector-valued Hardy space over the first `n` variables of
//! the Hilbert multidisk.
//!
//! Variable indices are 0-based. Basis elements are ordered by total degree,
//! then by descending lexicographic order of the exponent vector (so `ζ_1`
//! precedes `ζ_2`), then by coefficient slot. Because the ordering is graded,
//! "all basis elements of degree ≤ k" is always a prefix.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linops::{
    c64, identity, op_norm, orthonormalize, ComplexMatrix, ComplexVector, Subspace, C64,
};

/// Default cap on `C(n+d, d) · e`.
pub const DEFAULT_BASIS_CAP: usize = 200_000;
/// Environment variable overriding [`DEFAULT_BASIS_CAP`].
pub const BASIS_CAP_ENV: &str = "POLYDISC_BASIS_CAP";

pub fn basis_cap() -> usize {
    std::env::var(BASIS_CAP_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_BASIS_CAP)
}

/// `C(n + d, d)`, or `None` on overflow.
pub fn monomial_count(n: usize, d: usize) -> Option<usize> {
    let mut acc: u128 = 1;
    for i in 1..=d as u128 {
        acc = acc.checked_mul(n as u128 + i)? / i;
        if acc > usize::MAX as u128 {
            return None;
        }
    }
    Some(acc as usize)
}

/// Finitely supported exponent sequence with trailing zeros removed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(mut exponents: Vec<u32>) -> Self {
        while exponents.last() == Some(&0) {
            exponents.pop();
        }
        Self(exponents)
    }

    pub fn zero() -> Self {
        Self(Vec::new())
    }

    pub fn unit(k: usize) -> Self {
        Self::single(k, 1)
    }

    /// `a` in slot `k`, zero elsewhere.
    pub fn single(k: usize, a: u32) -> Self {
        let mut v = vec![0; k + 1];
        v[k] = a;
        Self::new(v)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, k: usize) -> u32 {
        self.0.get(k).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&a| a as usize).sum()
    }

    pub fn support_len(&self) -> usize {
        self.0.len()
    }

    pub fn padded(&self, n: usize) -> Vec<u32> {
        let mut v = self.0.clone();
        v.resize(n.max(v.len()), 0);
        v
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        Self::new((0..n).map(|k| self.get(k) + other.get(k)).collect())
    }

    /// `α ∧ β = 0`.
    pub fn disjoint(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(&a, &b)| a == 0 || b == 0)
    }
}

#[derive(Debug)]
struct Monomials {
    n: usize,
    d: usize,
    exps: Vec<Vec<u32>>,
    lookup: HashMap<Vec<u32>, usize>,
    /// `offsets[k]` = number of monomials of degree `< k`; length `d + 2`.
    offsets: Vec<usize>,
}

impl Monomials {
    fn build(n: usize, d: usize) -> Self {
        let mut exps = Vec::new();
        let mut offsets = vec![0];
        let mut cur = vec![0u32; n];
        for k in 0..=d {
            push_compositions(&mut exps, &mut cur, 0, k as u32);
            offsets.push(exps.len());
        }
        let lookup = exps
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        Self {
            n,
            d,
            exps,
            lookup,
            offsets,
        }
    }
}

fn push_compositions(out: &mut Vec<Vec<u32>>, cur: &mut [u32], pos: usize, rest: u32) {
    if pos + 1 == cur.len() {
        cur[pos] = rest;
        out.push(cur.to_vec());
        return;
    }
    for a in (0..=rest).rev() {
        cur[pos] = a;
        push_compositions(out, cur, pos + 1, rest - a);
    }
    cur[pos] = 0;
}

/// Monomial basis of `H²_E` truncated at total degree `d` over `n` variables,
/// with `e = dim E`.
#[derive(Debug, Clone)]
pub struct HardyBasis {
    coeff_dim: usize,
    mono: Arc<Monomials>,
}

impl PartialEq for HardyBasis {
    fn eq(&self, other: &Self) -> bool {
        self.coeff_dim == other.coeff_dim
            && self.mono.n == other.mono.n
            && self.mono.d == other.mono.d
    }
}

impl Eq for HardyBasis {}

impl Serialize for HardyBasis {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("HardyBasis", 3)?;
        st.serialize_field("num_vars", &self.num_vars())?;
        st.serialize_field("max_degree", &self.max_degree())?;
        st.serialize_field("coeff_dim", &self.coeff_dim)?;
        st.end()
    }
}

pub fn enumerate_basis(n: usize, d: usize, e: usize) -> Result<HardyBasis> {
    HardyBasis::new(n, d, e)
}

impl HardyBasis {
    pub fn new(n: usize, d: usize, e: usize) -> Result<Self> {
        if n == 0 || e == 0 {
            return Err(Error::DimensionMismatch(format!(
                "basis needs n >= 1 and e >= 1 (got n={n}, e={e})"
            )));
        }
        let cap = basis_cap();
        let size = monomial_count(n, d).and_then(|m| m.checked_mul(e));
        match size {
            Some(s) if s <= cap => {}
            _ => {
                return Err(Error::SizeOverflow {
                    size: size.unwrap_or(usize::MAX),
                    cap,
                })
            }
        }
        Ok(Self {
            coeff_dim: e,
            mono: Arc::new(Monomials::build(n, d)),
        })
    }

    /// Same monomials, different coefficient dimension.
    pub fn with_coeff_dim(&self, e: usize) -> Result<Self> {
        if e == 0 {
            return Err(Error::DimensionMismatch("coefficient dimension 0".into()));
        }
        let cap = basis_cap();
        let size = self.num_monomials().checked_mul(e).unwrap_or(usize::MAX);
        if size > cap {
            return Err(Error::SizeOverflow { size, cap });
        }
        Ok(Self {
            coeff_dim: e,
            mono: Arc::clone(&self.mono),
        })
    }

    pub fn num_vars(&self) -> usize {
        self.mono.n
    }

    pub fn max_degree(&self) -> usize {
        self.mono.d
    }

    pub fn coeff_dim(&self) -> usize {
        self.coeff_dim
    }

    pub fn num_monomials(&self) -> usize {
        self.mono.exps.len()
    }

    pub fn len(&self) -> usize {
        self.num_monomials() * self.coeff_dim
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Exponent vector (length `n`) of the `i`-th monomial.
    pub fn monomial(&self, i: usize) -> &[u32] {
        &self.mono.exps[i]
    }

    pub fn monomial_degree(&self, i: usize) -> usize {
        self.mono.exps[i].iter().map(|&a| a as usize).sum()
    }

    pub fn multi_index(&self, i: usize) -> MultiIndex {
        MultiIndex::new(self.mono.exps[i].clone())
    }

    /// Monomial position of an exponent vector of any length (extra entries
    /// must be zero).
    pub fn monomial_index(&self, alpha: &[u32]) -> Option<usize> {
        let n = self.mono.n;
        if alpha.len() > n && alpha[n..].iter().any(|&a| a != 0) {
            return None;
        }
        if alpha.len() == n {
            return self.mono.lookup.get(alpha).copied();
        }
        let mut v = alpha[..alpha.len().min(n)].to_vec();
        v.resize(n, 0);
        self.mono.lookup.get(&v).copied()
    }

    pub fn index_of(&self, alpha: &MultiIndex, slot: usize) -> Option<usize> {
        if slot >= self.coeff_dim {
            return None;
        }
        self.monomial_index(alpha.exponents())
            .map(|m| m * self.coeff_dim + slot)
    }

    /// `(monomial, slot)` of a basis position.
    pub fn split(&self, index: usize) -> (usize, usize) {
        (index / self.coeff_dim, index % self.coeff_dim)
    }

    pub fn degree_of(&self, index: usize) -> usize {
        self.monomial_degree(index / self.coeff_dim)
    }

    /// Number of monomials of degree `≤ k` (all of them if `k ≥ d`).
    pub fn monomials_up_to(&self, k: usize) -> usize {
        self.mono.offsets[(k + 1).min(self.mono.d + 1)]
    }

    /// Number of basis elements of degree `≤ k`; a prefix of the ordering.
    pub fn count_up_to_degree(&self, k: usize) -> usize {
        self.monomials_up_to(k) * self.coeff_dim
    }

    /// Monomial index range of the homogeneous degree `k`.
    pub fn degree_range(&self, k: usize) -> std::ops::Range<usize> {
        if k > self.mono.d {
            return 0..0;
        }
        self.mono.offsets[k]..self.mono.offsets[k + 1]
    }

    /// `λ^α` for every monomial.
    pub fn monomial_values(&self, lambda: &[C64]) -> Vec<C64> {
        let n = self.mono.n;
        let d = self.mono.d;
        let powers: Vec<Vec<C64>> = (0..n)
            .map(|k| {
                let z = lambda.get(k).copied().unwrap_or_default();
                let mut p = Vec::with_capacity(d + 1);
                let mut acc = c64(1.0, 0.0);
                for _ in 0..=d {
                    p.push(acc);
                    acc *= z;
                }
                p
            })
            .collect();
        self.mono
            .exps
            .iter()
            .map(|e| {
                e.iter()
                    .enumerate()
                    .fold(c64(1.0, 0.0), |acc, (k, &a)| acc * powers[k][a as usize])
            })
            .collect()
    }
}

/// Element of a truncated Hardy space.
#[derive(Debug, Clone, PartialEq)]
pub struct HardyVector {
    basis: HardyBasis,
    coeffs: ComplexVector,
}

impl Serialize for HardyVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<(usize, f64, f64)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != C64::default())
            .map(|(i, c)| (i, c.re, c.im))
            .collect();
        let mut st = s.serialize_struct("HardyVector", 2)?;
        st.serialize_field("basis", &self.basis)?;
        st.serialize_field("entries", &entries)?;
        st.end()
    }
}

impl HardyVector {
    pub fn new(basis: HardyBasis, coeffs: ComplexVector) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for a basis of size {}",
                coeffs.len(),
                basis.len()
            )));
        }
        Ok(Self { basis, coeffs })
    }

    pub fn zeros(basis: &HardyBasis) -> Self {
        Self {
            coeffs: ComplexVector::zeros(basis.len()),
            basis: basis.clone(),
        }
    }

    /// `ζ^α ⊗ e_slot`.
    pub fn monomial(basis: &HardyBasis, alpha: &MultiIndex, slot: usize) -> Result<Self> {
        let i = basis.index_of(alpha, slot).ok_or_else(|| {
            Error::IndexOutOfRange(format!("monomial {:?} slot {slot}", alpha.exponents()))
        })?;
        let mut v = Self::zeros(basis);
        v.coeffs[i] = c64(1.0, 0.0);
        Ok(v)
    }

    pub fn basis(&self) -> &HardyBasis {
        &self.basis
    }

    pub fn coeffs(&self) -> &ComplexVector {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> ComplexVector {
        self.coeffs
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.norm_squared()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }

    /// `⟨self, other⟩`, linear in the first slot.
    pub fn inner(&self, other: &Self) -> C64 {
        other.coeffs.dotc(&self.coeffs)
    }

    /// `F(λ) ∈ E`.
    pub fn eval(&self, lambda: &[C64]) -> ComplexVector {
        let e = self.basis.coeff_dim();
        let vals = self.basis.monomial_values(lambda);
        let mut out = ComplexVector::zeros(e);
        for (m, v) in vals.iter().enumerate() {
            for s in 0..e {
                out[s] += self.coeffs[m * e + s] * v;
            }
        }
        out
    }
}

/// Point of the multidisk with finite support, used for kernels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelPoint {
    coords: Vec<C64>,
}

impl KernelPoint {
    pub fn new(mut coords: Vec<C64>) -> Result<Self> {
        if let Some(bad) = coords.iter().find(|c| !(c.norm() < 1.0)) {
            return Err(Error::InvalidPoint(format!("|{bad}| >= 1")));
        }
        while coords.last().is_some_and(|c| *c == C64::default()) {
            coords.pop();
        }
        Ok(Self { coords })
    }

    pub fn origin() -> Self {
        Self { coords: Vec::new() }
    }

    pub fn coords(&self) -> &[C64] {
        &self.coords
    }

    pub fn get(&self, k: usize) -> C64 {
        self.coords.get(k).copied().unwrap_or_default()
    }

    pub fn support_len(&self) -> usize {
        self.coords.len()
    }

    /// `‖K_λ‖² = Π 1 / (1 - |λ_k|²)`.
    pub fn kernel_norm_sqr(&self) -> f64 {
        self.coords
            .iter()
            .map(|c| 1.0 / (1.0 - c.norm_sqr()))
            .product()
    }

    /// `‖(I - P_d) K_λ‖²`, summed directly over the homogeneous degrees above
    /// `d` so that small tails are not lost to cancellation.
    pub fn kernel_tail_sqr(&self, d: usize) -> f64 {
        let x: Vec<f64> = self.coords.iter().map(|c| c.norm_sqr()).collect();
        if x.iter().all(|&v| v == 0.0) {
            return 0.0;
        }
        // cur[i] = h_k(x_0..x_{i-1}), complete homogeneous polynomials
        let mut cur = vec![1.0f64; x.len() + 1];
        let mut tail = 0.0;
        let mut prev = f64::INFINITY;
        for k in 1..2_000_000usize {
            let mut next = vec![0.0; x.len() + 1];
            for i in 1..=x.len() {
                next[i] = next[i - 1] + x[i - 1] * cur[i];
            }
            cur = next;
            let h = cur[x.len()];
            if k > d {
                tail += h;
                if h == 0.0 || (h < prev && h <= 1e-18 * tail) {
                    break;
                }
            }
            prev = h;
        }
        tail
    }
}

/// Truncated `K_λ · x` with coefficients `conj(λ^α) x`.
pub fn kernel_vector(
    lambda: &KernelPoint,
    basis: &HardyBasis,
    x: &ComplexVector,
) -> Result<HardyVector> {
    if lambda.support_len() > basis.num_vars() {
        return Err(Error::InvalidPoint(format!(
            "point supported on {} variables, basis has {}",
            lambda.support_len(),
            basis.num_vars()
        )));
    }
    let e = basis.coeff_dim();
    if x.len() != e {
        return Err(Error::DimensionMismatch(format!(
            "slot vector of length {} for coefficient dimension {e}",
            x.len()
        )));
    }
    let vals = basis.monomial_values(lambda.coords());
    let mut coeffs = ComplexVector::zeros(basis.len());
    for (m, v) in vals.iter().enumerate() {
        for s in 0..e {
            coeffs[m * e + s] = v.conj() * x[s];
        }
    }
    HardyVector::new(basis.clone(), coeffs)
}

/// Truncated kernel against the first coefficient slot.
pub fn scalar_kernel_vector(lambda: &KernelPoint, basis: &HardyBasis) -> Result<HardyVector> {
    let mut x = ComplexVector::zeros(basis.coeff_dim());
    x[0] = c64(1.0, 0.0);
    kernel_vector(lambda, basis, &x)
}

/// `F` restricted to total degree `k`.
pub fn homogeneous_component(f: &HardyVector, k: usize) -> HardyVector {
    let basis = f.basis();
    let e = basis.coeff_dim();
    let r = basis.degree_range(k);
    let mut out = HardyVector::zeros(basis);
    for i in r.start * e..r.end * e {
        out.coeffs[i] = f.coeffs[i];
    }
    out
}

/// Matrix-valued polynomial in finitely many variables.
#[derive(Debug, Clone, PartialEq)]
pub struct MatPoly {
    num_vars: usize,
    rows: usize,
    cols: usize,
    terms: BTreeMap<MultiIndex, ComplexMatrix>,
}

impl MatPoly {
    pub fn zero(num_vars: usize, rows: usize, cols: usize) -> Self {
        Self {
            num_vars,
            rows,
            cols,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(num_vars: usize, c: ComplexMatrix) -> Self {
        let mut p = Self::zero(num_vars, c.nrows(), c.ncols());
        p.terms.insert(MultiIndex::zero(), c);
        p
    }

    pub fn scalar_identity(num_vars: usize, e: usize) -> Self {
        Self::constant(num_vars, identity(e))
    }

    /// `Σ_j c_j ζ_k^j`.
    pub fn one_variable(num_vars: usize, k: usize, coeffs: &[ComplexMatrix]) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| Error::DimensionMismatch("empty coefficient list".into()))?;
        let mut p = Self::zero(num_vars.max(k + 1), first.nrows(), first.ncols());
        for (j, c) in coeffs.iter().enumerate() {
            p.add_term(MultiIndex::single(k, j as u32), c.clone())?;
        }
        Ok(p)
    }

    /// Scalar series `Σ_j s_j ζ_k^j`.
    pub fn scalar_series(num_vars: usize, k: usize, series: &[C64]) -> Result<Self> {
        let coeffs: Vec<ComplexMatrix> = series
            .iter()
            .map(|&s| ComplexMatrix::from_element(1, 1, s))
            .collect();
        Self::one_variable(num_vars, k, &coeffs)
    }

    pub fn add_term(&mut self, alpha: MultiIndex, c: ComplexMatrix) -> Result<()> {
        if c.nrows() != self.rows || c.ncols() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "term is {}x{}, polynomial is {}x{}",
                c.nrows(),
                c.ncols(),
                self.rows,
                self.cols
            )));
        }
        if alpha.support_len() > self.num_vars {
            self.num_vars = alpha.support_len();
        }
        if c.iter().all(|z| *z == C64::default()) {
            return Ok(());
        }
        let slot = self
            .terms
            .entry(alpha)
            .or_insert_with(|| ComplexMatrix::zeros(c.nrows(), c.ncols()));
        *slot += c;
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, ComplexMatrix> {
        &self.terms
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|a| a.degree()).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.terms.keys().map(|a| a.degree()).min().unwrap_or(0)
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> Option<&ComplexMatrix> {
        self.terms.get(alpha)
    }

    pub fn eval(&self, lambda: &[C64]) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.rows, self.cols);
        for (alpha, c) in &self.terms {
            let mut p = c64(1.0, 0.0);
            for (k, &a) in alpha.exponents().iter().enumerate() {
                p *= lambda.get(k).copied().unwrap_or_default().powu(a);
            }
            out += c * p;
        }
        out
    }

    /// `self · other`, dropping terms of degree above `max_degree`.
    pub fn mul_truncated(&self, other: &Self, max_degree: usize) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "product of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zero(self.num_vars.max(other.num_vars), self.rows, other.cols);
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                if a.degree() + b.degree() <= max_degree {
                    out.add_term(a.add(b), x * y)?;
                }
            }
        }
        Ok(out)
    }

    /// Keep terms of degree `≤ max_degree`.
    pub fn truncate(&self, max_degree: usize) -> Self {
        let mut out = self.clone();
        out.terms.retain(|a, _| a.degree() <= max_degree);
        out
    }

    /// `Σ_{|α| ≤ k} ‖c_α‖_F²`, the squared Hardy norm of the symbol applied to
    /// unit slot vectors summed over slots.
    pub fn frobenius_sqr(&self) -> f64 {
        self.terms.values().map(|c| c.norm_squared()).sum()
    }
}

/// Operator between truncated Hardy spaces.
///
/// `degree_shift` and `min_shift` bound how far the underlying operator moves
/// total degree. `safe_degree` is the largest input degree on which the
/// matrix agrees with the untruncated operator.
#[derive(Debug, Clone, PartialEq)]
pub struct HardyOperator {
    basis_in: HardyBasis,
    basis_out: HardyBasis,
    matrix: ComplexMatrix,
    degree_shift: i64,
    min_shift: i64,
    safe_degree: Option<usize>,
    // matrix is the compression P_d M P_d of a single operator M
    primitive: bool,
}

impl Serialize for HardyOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut entries = Vec::new();
        for j in 0..self.matrix.ncols() {
            for i in 0..self.matrix.nrows() {
                let z = self.matrix[(i, j)];
                if z != C64::default() {
                    entries.push((i, j, z.re, z.im));
                }
            }
        }
        let mut st = s.serialize_struct("HardyOperator", 5)?;
        st.serialize_field("basis_in", &self.basis_in)?;
        st.serialize_field("basis_out", &self.basis_out)?;
        st.serialize_field("degree_shift", &self.degree_shift)?;
        st.serialize_field("safe_degree", &self.safe_degree)?;
        st.serialize_field("entries", &entries)?;
        st.end()
    }
}

fn primitive_safe(d_in: usize, d_out: usize, hi: i64) -> Option<usize> {
    let s = d_out as i64 - hi.max(0);
    (s >= 0).then(|| (s as usize).min(d_in))
}

impl HardyOperator {
    /// Wraps the compression of an operator that moves degree `k` into
    /// degrees `k + lo ..= k + hi`.
    pub fn new(
        basis_in: HardyBasis,
        basis_out: HardyBasis,
        matrix: ComplexMatrix,
        hi: i64,
        lo: i64,
    ) -> Result<Self> {
        if matrix.nrows() != basis_out.len() || matrix.ncols() != basis_in.len() {
            return Err(Error::DimensionMismatch(format!(
                "matrix {}x{} for bases of size {} -> {}",
                matrix.nrows(),
                matrix.ncols(),
                basis_in.len(),
                basis_out.len()
            )));
        }
        if basis_in.num_vars() != basis_out.num_vars() {
            return Err(Error::DimensionMismatch(
                "bases over different variable counts".into(),
            ));
        }
        let safe_degree = primitive_safe(basis_in.max_degree(), basis_out.max_degree(), hi);
        Ok(Self {
            basis_in,
            basis_out,
            matrix,
            degree_shift: hi,
            min_shift: lo.min(hi),
            safe_degree,
            primitive: true,
        })
    }

    pub fn identity(basis: &HardyBasis) -> Self {
        Self {
            basis_in: basis.clone(),
            basis_out: basis.clone(),
            matrix: identity(basis.len()),
            degree_shift: 0,
            min_shift: 0,
            safe_degree: Some(basis.max_degree()),
            primitive: true,
        }
    }

    pub fn basis_in(&self) -> &HardyBasis {
        &self.basis_in
    }

    pub fn basis_out(&self) -> &HardyBasis {
        &self.basis_out
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn degree_shift(&self) -> i64 {
        self.degree_shift
    }

    pub fn min_shift(&self) -> i64 {
        self.min_shift
    }

    pub fn safe_degree(&self) -> Option<usize> {
        self.safe_degree
    }

    /// Number of leading input columns covered by `safe_degree`.
    pub fn safe_columns(&self) -> usize {
        self.safe_degree
            .map_or(0, |s| self.basis_in.count_up_to_degree(s))
    }

    pub fn apply(&self, v: &HardyVector) -> Result<HardyVector> {
        if v.basis() != &self.basis_in {
            return Err(Error::DimensionMismatch(
                "vector basis differs from operator input".into(),
            ));
        }
        HardyVector::new(self.basis_out.clone(), &self.matrix * v.coeffs())
    }

    pub fn adjoint(&self) -> Self {
        let (hi, lo) = (-self.min_shift, -self.degree_shift);
        let safe_degree = if self.primitive {
            primitive_safe(self.basis_out.max_degree(), self.basis_in.max_degree(), hi)
        } else {
            None
        };
        Self {
            basis_in: self.basis_out.clone(),
            basis_out: self.basis_in.clone(),
            matrix: self.matrix.adjoint(),
            degree_shift: hi,
            min_shift: lo,
            safe_degree,
            primitive: self.primitive,
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if other.basis_out != self.basis_in {
            return Err(Error::DimensionMismatch(
                "composition bases do not match".into(),
            ));
        }
        let safe_degree = match (self.safe_degree, other.safe_degree) {
            (Some(a), Some(b)) => {
                let s = (b as i64).min(a as i64 - other.degree_shift);
                (s >= 0).then_some(s as usize)
            }
            _ => None,
        };
        Ok(Self {
            basis_in: other.basis_in.clone(),
            basis_out: self.basis_out.clone(),
            matrix: &self.matrix * &other.matrix,
            degree_shift: self.degree_shift + other.degree_shift,
            min_shift: self.min_shift + other.min_shift,
            safe_degree,
            primitive: false,
        })
    }

    /// `I - self`.
    pub fn identity_minus(&self) -> Result<Self> {
        if self.basis_in != self.basis_out {
            return Err(Error::DimensionMismatch(
                "I - X needs a square operator".into(),
            ));
        }
        Ok(Self {
            basis_in: self.basis_in.clone(),
            basis_out: self.basis_out.clone(),
            matrix: identity(self.basis_in.len()) - &self.matrix,
            degree_shift: self.degree_shift.max(0),
            min_shift: self.min_shift.min(0),
            safe_degree: self.safe_degree,
            primitive: self.primitive,
        })
    }

    /// At most one nonzero entry per row and per column.
    pub fn is_monomial_map(&self) -> bool {
        let zero = C64::default();
        let mut row_seen = vec![false; self.matrix.nrows()];
        for j in 0..self.matrix.ncols() {
            let mut in_col = false;
            for i in 0..self.matrix.nrows() {
                if self.matrix[(i, j)] != zero {
                    if in_col || row_seen[i] {
                        return false;
                    }
                    in_col = true;
                    row_seen[i] = true;
                }
            }
        }
        true
    }
}

/// `Π_k (I - V_k V_k*)` with its safe degree. For monomial maps each factor
/// is diagonal and exact on every input of degree `≤ d - max(-lo_k, 0)`.
pub fn joint_defect_projection(ops: &[HardyOperator]) -> Result<HardyOperator> {
    let first = ops
        .first()
        .ok_or_else(|| Error::DimensionMismatch("no operators".into()))?;
    let basis = first.basis_in().clone();
    for op in ops {
        if op.basis_in() != &basis || op.basis_out() != &basis {
            return Err(Error::DimensionMismatch(
                "operators on different spaces".into(),
            ));
        }
    }
    if ops.iter().all(HardyOperator::is_monomial_map) {
        let n = basis.len();
        let mut diag = vec![c64(1.0, 0.0); n];
        let mut safe = basis.max_degree() as i64;
        for op in ops {
            let m = op.matrix();
            for i in 0..n {
                let r: f64 = m.row(i).iter().map(|z| z.norm_sqr()).sum();
                diag[i] *= c64(1.0 - r, 0.0);
            }
            safe = safe.min(basis.max_degree() as i64 - (-op.min_shift()).max(0));
        }
        let matrix = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(diag));
        let mut out = HardyOperator::new(basis.clone(), basis, matrix, 0, 0)?;
        out.primitive = false;
        out.safe_degree = (safe >= 0).then_some(safe as usize);
        return Ok(out);
    }
    let mut acc = HardyOperator::identity(&basis);
    for op in ops {
        let factor = op.compose(&op.adjoint())?.identity_minus()?;
        acc = acc.compose(&factor)?;
    }
    Ok(acc)
}

/// `M_{ζ_k}` on `basis` (0-based `k`).
pub fn shift(k: usize, basis: &HardyBasis) -> Result<HardyOperator> {
    let coeffs = [
        ComplexMatrix::zeros(1, 1),
        ComplexMatrix::from_element(1, 1, c64(1.0, 0.0)),
    ];
    let e = basis.coeff_dim();
    let scaled: Vec<ComplexMatrix> = coeffs.iter().map(|c| identity(e) * c[(0, 0)]).collect();
    one_variable_symbol(k, &scaled, basis)
}

/// `M_Ψ` for a matrix polynomial `Ψ` of degree `≤ d`.
pub fn mult_operator(symbol: &MatPoly, basis: &HardyBasis) -> Result<HardyOperator> {
    if symbol.cols() != basis.coeff_dim() {
        return Err(Error::DimensionMismatch(format!(
            "symbol has {} columns, coefficient dimension is {}",
            symbol.cols(),
            basis.coeff_dim()
        )));
    }
    if symbol.num_vars() > basis.num_vars()
        && symbol
            .terms()
            .keys()
            .any(|a| a.support_len() > basis.num_vars())
    {
        return Err(Error::DimensionMismatch(
            "symbol uses variables outside the basis".into(),
        ));
    }
    let d = basis.max_degree();
    if symbol.degree() > d {
        return Err(Error::DegreeOverflow {
            degree: symbol.degree(),
            max: d,
        });
    }
    let out_basis = basis.with_coeff_dim(symbol.rows())?;
    let (ei, eo) = (basis.coeff_dim(), symbol.rows());
    let mut m = ComplexMatrix::zeros(out_basis.len(), basis.len());
    let n = basis.num_vars();
    for (beta, c) in symbol.terms() {
        let b = beta.padded(n);
        let bd = beta.degree();
        for i in 0..basis.monomials_up_to(d - bd) {
            let target: Vec<u32> = basis
                .monomial(i)
                .iter()
                .zip(&b)
                .map(|(x, y)| x + y)
                .collect();
            let o = basis.monomial_index(&target).expect("target within degree");
            let mut blk = m.view_mut((o * eo, i * ei), (eo, ei));
            blk += c;
        }
    }
    HardyOperator::new(
        basis.clone(),
        out_basis,
        m,
        symbol.degree() as i64,
        symbol.min_degree() as i64,
    )
}

/// `M_θ̃` for `θ̃(ζ) = θ(ζ_k)`, `θ = Σ_j coeffs[j] z^j`.
pub fn one_variable_symbol(
    k: usize,
    coeffs: &[ComplexMatrix],
    basis: &HardyBasis,
) -> Result<HardyOperator> {
    if k >= basis.num_vars() {
        return Err(Error::IndexOutOfRange(format!(
            "variable {k} of {}",
            basis.num_vars()
        )));
    }
    let first = coeffs
        .first()
        .ok_or_else(|| Error::DimensionMismatch("empty coefficient list".into()))?;
    let (eo, ei) = (first.nrows(), first.ncols());
    if ei != basis.coeff_dim() || coeffs.iter().any(|c| c.nrows() != eo || c.ncols() != ei) {
        return Err(Error::DimensionMismatch(
            "coefficient shapes disagree with the basis".into(),
        ));
    }
    let nz = |c: &ComplexMatrix| c.iter().any(|z| *z != C64::default());
    let hi = coeffs.iter().rposition(nz).unwrap_or(0);
    let lo = coeffs.iter().position(nz).unwrap_or(0);
    let d = basis.max_degree();
    if hi > d {
        return Err(Error::DegreeOverflow { degree: hi, max: d });
    }
    let out_basis = basis.with_coeff_dim(eo)?;
    let mut m = ComplexMatrix::zeros(out_basis.len(), basis.len());
    let mut target = vec![0u32; basis.num_vars()];
    for i in 0..basis.num_monomials() {
        let deg = basis.monomial_degree(i);
        target.copy_from_slice(basis.monomial(i));
        let a = target[k];
        for (j, c) in coeffs.iter().enumerate().take(hi + 1).skip(lo) {
            if deg + j > d {
                break;
            }
            target[k] = a + j as u32;
            let o = basis.monomial_index(&target).expect("target within degree");
            m.view_mut((o * eo, i * ei), (eo, ei)).copy_from(c);
        }
    }
    HardyOperator::new(basis.clone(), out_basis, m, hi as i64, lo as i64)
}

/// The isometry `V_k` sending `ζ_k^a F` to `ζ_k^{a+3} F` for even `a` and to
/// `ζ_k^{a-1} F` for odd `a`, where `F` does not involve `ζ_k`.
pub fn interleaving_isometry(k: usize, basis: &HardyBasis) -> Result<HardyOperator> {
    if k >= basis.num_vars() {
        return Err(Error::IndexOutOfRange(format!(
            "variable {k} of {}",
            basis.num_vars()
        )));
    }
    let e = basis.coeff_dim();
    let d = basis.max_degree();
    let mut m = ComplexMatrix::zeros(basis.len(), basis.len());
    let mut target = vec![0u32; basis.num_vars()];
    for i in 0..basis.num_monomials() {
        target.copy_from_slice(basis.monomial(i));
        let a = target[k];
        let deg = basis.monomial_degree(i);
        let (b, new_deg) = if a % 2 == 0 {
            (a + 3, deg + 3)
        } else {
            (a - 1, deg - 1)
        };
        if new_deg > d {
            continue;
        }
        target[k] = b;
        let o = basis.monomial_index(&target).expect("target within degree");
        for s in 0..e {
            m[(o * e + s, i * e + s)] = c64(1.0, 0.0);
        }
    }
    HardyOperator::new(basis.clone(), basis.clone(), m, 3, -1)
}

/// Isometry residual restricted to the safe input degrees.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InnerReport {
    pub residual: f64,
    pub safe_degree: Option<usize>,
    pub columns_checked: usize,
    pub pass: bool,
}

pub fn is_inner_on_truncation(op: &HardyOperator, tol: f64) -> InnerReport {
    let cols = op.safe_columns();
    if cols == 0 {
        return InnerReport {
            residual: 0.0,
            safe_degree: op.safe_degree(),
            columns_checked: 0,
            pass: false,
        };
    }
    let a = op.matrix().columns(0, cols);
    let g = a.adjoint() * a - identity(cols);
    let residual = op_norm(&g);
    InnerReport {
        residual,
        safe_degree: op.safe_degree(),
        columns_checked: cols,
        pass: residual <= tol,
    }
}

/// `⋂ ker V_k*` as the range of `Π (I - V_k V_k*)` on safe input degrees.
pub fn wandering_subspace(ops: &[HardyOperator], basis: &HardyBasis) -> Result<Subspace> {
    let p = joint_defect_projection(ops)?;
    if p.basis_in() != basis {
        return Err(Error::DimensionMismatch(
            "operators live on a different basis".into(),
        ));
    }
    let cols = p.safe_columns();
    Ok(orthonormalize(
        &p.matrix().columns(0, cols).into_owned(),
        1e-10,
    ))
}

/// Samples of `Ψ` recovered from an intertwiner.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSamples {
    pub points: Vec<KernelPoint>,
    pub values: Vec<ComplexMatrix>,
    /// Bound on the error of each sample caused by truncating `K_λ`.
    pub truncation_bounds: Vec<f64>,
    pub intertwining_residual: f64,
    pub safe_degree: usize,
}

/// Tolerance on `T M_ζ - M_ζ T` accepted by [`symbol_from_intertwiner`].
pub const INTERTWINING_TOL: f64 = 1e-8;

pub fn symbol_from_intertwiner(t: &HardyOperator, points: &[KernelPoint]) -> Result<SymbolSamples> {
    let (bi, bo) = (t.basis_in(), t.basis_out());
    let safe = t
        .safe_degree()
        .ok_or_else(|| Error::UnsafeDegree("operator has no exact input degrees".into()))?;
    let mut residual = 0.0f64;
    if safe >= 1 {
        let cols = bi.count_up_to_degree(safe - 1);
        for j in 0..bi.num_vars() {
            let si = shift(j, bi)?;
            let so = shift(j, bo)?;
            let lhs = t.matrix() * si.matrix().columns(0, cols);
            let rhs = so.matrix() * t.matrix().columns(0, cols);
            residual = residual.max(op_norm(&(lhs - rhs)));
        }
    }
    if residual > INTERTWINING_TOL {
        return Err(Error::NotIntertwining { residual });
    }
    let th = t.matrix().adjoint();
    let t_norm = op_norm(t.matrix());
    let (ei, eo) = (bi.coeff_dim(), bo.coeff_dim());
    let mut values = Vec::with_capacity(points.len());
    let mut bounds = Vec::with_capacity(points.len());
    for lam in points {
        let mut psi_star = ComplexMatrix::zeros(ei, eo);
        for j in 0..eo {
            let mut x = ComplexVector::zeros(eo);
            x[j] = c64(1.0, 0.0);
            let k = kernel_vector(lam, bo, &x)?;
            let y = &th * k.coeffs();
            psi_star.column_mut(j).copy_from(&y.rows(0, ei));
        }
        values.push(psi_star.adjoint());
        bounds.push(t_norm * lam.kernel_tail_sqr(bo.max_degree()).sqrt());
    }
    Ok(SymbolSamples {
        points: points.to_vec(),
        values,
        truncation_bounds: bounds,
        intertwining_residual: residual,
        safe_degree: safe,
    })
}

/// `(Π_{i=m+1}^{n} λ_i, |Π λ_i - 1|² + 1 - Π |λ_i|²)` with 1-based `i`.
pub fn mobius_product_partials(lambda: &[C64], m: usize, n: usize) -> Result<(C64, f64)> {
    if m > n || n > lambda.len() {
        return Err(Error::IndexOutOfRange(format!(
            "range ({m}, {n}] over {} points",
            lambda.len()
        )));
    }
    if let Some(bad) = lambda[m..n].iter().find(|z| !(z.norm() < 1.0)) {
        return Err(Error::InvalidPoint(format!("|{bad}| >= 1")));
    }
    let p: C64 = lambda[m..n].iter().product();
    let modsq: f64 = lambda[m..n].iter().map(|z| z.norm_sqr()).product();
    Ok((p, (p - c64(1.0, 0.0)).norm_sqr() + (1.0 - modsq)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contraction::mobius_series;
    use crate::random::{random_disk_point, random_matrix};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn one() -> C64 {
        c64(1.0, 0.0)
    }

    fn unit(e: usize, s: usize) -> ComplexVector {
        let mut x = ComplexVector::zeros(e);
        x[s] = one();
        x
    }

    fn random_poly_vector(rng: &mut ChaCha8Rng, basis: &HardyBasis) -> HardyVector {
        let n = basis.len();
        HardyVector::new(
            basis.clone(),
            random_matrix(rng, n, 1).column(0).into_owned(),
        )
        .unwrap()
    }

    #[test]
    fn basis_sizes_and_order() {
        let b = enumerate_basis(1, 3, 1).unwrap();
        assert_eq!(b.len(), 4);
        for i in 0..4 {
            assert_eq!(b.monomial(i), &[i as u32]);
        }
        assert_eq!(enumerate_basis(2, 2, 1).unwrap().len(), 6);
        assert_eq!(enumerate_basis(2, 1, 3).unwrap().len(), 9);
        let b = enumerate_basis(2, 2, 1).unwrap();
        let order: Vec<&[u32]> = (0..6).map(|i| b.monomial(i)).collect();
        assert_eq!(
            order,
            vec![&[0, 0][..], &[1, 0], &[0, 1], &[2, 0], &[1, 1], &[0, 2]]
        );
        assert_eq!(b.count_up_to_degree(1), 3);
        assert_eq!(b.index_of(&MultiIndex::new(vec![1, 1]), 0), Some(4));
        assert!(matches!(
            enumerate_basis(6, 40, 1),
            Err(Error::SizeOverflow { .. })
        ));
    }

    #[test]
    fn multi_index_trims() {
        assert_eq!(MultiIndex::new(vec![1, 0, 0]), MultiIndex::unit(0));
        assert_eq!(MultiIndex::new(vec![0, 0]).degree(), 0);
        assert!(MultiIndex::new(vec![1, 0]).disjoint(&MultiIndex::new(vec![0, 2])));
        assert!(!MultiIndex::new(vec![1, 1]).disjoint(&MultiIndex::new(vec![0, 2])));
    }

    #[test]
    fn shift_examples() {
        let b = enumerate_basis(2, 4, 1).unwrap();
        let s1 = shift(0, &b).unwrap();
        let c = HardyVector::monomial(&b, &MultiIndex::zero(), 0).unwrap();
        assert_eq!(s1.adjoint().apply(&c).unwrap().norm(), 0.0);
        let z2 = HardyVector::monomial(&b, &MultiIndex::unit(1), 0).unwrap();
        let want = HardyVector::monomial(&b, &MultiIndex::new(vec![1, 1]), 0).unwrap();
        assert_eq!(s1.apply(&z2).unwrap(), want);
        for k in 0..2 {
            let s = shift(k, &b).unwrap();
            let g = s.matrix().adjoint() * s.matrix();
            let lower = b.count_up_to_degree(3);
            for i in 0..b.len() {
                let want = if i < lower { 1.0 } else { 0.0 };
                assert_eq!(g[(i, i)], c64(want, 0.0));
            }
            assert_eq!(s.safe_degree(), Some(3));
        }
    }

    #[test]
    fn kernel_reproduction_and_eigen_relation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b = enumerate_basis(3, 5, 2).unwrap();
        let lam = KernelPoint::new(vec![c64(0.3, 0.2), c64(-0.4, 0.1), c64(0.05, -0.6)]).unwrap();
        let x = unit(2, 1) * c64(0.5, -1.0) + unit(2, 0);
        let k = kernel_vector(&lam, &b, &x).unwrap();
        let f = random_poly_vector(&mut rng, &b);
        let lhs = f.inner(&k);
        let rhs = x.dotc(&f.eval(lam.coords()));
        assert!((lhs - rhs).norm() <= 1e-12);

        let origin = kernel_vector(&KernelPoint::origin(), &b, &x).unwrap();
        assert_eq!(homogeneous_component(&origin, 0), origin);

        let lower = enumerate_basis(3, 4, 2).unwrap();
        let k_low = kernel_vector(&lam, &lower, &x).unwrap();
        for j in 0..3 {
            let s = shift(j, &b).unwrap();
            let y = s.adjoint().apply(&k).unwrap();
            let cut = b.count_up_to_degree(4);
            let got = y.coeffs().rows(0, cut);
            let want = k_low.coeffs() * lam.get(j).conj();
            assert!((got - want).norm() <= 1e-12);
        }
    }

    #[test]
    fn kernel_tail_matches_closed_form() {
        let lam = KernelPoint::new(vec![c64(0.5, 0.0), c64(0.0, 0.3)]).unwrap();
        let b = enumerate_basis(2, 12, 1).unwrap();
        let head = scalar_kernel_vector(&lam, &b).unwrap().norm_sqr();
        let tail = lam.kernel_tail_sqr(12);
        assert!((head + tail - lam.kernel_norm_sqr()).abs() <= 1e-13);
        let one_var = KernelPoint::new(vec![c64(0.5, 0.0)]).unwrap();
        // Σ_{k>d} 4^{-k} = 4^{-d}/3
        assert!((one_var.kernel_tail_sqr(10) - 0.25f64.powi(10) / 3.0).abs() <= 1e-20);
    }

    #[test]
    fn mult_operator_examples() {
        let b = enumerate_basis(2, 5, 2).unwrap();
        let id = mult_operator(&MatPoly::scalar_identity(2, 2), &b).unwrap();
        assert_eq!(id.matrix(), &identity(b.len()));
        let z1 = MatPoly::one_variable(2, 0, &[ComplexMatrix::zeros(2, 2), identity(2)]).unwrap();
        assert_eq!(
            mult_operator(&z1, &b).unwrap().matrix(),
            shift(0, &b).unwrap().matrix()
        );

        let a = c64(0.3, 0.4);
        let b1 = enumerate_basis(1, 8, 1).unwrap();
        let phi = MatPoly::scalar_series(1, 0, &mobius_series(a, 8)).unwrap();
        let op = mult_operator(&phi, &b1).unwrap();
        let col = op.matrix().column(0);
        assert!((col[0] - a).norm() < 1e-15);
        for k in 1..=8 {
            let want = c64(a.norm_sqr() - 1.0, 0.0) * a.conj().powu(k as u32 - 1);
            assert!((col[k] - want).norm() < 1e-15);
        }
        let r = is_inner_on_truncation(&op, 1e-3);
        assert_eq!(r.safe_degree, Some(0));
        assert!(r.pass && r.residual <= a.norm().powi(16));

        let too_high = MatPoly::scalar_series(1, 0, &mobius_series(a, 9)).unwrap();
        assert!(matches!(
            mult_operator(&too_high, &b1),
            Err(Error::DegreeOverflow { .. })
        ));
    }

    #[test]
    fn one_variable_symbol_examples() {
        let b = enumerate_basis(3, 4, 1).unwrap();
        let z = [ComplexMatrix::zeros(1, 1), identity(1)];
        assert_eq!(
            one_variable_symbol(1, &z, &b).unwrap().matrix(),
            shift(1, &b).unwrap().matrix()
        );

        let b2 = enumerate_basis(2, 3, 2).unwrap();
        let u = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(0.0, 0.0), c64(0.0, 1.0), c64(1.0, 0.0), c64(0.0, 0.0)],
        );
        let op = one_variable_symbol(0, &[u], &b2).unwrap();
        let r = is_inner_on_truncation(&op, 1e-14);
        assert!(r.pass && r.columns_checked == b2.len());

        let z2 = [
            ComplexMatrix::zeros(1, 1),
            ComplexMatrix::zeros(1, 1),
            identity(1),
        ];
        let op = one_variable_symbol(0, &z2, &b).unwrap();
        let f = HardyVector::monomial(&b, &MultiIndex::unit(1), 0).unwrap();
        let want = HardyVector::monomial(&b, &MultiIndex::new(vec![2, 1]), 0).unwrap();
        assert_eq!(op.apply(&f).unwrap(), want);
    }

    #[test]
    fn inner_examples() {
        let b = enumerate_basis(2, 6, 1).unwrap();
        let r = is_inner_on_truncation(&shift(0, &b).unwrap(), 1e-14);
        assert!(r.pass && r.safe_degree == Some(5));
        let half = MatPoly::constant(2, ComplexMatrix::from_element(1, 1, c64(0.5, 0.0)));
        let r = is_inner_on_truncation(&mult_operator(&half, &b).unwrap(), 1e-10);
        assert!(!r.pass && (r.residual - 0.75).abs() < 1e-15);
    }

    #[test]
    fn wandering_examples() {
        let b = enumerate_basis(3, 4, 2).unwrap();
        let shifts: Vec<_> = (0..3).map(|k| shift(k, &b).unwrap()).collect();
        let w = wandering_subspace(&shifts, &b).unwrap();
        assert_eq!(w.dim(), 2);
        let p = crate::linops::projector(&w);
        let mut want = ComplexMatrix::zeros(b.len(), b.len());
        want[(0, 0)] = one();
        want[(1, 1)] = one();
        assert!(op_norm(&(p - want)) < 1e-14);

        let b1 = enumerate_basis(1, 8, 1).unwrap();
        let z2 = [
            ComplexMatrix::zeros(1, 1),
            ComplexMatrix::zeros(1, 1),
            identity(1),
        ];
        let v = one_variable_symbol(0, &z2, &b1).unwrap();
        let w = wandering_subspace(&[v], &b1).unwrap();
        assert_eq!(w.dim(), 2);
        assert!(w.basis().rows(2, 7).norm() < 1e-14);

        let b3 = enumerate_basis(3, 6, 1).unwrap();
        let vs: Vec<_> = (0..3)
            .map(|k| interleaving_isometry(k, &b3).unwrap())
            .collect();
        let w = wandering_subspace(&vs, &b3).unwrap();
        let want = b3.index_of(&MultiIndex::new(vec![1, 1, 1]), 0).unwrap();
        assert_eq!(w.dim(), 1);
        assert!((w.basis()[(want, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn interleaving_isometry_examples() {
        let b = enumerate_basis(1, 8, 1).unwrap();
        let v = interleaving_isometry(0, &b).unwrap();
        for (from, to) in [(0usize, 3usize), (1, 0), (2, 5), (3, 2)] {
            assert_eq!(v.matrix()[(to, from)], one());
        }
        let v2 = v.compose(&v).unwrap();
        let s = shift(0, &b).unwrap();
        let s2 = s.compose(&s).unwrap();
        let cols = v2.safe_columns();
        assert!(cols > 0);
        assert_eq!(v2.matrix().columns(0, cols), s2.matrix().columns(0, cols));
        let w = wandering_subspace(&[v], &b).unwrap();
        assert_eq!(w.dim(), 1);
        assert_eq!(w.basis()[(1, 0)].norm(), 1.0);
    }

    #[test]
    fn homogeneous_examples() {
        let b = enumerate_basis(2, 3, 1).unwrap();
        let c = HardyVector::monomial(&b, &MultiIndex::zero(), 0).unwrap();
        assert_eq!(homogeneous_component(&c, 0), c);
        assert_eq!(homogeneous_component(&c, 1).norm(), 0.0);
        let z12 = HardyVector::monomial(&b, &MultiIndex::new(vec![1, 1]), 0).unwrap();
        let f = HardyVector::new(b.clone(), c.coeffs() + z12.coeffs()).unwrap();
        assert_eq!(homogeneous_component(&f, 2), z12);
    }

    #[test]
    fn symbol_recovery_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = enumerate_basis(2, 10, 1).unwrap();
        let pts: Vec<KernelPoint> = (0..4)
            .map(|_| {
                KernelPoint::new(vec![
                    random_disk_point(&mut rng, 0.6),
                    random_disk_point(&mut rng, 0.6),
                ])
                .unwrap()
            })
            .collect();
        let s = symbol_from_intertwiner(&HardyOperator::identity(&b), &pts).unwrap();
        for v in &s.values {
            assert!((v[(0, 0)] - one()).norm() < 1e-15);
        }
        let s = symbol_from_intertwiner(&shift(0, &b).unwrap(), &pts).unwrap();
        for (v, p) in s.values.iter().zip(&pts) {
            assert!((v[(0, 0)] - p.get(0)).norm() < 1e-15);
        }
        let theta: Vec<ComplexMatrix> = (0..3).map(|_| random_matrix(&mut rng, 2, 1)).collect();
        let b1 = enumerate_basis(2, 10, 1).unwrap();
        let op = one_variable_symbol(1, &theta, &b1).unwrap();
        let s = symbol_from_intertwiner(&op, &pts).unwrap();
        for ((v, p), bound) in s.values.iter().zip(&pts).zip(&s.truncation_bounds) {
            let z = p.get(1);
            let want = &theta[0] + &theta[1] * z + &theta[2] * (z * z);
            assert!((v - want).norm() <= bound + 1e-13);
        }
        let mut bad = shift(0, &b).unwrap().into_matrix();
        bad[(3, 0)] = one();
        let bad = HardyOperator::new(b.clone(), b.clone(), bad, 2, 0).unwrap();
        assert!(matches!(
            symbol_from_intertwiner(&bad, &pts),
            Err(Error::NotIntertwining { .. })
        ));
    }

    #[test]
    fn mobius_partials_examples() {
        let (p, c) = mobius_product_partials(&[c64(0.0, 0.0)], 0, 1).unwrap();
        assert_eq!(p, c64(0.0, 0.0));
        assert!((c - 2.0).abs() < 1e-15);
        let (p, c) = mobius_product_partials(&[c64(0.5, 0.0)], 1, 1).unwrap();
        assert_eq!((p, c), (one(), 0.0));
        let (_, c) = mobius_product_partials(&[c64(0.9, 0.0); 2], 0, 2).unwrap();
        assert!((c - 0.38).abs() < 1e-12);
        assert!(matches!(
            mobius_product_partials(&[c64(0.5, 0.0)], 0, 2),
            Err(Error::IndexOutOfRange(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn parseval_over_components(seed in any::<u64>(), n in 1usize..4, d in 0usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = enumerate_basis(n, d, 2).unwrap();
            let f = random_poly_vector(&mut rng, &b);
            let total: f64 = (0..=d).map(|k| homogeneous_component(&f, k).norm_sqr()).sum();
            prop_assert!((total - f.norm_sqr()).abs() <= 1e-12 * f.norm_sqr().max(1.0));
        }

        #[test]
        fn shift_is_isometric_below_top(n in 1usize..4, d in 1usize..6, e in 1usize..3) {
            let b = enumerate_basis(n, d, e).unwrap();
            for k in 0..n {
                let r = is_inner_on_truncation(&shift(k, &b).unwrap(), 0.0);
                prop_assert!(r.pass);
            }
        }

        #[test]
        fn interleaving_family_doubly_commutes(n in 2usize..4) {
            let b = enumerate_basis(n, 8, 1).unwrap();
            let vs: Vec<_> = (0..n).map(|k| interleaving_isometry(k, &b).unwrap()).collect();
            for i in 0..n {
                prop_assert!(is_inner_on_truncation(&vs[i], 1e-12).pass);
                for j in 0..n {
                    if i == j { continue; }
                    let ab = vs[i].compose(&vs[j]).unwrap();
                    let ba = vs[j].compose(&vs[i]).unwrap();
                    let cols = ab.safe_columns().min(ba.safe_columns());
                    prop_assert!((ab.matrix().columns(0, cols) - ba.matrix().columns(0, cols)).norm() <= 1e-12);
                    let sa = vs[i].adjoint().compose(&vs[j]).unwrap();
                    let as_ = vs[j].compose(&vs[i].adjoint()).unwrap();
                    let cols = sa.safe_columns().min(as_.safe_columns());
                    prop_assert!((sa.matrix().columns(0, cols) - as_.matrix().columns(0, cols)).norm() <= 1e-12);
                }
            }
        }

        #[test]
        fn distinct_variable_symbols_doubly_commute(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = enumerate_basis(2, 6, 1).unwrap();
            let t0: Vec<ComplexMatrix> = (0..3).map(|_| random_matrix(&mut rng, 1, 1)).collect();
            let t1: Vec<ComplexMatrix> = (0..2).map(|_| random_matrix(&mut rng, 1, 1)).collect();
            let a = one_variable_symbol(0, &t0, &b).unwrap();
            let c = one_variable_symbol(1, &t1, &b).unwrap();
            let ac = a.compose(&c).unwrap();
            let ca = c.compose(&a).unwrap();
            let cols = ac.safe_columns().min(ca.safe_columns());
            prop_assert!((ac.matrix().columns(0, cols) - ca.matrix().columns(0, cols)).norm() <= 1e-12);
            let xa = a.adjoint().compose(&c).unwrap();
            let ax = c.compose(&a.adjoint()).unwrap();
            let cols = xa.safe_columns().min(ax.safe_columns());
            prop_assert!((xa.matrix().columns(0, cols) - ax.matrix().columns(0, cols)).norm() <= 1e-12);
        }

        #[test]
        fn wandering_vectors_are_orthogonal_to_shifts(n in 1usize..4) {
            let b = enumerate_basis(n, 7, 1).unwrap();
            let vs: Vec<_> = (0..n).map(|k| interleaving_isometry(k, &b).unwrap()).collect();
            let w = wandering_subspace(&vs, &b).unwrap();
            let wb = w.basis();
            // apply single V_k and pairs V_kV_j; images must stay orthogonal to W
            for k in 0..n {
                let img = vs[k].matrix() * wb;
                prop_assert!((wb.adjoint() * img).norm() <= 1e-10);
            }
        }
    }
}
