//! Canonical isometric dilation of a DCF tuple onto a truncated Hardy space.
//!
//! The embedding `U x = Σ_α ζ^α ⊗ Q* D T*^α x` (with `D = D_{T*}` and `Q` an
//! orthonormal basis of its range) is never materialized unless asked for.
//! Every quantity the verifiers need is a sum over a degree layer
//! `H_j = Σ_{|δ|=j} T^δ X T*^δ`, which obeys
//! `S_i(j) = S_{i-1}(j) + T_i S_i(j-1) T_i*` over the variables `i`.

use serde::Serialize;

use crate::contraction::{
    adjoint_defect, mobius_tuple, validate_tuple, ContractionTuple, MoebiusPoint,
};
use crate::error::{Error, Result};
use crate::hardy::{basis_cap, monomial_count, HardyBasis, HardyOperator, HardyVector};
use crate::linops::{
    c64, hconcat, hermitian_norm, identity, op_norm, orthonormalize, ComplexMatrix, ComplexVector,
    Subspace, C64,
};

/// Rank threshold for defect ranges.
pub const DEFECT_RANK_TOL: f64 = 1e-10;
/// Upper limit on automatically selected truncation degrees.
pub const MAX_AUTO_DEGREE: usize = 4000;
/// Size limit (rows) of the minimality proxy system.
pub const MINIMALITY_ROWS: usize = 600;

/// Streams `H_0, H_1, ...` for a fixed seed `X`.
pub struct Layers<'a> {
    comps: &'a [ComplexMatrix],
    adjs: Vec<ComplexMatrix>,
    prev: Vec<ComplexMatrix>,
    started: bool,
}

impl<'a> Layers<'a> {
    pub fn new(t: &'a ContractionTuple, seed: &ComplexMatrix) -> Self {
        let comps = t.components();
        Self {
            comps,
            adjs: comps.iter().map(|c| c.adjoint()).collect(),
            prev: vec![seed.clone(); comps.len() + 1],
            started: false,
        }
    }
}

impl Iterator for Layers<'_> {
    type Item = ComplexMatrix;

    fn next(&mut self) -> Option<ComplexMatrix> {
        if !self.started {
            self.started = true;
            return self.prev.last().cloned();
        }
        let m = self.prev[0].nrows();
        let mut cur = Vec::with_capacity(self.prev.len());
        cur.push(ComplexMatrix::zeros(m, m));
        for i in 1..self.prev.len() {
            let next = &cur[i - 1] + &self.comps[i - 1] * &self.prev[i] * &self.adjs[i - 1];
            cur.push(next);
        }
        self.prev = cur;
        self.prev.last().cloned()
    }
}

/// `H_0, ..., H_depth` with `H_j = Σ_{|δ|=j} T^δ X T*^δ`.
pub fn gram_layers(t: &ContractionTuple, seed: &ComplexMatrix, depth: usize) -> Vec<ComplexMatrix> {
    Layers::new(t, seed).take(depth + 1).collect()
}

/// `Σ_{|α|≤d} λ^α T*^α x`.
pub fn weighted_orbit_sum(
    t: &ContractionTuple,
    lambda: &[C64],
    x: &ComplexVector,
    d: usize,
) -> ComplexVector {
    let n = t.len();
    let adjs: Vec<ComplexMatrix> = t.components().iter().map(|c| c.adjoint()).collect();
    let mut prev = vec![x.clone(); n + 1];
    let mut total = x.clone();
    for _ in 1..=d {
        let mut cur = Vec::with_capacity(n + 1);
        cur.push(ComplexVector::zeros(x.len()));
        for i in 1..=n {
            let l = lambda.get(i - 1).copied().unwrap_or_default();
            let next = &cur[i - 1] + (&adjs[i - 1] * &prev[i]) * l;
            cur.push(next);
        }
        prev = cur;
        total += &prev[n];
    }
    total
}

/// Smallest `d` with `‖Σ_{|β|=d+1} T^β T*^β‖ ≤ τ`. That layer bounds
/// `‖x‖² - Σ_{|α|≤d} ‖D_{T*} T*^α x‖²` from above for every unit `x`.
pub fn certified_degree(t: &ContractionTuple, tau: f64, max_degree: usize) -> Result<usize> {
    let id = identity(t.space_dim());
    for (j, layer) in Layers::new(t, &id).enumerate().skip(1) {
        if hermitian_norm(&layer) <= tau {
            return Ok(j - 1);
        }
        if j > max_degree {
            break;
        }
    }
    Err(Error::UnsafeDegree(format!(
        "no degree up to {max_degree} certifies tail {tau}"
    )))
}

/// Smallest `d` with `r^{2(d+1)} · dim < τ`, `r` the largest spectral
/// radius. Ignores monomial multiplicity, so it is a heuristic.
pub fn heuristic_degree(radii: &[f64], dim: usize, tau: f64) -> Option<usize> {
    let r = radii.iter().cloned().fold(0.0f64, f64::max);
    if r == 0.0 {
        return Some(0);
    }
    if r >= 1.0 {
        return None;
    }
    let k = ((tau / dim as f64).ln() / (2.0 * r.ln())).floor() as i64;
    let mut d = (k - 1).max(0) as usize;
    while r.powi(2 * (d as i32 + 1)) * dim as f64 >= tau {
        d += 1;
    }
    Some(d)
}

/// Truncated canonical dilation model.
#[derive(Debug, Clone)]
pub struct DilationModel {
    tuple: ContractionTuple,
    adjoint_defect: ComplexMatrix,
    defect_basis: Subspace,
    coeff: ComplexMatrix,
    degree: usize,
    // grams[k] = G_k = Σ_{|α|≤k} T^α D² T*^α restricted through Q
    grams: Vec<ComplexMatrix>,
}

pub fn canonical_embedding(t: &ContractionTuple, d: usize) -> Result<DilationModel> {
    let dd = adjoint_defect(t)?;
    let q = orthonormalize(&dd, DEFECT_RANK_TOL);
    if q.dim() == 0 {
        return Err(Error::ZeroDefect);
    }
    let report = validate_tuple(t, 1e-10)?;
    if !report.pass {
        return Err(Error::NotContraction(format!(
            "tuple fails validation (margins {:?}, radii {:?}, commutators {:.3e}/{:.3e})",
            report.margins,
            report.spectral_radii,
            report.max_commutator,
            report.max_cross_commutator
        )));
    }
    let cap = basis_cap();
    let size = monomial_count(t.len(), d).unwrap_or(usize::MAX);
    if size > cap {
        return Err(Error::SizeOverflow { size, cap });
    }
    let coeff = q.basis().adjoint() * &dd;
    let seed = coeff.adjoint() * &coeff;
    let mut grams = Vec::with_capacity(d + 1);
    let mut acc = ComplexMatrix::zeros(t.space_dim(), t.space_dim());
    for h in Layers::new(t, &seed).take(d + 1) {
        acc += h;
        grams.push(acc.clone());
    }
    Ok(DilationModel {
        tuple: t.clone(),
        adjoint_defect: dd,
        defect_basis: q,
        coeff,
        degree: d,
        grams,
    })
}

impl DilationModel {
    pub fn tuple(&self) -> &ContractionTuple {
        &self.tuple
    }

    pub fn truncation_degree(&self) -> usize {
        self.degree
    }

    pub fn num_vars(&self) -> usize {
        self.tuple.len()
    }

    pub fn defect_basis(&self) -> &Subspace {
        &self.defect_basis
    }

    pub fn defect_dim(&self) -> usize {
        self.defect_basis.dim()
    }

    pub fn adjoint_defect(&self) -> &ComplexMatrix {
        &self.adjoint_defect
    }

    /// `Q* D`, the `α = 0` block of the embedding.
    pub fn leading_block(&self) -> &ComplexMatrix {
        &self.coeff
    }

    /// `G_k = U_k* U_k` for `k ≤ d`.
    pub fn gram(&self, k: usize) -> &ComplexMatrix {
        &self.grams[k.min(self.degree)]
    }

    pub fn basis(&self) -> Result<HardyBasis> {
        HardyBasis::new(self.num_vars(), self.degree, self.defect_dim())
    }

    /// Blocks `Q* D T*^α` for every monomial of `basis`, in basis order.
    fn blocks(&self, basis: &HardyBasis) -> Vec<ComplexMatrix> {
        let adjs: Vec<ComplexMatrix> = self
            .tuple
            .components()
            .iter()
            .map(|c| c.adjoint())
            .collect();
        let mut out: Vec<ComplexMatrix> = Vec::with_capacity(basis.num_monomials());
        out.push(self.coeff.clone());
        let mut prev = vec![0u32; self.num_vars()];
        for i in 1..basis.num_monomials() {
            let alpha = basis.monomial(i);
            let k = alpha
                .iter()
                .position(|&a| a > 0)
                .expect("nonconstant monomial");
            prev.copy_from_slice(alpha);
            prev[k] -= 1;
            let p = basis.monomial_index(&prev).expect("predecessor in basis");
            let b = &out[p] * &adjs[k];
            out.push(b);
        }
        out
    }

    /// The matrix of `U` (rows ordered like [`DilationModel::basis`]). Subject
    /// to the basis size cap.
    pub fn embedding(&self) -> Result<ComplexMatrix> {
        let basis = self.basis()?;
        let r = self.defect_dim();
        let m = self.tuple.space_dim();
        let mut u = ComplexMatrix::zeros(basis.len(), m);
        for (i, b) in self.blocks(&basis).iter().enumerate() {
            u.view_mut((i * r, 0), (r, m)).copy_from(b);
        }
        Ok(u)
    }

    /// `‖x‖² - ⟨G_d x, x⟩`.
    pub fn tail(&self, x: &ComplexVector) -> f64 {
        x.norm_squared() - quad(&self.grams[self.degree], x)
    }

    /// `⟨Σ_{|β|=d+1} T^β T*^β x, x⟩`, an upper bound for [`DilationModel::tail`]
    /// that is a sum of nonnegative terms.
    pub fn tail_certificate(&self, x: &ComplexVector) -> f64 {
        let id = identity(self.tuple.space_dim());
        let layer = Layers::new(&self.tuple, &id)
            .nth(self.degree + 1)
            .expect("layers are infinite");
        quad(&layer, x).max(0.0)
    }

    /// `G_d^{-1} U* M^α U`, the pull-back of `M_ζ^α` through the truncated
    /// embedding. Equals `G_d^{-1} T^α G_{d-|α|}`.
    pub fn pullback_power(&self, alpha: &[u32]) -> Result<ComplexMatrix> {
        let a: usize = alpha.iter().map(|&v| v as usize).sum();
        if a > self.degree || alpha.len() > self.num_vars() {
            return Err(Error::UnsafeDegree(format!(
                "|α| = {a} at degree {}",
                self.degree
            )));
        }
        let ginv = self.gram_inverse()?;
        Ok(ginv * self.tuple.power(alpha) * &self.grams[self.degree - a])
    }

    /// `G_d^{-1} U* M*^α M^β U = G_d^{-1} T^β G_{d-|α|-|β|} T*^α` for disjoint `α, β`.
    pub fn pullback_regular(&self, alpha: &[u32], beta: &[u32]) -> Result<ComplexMatrix> {
        let a: usize = alpha.iter().map(|&v| v as usize).sum();
        let b: usize = beta.iter().map(|&v| v as usize).sum();
        if a + b > self.degree || alpha.len().max(beta.len()) > self.num_vars() {
            return Err(Error::UnsafeDegree(format!(
                "|α| + |β| = {} at degree {}",
                a + b,
                self.degree
            )));
        }
        let ginv = self.gram_inverse()?;
        Ok(ginv
            * self.tuple.power(beta)
            * &self.grams[self.degree - a - b]
            * self.tuple.power(alpha).adjoint())
    }

    fn gram_inverse(&self) -> Result<ComplexMatrix> {
        self.grams[self.degree]
            .clone()
            .try_inverse()
            .ok_or(Error::SingularShift {
                condition: f64::INFINITY,
            })
    }
}

fn quad(a: &ComplexMatrix, x: &ComplexVector) -> f64 {
    x.dotc(&(a * x)).re
}

/// Exponent vectors of `n` variables with total degree `≤ k`, graded order.
fn exponents_up_to(n: usize, k: usize) -> Vec<Vec<u32>> {
    match HardyBasis::new(n, k, 1) {
        Ok(b) => (0..b.num_monomials())
            .map(|i| b.monomial(i).to_vec())
            .collect(),
        Err(_) => Vec::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DilationReport {
    /// `max_α ‖P_H M^α|_H - T^α‖` over `|α| ≤ order_cap`.
    pub dilation_residual: f64,
    /// `max ‖P_H M*^α M^β|_H - T*^α T^β‖` over disjoint pairs.
    pub regularity_residual: f64,
    /// Minimality (truncated proxy): rank of `{P_c M^α U e_j}` against the
    /// dimension of the degree-`c` truncation.
    pub minimality_rank: usize,
    pub minimality_target: usize,
    pub minimality_cutoff: usize,
    /// `‖I - G_d‖`.
    pub tail_bound: f64,
    pub safe_cutoff: usize,
    pub pass: bool,
}

pub fn verify_dilation(
    model: &DilationModel,
    order_cap: usize,
    tol: f64,
) -> Result<DilationReport> {
    let d = model.truncation_degree();
    if order_cap > d {
        return Err(Error::UnsafeDegree(format!(
            "order cap {order_cap} exceeds truncation degree {d}"
        )));
    }
    let n = model.num_vars();
    let t = model.tuple();
    let m = t.space_dim();
    let ginv = model.gram_inverse()?;
    let exps = exponents_up_to(n, order_cap);
    let powers: Vec<ComplexMatrix> = exps.iter().map(|a| t.power(a)).collect();
    let deg = |a: &[u32]| a.iter().map(|&v| v as usize).sum::<usize>();

    let mut dilation_residual = 0.0f64;
    for (a, p) in exps.iter().zip(&powers) {
        let got = &ginv * p * model.gram(d - deg(a));
        dilation_residual = dilation_residual.max(op_norm(&(got - p)));
    }

    let mut regularity_residual = 0.0f64;
    for (ia, a) in exps.iter().enumerate() {
        for (ib, b) in exps.iter().enumerate() {
            let disjoint = a.iter().zip(b).all(|(x, y)| *x == 0 || *y == 0);
            if !disjoint || deg(a) + deg(b) > order_cap {
                continue;
            }
            let pa = &powers[ia];
            let pb = &powers[ib];
            let got = &ginv * pb * model.gram(d - deg(a) - deg(b)) * pa.adjoint();
            let want = pa.adjoint() * pb;
            regularity_residual = regularity_residual.max(op_norm(&(got - want)));
        }
    }

    let r = model.defect_dim();
    let mut c = 0;
    for k in 0..=order_cap {
        if monomial_count(n, k).unwrap_or(usize::MAX).saturating_mul(r) <= MINIMALITY_ROWS {
            c = k;
        }
    }
    let small = HardyBasis::new(n, c, r)?;
    let blocks = model.blocks(&small);
    let nm = small.num_monomials();
    let mut sys = ComplexMatrix::zeros(nm * r, nm * m);
    let mut target = vec![0u32; n];
    for s in 0..nm {
        let a = small.monomial(s);
        for (g, blk) in blocks.iter().enumerate() {
            let gamma = small.monomial(g);
            for k in 0..n {
                target[k] = a[k] + gamma[k];
            }
            if let Some(mu) = small.monomial_index(&target) {
                sys.view_mut((mu * r, s * m), (r, m)).copy_from(blk);
            }
        }
    }
    let rank = orthonormalize(&sys, 1e-10).dim();

    let tail_bound = hermitian_norm(&(identity(m) - model.gram(d)));
    let pass = dilation_residual <= tol && regularity_residual <= tol && rank == nm * r;
    Ok(DilationReport {
        dilation_residual,
        regularity_residual,
        minimality_rank: rank,
        minimality_target: nm * r,
        minimality_cutoff: c,
        tail_bound,
        safe_cutoff: d - order_cap,
        pass,
    })
}

/// `(Σ_{|α|≤d} ‖D_{T*} T*^α x‖², ‖x‖² - that sum)`.
pub fn norm_identity_check(
    t: &ContractionTuple,
    x: &ComplexVector,
    d: usize,
) -> Result<(f64, f64)> {
    if x.len() != t.space_dim() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} on a space of dimension {}",
            x.len(),
            t.space_dim()
        )));
    }
    let dd = adjoint_defect(t)?;
    let seed = &dd * &dd;
    let partial: f64 = Layers::new(t, &seed).take(d + 1).map(|h| quad(&h, x)).sum();
    Ok((partial, x.norm_squared() - partial))
}

/// Defect-norm comparison at one Möbius point: direct versus through the dilation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferReport {
    /// `‖D_{Φ_λ(T)*} x‖`.
    pub direct: f64,
    /// `‖D_{Φ_λ(M)*} U_d x‖ = (Π (1 - |λ_i|²))^{1/2} ‖(U_d x)(λ)‖`.
    pub through_dilation: f64,
    /// Truncation bound on `|direct - through_dilation|`, including a
    /// `1e-12 ‖x‖` rounding allowance.
    pub tail_bound: f64,
}

pub fn defect_transfer(
    model: &DilationModel,
    lambda: &MoebiusPoint,
    x: &ComplexVector,
) -> Result<TransferReport> {
    if lambda.support_len() > model.num_vars() {
        return Err(Error::InvalidPoint(format!(
            "point supported on {} variables, tuple has {}",
            lambda.support_len(),
            model.num_vars()
        )));
    }
    let t = model.tuple();
    let phi = mobius_tuple(t, lambda)?;
    let direct = (adjoint_defect(&phi)? * x).norm();
    let f = weighted_orbit_sum(t, lambda.coords(), x, model.truncation_degree());
    let weight: f64 = lambda.coords().iter().map(|l| 1.0 - l.norm_sqr()).product();
    let through_dilation = weight.sqrt() * (model.leading_block() * f).norm();
    let tail_bound = model.tail_certificate(x).sqrt() + 1e-12 * x.norm();
    Ok(TransferReport {
        direct,
        through_dilation,
        tail_bound,
    })
}

/// 25 deterministic points in `n` coordinates: the origin, then 12 points of
/// radius 0.45 and 12 of radius 0.9, coordinate `k` at angle `2π j (k+1)/12`.
pub fn lambda_grid(n: usize) -> Vec<MoebiusPoint> {
    let mut out = vec![MoebiusPoint::origin()];
    for radius in [0.45, 0.9] {
        for j in 0..12 {
            let coords = (0..n)
                .map(|k| {
                    let angle = std::f64::consts::TAU * (j * (k + 1)) as f64 / 12.0;
                    C64::from_polar(radius, angle)
                })
                .collect();
            out.push(MoebiusPoint::new(coords).expect("grid radius below 1"));
        }
    }
    out
}

/// Rank of `⋁_λ ran D_{Φ_λ(T)*}` over `grid` and whether it is all of `H`.
pub fn defect_span_completeness(
    t: &ContractionTuple,
    grid: &[MoebiusPoint],
) -> Result<(usize, bool)> {
    let mut mats = Vec::with_capacity(grid.len());
    for lam in grid {
        mats.push(adjoint_defect(&mobius_tuple(t, lam)?)?);
    }
    let refs: Vec<&ComplexMatrix> = mats.iter().collect();
    let rank = if refs.is_empty() {
        0
    } else {
        orthonormalize(&hconcat(&refs), DEFECT_RANK_TOL).dim()
    };
    Ok((rank, rank == t.space_dim()))
}

/// `Σ_k |φ_{λ_k}(μ_k)|²` over the union of supports.
pub fn equivalence_pseudometric(lambda: &MoebiusPoint, mu: &MoebiusPoint) -> f64 {
    let n = lambda.support_len().max(mu.support_len());
    (0..n)
        .map(|k| {
            let (l, m) = (lambda.get(k), mu.get(k));
            ((l - m) / (c64(1.0, 0.0) - l.conj() * m)).norm_sqr()
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerSearchResult {
    pub exponents: Vec<usize>,
    /// `‖Π (I - W_k W_k*) x‖ / ‖x‖` per probe, `W_k = V_k^{k_n}`.
    pub lower_ratios: Vec<f64>,
    pub pass: bool,
}

fn support_degree(v: &HardyVector) -> Option<usize> {
    let e = v.basis().coeff_dim();
    v.coeffs()
        .iter()
        .rposition(|c| *c != C64::default())
        .map(|i| v.basis().degree_of(i - i % e))
}

fn apply_tracked(op: &HardyOperator, v: &HardyVector) -> Result<HardyVector> {
    if let Some(deg) = support_degree(v) {
        match op.safe_degree() {
            Some(s) if deg <= s => {}
            _ => {
                return Err(Error::UnsafeDegree(format!(
                    "input of degree {deg}, operator exact up to {:?}",
                    op.safe_degree()
                )))
            }
        }
    }
    op.apply(v)
}

/// Smallest powers `k_n ≥ 1` with `max_x ‖V_n*^{k_n} x‖ / ‖x‖ < ε / 2^n`
/// (`n` counted from 1), then a post-check of `‖D_{W*} x‖ ≥ (1 - ε)‖x‖`.
pub fn power_search(
    ops: &[HardyOperator],
    probes: &[HardyVector],
    eps: f64,
) -> Result<PowerSearchResult> {
    let probes: Vec<&HardyVector> = probes.iter().filter(|p| p.norm() > 0.0).collect();
    let mut exponents = Vec::with_capacity(ops.len());
    for (idx, op) in ops.iter().enumerate() {
        let adj = op.adjoint();
        let bound = eps / 2f64.powi(idx as i32 + 1);
        let limit = 4 * (op.basis_in().max_degree() + 1) + 4;
        let mut ys: Vec<HardyVector> = probes.iter().map(|p| (*p).clone()).collect();
        let mut found = None;
        for k in 1..=limit {
            for y in ys.iter_mut() {
                *y = apply_tracked(&adj, y)?;
            }
            let worst = ys
                .iter()
                .zip(&probes)
                .map(|(y, p)| y.norm() / p.norm())
                .fold(0.0f64, f64::max);
            if worst < bound {
                found = Some(k);
                break;
            }
        }
        exponents.push(found.ok_or_else(|| {
            Error::UnsafeDegree(format!(
                "no power of operator {idx} up to {limit} meets {bound:e}"
            ))
        })?);
    }
    let mut lower_ratios = Vec::with_capacity(probes.len());
    for p in &probes {
        let mut z = (*p).clone();
        for (op, &k) in ops.iter().zip(&exponents) {
            let adj = op.adjoint();
            let mut w = z.clone();
            for _ in 0..k {
                w = apply_tracked(&adj, &w)?;
            }
            for _ in 0..k {
                w = apply_tracked(op, &w)?;
            }
            z = HardyVector::new(z.basis().clone(), z.coeffs() - w.coeffs())?;
        }
        lower_ratios.push(z.norm() / p.norm());
    }
    let pass = lower_ratios.iter().all(|&r| r >= 1.0 - eps);
    Ok(PowerSearchResult {
        exponents,
        lower_ratios,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectSumReport {
    /// Per-block partial sums `Σ_{|α|≤d} ‖D_{T_b*} T_b*^α x_b‖²`.
    pub block_sums: [f64; 2],
    pub norm_sqr: f64,
    pub residual: f64,
    /// Sum of the per-block tail certificates.
    pub tail_bound: f64,
}

/// Condition-(2) series for `T_1 ⊕ T_2` with every block evaluated at the
/// origin, summed block by block.
pub fn direct_sum_check(
    t1: &ContractionTuple,
    t2: &ContractionTuple,
    x: &ComplexVector,
    d: usize,
) -> Result<DirectSumReport> {
    let sum = t1.direct_sum(t2)?;
    if x.len() != sum.space_dim() {
        return Err(Error::DimensionMismatch(
            "probe does not fit the direct sum".into(),
        ));
    }
    let (m1, m2) = (t1.space_dim(), t2.space_dim());
    let x1 = x.rows(0, m1).into_owned();
    let x2 = x.rows(m1, m2).into_owned();
    let mut block_sums = [0.0; 2];
    let mut tail_bound = 0.0;
    for (i, (t, v)) in [(t1, &x1), (t2, &x2)].into_iter().enumerate() {
        let model = canonical_embedding(t, d)?;
        block_sums[i] = quad(model.gram(d), v);
        tail_bound += model.tail_certificate(v);
    }
    let norm_sqr = x.norm_squared();
    Ok(DirectSumReport {
        block_sums,
        norm_sqr,
        residual: (norm_sqr - block_sums[0] - block_sums[1]).abs(),
        tail_bound: tail_bound + 1e-12 * norm_sqr,
    })
}
