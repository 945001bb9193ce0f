//! Contraction tuples: validation, defects, Möbius and Blaschke calculus.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linops::{
    c64, commutator, embed_factor, hermitian_sqrt, identity, op_norm, solve_shifted, ComplexMatrix,
    C64,
};

/// Norm slack allowed on top of 1 for a contraction.
pub const NORM_SLACK: f64 = 1e-10;
/// Required gap between the spectral-radius estimate and 1.
pub const DELTA_C00: f64 = 1e-6;
/// Power used by [`spectral_radius_estimate`].
pub const RADIUS_POWER: u32 = 64;
/// Eigenvalue clamp used when taking defect square roots. It has to absorb
/// `1 - (1 + NORM_SLACK)^2`.
pub const DEFECT_SQRT_TOL: f64 = 1e-9;

/// A finite list of commuting-structure contractions on a common space; the
/// implicit tail of the sequence is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionTuple {
    space_dim: usize,
    components: Vec<ComplexMatrix>,
}

impl ContractionTuple {
    pub fn new(components: Vec<ComplexMatrix>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::DimensionMismatch("empty tuple".into()))?;
        let dim = first.nrows();
        for (i, c) in components.iter().enumerate() {
            if c.nrows() != dim || c.ncols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "component {i} is {}x{}, expected {dim}x{dim}",
                    c.nrows(),
                    c.ncols()
                )));
            }
        }
        Ok(Self {
            space_dim: dim,
            components,
        })
    }

    pub fn zero(space_dim: usize, len: usize) -> Self {
        Self {
            space_dim,
            components: vec![ComplexMatrix::zeros(space_dim, space_dim); len.max(1)],
        }
    }

    pub fn space_dim(&self) -> usize {
        self.space_dim
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[ComplexMatrix] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &ComplexMatrix {
        &self.components[i]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space_dim: self.space_dim,
            components: self.components.iter().map(|c| c.adjoint()).collect(),
        }
    }

    /// `T^α = T_1^{α_1} ... T_n^{α_n}`; exponents past the tuple length must be 0.
    pub fn power(&self, alpha: &[u32]) -> ComplexMatrix {
        let mut out = identity(self.space_dim);
        for (i, &a) in alpha.iter().enumerate() {
            if a == 0 {
                continue;
            }
            assert!(i < self.len(), "exponent on a zero component");
            for _ in 0..a {
                out = &out * &self.components[i];
            }
        }
        out
    }

    /// Block-diagonal direct sum of two tuples of equal length.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch(format!(
                "tuple lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        let (a, b) = (self.space_dim, other.space_dim);
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(x, y)| {
                let mut m = ComplexMatrix::zeros(a + b, a + b);
                m.view_mut((0, 0), (a, a)).copy_from(x);
                m.view_mut((a, a), (b, b)).copy_from(y);
                m
            })
            .collect();
        Ok(Self {
            space_dim: a + b,
            components,
        })
    }
}

/// A point of the multidisk with finitely many nonzero coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MoebiusPoint {
    coords: Vec<C64>,
}

impl MoebiusPoint {
    pub fn new(mut coords: Vec<C64>) -> Result<Self> {
        if let Some(bad) = coords.iter().find(|c| !(c.norm() < 1.0)) {
            return Err(Error::InvalidPoint(format!("|{bad}| >= 1")));
        }
        while coords.last().is_some_and(|c| *c == C64::new(0.0, 0.0)) {
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
}

/// `c · Π φ_{a_i}` with `|c| = 1` and zeros in the open disk.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlaschkeProduct {
    unimodular_factor: C64,
    zeros: Vec<C64>,
}

impl BlaschkeProduct {
    pub fn new(unimodular_factor: C64, zeros: Vec<C64>) -> Result<Self> {
        if (unimodular_factor.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidPoint(format!(
                "factor {unimodular_factor} is not unimodular"
            )));
        }
        if let Some(bad) = zeros.iter().find(|z| !(z.norm() < 1.0)) {
            return Err(Error::InvalidPoint(format!("zero {bad} outside the disk")));
        }
        Ok(Self {
            unimodular_factor,
            zeros,
        })
    }

    pub fn from_zeros(zeros: Vec<C64>) -> Result<Self> {
        Self::new(c64(1.0, 0.0), zeros)
    }

    pub fn unimodular_factor(&self) -> C64 {
        self.unimodular_factor
    }

    pub fn zeros(&self) -> &[C64] {
        &self.zeros
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.zeros
            .iter()
            .fold(self.unimodular_factor, |acc, &a| acc * mobius_scalar(a, z))
    }

    /// Taylor coefficients at 0 up to degree `deg` inclusive.
    pub fn series(&self, deg: usize) -> Vec<C64> {
        let mut out = vec![C64::default(); deg + 1];
        out[0] = self.unimodular_factor;
        for &a in &self.zeros {
            out = series_mul(&out, &mobius_series(a, deg));
        }
        out
    }
}

/// `φ_a(z) = (a - z) / (1 - ā z)`.
pub fn mobius_scalar(a: C64, z: C64) -> C64 {
    (a - z) / (c64(1.0, 0.0) - a.conj() * z)
}

/// Taylor coefficients of `φ_a`: `a`, then `(|a|² - 1) ā^{k-1}`.
pub fn mobius_series(a: C64, deg: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(deg + 1);
    out.push(a);
    let lead = c64(a.norm_sqr() - 1.0, 0.0);
    let mut p = c64(1.0, 0.0);
    for _ in 1..=deg {
        out.push(lead * p);
        p *= a.conj();
    }
    out
}

/// Product of two power series, truncated to the length of the shorter one.
pub fn series_mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len().min(b.len());
    (0..n)
        .map(|k| (0..=k).map(|i| a[i] * b[k - i]).sum())
        .collect()
}

/// Outcome of [`validate_tuple`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    /// `1 - |T_i|` per component.
    pub margins: Vec<f64>,
    pub spectral_radii: Vec<f64>,
    pub max_commutator: f64,
    pub max_cross_commutator: f64,
    pub pass: bool,
}

/// `|A^K|^{1/K}` with `K = 64`, by repeated squaring.
pub fn spectral_radius_estimate(a: &ComplexMatrix) -> f64 {
    let mut p = a.clone();
    let mut k = 1u32;
    while k < RADIUS_POWER {
        p = &p * &p;
        k *= 2;
    }
    op_norm(&p).powf(1.0 / RADIUS_POWER as f64)
}

pub fn validate_tuple(t: &ContractionTuple, tol: f64) -> Result<ValidationReport> {
    let mut margins = Vec::with_capacity(t.len());
    let mut spectral_radii = Vec::with_capacity(t.len());
    for c in t.components() {
        margins.push(1.0 - op_norm(c));
        spectral_radii.push(spectral_radius_estimate(c));
    }
    let mut max_commutator = 0.0f64;
    let mut max_cross_commutator = 0.0f64;
    for i in 0..t.len() {
        for j in 0..t.len() {
            if i == j {
                continue;
            }
            let (a, b) = (t.component(i), t.component(j));
            if i < j {
                max_commutator = max_commutator.max(op_norm(&commutator(a, b)));
            }
            max_cross_commutator = max_cross_commutator.max(op_norm(&commutator(&a.adjoint(), b)));
        }
    }
    let pass = margins.iter().all(|&m| m >= -tol)
        && spectral_radii.iter().all(|&r| r <= 1.0 - DELTA_C00)
        && max_commutator <= tol
        && max_cross_commutator <= tol;
    Ok(ValidationReport {
        margins,
        spectral_radii,
        max_commutator,
        max_cross_commutator,
        pass,
    })
}

/// `D_A = (I - A*A)^{1/2}`.
pub fn defect(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(
            "defect of a non-square matrix".into(),
        ));
    }
    let g = identity(a.nrows()) - a.adjoint() * a;
    hermitian_sqrt(&g, DEFECT_SQRT_TOL)
}

/// `D_{T_1} ... D_{T_n}` in listed order.
pub fn joint_defect(t: &ContractionTuple) -> Result<ComplexMatrix> {
    let mut out = identity(t.space_dim());
    for c in t.components() {
        out = out * defect(c)?;
    }
    Ok(out)
}

/// `D_{T*}` of the tuple, i.e. the joint defect of the adjoint tuple.
pub fn adjoint_defect(t: &ContractionTuple) -> Result<ComplexMatrix> {
    joint_defect(&t.adjoint())
}

/// `φ_a(A) = (aI - A)(I - āA)^{-1}`.
pub fn mobius(a_mat: &ComplexMatrix, a: C64) -> Result<ComplexMatrix> {
    if !(a.norm() < 1.0) {
        return Err(Error::InvalidPoint(format!("|{a}| >= 1")));
    }
    let n = a_mat.nrows();
    let r = solve_shifted(a_mat, a.conj())?;
    Ok((identity(n) * a - a_mat) * r)
}

/// Componentwise `φ_{λ_k}(T_k)`. Coordinates of `λ` past the tuple act on
/// the zero tail and produce `λ_k I`.
pub fn mobius_tuple(t: &ContractionTuple, lambda: &MoebiusPoint) -> Result<ContractionTuple> {
    let len = t.len().max(lambda.support_len());
    let n = t.space_dim();
    let zero = ComplexMatrix::zeros(n, n);
    let components = (0..len)
        .map(|k| mobius(t.components().get(k).unwrap_or(&zero), lambda.get(k)))
        .collect::<Result<Vec<_>>>()?;
    ContractionTuple::new(components)
}

/// `B(A) = c · Π φ_{a_i}(A)`.
pub fn blaschke_apply(b: &BlaschkeProduct, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let mut out = identity(a.nrows()) * b.unimodular_factor();
    for &z in b.zeros() {
        out = out * mobius(a, z)?;
    }
    Ok(out)
}

/// `T_i = I ⊗ ... ⊗ A_i ⊗ ... ⊗ I` on the tensor product of the factor spaces.
pub fn tensor_tuple(factors: &[ComplexMatrix]) -> Result<ContractionTuple> {
    for (i, f) in factors.iter().enumerate() {
        if !f.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "factor {i} is not square"
            )));
        }
        let norm = op_norm(f);
        if norm > 1.0 + NORM_SLACK {
            return Err(Error::NotContraction(format!("factor {i} has norm {norm}")));
        }
        let rho = spectral_radius_estimate(f);
        if rho > 1.0 - DELTA_C00 {
            return Err(Error::NotContraction(format!(
                "factor {i} has spectral radius estimate {rho}"
            )));
        }
    }
    let dims: Vec<usize> = factors.iter().map(|f| f.nrows()).collect();
    let components = factors
        .iter()
        .enumerate()
        .map(|(i, f)| embed_factor(&dims, i, f))
        .collect();
    ContractionTuple::new(components)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::ComplexVector;
    use crate::random::{random_contraction, random_disk_point, random_tensor_tuple, TensorShape};
    use nalgebra::DVector;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(vals: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&DVector::from_iterator(
            vals.len(),
            vals.iter().map(|&v| c64(v, 0.0)),
        ))
    }

    fn nilpotent() -> ComplexMatrix {
        let mut n = ComplexMatrix::zeros(2, 2);
        n[(0, 1)] = c64(1.0, 0.0);
        n
    }

    fn dist(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        op_norm(&(a - b))
    }

    const SHAPE: TensorShape = TensorShape {
        max_factors: 3,
        max_dim: 3,
        min_norm: 0.3,
        max_norm: 0.8,
    };

    #[test]
    fn validation_examples() {
        let r = validate_tuple(&ContractionTuple::zero(3, 2), 1e-10).unwrap();
        assert!(r.pass);
        assert_eq!(r.max_commutator, 0.0);
        assert_eq!(r.max_cross_commutator, 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f: Vec<_> = (0..3)
            .map(|_| random_contraction(&mut rng, 3, 0.8))
            .collect();
        let t = tensor_tuple(&f).unwrap();
        let r = validate_tuple(&t, 1e-10).unwrap();
        assert!(r.pass);
        assert!(r.max_commutator <= 1e-12 && r.max_cross_commutator <= 1e-12);
        // direct oracle for one pair
        let c = commutator(&t.component(0).adjoint(), t.component(2));
        assert!(op_norm(&c) <= 1e-12);

        let n = nilpotent();
        let pair = ContractionTuple::new(vec![n.clone(), n.clone()]).unwrap();
        let r = validate_tuple(&pair, 1e-10).unwrap();
        assert!(!r.pass);
        // [N*, N] = diag(-1, 1)
        assert!((r.max_cross_commutator - 1.0).abs() < 1e-12);
    }

    #[test]
    fn defect_examples() {
        assert!(dist(&defect(&ComplexMatrix::zeros(2, 2)).unwrap(), &identity(2)) < 1e-15);
        let u = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(0.0, 0.0), c64(0.0, 1.0), c64(1.0, 0.0), c64(0.0, 0.0)],
        );
        assert!(op_norm(&defect(&u).unwrap()) < 1e-7);
        let d = defect(&diag(&[0.5])).unwrap();
        assert!((d[(0, 0)].re - 3f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn joint_defect_examples() {
        let a = diag(&[0.5]);
        let single = ContractionTuple::new(vec![a.clone()]).unwrap();
        assert!(dist(&joint_defect(&single).unwrap(), &defect(&a).unwrap()) < 1e-15);
        let with_zero = ContractionTuple::new(vec![a.clone(), ComplexMatrix::zeros(1, 1)]).unwrap();
        assert!((joint_defect(&with_zero).unwrap()[(0, 0)].re - 0.75f64.sqrt()).abs() < 1e-15);
        let t = tensor_tuple(&[diag(&[0.3]), diag(&[0.6])]).unwrap();
        let want = (1.0 - 0.09f64).sqrt() * (1.0 - 0.36f64).sqrt();
        assert!((joint_defect(&t).unwrap()[(0, 0)].re - want).abs() < 1e-15);
    }

    #[test]
    fn mobius_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_contraction(&mut rng, 3, 0.7);
        assert!(dist(&mobius(&a, c64(0.0, 0.0)).unwrap(), &(-a.clone())) < 1e-15);
        let z = mobius(&ComplexMatrix::zeros(2, 2), c64(0.3, -0.2)).unwrap();
        assert!(dist(&z, &(identity(2) * c64(0.3, -0.2))) < 1e-15);
        let p = c64(0.4, 0.5);
        let back = mobius(&mobius(&a, p).unwrap(), p).unwrap();
        assert!(dist(&back, &a) <= 1e-10);
        assert!(matches!(
            mobius(&a, c64(1.0, 0.0)),
            Err(Error::InvalidPoint(_))
        ));
    }

    #[test]
    fn mobius_tuple_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let t = random_tensor_tuple(&mut rng, SHAPE).unwrap();
        let neg = mobius_tuple(&t, &MoebiusPoint::origin()).unwrap();
        for (x, y) in neg.components().iter().zip(t.components()) {
            assert!(dist(x, &(-y.clone())) < 1e-15);
        }
        let z = ContractionTuple::zero(2, 2);
        let lam = MoebiusPoint::new(vec![c64(0.3, 0.0), c64(0.5, 0.0)]).unwrap();
        let out = mobius_tuple(&z, &lam).unwrap();
        assert!(dist(out.component(0), &(identity(2) * c64(0.3, 0.0))) < 1e-15);
        assert!(dist(out.component(1), &(identity(2) * c64(0.5, 0.0))) < 1e-15);
    }

    #[test]
    fn blaschke_examples() {
        let n = nilpotent();
        let z2 = BlaschkeProduct::from_zeros(vec![C64::default(); 2]).unwrap();
        assert!(op_norm(&blaschke_apply(&z2, &n).unwrap()) < 1e-15);
        let one = BlaschkeProduct::from_zeros(vec![]).unwrap();
        assert!(dist(&blaschke_apply(&one, &n).unwrap(), &identity(2)) < 1e-15);
        let b = BlaschkeProduct::from_zeros(vec![c64(0.5, 0.0)]).unwrap();
        assert!(op_norm(&blaschke_apply(&b, &diag(&[0.5])).unwrap()) < 1e-15);
        // series oracle: evaluate the truncated Taylor polynomial inside the disk
        let b = BlaschkeProduct::new(c64(0.0, 1.0), vec![c64(0.3, 0.1), c64(-0.2, 0.4)]).unwrap();
        let s = b.series(80);
        let z = c64(0.2, -0.3);
        let mut acc = C64::default();
        for c in s.iter().rev() {
            acc = acc * z + c;
        }
        assert!((acc - b.eval(z)).norm() < 1e-14);
    }

    #[test]
    fn tensor_examples() {
        let a = diag(&[0.5]);
        let one = tensor_tuple(std::slice::from_ref(&a)).unwrap();
        assert_eq!(one.len(), 1);
        assert!(dist(one.component(0), &a) < 1e-15);
        let t = tensor_tuple(&[diag(&[0.2]), diag(&[0.7])]).unwrap();
        assert_eq!(t.space_dim(), 1);
        assert!((t.component(1)[(0, 0)] - c64(0.7, 0.0)).norm() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (x, y) = (
            random_contraction(&mut rng, 2, 0.6),
            random_contraction(&mut rng, 2, 0.6),
        );
        let t = tensor_tuple(&[x.clone(), y.clone()]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let want0 = if j == l { x[(i, k)] } else { C64::default() };
                        let want1 = if i == k { y[(j, l)] } else { C64::default() };
                        assert_eq!(t.component(0)[(2 * i + j, 2 * k + l)], want0);
                        assert_eq!(t.component(1)[(2 * i + j, 2 * k + l)], want1);
                    }
                }
            }
        }
        assert_eq!(
            op_norm(&commutator(&t.component(0).adjoint(), t.component(1))),
            0.0
        );
        assert!(matches!(
            tensor_tuple(&[identity(2)]),
            Err(Error::NotContraction(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn defects_commute_for_doubly_commuting(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = random_tensor_tuple(&mut rng, SHAPE).unwrap();
            let ds: Vec<_> = t.components().iter().map(|c| defect(c).unwrap()).collect();
            for i in 0..ds.len() {
                for j in 0..ds.len() {
                    prop_assert!(op_norm(&commutator(&ds[i], &ds[j])) <= 1e-10);
                }
            }
            let rev = ContractionTuple::new(t.components().iter().rev().cloned().collect()).unwrap();
            prop_assert!(dist(&joint_defect(&t).unwrap(), &joint_defect(&rev).unwrap()) <= 1e-10);
        }

        #[test]
        fn mobius_keeps_contractions_and_radius(seed in any::<u64>(), n in 1usize..5, norm in 0.05f64..0.99) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_contraction(&mut rng, n, norm);
            let p = random_disk_point(&mut rng, 0.95);
            let m = mobius(&a, p).unwrap();
            prop_assert!(op_norm(&m) <= 1.0 + 1e-8);
            prop_assert!(spectral_radius_estimate(&m) < 1.0);
            prop_assert!(dist(&mobius(&m, p).unwrap(), &a) <= 1e-10);
        }

        #[test]
        fn mobius_tuple_preserves_class(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = random_tensor_tuple(&mut rng, SHAPE).unwrap();
            let lam = MoebiusPoint::new((0..t.len() + 1).map(|_| random_disk_point(&mut rng, 0.9)).collect()).unwrap();
            let s = mobius_tuple(&t, &lam).unwrap();
            prop_assert!(validate_tuple(&s, 1e-10).unwrap().pass);
            let back = mobius_tuple(&s, &lam).unwrap();
            for k in 0..t.len() {
                prop_assert!(dist(back.component(k), t.component(k)) <= 1e-10);
            }
            for k in t.len()..back.len() {
                prop_assert!(op_norm(back.component(k)) <= 1e-10);
            }
        }

        #[test]
        fn blaschke_of_scalar_matches_eval(seed in any::<u64>(), deg in 0usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let zeros = (0..deg).map(|_| random_disk_point(&mut rng, 0.9)).collect();
            let b = BlaschkeProduct::from_zeros(zeros).unwrap();
            let z = random_disk_point(&mut rng, 0.9);
            let m = blaschke_apply(&b, &ComplexMatrix::from_element(1, 1, z)).unwrap();
            prop_assert!((m[(0, 0)] - b.eval(z)).norm() <= 1e-12);
            let v = ComplexVector::from_element(1, c64(1.0, 0.0));
            prop_assert!((m * v).norm() <= 1.0 + 1e-8);
        }
    }
}
