//! Registry of named checks runnable from a scenario.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use polydisc::charfn::{
    boundary_unitarity_check, charfn_build, charfn_identity_check, projection_identity_check,
    quotient_model_check,
};
use polydisc::contraction::{mobius_tuple, tensor_tuple, validate_tuple};
use polydisc::dilation::{
    canonical_embedding, certified_degree, defect_span_completeness, defect_transfer, lambda_grid,
    norm_identity_check, power_search, verify_dilation, MAX_AUTO_DEGREE,
};
use polydisc::hardy::{
    interleaving_isometry, is_inner_on_truncation, joint_defect_projection, scalar_kernel_vector,
    shift,
};
use polydisc::linops::{c64, hermitian_sqrt, op_norm};
use polydisc::modules::{
    compression_double_commutation, jordan_structure_residual, kernel_eigen_check,
    non_principal_fixture, projector_product_formula, quotient_tensor_build,
    restriction_double_commutation, submodule_from_inner, wandering_generator_extract,
};
use polydisc::random::{
    random_contraction, random_disk_point, random_matrix, random_tensor_tuple, random_unit_vector,
    TensorShape,
};
use polydisc::{
    BlaschkeProduct, ComplexVector, ContractionTuple, HardyBasis, HardyOperator, HardyVector,
    InnerSymbol, KernelPoint, MoebiusPoint, MultiIndex, Result,
};

use crate::scenario::{Generator, Regime};

/// Numbers a check reports back to the runner.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub residual: f64,
    pub tail_bound: f64,
    pub safe_cutoff: usize,
    pub pass: bool,
}

impl Outcome {
    fn below(residual: f64, tol: f64, safe_cutoff: usize) -> Self {
        Outcome {
            residual,
            tail_bound: 0.0,
            safe_cutoff,
            pass: residual <= tol,
        }
    }
}

/// Per-check state: generator parameters, a dedicated RNG stream and the tolerance.
pub struct Context<'a> {
    pub gen: &'a Generator,
    pub rng: ChaCha8Rng,
    pub tol: f64,
}

impl Context<'_> {
    fn tuple(&mut self) -> Result<ContractionTuple> {
        let shape = TensorShape {
            max_factors: self.gen.max_factors,
            max_dim: self.gen.max_dim,
            min_norm: self.gen.min_norm,
            max_norm: self.gen.norm_cap,
        };
        random_tensor_tuple(&mut self.rng, shape)
    }

    fn point(&mut self, n: usize, radius: f64) -> Result<MoebiusPoint> {
        MoebiusPoint::new(
            (0..n)
                .map(|_| random_disk_point(&mut self.rng, radius))
                .collect(),
        )
    }

    fn norm(&mut self) -> f64 {
        self.rng.random_range(self.gen.min_norm..=self.gen.norm_cap)
    }

    /// One-variable Blaschke product with `1..=max_zeros` zeros of modulus at most `radius`.
    fn blaschke(&mut self, max_zeros: usize, radius: f64) -> Result<BlaschkeProduct> {
        let count = self.rng.random_range(1..=max_zeros);
        BlaschkeProduct::from_zeros(
            (0..count)
                .map(|_| random_disk_point(&mut self.rng, radius))
                .collect(),
        )
    }

    fn basis(&self, n: usize) -> Result<HardyBasis> {
        HardyBasis::new(n, self.gen.degree, 1)
    }
}

pub type CheckFn = fn(&mut Context) -> Result<Outcome>;

pub struct Check {
    pub name: &'static str,
    pub description: &'static str,
    /// The mathematical statement the check exercises, or "plumbing".
    pub anchor: &'static str,
    pub regime: Regime,
    pub default_tol: f64,
    pub run: CheckFn,
}

pub const REGISTRY: &[Check] = &[
    Check {
        name: "hermitian-sqrt",
        description: "square root of random positive matrices squares back",
        anchor: "plumbing",
        regime: Regime::Matrix,
        default_tol: 1e-10,
        run: hermitian_sqrt_check,
    },
    Check {
        name: "tuple-validation",
        description: "tensor-built tuples are doubly commuting strict contractions",
        anchor: "doubly commuting C.0 tuples",
        regime: Regime::Matrix,
        default_tol: 1e-10,
        run: tuple_validation,
    },
    Check {
        name: "norm-identity",
        description: "defect series at a certified degree sums to the squared norm",
        anchor: "norm identity",
        regime: Regime::Matrix,
        default_tol: 1e-7,
        run: norm_identity,
    },
    Check {
        name: "mobius-involution",
        description: "Moebius map applied twice returns the tuple and preserves the class",
        anchor: "Moebius invariance of doubly commuting C.0 tuples",
        regime: Regime::Matrix,
        default_tol: 1e-10,
        run: mobius_involution,
    },
    Check {
        name: "dilation",
        description: "canonical embedding dilates the tuple and is regular",
        anchor: "regular isometric dilation",
        regime: Regime::Matrix,
        default_tol: 1e-8,
        run: dilation,
    },
    Check {
        name: "defect-transfer",
        description: "adjoint defect norms agree directly and through the dilation",
        anchor: "defect transfer under Moebius maps",
        regime: Regime::Matrix,
        default_tol: 1e-12,
        run: defect_transfer_check,
    },
    Check {
        name: "defect-span",
        description: "defect vectors over the 25-point grid span the space",
        anchor: "defect span completeness",
        regime: Regime::Matrix,
        default_tol: 0.5,
        run: defect_span,
    },
    Check {
        name: "charfn-identity",
        description: "characteristic function kernel identity at interior pairs",
        anchor: "characteristic function identity",
        regime: Regime::Matrix,
        default_tol: 1e-10,
        run: charfn_identity,
    },
    Check {
        name: "charfn-boundary",
        description: "characteristic function is unitary on the circle",
        anchor: "boundary unitarity of the characteristic function",
        regime: Regime::Matrix,
        default_tol: 1e-8,
        run: charfn_boundary,
    },
    Check {
        name: "projection-identity",
        description: "embedded copy of H is the complement of the symbol range",
        anchor: "functional model projection identity",
        regime: Regime::Hardy,
        default_tol: 1e-6,
        run: projection_identity,
    },
    Check {
        name: "quotient-model",
        description: "embedded H equals the joint complement of symbol ranges",
        anchor: "quotient module characterization",
        regime: Regime::Hardy,
        default_tol: 1e-6,
        run: quotient_model,
    },
    Check {
        name: "kernel-calculus",
        description: "kernel reproduction and adjoint-shift eigenvectors",
        anchor: "Szego kernel calculus",
        regime: Regime::Hardy,
        default_tol: 1e-12,
        run: kernel_calculus,
    },
    Check {
        name: "interleaving-isometry",
        description: "interleaving isometries square to the shift squares",
        anchor: "doubly commuting isometries with vanishing joint defect",
        regime: Regime::Hardy,
        default_tol: 1e-12,
        run: interleaving,
    },
    Check {
        name: "joint-defect-vanishing",
        description: "joint defect of all interleaving isometries kills low-degree monomials",
        anchor: "doubly commuting isometries with vanishing joint defect",
        regime: Regime::Hardy,
        default_tol: 1e-12,
        run: joint_defect_vanishing,
    },
    Check {
        name: "power-search",
        description: "shift powers with defect lower bound (1 - tol) on probes",
        anchor: "power selection for pure isometries",
        regime: Regime::Hardy,
        default_tol: 0.1,
        run: power_search_check,
    },
    Check {
        name: "generator-extraction",
        description: "Blaschke generator recovered from its submodule",
        anchor: "Beurling-Lax generator extraction",
        regime: Regime::Hardy,
        default_tol: 1e-7,
        run: generator_extraction,
    },
    Check {
        name: "non-principal-obstruction",
        description:
            "submodule generated by z1 and z2 fails double commutation (residual at least tol)",
        anchor: "double commutation criterion for submodules",
        regime: Regime::Hardy,
        default_tol: 0.1,
        run: non_principal_obstruction,
    },
    Check {
        name: "jordan-quotient",
        description: "tensor quotient compressions doubly commute and are Jordan blocks",
        anchor: "Jordan tensor quotient modules",
        regime: Regime::Hardy,
        default_tol: 1e-10,
        run: jordan_quotient,
    },
    Check {
        name: "kernel-eigen",
        description: "kernel vectors are joint eigenvectors of Moebius-transformed symbols",
        anchor: "kernel eigenvectors of inner multipliers",
        regime: Regime::Hardy,
        default_tol: 1e-12,
        run: kernel_eigen,
    },
    Check {
        name: "product-formula",
        description: "quotient projector of a monomial matches the product formula",
        anchor: "quotient projector product formula",
        regime: Regime::Hardy,
        default_tol: 1e-10,
        run: product_formula,
    },
];

pub fn find_check(name: &str) -> Option<&'static Check> {
    REGISTRY.iter().find(|c| c.name == name)
}

fn hermitian_sqrt_check(cx: &mut Context) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for _ in 0..cx.gen.instances {
        let dim = cx.rng.random_range(1..=cx.gen.max_dim);
        let b = random_matrix(&mut cx.rng, dim, dim);
        let a = &b * b.adjoint();
        let s = hermitian_sqrt(&a, 1e-12)?;
        worst = worst.max(op_norm(&(&s * &s - &a)) / op_norm(&a).max(1.0));
    }
    Ok(Outcome::below(worst, cx.tol, 0))
}

fn tuple_validation(cx: &mut Context) -> Result<Outcome> {
    let (mut worst, mut pass) = (0.0f64, true);
    for _ in 0..cx.gen.instances {
        let r = validate_tuple(&cx.tuple()?, cx.tol)?;
        worst = worst.max(r.max_commutator).max(r.max_cross_commutator);
        pass &= r.pass;
    }
    Ok(Outcome {
        pass: pass && worst <= cx.tol,
        ..Outcome::below(worst, cx.tol, 0)
    })
}

fn norm_identity(cx: &mut Context) -> Result<Outcome> {
    let tau = cx.tol / 10.0;
    let (mut worst, mut cutoff) = (0.0f64, usize::MAX);
    for _ in 0..cx.gen.instances {
        let t = cx.tuple()?;
        let d = certified_degree(&t, tau, MAX_AUTO_DEGREE)?;
        cutoff = cutoff.min(d);
        for _ in 0..3 {
            let x = random_unit_vector(&mut cx.rng, t.space_dim());
            worst = worst.max(norm_identity_check(&t, &x, d)?.1.abs());
        }
    }
    Ok(Outcome {
        tail_bound: tau,
        ..Outcome::below(worst, cx.tol, cutoff)
    })
}

fn mobius_involution(cx: &mut Context) -> Result<Outcome> {
    let (mut worst, mut valid) = (0.0f64, true);
    for _ in 0..cx.gen.instances {
        let t = cx.tuple()?;
        let lam = cx.point(t.len(), 0.9)?;
        let once = mobius_tuple(&t, &lam)?;
        valid &= validate_tuple(&once, cx.tol)?.pass;
        let twice = mobius_tuple(&once, &lam)?;
        for (a, b) in twice.components().iter().zip(t.components()) {
            worst = worst.max(op_norm(&(a - b)));
        }
    }
    Ok(Outcome {
        pass: valid && worst <= cx.tol,
        ..Outcome::below(worst, cx.tol, 0)
    })
}

fn dilation(cx: &mut Context) -> Result<Outcome> {
    let mut out = Outcome {
        residual: 0.0,
        tail_bound: 0.0,
        safe_cutoff: usize::MAX,
        pass: true,
    };
    for _ in 0..cx.gen.instances {
        let t = cx.tuple()?;
        let d = certified_degree(&t, 1e-12, MAX_AUTO_DEGREE)?;
        let r = verify_dilation(&canonical_embedding(&t, d)?, 4, cx.tol)?;
        out.residual = out
            .residual
            .max(r.dilation_residual)
            .max(r.regularity_residual);
        out.tail_bound = out.tail_bound.max(r.tail_bound);
        out.safe_cutoff = out.safe_cutoff.min(r.safe_cutoff);
        out.pass &= r.pass;
    }
    Ok(out)
}

fn defect_transfer_check(cx: &mut Context) -> Result<Outcome> {
    let mut out = Outcome {
        residual: 0.0,
        tail_bound: 0.0,
        safe_cutoff: usize::MAX,
        pass: true,
    };
    for _ in 0..cx.gen.instances {
        let t = cx.tuple()?;
        let d = certified_degree(&t, 1e-12, MAX_AUTO_DEGREE)?;
        let model = canonical_embedding(&t, d)?;
        let x = random_unit_vector(&mut cx.rng, t.space_dim());
        let lam = cx.point(t.len(), 0.9)?;
        let r = defect_transfer(&model, &lam, &x)?;
        let gap = (r.direct - r.through_dilation).abs();
        out.pass &= gap <= r.tail_bound + cx.tol;
        out.residual = out.residual.max(gap);
        out.tail_bound = out.tail_bound.max(r.tail_bound);
        out.safe_cutoff = out.safe_cutoff.min(d);
    }
    Ok(out)
}

/// Residual is the number of instances whose defect span is not full.
fn defect_span(cx: &mut Context) -> Result<Outcome> {
    let mut missing = 0usize;
    for _ in 0..cx.gen.instances {
        let t = cx.tuple()?;
        let (_, full) = defect_span_completeness(&t, &lambda_grid(t.len()))?;
        missing += usize::from(!full);
    }
    Ok(Outcome::below(missing as f64, cx.tol, 0))
}

fn charfn_identity(cx: &mut Context) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for _ in 0..cx.gen.instances {
        let dim = cx.rng.random_range(1..=cx.gen.max_dim);
        let norm = cx.norm();
        let theta = charfn_build(&random_contraction(&mut cx.rng, dim, norm))?;
        for _ in 0..20 {
            let (a, b) = (
                random_disk_point(&mut cx.rng, 0.95),
                random_disk_point(&mut cx.rng, 0.95),
            );
            worst = worst.max(charfn_identity_check(&theta, a, b)?);
        }
    }
    Ok(Outcome::below(worst, cx.tol, 0))
}

fn charfn_boundary(cx: &mut Context) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for _ in 0..cx.gen.instances {
        let dim = cx.rng.random_range(1..=cx.gen.max_dim);
        let norm = cx.norm();
        let theta = charfn_build(&random_contraction(&mut cx.rng, dim, norm))?;
        worst = worst.max(boundary_unitarity_check(&theta, 32)?);
    }
    Ok(Outcome::below(worst, cx.tol, 0))
}

fn projection_identity(cx: &mut Context) -> Result<Outcome> {
    let norm = cx.norm();
    let t = random_contraction(&mut cx.rng, cx.gen.coeff_dim, norm);
    let r = projection_identity_check(&t, cx.gen.degree, cx.tol)?;
    Ok(Outcome {
        tail_bound: r.tail_bound,
        ..Outcome::below(r.residual, cx.tol, r.safe_cutoff)
    })
}

fn quotient_model(cx: &mut Context) -> Result<Outcome> {
    let factors: Vec<_> = (0..cx.gen.vars)
        .map(|_| {
            let norm = cx.norm();
            random_contraction(&mut cx.rng, 1, norm)
        })
        .collect();
    let r = quotient_model_check(&tensor_tuple(&factors)?, cx.gen.degree, cx.tol)?;
    Ok(Outcome {
        residual: r.distance,
        tail_bound: r.tail_bound,
        safe_cutoff: r.safe_cutoff,
        pass: r.pass,
    })
}

fn kernel_calculus(cx: &mut Context) -> Result<Outcome> {
    let basis = cx.basis(cx.gen.vars)?;
    let d = basis.max_degree();
    let rows = basis.count_up_to_degree(d.saturating_sub(1));
    let mut worst = 0.0f64;
    for _ in 0..cx.gen.instances {
        let coords: Vec<_> = (0..cx.gen.vars)
            .map(|_| random_disk_point(&mut cx.rng, 0.9))
            .collect();
        let k = scalar_kernel_vector(&KernelPoint::new(coords.clone())?, &basis)?;
        let f = HardyVector::new(basis.clone(), random_unit_vector(&mut cx.rng, basis.len()))?;
        worst = worst.max((f.inner(&k) - f.eval(&coords)[0]).norm());
        if d == 0 {
            continue;
        }
        for (j, &l) in coords.iter().enumerate() {
            let back = shift(j, &basis)?.matrix().adjoint() * k.coeffs();
            let diff = back.rows(0, rows) - k.coeffs().rows(0, rows) * l.conj();
            worst = worst.max(diff.camax());
        }
    }
    Ok(Outcome::below(worst, cx.tol, d.saturating_sub(1)))
}

fn interleaving(cx: &mut Context) -> Result<Outcome> {
    let basis = cx.basis(cx.gen.vars)?;
    let mut worst = 0.0f64;
    let mut cutoff = usize::MAX;
    for k in 0..cx.gen.vars {
        let v = interleaving_isometry(k, &basis)?;
        let v2 = v.compose(&v)?;
        let s = shift(k, &basis)?;
        let s2 = s.compose(&s)?;
        let cols = v2.safe_columns().min(s2.safe_columns());
        worst = worst.max(op_norm(
            &(v2.matrix().columns(0, cols) - s2.matrix().columns(0, cols)),
        ));
        let r = is_inner_on_truncation(&v, cx.tol);
        worst = worst.max(r.residual);
        cutoff = cutoff.min(r.safe_degree.unwrap_or(0));
    }
    Ok(Outcome::below(worst, cx.tol, cutoff))
}

fn joint_defect_vanishing(cx: &mut Context) -> Result<Outcome> {
    let n = cx.gen.vars;
    let basis = cx.basis(n)?;
    let vs = (0..n)
        .map(|k| interleaving_isometry(k, &basis))
        .collect::<Result<Vec<_>>>()?;
    let p = joint_defect_projection(&vs)?;
    let safe = p.safe_degree().unwrap_or(0);
    let mut worst = 0.0f64;
    for i in 0..basis.count_up_to_degree((n - 1).min(safe)) {
        worst = worst.max(p.matrix().column(i).norm());
    }
    Ok(Outcome::below(worst, cx.tol, safe))
}

fn power_search_check(cx: &mut Context) -> Result<Outcome> {
    let basis = cx.basis(cx.gen.vars)?;
    let shifts = (0..cx.gen.vars)
        .map(|k| shift(k, &basis))
        .collect::<Result<Vec<HardyOperator>>>()?;
    let mut probes = vec![HardyVector::monomial(&basis, &MultiIndex::zero(), 0)?];
    let low = basis.count_up_to_degree(basis.max_degree().min(3));
    for _ in 0..cx.gen.instances {
        let mut c = ComplexVector::zeros(basis.len());
        for i in 0..low {
            c[i] = c64(
                cx.rng.random_range(-1.0..=1.0),
                cx.rng.random_range(-1.0..=1.0),
            );
        }
        probes.push(HardyVector::new(basis.clone(), c)?);
    }
    let r = power_search(&shifts, &probes, cx.tol)?;
    let worst = r.lower_ratios.iter().fold(1.0f64, |m, &x| m.min(x));
    Ok(Outcome {
        residual: 1.0 - worst,
        tail_bound: 0.0,
        safe_cutoff: r.exponents.iter().copied().max().unwrap_or(0),
        pass: r.pass,
    })
}

fn generator_extraction(cx: &mut Context) -> Result<Outcome> {
    let nv = cx.gen.vars.min(2);
    let basis = cx.basis(nv)?;
    let radius = cx.gen.norm_cap.min(0.4);
    let mut out = Outcome {
        residual: 0.0,
        tail_bound: 0.0,
        safe_cutoff: usize::MAX,
        pass: true,
    };
    for _ in 0..cx.gen.instances {
        let count = cx.rng.random_range(1..=3usize);
        let mut factors = Vec::with_capacity(count);
        for _ in 0..count {
            let var = cx.rng.random_range(0..nv);
            factors.push((
                var,
                BlaschkeProduct::from_zeros(vec![random_disk_point(&mut cx.rng, radius)])?,
            ));
        }
        let s = submodule_from_inner(&InnerSymbol::blaschke(factors)?, &basis)?;
        let w = wandering_generator_extract(&s)?;
        let dev = w.deviation.unwrap_or(f64::INFINITY);
        out.residual = out.residual.max(dev);
        out.safe_cutoff = out.safe_cutoff.min(w.safe_cutoff);
        out.pass &= w.dim == 1 && dev <= cx.tol;
    }
    Ok(out)
}

fn non_principal_obstruction(cx: &mut Context) -> Result<Outcome> {
    let basis = HardyBasis::new(2, cx.gen.degree.max(2), 1)?;
    let r = restriction_double_commutation(&non_principal_fixture(&basis)?, 1e-8)?;
    Ok(Outcome {
        residual: r.cross_commutator,
        tail_bound: 0.0,
        safe_cutoff: r.safe_cutoff,
        pass: r.cross_commutator >= cx.tol,
    })
}

fn jordan_quotient(cx: &mut Context) -> Result<Outcome> {
    let mut out = Outcome {
        residual: 0.0,
        tail_bound: 0.0,
        safe_cutoff: 0,
        pass: true,
    };
    for _ in 0..cx.gen.instances {
        let list = (0..cx.gen.vars)
            .map(|_| cx.blaschke(2, 0.2))
            .collect::<Result<Vec<_>>>()?;
        let q = quotient_tensor_build(&list, &cx.basis(cx.gen.vars)?)?;
        let r = compression_double_commutation(&q, cx.tol)?;
        out.residual = out.residual.max(r.cross_commutator).max(r.commutator);
        for k in 0..cx.gen.vars {
            out.residual = out.residual.max(jordan_structure_residual(&q, k)?);
        }
        out.safe_cutoff = r.safe_cutoff;
    }
    out.pass = out.residual <= cx.tol;
    Ok(out)
}

fn kernel_eigen(cx: &mut Context) -> Result<Outcome> {
    let basis = cx.basis(cx.gen.vars)?;
    let mut out = Outcome {
        residual: 0.0,
        tail_bound: 0.0,
        safe_cutoff: basis.max_degree(),
        pass: true,
    };
    for _ in 0..cx.gen.instances {
        let symbols = (0..cx.gen.vars)
            .map(|_| cx.blaschke(2, 0.5))
            .collect::<Result<Vec<_>>>()?;
        let coords = (0..cx.gen.vars)
            .map(|_| random_disk_point(&mut cx.rng, 0.5))
            .collect();
        let r = kernel_eigen_check(&symbols, &KernelPoint::new(coords)?, &basis)?;
        out.residual = out.residual.max(r.residual);
        out.tail_bound = out.tail_bound.max(r.tail_bound);
        out.pass &= r.residual <= r.tail_bound + cx.tol;
    }
    Ok(out)
}

fn product_formula(cx: &mut Context) -> Result<Outcome> {
    let basis = cx.basis(cx.gen.vars)?;
    let mut worst = 0.0f64;
    for _ in 0..cx.gen.instances {
        let r = cx.rng.random_range(1..=cx.gen.vars);
        let list = (0..r)
            .map(|_| cx.blaschke(2, 0.5))
            .collect::<Result<Vec<_>>>()?;
        let alpha: Vec<u32> = (0..cx.gen.vars)
            .map(|_| cx.rng.random_range(0..=2))
            .collect();
        let rep = projector_product_formula(&list, &MultiIndex::new(alpha), &basis)?;
        worst = worst.max(rep.distance);
    }
    Ok(Outcome::below(worst, cx.tol, basis.max_degree()))
}
