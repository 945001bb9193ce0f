//! Criterion benchmarks for the dense kernels behind the checks.

use std::hint::black_box;

use criterion::{BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use polydisc::charfn::{charfn_build, charfn_eval};
use polydisc::dilation::{
    canonical_embedding, certified_degree, norm_identity_check, MAX_AUTO_DEGREE,
};
use polydisc::hardy::{interleaving_isometry, scalar_kernel_vector};
use polydisc::linops::{c64, hermitian_sqrt};
use polydisc::modules::{
    quotient_tensor_build, restriction_double_commutation, submodule_from_inner,
};
use polydisc::random::{
    random_contraction, random_matrix, random_tensor_tuple, random_unit_vector, TensorShape,
};
use polydisc::{BlaschkeProduct, ContractionTuple, HardyBasis, InnerSymbol, KernelPoint};

const SHAPE: TensorShape = TensorShape {
    max_factors: 3,
    max_dim: 4,
    min_norm: 0.6,
    max_norm: 0.8,
};

fn tuple(seed: u64) -> ContractionTuple {
    random_tensor_tuple(&mut ChaCha8Rng::seed_from_u64(seed), SHAPE).unwrap()
}

pub fn linops(c: &mut Criterion) {
    let mut g = c.benchmark_group("hermitian_sqrt");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for dim in [4usize, 16, 64] {
        let b = random_matrix(&mut rng, dim, dim);
        let a = &b * b.adjoint();
        g.bench_with_input(BenchmarkId::from_parameter(dim), &a, |bench, a| {
            bench.iter(|| hermitian_sqrt(black_box(a), 1e-12).unwrap())
        });
    }
    g.finish();
}

pub fn dilation(c: &mut Criterion) {
    let t = tuple(7);
    let d = certified_degree(&t, 1e-9, MAX_AUTO_DEGREE).unwrap();
    let x = random_unit_vector(&mut ChaCha8Rng::seed_from_u64(8), t.space_dim());
    c.bench_function("norm_identity_check", |b| {
        b.iter(|| norm_identity_check(black_box(&t), &x, d).unwrap())
    });
    c.bench_function("canonical_embedding/d=12", |b| {
        b.iter(|| canonical_embedding(black_box(&t), 12).unwrap())
    });
}

pub fn charfn(c: &mut Criterion) {
    let t = random_contraction(&mut ChaCha8Rng::seed_from_u64(3), 4, 0.8);
    let theta = charfn_build(&t).unwrap();
    c.bench_function("charfn_eval/dim=4", |b| {
        b.iter(|| charfn_eval(&theta, black_box(c64(0.3, -0.4))).unwrap())
    });
}

pub fn hardy(c: &mut Criterion) {
    let mut g = c.benchmark_group("hardy");
    for (n, d) in [(2usize, 20usize), (3, 10), (4, 6)] {
        let basis = HardyBasis::new(n, d, 1).unwrap();
        let lam = KernelPoint::new(vec![c64(0.3, 0.2); n]).unwrap();
        g.bench_with_input(
            BenchmarkId::new("kernel_vector", format!("n{n}d{d}")),
            &basis,
            |b, basis| b.iter(|| scalar_kernel_vector(&lam, basis).unwrap()),
        );
        g.bench_with_input(
            BenchmarkId::new("interleaving_isometry", format!("n{n}d{d}")),
            &basis,
            |b, basis| b.iter(|| interleaving_isometry(0, basis).unwrap()),
        );
    }
    g.finish();
}

pub fn modules(c: &mut Criterion) {
    let mut g = c.benchmark_group("modules");
    g.sample_size(10);
    let basis = HardyBasis::new(2, 16, 1).unwrap();
    let phi = BlaschkeProduct::from_zeros(vec![c64(0.3, 0.1)]).unwrap();
    let sym = InnerSymbol::blaschke(vec![(0, phi.clone()), (1, phi.clone())]).unwrap();
    g.bench_function("submodule_from_inner/n2d16", |b| {
        b.iter(|| submodule_from_inner(&sym, &basis).unwrap())
    });
    let s = submodule_from_inner(&sym, &basis).unwrap();
    g.bench_function("restriction_double_commutation/n2d16", |b| {
        b.iter(|| restriction_double_commutation(&s, 1e-6).unwrap())
    });
    let z2 = BlaschkeProduct::from_zeros(vec![c64(0.0, 0.0); 2]).unwrap();
    g.bench_function("quotient_tensor_build/n2d16", |b| {
        b.iter(|| quotient_tensor_build(&[z2.clone(), phi.clone()], &basis).unwrap())
    });
    g.finish();
}
