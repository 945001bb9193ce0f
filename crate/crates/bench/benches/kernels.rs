use criterion::{criterion_group, criterion_main};

criterion_group!(
    benches,
    polydisc_bench::linops,
    polydisc_bench::dilation,
    polydisc_bench::charfn,
    polydisc_bench::hardy,
    polydisc_bench::modules
);
criterion_main!(benches);
