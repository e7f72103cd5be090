use convexinfo::bounds::DeviationProfile;
use convexinfo::measures::{ConvexParams, Family, ParetoFamily, StudentFamily};
use convexinfo::montecarlo::{default_alpha_grid, default_t_grid, information_stats};
use criterion::{criterion_group, criterion_main, Criterion, Throughput};

const COUNT: usize = 200_000;

fn stats(c: &mut Criterion) {
    let families = [
        Family::Pareto(ParetoFamily::new(ConvexParams::new(2, 6.0).unwrap(), 1.0).unwrap()),
        Family::Student(StudentFamily::new(ConvexParams::new(2, 4.0).unwrap())),
    ];
    let mut group = c.benchmark_group("information_stats");
    group.sample_size(10);
    group.throughput(Throughput::Elements(COUNT as u64));
    for fam in &families {
        let profile = DeviationProfile::from(fam.concavity());
        let (t, a) = (default_t_grid(&profile), default_alpha_grid(&profile));
        for workers in [1, 0] {
            let id = format!(
                "{} workers={}",
                fam.name(),
                if workers == 0 {
                    "all".into()
                } else {
                    workers.to_string()
                }
            );
            group.bench_function(id, |b| {
                b.iter(|| information_stats(fam, 1, COUNT, &t, &a, workers).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, stats);
criterion_main!(benches);
