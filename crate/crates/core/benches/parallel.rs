use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dirconf::data::{generate_synthetic, split, SplitSpec, SyntheticSpec};
use dirconf::evidential::{total_loss_with_grad, DirichletParams, KlVariant, OneHotTarget};
use dirconf::methods::{train_mcdp, MethodConfig, MethodKind, TrainConfig};
use dirconf::network::{build_specs, Activation, Mlp, Mode};
use dirconf::numeric::{sample_dirichlet, SeededStream};
use dirconf::par;

fn bayes_risk_mc(c: &mut Criterion) {
    let alpha = DirichletParams::new(vec![2.0, 5.0, 0.7]).unwrap();
    let cases: Vec<u64> = (0..32).collect();
    let job = |&case: &u64| {
        let mut rng = SeededStream::new(1, case);
        (0..5_000)
            .map(|_| {
                let pi = sample_dirichlet(&alpha, &mut rng).unwrap();
                (1.0 - pi.as_slice()[1]).powi(2)
                    + pi.as_slice()[0].powi(2)
                    + pi.as_slice()[2].powi(2)
            })
            .sum::<f64>()
    };
    let mut group = c.benchmark_group("bayes_risk_monte_carlo");
    group.bench_function("sequential", |b| {
        b.iter(|| black_box(par::map_seq(&cases, job)))
    });
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(par::map_par(&cases, job)))
    });
    group.finish();
}

fn batch_gradient(c: &mut Criterion) {
    let mut net = Mlp::new(build_specs(
        16,
        &[128, 128],
        2,
        Activation::Exponential,
        0.0,
    ))
    .unwrap();
    net.init(&mut SeededStream::new(3, 0));
    let mut rng = SeededStream::new(4, 0);
    let batch: Vec<(Vec<f64>, usize)> = (0..64)
        .map(|i| ((0..16).map(|_| rng.standard_normal()).collect(), i % 2))
        .collect();
    let job = |(x, y): &(Vec<f64>, usize)| {
        let (out, tape) = net
            .forward(x, Mode::Train, &mut SeededStream::new(0, 0))
            .unwrap();
        let alpha = DirichletParams::new(out).unwrap();
        let target = OneHotTarget::new(*y, 2).unwrap();
        let (_, g) = total_loss_with_grad(&alpha, &target, 0.5, KlVariant::Mean).unwrap();
        net.backward(&tape, &g).unwrap()
    };
    let mut group = c.benchmark_group("evidential_batch_gradient");
    group.bench_function("sequential", |b| {
        b.iter(|| black_box(par::map_seq(&batch, job)))
    });
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(par::map_par(&batch, job)))
    });
    group.finish();
}

fn mcdp_prediction(c: &mut Criterion) {
    let full = generate_synthetic(&SyntheticSpec {
        per_class: vec![60, 60],
        ..SyntheticSpec::default()
    })
    .unwrap();
    let (tr, va, te) = split(&full.examples, &SplitSpec::default()).unwrap();
    let tcfg = TrainConfig {
        epochs: 2,
        ..TrainConfig::default()
    };
    let model = train_mcdp(
        &full.with_examples(tr),
        &full.with_examples(va),
        &MethodConfig::new(MethodKind::Mcdp, 1),
        &tcfg,
    )
    .unwrap();
    let mut group = c.benchmark_group("mcdp_prediction");
    group.sample_size(10);
    for samples in [10usize, 50] {
        let m = model.with_test_samples(samples);
        group.bench_with_input(BenchmarkId::new("sequential", samples), &te, |b, te| {
            b.iter(|| black_box(m.predict_all_seq(te).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("parallel", samples), &te, |b, te| {
            b.iter(|| black_box(m.predict_all(te).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bayes_risk_mc, batch_gradient, mcdp_prediction);
criterion_main!(benches);
