use calogero::classical::{Trajectory, TrajectoryInit};
use calogero::quad::{inner_product, Envelope, Integrator, Method, QuadratureSpec};
use calogero::specfun::{hermite, laguerre};
use calogero::wavefn::{CoherentState, DressingNorm, EigenState};
use calogero::{Label, ModelSpec, Schedule, Variant};
use criterion::{black_box, criterion_group, criterion_main, Criterion};
use std::f64::consts::PI;

fn squeezed() -> Trajectory {
    Trajectory::explicit(
        Schedule::constant(1.0, PI).unwrap(),
        TrajectoryInit::Explicit {
            u0: 1.0,
            udot0: 0.0,
            v0: 0.0,
            vdot0: 2.0,
            uf0: 0.0,
            ufdot0: 0.0,
        },
        2048,
        1,
    )
    .unwrap()
}

fn bench_specfun(c: &mut Criterion) {
    c.bench_function("hermite_deg16", |b| {
        b.iter(|| hermite(black_box(16), black_box(0.73)).unwrap())
    });
    c.bench_function("laguerre_deg16", |b| {
        b.iter(|| laguerre(black_box(16), black_box(6.0), black_box(2.1)).unwrap())
    });
}

fn bench_states(c: &mut Criterion) {
    let spec = ModelSpec::new(Variant::A, 3, 2.0, None, 1.0).unwrap();
    let eig = EigenState::new(&spec, Label::A { m: 2, n: 2, k: 0 }, None).unwrap();
    let x = [-0.9, 0.1, 1.2];
    c.bench_function("eigenstate_eval_n3", |b| {
        b.iter(|| eig.eval(black_box(&x)).unwrap())
    });

    let traj = squeezed();
    let coh = CoherentState::new(&spec, Label::A { m: 2, n: 2, k: 0 }, &traj, None, DressingNorm::SqrtOmega)
        .unwrap();
    let frame = traj.frame(0.9).unwrap();
    c.bench_function("coherent_eval_n3", |b| {
        b.iter(|| coh.eval_at(black_box(&frame), black_box(&x)).unwrap())
    });
}

fn bench_classical(c: &mut Criterion) {
    let schedule = Schedule::parse("1", "1.21 + 0.1*cos(2*t)", PI).unwrap();
    c.bench_function("floquet_trajectory_2048", |b| {
        b.iter(|| Trajectory::floquet(black_box(schedule.clone()), 2048, 1).unwrap())
    });
}

fn bench_quadrature(c: &mut Criterion) {
    let spec = ModelSpec::new(Variant::A, 2, 1.0, None, 1.0).unwrap();
    let traj = squeezed();
    let frame = traj.frame(0.4).unwrap();
    let st = CoherentState::new(&spec, Label::A { m: 1, n: 0, k: 0 }, &traj, None, DressingNorm::SqrtOmega)
        .unwrap();
    let env = Envelope::on_trajectory(1.0, st.energy(), &traj, &frame);
    let tensor = QuadratureSpec {
        method: Method::Tensor,
        points_per_dim: 32,
        samples: 20_000,
        seed: 7,
        eps_guard: 1e-6,
        fd_step_x: None,
        fd_step_t: None,
        time_intervals: None,
        strict: false,
    };
    let mc = QuadratureSpec {
        method: Method::MonteCarlo,
        ..tensor.clone()
    };
    c.bench_function("overlap_tensor_32x32", |b| {
        b.iter(|| {
            let integrator = Integrator::new(&spec, &tensor, env).unwrap();
            inner_product(
                &integrator,
                &|x: &[f64]| st.eval_at(&frame, x),
                &|x: &[f64]| st.eval_at(&frame, x),
            )
            .unwrap()
        })
    });
    c.bench_function("overlap_montecarlo_20k", |b| {
        b.iter(|| {
            let integrator = Integrator::new(&spec, &mc, env).unwrap();
            inner_product(
                &integrator,
                &|x: &[f64]| st.eval_at(&frame, x),
                &|x: &[f64]| st.eval_at(&frame, x),
            )
            .unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_specfun,
    bench_states,
    bench_classical,
    bench_quadrature
);
criterion_main!(benches);
