use std::f64::consts::PI;

use proptest::prelude::*;
use vlasov_core::exec::Serial;
use vlasov_core::geometry::{build_bolza, DiskPoint, SurfaceModel};
use vlasov_core::kinetics::{
    free_advance, kick, uniform_frame, Ensemble, InitialData, InitialDataSpec, Particle,
    SpeedProfile, Stepper, DEFAULT_R_FLOOR,
};
use vlasov_core::observables::{uniform_edges, RadialBins};
use vlasov_core::phase::BumpParams;
use vlasov_core::potential::{KernelSpec, MeanField, PotentialField};
use vlasov_core::rng;

fn bolza() -> SurfaceModel {
    build_bolza().unwrap()
}

fn beam(mass: f64) -> InitialDataSpec {
    let mut spec = InitialDataSpec::uniform((0.7, 1.0 / 0.7), SpeedProfile::Smooth);
    spec.bumps.push(BumpParams {
        center: DiskPoint::ORIGIN,
        direction: 0.0,
        spatial_width: Some(0.5),
        angular_width: Some(0.5),
        amplitude: 4.0,
    });
    spec.normalization = Some(mass);
    spec
}

fn sample(s: &SurfaceModel, spec: &InitialDataSpec, n: usize, seed: u64) -> Ensemble {
    InitialData::new(spec, s)
        .unwrap()
        .sample(s, n, seed, &Serial)
        .unwrap()
}

/// Largest frame distance plus speed difference between matching particles.
fn deviation(a: &Ensemble, b: &Ensemble) -> f64 {
    a.particles()
        .iter()
        .zip(b.particles())
        .map(|(p, q)| p.frame().distance_to(q.frame()) + (p.r() - q.r()).abs())
        .fold(0.0, f64::max)
}

fn run(s: &SurfaceModel, e: &Ensemble, kernel: KernelSpec, dt: f64, steps: usize) -> Ensemble {
    let mut e = e.clone();
    let mut st = Stepper::new(MeanField::new(s, kernel), DEFAULT_R_FLOOR);
    for _ in 0..steps {
        st.step(&mut e, s, dt, &Serial).unwrap();
    }
    e
}

#[test]
fn mass_is_exactly_conserved() {
    let s = bolza();
    let e0 = sample(&s, &beam(0.2), 400, 1);
    let e = run(&s, &e0, KernelSpec::default_bump(1.0, &s).unwrap(), 0.1, 20);
    assert_eq!(e.current_mass().to_bits(), e0.current_mass().to_bits());
}

#[test]
fn free_flow_keeps_radial_pairings_bit_constant() {
    let s = bolza();
    let mut e = sample(&s, &beam(1.0), 2000, 2);
    let bins = RadialBins::new(uniform_edges(0.7, 1.0 / 0.7, 5), 0.05).unwrap();
    let before = bins.pairings(&e);
    for _ in 0..10 {
        free_advance(&mut e, &s, 0.73, &Serial).unwrap();
    }
    assert_eq!(bins.pairings(&e), before);
}

/// Kick-drift-kick in a fixed external field; returns the largest deviation
/// of `Σ w (r²/2 + Φ)` from its initial value.
fn frozen_energy_drift(
    s: &SurfaceModel,
    field: &PotentialField,
    e0: &Ensemble,
    dt: f64,
    t_end: f64,
) -> f64 {
    let energy = |e: &Ensemble| -> f64 {
        e.particles()
            .iter()
            .map(|p| p.w() * (0.5 * p.r() * p.r() + field.evaluate_phi(p.position())))
            .sum()
    };
    let mut e = e0.clone();
    let h0 = energy(&e);
    let steps = (t_end / dt).round() as usize;
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        kick(&mut e, field, 0.5 * dt, DEFAULT_R_FLOOR, &Serial).unwrap();
        free_advance(&mut e, s, dt, &Serial).unwrap();
        kick(&mut e, field, 0.5 * dt, DEFAULT_R_FLOOR, &Serial).unwrap();
        worst = worst.max((energy(&e) - h0).abs());
    }
    worst
}

#[test]
fn frozen_field_energy_error_is_second_order() {
    let s = bolza();
    let background = sample(&s, &beam(1.0), 200, 3);
    let field = MeanField::new(&s, KernelSpec::default_bump(0.5, &s).unwrap())
        .build(&background.sources(), &Serial);
    let e0 = sample(&s, &beam(1.0), 10, 4);
    let coarse = frozen_energy_drift(&s, &field, &e0, 0.1, 20.0);
    let fine = frozen_energy_drift(&s, &field, &e0, 0.05, 20.0);
    let ratio = coarse / fine;
    assert!(
        (2.5..=6.0).contains(&ratio),
        "drift {coarse:e} -> {fine:e}, ratio {ratio}"
    );
}

#[test]
fn self_consistent_step_is_second_order() {
    let s = bolza();
    let e0 = sample(&s, &beam(0.3), 200, 5);
    let k = KernelSpec::default_bump(1.0, &s).unwrap();
    let a = run(&s, &e0, k, 0.1, 20);
    let b = run(&s, &e0, k, 0.05, 40);
    let c = run(&s, &e0, k, 0.025, 80);
    let ratio = deviation(&a, &b) / deviation(&b, &c);
    assert!((3.0..=5.5).contains(&ratio), "Richardson ratio {ratio}");
}

#[test]
fn stepping_is_time_reversible() {
    let s = bolza();
    let e0 = sample(&s, &beam(0.3), 100, 6);
    let k = KernelSpec::default_bump(1.0, &s).unwrap();
    let flip = |e: &Ensemble| {
        let ps = e
            .particles()
            .iter()
            .map(|p| Particle::new(p.frame().rotate_direction(PI), p.r(), p.w()).unwrap())
            .collect();
        Ensemble::new(ps, e.seed())
    };
    let there = run(&s, &e0, k, 0.1, 30);
    let back = flip(&run(&s, &flip(&there), k, 0.1, 30));
    assert!(deviation(&back, &e0) < 1e-8, "{}", deviation(&back, &e0));
}

#[test]
fn halving_speeds_doubles_the_time_scale() {
    let s = bolza();
    let spec = InitialDataSpec::uniform((0.25, 2.0), SpeedProfile::Flat);
    let mut fast = sample(&s, &spec, 500, 7);
    let mut slow = fast.with_scaled_speeds(0.5).unwrap();
    free_advance(&mut fast, &s, 3.0, &Serial).unwrap();
    free_advance(&mut slow, &s, 6.0, &Serial).unwrap();
    for (p, q) in fast.particles().iter().zip(slow.particles()) {
        assert_eq!(p.frame(), q.frame());
    }
}

#[test]
fn sampled_speeds_follow_the_liouville_density() {
    // flat h on (lo, hi) against r dr: E[r²] = (lo² + hi²)/2
    let s = bolza();
    let (lo, hi) = (0.5, 2.0);
    let init =
        InitialData::new(&InitialDataSpec::uniform((lo, hi), SpeedProfile::Flat), &s).unwrap();
    let e = init.sample(&s, 20000, 8, &Serial).unwrap();
    let r2: Vec<f64> = e.particles().iter().map(|p| p.r() * p.r()).collect();
    let m = r2.len() as f64;
    let mean = r2.iter().sum::<f64>() / m;
    let var = r2.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m;
    assert!((mean - 0.5 * (lo * lo + hi * hi)).abs() < 4.0 * (var / m).sqrt());
    assert!((e.total_mass() - init.total_mass()).abs() < 1e-12 * init.total_mass());
    assert!(e.particles().iter().all(|p| s.contains(p.position())));
}

#[test]
fn sampling_is_a_pure_function_of_the_seed() {
    let s = bolza();
    let a = sample(&s, &beam(1.0), 300, 9);
    let b = sample(&s, &beam(1.0), 300, 9);
    let c = sample(&s, &beam(1.0), 300, 10);
    assert_eq!(a, b);
    assert_ne!(a, c);
    // particle i depends only on its own stream
    let short = sample(&s, &beam(1.0), 100, 9);
    assert_eq!(
        short.particles()[..50]
            .iter()
            .map(|p| p.r())
            .collect::<Vec<_>>(),
        a.particles()[..50]
            .iter()
            .map(|p| p.r())
            .collect::<Vec<_>>()
    );
}

proptest! {
    #[test]
    fn drift_then_reverse_drift_is_identity(seed in 0u64..10_000, r in 0.1..3.0f64, length in 0.0..15.0f64) {
        // round-off grows at most like e^{r t}, the expansion rate of the flow
        let t = length / r;
        let s = bolza();
        let g = uniform_frame(&s, s.circumradius(), &mut rng::stream(seed, 0)).unwrap();
        let mut p = Particle::new(g, r, 1.0).unwrap();
        p.drift(&s, t).unwrap();
        p.drift(&s, -t).unwrap();
        prop_assert!(p.frame().distance_to(&g) < 1e-13 * length.exp().max(10.0));
    }
}
