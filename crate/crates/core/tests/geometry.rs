use std::f64::consts::PI;

use proptest::prelude::*;
use vlasov_core::geometry::{build_bolza, distance, DiskPoint, MoebiusElement, SurfaceModel};

fn bolza() -> SurfaceModel {
    build_bolza().unwrap()
}

fn frame(radius: f64, angle: f64, dir: f64) -> MoebiusElement {
    MoebiusElement::frame_at(DiskPoint::from_polar(radius, angle), dir).unwrap()
}

#[test]
fn relator_and_area() {
    let s = bolza();
    assert!(s.relator_residual() < 1e-9, "{}", s.relator_residual());
    let area = s.area_by_quadrature(16);
    assert!((area - 4.0 * PI).abs() < 5e-3 * 4.0 * PI, "{area}");
}

#[test]
fn domain_contains_origin_not_far_points() {
    let s = bolza();
    assert!(s.contains(DiskPoint::ORIGIN));
    assert!(!s.contains(DiskPoint::at_distance(s.circumradius() + 0.1, 0.3)));
}

proptest! {
    #[test]
    fn flow_is_a_one_parameter_group(
        r in 0.0..0.9f64, a in -PI..PI, d in -PI..PI, s in -4.0..4.0f64, t in -4.0..4.0f64,
    ) {
        let g = frame(r, a, d);
        let two = g.geodesic_advance(s).geodesic_advance(t);
        let one = g.geodesic_advance(s + t);
        prop_assert!(two.distance_to(&one) < 1e-9);
    }

    #[test]
    fn flow_has_unit_speed(r in 0.0..0.8f64, a in -PI..PI, d in -PI..PI, t in 0.0..5.0f64) {
        let g = frame(r, a, d);
        let moved = distance(g.base_point(), g.geodesic_advance(t).base_point());
        prop_assert!((moved - t).abs() < 1e-8 * (1.0 + t), "{} vs {}", moved, t);
    }

    #[test]
    fn frames_act_by_isometries(
        r in 0.0..0.9f64, a in -PI..PI, d in -PI..PI,
        z in (0.0..0.9f64, -PI..PI), w in (0.0..0.9f64, -PI..PI),
    ) {
        let g = frame(r, a, d);
        let (z, w) = (DiskPoint::from_polar(z.0, z.1), DiskPoint::from_polar(w.0, w.1));
        let before = distance(z, w);
        let after = distance(g.apply(z).unwrap(), g.apply(w).unwrap());
        prop_assert!((before - after).abs() < 1e-8 * (1.0 + before));
    }

    #[test]
    fn reduction_is_idempotent(a in -PI..PI, d in -PI..PI, t in 0.0..12.0f64) {
        let s = bolza();
        let g = frame(0.0, a, d).geodesic_advance(t);
        let (mut h, _) = s.reduce(&g).unwrap();
        prop_assert!(s.contains(h.base_point()));
        let before = h;
        prop_assert_eq!(s.reduce_frame(&mut h).unwrap(), 0);
        prop_assert_eq!(h, before);
    }

    #[test]
    fn reduction_preserves_the_quotient_point(a in -PI..PI, d in -PI..PI, t in 0.0..8.0f64) {
        // free flow then reduction agrees with reducing the flowed frame in legs
        let s = bolza();
        let g = frame(0.0, a, d);
        let (direct, _) = s.reduce(&g.geodesic_advance(t)).unwrap();
        let (mut legs, _) = s.reduce(&g.geodesic_advance(0.5 * t)).unwrap();
        legs = legs.geodesic_advance(0.5 * t);
        s.reduce_frame(&mut legs).unwrap();
        prop_assert!(direct.distance_to(&legs) < 1e-7);
    }
}
