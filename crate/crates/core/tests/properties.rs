mod common;

use std::f64::consts::TAU;

use horocusp::geodesic::{intrinsic_distance, DistanceOptions};
use horocusp::halfspace::{horo_to_upper, hyp_distance, HPoint};
use horocusp::harness::{bilip_constants, busemann_feller_check, Rect};
use horocusp::horoconvex::{is_horoconvex, midpoint_slack, Builtin, HoroconvexityOptions, PeriodicFunction};
use horocusp::lattice::Lattice;
use horocusp::planar::{LinearMap, Vec2};
use horocusp::polyhedral::{cone_metric, triangle_angles, TorusTriangulation};
use horocusp::quotient::quotient_distance;
use proptest::prelude::*;

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig { cases: n, ..ProptestConfig::default() }
}

fn vec2(r: f64) -> impl Strategy<Value = Vec2> {
    (-r..r, -r..r).prop_map(|(x, y)| Vec2::new(x, y))
}

fn hpoint() -> impl Strategy<Value = HPoint> {
    (vec2(5.0), 0.05..5.0f64).prop_map(|(x, s)| HPoint::new(x, s).unwrap())
}

fn lattice() -> impl Strategy<Value = Lattice> {
    (0.5..2.0f64, -0.9..0.9f64, 0.5..2.0f64)
        .prop_map(|(a, shear, b)| Lattice::new(Vec2::new(a, 0.0), Vec2::new(shear, b)).unwrap())
}

fn dyadic() -> impl Strategy<Value = f64> {
    (-4096i64..4096).prop_map(|k| k as f64 / 1024.0)
}

fn cos20_small() -> PeriodicFunction {
    common::cos20(32)
}

proptest! {
    #![proptest_config(cases(256))]

    #[test]
    fn hyp_distance_is_a_metric(p in hpoint(), q in hpoint(), r in hpoint()) {
        let pq = hyp_distance(&p, &q);
        prop_assert_eq!(pq, hyp_distance(&q, &p));
        prop_assert_eq!(hyp_distance(&p, &p), 0.0);
        prop_assert!(pq >= 0.0);
        let via = hyp_distance(&p, &r) + hyp_distance(&r, &q);
        prop_assert!(pq <= via + 1e-12 * (1.0 + via));
    }

    #[test]
    fn hyp_distance_grows_with_horizontal_offset(x in vec2(3.0), d in 0.0..3.0f64, extra in 0.0..3.0f64, s in 0.05..5.0f64) {
        let p = HPoint::new(x, s).unwrap();
        let near = HPoint::new(x + Vec2::new(d, 0.0), s).unwrap();
        let far = HPoint::new(x + Vec2::new(d + extra, 0.0), s).unwrap();
        prop_assert!(hyp_distance(&p, &near) <= hyp_distance(&p, &far));
    }

    #[test]
    fn hyp_distance_shrinks_with_common_height(x in vec2(3.0), y in vec2(3.0), s in 0.05..2.0f64, f in 1.0..4.0f64) {
        let low = hyp_distance(&HPoint::new(x, s).unwrap(), &HPoint::new(y, s).unwrap());
        let high = hyp_distance(&HPoint::new(x, s * f).unwrap(), &HPoint::new(y, s * f).unwrap());
        prop_assert!(high <= low * (1.0 + 1e-14) + 1e-15);
    }

    #[test]
    fn horosphere_round_trip(x in vec2(5.0), t in -3.0..3.0f64) {
        let p = horo_to_upper(x, t);
        prop_assert!((p.t() - t).abs() <= 1e-14 * (1.0 + t.abs()));
    }

    #[test]
    fn reduce_coords_is_translation_equivariant(a in dyadic(), b in dyadic(), k in -5i64..5, l in -5i64..5) {
        let (f, n) = Lattice::reduce_coords([a, b]);
        let (g, m) = Lattice::reduce_coords([a + k as f64, b + l as f64]);
        prop_assert_eq!(f, g);
        prop_assert_eq!([m[0] - n[0], m[1] - n[1]], [k, l]);
        prop_assert!((0.0..1.0).contains(&f[0]) && (0.0..1.0).contains(&f[1]));
    }

    #[test]
    fn reduce_lands_in_the_fundamental_domain(lat in lattice(), x in vec2(20.0), k in -5i64..5, l in -5i64..5) {
        let r = lat.reduce(x);
        prop_assert!(r.coords.iter().all(|c| (0.0..1.0).contains(c)));
        let shifted = lat.reduce(x + lat.translate([k, l]));
        prop_assert!((shifted.representative - r.representative).norm() <= 1e-9 * (1.0 + x.norm()));
    }

    #[test]
    fn translates_within_is_monotone(lat in lattice(), r in 0.0..4.0f64, extra in 0.0..2.0f64) {
        let small = lat.translates_within(r);
        let large = lat.translates_within(r + extra);
        prop_assert!(small.iter().all(|t| large.contains(t)));
        prop_assert!(small.iter().all(|t| t.vector.norm() <= r + 1e-12));
    }

    #[test]
    fn cell_area_scales_by_determinant(lat in lattice(), m in prop::array::uniform4(-2.0..2.0f64)) {
        let map = LinearMap([[m[0], m[1]], [m[2], m[3]]]);
        prop_assume!(map.det().abs() > 0.1);
        let image = lat.mapped(&map).unwrap();
        let expected = map.det().abs() * lat.cell_area();
        prop_assert!((image.cell_area() - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn morphism_is_equivariant(l1 in lattice(), l2 in lattice(), k in -3i64..=3, l in -3i64..=3) {
        let phi = l1.morphism_to(&l2);
        let image = phi.apply(l1.translate([k, l]));
        prop_assert!((image - l2.translate([k, l])).norm() <= 1e-12 * (1.0 + image.norm()));
    }
}

proptest! {
    #![proptest_config(cases(128))]

    #[test]
    fn periodicity_is_exact_on_dyadic_points(a in dyadic(), b in dyadic(), k in -4i64..4, l in -4i64..4, side in prop::sample::select(vec![1.0, 2.0, 0.5])) {
        let lat = Lattice::square(side).unwrap();
        let u = Builtin::Random { seed: 9, amplitude: 0.002, max_frequency: 2, lattice: lat, resolution: [16, 16], offset: 0.0 }
            .build()
            .unwrap();
        let x = lat.point(a, b);
        prop_assert_eq!(u.eval(x), u.eval(x + lat.translate([k, l])));
    }

    #[test]
    fn support_inequality_on_the_corpus(which in 0usize..8, x in vec2(8.0), y in vec2(8.0)) {
        let (_, u) = &common::corpus()[which];
        let g = u.support_gradient(x).gradient;
        let fy = u.f_value(y);
        let rhs = u.f_value(x) + (g + x).dot(y - x) * 2.0;
        prop_assert!(fy >= rhs - 1e-9 * (1.0 + fy.abs()), "F(y) = {fy}, support = {rhs}");
    }

    #[test]
    fn triangle_angles_grow_with_the_opposite_side(l2 in 0.2..2.0f64, l3 in 0.2..2.0f64, t in 0.01..0.98f64, dt in 0.001..0.01f64) {
        let lo = (l2 - l3).abs();
        let hi = l2 + l3;
        let l1 = lo + t * (hi - lo);
        let l1b = (l1 + dt * (hi - lo)).min(hi - 1e-9);
        prop_assume!(l1b > l1);
        let a = triangle_angles(l1, l2, l3).unwrap();
        let b = triangle_angles(l1b, l2, l3).unwrap();
        prop_assert!(b[0] > a[0]);
        prop_assert!(a[0] + a[1] + a[2] < std::f64::consts::PI);
    }

    #[test]
    fn gauss_bonnet_on_random_grid_triangulations(k in 2usize..6, seed in 0u64..1000) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let t = TorusTriangulation::grid(k, |kind, _, _| {
            let base = if kind == 2 { std::f64::consts::SQRT_2 } else { 1.0 };
            base * rng.gen_range(0.9..1.1) * 0.5
        });
        prop_assume!(t.is_ok());
        let c = cone_metric(&t.unwrap()).unwrap();
        prop_assert!(c.satisfies_gauss_bonnet(), "slack {}", c.gauss_bonnet_slack);
        prop_assert!((c.total_curvature() - c.area).abs() <= 1e-9 * (1.0 + c.area));
    }
}

proptest! {
    #![proptest_config(cases(16))]

    #[test]
    fn horoconvexity_survives_adding_a_constant(eps in prop::sample::select(vec![0.1, 1.0, 10.0])) {
        let u = cos20_small();
        prop_assert!(is_horoconvex(&u, &HoroconvexityOptions::default()).passed);
        prop_assert!(is_horoconvex(&u.add_constant(eps), &HoroconvexityOptions::default()).passed);
    }

    #[test]
    fn failing_checks_carry_a_genuine_witness(amp in 0.5..1.0f64) {
        let u = Builtin::Cosine { amplitude: amp, lattice: Lattice::square(TAU).unwrap(), resolution: [32, 32], offset: 0.0 }
            .build()
            .unwrap();
        let r = is_horoconvex(&u, &HoroconvexityOptions::default());
        prop_assert!(!r.passed);
        let [p, m, q] = r.witness.unwrap();
        prop_assert!(((p + q) * 0.5 - m).norm() <= 1e-9 * (1.0 + p.norm() + q.norm()));
        prop_assert!(midpoint_slack(&u, p, q) < 0.0);
    }
}

fn point_in(u: &PeriodicFunction, a: f64, b: f64) -> Vec2 {
    u.lattice().point(a, b)
}

proptest! {
    #![proptest_config(cases(24))]

    #[test]
    fn distance_is_bracketed_symmetric_and_translation_invariant(
        which in 0usize..8, a in prop::array::uniform4(0.0..1.0f64), k in -2i64..=2, l in -2i64..=2,
    ) {
        let (_, u) = &common::corpus()[which];
        let opts = common::opts_for(u);
        let x = point_in(u, a[0], a[1]);
        let y = point_in(u, a[2], a[3]);
        let r = intrinsic_distance(u, x, y, &opts).unwrap();
        prop_assert!(r.lower_bound <= r.value);
        prop_assert!(r.value <= r.straight_value);

        let back = intrinsic_distance(u, y, x, &opts).unwrap();
        prop_assert!((back.value - r.value).abs() <= 2.0 * opts.quad_tol * r.value);

        let g = u.lattice().translate([k, l]);
        let moved = intrinsic_distance(u, x + g, y + g, &opts).unwrap();
        prop_assert!((moved.value - r.value).abs() <= 1e-9 * (1.0 + r.value), "{} vs {}", moved.value, r.value);
    }

    #[test]
    fn distance_obeys_the_triangle_inequality(which in 0usize..8, a in prop::array::uniform6(0.0..1.0f64)) {
        let (_, u) = &common::corpus()[which];
        let opts = common::opts_for(u);
        let x = point_in(u, a[0], a[1]);
        let y = point_in(u, a[2], a[3]);
        let z = point_in(u, a[4], a[5]);
        let d = |p, q| intrinsic_distance(u, p, q, &opts).unwrap().value;
        let xz = d(x, z);
        prop_assert!(xz <= d(x, y) + d(y, z) + 2.0 * opts.tol_num(xz));
    }

    #[test]
    fn quotient_distance_never_exceeds_the_lift(which in 0usize..8, a in prop::array::uniform4(0.0..1.0f64), k in -1i64..=1, l in -1i64..=1) {
        let (_, u) = &common::corpus()[which];
        let opts = common::opts_for(u);
        let x = point_in(u, a[0], a[1]);
        let y = point_in(u, a[2], a[3]) + u.lattice().translate([k, l]);
        let lift = intrinsic_distance(u, x, y, &opts).unwrap().value;
        let q = quotient_distance(u, x, y, &opts).unwrap().distance.value;
        prop_assert!(q <= lift + opts.tol_num(lift));
    }

    #[test]
    fn finer_grids_do_not_lengthen_paths(which in 3usize..8, a in prop::array::uniform4(0.0..1.0f64)) {
        let (_, u) = &common::corpus()[which];
        let h = u.lattice().cell_diameter() / 32.0;
        let x = point_in(u, a[0], a[1]);
        let y = point_in(u, a[2], a[3]);
        let coarse = intrinsic_distance(u, x, y, &DistanceOptions::default().with_grid_step(h)).unwrap().value;
        let fine = intrinsic_distance(u, x, y, &DistanceOptions::default().with_grid_step(h / 2.0)).unwrap().value;
        prop_assert!(fine <= coarse + 1e-9, "h/2: {fine}, h: {coarse}");
    }
}

proptest! {
    #![proptest_config(cases(4))]

    #[test]
    fn bilipschitz_constants_bound_random_pairs(which in 0usize..8, seed in 0u64..1 << 32) {
        let (_, u) = &common::corpus()[which];
        let b = bilip_constants(u, Rect::fundamental(u.lattice()), &common::opts_for(u), 50, seed).unwrap();
        prop_assert!(b.lambda1 <= b.lambda2);
        prop_assert!(b.validation.passed(), "{:?}", b.validation.failures().collect::<Vec<_>>());
    }

    #[test]
    fn raising_the_function_costs_at_most_twice_the_gap(which in 0usize..8, eps in prop::sample::select(vec![0.1, 0.5, 1.0]), seed in 0u64..1 << 32) {
        let (_, u) = &common::corpus()[which];
        let r = busemann_feller_check(u, &u.add_constant(eps), 10, &common::opts_for(u), seed).unwrap();
        prop_assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
    }
}
