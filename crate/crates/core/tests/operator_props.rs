use proptest::prelude::*;
use simrad::filter::{apply_multiplier, check_semi_invariance, MultiplierSpec};
use simrad::group::rot_axis;
use simrad::invert::apply_pi_hat;
use simrad::verify::{check_evenness_subspace, check_fiber_constancy, parity_pair, EVENNESS_TOL, FIBER_TOL};
use simrad::xform::{radon_plane, LineGeometry, LineSinogram, PlaneGeometry, PlaneSinogram, Sinogram};
use simrad::{GroupElement, Phantom, Vec3, Volume};
use std::sync::OnceLock;

fn unit() -> impl Strategy<Value = Vec3> {
    (0.0..std::f64::consts::TAU, -1.0f64..1.0).prop_map(|(t, z)| {
        let r = (1.0 - z * z).sqrt();
        Vec3::new(r * t.cos(), r * t.sin(), z)
    })
}

/// Elements small enough to keep the test phantom inside the sampled window.
fn mild_element() -> impl Strategy<Value = GroupElement> {
    (prop::array::uniform3(-0.4f64..0.4), unit(), -1.0f64..1.0, 0.8f64..1.25)
        .prop_map(|(b, axis, angle, a)| GroupElement::new(Vec3::from(b), rot_axis(&axis, angle), a).unwrap())
}

fn random_plane(values: Vec<f64>) -> Sinogram {
    let g = PlaneGeometry::new(3, 4, 32, 2.0).unwrap();
    Sinogram::Plane(PlaneSinogram::from_data(g, values).unwrap())
}

fn random_line(values: Vec<f64>) -> Sinogram {
    let g = LineGeometry::new(2, 3, 8, 2.0).unwrap();
    Sinogram::Line(LineSinogram::from_data(g, values).unwrap())
}

fn small_volume() -> &'static Volume {
    static V: OnceLock<Volume> = OnceLock::new();
    V.get_or_init(|| Phantom::two_gaussians().sample(32, 0.25).unwrap())
}

fn small_sinogram() -> &'static Sinogram {
    static S: OnceLock<Sinogram> = OnceLock::new();
    S.get_or_init(|| {
        Sinogram::Plane(radon_plane(small_volume(), &PlaneGeometry::new(32, 32, 129, 6.0).unwrap()).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn multiplier_exponents_add(
        p in 0.1f64..1.5, q in 0.1f64..1.5,
        plane in prop::collection::vec(-1.0f64..1.0, 3 * 4 * 32),
        line in prop::collection::vec(-1.0f64..1.0, 2 * 3 * 64),
    ) {
        for s in [random_plane(plane), random_line(line)] {
            let twice = apply_multiplier(&apply_multiplier(&s, &MultiplierSpec::new(p).unwrap()), &MultiplierSpec::new(q).unwrap());
            let once = apply_multiplier(&s, &MultiplierSpec::new(p + q).unwrap());
            prop_assert!(twice.minus(&once).norm() <= 1e-10 * (1.0 + once.norm()));
        }
    }

    #[test]
    fn multiplier_is_linear(
        c in -3.0f64..3.0,
        a in prop::collection::vec(-1.0f64..1.0, 3 * 4 * 32),
        b in prop::collection::vec(-1.0f64..1.0, 3 * 4 * 32),
    ) {
        let spec = MultiplierSpec::new(1.0).unwrap();
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + c * y).collect();
        let lhs = apply_multiplier(&random_plane(sum), &spec);
        let rhs = apply_multiplier(&random_plane(a), &spec);
        let rb = apply_multiplier(&random_plane(b), &spec).scaled(c);
        let rhs = rhs.minus(&rb.scaled(-1.0));
        prop_assert!(lhs.minus(&rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
    }

    #[test]
    fn symbol_is_homogeneous(p in 0.1f64..2.0, r in 0.01f64..10.0, c in 0.1f64..10.0) {
        let spec = MultiplierSpec::new(p).unwrap();
        let lhs = spec.symbol(c * r);
        let rhs = c.powf(p) * spec.symbol(r);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn unitarization_is_semi_invariant(g in mild_element()) {
        let spec = MultiplierSpec::unitarization(simrad::Geometry::Plane);
        let r = check_semi_invariance(&spec, &g, small_sinogram());
        prop_assert!(r <= 2e-2, "residual {r}");
    }

    #[test]
    fn pi_hat_is_a_representation(g in mild_element(), h in mild_element()) {
        let s = small_sinogram();
        let seq = apply_pi_hat(&g, &apply_pi_hat(&h, s));
        let once = apply_pi_hat(&g.compose(&h), s);
        let r = seq.minus(&once).norm() / once.norm();
        prop_assert!(r <= 2e-2, "residual {r}");
    }

    #[test]
    fn parity_subspaces_are_preserved(g in mild_element()) {
        let geom = PlaneGeometry::new(12, 12, 81, 6.0).unwrap();
        let (even, odd) = parity_pair(geom, &Phantom::asymmetric());
        let e = check_evenness_subspace(&even, &odd, &g);
        prop_assert!(e.residual <= EVENNESS_TOL, "{}", e.line());
    }

    #[test]
    fn plane_integrals_depend_only_on_the_unsigned_plane(
        planes in prop::collection::vec((unit(), -2.0f64..2.0), 1..6),
    ) {
        let e = check_fiber_constancy(small_volume(), &planes);
        prop_assert!(e.residual <= FIBER_TOL, "{}", e.line());
    }
}
