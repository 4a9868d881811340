use proptest::prelude::*;
use simrad::group::{canonicalize_unit, rot_axis, rotation_from_angles, unit_normal};
use simrad::{CharacterSet, Geometry, GroupElement, LineLabel, PlaneLabel, Vec3};

const TOL: f64 = 1e-10;

fn unit() -> impl Strategy<Value = Vec3> {
    (0.0..std::f64::consts::TAU, -1.0f64..1.0).prop_map(|(t, z)| {
        let r = (1.0 - z * z).sqrt();
        Vec3::new(r * t.cos(), r * t.sin(), z)
    })
}

fn element() -> impl Strategy<Value = GroupElement> {
    (prop::array::uniform3(-3.0f64..3.0), unit(), -3.2f64..3.2, -1.2f64..1.2).prop_map(|(b, axis, angle, la)| {
        GroupElement::new(Vec3::from(b), rot_axis(&axis, angle), la.exp()).unwrap()
    })
}

fn plane() -> impl Strategy<Value = PlaneLabel> {
    (unit(), -3.0f64..3.0).prop_map(|(n, t)| {
        let (theta, phi, s) = canonicalize_unit(&n);
        PlaneLabel::new(theta, phi, s * t).unwrap()
    })
}

fn line() -> impl Strategy<Value = LineLabel> {
    (unit(), prop::array::uniform3(-3.0f64..3.0)).prop_map(|(d, p)| {
        let (theta, phi, _) = canonicalize_unit(&d);
        let d = unit_normal(theta, phi);
        let p = Vec3::from(p);
        LineLabel::new(theta, phi, p - p.dot(&d) * d).unwrap()
    })
}

/// Distance between the planes `n₁·x = t₁` and `n₂·x = t₂` as unsigned sets.
fn plane_gap(p: &PlaneLabel, q: &PlaneLabel) -> f64 {
    let (n1, n2) = (p.normal(), q.normal());
    let s = n1.dot(&n2).signum();
    (n1 - s * n2).norm() + (p.t - s * q.t).abs()
}

fn line_gap(l: &LineLabel, m: &LineLabel) -> f64 {
    let s = l.direction().dot(&m.direction()).signum();
    (l.direction() - s * m.direction()).norm() + (l.t_perp - m.t_perp).norm()
}

fn dist_to_line(x: &Vec3, l: &LineLabel) -> f64 {
    let d = l.direction();
    let r = x - l.t_perp;
    (r - r.dot(&d) * d).norm()
}

proptest! {
    #[test]
    fn composition_is_associative(g in element(), h in element(), k in element()) {
        let left = g.compose(&h).compose(&k);
        let right = g.compose(&h.compose(&k));
        prop_assert!(left.distance(&right) <= TOL * (1.0 + left.b().norm()));
    }

    #[test]
    fn inverse_and_identity(g in element(), x in prop::array::uniform3(-5.0f64..5.0)) {
        let e = GroupElement::identity();
        prop_assert!(g.compose(&g.inverse()).distance(&e) <= TOL);
        prop_assert!(g.inverse().compose(&g).distance(&e) <= TOL);
        prop_assert!(g.compose(&e).distance(&g) == 0.0);
        let x = Vec3::from(x);
        prop_assert!((g.act_point_inverse(&g.act_point(&x)) - x).norm() <= TOL * (1.0 + x.norm()));
    }

    #[test]
    fn point_action_is_affine_similarity(g in element(), x in prop::array::uniform3(-5.0f64..5.0)) {
        // g·x = b + aRx, checked against the components
        let x = Vec3::from(x);
        let expected = g.b() + g.a() * g.rotation_matrix() * x;
        prop_assert!((g.act_point(&x) - expected).norm() <= TOL * (1.0 + expected.norm()));
    }

    #[test]
    fn compose_matches_sequential_point_action(g in element(), h in element(), x in prop::array::uniform3(-2.0f64..2.0)) {
        let x = Vec3::from(x);
        let seq = g.act_point(&h.act_point(&x));
        prop_assert!((g.compose(&h).act_point(&x) - seq).norm() <= TOL * (1.0 + seq.norm()));
    }

    #[test]
    fn characters_are_homomorphisms(g in element(), h in element()) {
        let gh = g.compose(&h);
        for geom in [Geometry::Plane, Geometry::Line] {
            let c = CharacterSet::new(geom);
            for f in [CharacterSet::alpha, CharacterSet::beta, CharacterSet::gamma, CharacterSet::chi, CharacterSet::zeta] {
                let lhs = f(&c, &gh);
                let rhs = f(&c, &g) * f(&c, &h);
                prop_assert!((lhs - rhs).abs() <= TOL * rhs.abs());
            }
            let combo = c.alpha(&g).sqrt() / c.beta(&g).sqrt() / c.gamma(&g);
            prop_assert!((combo - c.chi(&g)).abs() <= TOL * combo);
        }
    }

    #[test]
    fn haar_density_is_multiplicative(g in element(), h in element()) {
        // a(gh)^{-4} = a(g)^{-4} a(h)^{-4}
        let lhs = g.compose(&h).haar_weight();
        prop_assert!((lhs - g.haar_weight() * h.haar_weight()).abs() <= TOL * lhs);
    }

    #[test]
    fn plane_action_maps_incident_points(g in element(), p in plane(), xy in prop::array::uniform2(-3.0f64..3.0)) {
        let image = g.act_plane(&p);
        let x = g.act_point(&p.point(xy[0], xy[1]));
        let n = image.normal();
        prop_assert!((n.dot(&x) - image.t).abs() <= 1e-9 * (1.0 + x.norm()));
    }

    #[test]
    fn plane_action_is_an_action(g in element(), h in element(), p in plane()) {
        let seq = g.act_plane(&h.act_plane(&p));
        let once = g.compose(&h).act_plane(&p);
        prop_assert!(plane_gap(&seq, &once) <= 1e-9 * (1.0 + once.t.abs()));
        prop_assert!(plane_gap(&GroupElement::identity().act_plane(&p), &p) <= TOL);
    }

    #[test]
    fn line_action_maps_incident_points(g in element(), l in line(), s in -3.0f64..3.0) {
        let image = g.act_line(&l);
        let x = g.act_point(&l.point(s));
        prop_assert!(dist_to_line(&x, &image) <= 1e-9 * (1.0 + x.norm()));
    }

    #[test]
    fn line_action_is_an_action(g in element(), h in element(), l in line()) {
        let seq = g.act_line(&h.act_line(&l));
        let once = g.compose(&h).act_line(&l);
        prop_assert!(line_gap(&seq, &once) <= 1e-9 * (1.0 + once.t_perp.norm()));
    }

    #[test]
    fn sections_carry_the_root_to_the_label(p in plane(), l in line()) {
        prop_assert!(plane_gap(&p.section().act_plane(&PlaneLabel::origin()), &p) <= TOL);
        prop_assert!(line_gap(&l.section().act_line(&LineLabel::origin()), &l) <= TOL);
        prop_assert!(p.section().a() == 1.0 && l.section().a() == 1.0);
    }

    #[test]
    fn canonical_angles_recover_the_direction(u in unit()) {
        let (theta, phi, s) = canonicalize_unit(&u);
        prop_assert!((s * unit_normal(theta, phi) - u).norm() <= 1e-9);
        prop_assert!(s == 1.0 || s == -1.0);
        let r = rotation_from_angles(theta, phi);
        prop_assert!((r * Vec3::z() - unit_normal(theta, phi)).norm() <= TOL);
    }
}
