use simrad::verify::{
    check_fourier_slice, check_haar_invariance, check_intertwining, check_isometry, run_all, run_on, CharacterMode,
    Check, ResidualEntry, ResidualReport, VerifyConfig, ABLATION_MIN, HAAR_TOL,
};
use simrad::xform::{LineGeometry, PlaneGeometry, SinogramGeometry};
use simrad::{GroupElement, Phantom, Vec3, Volume};

fn small() -> Volume {
    Phantom::two_gaussians().sample(32, 0.3).unwrap()
}

fn layouts() -> [SinogramGeometry; 2] {
    [
        SinogramGeometry::Plane(PlaneGeometry::new(24, 24, 97, 6.0).unwrap()),
        SinogramGeometry::Line(LineGeometry::new(20, 20, 61, 6.0).unwrap()),
    ]
}

#[test]
fn check_names_round_trip() {
    for c in Check::ALL {
        assert_eq!(c.name().parse::<Check>().unwrap(), c);
    }
    assert!("nonsense".parse::<Check>().is_err());
}

#[test]
fn entry_line_and_json_report() {
    let mut report = ResidualReport::default();
    report.push(ResidualEntry::new("b_check", 0.5, 0.1, "ctx"));
    report.push(ResidualEntry::new("a_check", 0.01, 0.1, ""));
    report.sort();
    assert_eq!(report.entries[0].name, "a_check");
    assert!(!report.all_pass());
    assert!(report.get("b_check").unwrap().line().starts_with("CHECK b_check residual=5e-1 tol=1e-1 pass=0"));
    let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    assert!(json.to_string().contains("a_check"));
}

#[test]
fn cheap_checks_pass_through_run_all() {
    let config = VerifyConfig {
        checks: vec![Check::GroupAlgebra, Check::Evenness, Check::FiberConstancy],
        n: 32,
        h: 0.3,
        algebra_samples: 50,
        ..VerifyConfig::default()
    };
    let report = run_all(&config, 7);
    assert!(report.entries.len() >= 7);
    assert!(report.all_pass(), "{}", report.to_text());
    let names: Vec<_> = report.entries.iter().map(|e| e.name.clone()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
}

#[test]
fn empty_selection_gives_empty_report() {
    let config = VerifyConfig { checks: vec![], ..VerifyConfig::default() };
    assert!(run_all(&config, 0).entries.is_empty());
}

#[test]
fn run_on_uses_the_given_volume() {
    let config = VerifyConfig { checks: vec![Check::FiberConstancy], ..VerifyConfig::default() };
    let zero = Volume::zeros(16, 0.3).unwrap();
    let report = run_on(&config, 0, Some(&zero));
    assert_eq!(report.entries.len(), 1);
    assert_eq!(report.entries[0].residual, 0.0);
}

#[test]
fn fourier_slice_and_isometry_on_a_small_grid() {
    let v = small();
    for layout in layouts() {
        let e = check_fourier_slice(&layout, &v).unwrap();
        assert!(e.pass, "{}", e.line());
        let e = check_isometry(&layout, &v).unwrap();
        assert!(e.pass, "{}", e.line());
    }
}

#[test]
fn zero_volume_isometry_is_informational() {
    let e = check_isometry(&layouts()[0], &Volume::zeros(16, 0.3).unwrap()).unwrap();
    assert!(e.pass && e.context.contains("0/0"));
}

#[test]
fn intertwining_separates_exact_from_inverted_character() {
    let v = small();
    let axis = Vec3::new(1.0, 1.0, 0.0).normalize();
    let g = GroupElement::new(Vec3::new(0.3, -0.2, 0.1), simrad::group::rot_axis(&axis, 0.5), 1.25).unwrap();
    for layout in layouts() {
        let exact = check_intertwining(&layout, &g, &v, CharacterMode::Exact).unwrap();
        assert!(exact.pass, "{}", exact.line());
        let inverted = check_intertwining(&layout, &g, &v, CharacterMode::Inverted).unwrap();
        assert!(inverted.residual >= ABLATION_MIN, "{}", inverted.line());
    }
}

#[test]
fn haar_measure_is_left_invariant() {
    let e = check_haar_invariance(60_000, 3);
    assert!(e.residual <= HAAR_TOL, "{}", e.line());
}
