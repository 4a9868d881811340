use serde_json::Value;
use simrad_demo::{intertwining, plane_profile, reconstruct};

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn profile_tracks_the_closed_form() {
    let r = parse(plane_profile("two-gaussians", 40.0, 60.0).unwrap());
    assert_eq!(r["t"].as_array().unwrap().len(), r["measured"].as_array().unwrap().len());
    assert!(r["max_err"].as_f64().unwrap() < 1e-2);
}

#[test]
fn reconstruction_slice_is_close() {
    let r = parse(reconstruct("gaussian", 16, "fbp").unwrap());
    assert_eq!(r["recon"].as_array().unwrap().len(), 32 * 32);
    assert!(r["rel_error"].as_f64().unwrap() < 0.1);
}

#[test]
fn exact_character_beats_the_ablations() {
    let r = parse(intertwining("two-gaussians", 1.25, 30.0, 0.3).unwrap());
    let exact = r["exact"].as_f64().unwrap();
    assert!(exact < 0.05 && r["inverted"].as_f64().unwrap() > 4.0 * exact);
    assert!(r["omitted"].as_f64().unwrap() > exact);
}
