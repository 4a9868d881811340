use std::f64::consts::PI;

use simrad::filter::{admissibility_constant, calderon_constant};
use simrad::grid::log_wavelet;
use simrad::invert::{invert_wavelet, wavelet_energy, GroupLattice, LatticeConfig};
use simrad::xform::{radon_plane, xray, LineGeometry, PlaneGeometry, Sinogram};
use simrad::Phantom;

const SIGMA: f64 = 1.25;

fn lattice(level: usize) -> GroupLattice {
    GroupLattice::new(&LatticeConfig::level(level, SIGMA, 2.0).unwrap(), 0.3).unwrap()
}

#[test]
fn log_admissibility_has_closed_form() {
    // ℱψ(ω) = |ω|² e^{−πσ²|ω|²}, so ∫|ℱψ|²|ω|⁻³ dω = 4π ∫ r³ e^{−2πσ²r²} dr = 1/(2πσ⁴)
    let psi = log_wavelet(SIGMA, 32, 0.3).unwrap();
    let k = admissibility_constant(&psi).unwrap();
    let exact = 1.0 / (2.0 * PI * SIGMA.powi(4));
    assert!((k / exact - 1.0).abs() < 1e-3, "{k} vs {exact}");
    let c = calderon_constant(&psi).unwrap();
    assert!((c * 4.0 * PI - k).abs() < 1e-12 * k);
}

#[test]
fn gaussian_is_rejected_as_a_wavelet() {
    let v = Phantom::unit_gaussian().sample(32, 0.3).unwrap();
    let s = Sinogram::Plane(radon_plane(&v, &PlaneGeometry::new(8, 8, 41, 6.0).unwrap()).unwrap());
    let err = invert_wavelet(&s, &v, &lattice(0)).unwrap_err();
    assert_eq!(err.name(), "NotAdmissible");
}

#[test]
fn lattices_refine() {
    assert_eq!(LatticeConfig::level(3, SIGMA, 2.0).unwrap_err().name(), "InvalidGrid");
    let counts: Vec<usize> = (0..3).map(|l| lattice(l).node_count()).collect();
    assert!(counts[0] < counts[1] && counts[1] < counts[2], "{counts:?}");
    for l in 0..3 {
        let lat = lattice(l);
        assert!(lat.scales.iter().all(|s| s.weight > 0.0 && !s.translations.is_empty()));
    }
}

#[test]
fn coarse_plane_lattice_reconstructs_a_gaussian() {
    let v = Phantom::unit_gaussian().sample(32, 0.3).unwrap();
    let s = Sinogram::Plane(radon_plane(&v, &PlaneGeometry::new(24, 24, 81, 6.0).unwrap()).unwrap());
    let psi = log_wavelet(SIGMA, 32, 0.3).unwrap();
    let r = invert_wavelet(&s, &psi, &lattice(0)).unwrap();
    let err = r.volume.as_ref().unwrap().relative_error(&v, 1.0);
    assert!(err <= 0.15, "relative error {err}");
    assert!((0.5..=1.5).contains(&r.energy_ratio()), "{}", r.energy_ratio());
    let total: f64 = r.scale_energy.iter().sum();
    assert!((total - r.energy).abs() <= 1e-12 * r.energy);
}

#[test]
fn coarse_line_lattice_energy_is_close_to_the_norm() {
    let v = Phantom::unit_gaussian().sample(32, 0.3).unwrap();
    let s = Sinogram::Line(xray(&v, &LineGeometry::new(16, 16, 41, 6.0).unwrap()).unwrap());
    let psi = log_wavelet(SIGMA, 32, 0.3).unwrap();
    let r = wavelet_energy(&s, &psi, &lattice(0)).unwrap();
    assert!(r.volume.is_none());
    assert!((0.5..=1.5).contains(&r.energy_ratio()), "{}", r.energy_ratio());
}
