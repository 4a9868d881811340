//! Reconstruction: the representation `π̂` on sinograms, filtered
//! back-projection, direct Fourier inversion and the wavelet-frame inversion
//! over a discretized SIM(3) lattice.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{self, Direction};
use crate::filter::{
    apply_multiplier, apply_multiplier_line, apply_multiplier_plane,
    calderon_constant, MultiplierSpec,
};
use crate::grid::{idft3, Spectrum3D, SplineVolume, Volume};
use crate::group::{rot_z, rotation_from_angles, CharacterSet, Geometry, GroupElement, Mat3, Vec3};
use crate::interp;
use crate::par;
use crate::xform::{
    backproject_line, backproject_plane, radon_plane, xray, BlockSpectra, ColumnSpectra, LineGeometry, LineSinogram, PlaneGeometry,
    PlaneSinogram, Sinogram,
};

/// Overall constant of `f = R#(ℱ⁻¹ τ² ℱ Rf)` with half-sphere back-projection.
///
/// `∫_{S²₊} ∫ |τ|² ℱf(τn) e^{2πiτ n·x} dτ dn` covers every frequency once in
/// polar coordinates, so no rescaling is needed.
pub const FBP_CONSTANT: f64 = 1.0;

/// Largest fraction of in-band voxels that may go without data.
pub const MAX_UNCOVERED_FRACTION: f64 = 0.01;

/// `π̂(g)F(n, t) = a^{−1/2} F(Rᵀn, (t − n·b)/a)`, read off the input by
/// Catmull-Rom interpolation over directions and in `t`.
pub fn apply_pi_hat_plane(g: &GroupElement, s: &PlaneSinogram) -> PlaneSinogram {
    apply_pi_hat_plane_into(g, s, &s.geom)
}

/// [`apply_pi_hat_plane`] sampled on a different output geometry.
pub fn apply_pi_hat_plane_into(g: &GroupElement, s: &PlaneSinogram, target: &PlaneGeometry) -> PlaneSinogram {
    if *g == GroupElement::identity() && s.geom == *target {
        return s.clone();
    }
    let rt = g.rotation_matrix().transpose();
    let (b, a) = (g.b(), g.a());
    let scale = a.powf(-0.5);
    let angles = target.angles();
    let blocks = par::map_range(angles.len(), |d| {
        let n = angles.normal(d);
        let m = rt * n;
        let nb = n.dot(&b);
        (0..target.n_t).map(|k| scale * s.sample_cubic(&m, (target.t(k) - nb) / a)).collect::<Vec<_>>()
    });
    PlaneSinogram { geom: *target, data: blocks.concat() }
}

/// `π̂(g)F(n, p) = a^{−1} F(Rᵀn, P(a⁻¹Rᵀ(p − b)))` with `P` the projection onto
/// the new direction's orthogonal plane; bilinear in directions and in `(u, v)`.
pub fn apply_pi_hat_line(g: &GroupElement, s: &LineSinogram) -> LineSinogram {
    apply_pi_hat_line_into(g, s, &s.geom)
}

/// [`apply_pi_hat_line`] sampled on a different output geometry.
pub fn apply_pi_hat_line_into(g: &GroupElement, s: &LineSinogram, target: &LineGeometry) -> LineSinogram {
    if *g == GroupElement::identity() && s.geom == *target {
        return s.clone();
    }
    let rt = g.rotation_matrix().transpose();
    let (b, a) = (g.b(), g.a());
    let src = s.geom.angles();
    let angles = target.angles();
    let nu = target.n_u;
    let blocks = par::map_range(angles.len(), |d| {
        let (n, e1, e2) = angles.frame(d);
        let stencil = src.stencil_cubic(&(rt * n));
        let frames: Vec<(usize, f64, Vec3, Vec3)> = stencil
            .iter()
            .filter(|e| e.2 != 0.0)
            .map(|&(dd, _, w)| {
                let (_, f1, f2) = src.frame(dd);
                (dd, w, f1, f2)
            })
            .collect();
        let mut out = vec![0.0; nu * nu];
        for m in 0..nu {
            for k in 0..nu {
                let p = target.u(m) * e1 + target.u(k) * e2;
                let q = rt * (p - b) / a;
                out[m * nu + k] =
                    frames.iter().map(|&(dd, w, f1, f2)| w * s.sample_uv_cubic(dd, q.dot(&f1), q.dot(&f2))).sum::<f64>() / a;
            }
        }
        out
    });
    LineSinogram { geom: *target, data: blocks.concat() }
}

/// Dispatches on the sinogram kind.
pub fn apply_pi_hat(g: &GroupElement, s: &Sinogram) -> Sinogram {
    match s {
        Sinogram::Plane(p) => Sinogram::Plane(apply_pi_hat_plane(g, p)),
        Sinogram::Line(l) => Sinogram::Line(apply_pi_hat_line(g, l)),
    }
}

/// Filtered back-projection for plane sinograms: `τ²` in the offset
/// variable, then the half-sphere back-projection onto an `n³` grid.
pub fn invert_fbp_plane(s: &PlaneSinogram, n: usize, h: f64) -> Result<Volume> {
    let filtered = apply_multiplier_plane(s, &MultiplierSpec::unitarization(Geometry::Plane).squared());
    let v = backproject_plane(&filtered, n, h)?;
    Ok(if FBP_CONSTANT == 1.0 { v } else { v.scaled(FBP_CONSTANT) })
}

/// Filtered back-projection for line sinograms: `π⁻¹|ν|` in the offset
/// plane, then back-projection over the half sphere.
pub fn invert_fbp_line(s: &LineSinogram, n: usize, h: f64) -> Result<Volume> {
    let filtered = apply_multiplier_line(s, &MultiplierSpec::unitarization(Geometry::Line).squared());
    let v = backproject_line(&filtered, n, h)?;
    Ok(if FBP_CONSTANT == 1.0 { v } else { v.scaled(FBP_CONSTANT) })
}

pub fn invert_fbp(s: &Sinogram, n: usize, h: f64) -> Result<Volume> {
    match s {
        Sinogram::Plane(p) => invert_fbp_plane(p, n, h),
        Sinogram::Line(l) => invert_fbp_line(l, n, h),
    }
}

/// Output of [`invert_direct_fourier`].
#[derive(Debug, Clone)]
pub struct FourierReconstruction {
    pub volume: Volume,
    /// Voxels with `|ω|` at most the volume's Nyquist frequency.
    pub in_band: usize,
    /// In-band voxels that no slice reached.
    pub uncovered: usize,
}

impl FourierReconstruction {
    /// Fraction of in-band voxels that received data.
    pub fn coverage(&self) -> f64 {
        if self.in_band == 0 {
            1.0
        } else {
            1.0 - self.uncovered as f64 / self.in_band as f64
        }
    }
}

/// Fills the spectrum of an `n³` grid from the sinogram's slices through the
/// origin and inverts it with one 3D DFT.
///
/// A voxel is covered when its frequency lies inside the band carried by the
/// sinogram's offset sampling. Voxels outside that band are left at zero.
pub fn invert_direct_fourier(s: &Sinogram, n: usize, h: f64) -> Result<FourierReconstruction> {
    let probe = Volume::zeros(n, h)?;
    let mut spec = Spectrum3D::zeros(n, h, probe.origin());
    let nyquist = 0.5 / h;
    let template = spec.clone();
    let counts: Vec<(usize, usize)> = match s {
        Sinogram::Plane(p) => {
            let cols = ColumnSpectra::new(p, 2);
            let angles = p.geom.angles();
            let dc: Complex64 = (0..angles.len()).map(|d| cols.eval(d, 0.0) * angles.weight(d)).sum::<Complex64>()
                / (2.0 * PI);
            fill(&template, spec.data_mut(), nyquist, cols.nyquist, |w, r| {
                if r == 0.0 {
                    dc
                } else {
                    cols.eval_dir(&(w / r), r)
                }
            })
        }
        Sinogram::Line(l) => {
            let blocks = BlockSpectra::new(l);
            let angles = blocks.angles();
            let k_samples = angles.n_theta.max(8);
            fill(&template, spec.data_mut(), nyquist, blocks.nyquist, |w, r| {
                let u = if r == 0.0 { Vec3::z() } else { w / r };
                let (p, q) = orthonormal_pair(&u);
                let mut acc = Complex64::default();
                for k in 0..k_samples {
                    let psi = (k as f64 + 0.5) * PI / k_samples as f64;
                    let m = psi.cos() * p + psi.sin() * q;
                    for &(d, _, wt) in angles.stencil(&m).iter() {
                        if wt != 0.0 {
                            acc += blocks.eval_projected(d, w) * wt;
                        }
                    }
                }
                acc / k_samples as f64
            })
        }
    };
    let (in_band, uncovered) = counts.iter().fold((0, 0), |acc, c| (acc.0 + c.0, acc.1 + c.1));
    if uncovered as f64 > MAX_UNCOVERED_FRACTION * in_band as f64 {
        return Err(Error::InsufficientCoverage { uncovered, in_band });
    }
    Ok(FourierReconstruction { volume: idft3(&spec), in_band, uncovered })
}

/// Writes `eval(ω, |ω|)` into every voxel within both bands and counts
/// in-band and uncovered voxels per `z`-slab.
fn fill<F>(
    template: &Spectrum3D,
    data: &mut [Complex64],
    nyquist: f64,
    data_band: f64,
    eval: F,
) -> Vec<(usize, usize)>
where
    F: Fn(&Vec3, f64) -> Complex64 + Sync,
{
    let n = template.n();
    par::map_chunks(data, n * n, |k, slab| {
        let (mut in_band, mut uncovered) = (0, 0);
        for j in 0..n {
            for i in 0..n {
                let w = template.frequency(i, j, k);
                let r = w.norm();
                if r > nyquist {
                    continue;
                }
                in_band += 1;
                if r > data_band {
                    uncovered += 1;
                    continue;
                }
                slab[i + n * j] = eval(&w, r);
            }
        }
        (in_band, uncovered)
    })
}

/// Two unit vectors completing `u` to an orthonormal frame.
fn orthonormal_pair(u: &Vec3) -> (Vec3, Vec3) {
    let helper = if u.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let p = u.cross(&helper).normalize();
    (p, u.cross(&p))
}

/// How a [`GroupLattice`] is laid out.
///
/// Scales are the log-midpoints of `ratio`-cells covering `[a_min, a_max]`.
/// At scale `a` translations form a cubic lattice with spacing
/// `stride_factor · a` (rounded to a whole number of voxels, at least one)
/// restricted to the ball `|b| ≤ reach_base + reach_per_scale · a`.
/// Rotations are `R_{θ,φ} R_z(spin)` over `directions` points of the sphere
/// and `spins` equally spaced spins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeConfig {
    pub a_min: f64,
    pub a_max: f64,
    pub ratio: f64,
    pub directions: usize,
    pub spins: usize,
    pub stride_factor: f64,
    pub reach_base: f64,
    pub reach_per_scale: f64,
}

impl LatticeConfig {
    /// Refinement level 0, 1 or 2 for a wavelet of width `sigma` and an
    /// object supported in the ball of radius `object_radius`.
    ///
    /// Level 0 has 12 directions and 4 scales over `[1/4, 4]`; each level
    /// widens the scale range, shrinks the scale ratio and the translation
    /// step, and adds directions.
    pub fn level(level: usize, sigma: f64, object_radius: f64) -> Result<Self> {
        let (a_min, a_max, ratio, directions, stride) = match level {
            0 => (0.25, 4.0, 2.0, 12, 0.3),
            1 => (0.2, 5.0, 5f64.sqrt(), 20, 0.25),
            2 => (1.0 / 6.0, 6.0, 6f64.cbrt(), 32, 0.2),
            _ => return Err(Error::InvalidGrid(format!("lattice level must be 0, 1 or 2, got {level}"))),
        };
        Ok(Self {
            a_min,
            a_max,
            ratio,
            directions,
            spins: 1,
            stride_factor: stride * sigma,
            reach_base: object_radius,
            reach_per_scale: 2.5 * sigma,
        })
    }
}

/// One scale of a [`GroupLattice`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleLevel {
    pub a: f64,
    /// Translation spacing (a multiple of the grid spacing).
    pub stride: f64,
    /// Radius of the ball the translations fill.
    pub reach: f64,
    pub translations: Vec<Vec3>,
    /// Haar weight `a⁻⁴ Δb³ ΔR Δa` shared by every node of this scale.
    pub weight: f64,
}

/// A finite set of SIM(3) elements with Riemann-sum weights for `dμ = a⁻⁴ db dR da`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupLattice {
    pub rotations: Vec<Mat3>,
    pub scales: Vec<ScaleLevel>,
}

impl GroupLattice {
    /// Builds the lattice with translations on the voxel lattice of spacing `h`.
    pub fn new(cfg: &LatticeConfig, h: f64) -> Result<Self> {
        if !(cfg.a_min > 0.0 && cfg.a_max > cfg.a_min && cfg.ratio > 1.0 && h > 0.0) {
            return Err(Error::InvalidGrid(format!("bad lattice scales {cfg:?}")));
        }
        if cfg.directions == 0 || cfg.spins == 0 || !(cfg.stride_factor > 0.0) {
            return Err(Error::InvalidGrid("lattice needs rotations and a positive stride".into()));
        }
        let ln_rho = cfg.ratio.ln();
        let cells = ((cfg.a_max / cfg.a_min).ln() / ln_rho).round().max(1.0) as usize;
        let mut rotations = Vec::with_capacity(cfg.directions * cfg.spins);
        for dir in sphere_points(cfg.directions) {
            let (theta, phi) = (dir.y.atan2(dir.x), dir.z.clamp(-1.0, 1.0).acos());
            let r = rotation_from_angles(theta, phi);
            for k in 0..cfg.spins {
                rotations.push(r * rot_z(2.0 * PI * k as f64 / cfg.spins as f64));
            }
        }
        let d_rot = 1.0 / rotations.len() as f64;
        let scales = (0..cells)
            .map(|k| {
                let a = cfg.a_min * cfg.ratio.powf(k as f64 + 0.5);
                let steps = (cfg.stride_factor * a / h).round().max(1.0);
                let stride = steps * h;
                let reach = cfg.reach_base + cfg.reach_per_scale * a;
                let m = (reach / stride).floor() as i64;
                let mut translations = Vec::new();
                for k in -m..=m {
                    for j in -m..=m {
                        for i in -m..=m {
                            let b = stride * Vec3::new(i as f64, j as f64, k as f64);
                            if b.norm() <= reach {
                                translations.push(b);
                            }
                        }
                    }
                }
                let weight = a.powi(-4) * stride.powi(3) * d_rot * a * ln_rho;
                ScaleLevel { a, stride, reach, translations, weight }
            })
            .collect();
        Ok(Self { rotations, scales })
    }

    pub fn node_count(&self) -> usize {
        self.rotations.len() * self.scales.iter().map(|s| s.translations.len()).sum::<usize>()
    }

    fn largest_reach(&self) -> f64 {
        self.scales.iter().map(|s| s.reach).fold(0.0, f64::max)
    }
}

/// Near-uniform points on the unit sphere: icosahedron vertices (12),
/// dodecahedron vertices (20), both (32), or a Fibonacci spiral otherwise.
pub fn sphere_points(count: usize) -> Vec<Vec3> {
    let gr = 0.5 * (1.0 + 5f64.sqrt());
    let icosa = || {
        let mut v = Vec::new();
        for s1 in [-1.0, 1.0] {
            for s2 in [-1.0, 1.0] {
                v.push(Vec3::new(0.0, s1, s2 * gr));
                v.push(Vec3::new(s1, s2 * gr, 0.0));
                v.push(Vec3::new(s2 * gr, 0.0, s1));
            }
        }
        v
    };
    let dodeca = || {
        let mut v = Vec::new();
        for s1 in [-1.0, 1.0] {
            for s2 in [-1.0, 1.0] {
                for s3 in [-1.0, 1.0] {
                    v.push(Vec3::new(s1, s2, s3));
                }
                v.push(Vec3::new(0.0, s1 / gr, s2 * gr));
                v.push(Vec3::new(s1 / gr, s2 * gr, 0.0));
                v.push(Vec3::new(s2 * gr, 0.0, s1 / gr));
            }
        }
        v
    };
    let pts = match count {
        12 => icosa(),
        20 => dodeca(),
        32 => {
            let mut v = icosa();
            v.extend(dodeca());
            v
        }
        _ => (0..count)
            .map(|k| {
                let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let ang = PI * (3.0 - 5f64.sqrt()) * k as f64;
                Vec3::new(r * ang.cos(), r * ang.sin(), z)
            })
            .collect(),
    };
    pts.into_iter().map(|p| p.normalize()).collect()
}

/// Output of [`invert_wavelet`] and [`wavelet_energy`].
#[derive(Debug, Clone)]
pub struct WaveletReconstruction {
    /// Reconstruction on the wavelet's grid (`None` when only the energy was asked for).
    pub volume: Option<Volume>,
    /// `Σ w χ² |⟨s, π̂(g)Ψ⟩|² / C_ψ`, the lattice estimate of `‖f‖²`.
    pub energy: f64,
    /// contribution of each lattice scale to `energy`
    pub scale_energy: Vec<f64>,
    /// `‖𝒥s‖²`, equal to `‖f‖²` when `s` is a transform of `f`.
    pub data_energy: f64,
    pub calderon: f64,
    pub nodes: usize,
}

impl WaveletReconstruction {
    /// `energy / data_energy` (1 for a perfect lattice); 0 for empty data.
    pub fn energy_ratio(&self) -> f64 {
        if self.data_energy == 0.0 {
            0.0
        } else {
            self.energy / self.data_energy
        }
    }
}

/// `f ≈ C_ψ⁻¹ Σ_g w(g) χ(g) ⟨s, π̂(g)Ψ⟩ π(g)ψ` with `Ψ = 𝒥²Rψ`.
///
/// The coefficients are computed from the sinogram only; `ψ` enters through
/// its transform `Ψ` and through the synthesis functions `π(g)ψ`. The
/// reconstruction lives on `ψ`'s grid.
pub fn invert_wavelet(s: &Sinogram, psi: &Volume, lattice: &GroupLattice) -> Result<WaveletReconstruction> {
    run_wavelet(s, psi, lattice, true)
}

/// Only the coefficient energy of [`invert_wavelet`], skipping synthesis.
pub fn wavelet_energy(s: &Sinogram, psi: &Volume, lattice: &GroupLattice) -> Result<WaveletReconstruction> {
    run_wavelet(s, psi, lattice, false)
}

fn run_wavelet(s: &Sinogram, psi: &Volume, lattice: &GroupLattice, synthesize: bool) -> Result<WaveletReconstruction> {
    let geometry = s.geometry();
    let calderon = calderon_constant(psi)?;
    let unitary = MultiplierSpec::unitarization(geometry);
    let data_energy = apply_multiplier(s, &unitary).norm().powi(2);
    let analyser = Analyser::new(psi, s)?;
    let chars = CharacterSet::new(geometry);
    let mut synth = if synthesize { Some(Synthesizer::new(psi, lattice)) } else { None };
    let mut scale_energy = Vec::new();
    for scale in &lattice.scales {
        let mut energy_terms = Vec::new();
        for r in &lattice.rotations {
            let g0 = GroupElement::new(Vec3::zeros(), *r, scale.a)?;
            let chi = chars.chi(&g0);
            let coef = coefficients(s, &analyser, &g0, scale);
            let sq: Vec<f64> = coef.iter().map(|c| c * c).collect();
            energy_terms.push(scale.weight * chi * chi * par::pairwise_sum(&sq) / calderon);
            if let Some(sy) = synth.as_mut() {
                let amps: Vec<f64> = coef.iter().map(|c| scale.weight * chi * c / calderon).collect();
                sy.add(r, scale, &amps);
            }
        }
        scale_energy.push(par::pairwise_sum(&energy_terms));
    }
    let energy = par::pairwise_sum(&scale_energy);
    let out = WaveletReconstruction {
        volume: synth.map(|sy| sy.finish()),
        energy,
        scale_energy,
        data_energy,
        calderon,
        nodes: lattice.node_count(),
    };
    let ratio = out.energy_ratio();
    if data_energy > 0.0 && (ratio - 1.0).abs() > 0.5 {
        log::warn!("LatticeTooCoarse: coefficient energy ratio {ratio:.3} is more than 50% away from 1");
    }
    Ok(out)
}

/// `Ψ = 𝒥²Rψ` sampled on the geometry of `s`.
pub fn analysing_sinogram(psi: &Volume, s: &Sinogram) -> Result<Sinogram> {
    let spec = MultiplierSpec::unitarization(s.geometry()).squared();
    Ok(match s {
        Sinogram::Plane(p) => Sinogram::Plane(apply_multiplier_plane(&radon_plane(psi, &p.geom)?, &spec)),
        Sinogram::Line(l) => Sinogram::Line(apply_multiplier_line(&xray(psi, &l.geom)?, &spec)),
    })
}

/// The analysing sinogram `Ψ` held as per-direction offset spectra.
///
/// `π̂(0, R, a)` dilates offsets by `a`, which on the spectrum is a rescaling
/// of frequencies. Working there keeps the high-frequency residue of the
/// sampled `Ψ` out of the data band at small scales.
pub struct Analyser {
    spectra: AnalyserSpectra,
    /// offset radius beyond which `Ψ` is treated as zero
    extent: f64,
    /// data offset frequencies above this value are rolled off
    cutoff: f64,
}

enum AnalyserSpectra {
    Plane(ColumnSpectra),
    Line(BlockSpectra),
}

impl Analyser {
    /// Analyser for data shaped like `s`. Data frequencies above the Nyquist
    /// frequency of `psi`'s grid are rolled off over a quarter of it, since
    /// the reconstruction cannot hold them.
    pub fn new(psi: &Volume, s: &Sinogram) -> Result<Self> {
        let cutoff = 0.5 / psi.h();
        Ok(match analysing_sinogram(psi, s)? {
            Sinogram::Plane(p) => {
                Self { extent: p.geom.t_max, spectra: AnalyserSpectra::Plane(ColumnSpectra::new(&p, 2)), cutoff }
            }
            Sinogram::Line(l) => Self {
                extent: l.geom.uv_max * 2f64.sqrt(),
                spectra: AnalyserSpectra::Line(BlockSpectra::padded(&l, 2)),
                cutoff,
            },
        })
    }

    fn taper(&self, r: f64) -> f64 {
        let end = 1.25 * self.cutoff;
        if r <= self.cutoff {
            1.0
        } else if r >= end {
            0.0
        } else {
            0.5 * (1.0 + (PI * (r - self.cutoff) / (end - self.cutoff)).cos())
        }
    }
}

/// `⟨s, π̂(b, R, a)Ψ⟩` for every translation `b` of `scale`, with `g0 = (0, R, a)`.
pub fn coefficients(s: &Sinogram, psi: &Analyser, g0: &GroupElement, scale: &ScaleLevel) -> Vec<f64> {
    match (s, &psi.spectra) {
        (Sinogram::Plane(sp), AnalyserSpectra::Plane(cs)) => plane_coefficients(sp, psi, cs, g0, scale),
        (Sinogram::Line(sl), AnalyserSpectra::Line(bs)) => line_coefficients(sl, psi, bs, g0, scale),
        _ => panic!("data and analysing sinogram differ in kind"),
    }
}

/// Plane case of [`coefficients`].
///
/// `π̂(b, R, a)Ψ(n, t) = G(n, t − n·b)` with `G = π̂(0, R, a)Ψ`, so the inner
/// product is a per-direction correlation in `t` evaluated at `n·b`. The
/// correlation is formed from `ℱG(n, ω) = a^{1/2} ℱΨ(Rᵀn, aω)` on a circular
/// grid long enough that no wrap-around reaches the sampled lags.
fn plane_coefficients(
    s: &PlaneSinogram,
    psi: &Analyser,
    spectra: &ColumnSpectra,
    g0: &GroupElement,
    scale: &ScaleLevel,
) -> Vec<f64> {
    let geom = s.geom;
    let (dt, nt) = (geom.dt(), geom.n_t);
    let a = g0.a();
    let rt = g0.rotation_matrix().transpose();
    let lb = (scale.reach / dt).ceil() as usize;
    let len = 2 * lb + 1;
    let span = ((geom.t_max + scale.reach + a * psi.extent) / dt).ceil() as usize + 1;
    let p = fft_size(span.max(nt).max(len + 1));
    let up = lag_upsampling(dt, a);
    let fwd = fft::planner_1d(p, Direction::Forward);
    let inv = fft::planner_1d(up * p, Direction::Inverse);
    let dw = 1.0 / (p as f64 * dt);
    let t0 = -(lb as f64) * dt;
    let lags = up * (len - 1) + 1;
    let angles = geom.angles();
    // corr_d(τ_j), τ_j = (j − lb) dt
    let corr = par::map_range(angles.len(), |d| {
        let u = rt * angles.normal(d);
        let mut buf = vec![Complex64::default(); p];
        for (b, v) in buf.iter_mut().zip(s.block(d)) {
            *b = Complex64::new(*v, 0.0);
        }
        fwd.process(&mut buf);
        for (m, x) in buf.iter_mut().enumerate() {
            let w = fft::signed_index(m, p) as f64 * dw;
            let taper = psi.taper(w.abs());
            if taper == 0.0 {
                *x = Complex64::default();
                continue;
            }
            let g = spectra.eval_dir(&u, a * w) * a.sqrt();
            let phase = Complex64::from_polar(1.0, 2.0 * PI * w * (geom.t_max + t0));
            *x *= g.conj() * phase * (dt * dw * taper);
        }
        let mut fine = vec![Complex64::default(); up * p];
        for (m, x) in buf.iter().enumerate() {
            fine[upsampled_index(m, p, up)] = *x;
        }
        inv.process(&mut fine);
        fine[..lags].iter().map(|c| c.re).collect::<Vec<_>>()
    });
    let dirs: Vec<(Vec3, f64)> = (0..angles.len()).map(|d| (angles.normal(d), angles.weight(d))).collect();
    par::map_range(scale.translations.len(), |i| {
        let b = scale.translations[i];
        dirs.iter()
            .zip(&corr)
            .map(|((n, w), c)| w * interp::linear_uniform(c, t0, dt / up as f64, n.dot(&b)))
            .sum()
    })
}

/// Line analogue of [`plane_coefficients`]: the correlation runs over the
/// 2D offset plane of each direction, using
/// `ℱG(n, ν) = a ℱΨ(Rᵀn, aRᵀν)`, and is read at the projection of `b`.
fn line_coefficients(
    s: &LineSinogram,
    psi: &Analyser,
    spectra: &BlockSpectra,
    g0: &GroupElement,
    scale: &ScaleLevel,
) -> Vec<f64> {
    let geom = s.geom;
    let (du, nu) = (geom.du(), geom.n_u);
    let a = g0.a();
    let rt = g0.rotation_matrix().transpose();
    let lb = (scale.reach / du).ceil() as usize;
    let len = 2 * lb + 1;
    let span = ((geom.uv_max + scale.reach + a * psi.extent) / du).ceil() as usize + 1;
    let p = fft_size(span.max(nu).max(len + 1));
    let up = lag_upsampling(du, a);
    let fine_len = up * p;
    let lags = up * (len - 1) + 1;
    let fwd = fft::planner_1d(p, Direction::Forward);
    let inv = fft::planner_1d(fine_len, Direction::Inverse);
    let dnu = 1.0 / (p as f64 * du);
    let t0 = -(lb as f64) * du;
    let angles = geom.angles();
    let src = spectra.angles();
    let freqs: Vec<f64> = (0..p).map(|m| fft::signed_index(m, p) as f64 * dnu).collect();
    let phase: Vec<Complex64> =
        freqs.iter().map(|&w| Complex64::from_polar(1.0, 2.0 * PI * w * (geom.uv_max + t0))).collect();
    let corr = par::map_range(angles.len(), |d| {
        let (n, e1, e2) = angles.frame(d);
        let stencil: Vec<(usize, f64)> =
            src.stencil(&(rt * n)).iter().filter(|e| e.2 != 0.0).map(|&(dd, _, w)| (dd, w)).collect();
        let (r1, r2) = (rt * e1 * a, rt * e2 * a);
        let mut buf = vec![Complex64::default(); p * p];
        let block = s.block(d);
        for m in 0..nu {
            for k in 0..nu {
                buf[m * p + k] = Complex64::new(block[m * nu + k], 0.0);
            }
        }
        fft::fft2(&mut buf, p, fwd.as_ref());
        for m1 in 0..p {
            for m2 in 0..p {
                let x = &mut buf[m1 * p + m2];
                let (w1, w2) = (freqs[m1], freqs[m2]);
                let taper = psi.taper((w1 * w1 + w2 * w2).sqrt());
                if taper == 0.0 {
                    *x = Complex64::default();
                    continue;
                }
                let q = r1 * w1 + r2 * w2;
                let g: Complex64 = stencil.iter().map(|&(dd, w)| spectra.eval_projected(dd, &q) * w).sum::<Complex64>() * a;
                *x *= g.conj() * phase[m1] * phase[m2] * (du * du * dnu * dnu * taper);
            }
        }
        let mut fine = vec![Complex64::default(); fine_len * fine_len];
        for m1 in 0..p {
            let row = upsampled_index(m1, p, up) * fine_len;
            for m2 in 0..p {
                fine[row + upsampled_index(m2, p, up)] = buf[m1 * p + m2];
            }
        }
        fft::fft2(&mut fine, fine_len, inv.as_ref());
        let mut out = vec![0.0; lags * lags];
        for j1 in 0..lags {
            for j2 in 0..lags {
                out[j1 * lags + j2] = fine[j1 * fine_len + j2].re;
            }
        }
        out
    });
    let frames: Vec<(Vec3, Vec3, f64)> = (0..angles.len())
        .map(|d| {
            let (_, e1, e2) = angles.frame(d);
            (e1, e2, angles.weight(d))
        })
        .collect();
    par::map_range(scale.translations.len(), |i| {
        let b = scale.translations[i];
        frames
            .iter()
            .zip(&corr)
            .map(|(&(e1, e2, w), c)| {
                w * interp::bilinear_uniform(c, lags, t0, du / up as f64, b.dot(&e1), b.dot(&e2))
            })
            .sum()
    })
}

/// Lag refinement factor so that correlations at scale `a` are tabulated
/// with a step of at most `a / 8`.
fn lag_upsampling(step: f64, a: f64) -> usize {
    ((8.0 * step / a).ceil() as usize).max(1)
}

/// Position of bin `m` of a length-`p` spectrum inside the zero-padded
/// length-`up · p` spectrum with the same frequency spacing.
fn upsampled_index(m: usize, p: usize, up: usize) -> usize {
    let k = fft::signed_index(m, p);
    k.rem_euclid((up * p) as i64) as usize
}

/// Smallest `2^i 3^j 5^k` not below `n`.
fn fft_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Accumulates `Σ_b amp(b) π(b, R, a)ψ` as FFT convolutions on a grid wide
/// enough that no translation wraps around onto the output grid.
struct Synthesizer {
    n: usize,
    m: usize,
    h: f64,
    origin: Vec3,
    psi: SplineVolume,
    psi_radius: f64,
    acc: Vec<Complex64>,
}

impl Synthesizer {
    fn new(psi: &Volume, lattice: &GroupLattice) -> Self {
        let (n, h) = (psi.n(), psi.h());
        let reach = lattice.largest_reach();
        let mut m = fft_size(n + 2 * (reach / h).ceil() as usize + 2);
        if m % 2 == 1 {
            m = fft_size(m + 1);
        }
        Self {
            n,
            m,
            h,
            origin: psi.origin(),
            psi: psi.spline(),
            psi_radius: psi.half_extent() * 3f64.sqrt() + 2.0 * h,
            acc: vec![Complex64::default(); m * m * m],
        }
    }

    fn add(&mut self, r: &Mat3, scale: &ScaleLevel, amps: &[f64]) {
        let (m, h, a) = (self.m, self.h, scale.a);
        let half = (m / 2) as i64;
        let mut impulses = vec![Complex64::default(); m * m * m];
        for (b, amp) in scale.translations.iter().zip(amps) {
            let idx = |x: f64| ((x / h).round() as i64 + half) as usize;
            impulses[idx(b.x) + m * (idx(b.y) + m * idx(b.z))] += *amp;
        }
        // K(y) = a^{−3/2} ψ(Rᵀy / a) on the periodic grid centered at index 0
        let rt = r.transpose();
        let scale_amp = a.powf(-1.5);
        let cutoff = self.psi_radius * a;
        let psi = &self.psi;
        let mut kernel = vec![Complex64::default(); m * m * m];
        par::for_each_chunk(&mut kernel, m * m, |k, slab| {
            let z = h * fft::signed_index(k, m) as f64;
            for j in 0..m {
                let y = h * fft::signed_index(j, m) as f64;
                for i in 0..m {
                    let x = h * fft::signed_index(i, m) as f64;
                    let p = Vec3::new(x, y, z);
                    if p.norm() > cutoff {
                        continue;
                    }
                    slab[i + m * j] = Complex64::new(scale_amp * psi.sample(&(rt * p / a)), 0.0);
                }
            }
        });
        fft::fft3(&mut impulses, m, Direction::Forward);
        fft::fft3(&mut kernel, m, Direction::Forward);
        for ((acc, x), y) in self.acc.iter_mut().zip(&impulses).zip(&kernel) {
            *acc += x * y;
        }
    }

    fn finish(mut self) -> Volume {
        let (m, n) = (self.m, self.n);
        fft::fft3(&mut self.acc, m, Direction::Inverse);
        let norm = 1.0 / (m * m * m) as f64;
        // output voxel i sits at origin + i h, i.e. at index i + origin/h + m/2 of the wide grid
        let shift = self.origin.map(|o| ((o / self.h).round() as i64 + (m / 2) as i64) as usize);
        let mut data = vec![0.0; n * n * n];
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    data[i + n * (j + n * k)] =
                        self.acc[(i + shift.x) + m * ((j + shift.y) + m * (k + shift.z))].re * norm;
                }
            }
        }
        Volume::from_data(n, self.h, self.origin, data).expect("cropped grid matches the wavelet grid")
    }
}
