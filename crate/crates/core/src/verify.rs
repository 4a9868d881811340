//! Residual checks for the operator identities: Fourier slice theorems,
//! intertwining, unitarity of the multipliers, fiber constancy, the even
//! subspace of the whole-sphere representation, and the group algebra.

use std::f64::consts::PI;

use nalgebra::{Quaternion, UnitQuaternion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::filter::{apply_multiplier, MultiplierSpec};
use crate::grid::{apply_pi, Phantom, Volume};
use crate::group::{rot_axis, unit_normal, CharacterSet, Geometry, GroupElement, LineLabel, PlaneLabel, Vec3};
use crate::invert::apply_pi_hat;
use crate::par;
use crate::xform::{
    BlockSpectra, ColumnSpectra, LineGeometry, PlaneGeometry, PlaneProjector, PlaneSinogram, Sinogram,
    SinogramGeometry, SliceSampler,
};

pub const FOURIER_SLICE_TOL: f64 = 1e-2;
pub const INTERTWINING_TOL: f64 = 5e-2;
/// Smallest residual the character ablation must produce.
pub const ABLATION_MIN: f64 = 0.2;
pub const ISOMETRY_TOL: f64 = 2e-2;
pub const FIBER_TOL: f64 = 1e-6;
pub const EVENNESS_TOL: f64 = 1e-6;
pub const ALGEBRA_TOL: f64 = 1e-10;
pub const HAAR_TOL: f64 = 2e-2;

/// One named residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualEntry {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    /// `residual <= tolerance`
    pub pass: bool,
    pub context: String,
}

impl ResidualEntry {
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64, context: impl Into<String>) -> Self {
        Self { name: name.into(), residual, tolerance, pass: residual <= tolerance, context: context.into() }
    }

    /// A degenerate case (e.g. `0/0`) reported as a pass with a note.
    pub fn informational(name: impl Into<String>, tolerance: f64, note: &str) -> Self {
        Self::new(name, 0.0, tolerance, format!("informational: {note}"))
    }

    /// A check that could not run; fails with the error as context.
    fn failed(name: impl Into<String>, tolerance: f64, err: &crate::Error) -> Self {
        Self { name: name.into(), residual: f64::NAN, tolerance, pass: false, context: err.to_string() }
    }

    /// `CHECK <name> residual=<g> tol=<g> pass=<0|1>`
    pub fn line(&self) -> String {
        format!("CHECK {} residual={:e} tol={:e} pass={}", self.name, self.residual, self.tolerance, self.pass as u8)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub entries: Vec<ResidualEntry>,
}

impl ResidualReport {
    pub fn push(&mut self, e: ResidualEntry) {
        self.entries.push(e);
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn get(&self, name: &str) -> Option<&ResidualEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// Entries whose name starts with `prefix`.
    pub fn matching<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a ResidualEntry> + 'a {
        self.entries.iter().filter(move |e| e.name.starts_with(prefix))
    }

    /// Sorts by check name (stable).
    pub fn sort(&mut self) {
        self.entries.sort_by(|a, b| a.name.cmp(&b.name));
    }

    /// One `CHECK` line per entry.
    pub fn to_text(&self) -> String {
        self.entries.iter().map(|e| e.line() + "\n").collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn relative(num: f64, den: f64) -> Option<f64> {
    if den == 0.0 {
        if num == 0.0 {
            Some(0.0)
        } else {
            None
        }
    } else {
        Some((num / den).sqrt())
    }
}

/// Transform-side spectra (1D/2D DFT of the sampled transform) against the
/// volume-side spectrum on central lines or planes, relative L² over all
/// grid directions and frequencies up to half the smaller Nyquist frequency.
pub fn check_fourier_slice(layout: &SinogramGeometry, v: &Volume) -> Result<ResidualEntry> {
    let s = layout.forward(v)?;
    let volume_side = SliceSampler::new(v);
    let (mut num, mut den) = (Vec::new(), Vec::new());
    let name;
    let band;
    match &s {
        Sinogram::Plane(p) => {
            name = "fourier_slice_plane";
            let cs = ColumnSpectra::new(p, 2);
            band = 0.5 * volume_side.nyquist.min(cs.nyquist);
            let taus: Vec<f64> = (0..=64).map(|k| -band + 2.0 * band * k as f64 / 64.0).collect();
            let angles = p.geom.angles();
            for d in 0..angles.len() {
                let n = angles.normal(d);
                let w = angles.weight(d);
                for &tau in &taus {
                    let a = cs.eval(d, tau);
                    let b = volume_side.at(&(tau * n));
                    num.push(w * (a - b).norm_sqr());
                    den.push(w * b.norm_sqr());
                }
            }
        }
        Sinogram::Line(l) => {
            name = "fourier_slice_line";
            let bs = BlockSpectra::padded(l, 2);
            band = 0.5 * volume_side.nyquist.min(bs.nyquist);
            let freqs: Vec<f64> = (0..=24).map(|k| -band + 2.0 * band * k as f64 / 24.0).collect();
            let angles = l.geom.angles();
            let rows = par::map_range(angles.len(), |d| {
                let (_, e1, e2) = angles.frame(d);
                let w = angles.weight(d);
                let mut acc = (0.0, 0.0);
                for &x in &freqs {
                    for &y in &freqs {
                        if x.hypot(y) > band {
                            continue;
                        }
                        let a: Complex64 = bs.eval(d, x, y);
                        let b = volume_side.at(&(x * e1 + y * e2));
                        acc.0 += w * (a - b).norm_sqr();
                        acc.1 += w * b.norm_sqr();
                    }
                }
                acc
            });
            for (a, b) in rows {
                num.push(a);
                den.push(b);
            }
        }
    }
    let ctx = format!("band={band:.3}");
    Ok(match relative(par::pairwise_sum(&num), par::pairwise_sum(&den)) {
        Some(r) => ResidualEntry::new(name, r, FOURIER_SLICE_TOL, ctx),
        None => ResidualEntry::new(name, f64::INFINITY, FOURIER_SLICE_TOL, "volume-side spectrum vanishes"),
    })
}

/// How the character enters the predicted side of the intertwining identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CharacterMode {
    /// `R π(g) f = χ(g)⁻¹ π̂(g) R f`
    Exact,
    /// `χ` dropped
    Omit,
    /// `χ` replaced by `χ⁻¹`
    Inverted,
}

impl CharacterMode {
    fn factor(self, chi: f64) -> f64 {
        match self {
            CharacterMode::Exact => 1.0 / chi,
            CharacterMode::Omit => 1.0,
            CharacterMode::Inverted => chi,
        }
    }
}

/// `‖R π(g) v − c · π̂(g) R v‖ / ‖R v‖` with `c` from `mode`.
pub fn check_intertwining(
    layout: &SinogramGeometry,
    g: &GroupElement,
    v: &Volume,
    mode: CharacterMode,
) -> Result<ResidualEntry> {
    let s = layout.forward(v)?;
    Ok(intertwining_entries(layout, &s, g, v, &[mode])?.remove(0))
}

/// [`check_intertwining`] for several modes sharing one transform of
/// `π(g) v`; `s` must be the transform of `v` on `layout`.
pub fn intertwining_entries(
    layout: &SinogramGeometry,
    s: &Sinogram,
    g: &GroupElement,
    v: &Volume,
    modes: &[CharacterMode],
) -> Result<Vec<ResidualEntry>> {
    let name = format!("intertwining_{}", layout.kind().name());
    let ctx = describe(g);
    let den = s.norm();
    if den == 0.0 {
        return Ok(modes.iter().map(|_| ResidualEntry::informational(name.clone(), INTERTWINING_TOL, "zero transform")).collect());
    }
    let lhs = layout.forward(&apply_pi(g, v))?;
    let chi = CharacterSet::new(layout.kind()).chi(g);
    let moved = apply_pi_hat(g, s);
    Ok(modes
        .iter()
        .map(|m| {
            let rhs = moved.scaled(m.factor(chi));
            ResidualEntry::new(name.clone(), lhs.minus(&rhs).norm() / den, INTERTWINING_TOL, ctx.clone())
        })
        .collect())
}

fn describe(g: &GroupElement) -> String {
    let b = g.b();
    let angle = UnitQuaternion::from_matrix(&g.rotation_matrix()).angle().to_degrees();
    format!("a={:.3} rot={angle:.1}deg b=({:.3},{:.3},{:.3})", g.a(), b.x, b.y, b.z)
}

/// Twelve elements: dilations `{0.8, 1.25}` × rotations of `15°, 30°, 45°`
/// about the z axis and about `(1, 1, 0)/√2`, each with a translation of
/// length `0.25 · half_extent` in a varying direction.
pub fn intertwining_sweep(half_extent: f64) -> Vec<GroupElement> {
    let axes = [Vec3::z(), Vec3::new(1.0, 1.0, 0.0).normalize()];
    let mut out = Vec::with_capacity(12);
    for axis in &axes {
        for deg in [15.0f64, 30.0, 45.0] {
            for a in [0.8, 1.25] {
                let idx = out.len() as f64;
                let b = 0.25 * half_extent * unit_normal(0.7 * idx, PI / 3.0 + 0.15 * idx);
                out.push(GroupElement::new(b, rot_axis(axis, deg.to_radians()), a).expect("valid sweep element"));
            }
        }
    }
    out
}

/// `|‖𝒥 R v‖ / ‖v‖ − 1|`.
pub fn check_isometry(layout: &SinogramGeometry, v: &Volume) -> Result<ResidualEntry> {
    let name = format!("isometry_{}", layout.kind().name());
    let nv = v.norm();
    if nv == 0.0 {
        return Ok(ResidualEntry::informational(name, ISOMETRY_TOL, "zero volume, ratio 0/0"));
    }
    let s = layout.forward(v)?;
    let ratio = apply_multiplier(&s, &MultiplierSpec::unitarization(layout.kind())).norm() / nv;
    Ok(ResidualEntry::new(name, (ratio - 1.0).abs(), ISOMETRY_TOL, format!("ratio={ratio:.6}")))
}

/// Plane integrals at `(n, t)` and at the same plane written as `(−n, −t)`,
/// each from its own quadrature; max abs difference.
pub fn check_fiber_constancy(v: &Volume, planes: &[(Vec3, f64)]) -> ResidualEntry {
    let direct = PlaneProjector::new(v);
    let flipped = PlaneProjector::new(v);
    let diffs: Vec<f64> = planes
        .iter()
        .map(|(n, t)| {
            let n = n.normalize();
            (direct.plane_integral(&n, *t) - flipped.plane_integral(&(-n), -t)).abs()
        })
        .collect();
    let worst = diffs.iter().cloned().fold(0.0, f64::max);
    ResidualEntry::new("fiber_constancy", worst, FIBER_TOL, format!("planes={}", planes.len()))
}

/// The axis-aligned plane `z = 0.3` followed by `count` random oblique planes.
pub fn fiber_planes(count: usize, seed: u64) -> Vec<(Vec3, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![(Vec3::z(), 0.3)];
    for _ in 0..count {
        out.push((random_unit(&mut rng), rng.gen_range(-2.0..2.0)));
    }
    out
}

/// A function on the whole sphere `S² × ℝ`: the base hemisphere grid and its
/// antipodes are stored separately, so no parity is assumed.
#[derive(Debug, Clone, PartialEq)]
pub struct FullSphereSinogram {
    pub base: PlaneSinogram,
    /// `antipodal.block(d)[k] = F(−n_d, t_k)`
    pub antipodal: PlaneSinogram,
}

impl FullSphereSinogram {
    pub fn from_fn<F>(geom: PlaneGeometry, f: F) -> Self
    where
        F: Fn(&Vec3, f64) -> f64 + Sync + Send,
    {
        let base = PlaneSinogram::from_fn(geom, &f);
        let antipodal = PlaneSinogram::from_fn(geom, |n, t| f(&-n, t));
        Self { base, antipodal }
    }

    /// Bilinear over the doubled direction grid, linear in `t`.
    pub fn sample(&self, u: &Vec3, t: f64) -> f64 {
        self.base
            .geom
            .angles()
            .stencil(u)
            .iter()
            .filter(|e| e.2 != 0.0)
            .map(|&(d, anti, w)| w * if anti { self.antipodal.sample_t(d, t) } else { self.base.sample_t(d, t) })
            .sum()
    }

    /// `π̂′(g)F(n, t) = a^{−1/2} F(Rᵀn, (t − n·b)/a)` for every `n ∈ S²`.
    pub fn apply_pi_hat(&self, g: &GroupElement) -> Self {
        let geom = self.base.geom;
        let angles = geom.angles();
        let rt = g.rotation_matrix().transpose();
        let (b, a) = (g.b(), g.a());
        let gain = a.powf(-0.5);
        let half = |sign: f64| {
            let blocks = par::map_range(angles.len(), |d| {
                let n = sign * angles.normal(d);
                let m = rt * n;
                let nb = n.dot(&b);
                (0..geom.n_t).map(|k| gain * self.sample(&m, (geom.t(k) - nb) / a)).collect::<Vec<_>>()
            });
            PlaneSinogram { geom, data: blocks.concat() }
        };
        Self { base: half(1.0), antipodal: half(-1.0) }
    }

    /// `max |F(−n, −t) − parity · F(n, t)| / max |F|` over the grid.
    pub fn parity_defect(&self, parity: f64) -> f64 {
        let nt = self.base.geom.n_t;
        let mut worst = 0.0f64;
        for d in 0..self.base.geom.angles().len() {
            let (base, anti) = (self.base.block(d), self.antipodal.block(d));
            for k in 0..nt {
                worst = worst.max((anti[nt - 1 - k] - parity * base[k]).abs());
            }
        }
        let scale = self.base.max_abs().max(self.antipodal.max_abs());
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    /// Inner product over `S² × ℝ`.
    pub fn dot(&self, other: &Self) -> f64 {
        self.base.dot(&other.base) + self.antipodal.dot(&other.antipodal)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).max(0.0).sqrt()
    }
}

/// `π̂′(g)` keeps even functions even and odd functions odd, and the two
/// images stay orthogonal. Residual is the largest of the three defects.
pub fn check_evenness_subspace(
    even: &FullSphereSinogram,
    odd: &FullSphereSinogram,
    g: &GroupElement,
) -> ResidualEntry {
    let ge = even.apply_pi_hat(g);
    let go = odd.apply_pi_hat(g);
    let pe = ge.parity_defect(1.0);
    let po = go.parity_defect(-1.0);
    let norms = ge.norm() * go.norm();
    let ip = if norms == 0.0 { 0.0 } else { ge.dot(&go).abs() / norms };
    let ctx = format!("{} even={pe:.2e} odd={po:.2e} inner={ip:.2e}", describe(g));
    ResidualEntry::new("evenness_subspace", pe.max(po).max(ip), EVENNESS_TOL, ctx)
}

/// Default even and odd test functions: plane integrals of `phantom`, and
/// `(n·c) exp(−π(t − n·c′)²)`.
pub fn parity_pair(geom: PlaneGeometry, phantom: &Phantom) -> (FullSphereSinogram, FullSphereSinogram) {
    let even = FullSphereSinogram::from_fn(geom, |n, t| phantom.plane_integral(n, t));
    let c = Vec3::new(0.6, -0.3, 0.8);
    let c2 = Vec3::new(0.2, 0.4, -0.3);
    let odd = FullSphereSinogram::from_fn(geom, |n, t| n.dot(&c) * (-PI * (t - n.dot(&c2)).powi(2)).exp());
    (even, odd)
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal));
        let n = v.norm();
        if n > 1e-6 {
            return v / n;
        }
    }
}

/// Haar-uniform rotation from a normalized Gaussian quaternion.
fn random_rotation(rng: &mut ChaCha8Rng) -> crate::Mat3 {
    let q = Quaternion::new(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    );
    UnitQuaternion::from_quaternion(q).to_rotation_matrix().into_inner()
}

fn random_element(rng: &mut ChaCha8Rng) -> GroupElement {
    let b = Vec3::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    let a = rng.gen_range(-1.0f64..1.0).exp();
    GroupElement::new(b, random_rotation(rng), a).expect("random element is valid")
}

fn random_plane(rng: &mut ChaCha8Rng) -> PlaneLabel {
    PlaneLabel::new(rng.gen_range(0.0..PI), rng.gen_range(0.01..PI - 0.01), rng.gen_range(-2.0..2.0))
        .expect("inside the square")
}

fn random_line(rng: &mut ChaCha8Rng) -> LineLabel {
    let (theta, phi) = (rng.gen_range(0.0..PI), rng.gen_range(0.01..PI - 0.01));
    let n = unit_normal(theta, phi);
    let p = Vec3::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    LineLabel::new(theta, phi, p - n * n.dot(&p)).expect("orthogonal offset")
}

/// Distance between plane labels as sets, i.e. up to `(n, t) ~ (−n, −t)`.
fn plane_distance(x: &PlaneLabel, y: &PlaneLabel) -> f64 {
    let (nx, ny) = (x.normal(), y.normal());
    let same = (nx - ny).amax().max((x.t - y.t).abs());
    let flip = (nx + ny).amax().max((x.t + y.t).abs());
    same.min(flip)
}

/// Distance between line labels as sets (direction up to sign).
fn line_distance(x: &LineLabel, y: &LineLabel) -> f64 {
    let (nx, ny) = (x.direction(), y.direction());
    (nx - ny).amax().min((nx + ny).amax()).max((x.t_perp - y.t_perp).amax())
}

/// Group axioms, character homomorphisms, compatibility of the actions on
/// points, planes and lines with composition, and the section identities,
/// each as the largest defect over `samples` random draws.
pub fn check_group_algebra(samples: usize, seed: u64) -> Vec<ResidualEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = GroupElement::identity();
    let (mut axioms, mut chars, mut actions, mut sections) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let sets = [CharacterSet::new(Geometry::Plane), CharacterSet::new(Geometry::Line)];
    for _ in 0..samples {
        let (g, h, k) = (random_element(&mut rng), random_element(&mut rng), random_element(&mut rng));
        axioms = axioms
            .max(g.compose(&h).compose(&k).distance(&g.compose(&h.compose(&k))))
            .max(g.compose(&e).distance(&g))
            .max(e.compose(&g).distance(&g))
            .max(g.compose(&g.inverse()).distance(&e))
            .max(g.inverse().compose(&g).distance(&e));

        let gh = g.compose(&h);
        for cs in &sets {
            let fns: [fn(&CharacterSet, &GroupElement) -> f64; 5] =
                [CharacterSet::alpha, CharacterSet::beta, CharacterSet::gamma, CharacterSet::chi, CharacterSet::zeta];
            for f in fns {
                let prod = f(cs, &g) * f(cs, &h);
                chars = chars.max((f(cs, &gh) - prod).abs() / prod);
            }
        }

        let x = Vec3::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let xi = random_plane(&mut rng);
        let ell = random_line(&mut rng);
        actions = actions
            .max((gh.act_point(&x) - g.act_point(&h.act_point(&x))).amax())
            .max((g.act_point_inverse(&g.act_point(&x)) - x).amax())
            .max(plane_distance(&gh.act_plane(&xi), &g.act_plane(&h.act_plane(&xi))))
            .max(line_distance(&gh.act_line(&ell), &g.act_line(&h.act_line(&ell))));
        // the labelled image must contain the images of points of the original
        let img = g.act_plane(&xi);
        let img_line = g.act_line(&ell);
        for (u, w) in [(0.5, -1.0), (-1.5, 0.7)] {
            let p = g.act_point(&xi.point(u, w));
            actions = actions.max((img.normal().dot(&p) - img.t).abs());
            let q = g.act_point(&ell.point(u));
            let off = q - img_line.t_perp;
            let dir = img_line.direction();
            actions = actions.max((off - dir * dir.dot(&off)).amax());
        }

        sections = sections
            .max(plane_distance(&xi.section().act_plane(&PlaneLabel::origin()), &xi))
            .max(line_distance(&ell.section().act_line(&LineLabel::origin()), &ell));
        let p = xi.section().act_point(&Vec3::new(0.3, -0.8, 0.0));
        sections = sections.max((xi.normal().dot(&p) - xi.t).abs());
        let q = ell.section().act_point(&Vec3::new(0.0, 0.0, 1.7));
        sections = sections.max((q - ell.point(1.7)).amax());
    }
    let ctx = format!("samples={samples}");
    vec![
        ResidualEntry::new("group_axioms", axioms, ALGEBRA_TOL, ctx.clone()),
        ResidualEntry::new("character_homomorphism", chars, ALGEBRA_TOL, ctx.clone()),
        ResidualEntry::new("action_compatibility", actions, ALGEBRA_TOL, ctx.clone()),
        ResidualEntry::new("section_properties", sections, ALGEBRA_TOL, ctx),
    ]
}

/// Monte-Carlo check that `a⁻⁴ db dR da` is left invariant:
/// `∫ f(hg) dμ(g) = ∫ f(g) dμ(g)` for a smooth, decaying `f` and a few
/// fixed `h`. Both integrals use the same importance samples; the residual
/// is the largest relative difference.
pub fn check_haar_invariance(samples: usize, seed: u64) -> ResidualEntry {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = |g: &GroupElement| {
        let la = g.a().ln();
        (-0.5 * g.b().norm_squared()).exp() * (-2.0 * la * la).exp() * (2.0 + g.rotation_matrix()[(0, 0)])
    };
    let sb = 1.5;
    let (mu, sl) = (-0.75, 0.8);
    let nb = Normal::new(0.0, sb).expect("positive spread");
    let nl = Normal::new(mu, sl).expect("positive spread");
    let hs = [
        GroupElement::new(Vec3::new(0.5, -0.3, 0.2), rot_axis(&Vec3::new(1.0, 2.0, 0.5).normalize(), 0.7), 1.3),
        GroupElement::new(Vec3::new(-0.4, 0.1, 0.6), rot_axis(&Vec3::x(), 2.0), 0.8),
        GroupElement::new(Vec3::zeros(), rot_axis(&Vec3::z(), 1.1), 1.0),
    ]
    .map(|h| h.expect("valid element"));
    let mut plain = Vec::with_capacity(samples);
    let mut shifted: Vec<Vec<f64>> = vec![Vec::with_capacity(samples); hs.len()];
    for _ in 0..samples {
        let b = Vec3::new(nb.sample(&mut rng), nb.sample(&mut rng), nb.sample(&mut rng));
        let la: f64 = nl.sample(&mut rng);
        let g = GroupElement::new(b, random_rotation(&mut rng), la.exp()).expect("valid element");
        // Haar density in (b, ln a) is a⁻³; divide by the proposal density
        let pb = (-0.5 * b.norm_squared() / (sb * sb)).exp() / (2.0 * PI * sb * sb).powf(1.5);
        let pl = (-0.5 * ((la - mu) / sl).powi(2)).exp() / ((2.0 * PI).sqrt() * sl);
        let w = (-3.0 * la).exp() / (pb * pl);
        plain.push(w * f(&g));
        for (h, acc) in hs.iter().zip(shifted.iter_mut()) {
            acc.push(w * f(&h.compose(&g)));
        }
    }
    let base = par::pairwise_sum(&plain) / samples as f64;
    let exact = (2.0 * PI).powf(1.5) * (PI / 2.0).sqrt() * (9.0f64 / 8.0).exp() * 2.0;
    let worst = shifted
        .iter()
        .map(|acc| ((par::pairwise_sum(acc) / samples as f64 - base) / base).abs())
        .fold(0.0, f64::max);
    ResidualEntry::new(
        "haar_left_invariance",
        worst,
        HAAR_TOL,
        format!("samples={samples} integral={base:.5} closed_form={exact:.5}"),
    )
}

/// Checks selectable in [`VerifyConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    FourierSlice,
    Intertwining,
    Isometry,
    FiberConstancy,
    Evenness,
    GroupAlgebra,
    Haar,
}

impl Check {
    pub const ALL: [Check; 7] = [
        Check::FourierSlice,
        Check::Intertwining,
        Check::Isometry,
        Check::FiberConstancy,
        Check::Evenness,
        Check::GroupAlgebra,
        Check::Haar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::FourierSlice => "fourier-slice",
            Check::Intertwining => "intertwining",
            Check::Isometry => "isometry",
            Check::FiberConstancy => "fiber-constancy",
            Check::Evenness => "evenness",
            Check::GroupAlgebra => "group-algebra",
            Check::Haar => "haar",
        }
    }
}

impl std::str::FromStr for Check {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| crate::Error::Format(format!("unknown check `{s}`")))
    }
}

/// Everything [`run_all`] needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// grid of the phantom volume
    pub n: usize,
    pub h: f64,
    pub phantom: Phantom,
    pub plane: PlaneGeometry,
    pub line: LineGeometry,
    /// coarser grid for the X-ray side of the intertwining sweep
    pub line_n: usize,
    pub line_h: f64,
    pub checks: Vec<Check>,
    /// use the inverted character in the intertwining sweep (negative control)
    pub ablate_chi: bool,
    /// random draws for the algebra checks
    pub algebra_samples: usize,
    /// Monte-Carlo samples for the Haar check
    pub haar_samples: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            n: 64,
            h: 0.15,
            phantom: Phantom::two_gaussians(),
            plane: PlaneGeometry { n_theta: 32, n_phi: 32, n_t: 129, t_max: 6.0 },
            line: LineGeometry { n_theta: 24, n_phi: 24, n_u: 73, uv_max: 5.4 },
            line_n: 48,
            line_h: 0.2,
            checks: Check::ALL.to_vec(),
            ablate_chi: false,
            algebra_samples: 200,
            haar_samples: 400_000,
        }
    }
}

/// Runs every configured check. Failures to evaluate a check become failing
/// entries; the report is sorted by check name.
pub fn run_all(config: &VerifyConfig, seed: u64) -> ResidualReport {
    run_on(config, seed, None)
}

/// As [`run_all`], with `input` (when given) replacing the sampled phantom in
/// every volume-based check.
pub fn run_on(config: &VerifyConfig, seed: u64, input: Option<&Volume>) -> ResidualReport {
    let mut report = ResidualReport::default();
    if config.checks.is_empty() {
        return report;
    }
    let mut sample = |name: &str, n: usize, h: f64| match input {
        Some(v) => Some(v.clone()),
        None => match config.phantom.sample(n, h) {
            Ok(v) => Some(v),
            Err(err) => {
                report.push(ResidualEntry::failed(name, 0.0, &err));
                None
            }
        },
    };
    let volume = sample("phantom", config.n, config.h);
    let line_volume = sample("phantom_line", config.line_n, config.line_h);
    let layouts = [SinogramGeometry::Plane(config.plane), SinogramGeometry::Line(config.line)];
    let push = |report: &mut ResidualReport, name: &str, tol: f64, r: Result<ResidualEntry>| match r {
        Ok(e) => report.push(e),
        Err(err) => report.push(ResidualEntry::failed(name, tol, &err)),
    };
    for check in &config.checks {
        match check {
            Check::FourierSlice => {
                for layout in layouts.iter().filter(|_| volume.is_some()) {
                    let name = format!("fourier_slice_{}", layout.kind().name());
                    push(&mut report, &name, FOURIER_SLICE_TOL, check_fourier_slice(layout, volume.as_ref().unwrap()));
                }
            }
            Check::Isometry => {
                for layout in layouts.iter().filter(|_| volume.is_some()) {
                    let name = format!("isometry_{}", layout.kind().name());
                    push(&mut report, &name, ISOMETRY_TOL, check_isometry(layout, volume.as_ref().unwrap()));
                }
            }
            Check::Intertwining => {
                for layout in &layouts {
                    let v = match layout {
                        SinogramGeometry::Plane(_) => volume.as_ref(),
                        SinogramGeometry::Line(_) => line_volume.as_ref(),
                    };
                    let Some(v) = v else { continue };
                    let kind = layout.kind();
                    let mode = if config.ablate_chi { CharacterMode::Inverted } else { CharacterMode::Exact };
                    let prefix = format!("intertwining_{}", kind.name());
                    let s = match layout.forward(v) {
                        Ok(s) => s,
                        Err(err) => {
                            report.push(ResidualEntry::failed(prefix, INTERTWINING_TOL, &err));
                            continue;
                        }
                    };
                    for (i, g) in intertwining_sweep(v.half_extent()).iter().enumerate() {
                        let name = format!("{prefix}_{i:02}");
                        let r = intertwining_entries(layout, &s, g, v, &[mode]).map(|mut e| {
                            let mut e = e.remove(0);
                            e.name = name.clone();
                            e
                        });
                        push(&mut report, &name, INTERTWINING_TOL, r);
                    }
                }
            }
            Check::FiberConstancy => {
                if let Some(v) = &volume {
                    report.push(check_fiber_constancy(v, &fiber_planes(16, seed)));
                }
            }
            Check::Evenness => {
                let geom = PlaneGeometry { n_theta: 16, n_phi: 16, n_t: 97, t_max: 6.0 };
                let (even, odd) = parity_pair(geom, &config.phantom);
                for (i, g) in evenness_elements().iter().enumerate() {
                    let mut e = check_evenness_subspace(&even, &odd, g);
                    e.name = format!("evenness_subspace_{i}");
                    report.push(e);
                }
            }
            Check::GroupAlgebra => {
                for e in check_group_algebra(config.algebra_samples, seed) {
                    report.push(e);
                }
            }
            Check::Haar => report.push(check_haar_invariance(config.haar_samples, seed)),
        }
    }
    report.sort();
    report
}

/// A pure dilation and a general element.
pub fn evenness_elements() -> [GroupElement; 2] {
    [
        GroupElement::dilation(1.25),
        GroupElement::new(Vec3::new(0.4, -0.2, 0.3), rot_axis(&Vec3::new(1.0, 1.0, 0.0).normalize(), 0.5), 0.8)
            .expect("valid element"),
    ]
}
