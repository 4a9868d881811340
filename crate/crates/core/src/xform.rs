//! Forward plane-integral and X-ray transforms, their back-projections, and
//! the Fourier-domain evaluation paths used to cross-check them.
//!
//! Directions are sampled on the midpoint grid `θ_i = (i + ½)π/n_θ`,
//! `φ_j = (j + ½)π/n_φ`, which covers one hemisphere; the opposite hemisphere
//! is reached through the antipodal identification `(n, t) ~ (−n, −t)`.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{self, Direction};
use crate::grid::{Spectrum3D, SpectrumSampler, Volume};
use crate::group::{canonicalize_unit, rotation_from_angles, unit_normal, Geometry, Vec3};
use crate::interp;
use crate::par;

/// Relative threshold below which voxels do not count towards the support.
pub const SUPPORT_THRESHOLD: f64 = 1e-9;

/// The `(θ, φ)` midpoint lattice shared by both sinogram kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AngleGrid {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl AngleGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta == 0 || n_phi == 0 {
            return Err(Error::InvalidGrid("angle grids need at least one sample".into()));
        }
        Ok(Self { n_theta, n_phi })
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn d_theta(&self) -> f64 {
        PI / self.n_theta as f64
    }

    pub fn d_phi(&self) -> f64 {
        PI / self.n_phi as f64
    }

    pub fn theta(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.d_theta()
    }

    pub fn phi(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.d_phi()
    }

    /// `(θ, φ)` of flat direction index `d = i·n_φ + j`.
    pub fn angles(&self, d: usize) -> (f64, f64) {
        (self.theta(d / self.n_phi), self.phi(d % self.n_phi))
    }

    pub fn normal(&self, d: usize) -> Vec3 {
        let (t, p) = self.angles(d);
        unit_normal(t, p)
    }

    /// Quadrature weight `sin φ_j Δθ Δφ` of direction `d`.
    pub fn weight(&self, d: usize) -> f64 {
        self.phi(d % self.n_phi).sin() * self.d_theta() * self.d_phi()
    }

    /// Normal and in-plane frame `(n, R e₁, R e₂)` with `R = R_{θ,φ}`.
    pub fn frame(&self, d: usize) -> (Vec3, Vec3, Vec3) {
        let (t, p) = self.angles(d);
        let r = rotation_from_angles(t, p);
        (r.column(2).into(), r.column(0).into(), r.column(1).into())
    }

    /// Bilinear stencil for an arbitrary unit vector `u`.
    ///
    /// Works on the doubled grid that covers the whole sphere: column `i + n_θ`
    /// at row `j` is the antipode of `(i, n_φ − 1 − j)`, so it returns the base
    /// direction together with a flag telling the caller to negate `t`.
    /// Across the poles the grid continues on the opposite meridian.
    pub fn stencil(&self, u: &Vec3) -> [(usize, bool, f64); 4] {
        let (c0, fx, r0, fy) = self.cell(u);
        let mut out = [(0, false, 0.0); 4];
        for (slot, (dc, dr, w)) in [
            (0, 0, (1.0 - fx) * (1.0 - fy)),
            (1, 0, fx * (1.0 - fy)),
            (0, 1, (1.0 - fx) * fy),
            (1, 1, fx * fy),
        ]
        .into_iter()
        .enumerate()
        {
            let (d, flip) = self.resolve(c0 + dc, r0 + dr);
            out[slot] = (d, flip, w);
        }
        out
    }

    /// Catmull-Rom (4 × 4) version of [`stencil`](Self::stencil).
    pub fn stencil_cubic(&self, u: &Vec3) -> [(usize, bool, f64); 16] {
        let (c0, fx, r0, fy) = self.cell(u);
        let wx = interp::catmull_rom_weights(fx);
        let wy = interp::catmull_rom_weights(fy);
        let mut out = [(0, false, 0.0); 16];
        for (a, wa) in wx.iter().enumerate() {
            for (b, wb) in wy.iter().enumerate() {
                let (d, flip) = self.resolve(c0 - 1 + a as isize, r0 - 1 + b as isize);
                out[4 * a + b] = (d, flip, wa * wb);
            }
        }
        out
    }

    /// Lower-left node and fractional offsets of `u` on the doubled grid.
    fn cell(&self, u: &Vec3) -> (isize, f64, isize, f64) {
        let mut theta = u.y.atan2(u.x);
        if theta < 0.0 {
            theta += 2.0 * PI;
        }
        let phi = u.z.clamp(-1.0, 1.0).acos();
        let (c0, fx) = interp::split_index(theta / self.d_theta() - 0.5);
        let (r0, fy) = interp::split_index(phi / self.d_phi() - 0.5);
        (c0, fx, r0, fy)
    }

    /// Flat base index and antipode flag of doubled-grid node `(c, r)`; rows
    /// past a pole reflect onto the opposite meridian.
    fn resolve(&self, c: isize, r: isize) -> (usize, bool) {
        let nt = self.n_theta as isize;
        let np = self.n_phi as isize;
        let (mut c, mut r) = (c, r);
        if r < 0 {
            c += nt;
            r = -1 - r;
        } else if r >= np {
            c += nt;
            r = 2 * np - 1 - r;
        }
        let c = c.rem_euclid(2 * nt);
        let r = r.clamp(0, np - 1);
        if c < nt {
            ((c * np + r) as usize, false)
        } else {
            (((c - nt) * np + (np - 1 - r)) as usize, true)
        }
    }
}

/// Sampling of the plane label space `[0,π)²_* × [−t_max, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneGeometry {
    pub n_theta: usize,
    pub n_phi: usize,
    pub n_t: usize,
    pub t_max: f64,
}

impl PlaneGeometry {
    pub fn new(n_theta: usize, n_phi: usize, n_t: usize, t_max: f64) -> Result<Self> {
        AngleGrid::new(n_theta, n_phi)?;
        if n_t < 2 || !(t_max > 0.0) {
            return Err(Error::InvalidGrid(format!("need n_t >= 2 and t_max > 0, got {n_t}, {t_max}")));
        }
        Ok(Self { n_theta, n_phi, n_t, t_max })
    }

    pub fn angles(&self) -> AngleGrid {
        AngleGrid { n_theta: self.n_theta, n_phi: self.n_phi }
    }

    pub fn dt(&self) -> f64 {
        2.0 * self.t_max / (self.n_t - 1) as f64
    }

    pub fn t(&self, k: usize) -> f64 {
        -self.t_max + k as f64 * self.dt()
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi * self.n_t
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Sampling of the line label space: directions × a `n_u × n_u` lattice on
/// `[−uv_max, uv_max]²` in the frame `(R_{θ,φ}e₁, R_{θ,φ}e₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineGeometry {
    pub n_theta: usize,
    pub n_phi: usize,
    pub n_u: usize,
    pub uv_max: f64,
}

impl LineGeometry {
    pub fn new(n_theta: usize, n_phi: usize, n_u: usize, uv_max: f64) -> Result<Self> {
        AngleGrid::new(n_theta, n_phi)?;
        if n_u < 2 || !(uv_max > 0.0) {
            return Err(Error::InvalidGrid(format!("need n_u >= 2 and uv_max > 0, got {n_u}, {uv_max}")));
        }
        Ok(Self { n_theta, n_phi, n_u, uv_max })
    }

    pub fn angles(&self) -> AngleGrid {
        AngleGrid { n_theta: self.n_theta, n_phi: self.n_phi }
    }

    pub fn du(&self) -> f64 {
        2.0 * self.uv_max / (self.n_u - 1) as f64
    }

    pub fn u(&self, m: usize) -> f64 {
        -self.uv_max + m as f64 * self.du()
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi * self.n_u * self.n_u
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Either sampling layout, tagged by geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SinogramGeometry {
    Plane(PlaneGeometry),
    Line(LineGeometry),
}

impl SinogramGeometry {
    pub fn kind(&self) -> Geometry {
        match self {
            SinogramGeometry::Plane(_) => Geometry::Plane,
            SinogramGeometry::Line(_) => Geometry::Line,
        }
    }

    /// [`radon_plane`] or [`xray`] of `v`.
    pub fn forward(&self, v: &Volume) -> Result<Sinogram> {
        Ok(match self {
            SinogramGeometry::Plane(g) => Sinogram::Plane(radon_plane(v, g)?),
            SinogramGeometry::Line(g) => Sinogram::Line(xray(v, g)?),
        })
    }
}

/// Samples over `(θ_i, φ_j, t_k)`, `t` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneSinogram {
    pub geom: PlaneGeometry,
    pub data: Vec<f64>,
}

/// Samples over `(θ_i, φ_j, u_m, v_n)`, `v` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSinogram {
    pub geom: LineGeometry,
    pub data: Vec<f64>,
}

macro_rules! sinogram_common {
    ($ty:ty, $geom:ty, $block:expr, $cell:expr) => {
        impl $ty {
            pub fn zeros(geom: $geom) -> Self {
                Self { geom, data: vec![0.0; geom.len()] }
            }

            pub fn from_data(geom: $geom, data: Vec<f64>) -> Result<Self> {
                if data.len() != geom.len() {
                    return Err(Error::InvalidGrid(format!(
                        "expected {} samples, got {}",
                        geom.len(),
                        data.len()
                    )));
                }
                Ok(Self { geom, data })
            }

            /// Number of samples per direction.
            pub fn block_len(&self) -> usize {
                let f: fn(&$geom) -> usize = $block;
                f(&self.geom)
            }

            /// Samples belonging to direction `d`.
            pub fn block(&self, d: usize) -> &[f64] {
                let b = self.block_len();
                &self.data[d * b..(d + 1) * b]
            }

            pub fn block_mut(&mut self, d: usize) -> &mut [f64] {
                let b = self.block_len();
                &mut self.data[d * b..(d + 1) * b]
            }

            /// Inner product with the measure `sin φ dθ dφ` times the offset measure.
            pub fn dot(&self, other: &Self) -> f64 {
                assert_eq!(self.geom, other.geom);
                let angles = self.geom.angles();
                let f: fn(&$geom) -> f64 = $cell;
                let cell = f(&self.geom);
                let per_dir: Vec<f64> = (0..angles.len())
                    .map(|d| {
                        let prod: Vec<f64> =
                            self.block(d).iter().zip(other.block(d)).map(|(a, b)| a * b).collect();
                        angles.weight(d) * par::pairwise_sum(&prod)
                    })
                    .collect();
                cell * par::pairwise_sum(&per_dir)
            }

            pub fn norm(&self) -> f64 {
                self.dot(self).max(0.0).sqrt()
            }

            pub fn max_abs(&self) -> f64 {
                self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
            }

            pub fn scaled(&self, c: f64) -> Self {
                Self { geom: self.geom, data: self.data.iter().map(|v| c * v).collect() }
            }

            /// `self − other`.
            pub fn minus(&self, other: &Self) -> Self {
                assert_eq!(self.geom, other.geom);
                Self {
                    geom: self.geom,
                    data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
                }
            }
        }
    };
}

sinogram_common!(PlaneSinogram, PlaneGeometry, |g| g.n_t, |g| g.dt());
sinogram_common!(LineSinogram, LineGeometry, |g| g.n_u * g.n_u, |g| g.du() * g.du());

impl PlaneSinogram {
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.geom.n_phi + j) * self.geom.n_t + k
    }

    /// Builds a sinogram from a function of `(n, t)`.
    pub fn from_fn<F>(geom: PlaneGeometry, f: F) -> Self
    where
        F: Fn(&Vec3, f64) -> f64 + Sync + Send,
    {
        let angles = geom.angles();
        let blocks = par::map_range(angles.len(), |d| {
            let n = angles.normal(d);
            (0..geom.n_t).map(|k| f(&n, geom.t(k))).collect::<Vec<_>>()
        });
        Self { geom, data: blocks.concat() }
    }

    /// Linear interpolation in `t` along direction `d`, zero outside.
    pub fn sample_t(&self, d: usize, t: f64) -> f64 {
        interp::linear_uniform(self.block(d), -self.geom.t_max, self.geom.dt(), t)
    }

    /// Catmull-Rom interpolation in `t` along direction `d`, zero outside.
    pub fn sample_t_cubic(&self, d: usize, t: f64) -> f64 {
        interp::cubic_uniform(self.block(d), -self.geom.t_max, self.geom.dt(), t)
    }

    /// Value at an arbitrary unit normal, Catmull-Rom over directions and in `t`.
    pub fn sample_cubic(&self, u: &Vec3, t: f64) -> f64 {
        self.geom
            .angles()
            .stencil_cubic(u)
            .iter()
            .map(|&(d, flip, w)| if w == 0.0 { 0.0 } else { w * self.sample_t_cubic(d, if flip { -t } else { t }) })
            .sum()
    }

    /// Value at an arbitrary unit normal (bilinear over directions, linear in `t`).
    pub fn sample(&self, u: &Vec3, t: f64) -> f64 {
        self.geom
            .angles()
            .stencil(u)
            .iter()
            .map(|&(d, flip, w)| if w == 0.0 { 0.0 } else { w * self.sample_t(d, if flip { -t } else { t }) })
            .sum()
    }
}

impl LineSinogram {
    pub fn index(&self, i: usize, j: usize, m: usize, n: usize) -> usize {
        ((i * self.geom.n_phi + j) * self.geom.n_u + m) * self.geom.n_u + n
    }

    /// Builds a sinogram from a function of `(direction, t_perp)`.
    pub fn from_fn<F>(geom: LineGeometry, f: F) -> Self
    where
        F: Fn(&Vec3, &Vec3) -> f64 + Sync + Send,
    {
        let angles = geom.angles();
        let nu = geom.n_u;
        let blocks = par::map_range(angles.len(), |d| {
            let (n, e1, e2) = angles.frame(d);
            let mut out = Vec::with_capacity(nu * nu);
            for m in 0..nu {
                for k in 0..nu {
                    out.push(f(&n, &(geom.u(m) * e1 + geom.u(k) * e2)));
                }
            }
            out
        });
        Self { geom, data: blocks.concat() }
    }

    /// Bilinear interpolation in `(u, v)` along direction `d`, zero outside.
    pub fn sample_uv(&self, d: usize, u: f64, v: f64) -> f64 {
        interp::bilinear_uniform(self.block(d), self.geom.n_u, -self.geom.uv_max, self.geom.du(), u, v)
    }

    /// Catmull-Rom interpolation in `(u, v)` along direction `d`, zero outside.
    pub fn sample_uv_cubic(&self, d: usize, u: f64, v: f64) -> f64 {
        interp::cubic_uniform_2d(self.block(d), self.geom.n_u, -self.geom.uv_max, self.geom.du(), u, v)
    }
}

/// Either kind of sinogram.
#[derive(Debug, Clone, PartialEq)]
pub enum Sinogram {
    Plane(PlaneSinogram),
    Line(LineSinogram),
}

impl Sinogram {
    pub fn geometry(&self) -> Geometry {
        match self {
            Sinogram::Plane(_) => Geometry::Plane,
            Sinogram::Line(_) => Geometry::Line,
        }
    }

    pub fn layout(&self) -> SinogramGeometry {
        match self {
            Sinogram::Plane(p) => SinogramGeometry::Plane(p.geom),
            Sinogram::Line(l) => SinogramGeometry::Line(l.geom),
        }
    }

    pub fn data(&self) -> &[f64] {
        match self {
            Sinogram::Plane(p) => &p.data,
            Sinogram::Line(l) => &l.data,
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            Sinogram::Plane(p) => p.norm(),
            Sinogram::Line(l) => l.norm(),
        }
    }

    pub fn dot(&self, other: &Sinogram) -> f64 {
        match (self, other) {
            (Sinogram::Plane(a), Sinogram::Plane(b)) => a.dot(b),
            (Sinogram::Line(a), Sinogram::Line(b)) => a.dot(b),
            _ => panic!("sinogram kinds differ"),
        }
    }

    pub fn scaled(&self, c: f64) -> Sinogram {
        match self {
            Sinogram::Plane(p) => Sinogram::Plane(p.scaled(c)),
            Sinogram::Line(l) => Sinogram::Line(l.scaled(c)),
        }
    }

    pub fn minus(&self, other: &Sinogram) -> Sinogram {
        match (self, other) {
            (Sinogram::Plane(a), Sinogram::Plane(b)) => Sinogram::Plane(a.minus(b)),
            (Sinogram::Line(a), Sinogram::Line(b)) => Sinogram::Line(a.minus(b)),
            _ => panic!("sinogram kinds differ"),
        }
    }
}

impl From<PlaneSinogram> for Sinogram {
    fn from(s: PlaneSinogram) -> Self {
        Sinogram::Plane(s)
    }
}

impl From<LineSinogram> for Sinogram {
    fn from(s: LineSinogram) -> Self {
        Sinogram::Line(s)
    }
}

fn check_support(v: &Volume, reach: f64, what: &str) -> Result<()> {
    let r = v.support_radius(SUPPORT_THRESHOLD);
    if r > reach {
        return Err(Error::GeometryMismatch(format!(
            "volume support reaches radius {r:.3} but the {what} range only covers {reach:.3}"
        )));
    }
    Ok(())
}

/// Plane integrals of a volume, reusable across many planes.
///
/// Each plane is swept along the grid axis closest to its normal: for every
/// grid column of the two remaining axes the integrand is read off a 1D cubic
/// B-spline along the dominant axis, and the columns are summed with area
/// element `h² / |n_k|`.
pub struct PlaneProjector {
    n: usize,
    h: f64,
    origin: Vec3,
    coef: [Vec<f64>; 3],
}

impl PlaneProjector {
    pub fn new(v: &Volume) -> Self {
        let coef = [v.spline_coefficients(&[0]), v.spline_coefficients(&[1]), v.spline_coefficients(&[2])];
        Self { n: v.n(), h: v.h(), origin: v.origin(), coef }
    }

    /// Plane integrals for normal `u` (unit, any orientation) at `t_k = t0 + k dt`.
    pub fn project(&self, u: &Vec3, t0: f64, dt: f64, nt: usize) -> Vec<f64> {
        let n = self.n;
        let h = self.h;
        let k = u.iamax();
        let (a, b) = match k {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let strides = [1usize, n, n * n];
        let nk = u[k];
        let coef = &self.coef[k];
        let mut out = vec![0.0; nt];
        let mut line = vec![0.0; n];
        let nf = n as isize;
        // idx(m) = (t0 + m dt − base) / (nk h) − o_k / h
        let step = dt / (nk * h);
        for ib in 0..n {
            let xb = self.origin[b] + h * ib as f64;
            for ia in 0..n {
                let xa = self.origin[a] + h * ia as f64;
                let base = u[a] * xa + u[b] * xb;
                let start = ia * strides[a] + ib * strides[b];
                let mut any = false;
                for (c, slot) in line.iter_mut().enumerate() {
                    *slot = coef[start + c * strides[k]];
                    any |= *slot != 0.0;
                }
                if !any {
                    continue;
                }
                let idx0 = (t0 - base) / (nk * h) - self.origin[k] / h;
                // indices with support: idx in (−2, n + 1)
                let (lo, hi) = {
                    let m1 = (-2.0 - idx0) / step;
                    let m2 = ((n + 1) as f64 - idx0) / step;
                    let (lo, hi) = if m1 < m2 { (m1, m2) } else { (m2, m1) };
                    (lo.ceil().max(0.0) as usize, (hi.floor() as isize).min(nt as isize - 1))
                };
                if hi < lo as isize {
                    continue;
                }
                for (m, o) in out.iter_mut().enumerate().take(hi as usize + 1).skip(lo) {
                    let idx = idx0 + m as f64 * step;
                    let (i0, fr) = interp::split_index(idx);
                    let w = interp::bspline_weights(fr);
                    let mut acc = 0.0;
                    for (d, wd) in w.iter().enumerate() {
                        let i = i0 - 1 + d as isize;
                        if i >= 0 && i < nf {
                            acc += wd * line[i as usize];
                        }
                    }
                    *o += acc;
                }
            }
        }
        let scale = h * h / nk.abs();
        for o in out.iter_mut() {
            *o *= scale;
        }
        out
    }

    /// A single plane integral `∫_{u·x = t} f`.
    pub fn plane_integral(&self, u: &Vec3, t: f64) -> f64 {
        self.project(u, t, 1.0, 1)[0]
    }
}

/// Line integrals of a volume: each line is stepped slice by slice along the
/// grid axis closest to its direction, with bicubic B-spline interpolation
/// inside each slice and length element `h / |n_k|`.
pub struct LineProjector {
    n: usize,
    h: f64,
    origin: Vec3,
    coef: [Vec<f64>; 3],
}

impl LineProjector {
    pub fn new(v: &Volume) -> Self {
        let coef = [
            v.spline_coefficients(&[1, 2]),
            v.spline_coefficients(&[0, 2]),
            v.spline_coefficients(&[0, 1]),
        ];
        Self { n: v.n(), h: v.h(), origin: v.origin(), coef }
    }

    /// `∫ f(p + s·dir) ds` for unit `dir`.
    pub fn line_integral(&self, dir: &Vec3, p: &Vec3) -> f64 {
        let n = self.n;
        let h = self.h;
        let k = dir.iamax();
        let (a, b) = match k {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let strides = [1usize, n, n * n];
        let nk = dir[k];
        let coef = &self.coef[k];
        let nf = n as isize;
        // in-slice coordinates as functions of the slice index
        let ca0 = (p[a] + dir[a] * (self.origin[k] - p[k]) / nk - self.origin[a]) / h;
        let cb0 = (p[b] + dir[b] * (self.origin[k] - p[k]) / nk - self.origin[b]) / h;
        let sa = dir[a] / nk;
        let sb = dir[b] / nk;
        let mut acc = 0.0;
        for ik in 0..n {
            let ca = ca0 + sa * ik as f64;
            let cb = cb0 + sb * ik as f64;
            if ca <= -2.0 || cb <= -2.0 || ca >= (n + 1) as f64 || cb >= (n + 1) as f64 {
                continue;
            }
            let (ia0, fa) = interp::split_index(ca);
            let (ib0, fb) = interp::split_index(cb);
            let wa = interp::bspline_weights(fa);
            let wb = interp::bspline_weights(fb);
            let slice = ik * strides[k];
            for (db, wbv) in wb.iter().enumerate() {
                let ib = ib0 - 1 + db as isize;
                if ib < 0 || ib >= nf {
                    continue;
                }
                let row = slice + ib as usize * strides[b];
                for (da, wav) in wa.iter().enumerate() {
                    let ia = ia0 - 1 + da as isize;
                    if ia >= 0 && ia < nf {
                        acc += wbv * wav * coef[row + ia as usize * strides[a]];
                    }
                }
            }
        }
        acc * h / nk.abs()
    }
}

/// `Rf(θ, φ, t) = ∬ f(t n + R_{θ,φ}(x, y, 0)) dx dy` on the geometry's lattice.
///
/// Fails with `GeometryMismatch` when the volume's support is not inside the
/// ball of radius `t_max`.
pub fn radon_plane(v: &Volume, geom: &PlaneGeometry) -> Result<PlaneSinogram> {
    check_support(v, geom.t_max, "t")?;
    let proj = PlaneProjector::new(v);
    let angles = geom.angles();
    let blocks = par::map_range(angles.len(), |d| {
        proj.project(&angles.normal(d), -geom.t_max, geom.dt(), geom.n_t)
    });
    Ok(PlaneSinogram { geom: *geom, data: blocks.concat() })
}

/// `Rf(θ, φ, t⊥) = ∫ f(s n + t⊥) ds` on the geometry's lattice.
pub fn xray(v: &Volume, geom: &LineGeometry) -> Result<LineSinogram> {
    check_support(v, geom.uv_max, "(u, v)")?;
    let proj = LineProjector::new(v);
    let angles = geom.angles();
    let reach = v.half_extent() * 3f64.sqrt() + 2.0 * v.h();
    let nu = geom.n_u;
    let blocks = par::map_range(angles.len(), |d| {
        let (n, e1, e2) = angles.frame(d);
        let mut out = vec![0.0; nu * nu];
        for m in 0..nu {
            for k in 0..nu {
                let (u, w) = (geom.u(m), geom.u(k));
                if u.hypot(w) > reach {
                    continue;
                }
                out[m * nu + k] = proj.line_integral(&n, &(u * e1 + w * e2));
            }
        }
        out
    });
    Ok(LineSinogram { geom: *geom, data: blocks.concat() })
}

/// `R#F(x) = ∫∫ F(θ, φ, n(θ,φ)·x) sin φ dθ dφ`, linear interpolation in `t`.
pub fn backproject_plane(s: &PlaneSinogram, n: usize, h: f64) -> Result<Volume> {
    let mut out = Volume::zeros(n, h)?;
    let angles = s.geom.angles();
    let normals: Vec<(Vec3, f64)> = (0..angles.len()).map(|d| (angles.normal(d), angles.weight(d))).collect();
    let origin = out.origin();
    let (t0, dt, nt) = (-s.geom.t_max, s.geom.dt(), s.geom.n_t);
    par::for_each_chunk(out.data_mut(), n * n, |k, slab| {
        let z = origin.z + h * k as f64;
        for (d, &(nd, w)) in normals.iter().enumerate() {
            let col = s.block(d);
            for j in 0..n {
                let y = origin.y + h * j as f64;
                let base = nd.y * y + nd.z * z;
                for i in 0..n {
                    let t = base + nd.x * (origin.x + h * i as f64);
                    let q = (t - t0) / dt;
                    if q < 0.0 || q > (nt - 1) as f64 {
                        continue;
                    }
                    let q0 = (q as usize).min(nt - 2);
                    let f = q - q0 as f64;
                    slab[i + n * j] += w * (col[q0] * (1.0 - f) + col[q0 + 1] * f);
                }
            }
        }
    });
    Ok(out)
}

/// `R#F(x) = ∫∫ F(θ, φ, P_{n⊥} x) sin φ dθ dφ`, bilinear interpolation in `(u, v)`.
pub fn backproject_line(s: &LineSinogram, n: usize, h: f64) -> Result<Volume> {
    let mut out = Volume::zeros(n, h)?;
    let angles = s.geom.angles();
    let frames: Vec<(Vec3, Vec3, f64)> = (0..angles.len())
        .map(|d| {
            let (_, e1, e2) = angles.frame(d);
            (e1, e2, angles.weight(d))
        })
        .collect();
    let origin = out.origin();
    par::for_each_chunk(out.data_mut(), n * n, |k, slab| {
        for (d, &(e1, e2, w)) in frames.iter().enumerate() {
            for j in 0..n {
                for i in 0..n {
                    let x = origin + h * Vec3::new(i as f64, j as f64, k as f64);
                    slab[i + n * j] += w * s.sample_uv(d, x.dot(&e1), x.dot(&e2));
                }
            }
        }
    });
    Ok(out)
}

/// Centered physical-unit DFT of uniformly sampled data:
/// `G(τ_k) = dx Σ_m g(x0 + m dx) e^{−2πi τ_k (x0 + m dx)}` with `τ_k = k / (L dx)`,
/// `k ∈ [−L/2, (L−1)/2]`, where `L = pad · len`. Entry `k + L/2` holds `G(τ_k)`.
pub fn dft1_physical(samples: &[f64], x0: f64, dx: f64, pad: usize) -> Vec<Complex64> {
    let l = samples.len() * pad;
    let mut buf = vec![Complex64::default(); l];
    for (b, s) in buf.iter_mut().zip(samples) {
        *b = Complex64::new(*s, 0.0);
    }
    fft::planner_1d(l, Direction::Forward).process(&mut buf);
    let half = l / 2;
    let mut out = vec![Complex64::default(); l];
    for (m, v) in buf.into_iter().enumerate() {
        let k = fft::signed_index(m, l);
        let tau = k as f64 / (l as f64 * dx);
        out[(k + half as i64) as usize] = v * dx * Complex64::from_polar(1.0, -2.0 * PI * tau * x0);
    }
    out
}

/// Two-dimensional analogue of [`dft1_physical`] for an `n × n` block
/// (second index fastest), same `x0`, `dx` on both axes, zero padded to `pad · n`.
pub fn dft2_physical(samples: &[f64], n: usize, x0: f64, dx: f64, pad: usize) -> Vec<Complex64> {
    let l = n * pad;
    let mut buf = vec![Complex64::default(); l * l];
    for i in 0..n {
        for j in 0..n {
            buf[i * l + j] = Complex64::new(samples[i * n + j], 0.0);
        }
    }
    let plan = fft::planner_1d(l, Direction::Forward);
    fft::fft2(&mut buf, l, plan.as_ref());
    let half = (l / 2) as i64;
    let phase: Vec<Complex64> = (0..l)
        .map(|m| {
            let k = fft::signed_index(m, l);
            Complex64::from_polar(1.0, -2.0 * PI * k as f64 / (l as f64 * dx) * x0)
        })
        .collect();
    let mut out = vec![Complex64::default(); l * l];
    for m1 in 0..l {
        let k1 = fft::signed_index(m1, l);
        for m2 in 0..l {
            let k2 = fft::signed_index(m2, l);
            let p = ((k1 + half) as usize) * l + (k2 + half) as usize;
            out[p] = buf[m1 * l + m2] * phase[m1] * phase[m2] * dx * dx;
        }
    }
    out
}

/// Frequencies matching the centered layout of [`dft1_physical`].
pub fn centered_frequencies(l: usize, dx: f64) -> Vec<f64> {
    let half = (l / 2) as f64;
    (0..l).map(|p| (p as f64 - half) / (l as f64 * dx)).collect()
}

fn catmull_rom_1d(values: &[Complex64], x: f64) -> Complex64 {
    let (i0, t) = interp::split_index(x);
    let w = interp::catmull_rom_weights(t);
    let n = values.len() as isize;
    let mut acc = Complex64::default();
    for (d, wd) in w.iter().enumerate() {
        let i = i0 - 1 + d as isize;
        if i >= 0 && i < n {
            acc += values[i as usize] * *wd;
        }
    }
    acc
}

/// Per-direction 1D spectra `(I ⊗ ℱ)F(n_d, τ)` of a plane sinogram,
/// oversampled by zero padding and interpolated with Catmull-Rom.
pub struct ColumnSpectra {
    angles: AngleGrid,
    len: usize,
    inv_dtau: f64,
    /// largest `|τ|` carried by the data (its Nyquist frequency)
    pub nyquist: f64,
    spectra: Vec<Vec<Complex64>>,
}

impl ColumnSpectra {
    pub fn new(s: &PlaneSinogram, pad: usize) -> Self {
        let g = s.geom;
        let spectra = par::map_range(g.angles().len(), |d| dft1_physical(s.block(d), -g.t_max, g.dt(), pad));
        let len = g.n_t * pad;
        Self {
            angles: g.angles(),
            len,
            inv_dtau: len as f64 * g.dt(),
            nyquist: 0.5 / g.dt(),
            spectra,
        }
    }

    /// Spectrum of grid direction `d` at `τ`, zero beyond the stored band.
    pub fn eval(&self, d: usize, tau: f64) -> Complex64 {
        let x = tau * self.inv_dtau + (self.len / 2) as f64;
        catmull_rom_1d(&self.spectra[d], x)
    }

    /// Spectrum at an arbitrary unit direction, using the even identification
    /// `F(−n, −t) = F(n, t)` for directions off the base hemisphere.
    pub fn eval_dir(&self, u: &Vec3, tau: f64) -> Complex64 {
        self.angles
            .stencil(u)
            .iter()
            .filter(|e| e.2 != 0.0)
            .map(|&(d, flip, w)| self.eval(d, if flip { -tau } else { tau }) * w)
            .sum()
    }
}

/// Per-direction 2D spectra of a line sinogram, Catmull-Rom interpolated.
pub struct BlockSpectra {
    angles: AngleGrid,
    n: usize,
    inv_dnu: f64,
    pub nyquist: f64,
    frames: Vec<(Vec3, Vec3)>,
    spectra: Vec<Vec<Complex64>>,
}

impl BlockSpectra {
    pub fn new(s: &LineSinogram) -> Self {
        Self::padded(s, 1)
    }

    /// Spectra zero padded `pad`-fold before interpolation.
    pub fn padded(s: &LineSinogram, pad: usize) -> Self {
        let g = s.geom;
        let angles = g.angles();
        let spectra = par::map_range(angles.len(), |d| dft2_physical(s.block(d), g.n_u, -g.uv_max, g.du(), pad));
        let frames = (0..angles.len())
            .map(|d| {
                let (_, e1, e2) = angles.frame(d);
                (e1, e2)
            })
            .collect();
        Self { angles, n: g.n_u * pad, inv_dnu: (g.n_u * pad) as f64 * g.du(), nyquist: 0.5 / g.du(), frames, spectra }
    }

    /// Spectrum of direction `d` at in-plane frequency `(ν₁, ν₂)`.
    pub fn eval(&self, d: usize, nu1: f64, nu2: f64) -> Complex64 {
        let half = (self.n / 2) as f64;
        let (i0, fx) = interp::split_index(nu1 * self.inv_dnu + half);
        let (j0, fy) = interp::split_index(nu2 * self.inv_dnu + half);
        let wx = interp::catmull_rom_weights(fx);
        let wy = interp::catmull_rom_weights(fy);
        let n = self.n as isize;
        let spec = &self.spectra[d];
        let mut acc = Complex64::default();
        for (a, wa) in wx.iter().enumerate() {
            let i = i0 - 1 + a as isize;
            if i < 0 || i >= n {
                continue;
            }
            for (b, wb) in wy.iter().enumerate() {
                let j = j0 - 1 + b as isize;
                if j >= 0 && j < n {
                    acc += spec[i as usize * self.n + j as usize] * (wa * wb);
                }
            }
        }
        acc
    }

    /// Spectrum at a 3D frequency `ω` read from the slice of direction `d`
    /// (the component of `ω` along the direction is dropped).
    pub fn eval_projected(&self, d: usize, w: &Vec3) -> Complex64 {
        let (e1, e2) = self.frames[d];
        self.eval(d, w.dot(&e1), w.dot(&e2))
    }

    pub fn angles(&self) -> AngleGrid {
        self.angles
    }
}

/// Evaluates `ℱf` of one volume on central lines and planes: the
/// transform-free side of the Fourier slice theorems.
pub struct SliceSampler {
    sampler: SpectrumSampler,
    /// Nyquist frequency of the volume grid, `1 / (2h)`.
    pub nyquist: f64,
}

impl SliceSampler {
    /// Spectrum computed on a grid padded twofold, then tricubic B-spline interpolated.
    pub fn new(v: &Volume) -> Self {
        Self { sampler: crate::grid::dft3_padded(v, 2).sampler(), nyquist: 0.5 / v.h() }
    }

    pub fn at(&self, w: &Vec3) -> Complex64 {
        self.sampler.sample(w)
    }

    /// `ℱf(τ n(θ, φ))` for each `τ`.
    pub fn plane(&self, theta: f64, phi: f64, taus: &[f64]) -> Vec<Complex64> {
        let n = unit_normal(theta, phi);
        taus.iter().map(|&t| self.at(&(t * n))).collect()
    }

    /// `ℱf(ν₁ R e₁ + ν₂ R e₂)` on the grid `freqs × freqs` (second index fastest).
    pub fn line(&self, theta: f64, phi: f64, freqs: &[f64]) -> Vec<Complex64> {
        let r = rotation_from_angles(theta, phi);
        let e1: Vec3 = r.column(0).into();
        let e2: Vec3 = r.column(1).into();
        let mut out = Vec::with_capacity(freqs.len() * freqs.len());
        for &a in freqs {
            for &b in freqs {
                out.push(self.at(&(a * e1 + b * e2)));
            }
        }
        out
    }
}

/// `ℱf` along the ray `τ n(θ, φ)`.
pub fn fourier_slice_plane(v: &Volume, theta: f64, phi: f64, taus: &[f64]) -> Vec<Complex64> {
    SliceSampler::new(v).plane(theta, phi, taus)
}

/// `ℱf` on the central plane `n(θ, φ)⊥`, sampled at `freqs × freqs` in the frame
/// `(R_{θ,φ}e₁, R_{θ,φ}e₂)`.
pub fn fourier_slice_line(v: &Volume, theta: f64, phi: f64, freqs: &[f64]) -> Vec<Complex64> {
    SliceSampler::new(v).line(theta, phi, freqs)
}

/// `ℱ(R#F)(v) = |v|⁻² [(I⊗ℱ)F(v/|v|, |v|) + (I⊗ℱ)F(−v/|v|, −|v|)]` on the
/// spectral grid of an `n³` volume with spacing `h`.
///
/// The formula is the whole-sphere back-projection of the even extension of
/// `F`, i.e. twice [`backproject_plane`]. The DC voxel is set to zero.
pub fn dual_transform_spectrum(s: &PlaneSinogram, n: usize, h: f64) -> Result<Spectrum3D> {
    let probe = Volume::zeros(n, h)?;
    let spectra = ColumnSpectra::new(s, 2);
    let mut out = Spectrum3D::zeros(n, h, probe.origin());
    let template = out.clone();
    par::for_each_chunk(out.data_mut(), n * n, |k, slab| {
        for j in 0..n {
            for i in 0..n {
                let w = template.frequency(i, j, k);
                let r = w.norm();
                if r == 0.0 {
                    continue;
                }
                let u = w / r;
                let v = spectra.eval_dir(&u, r) + spectra.eval_dir(&(-u), -r);
                slab[i + n * j] = v / (r * r);
            }
        }
    });
    Ok(out)
}

/// Read-only view of a plane sinogram as an even function on `S² × ℝ`.
///
/// Every query is first canonicalized, so `R_e(−n, −t) = R_e(n, t)` holds
/// exactly.
pub struct EvenExtension<'a> {
    s: &'a PlaneSinogram,
}

impl<'a> EvenExtension<'a> {
    pub fn new(s: &'a PlaneSinogram) -> Self {
        Self { s }
    }

    pub fn eval(&self, u: &Vec3, t: f64) -> f64 {
        let (theta, phi, sign) = canonicalize_unit(&u.normalize());
        self.s.sample(&unit_normal(theta, phi), sign * t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Phantom;

    #[test]
    fn stencil_hits_grid_points() {
        let g = AngleGrid::new(8, 6).unwrap();
        for d in 0..g.len() {
            let st = g.stencil(&g.normal(d));
            let (dd, flip, w) = st.iter().copied().fold((0, false, 0.0), |acc, e| if e.2 > acc.2 { e } else { acc });
            assert_eq!(dd, d);
            assert!(!flip);
            assert!((w - 1.0).abs() < 1e-9);
            let st = g.stencil(&-g.normal(d));
            let best = st.iter().copied().fold((0, false, 0.0), |acc, e| if e.2 > acc.2 { e } else { acc });
            assert_eq!((best.0, best.1), (d, true));
        }
    }

    #[test]
    fn stencil_weights_sum_to_one() {
        let g = AngleGrid::new(5, 7).unwrap();
        for u in [Vec3::z(), -Vec3::z(), Vec3::new(0.3, -0.9, 0.1), Vec3::new(-1.0, 0.0, 0.0)] {
            let s: f64 = g.stencil(&u.normalize()).iter().map(|e| e.2).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_volume_zero_sinogram() {
        let v = Volume::zeros(16, 0.5).unwrap();
        let s = radon_plane(&v, &PlaneGeometry::new(4, 4, 17, 6.0).unwrap()).unwrap();
        assert!(s.data.iter().all(|&x| x == 0.0));
        let l = xray(&v, &LineGeometry::new(3, 3, 9, 6.0).unwrap()).unwrap();
        assert!(l.data.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn support_must_fit_t_range() {
        let v = Phantom::unit_gaussian().sample(32, 0.3).unwrap();
        let err = radon_plane(&v, &PlaneGeometry::new(4, 4, 17, 1.0).unwrap()).unwrap_err();
        assert_eq!(err.name(), "GeometryMismatch");
    }

    #[test]
    fn backprojection_of_constant() {
        let g = PlaneGeometry::new(32, 32, 65, 8.0).unwrap();
        let s = PlaneSinogram { geom: g, data: vec![1.0; g.len()] };
        let v = backproject_plane(&s, 8, 0.5).unwrap();
        for x in v.data() {
            assert!((x - 2.0 * PI).abs() < 1e-3 * 2.0 * PI);
        }
    }

    #[test]
    fn dft1_of_gaussian() {
        let dt = 0.05;
        let samples: Vec<f64> = (0..241).map(|k| (-PI * (-6.0 + k as f64 * dt).powi(2)).exp()).collect();
        let spec = dft1_physical(&samples, -6.0, dt, 2);
        let freqs = centered_frequencies(spec.len(), dt);
        for (f, v) in freqs.iter().zip(&spec) {
            assert!((v - Complex64::new((-PI * f * f).exp(), 0.0)).norm() < 1e-9, "{f}");
        }
    }

    #[test]
    fn even_extension_is_even() {
        let g = PlaneGeometry::new(6, 5, 33, 4.0).unwrap();
        let s = PlaneSinogram::from_fn(g, |n, t| (t - 0.3 * n.x).sin() + n.z);
        let view = EvenExtension::new(&s);
        for u in [Vec3::new(0.2, 0.5, -0.8), Vec3::new(-1.0, 0.1, 0.0), Vec3::z()] {
            for t in [-1.3, 0.0, 0.7] {
                assert_eq!(view.eval(&u, t), view.eval(&(-u), -t));
            }
        }
    }
}
