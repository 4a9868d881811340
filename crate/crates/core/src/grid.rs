//! Sampled volumes, their physical-unit Fourier transforms, test phantoms,
//! and the quasi-regular representation `π` acting by resampling.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{self, Direction};
use crate::group::{GroupElement, Vec3};
use crate::interp;
use crate::par;

/// A real signal on an `N³` grid with spacing `h`, x-fastest storage.
///
/// Grid point `(i, j, k)` sits at `origin + h·(i, j, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    n: usize,
    h: f64,
    origin: Vec3,
    data: Vec<f64>,
}

fn validate_grid(n: usize, h: f64) -> Result<()> {
    if n < 8 || n % 2 != 0 {
        return Err(Error::InvalidGrid(format!("N must be even and at least 8, got {n}")));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidGrid(format!("spacing must be positive, got {h}")));
    }
    Ok(())
}

/// Default origin that centers an `n`-point axis on zero.
pub fn centered_origin(n: usize, h: f64) -> Vec3 {
    let o = -(n as f64 / 2.0) * h;
    Vec3::new(o, o, o)
}

impl Volume {
    pub fn zeros(n: usize, h: f64) -> Result<Self> {
        validate_grid(n, h)?;
        Ok(Self { n, h, origin: centered_origin(n, h), data: vec![0.0; n * n * n] })
    }

    pub fn from_data(n: usize, h: f64, origin: Vec3, data: Vec<f64>) -> Result<Self> {
        validate_grid(n, h)?;
        if data.len() != n * n * n {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                n * n * n,
                data.len()
            )));
        }
        Ok(Self { n, h, origin, data })
    }

    /// Samples `f` at every grid point of the centered grid.
    pub fn from_fn<F>(n: usize, h: f64, f: F) -> Result<Self>
    where
        F: Fn(Vec3) -> f64 + Sync + Send,
    {
        let mut v = Self::zeros(n, h)?;
        let origin = v.origin;
        par::for_each_chunk(&mut v.data, n * n, |k, slab| {
            for j in 0..n {
                for i in 0..n {
                    let x = origin + h * Vec3::new(i as f64, j as f64, k as f64);
                    slab[i + n * j] = f(x);
                }
            }
        });
        Ok(v)
    }

    /// A zero volume on the same grid.
    pub fn zeros_like(&self) -> Self {
        Self { data: vec![0.0; self.data.len()], ..self.clone() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n * (j + self.n * k)
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.index(i, j, k)]
    }

    pub fn position(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.origin + self.h * Vec3::new(i as f64, j as f64, k as f64)
    }

    /// Continuous grid coordinates of a physical point.
    #[inline]
    pub fn continuous_index(&self, x: &Vec3) -> Vec3 {
        (x - self.origin) / self.h
    }

    /// Trilinear sample at a physical point, zero outside the grid.
    pub fn sample(&self, x: &Vec3) -> f64 {
        let c = self.continuous_index(x);
        interp::trilinear(&self.data, self.n, c.x, c.y, c.z)
    }

    /// `N·h / 2`.
    pub fn half_extent(&self) -> f64 {
        0.5 * self.n as f64 * self.h
    }

    /// Same grid (size, spacing, origin).
    pub fn same_grid(&self, other: &Volume) -> bool {
        self.n == other.n && self.h == other.h && self.origin == other.origin
    }

    /// `(h³ Σ f²)^{1/2}`.
    pub fn norm(&self) -> f64 {
        let sq: Vec<f64> = self.data.iter().map(|v| v * v).collect();
        (self.h.powi(3) * par::pairwise_sum(&sq)).sqrt()
    }

    /// `h³ Σ f g`.
    pub fn dot(&self, other: &Volume) -> f64 {
        let prod: Vec<f64> = self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect();
        self.h.powi(3) * par::pairwise_sum(&prod)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Volume {
        Self { data: self.data.iter().map(|v| c * v).collect(), ..self.clone() }
    }

    /// `self += c · other` (same grid required).
    pub fn add_scaled(&mut self, c: f64, other: &Volume) {
        assert_eq!(self.data.len(), other.data.len());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    /// Radius of the smallest origin-centered ball holding every voxel whose
    /// magnitude exceeds `rel · max|f|`.
    pub fn support_radius(&self, rel: f64) -> f64 {
        let thr = rel * self.max_abs();
        let n = self.n;
        let mut r2: f64 = 0.0;
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    if self.data[self.index(i, j, k)].abs() > thr {
                        r2 = r2.max(self.position(i, j, k).norm_squared());
                    }
                }
            }
        }
        r2.sqrt()
    }

    /// Relative L² difference `‖self − reference‖ / ‖reference‖` restricted to
    /// the central cube holding `fraction` of each axis.
    pub fn relative_error(&self, reference: &Volume, fraction: f64) -> f64 {
        assert!(self.same_grid(reference), "volumes live on different grids");
        let n = self.n;
        let lo = ((1.0 - fraction) * 0.5 * n as f64).round() as usize;
        let hi = n - lo;
        let mut diff = Vec::new();
        let mut refv = Vec::new();
        for k in lo..hi {
            for j in lo..hi {
                for i in lo..hi {
                    let idx = self.index(i, j, k);
                    diff.push((self.data[idx] - reference.data[idx]).powi(2));
                    refv.push(reference.data[idx].powi(2));
                }
            }
        }
        let den = par::pairwise_sum(&refv);
        if den == 0.0 {
            return if par::pairwise_sum(&diff) == 0.0 { 0.0 } else { f64::INFINITY };
        }
        (par::pairwise_sum(&diff) / den).sqrt()
    }

    /// Copy embedded in a larger centered grid of `m ≥ n` points, zero padded.
    pub fn padded(&self, m: usize) -> Volume {
        assert!(m >= self.n && (m - self.n) % 2 == 0);
        let off = (m - self.n) / 2;
        let mut data = vec![0.0; m * m * m];
        for k in 0..self.n {
            for j in 0..self.n {
                let src = self.index(0, j, k);
                let dst = off + m * ((j + off) + m * (k + off));
                data[dst..dst + self.n].copy_from_slice(&self.data[src..src + self.n]);
            }
        }
        let origin = self.origin - Vec3::repeat(off as f64 * self.h);
        Volume { n: m, h: self.h, origin, data }
    }

    /// Central `m³` block (inverse of [`Volume::padded`]).
    pub fn cropped(&self, m: usize) -> Volume {
        assert!(m <= self.n && (self.n - m) % 2 == 0);
        let off = (self.n - m) / 2;
        let mut data = vec![0.0; m * m * m];
        for k in 0..m {
            for j in 0..m {
                let src = self.index(off, j + off, k + off);
                let dst = m * (j + m * k);
                data[dst..dst + m].copy_from_slice(&self.data[src..src + m]);
            }
        }
        let origin = self.origin + Vec3::repeat(off as f64 * self.h);
        Volume { n: m, h: self.h, origin, data }
    }

    /// Copies with cubic B-spline coefficients along each axis, used by the
    /// forward transforms.
    pub(crate) fn spline_coefficients(&self, axes: &[usize]) -> Vec<f64> {
        let mut c = self.data.clone();
        for &axis in axes {
            interp::prefilter_axis(&mut c, self.n, axis);
        }
        c
    }

    /// Tricubic B-spline interpolant of the samples.
    pub fn spline(&self) -> SplineVolume {
        SplineVolume {
            n: self.n,
            h: self.h,
            origin: self.origin,
            coef: self.spline_coefficients(&[0, 1, 2]),
        }
    }
}

/// Tricubic B-spline interpolant of a [`Volume`], zero outside the grid.
#[derive(Debug, Clone)]
pub struct SplineVolume {
    n: usize,
    h: f64,
    origin: Vec3,
    coef: Vec<f64>,
}

impl SplineVolume {
    pub fn sample(&self, x: &Vec3) -> f64 {
        let c = (x - self.origin) / self.h;
        let n = self.n as isize;
        let (i0, fx) = interp::split_index(c.x);
        let (j0, fy) = interp::split_index(c.y);
        let (k0, fz) = interp::split_index(c.z);
        if i0 < -2 || j0 < -2 || k0 < -2 || i0 > n || j0 > n || k0 > n {
            return 0.0;
        }
        let wx = interp::bspline_weights(fx);
        let wy = interp::bspline_weights(fy);
        let wz = interp::bspline_weights(fz);
        let mut acc = 0.0;
        for (dz, wzv) in wz.iter().enumerate() {
            let k = k0 - 1 + dz as isize;
            if k < 0 || k >= n {
                continue;
            }
            for (dy, wyv) in wy.iter().enumerate() {
                let j = j0 - 1 + dy as isize;
                if j < 0 || j >= n {
                    continue;
                }
                let row = self.n * (j as usize + self.n * k as usize);
                let w2 = wzv * wyv;
                for (dx, wxv) in wx.iter().enumerate() {
                    let i = i0 - 1 + dx as isize;
                    if i >= 0 && i < n {
                        acc += w2 * wxv * self.coef[row + i as usize];
                    }
                }
            }
        }
        acc
    }
}

/// Samples of `ℱf` on the centered frequency grid `k / (N h)`, `k ∈ [−N/2, N/2)`.
#[derive(Debug, Clone)]
pub struct Spectrum3D {
    n: usize,
    h: f64,
    origin: Vec3,
    data: Vec<Complex64>,
}

impl Spectrum3D {
    pub fn zeros(n: usize, h: f64, origin: Vec3) -> Self {
        Self { n, h, origin, data: vec![Complex64::default(); n * n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Spacing of the spatial grid the spectrum belongs to.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    /// `1 / (N h)`.
    pub fn freq_spacing(&self) -> f64 {
        1.0 / (self.n as f64 * self.h)
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Frequency vector of centered index `(i, j, k)`.
    pub fn frequency(&self, i: usize, j: usize, k: usize) -> Vec3 {
        let half = (self.n / 2) as f64;
        Vec3::new(i as f64 - half, j as f64 - half, k as f64 - half) * self.freq_spacing()
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.data[i + self.n * (j + self.n * k)]
    }

    /// `(Δω³ Σ |S|²)^{1/2}`, equal to the volume norm by Parseval.
    pub fn norm(&self) -> f64 {
        let sq: Vec<f64> = self.data.iter().map(|c| c.norm_sqr()).collect();
        (self.freq_spacing().powi(3) * par::pairwise_sum(&sq)).sqrt()
    }

    /// Cubic B-spline sampler over the spectrum.
    pub fn sampler(&self) -> SpectrumSampler {
        let n = self.n;
        let mut re: Vec<f64> = self.data.iter().map(|c| c.re).collect();
        let mut im: Vec<f64> = self.data.iter().map(|c| c.im).collect();
        for axis in 0..3 {
            interp::prefilter_axis(&mut re, n, axis);
            interp::prefilter_axis(&mut im, n, axis);
        }
        SpectrumSampler { n, inv_dw: n as f64 * self.h, re, im }
    }
}

/// Evaluates `ℱf` at arbitrary frequencies by tricubic B-spline interpolation.
#[derive(Debug, Clone)]
pub struct SpectrumSampler {
    n: usize,
    inv_dw: f64,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl SpectrumSampler {
    /// Zero outside the stored band.
    pub fn sample(&self, w: &Vec3) -> Complex64 {
        let n = self.n as isize;
        let half = (self.n / 2) as f64;
        let c = w * self.inv_dw + Vec3::repeat(half);
        let (i0, fx) = interp::split_index(c.x);
        let (j0, fy) = interp::split_index(c.y);
        let (k0, fz) = interp::split_index(c.z);
        if i0 < 1 || j0 < 1 || k0 < 1 || i0 + 2 >= n || j0 + 2 >= n || k0 + 2 >= n {
            return Complex64::default();
        }
        let wx = interp::bspline_weights(fx);
        let wy = interp::bspline_weights(fy);
        let wz = interp::bspline_weights(fz);
        let (mut sr, mut si) = (0.0, 0.0);
        for (dz, wzv) in wz.iter().enumerate() {
            let k = (k0 - 1 + dz as isize) as usize;
            for (dy, wyv) in wy.iter().enumerate() {
                let j = (j0 - 1 + dy as isize) as usize;
                let base = self.n * (j + self.n * k) + (i0 - 1) as usize;
                let w2 = wzv * wyv;
                for (dx, wxv) in wx.iter().enumerate() {
                    sr += w2 * wxv * self.re[base + dx];
                    si += w2 * wxv * self.im[base + dx];
                }
            }
        }
        Complex64::new(sr, si)
    }
}

/// Origin phase factors `e^{∓2πi k o / (N h)}` for centered indices.
fn origin_phases(n: usize, h: f64, o: f64, sign: f64) -> Vec<Complex64> {
    let half = (n / 2) as f64;
    (0..n)
        .map(|m| {
            let k = m as f64 - half;
            Complex64::from_polar(1.0, sign * 2.0 * PI * k * o / (n as f64 * h))
        })
        .collect()
}

/// Discrete approximation of `ℱf(ω) = ∫ f(x) e^{−2πi ω·x} dx` at `ω = k/(N h)`.
pub fn dft3(v: &Volume) -> Spectrum3D {
    let n = v.n;
    let mut buf: Vec<Complex64> = v.data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft::fft3(&mut buf, n, Direction::Forward);
    let px = origin_phases(n, v.h, v.origin.x, -1.0);
    let py = origin_phases(n, v.h, v.origin.y, -1.0);
    let pz = origin_phases(n, v.h, v.origin.z, -1.0);
    let h3 = v.h.powi(3);
    let half = n / 2;
    let mut out = Spectrum3D::zeros(n, v.h, v.origin);
    par::for_each_chunk(&mut out.data, n * n, |mk, slab| {
        let sk = (mk + half) % n;
        for mj in 0..n {
            let sj = (mj + half) % n;
            let pyz = pz[mk] * py[mj] * h3;
            for mi in 0..n {
                let si = (mi + half) % n;
                slab[mi + n * mj] = buf[si + n * (sj + n * sk)] * px[mi] * pyz;
            }
        }
    });
    out
}

/// Zero-pads `v` to `factor·N` points per axis before transforming, halving
/// (for `factor = 2`) the frequency spacing.
pub fn dft3_padded(v: &Volume, factor: usize) -> Spectrum3D {
    assert!(factor >= 1);
    if factor == 1 {
        return dft3(v);
    }
    dft3(&v.padded(v.n * factor))
}

/// Inverse of [`dft3`]; the imaginary part is discarded.
pub fn idft3(s: &Spectrum3D) -> Volume {
    let n = s.n;
    let half = n / 2;
    let px = origin_phases(n, s.h, s.origin.x, 1.0);
    let py = origin_phases(n, s.h, s.origin.y, 1.0);
    let pz = origin_phases(n, s.h, s.origin.z, 1.0);
    let dw3 = s.freq_spacing().powi(3);
    let mut buf = vec![Complex64::default(); n * n * n];
    for mk in 0..n {
        let sk = (mk + half) % n;
        for mj in 0..n {
            let sj = (mj + half) % n;
            let pyz = pz[mk] * py[mj] * dw3;
            for mi in 0..n {
                let si = (mi + half) % n;
                buf[si + n * (sj + n * sk)] = s.data[mi + n * (mj + n * mk)] * px[mi] * pyz;
            }
        }
    }
    fft::fft3(&mut buf, n, Direction::Inverse);
    Volume { n, h: s.h, origin: s.origin, data: buf.into_iter().map(|c| c.re).collect() }
}

/// An isotropic Gaussian `w · exp(−π |x − c|² / s²)` with closed-form transforms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianBlob {
    pub center: Vec3,
    pub scale: f64,
    pub weight: f64,
}

impl GaussianBlob {
    pub fn new(center: Vec3, scale: f64, weight: f64) -> Self {
        Self { center, scale, weight }
    }

    pub fn unit() -> Self {
        Self::new(Vec3::zeros(), 1.0, 1.0)
    }

    pub fn value(&self, x: &Vec3) -> f64 {
        self.weight * (-PI * (x - self.center).norm_squared() / (self.scale * self.scale)).exp()
    }

    /// Integral over the plane `n · x = t` (`n` unit).
    pub fn plane_integral(&self, n: &Vec3, t: f64) -> f64 {
        let d = t - n.dot(&self.center);
        let s2 = self.scale * self.scale;
        self.weight * s2 * (-PI * d * d / s2).exp()
    }

    /// Integral over the line through `p` with unit direction `n`.
    pub fn line_integral(&self, n: &Vec3, p: &Vec3) -> f64 {
        let r = p - self.center;
        let d2 = (r - n * n.dot(&r)).norm_squared();
        self.weight * self.scale * (-PI * d2 / (self.scale * self.scale)).exp()
    }

    /// `ℱ` of the blob at `ω`.
    pub fn fourier(&self, w: &Vec3) -> Complex64 {
        let s = self.scale;
        let mag = self.weight * s.powi(3) * (-PI * s * s * w.norm_squared()).exp();
        Complex64::from_polar(mag, -2.0 * PI * w.dot(&self.center))
    }

    /// `‖blob‖² = w² s³ 2^{−3/2}`.
    pub fn norm_squared(&self) -> f64 {
        self.weight * self.weight * self.scale.powi(3) * 2f64.powf(-1.5)
    }
}

/// Sums of Gaussian blobs; the phantoms every oracle test is built from.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Phantom {
    pub blobs: Vec<GaussianBlob>,
}

impl Phantom {
    pub fn new(blobs: Vec<GaussianBlob>) -> Self {
        Self { blobs }
    }

    pub fn unit_gaussian() -> Self {
        Self::new(vec![GaussianBlob::unit()])
    }

    /// Built-in phantoms by name: `gaussian`, `two-gaussians`, `asymmetric`.
    pub fn named(name: &str) -> Result<Self> {
        match name {
            "gaussian" => Ok(Self::unit_gaussian()),
            "two-gaussians" => Ok(Self::two_gaussians()),
            "asymmetric" => Ok(Self::asymmetric()),
            other => Err(Error::Format(format!(
                "unknown phantom `{other}` (expected gaussian, two-gaussians or asymmetric)"
            ))),
        }
    }

    /// Two unequal, separated blobs.
    pub fn two_gaussians() -> Self {
        Self::new(vec![
            GaussianBlob::new(Vec3::new(-0.8, 0.3, 0.2), 0.8, 1.0),
            GaussianBlob::new(Vec3::new(0.9, -0.4, -0.5), 0.6, 0.7),
        ])
    }

    /// Three blobs with no symmetry axis.
    pub fn asymmetric() -> Self {
        Self::new(vec![
            GaussianBlob::new(Vec3::new(0.6, 0.0, 0.0), 0.7, 1.0),
            GaussianBlob::new(Vec3::new(-0.4, 0.7, 0.2), 0.5, 0.8),
            GaussianBlob::new(Vec3::new(-0.2, -0.5, 0.8), 0.6, -0.5),
        ])
    }

    pub fn value(&self, x: &Vec3) -> f64 {
        self.blobs.iter().map(|b| b.value(x)).sum()
    }

    pub fn plane_integral(&self, n: &Vec3, t: f64) -> f64 {
        self.blobs.iter().map(|b| b.plane_integral(n, t)).sum()
    }

    pub fn line_integral(&self, n: &Vec3, p: &Vec3) -> f64 {
        self.blobs.iter().map(|b| b.line_integral(n, p)).sum()
    }

    pub fn fourier(&self, w: &Vec3) -> Complex64 {
        self.blobs.iter().map(|b| b.fourier(w)).sum()
    }

    /// Samples the phantom, failing if a blob's 4-scale box leaves the grid.
    pub fn sample(&self, n: usize, h: f64) -> Result<Volume> {
        validate_grid(n, h)?;
        let half = 0.5 * n as f64 * h;
        for b in &self.blobs {
            let reach = b.center.amax() + 4.0 * b.scale;
            if reach > half + 1e-12 {
                return Err(Error::SupportOverflow(format!(
                    "blob of scale {} at {:?} needs half-extent {reach}, grid has {half}",
                    b.scale,
                    b.center.as_slice()
                )));
            }
        }
        Volume::from_fn(n, h, |x| self.value(&x))
    }
}

/// `exp(−π|x − center|²/scale²)` sampled on the centered `N³` grid.
pub fn gaussian_phantom(center: Vec3, scale: f64, n: usize, h: f64) -> Result<Volume> {
    Phantom::new(vec![GaussianBlob::new(center, scale, 1.0)]).sample(n, h)
}

/// Laplacian-of-Gaussian wavelet with `ℱψ(ω) = |ω|² e^{−π σ² |ω|²}`.
pub fn log_wavelet_value(sigma: f64, x: &Vec3) -> f64 {
    let r2 = x.norm_squared();
    let s2 = sigma * sigma;
    (6.0 * PI / s2 - 4.0 * PI * PI * r2 / (s2 * s2)) * (-PI * r2 / s2).exp()
        / (4.0 * PI * PI * sigma.powi(3))
}

/// [`log_wavelet_value`] sampled on the centered grid.
pub fn log_wavelet(sigma: f64, n: usize, h: f64) -> Result<Volume> {
    if 0.5 * n as f64 * h < 3.5 * sigma {
        return Err(Error::SupportOverflow(format!(
            "wavelet of width {sigma} does not fit a grid of half-extent {}",
            0.5 * n as f64 * h
        )));
    }
    Volume::from_fn(n, h, |x| log_wavelet_value(sigma, &x))
}

/// `π(b, R, a) f(x) = a^{−3/2} f(a⁻¹R⁻¹(x − b))` by tricubic B-spline resampling.
///
/// Logs a warning when the image of the input's support leaves the grid;
/// the part outside is lost.
pub fn apply_pi(g: &GroupElement, v: &Volume) -> Volume {
    if *g == GroupElement::identity() {
        return v.clone();
    }
    let n = v.n;
    let spline = v.spline();
    let scale = g.a().powf(-1.5);
    let radius = v.support_radius(0.0);
    let image_reach = g.b().norm() + g.a() * radius;
    if image_reach > v.half_extent() * 3f64.sqrt() {
        log::warn!(
            "apply_pi: image support radius {image_reach:.3} exceeds the grid (half-diagonal {:.3}); truncating",
            v.half_extent() * 3f64.sqrt()
        );
    }
    let ginv = g.inverse();
    let mut out = v.zeros_like();
    let origin = v.origin;
    let h = v.h;
    par::for_each_chunk(&mut out.data, n * n, |k, slab| {
        for j in 0..n {
            for i in 0..n {
                let x = origin + h * Vec3::new(i as f64, j as f64, k as f64);
                slab[i + n * j] = scale * spline.sample(&ginv.act_point(&x));
            }
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{rot_z, Mat3};

    #[test]
    fn gaussian_peak_and_falloff() {
        let v = gaussian_phantom(Vec3::zeros(), 1.0, 16, 0.5).unwrap();
        assert_eq!(v.get(8, 8, 8), 1.0);
        let at_scale = v.get(10, 8, 8);
        assert!((at_scale - (-PI).exp()).abs() < 1e-15);
        assert!(((-PI).exp() - 0.0432139).abs() < 1e-7);
    }

    #[test]
    fn support_overflow() {
        assert!(matches!(
            gaussian_phantom(Vec3::zeros(), 1.0, 16, 0.25),
            Err(Error::SupportOverflow(_))
        ));
        assert!(matches!(Volume::zeros(7, 1.0), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn gaussian_norm_closed_form() {
        let v = gaussian_phantom(Vec3::zeros(), 1.0, 64, 0.16).unwrap();
        assert!((v.norm() - 2f64.powf(-0.75)).abs() < 1e-4);
    }

    #[test]
    fn dft_of_unit_gaussian() {
        let v = gaussian_phantom(Vec3::zeros(), 1.0, 32, 0.3).unwrap();
        let s = dft3(&v);
        assert!((s.get(16, 16, 16) - Complex64::new(1.0, 0.0)).norm() < 1e-6);
        let w = s.frequency(19, 14, 16);
        assert!((s.get(19, 14, 16) - GaussianBlob::unit().fourier(&w)).norm() < 1e-6);
    }

    #[test]
    fn dft_shift_phase() {
        let blob = GaussianBlob::new(Vec3::new(0.5, -0.3, 0.2), 0.9, 1.0);
        let v = Phantom::new(vec![blob]).sample(32, 0.3).unwrap();
        let s = dft3(&v);
        for (i, j, k) in [(17, 16, 16), (20, 12, 18), (14, 15, 19)] {
            let w = s.frequency(i, j, k);
            assert!((s.get(i, j, k) - blob.fourier(&w)).norm() < 1e-6);
        }
    }

    #[test]
    fn impulse_has_flat_spectrum() {
        let mut v = Volume::zeros(8, 1.0).unwrap();
        let idx = v.index(4, 4, 4);
        v.data_mut()[idx] = 1.0;
        let s = dft3(&v);
        assert!(s.data().iter().all(|c| (c.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn round_trip_and_parseval() {
        let v = Phantom::two_gaussians().sample(32, 0.3).unwrap();
        let s = dft3(&v);
        assert!((s.norm() - v.norm()).abs() < 1e-10 * v.norm());
        let back = idft3(&s);
        for (a, b) in back.data().iter().zip(v.data()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn padded_spectrum_interpolates() {
        let v = Phantom::two_gaussians().sample(32, 0.3).unwrap();
        let sampler = dft3_padded(&v, 2).sampler();
        let ph = Phantom::two_gaussians();
        for w in [Vec3::new(0.1, 0.2, -0.05), Vec3::new(-0.33, 0.41, 0.7), Vec3::new(0.0, 0.0, 0.0)] {
            assert!((sampler.sample(&w) - ph.fourier(&w)).norm() < 2e-3, "{w:?}");
        }
    }

    #[test]
    fn pad_crop_round_trip() {
        let v = Phantom::two_gaussians().sample(16, 0.6).unwrap();
        let p = v.padded(32);
        assert_eq!(p.origin(), centered_origin(32, 0.6));
        assert_eq!(p.cropped(16), v);
    }

    #[test]
    fn pi_identity_and_translation() {
        let v = gaussian_phantom(Vec3::zeros(), 1.0, 40, 0.3).unwrap();
        assert_eq!(apply_pi(&GroupElement::identity(), &v), v);
        let b = Vec3::new(0.6, -0.3, 0.9);
        let moved = apply_pi(&GroupElement::translation(b), &v);
        let expected = gaussian_phantom(b, 1.0, 40, 0.3).unwrap();
        for (x, y) in moved.data().iter().zip(expected.data()) {
            assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn pi_is_nearly_unitary() {
        let v = gaussian_phantom(Vec3::zeros(), 1.0, 64, 0.15).unwrap();
        let g = GroupElement::new(Vec3::new(0.2, 0.0, -0.1), rot_z(PI / 6.0), 1.25).unwrap();
        let ratio = apply_pi(&g, &v).norm() / v.norm();
        assert!((0.99..=1.01).contains(&ratio), "{ratio}");
        let _ = Mat3::identity();
    }

    #[test]
    fn log_wavelet_spectrum() {
        let sigma = 1.25;
        let psi = log_wavelet(sigma, 32, 0.3).unwrap();
        let s = dft3(&psi);
        assert!(s.get(16, 16, 16).norm() < 1e-8);
        let w = s.frequency(18, 16, 17);
        let r2 = w.norm_squared();
        let expected = r2 * (-PI * sigma * sigma * r2).exp();
        assert!((s.get(18, 16, 17).re - expected).abs() < 1e-6);
    }
}
