//! Fourier multipliers in the offset variable (the unitarization operators)
//! and wavelet admissibility.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{self, Direction};
use crate::grid::{dft3_padded, Volume};
use crate::group::{CharacterSet, Geometry, GroupElement};
use crate::invert::{apply_pi_hat_line, apply_pi_hat_plane};
use crate::par;
use crate::xform::{LineSinogram, PlaneSinogram, Sinogram};

/// What happens at `τ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DcPolicy {
    Zero,
}

/// Optional taper applied on top of `|τ|^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Window {
    /// `½(1 + cos(π|τ|/cutoff))` below `cutoff`, zero above.
    RaisedCosine { cutoff: f64 },
}

/// The symbol `gain · |τ|^p · window(|τ|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSpec {
    pub exponent: f64,
    pub gain: f64,
    pub dc_policy: DcPolicy,
    pub window: Option<Window>,
}

impl MultiplierSpec {
    pub fn new(exponent: f64) -> Result<Self> {
        if !(exponent > 0.0) {
            return Err(Error::InvalidGrid(format!("multiplier exponent must be positive, got {exponent}")));
        }
        Ok(Self { exponent, gain: 1.0, dc_policy: DcPolicy::Zero, window: None })
    }

    /// The operator `𝒥` making `𝒥R` an isometry: `|τ|` for planes, and
    /// `π^{−1/2} |ν|^{1/2}` for lines (the factor compensates the hemisphere
    /// measure of the line directions).
    pub fn unitarization(geometry: Geometry) -> Self {
        match geometry {
            Geometry::Plane => Self { exponent: 1.0, gain: 1.0, dc_policy: DcPolicy::Zero, window: None },
            Geometry::Line => Self {
                exponent: 0.5,
                gain: 1.0 / PI.sqrt(),
                dc_policy: DcPolicy::Zero,
                window: None,
            },
        }
    }

    /// The symbol squared: applying the result equals applying `self` twice.
    pub fn squared(&self) -> Self {
        Self { exponent: 2.0 * self.exponent, gain: self.gain * self.gain, ..*self }
    }

    pub fn with_window(self, window: Window) -> Self {
        Self { window: Some(window), ..self }
    }

    /// Symbol value at frequency magnitude `r ≥ 0`.
    pub fn symbol(&self, r: f64) -> f64 {
        if r == 0.0 {
            return match self.dc_policy {
                DcPolicy::Zero => 0.0,
            };
        }
        let taper = match self.window {
            None => 1.0,
            Some(Window::RaisedCosine { cutoff }) => {
                if r >= cutoff {
                    0.0
                } else {
                    0.5 * (1.0 + (PI * r / cutoff).cos())
                }
            }
        };
        self.gain * r.powf(self.exponent) * taper
    }
}

/// Multiplies each direction's `t`-profile by the symbol in the DFT domain.
///
/// The DFT is circular over the stored `t` window.
pub fn apply_multiplier_plane(s: &PlaneSinogram, spec: &MultiplierSpec) -> PlaneSinogram {
    apply_symbol_plane(s, |r| spec.symbol(r))
}

/// Radial Fourier multiplier in `t` with an arbitrary symbol of `|τ|`.
pub fn apply_symbol_plane<F: Fn(f64) -> f64>(s: &PlaneSinogram, symbol_of: F) -> PlaneSinogram {
    let g = s.geom;
    let nt = g.n_t;
    let fwd = fft::planner_1d(nt, Direction::Forward);
    let inv = fft::planner_1d(nt, Direction::Inverse);
    let symbol: Vec<f64> = (0..nt)
        .map(|m| symbol_of((fft::signed_index(m, nt) as f64 / (nt as f64 * g.dt())).abs()))
        .collect();
    let blocks = par::map_range(g.angles().len(), |d| {
        let mut buf: Vec<Complex64> = s.block(d).iter().map(|&x| Complex64::new(x, 0.0)).collect();
        fwd.process(&mut buf);
        for (b, w) in buf.iter_mut().zip(&symbol) {
            *b *= *w / nt as f64;
        }
        inv.process(&mut buf);
        buf.into_iter().map(|c| c.re).collect::<Vec<_>>()
    });
    PlaneSinogram { geom: g, data: blocks.concat() }
}

/// Multiplies each direction's `(u, v)` block by the symbol of `|ν|` in the 2D DFT domain.
pub fn apply_multiplier_line(s: &LineSinogram, spec: &MultiplierSpec) -> LineSinogram {
    apply_symbol_line(s, |r| spec.symbol(r))
}

/// Radial Fourier multiplier in `(u, v)` with an arbitrary symbol of `|ν|`.
pub fn apply_symbol_line<F: Fn(f64) -> f64>(s: &LineSinogram, symbol_of: F) -> LineSinogram {
    let g = s.geom;
    let nu = g.n_u;
    let fwd = fft::planner_1d(nu, Direction::Forward);
    let inv = fft::planner_1d(nu, Direction::Inverse);
    let freq: Vec<f64> = (0..nu).map(|m| fft::signed_index(m, nu) as f64 / (nu as f64 * g.du())).collect();
    let mut symbol = vec![0.0; nu * nu];
    for a in 0..nu {
        for b in 0..nu {
            symbol[a * nu + b] = symbol_of(freq[a].hypot(freq[b]));
        }
    }
    let norm = (nu * nu) as f64;
    let blocks = par::map_range(g.angles().len(), |d| {
        let mut buf: Vec<Complex64> = s.block(d).iter().map(|&x| Complex64::new(x, 0.0)).collect();
        fft::fft2(&mut buf, nu, fwd.as_ref());
        for (b, w) in buf.iter_mut().zip(&symbol) {
            *b *= *w / norm;
        }
        fft::fft2(&mut buf, nu, inv.as_ref());
        buf.into_iter().map(|c| c.re).collect::<Vec<_>>()
    });
    LineSinogram { geom: g, data: blocks.concat() }
}

/// Dispatches on the sinogram kind.
pub fn apply_multiplier(s: &Sinogram, spec: &MultiplierSpec) -> Sinogram {
    match s {
        Sinogram::Plane(p) => Sinogram::Plane(apply_multiplier_plane(p, spec)),
        Sinogram::Line(l) => Sinogram::Line(apply_multiplier_line(l, spec)),
    }
}

/// `‖π̂(g) 𝒥 π̂(g)⁻¹ s − ζ(g) 𝒥 s‖ / ‖𝒥 s‖` with `ζ = χ⁻¹`.
///
/// Returns 0 when `𝒥 s` vanishes and the left side does too.
pub fn check_semi_invariance(spec: &MultiplierSpec, g: &GroupElement, s: &Sinogram) -> f64 {
    let geometry = s.geometry();
    let zeta = CharacterSet::new(geometry).zeta(g);
    let ginv = g.inverse();
    let (lhs, js) = match s {
        Sinogram::Plane(p) => {
            let inner = apply_multiplier_plane(&apply_pi_hat_plane(&ginv, p), spec);
            let lhs = apply_pi_hat_plane(g, &inner);
            (Sinogram::Plane(lhs), Sinogram::Plane(apply_multiplier_plane(p, spec)))
        }
        Sinogram::Line(l) => {
            let inner = apply_multiplier_line(&apply_pi_hat_line(&ginv, l), spec);
            let lhs = apply_pi_hat_line(g, &inner);
            (Sinogram::Line(lhs), Sinogram::Line(apply_multiplier_line(l, spec)))
        }
    };
    let den = js.norm();
    let num = lhs.minus(&js.scaled(zeta)).norm();
    if den == 0.0 {
        return if num == 0.0 { 0.0 } else { f64::INFINITY };
    }
    num / den
}

/// Largest `|ℱψ(0)|` accepted as zero mean.
pub const ADMISSIBLE_DC_TOL: f64 = 1e-8;

/// `∫ |ℱψ(ω)|² |ω|⁻³ dω`, evaluated on the spectrum of `ψ` padded twofold.
///
/// Fails with `NotAdmissible` when `ψ` has a nonzero mean.
pub fn admissibility_constant(psi: &Volume) -> Result<f64> {
    let spec = dft3_padded(psi, 2);
    let n = spec.n();
    let dc = spec.get(n / 2, n / 2, n / 2).norm();
    if dc > ADMISSIBLE_DC_TOL {
        return Err(Error::NotAdmissible(format!("mean of the wavelet is {dc:e}, must vanish")));
    }
    let dw = spec.freq_spacing();
    let terms = par::map_range(n, |k| {
        let mut row = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                let r = spec.frequency(i, j, k).norm();
                if r > 0.0 {
                    row.push(spec.get(i, j, k).norm_sqr() / (r * r * r));
                }
            }
        }
        par::pairwise_sum(&row)
    });
    let k = dw.powi(3) * par::pairwise_sum(&terms);
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::NotAdmissible(format!("admissibility integral is {k}")));
    }
    Ok(k)
}

/// Constant of the reproducing formula for SIM(3) with unit-mass rotations:
/// `∫_G |⟨f, π(g)ψ⟩|² dμ(g) = C_ψ ‖f‖²`, `C_ψ = admissibility_constant / 4π`.
pub fn calderon_constant(psi: &Volume) -> Result<f64> {
    Ok(admissibility_constant(psi)? / (4.0 * PI))
}

/// `ψ / √K`, so that the admissibility constant becomes 1.
pub fn normalize_admissible(psi: &Volume) -> Result<Volume> {
    let k = admissibility_constant(psi)?;
    Ok(psi.scaled(1.0 / k.sqrt()))
}
