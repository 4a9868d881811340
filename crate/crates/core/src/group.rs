//! The similitude group SIM(3) = R^3 ⋊ (SO(3) × R+) in closed form.
//!
//! Elements are triples `(b, R, a)` acting on points by `x ↦ b + aRx`. The
//! module also carries the two label spaces the group acts on transitively
//! (planes and lines of R^3), the Borel sections used to parametrize them,
//! the positive characters of the construction and the left Haar density.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Orthogonality residual above which `compose` projects back onto SO(3).
const DRIFT_TOL: f64 = 1e-12;
/// Tolerance accepted by [`GroupElement::new`].
const VALIDATION_TOL: f64 = 1e-9;
/// `|u_z|` above which a direction is treated as the pole `(0, 0)`.
const POLE_TOL: f64 = 1e-12;

/// Which family of submanifolds the label space describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Geometry {
    Plane,
    Line,
}

impl Geometry {
    pub fn name(self) -> &'static str {
        match self {
            Geometry::Plane => "plane",
            Geometry::Line => "line",
        }
    }
}

impl std::str::FromStr for Geometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plane" => Ok(Geometry::Plane),
            "line" => Ok(Geometry::Line),
            other => Err(Error::Format(format!("unknown geometry `{other}`"))),
        }
    }
}

/// An element `(b, R, a)` of SIM(3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement {
    b: Vec3,
    r: Mat3,
    a: f64,
}

impl GroupElement {
    /// Builds an element, checking `RᵀR = I`, `det R = 1` and `a > 0`.
    pub fn new(b: Vec3, r: Mat3, a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidElement(format!("dilation must be positive, got {a}")));
        }
        if !b.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidElement("translation is not finite".into()));
        }
        let ortho = orthogonality_residual(&r);
        let det = r.determinant();
        if !(ortho <= VALIDATION_TOL) || (det - 1.0).abs() > VALIDATION_TOL {
            return Err(Error::InvalidElement(format!(
                "matrix is not a rotation (|RᵀR - I| = {ortho:e}, det = {det})"
            )));
        }
        Ok(Self { b, r, a })
    }

    pub fn identity() -> Self {
        Self { b: Vec3::zeros(), r: Mat3::identity(), a: 1.0 }
    }

    pub fn translation(b: Vec3) -> Self {
        Self { b, ..Self::identity() }
    }

    /// Panics if `r` is not a rotation.
    pub fn rotation(r: Mat3) -> Self {
        Self::new(Vec3::zeros(), r, 1.0).expect("not a rotation matrix")
    }

    /// Panics unless `a > 0`.
    pub fn dilation(a: f64) -> Self {
        Self::new(Vec3::zeros(), Mat3::identity(), a).expect("dilation must be positive")
    }

    pub fn b(&self) -> Vec3 {
        self.b
    }

    pub fn rotation_matrix(&self) -> Mat3 {
        self.r
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Group law `(b, R, a)(b', R', a') = (b + aRb', RR', aa')`.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        let mut r = self.r * other.r;
        if orthogonality_residual(&r) > DRIFT_TOL {
            r = project_to_so3(&r);
        }
        GroupElement { b: self.b + self.a * (self.r * other.b), r, a: self.a * other.a }
    }

    /// `(−a⁻¹R⁻¹b, R⁻¹, a⁻¹)`.
    pub fn inverse(&self) -> GroupElement {
        let rt = self.r.transpose();
        GroupElement { b: -(rt * self.b) / self.a, r: rt, a: 1.0 / self.a }
    }

    /// Canonical action `x ↦ b + aRx`.
    pub fn act_point(&self, x: &Vec3) -> Vec3 {
        self.b + self.a * (self.r * x)
    }

    /// Inverse action `x ↦ a⁻¹R⁻¹(x − b)`.
    pub fn act_point_inverse(&self, x: &Vec3) -> Vec3 {
        self.r.tr_mul(&(x - self.b)) / self.a
    }

    /// Action on plane labels: the image of the plane `n·x = t` under `x ↦ b + aRx`.
    pub fn act_plane(&self, xi: &PlaneLabel) -> PlaneLabel {
        let m = self.r * unit_normal(xi.theta, xi.phi);
        let (theta, phi, sign) = canonicalize_unit(&m);
        PlaneLabel { theta, phi, t: sign * (self.a * xi.t + m.dot(&self.b)) }
    }

    /// Action on line labels: the image of the line `{s n + t_perp}`.
    ///
    /// The new offset is the foot of the image line on the plane through the
    /// origin orthogonal to the new direction.
    pub fn act_line(&self, xi: &LineLabel) -> LineLabel {
        let m = self.r * unit_normal(xi.theta, xi.phi);
        let (theta, phi, _) = canonicalize_unit(&m);
        let n = unit_normal(theta, phi);
        let p = self.act_point(&xi.t_perp);
        LineLabel { theta, phi, t_perp: p - n * n.dot(&p) }
    }

    /// Left Haar density `a⁻⁴` relative to `db dR da`.
    pub fn haar_weight(&self) -> f64 {
        self.a.powi(-4)
    }

    /// Max abs entry-wise distance to another element (all three components).
    pub fn distance(&self, other: &GroupElement) -> f64 {
        let db = (self.b - other.b).amax();
        let dr = (self.r - other.r).amax();
        db.max(dr).max((self.a - other.a).abs())
    }
}

fn orthogonality_residual(r: &Mat3) -> f64 {
    (r.transpose() * r - Mat3::identity()).norm()
}

/// Closest rotation in Frobenius norm (orthogonal polar factor).
pub fn project_to_so3(m: &Mat3) -> Mat3 {
    let svd = m.svd(true, true);
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut r = u * v_t;
    if r.determinant() < 0.0 {
        let mut u = u;
        u.column_mut(2).neg_mut();
        r = u * v_t;
    }
    r
}

/// Rotation by `angle` about the z axis.
pub fn rot_z(angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Rotation by `angle` about the y axis.
pub fn rot_y(angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    Mat3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

/// Rotation by `angle` about the x axis.
pub fn rot_x(angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    Mat3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

/// Rotation by `angle` about an arbitrary (not necessarily unit) axis.
pub fn rot_axis(axis: &Vec3, angle: f64) -> Mat3 {
    let k = axis.normalize();
    let kx = Mat3::new(0.0, -k.z, k.y, k.z, 0.0, -k.x, -k.y, k.x, 0.0);
    Mat3::identity() + kx * angle.sin() + kx * kx * (1.0 - angle.cos())
}

/// `n(θ, φ) = (sinφ cosθ, sinφ sinθ, cosφ)`.
pub fn unit_normal(theta: f64, phi: f64) -> Vec3 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vec3::new(sp * ct, sp * st, cp)
}

/// The section rotation `R_{θ,φ} = Rz(θ) Ry(φ)`, which sends `e₃` to `n(θ, φ)`.
pub fn rotation_from_angles(theta: f64, phi: f64) -> Mat3 {
    rot_z(theta) * rot_y(phi)
}

/// Returns `(θ, φ, sign)` with `(θ, φ)` in the punctured square
/// `([0,π) × (0,π)) ∪ {(0,0)}` and `n(θ, φ) = sign · u / |u|`.
pub fn canonicalize_direction(u: &Vec3) -> Result<(f64, f64, f64)> {
    let norm = u.norm();
    if !(norm >= 1e-10) {
        return Err(Error::ZeroVector(norm));
    }
    Ok(canonicalize_unit(&(u / norm)))
}

/// [`canonicalize_direction`] for a vector already known to be unit length.
pub fn canonicalize_unit(u: &Vec3) -> (f64, f64, f64) {
    if u.z.abs() > 1.0 - POLE_TOL {
        return (0.0, 0.0, u.z.signum());
    }
    let mut sign = 1.0;
    let mut theta = u.y.atan2(u.x);
    if theta < 0.0 || theta >= PI {
        sign = -1.0;
        theta = (-u.y).atan2(-u.x);
    }
    if theta <= 0.0 || theta >= PI {
        // only reachable through rounding right at the θ = 0 / θ = π seam
        theta = 0.0;
        if u.x < 0.0 {
            sign = -1.0;
        } else {
            sign = 1.0;
        }
    }
    let phi = (sign * u.z).clamp(-1.0, 1.0).acos();
    (theta, phi, sign)
}

/// Whether `(θ, φ)` lies in the punctured square.
pub fn in_punctured_square(theta: f64, phi: f64) -> bool {
    (theta == 0.0 && phi == 0.0) || ((0.0..PI).contains(&theta) && phi > 0.0 && phi < PI)
}

/// A plane `n(θ, φ) · x = t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneLabel {
    pub theta: f64,
    pub phi: f64,
    pub t: f64,
}

impl PlaneLabel {
    pub fn new(theta: f64, phi: f64, t: f64) -> Result<Self> {
        if !in_punctured_square(theta, phi) {
            return Err(Error::InvalidElement(format!(
                "({theta}, {phi}) is outside the punctured square"
            )));
        }
        Ok(Self { theta, phi, t })
    }

    /// The root plane `z = 0`.
    pub fn origin() -> Self {
        Self { theta: 0.0, phi: 0.0, t: 0.0 }
    }

    pub fn normal(&self) -> Vec3 {
        unit_normal(self.theta, self.phi)
    }

    /// Borel section `σ(θ, φ, t) = (t n(θ, φ), R_{θ,φ}, 1)`.
    pub fn section(&self) -> GroupElement {
        GroupElement {
            b: self.t * self.normal(),
            r: rotation_from_angles(self.theta, self.phi),
            a: 1.0,
        }
    }

    /// Point of the plane at in-plane coordinates `(x, y)`.
    pub fn point(&self, x: f64, y: f64) -> Vec3 {
        self.section().act_point(&Vec3::new(x, y, 0.0))
    }
}

/// A line `{s n(θ, φ) + t_perp}` with `t_perp ⟂ n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineLabel {
    pub theta: f64,
    pub phi: f64,
    pub t_perp: Vec3,
}

impl LineLabel {
    /// Fails if `(θ, φ)` is not canonical or `n · t_perp` exceeds `1e-10`.
    pub fn new(theta: f64, phi: f64, t_perp: Vec3) -> Result<Self> {
        if !in_punctured_square(theta, phi) {
            return Err(Error::InvalidElement(format!(
                "({theta}, {phi}) is outside the punctured square"
            )));
        }
        let dot = unit_normal(theta, phi).dot(&t_perp);
        if dot.abs() > 1e-10 {
            return Err(Error::InvalidElement(format!("offset not orthogonal to direction: {dot:e}")));
        }
        Ok(Self { theta, phi, t_perp })
    }

    /// The root line, the z axis.
    pub fn origin() -> Self {
        Self { theta: 0.0, phi: 0.0, t_perp: Vec3::zeros() }
    }

    pub fn direction(&self) -> Vec3 {
        unit_normal(self.theta, self.phi)
    }

    /// Borel section `σ(θ, φ, t) = (t, R_{θ,φ}, 1)`.
    pub fn section(&self) -> GroupElement {
        GroupElement { b: self.t_perp, r: rotation_from_angles(self.theta, self.phi), a: 1.0 }
    }

    pub fn point(&self, s: f64) -> Vec3 {
        self.t_perp + s * self.direction()
    }
}

/// The positive characters attached to one geometry.
///
/// `alpha` is the character of Lebesgue measure on R^3, `beta` of the
/// measure on the label space, `gamma` of the measure on the root
/// submanifold, and `chi = alpha^{1/2} beta^{-1/2} gamma^{-1}` is the factor
/// in `R π(g) = χ(g)^{-1} π̂(g) R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CharacterSet {
    pub geometry: Geometry,
}

impl CharacterSet {
    pub fn new(geometry: Geometry) -> Self {
        Self { geometry }
    }

    pub fn alpha(&self, g: &GroupElement) -> f64 {
        g.a.powi(3)
    }

    pub fn beta(&self, g: &GroupElement) -> f64 {
        match self.geometry {
            Geometry::Plane => g.a,
            Geometry::Line => g.a.powi(2),
        }
    }

    pub fn gamma(&self, g: &GroupElement) -> f64 {
        match self.geometry {
            Geometry::Plane => g.a.powi(2),
            Geometry::Line => g.a,
        }
    }

    pub fn chi(&self, g: &GroupElement) -> f64 {
        match self.geometry {
            Geometry::Plane => 1.0 / g.a,
            Geometry::Line => 1.0 / g.a.sqrt(),
        }
    }

    /// Weight of the unitarization operator's semi-invariance, `χ⁻¹`.
    pub fn zeta(&self, g: &GroupElement) -> f64 {
        1.0 / self.chi(g)
    }

    /// Exponent of `|τ|` in the unitarization multiplier.
    pub fn multiplier_exponent(&self) -> f64 {
        match self.geometry {
            Geometry::Plane => 1.0,
            Geometry::Line => 0.5,
        }
    }
}
