//! Browser bindings for the static page in `www/`.
//!
//! Every entry point returns a JSON string so the page needs no glue beyond
//! `JSON.parse`.

use serde_json::json;
use simrad::group::{rot_axis, unit_normal};
use simrad::invert::{invert_direct_fourier, invert_fbp};
use simrad::verify::{intertwining_entries, CharacterMode};
use simrad::xform::{radon_plane, PlaneGeometry, PlaneProjector, Sinogram, SinogramGeometry};
use simrad::{Error, GroupElement, Phantom, Vec3, Volume};
use wasm_bindgen::prelude::*;

const N: usize = 32;
const H: f64 = 0.3;
const T_MAX: f64 = 6.0;
const N_T: usize = 81;

fn js(e: Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn volume(phantom: &str) -> Result<(Phantom, Volume), JsValue> {
    let p = Phantom::named(phantom).map_err(js)?;
    let v = p.sample(N, H).map_err(js)?;
    Ok((p, v))
}

fn central_slice(v: &Volume) -> Vec<f64> {
    let k = v.n() / 2;
    (0..v.n()).flat_map(|j| (0..v.n()).map(move |i| (i, j))).map(|(i, j)| v.get(i, j, k)).collect()
}

/// Plane integrals along one normal, sampled and closed form.
#[wasm_bindgen]
pub fn plane_profile(phantom: &str, theta_deg: f64, phi_deg: f64) -> Result<String, JsValue> {
    let (p, v) = volume(phantom)?;
    let n = unit_normal(theta_deg.to_radians(), phi_deg.to_radians());
    let dt = 2.0 * T_MAX / (N_T - 1) as f64;
    let measured = PlaneProjector::new(&v).project(&n, -T_MAX, dt, N_T);
    let t: Vec<f64> = (0..N_T).map(|k| -T_MAX + k as f64 * dt).collect();
    let exact: Vec<f64> = t.iter().map(|&t| p.plane_integral(&n, t)).collect();
    let max_err = measured.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(json!({ "t": t, "measured": measured, "exact": exact, "max_err": max_err }).to_string())
}

/// Radon transform on `directions²` normals, then FBP or direct Fourier
/// inversion; returns the central z slice of truth and reconstruction.
#[wasm_bindgen]
pub fn reconstruct(phantom: &str, directions: usize, method: &str) -> Result<String, JsValue> {
    let (_, v) = volume(phantom)?;
    let geom = PlaneGeometry::new(directions, directions, N_T, T_MAX).map_err(js)?;
    let s = Sinogram::Plane(radon_plane(&v, &geom).map_err(js)?);
    let r = match method {
        "fbp" => invert_fbp(&s, N, H).map_err(js)?,
        "fourier" => invert_direct_fourier(&s, N, H).map_err(js)?.volume,
        other => return Err(JsValue::from_str(&format!("unknown method `{other}`"))),
    };
    Ok(json!({
        "n": N,
        "truth": central_slice(&v),
        "recon": central_slice(&r),
        "rel_error": r.relative_error(&v, 0.8),
    })
    .to_string())
}

/// Residual of `R π(g) f = c π̂(g) R f` for the exact character, no
/// character, and the inverted character.
#[wasm_bindgen]
pub fn intertwining(phantom: &str, a: f64, angle_deg: f64, shift: f64) -> Result<String, JsValue> {
    let (_, v) = volume(phantom)?;
    let axis = Vec3::new(1.0, 1.0, 1.0).normalize();
    let g = GroupElement::new(Vec3::new(shift, 0.0, 0.0), rot_axis(&axis, angle_deg.to_radians()), a).map_err(js)?;
    let layout = SinogramGeometry::Plane(PlaneGeometry::new(16, 16, N_T, T_MAX).map_err(js)?);
    let s = layout.forward(&v).map_err(js)?;
    let modes = [CharacterMode::Exact, CharacterMode::Omit, CharacterMode::Inverted];
    let e = intertwining_entries(&layout, &s, &g, &v, &modes).map_err(js)?;
    Ok(json!({ "exact": e[0].residual, "omitted": e[1].residual, "inverted": e[2].residual }).to_string())
}
