//! Interpolation kernels: cubic B-splines (with the recursive prefilter),
//! Catmull-Rom and the trilinear sampler used for resampling volumes.

use crate::par;

/// Pole of the cubic B-spline prefilter, `√3 − 2`.
const POLE: f64 = -0.267_949_192_431_122_7;

/// Cubic B-spline weights for taps `i0-1 .. i0+2` at fractional offset `t ∈ [0, 1)`.
#[inline]
pub fn bspline_weights(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    let u = 1.0 - t;
    [
        u * u * u / 6.0,
        (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0,
        (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0,
        t3 / 6.0,
    ]
}

/// Catmull-Rom weights for taps `i0-1 .. i0+2` at fractional offset `t ∈ [0, 1)`.
#[inline]
pub fn catmull_rom_weights(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

/// Converts samples to cubic B-spline coefficients in place, mirror boundaries.
pub fn prefilter_line(line: &mut [f64]) {
    let n = line.len();
    if n < 2 {
        return;
    }
    let z = POLE;
    let gain = (1.0 - z) * (1.0 - 1.0 / z);
    for v in line.iter_mut() {
        *v *= gain;
    }
    // causal initialization, truncated geometric sum
    let horizon = n.min(40);
    let mut zk = z;
    let mut sum = line[0];
    for v in line.iter().take(horizon).skip(1) {
        sum += zk * v;
        zk *= z;
    }
    line[0] = sum;
    for k in 1..n {
        line[k] += z * line[k - 1];
    }
    line[n - 1] = (z / (z * z - 1.0)) * (line[n - 1] + z * line[n - 2]);
    for k in (0..n - 1).rev() {
        line[k] = z * (line[k + 1] - line[k]);
    }
}

/// Prefilters every line of an `n³` x-fastest array along `axis` (0 = x).
pub fn prefilter_axis(data: &mut [f64], n: usize, axis: usize) {
    assert_eq!(data.len(), n * n * n);
    match axis {
        0 => par::for_each_chunk(data, n, |_, line| prefilter_line(line)),
        1 => par::for_each_chunk(data, n * n, |_, plane| {
            let mut line = vec![0.0; n];
            for i in 0..n {
                for j in 0..n {
                    line[j] = plane[i + n * j];
                }
                prefilter_line(&mut line);
                for j in 0..n {
                    plane[i + n * j] = line[j];
                }
            }
        }),
        2 => {
            // gather z-lines, filter, scatter back
            let lines = par::map_range(n * n, |ij| {
                let mut line: Vec<f64> = (0..n).map(|k| data[ij + n * n * k]).collect();
                prefilter_line(&mut line);
                line
            });
            for (ij, line) in lines.into_iter().enumerate() {
                for (k, v) in line.into_iter().enumerate() {
                    data[ij + n * n * k] = v;
                }
            }
        }
        _ => panic!("axis must be 0, 1 or 2"),
    }
}

/// Splits a continuous index into the base tap and the fractional part.
#[inline]
pub fn split_index(x: f64) -> (isize, f64) {
    let f = x.floor();
    (f as isize, x - f)
}

/// Evaluates a prefiltered 1D spline at continuous index `x`, zero outside.
pub fn eval_bspline_1d(coef: &[f64], x: f64) -> f64 {
    let (i0, t) = split_index(x);
    let w = bspline_weights(t);
    let n = coef.len() as isize;
    let mut acc = 0.0;
    for (d, wd) in w.iter().enumerate() {
        let i = i0 - 1 + d as isize;
        if i >= 0 && i < n {
            acc += wd * coef[i as usize];
        }
    }
    acc
}

/// Trilinear sample of an `n³` x-fastest array at continuous index `(x, y, z)`,
/// zero outside the grid.
pub fn trilinear(data: &[f64], n: usize, x: f64, y: f64, z: f64) -> f64 {
    let nf = n as f64;
    if !(x > -1.0 && y > -1.0 && z > -1.0 && x < nf && y < nf && z < nf) {
        return 0.0;
    }
    let (i0, fx) = split_index(x);
    let (j0, fy) = split_index(y);
    let (k0, fz) = split_index(z);
    let ni = n as isize;
    let mut acc = 0.0;
    for (dk, wk) in [(0, 1.0 - fz), (1, fz)] {
        let k = k0 + dk;
        if k < 0 || k >= ni || wk == 0.0 {
            continue;
        }
        for (dj, wj) in [(0, 1.0 - fy), (1, fy)] {
            let j = j0 + dj;
            if j < 0 || j >= ni || wj == 0.0 {
                continue;
            }
            let row = (j + ni * k) as usize * n;
            for (di, wi) in [(0, 1.0 - fx), (1, fx)] {
                let i = i0 + di;
                if i < 0 || i >= ni {
                    continue;
                }
                acc += wk * wj * wi * data[row + i as usize];
            }
        }
    }
    acc
}

/// Linear interpolation on a uniform grid `x_k = x0 + k·dx`, zero outside.
#[inline]
pub fn linear_uniform(values: &[f64], x0: f64, dx: f64, x: f64) -> f64 {
    let s = (x - x0) / dx;
    let n = values.len();
    if !(s >= 0.0) || s > (n - 1) as f64 {
        return 0.0;
    }
    let (i0, t) = split_index(s);
    let i0 = i0 as usize;
    if i0 + 1 >= n {
        return values[n - 1];
    }
    values[i0] * (1.0 - t) + values[i0 + 1] * t
}

/// Bilinear interpolation on a uniform `n × n` grid (second index fastest),
/// zero outside.
#[inline]
pub fn bilinear_uniform(values: &[f64], n: usize, x0: f64, dx: f64, u: f64, v: f64) -> f64 {
    let su = (u - x0) / dx;
    let sv = (v - x0) / dx;
    let last = (n - 1) as f64;
    if !(su >= 0.0 && sv >= 0.0) || su > last || sv > last {
        return 0.0;
    }
    let i0 = (su.floor() as usize).min(n - 2);
    let j0 = (sv.floor() as usize).min(n - 2);
    let a = su - i0 as f64;
    let b = sv - j0 as f64;
    let r0 = i0 * n;
    let r1 = r0 + n;
    (1.0 - a) * ((1.0 - b) * values[r0 + j0] + b * values[r0 + j0 + 1])
        + a * ((1.0 - b) * values[r1 + j0] + b * values[r1 + j0 + 1])
}

/// Catmull-Rom interpolation of uniform samples, zero outside `[x0, x0 + (n−1)dx]`.
pub fn cubic_uniform(values: &[f64], x0: f64, dx: f64, x: f64) -> f64 {
    let s = (x - x0) / dx;
    let n = values.len() as isize;
    if !(s >= 0.0) || s > (n - 1) as f64 {
        return 0.0;
    }
    let (i0, a) = split_index(s);
    catmull_rom_weights(a)
        .iter()
        .enumerate()
        .map(|(di, w)| {
            let i = i0 - 1 + di as isize;
            if i >= 0 && i < n {
                w * values[i as usize]
            } else {
                0.0
            }
        })
        .sum()
}

/// Catmull-Rom counterpart of [`bilinear_uniform`]; samples outside the
/// grid count as zero.
pub fn cubic_uniform_2d(values: &[f64], n: usize, x0: f64, dx: f64, u: f64, v: f64) -> f64 {
    let su = (u - x0) / dx;
    let sv = (v - x0) / dx;
    let last = (n - 1) as f64;
    if !(su >= 0.0 && sv >= 0.0) || su > last || sv > last {
        return 0.0;
    }
    let (i0, a) = split_index(su);
    let (j0, b) = split_index(sv);
    let wa = catmull_rom_weights(a);
    let wb = catmull_rom_weights(b);
    let n_i = n as isize;
    let mut acc = 0.0;
    for (di, wi) in wa.iter().enumerate() {
        let i = i0 - 1 + di as isize;
        if i < 0 || i >= n_i {
            continue;
        }
        let row = &values[i as usize * n..(i as usize + 1) * n];
        let mut inner = 0.0;
        for (dj, wj) in wb.iter().enumerate() {
            let j = j0 - 1 + dj as isize;
            if j >= 0 && j < n_i {
                inner += wj * row[j as usize];
            }
        }
        acc += wi * inner;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_partition_unity() {
        for k in 0..20 {
            let t = k as f64 / 20.0;
            let b: f64 = bspline_weights(t).iter().sum();
            let c: f64 = catmull_rom_weights(t).iter().sum();
            assert!((b - 1.0).abs() < 1e-14);
            assert!((c - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn prefilter_interpolates_samples() {
        let samples: Vec<f64> = (0..64).map(|i| (-(i as f64 - 32.0).powi(2) / 40.0).exp()).collect();
        let mut coef = samples.clone();
        prefilter_line(&mut coef);
        for (i, s) in samples.iter().enumerate().skip(2).take(60) {
            assert!((eval_bspline_1d(&coef, i as f64) - s).abs() < 1e-10, "{i}");
        }
    }

    #[test]
    fn spline_beats_linear_between_nodes() {
        let f = |x: f64| (-(x - 20.0).powi(2) / 18.0).exp();
        let samples: Vec<f64> = (0..40).map(|i| f(i as f64)).collect();
        let mut coef = samples.clone();
        prefilter_line(&mut coef);
        let mut worst_spline: f64 = 0.0;
        let mut worst_linear: f64 = 0.0;
        for k in 0..300 {
            let x = 5.0 + k as f64 * 0.1;
            worst_spline = worst_spline.max((eval_bspline_1d(&coef, x) - f(x)).abs());
            worst_linear = worst_linear.max((linear_uniform(&samples, 0.0, 1.0, x) - f(x)).abs());
        }
        assert!(worst_spline < 1e-3, "{worst_spline}");
        assert!(worst_spline < worst_linear / 5.0);
    }

    #[test]
    fn axis_prefilter_matches_line_prefilter() {
        let n = 8;
        let data: Vec<f64> = (0..n * n * n).map(|i| ((i * 37) % 11) as f64).collect();
        for axis in 0..3 {
            let mut out = data.clone();
            prefilter_axis(&mut out, n, axis);
            let stride = [1, n, n * n][axis];
            let start = 3 * [n, 1, 1][axis] + 2 * [n * n, n * n, n][axis];
            let mut line: Vec<f64> = (0..n).map(|k| data[start + stride * k]).collect();
            prefilter_line(&mut line);
            for k in 0..n {
                assert!((line[k] - out[start + stride * k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn trilinear_reproduces_linear_functions() {
        let n = 6;
        let f = |x: f64, y: f64, z: f64| 1.0 + 2.0 * x - y + 0.5 * z;
        let mut data = vec![0.0; n * n * n];
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    data[i + n * (j + n * k)] = f(i as f64, j as f64, k as f64);
                }
            }
        }
        let v = trilinear(&data, n, 1.3, 2.7, 4.1);
        assert!((v - f(1.3, 2.7, 4.1)).abs() < 1e-12);
        assert_eq!(trilinear(&data, n, -1.5, 0.0, 0.0), 0.0);
    }
}
