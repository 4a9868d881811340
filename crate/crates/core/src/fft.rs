//! Multi-dimensional FFTs over x-fastest arrays, built on rustfft.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::par;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

fn plan(n: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    let mut planner = FftPlanner::new();
    match dir {
        Direction::Forward => planner.plan_fft_forward(n),
        Direction::Inverse => planner.plan_fft_inverse(n),
    }
}

/// Unnormalized 1D transform of every contiguous `n`-chunk of `data`.
pub fn fft_rows(data: &mut [Complex64], n: usize, dir: Direction) {
    let fft = plan(n, dir);
    // batches keep the parallel tasks coarse
    let batch = n * (4096 / n).max(1);
    par::for_each_chunk(data, batch, |_, chunk| fft.process(chunk));
}

/// Unnormalized transform along one axis of an `n0 × n1 × n2` array
/// (index `i0 + n0 (i1 + n1 i2)`).
pub fn fft_axis(data: &mut [Complex64], dims: [usize; 3], axis: usize, dir: Direction) {
    let [n0, n1, n2] = dims;
    assert_eq!(data.len(), n0 * n1 * n2);
    match axis {
        0 => fft_rows(data, n0, dir),
        1 => {
            let fft = plan(n1, dir);
            par::for_each_chunk(data, n0 * n1, |_, slab| {
                let mut line = vec![Complex64::default(); n1];
                for i0 in 0..n0 {
                    for i1 in 0..n1 {
                        line[i1] = slab[i0 + n0 * i1];
                    }
                    fft.process(&mut line);
                    for i1 in 0..n1 {
                        slab[i0 + n0 * i1] = line[i1];
                    }
                }
            });
        }
        2 => {
            let fft = plan(n2, dir);
            let plane = n0 * n1;
            let lines = par::map_range(plane, |p| {
                let mut line: Vec<Complex64> = (0..n2).map(|i2| data[p + plane * i2]).collect();
                fft.process(&mut line);
                line
            });
            for (p, line) in lines.into_iter().enumerate() {
                for (i2, v) in line.into_iter().enumerate() {
                    data[p + plane * i2] = v;
                }
            }
        }
        _ => panic!("axis must be 0, 1 or 2"),
    }
}

/// Unnormalized 3D transform of an `n³` array.
pub fn fft3(data: &mut [Complex64], n: usize, dir: Direction) {
    for axis in 0..3 {
        fft_axis(data, [n, n, n], axis, dir);
    }
}

/// Unnormalized 2D transform of an `n × n` array (second index fastest).
pub fn fft2(data: &mut [Complex64], n: usize, fft: &dyn Fft<f64>) {
    for row in data.chunks_mut(n) {
        fft.process(row);
    }
    let mut col = vec![Complex64::default(); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = data[i * n + j];
        }
        fft.process(&mut col);
        for i in 0..n {
            data[i * n + j] = col[i];
        }
    }
}

/// Planner shortcut for callers that reuse one size many times.
pub fn planner_1d(n: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    plan(n, dir)
}

/// Signed frequency index of FFT bin `m` for length `n`: `0, 1, .., −1`.
#[inline]
pub fn signed_index(m: usize, n: usize) -> i64 {
    if m <= (n - 1) / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_3d() {
        let n = 8;
        let orig: Vec<Complex64> =
            (0..n * n * n).map(|i| Complex64::new((i % 7) as f64, (i % 3) as f64)).collect();
        let mut data = orig.clone();
        fft3(&mut data, n, Direction::Forward);
        fft3(&mut data, n, Direction::Inverse);
        let scale = 1.0 / (n * n * n) as f64;
        for (a, b) in data.iter().zip(&orig) {
            assert!((a * scale - b).norm() < 1e-12);
        }
    }

    #[test]
    fn axis_transform_of_impulse_is_flat() {
        let n = 8;
        let mut data = vec![Complex64::default(); n * n * n];
        data[0] = Complex64::new(1.0, 0.0);
        fft3(&mut data, n, Direction::Forward);
        assert!(data.iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-14));
    }

    #[test]
    fn signed_indices() {
        assert_eq!(signed_index(0, 8), 0);
        assert_eq!(signed_index(3, 8), 3);
        assert_eq!(signed_index(4, 8), -4);
        assert_eq!(signed_index(4, 9), 4);
        assert_eq!(signed_index(5, 9), -4);
    }
}
