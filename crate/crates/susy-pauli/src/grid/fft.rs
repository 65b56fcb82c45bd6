//! Cached two-dimensional FFT passes for square power-of-two grids.
//!
//! `forward` leaves the data in transposed spectral layout `[kx, ky]`;
//! `inverse` takes that layout back to `[y, x]`. Row transforms run through
//! [`crate::exec`], so they parallelize without changing results.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type Plan = Arc<dyn Fft<f64>>;

fn plan(n: usize, inverse: bool) -> Plan {
    static PLANS: OnceLock<Mutex<HashMap<(usize, bool), Plan>>> = OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut cache = cache.lock().expect("fft plan cache poisoned");
    cache
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

fn row_pass(data: &mut [Complex64], n: usize, fft: &Plan) {
    let scratch_len = fft.get_inplace_scratch_len();
    crate::exec::for_each_row_scratch(
        data,
        n,
        || vec![Complex64::default(); scratch_len],
        |scratch, _i, row| fft.process_with_scratch(row, scratch),
    );
}

fn transpose_square(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// In-place 2D forward transform; output layout is `[kx, ky]` (transposed).
pub(crate) fn forward(data: &mut [Complex64], n: usize) {
    debug_assert_eq!(data.len(), n * n);
    let fft = plan(n, false);
    row_pass(data, n, &fft);
    transpose_square(data, n);
    row_pass(data, n, &fft);
}

/// Inverse of [`forward`]; expects `[kx, ky]` layout, restores `[y, x]`.
/// Unnormalized: a forward/inverse round trip scales by `n * n`.
pub(crate) fn inverse(data: &mut [Complex64], n: usize) {
    debug_assert_eq!(data.len(), n * n);
    let fft = plan(n, true);
    row_pass(data, n, &fft);
    transpose_square(data, n);
    row_pass(data, n, &fft);
}

/// Signed wavenumber for mode index `idx` on an `n`-point period-`l` grid.
pub(crate) fn wavenumber(idx: usize, n: usize, l: f64) -> f64 {
    let m = if idx < n / 2 {
        idx as isize
    } else {
        idx as isize - n as isize
    };
    2.0 * std::f64::consts::PI * m as f64 / l
}

/// Replaces `data` by the inverse transform of `mult(kx, ky)` times its
/// forward transform; the `1/n^2` round-trip factor is folded into `mult`.
pub(crate) fn apply_multiplier(
    data: &mut [Complex64],
    n: usize,
    l: f64,
    mult: impl Fn(f64, f64) -> Complex64 + Sync,
) {
    forward(data, n);
    let scale = 1.0 / (n * n) as f64;
    // Transposed layout: rows are kx, columns ky.
    crate::exec::for_each_row(data, n, |row_idx, row| {
        let kx = wavenumber(row_idx, n, l);
        for (col_idx, v) in row.iter_mut().enumerate() {
            let ky = wavenumber(col_idx, n, l);
            *v *= mult(kx, ky) * scale;
        }
    });
    inverse(data, n);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_restores_input() {
        let n = 16;
        let input: Vec<Complex64> = (0..n * n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut data = input.clone();
        forward(&mut data, n);
        inverse(&mut data, n);
        let scale = 1.0 / (n * n) as f64;
        for (a, b) in data.iter().zip(&input) {
            assert!((a * scale - b).norm() < 1e-13);
        }
    }

    #[test]
    fn wavenumber_layout() {
        let l = 4.0;
        let n = 8;
        assert_eq!(wavenumber(0, n, l), 0.0);
        assert!(wavenumber(1, n, l) > 0.0);
        assert!(wavenumber(n / 2, n, l) < 0.0);
        assert_eq!(wavenumber(n - 1, n, l), -wavenumber(1, n, l));
    }

    #[test]
    fn plane_wave_is_single_mode() {
        let n = 32;
        let l = 2.0 * std::f64::consts::PI;
        // e^{i(3x + 5y)} on an exact-period grid.
        let mut data = vec![Complex64::default(); n * n];
        for iy in 0..n {
            for ix in 0..n {
                let x = l * ix as f64 / n as f64;
                let y = l * iy as f64 / n as f64;
                data[iy * n + ix] = Complex64::from_polar(1.0, 3.0 * x + 5.0 * y);
            }
        }
        forward(&mut data, n);
        // Transposed layout: [kx = 3, ky = 5].
        let peak = data[3 * n + 5].norm() / (n * n) as f64;
        assert!((peak - 1.0).abs() < 1e-12);
        let energy: f64 = data.iter().map(|v| v.norm_sqr()).sum();
        assert!((energy / ((n * n) as f64 * (n * n) as f64) - 1.0).abs() < 1e-12);
    }
}
