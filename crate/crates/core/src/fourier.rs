//! Square 2-D FFT helpers on row-major buffers.

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

/// Unnormalized in-place 2-D DFT of an `n x n` row-major buffer.
///
/// `Forward` computes `sum_x a[x] e^{-2 pi i k x / n}`, `Inverse` the same with `+`.
pub fn fft2(data: &mut [Complex64], n: usize, direction: FftDirection) {
    assert_eq!(data.len(), n * n);
    if n == 1 {
        return;
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft(n, direction);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(data, &mut scratch);
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for c in 0..n {
        for r in 0..n {
            col[r] = data[r * n + c];
        }
        fft.process_with_scratch(&mut col, &mut scratch);
        for r in 0..n {
            data[r * n + c] = col[r];
        }
    }
}

pub fn forward(data: &mut [Complex64], n: usize) {
    fft2(data, n, FftDirection::Forward);
}

pub fn inverse(data: &mut [Complex64], n: usize) {
    fft2(data, n, FftDirection::Inverse);
}

/// Signed frequency of grid position `i` on an `n`-point axis.
#[inline]
pub fn freq_of(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Grid position of a signed frequency (wrapped).
#[inline]
pub fn pos_of(f: i64, n: usize) -> usize {
    f.rem_euclid(n as i64) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_dft() {
        let n = 8;
        let data: Vec<Complex64> = (0..n * n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut fast = data.clone();
        forward(&mut fast, n);
        for k0 in 0..n {
            for k1 in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for x0 in 0..n {
                    for x1 in 0..n {
                        let ph = -2.0 * std::f64::consts::PI * ((k0 * x0 + k1 * x1) as f64) / n as f64;
                        s += data[x0 * n + x1] * Complex64::from_polar(1.0, ph);
                    }
                }
                assert!((s - fast[k0 * n + k1]).norm() < 1e-12);
            }
        }
        inverse(&mut fast, n);
        for (a, b) in fast.iter().zip(&data) {
            assert!((a / (n * n) as f64 - b).norm() < 1e-14);
        }
    }

    #[test]
    fn frequency_positions() {
        assert_eq!(freq_of(3, 8), 3);
        assert_eq!(freq_of(4, 8), -4);
        assert_eq!(pos_of(-1, 8), 7);
        for i in 0..16 {
            assert_eq!(pos_of(freq_of(i, 16), 16), i);
        }
    }
}
