//! In-place radix-2 FFT on power-of-two lengths.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

/// Unnormalized transform `X_k = Σ x_j e^{∓2πi jk/n}`; `inverse` selects the
/// plus sign. `data.len()` must be a power of two.
pub fn fft(data: &mut [Complex64], inverse: bool) {
    let n = data.len();
    assert!(n.is_power_of_two(), "FFT length must be a power of two");
    if n <= 1 {
        return;
    }
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            data.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * PI / len as f64;
        let half = len / 2;
        // twiddles computed directly rather than by recurrence, for accuracy
        let tw: Vec<Complex64> = (0..half)
            .map(|k| Complex64::from_polar(1.0, ang * k as f64))
            .collect();
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let a = data[start + k];
                let b = data[start + k + half] * tw[k];
                data[start + k] = a + b;
                data[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

/// Two-dimensional transform of a row-major `n × n` array.
pub fn fft2(data: &mut [Complex64], n: usize, inverse: bool) {
    assert_eq!(data.len(), n * n);
    for row in data.chunks_mut(n) {
        fft(row, inverse);
    }
    let mut col = alloc::vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = data[i * n + j];
        }
        fft(&mut col, inverse);
        for i in 0..n {
            data[i * n + j] = col[i];
        }
    }
}

/// Signed frequency of FFT index `i` for length `n`, in `[-n/2, n/2)`.
#[inline]
pub fn frequency(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}
