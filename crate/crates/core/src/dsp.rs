//! FFT, Walsh-Hadamard and dB helpers shared by the signal-processing modules.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Floor applied when converting to dB for CSV and plot output.
pub const DB_FLOOR: f64 = -100.0;

/// Unnormalized forward DFT, `X[k] = sum_p x[p] e^{-j 2 pi k p / n}`.
pub fn fft_in_place(buf: &mut [Complex64]) {
    if buf.len() <= 1 {
        return;
    }
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()).process(buf));
}

/// Unnormalized inverse DFT, `x[p] = sum_k X[k] e^{+j 2 pi k p / n}`.
pub fn ifft_in_place(buf: &mut [Complex64]) {
    if buf.len() <= 1 {
        return;
    }
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()).process(buf));
}

/// Unitary DFT (`F_N`, scaled by `1/sqrt(N)`).
pub fn unitary_dft(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    fft_in_place(&mut buf);
    scale(&mut buf, 1.0 / (x.len() as f64).sqrt());
    buf
}

/// Unitary inverse DFT (`F_N^H`).
pub fn unitary_idft(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    ifft_in_place(&mut buf);
    scale(&mut buf, 1.0 / (x.len() as f64).sqrt());
    buf
}

pub fn scale(buf: &mut [Complex64], s: f64) {
    for v in buf {
        *v *= s;
    }
}

/// In-place unnormalized fast Walsh-Hadamard transform in Sylvester
/// (natural) order. Length must be a power of two.
pub fn fwht_in_place(buf: &mut [Complex64]) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for i in (0..n).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (buf[j], buf[j + h]);
                buf[j] = a + b;
                buf[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Rotates so that index 0 moves to the centre, mapping FFT order
/// `0..n` onto signed bins `-n/2 .. n/2-1`.
pub fn fftshift<T: Clone>(v: &[T]) -> Vec<T> {
    let n = v.len();
    let half = n / 2;
    let mut out = Vec::with_capacity(n);
    out.extend_from_slice(&v[n - half..]);
    out.extend_from_slice(&v[..n - half]);
    out
}

/// Signed bin labels matching [`fftshift`] order.
pub fn shifted_axis(n: usize) -> Vec<i64> {
    let half = (n / 2) as i64;
    (0..n as i64).map(|i| i - half).collect()
}

/// Power ratio to dB, clamped at [`DB_FLOOR`].
pub fn to_db(x: f64) -> f64 {
    if x <= 0.0 {
        return DB_FLOOR;
    }
    (10.0 * x.log10()).max(DB_FLOOR)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn energy(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}
