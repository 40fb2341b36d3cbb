use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn next_pow2(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

pub(crate) fn forward(buf: &mut [Complex64]) {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    fft.process(buf);
}

/// Inverse transform including the `1/N` scale.
pub(crate) fn inverse(buf: &mut [Complex64]) {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()));
    fft.process(buf);
    let scale = 1.0 / buf.len() as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// Zero-padded spectrum of a real sequence.
pub(crate) fn spectrum(x: &[f64], n: usize) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (b, v) in buf.iter_mut().zip(x) {
        b.re = *v;
    }
    forward(&mut buf);
    buf
}

/// Kernels up to this length are convolved directly.
const DIRECT_LIMIT: usize = 32;

/// Full linear convolution of two real sequences.
pub(crate) fn convolve_real(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let out_len = a.len() + b.len() - 1;
    if a.len().min(b.len()) <= DIRECT_LIMIT {
        let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
        let mut out = vec![0.0; out_len];
        for (j, s) in short.iter().enumerate() {
            for (o, l) in out[j..].iter_mut().zip(long) {
                *o += s * l;
            }
        }
        return out;
    }
    let n = next_pow2(out_len);
    let mut fa = spectrum(a, n);
    let fb = spectrum(b, n);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inverse(&mut fa);
    fa[..out_len].iter().map(|v| v.re).collect()
}
