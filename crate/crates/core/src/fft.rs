//! Thin wrappers around rustfft with a per-thread plan cache.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use std::cell::RefCell;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place forward DFT, unnormalized: X_k = sum_j x_j e^{-2pi i jk/n}.
pub(crate) fn forward(buf: &mut [Complex<f64>]) {
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_forward(buf.len());
        fft.process(buf);
    });
}

/// In-place inverse DFT, unnormalized: x_j = sum_k X_k e^{+2pi i jk/n}.
/// Callers divide by n themselves where a true inverse is needed.
pub(crate) fn inverse(buf: &mut [Complex<f64>]) {
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_inverse(buf.len());
        fft.process(buf);
    });
}

/// Evaluates c_0 + 2 * sum_{k=1}^{K} c_k cos(k omega) with a three-term
/// cosine recurrence (one cos call per evaluation, not per term).
pub(crate) fn cosine_series(coeffs: &[f64], omega: f64) -> f64 {
    if coeffs.is_empty() {
        return 0.0;
    }
    let mut acc = coeffs[0];
    if coeffs.len() == 1 {
        return acc;
    }
    let c1 = omega.cos();
    // cos(k*omega) via cos((k+1)w) = 2 cos(w) cos(kw) - cos((k-1)w)
    let mut prev = 1.0; // cos(0)
    let mut curr = c1; // cos(w)
    acc += 2.0 * coeffs[1] * curr;
    for &c in &coeffs[2..] {
        let next = 2.0 * c1 * curr - prev;
        prev = curr;
        curr = next;
        acc += 2.0 * c * curr;
    }
    acc
}
