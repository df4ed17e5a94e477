//! Convolution engines: double-precision FFT (linear and cyclic, k-fold)
//! and exact sparse integer convolution.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

/// Largest transform length accepted.
pub const MAX_FFT_LEN: usize = 1 << 27;

fn spectrum(planner_len: usize, data: &[f64]) -> Vec<Complex64> {
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(planner_len);
    let mut buf = vec![Complex64::new(0.0, 0.0); planner_len];
    for (i, &v) in data.iter().enumerate() {
        buf[i % planner_len].re += v;
    }
    fft.process(&mut buf);
    buf
}

fn multiply_and_invert(len: usize, arrays: &[&[f64]]) -> Vec<f64> {
    let spectra: Vec<Vec<Complex64>> = arrays.par_iter().map(|a| spectrum(len, a)).collect();
    let mut acc = spectra[0].clone();
    for s in &spectra[1..] {
        acc.par_iter_mut().zip(s.par_iter()).for_each(|(x, y)| *x *= *y);
    }
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_inverse(len).process(&mut acc);
    let scale = 1.0 / len as f64;
    acc.into_iter().map(|z| z.re * scale).collect()
}

/// Length of the linear convolution of the given arrays.
pub fn linear_len(lens: &[usize]) -> usize {
    if lens.iter().any(|&l| l == 0) {
        return 0;
    }
    lens.iter().map(|l| l - 1).sum::<usize>() + 1
}

/// Linear convolution of all arrays at once (product of spectra, one
/// inverse transform).
pub fn fft_linear_multi(arrays: &[&[f64]]) -> Vec<f64> {
    assert!(!arrays.is_empty());
    let out = linear_len(&arrays.iter().map(|a| a.len()).collect::<Vec<_>>());
    if out == 0 {
        return Vec::new();
    }
    if arrays.len() == 1 {
        return arrays[0].to_vec();
    }
    let len = out.next_power_of_two();
    let mut r = multiply_and_invert(len, arrays);
    r.truncate(out);
    r
}

pub fn fft_linear_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    fft_linear_multi(&[a, b])
}

/// Cyclic convolution of length `n`; inputs longer than `n` are folded.
pub fn fft_cyclic_multi(arrays: &[&[f64]], n: usize) -> Vec<f64> {
    assert!(n > 0 && !arrays.is_empty());
    multiply_and_invert(n, arrays)
}

/// Exact linear convolution, skipping zeros.
pub fn exact_linear_convolve(a: &[u64], b: &[u64]) -> Vec<u64> {
    let out = linear_len(&[a.len(), b.len()]);
    let mut r = vec![0u64; out];
    let bnz: Vec<(usize, u64)> = b.iter().copied().enumerate().filter(|&(_, v)| v != 0).collect();
    for (i, &va) in a.iter().enumerate() {
        if va == 0 {
            continue;
        }
        for &(j, vb) in &bnz {
            r[i + j] += va * vb;
        }
    }
    r
}

pub fn exact_linear_multi(arrays: &[&[u64]]) -> Vec<u64> {
    let mut acc = arrays[0].to_vec();
    for a in &arrays[1..] {
        acc = exact_linear_convolve(&acc, a);
    }
    acc
}
