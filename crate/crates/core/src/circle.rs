//! Representation counts `S(N)` for `Σ a_i p_i = N` by convolution of
//! per-field prime arrays, a brute-force oracle, the sieved coefficients
//! `h♯(N)`, norms of `H♭`, and the comparison against the main term.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::conv::{exact_linear_multi, fft_linear_multi, linear_len, MAX_FFT_LEN};
use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::sieve::{sieved_weight_array, weighted_prime_array, PrimeTable, WeightedPrimeArray};
use crate::singular::{LocalFactorReport, LocalFactors};

/// Largest `Σ|a_i|·X·2` accepted.
pub const MAX_ARRAY_SPAN: u64 = 100_000_000;
/// Exact integer convolution cross-checks the FFT channel up to this `X`.
pub const EXACT_CHECK_X: u64 = 10_000;
/// Rows closer than this fraction of the attainable range to either end are
/// flagged `boundary`.
pub const BOUNDARY_FRACTION: f64 = 0.05;

/// Coefficients of `H(α) = Σ_N S(N) e(Nα)`; index 0 is `N = offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientArray {
    pub offset: i64,
    pub weighted: Vec<f64>,
    pub unweighted: Vec<u64>,
    /// Largest |rounded FFT − exact| seen on the unweighted channel, when
    /// the exact check ran.
    pub exact_check: Option<f64>,
}

impl CoefficientArray {
    pub fn len(&self) -> usize {
        self.weighted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weighted.is_empty()
    }

    pub fn n_max(&self) -> i64 {
        self.offset + self.len() as i64 - 1
    }

    fn index(&self, n: i64) -> Option<usize> {
        let i = n - self.offset;
        (i >= 0 && (i as usize) < self.len()).then_some(i as usize)
    }

    /// `(weighted, unweighted)` at `N`; zero outside the array.
    pub fn get(&self, n: i64) -> (f64, u64) {
        self.index(n)
            .map(|i| (self.weighted[i], self.unweighted[i]))
            .unwrap_or((0.0, 0))
    }

    pub fn total_unweighted(&self) -> u128 {
        self.unweighted.iter().map(|&v| v as u128).sum()
    }
}

fn check_size(instance: &ProblemInstance) -> Result<usize> {
    let span: u64 = instance.a.iter().map(|v| v.unsigned_abs()).sum::<u64>() * instance.x * 2;
    if span > MAX_ARRAY_SPAN {
        return Err(Error::ResourceLimit(format!(
            "Σ|a_i|·X·2 = {span} exceeds {MAX_ARRAY_SPAN}"
        )));
    }
    let lens: Vec<usize> = instance
        .a
        .iter()
        .map(|v| (v.unsigned_abs() * instance.x) as usize + 1)
        .collect();
    let len = linear_len(&lens);
    if len.next_power_of_two() > MAX_FFT_LEN {
        return Err(Error::ResourceLimit(format!("transform length {len} too large")));
    }
    Ok(len)
}

fn check_table(table: &PrimeTable, x: u64) -> Result<()> {
    if x > table.limit() {
        return Err(Error::ResourceLimit(format!(
            "X = {x} exceeds the prime table limit {}",
            table.limit()
        )));
    }
    Ok(())
}

/// Places `vals[n]` at `a·n − min(0, a·X)`.
pub fn stretch<T: Copy + Default>(vals: &[T], a: i64, x: u64) -> Vec<T> {
    let s = a.unsigned_abs() as usize;
    let xz = x as usize;
    let mut out = vec![T::default(); s * xz + 1];
    for (n, &v) in vals.iter().enumerate().take(xz + 1) {
        let i = if a > 0 { s * n } else { s * (xz - n) };
        out[i] = v;
    }
    out
}

fn prime_arrays(table: &PrimeTable, instance: &ProblemInstance) -> Result<Vec<WeightedPrimeArray>> {
    let mut cache: HashMap<(String, String), WeightedPrimeArray> = HashMap::new();
    let mut out = Vec::new();
    for f in &instance.fields {
        let key = (f.spec.to_json(), f.class_label.clone());
        if !cache.contains_key(&key) {
            let w = weighted_prime_array(table, &f.spec, f.class(), instance.x)?;
            cache.insert(key.clone(), w);
        }
        out.push(cache[&key].clone());
    }
    Ok(out)
}

/// `S(N)` for every attainable `N`, weighted by `∏ log p_i` and unweighted.
pub fn representation_counts(table: &PrimeTable, instance: &ProblemInstance) -> Result<CoefficientArray> {
    instance.validate()?;
    check_size(instance)?;
    check_table(table, instance.x)?;
    let x = instance.x;
    let arrays = prime_arrays(table, instance)?;
    let weighted_in: Vec<Vec<f64>> = arrays
        .iter()
        .zip(&instance.a)
        .map(|(w, &a)| stretch(&w.weights, a, x))
        .collect();
    let indicator_in: Vec<Vec<f64>> = arrays
        .iter()
        .zip(&instance.a)
        .map(|(w, &a)| {
            let v: Vec<f64> = w.indicator.iter().map(|&b| b as f64).collect();
            stretch(&v, a, x)
        })
        .collect();
    let wref: Vec<&[f64]> = weighted_in.iter().map(|v| v.as_slice()).collect();
    let iref: Vec<&[f64]> = indicator_in.iter().map(|v| v.as_slice()).collect();
    let (mut weighted, counts) = rayon::join(|| fft_linear_multi(&wref), || fft_linear_multi(&iref));
    let mut unweighted: Vec<u64> = counts.iter().map(|v| v.round().max(0.0) as u64).collect();

    let mut exact_check = None;
    if x <= EXACT_CHECK_X {
        let ind: Vec<Vec<u64>> = arrays
            .iter()
            .zip(&instance.a)
            .map(|(w, &a)| {
                let v: Vec<u64> = w.indicator.iter().map(|&b| b as u64).collect();
                stretch(&v, a, x)
            })
            .collect();
        let refs: Vec<&[u64]> = ind.iter().map(|v| v.as_slice()).collect();
        let exact = exact_linear_multi(&refs);
        let dev = counts
            .iter()
            .zip(&exact)
            .map(|(f, &e)| (f - e as f64).abs())
            .fold(0.0, f64::max);
        exact_check = Some(dev);
        unweighted = exact;
    }
    for (w, &u) in weighted.iter_mut().zip(&unweighted) {
        if u == 0 {
            *w = 0.0;
        }
    }
    let (offset, _) = instance.n_bounds();
    Ok(CoefficientArray {
        offset,
        weighted,
        unweighted,
        exact_check,
    })
}

#[derive(Clone, Copy, Debug, Default)]
struct Neumaier {
    sum: f64,
    c: f64,
}

impl Neumaier {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.c += (self.sum - t) + v;
        } else {
            self.c += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.c
    }
}

type Partial = HashMap<i64, (Neumaier, u64)>;

/// All `(Σ a_i p_i, ∏ log p_i)` over the given fields, aggregated by sum.
fn enumerate_half(lists: &[(i64, Vec<(u64, f64)>)]) -> Partial {
    let mut acc: Partial = HashMap::new();
    acc.insert(0, (Neumaier { sum: 1.0, c: 0.0 }, 1));
    for (a, primes) in lists {
        let mut next: Partial = HashMap::new();
        let mut keys: Vec<i64> = acc.keys().copied().collect();
        keys.sort_unstable();
        for s in keys {
            let (w, c) = acc[&s];
            let wv = w.value();
            for &(p, lp) in primes {
                let e = next.entry(s + a * p as i64).or_default();
                e.0.add(wv * lp);
                e.1 += c;
            }
        }
        acc = next;
    }
    acc
}

fn prime_lists(table: &PrimeTable, instance: &ProblemInstance) -> Result<Vec<(i64, Vec<(u64, f64)>)>> {
    check_table(table, instance.x)?;
    Ok(prime_arrays(table, instance)?
        .into_iter()
        .zip(&instance.a)
        .map(|(w, &a)| (a, w.support().into_iter().map(|p| (p, (p as f64).ln())).collect()))
        .collect())
}

/// `S(N)` by meet-in-the-middle enumeration over the classified primes.
pub fn brute_force_s(table: &PrimeTable, instance: &ProblemInstance, n: i64) -> Result<(f64, u64)> {
    instance.validate()?;
    let lists = prime_lists(table, instance)?;
    let h = lists.len() / 2;
    let left = enumerate_half(&lists[..h]);
    let right = enumerate_half(&lists[h..]);
    let mut keys: Vec<i64> = left.keys().copied().collect();
    keys.sort_unstable();
    let mut w = Neumaier::default();
    let mut c = 0u64;
    for s in keys {
        if let Some((rw, rc)) = right.get(&(n - s)) {
            let (lw, lc) = left[&s];
            w.add(lw.value() * rw.value());
            c += lc * rc;
        }
    }
    Ok((w.value(), c))
}

/// `S(N)` for every `N` by direct enumeration of all prime tuples.
pub fn brute_force_all(table: &PrimeTable, instance: &ProblemInstance) -> Result<CoefficientArray> {
    instance.validate()?;
    let lists = prime_lists(table, instance)?;
    let all = enumerate_half(&lists);
    let (lo, hi) = instance.n_bounds();
    let len = (hi - lo + 1) as usize;
    let mut weighted = vec![0.0; len];
    let mut unweighted = vec![0u64; len];
    for (s, (w, c)) in all {
        let i = (s - lo) as usize;
        weighted[i] = w.value();
        unweighted[i] = c;
    }
    Ok(CoefficientArray {
        offset: lo,
        weighted,
        unweighted,
        exact_check: None,
    })
}

/// `h♯(N)` for every `N`: `(∏|C_i|/|G_i|)·Σ ∏ Λ_{K_i,C_i}(n_i) Λ_z(n_i)` over
/// `0 ≤ n_i ≤ X`, `Σ a_i n_i = N`.
pub fn h_sharp_coefficients(table: &PrimeTable, instance: &ProblemInstance, z: f64) -> Result<CoefficientArray> {
    instance.validate()?;
    check_size(instance)?;
    check_table(table, instance.x)?;
    let x = instance.x;
    let mut density = 1.0;
    let mut arrays = Vec::new();
    for (f, &a) in instance.fields.iter().zip(&instance.a) {
        let (num, den) = f.spec.density(f.class());
        density *= num as f64 / den as f64;
        let w = sieved_weight_array(table, &f.spec, f.class(), z, x)?;
        arrays.push(stretch(&w, a, x));
    }
    let refs: Vec<&[f64]> = arrays.iter().map(|v| v.as_slice()).collect();
    let weighted: Vec<f64> = fft_linear_multi(&refs).into_iter().map(|v| v * density).collect();
    let (offset, _) = instance.n_bounds();
    let len = weighted.len();
    Ok(CoefficientArray {
        offset,
        weighted,
        unweighted: vec![0; len],
        exact_check: None,
    })
}

pub fn h_sharp_coefficient(table: &PrimeTable, instance: &ProblemInstance, z: f64, n: i64) -> Result<f64> {
    Ok(h_sharp_coefficients(table, instance, z)?.get(n).0)
}

/// `|Σ_N c_N e(Nj/M)|` for `j` in `0..M`.
pub fn grid_abs(coeffs: &[f64], m: usize) -> Vec<f64> {
    if m == 0 {
        return Vec::new();
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for (i, &c) in coeffs.iter().enumerate() {
        buf[i % m].re += c;
    }
    FftPlanner::<f64>::new().plan_fft_inverse(m).process(&mut buf);
    buf.into_iter().map(|z| z.norm()).collect()
}

/// Mean of `|H|²` over `M` equally spaced points (trapezoid on the circle).
pub fn grid_l2_squared(coeffs: &[f64], m: usize) -> f64 {
    let g = grid_abs(coeffs, m);
    g.iter().map(|v| v * v).sum::<f64>() / m as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatNorms {
    #[serde(rename = "L1")]
    pub l1: f64,
    #[serde(rename = "L2")]
    pub l2: f64,
    /// `(mean |H♭|² on the grid)^{1/2}`, for comparison with the Parseval `L2`.
    pub l2_grid: f64,
}

/// `L¹` and `L²` norms of `H♭ = H − H♯` on `[0, 1)`.
pub fn h_flat_norms(table: &PrimeTable, instance: &ProblemInstance, z: f64) -> Result<FlatNorms> {
    if instance.x < 2 {
        return Ok(FlatNorms { l1: 0.0, l2: 0.0, l2_grid: 0.0 });
    }
    let s = representation_counts(table, instance)?;
    let h = h_sharp_coefficients(table, instance, z)?;
    let flat: Vec<f64> = s.weighted.iter().zip(&h.weighted).map(|(a, b)| a - b).collect();
    Ok(flat_norms(&flat))
}

pub fn flat_norms(flat: &[f64]) -> FlatNorms {
    let l2 = flat.iter().map(|v| v * v).sum::<f64>().sqrt();
    let m = 4 * flat.len();
    let g = grid_abs(flat, m);
    let l1 = g.iter().sum::<f64>() / m as f64;
    let l2_grid = (g.iter().map(|v| v * v).sum::<f64>() / m as f64).sqrt();
    FlatNorms { l1, l2, l2_grid }
}

/// One line of the comparison table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyRow {
    #[serde(rename = "N")]
    pub n: i64,
    pub s_unweighted: u64,
    pub s_weighted: f64,
    pub c_inf: f64,
    pub c_d: f64,
    pub euler: f64,
    pub main_term: f64,
    pub ratio: Option<f64>,
    pub flags: Vec<String>,
}

impl VerifyRow {
    pub const CSV_HEADER: &'static str = "N,S_unweighted,S_weighted,C_inf,C_D,euler,main_term,ratio,flags";

    pub fn csv(&self) -> String {
        format!(
            "{},{},{:.10e},{:.10e},{},{:.12},{:.10e},{},{}",
            self.n,
            self.s_unweighted,
            self.s_weighted,
            self.c_inf,
            self.c_d,
            self.euler,
            self.main_term,
            self.ratio.map(|r| format!("{r:.8}")).unwrap_or_default(),
            self.flags.join(";")
        )
    }
}

fn row_from(n: i64, s: (f64, u64), report: &LocalFactorReport, bounds: (i64, i64)) -> VerifyRow {
    let mut flags = Vec::new();
    let (lo, hi) = bounds;
    if n < lo || n > hi {
        flags.push("unattainable".to_string());
    } else {
        let margin = BOUNDARY_FRACTION * (hi - lo) as f64;
        if ((n - lo) as f64) < margin || ((hi - n) as f64) < margin {
            flags.push("boundary".to_string());
        }
    }
    if let Some(v) = &report.vanishing_reason {
        flags.push(format!("vanishing:{v}"));
    }
    let ratio = (report.main_term > 0.0).then(|| s.0 / report.main_term);
    if ratio.is_none() && s.1 > 0 {
        flags.push("lhs_nonzero".to_string());
    }
    VerifyRow {
        n,
        s_unweighted: s.1,
        s_weighted: s.0,
        c_inf: report.c_inf,
        c_d: report.c_d_value,
        euler: report.euler_truncated,
        main_term: report.main_term,
        ratio,
        flags,
    }
}

/// Rows comparing `S(N)` against the main term for each `N`.
pub fn verify_theorem(
    table: &PrimeTable,
    instance: &ProblemInstance,
    ns: &[i64],
    p_max: u64,
) -> Result<Vec<VerifyRow>> {
    let s = representation_counts(table, instance)?;
    verify_with_counts(&s, instance, ns, p_max)
}

pub fn verify_with_counts(
    s: &CoefficientArray,
    instance: &ProblemInstance,
    ns: &[i64],
    p_max: u64,
) -> Result<Vec<VerifyRow>> {
    let local = LocalFactors::new(instance, p_max)?;
    let bounds = instance.n_bounds();
    Ok(ns
        .par_iter()
        .map(|&n| row_from(n, s.get(n), &local.report(n), bounds))
        .collect())
}

/// Linear-interpolated quantile of unsorted data; `None` when empty.
pub fn quantile(data: &[f64], q: f64) -> Option<f64> {
    if data.is_empty() {
        return None;
    }
    let mut v = data.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    Some(if i + 1 < v.len() { v[i] + frac * (v[i + 1] - v[i]) } else { v[i] })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub rows: usize,
    pub ratio_rows: usize,
    pub vanishing_rows: usize,
    pub boundary_rows: usize,
    pub median_ratio: Option<f64>,
    pub median_abs_dev: Option<f64>,
    pub p90_abs_dev: Option<f64>,
    pub max_abs_dev: Option<f64>,
    /// Fraction of rows with `|S − main| > main/2`.
    pub bad_fraction: f64,
}

pub fn summarize(rows: &[VerifyRow]) -> VerifySummary {
    let interior: Vec<&VerifyRow> = rows
        .iter()
        .filter(|r| !r.flags.iter().any(|f| f == "boundary" || f == "unattainable"))
        .collect();
    let ratios: Vec<f64> = interior.iter().filter_map(|r| r.ratio).collect();
    let devs: Vec<f64> = ratios.iter().map(|r| (r - 1.0).abs()).collect();
    VerifySummary {
        rows: rows.len(),
        ratio_rows: ratios.len(),
        vanishing_rows: rows.iter().filter(|r| r.flags.iter().any(|f| f.starts_with("vanishing"))).count(),
        boundary_rows: rows.iter().filter(|r| r.flags.iter().any(|f| f == "boundary")).count(),
        median_ratio: quantile(&ratios, 0.5),
        median_abs_dev: quantile(&devs, 0.5),
        p90_abs_dev: quantile(&devs, 0.9),
        max_abs_dev: devs.iter().copied().reduce(f64::max),
        bad_fraction: bad_fraction(rows),
    }
}

/// Fraction of rows with `|S(N) − main(N)| > main(N)/2`.
pub fn bad_fraction(rows: &[VerifyRow]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let bad = rows
        .iter()
        .filter(|r| (r.s_weighted - r.main_term).abs() > r.main_term / 2.0)
        .count();
    bad as f64 / rows.len() as f64
}

/// Histogram of `|S − main| / main` over rows with a positive main term.
pub fn deviation_histogram(rows: &[VerifyRow], edges: &[f64]) -> Vec<u64> {
    let mut bins = vec![0u64; edges.len() + 1];
    for r in rows.iter().filter(|r| r.main_term > 0.0) {
        let d = (r.s_weighted - r.main_term).abs() / r.main_term;
        let i = edges.iter().position(|&e| d < e).unwrap_or(edges.len());
        bins[i] += 1;
    }
    bins
}

/// Number of classified primes `≤ X` for each field.
pub fn classified_prime_counts(table: &PrimeTable, instance: &ProblemInstance) -> Result<Vec<u64>> {
    Ok(prime_arrays(table, instance)?.iter().map(|w| w.count()).collect())
}
