//! Local factors of the main term: the archimedean density `C_∞`, the
//! congruence factor `C_D`, the unramified Euler factors `C_p`, and the
//! class-density prefactor.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{prime_divisors, units};
use crate::conv::fft_cyclic_multi;
use crate::error::{Error, Result};
use crate::galois::{residue, ClassSpec};
use crate::instance::ProblemInstance;
use crate::sieve::simple_primes;

fn primes_to(n: u64) -> Vec<u64> {
    simple_primes(n as usize).into_iter().map(u64::from).collect()
}

const SIMPSON_REL_TOL: f64 = 1e-10;
const SIMPSON_MAX_DEPTH: u32 = 40;
const FFT_MODULUS_THRESHOLD: u64 = 512;

/// `C_∞(N)`: density of `{x ∈ [0,X]^k : Σ a_i x_i = N}` normalized so that
/// it approximates the number of integer points on the slice.
pub fn c_infinity(a: &[i64], x: f64, n: f64) -> Result<f64> {
    if a.len() < 2 {
        return Err(Error::Domain("C_inf needs at least two coefficients".into()));
    }
    if a.iter().any(|&v| v == 0) {
        return Err(Error::Domain("coefficients must be nonzero".into()));
    }
    if !(x >= 0.0) || !n.is_finite() {
        return Err(Error::Domain("X must be nonnegative and N finite".into()));
    }
    let af: Vec<f64> = a.iter().map(|&v| v as f64).collect();
    Ok(slice_density(&af, af.len(), n, x))
}

/// `V_j(t)` for the first `j` coefficients.
fn slice_density(a: &[f64], j: usize, t: f64, x: f64) -> f64 {
    match j {
        1 => {
            let s = t / a[0];
            if (0.0..=x).contains(&s) {
                1.0 / a[0].abs()
            } else {
                0.0
            }
        }
        2 => {
            let (a0, a1) = (a[0], a[1]);
            let (l, h) = if a0 > 0.0 { (0.0, a0 * x) } else { (a0 * x, 0.0) };
            let (mut s1, mut s2) = ((t - h) / a1, (t - l) / a1);
            if s1 > s2 {
                std::mem::swap(&mut s1, &mut s2);
            }
            let len = s2.min(x) - s1.max(0.0);
            len.max(0.0) / a0.abs()
        }
        _ => {
            let aj = a[j - 1];
            let m = j - 1;
            let mut cuts = vec![0.0, x];
            for mask in 0u32..(1 << m) {
                let b: f64 = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| a[i] * x).sum();
                let s = (t - b) / aj;
                if s > 0.0 && s < x {
                    cuts.push(s);
                }
            }
            cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
            cuts.dedup();
            let f = |s: f64| slice_density(a, m, t - aj * s, x);
            cuts.windows(2)
                .filter(|w| w[1] > w[0])
                .map(|w| adaptive_simpson(&f, w[0], w[1]))
                .sum()
        }
    }
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let eps = SIMPSON_REL_TOL * whole.abs().max(f64::MIN_POSITIVE);
    simpson_step(f, a, b, fa, fm, fb, whole, eps, 0)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth >= SIMPSON_MAX_DEPTH || (depth >= 1 && diff.abs() <= 15.0 * eps) {
        return left + right + diff / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, eps / 2.0, depth + 1)
        + simpson_step(f, m, b, fm, frm, fb, right, eps / 2.0, depth + 1)
}

/// `{x ∈ (Z/D)^* : x mod D_i ∈ coset}`.
pub fn lift_coset(class: &ClassSpec, field_modulus: u64, d: u64) -> Vec<u64> {
    units(d)
        .into_iter()
        .filter(|&x| class.contains_residue(x % field_modulus))
        .collect()
}

/// Number of `(x_i) ∈ ∏ H_i` with `Σ a_i x_i ≡ r (mod D)`, for every `r`.
pub fn congruence_counts(cosets: &[Vec<u64>], a: &[i64], d: u64) -> Vec<u128> {
    assert_eq!(cosets.len(), a.len());
    let dz = d as usize;
    let total: f64 = cosets.iter().map(|h| h.len() as f64).product();
    if d > FFT_MODULUS_THRESHOLD && total < 2f64.powi(50) {
        let arrays: Vec<Vec<f64>> = cosets
            .iter()
            .zip(a)
            .map(|(h, &ai)| {
                let mut v = vec![0.0; dz];
                for &x in h {
                    v[residue(ai * x as i64, d) as usize] += 1.0;
                }
                v
            })
            .collect();
        let refs: Vec<&[f64]> = arrays.iter().map(|v| v.as_slice()).collect();
        return fft_cyclic_multi(&refs, dz)
            .into_iter()
            .map(|v| v.round().max(0.0) as u128)
            .collect();
    }
    congruence_counts_direct(cosets, a, d)
}

pub fn congruence_counts_direct(cosets: &[Vec<u64>], a: &[i64], d: u64) -> Vec<u128> {
    let dz = d as usize;
    let mut acc = vec![0u128; dz];
    acc[0] = 1;
    for (h, &ai) in cosets.iter().zip(a) {
        let steps: Vec<usize> = h.iter().map(|&x| residue(ai * x as i64, d) as usize).collect();
        let mut next = vec![0u128; dz];
        for (r, &c) in acc.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for &s in &steps {
                next[(r + s) % dz] += c;
            }
        }
        acc = next;
    }
    acc
}

/// `C_D = D · #{x_i ∈ H_i : Σ a_i x_i ≡ N (mod D)} / ∏|H_i|`.
pub fn c_d(cosets: &[Vec<u64>], a: &[i64], n: i64, d: u64) -> BigRational {
    let counts = congruence_counts(cosets, a, d);
    let den: BigInt = cosets.iter().map(|h| BigInt::from(h.len())).product();
    BigRational::new(BigInt::from(d) * BigInt::from(counts[residue(n, d) as usize]), den)
}

/// Closed-form number of `(x_i) ∈ ((Z/p)^*)^m` with `Σ x_i ≡ N`.
fn unit_sum_count(p: u64, m: u32, divides: bool) -> BigInt {
    let pm1 = BigInt::from(p - 1).pow(m);
    let sign = if m % 2 == 0 { BigInt::one() } else { -BigInt::one() };
    let num = if divides {
        pm1 + sign * BigInt::from(p - 1)
    } else {
        pm1 - sign
    };
    num / BigInt::from(p)
}

/// `C_p = p · #{x ∈ ((Z/p)^*)^k : Σ a_i x_i ≡ N (mod p)} / (p−1)^k`.
///
/// Terms with `p | a_i` vanish mod `p` and contribute a free factor `p − 1`;
/// the rest use the closed form, since `a_i x` runs over all units.
pub fn c_p(p: u64, a: &[i64], n: i64) -> BigRational {
    let k = a.len() as u32;
    let free = a.iter().filter(|&&v| residue(v, p) == 0).count() as u32;
    let m = k - free;
    let divides = residue(n, p) == 0;
    let count = if m == 0 {
        if divides {
            BigInt::from(p - 1).pow(k)
        } else {
            BigInt::zero()
        }
    } else {
        unit_sum_count(p, m, divides) * BigInt::from(p - 1).pow(free)
    };
    BigRational::new(BigInt::from(p) * count, BigInt::from(p - 1).pow(k))
}

/// `C_p` by enumerating `((Z/p)^*)^k`.
pub fn c_p_exhaustive(p: u64, a: &[i64], n: i64) -> BigRational {
    let k = a.len() as u32;
    let cosets: Vec<Vec<u64>> = a.iter().map(|_| (1..p).collect()).collect();
    let counts = congruence_counts_direct(&cosets, a, p);
    BigRational::new(
        BigInt::from(p) * BigInt::from(counts[residue(n, p) as usize]),
        BigInt::from(p - 1).pow(k),
    )
}

/// `ln C_p` in double precision from the closed form; `None` when `C_p = 0`.
fn log_cp(p: u64, m: u32, divides: bool) -> Option<f64> {
    let q = (p - 1) as f64;
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let delta = if m == 0 {
        return if divides { Some(0.0) } else { None };
    } else if divides {
        sign / q.powi(m as i32 - 1)
    } else {
        -sign / q.powi(m as i32)
    };
    if delta <= -1.0 {
        None
    } else {
        Some(delta.ln_1p())
    }
}

/// `Σ_{j ≥ P} j^{-m}` upper bound.
fn power_tail(p: f64, m: i32) -> f64 {
    if m <= 1 {
        return f64::INFINITY;
    }
    p.powi(-m) + 1.0 / ((m - 1) as f64 * p.powi(m - 1))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerProduct {
    pub value: f64,
    pub tail_bound: f64,
    pub p_max: u64,
    /// Smallest prime with `C_p = 0`, if any.
    pub vanishing_prime: Option<u64>,
}

/// Precomputed data for `∏_{p ≤ P, p ∤ D} C_p` over many `N`.
#[derive(Clone, Debug)]
pub struct EulerContext {
    a: Vec<i64>,
    k: u32,
    d: u64,
    p_max: u64,
    base_log: f64,
    all_divide_log: f64,
    /// primes ≤ P with `C_p = 0` when `p ∤ N`.
    zero_unless_divides: Vec<u64>,
    /// primes ≤ P with `C_p = 0` when `p | N`.
    zero_if_divides: Vec<u64>,
    /// primes > P dividing `∏ a_i`, with their `m`.
    large_coefficient_primes: Vec<(u64, u32)>,
}

impl EulerContext {
    pub fn new(a: &[i64], d: u64, p_max: u64) -> Result<EulerContext> {
        if p_max < 2 {
            return Err(Error::Domain("P_max must be at least 2".into()));
        }
        if a.is_empty() || a.iter().any(|&v| v == 0) {
            return Err(Error::Domain("coefficients must be nonzero".into()));
        }
        let k = a.len() as u32;
        let m_of = |p: u64| a.iter().filter(|&&v| residue(v, p) != 0).count() as u32;
        let primes: Vec<(u64, u32)> = primes_to(p_max)
            .into_iter()
            .filter(|&p| d % p != 0)
            .map(|p| (p, m_of(p)))
            .collect();
        let mut base_log = 0.0;
        let mut all_divide_log = 0.0;
        let mut zero_unless_divides = Vec::new();
        let mut zero_if_divides = Vec::new();
        for &(p, m) in &primes {
            match log_cp(p, m, false) {
                Some(l) => base_log += l,
                None => zero_unless_divides.push(p),
            }
            match log_cp(p, m, true) {
                Some(l) => all_divide_log += l,
                None => zero_if_divides.push(p),
            }
        }
        let mut large = Vec::new();
        for &ai in a {
            for p in prime_divisors(ai.unsigned_abs()) {
                if p > p_max && d % p != 0 && !large.iter().any(|&(q, _)| q == p) {
                    large.push((p, m_of(p)));
                }
            }
        }
        large.sort();
        Ok(EulerContext {
            a: a.to_vec(),
            k,
            d,
            p_max,
            base_log,
            all_divide_log,
            zero_unless_divides,
            zero_if_divides,
            large_coefficient_primes: large,
        })
    }

    fn m_of(&self, p: u64) -> u32 {
        self.a.iter().filter(|&&v| residue(v, p) != 0).count() as u32
    }

    pub fn eval(&self, n: i64) -> EulerProduct {
        let vanish = |p: u64| EulerProduct {
            value: 0.0,
            tail_bound: 0.0,
            p_max: self.p_max,
            vanishing_prime: Some(p),
        };
        let divisors: Vec<u64> = if n == 0 {
            Vec::new()
        } else {
            prime_divisors(n.unsigned_abs())
        };
        let divides = |p: u64| n == 0 || divisors.binary_search(&p).is_ok();

        let mut zeros: Vec<u64> = self
            .zero_unless_divides
            .iter()
            .copied()
            .filter(|&p| !divides(p))
            .chain(self.zero_if_divides.iter().copied().filter(|&p| divides(p)))
            .collect();
        zeros.sort();
        if let Some(&p) = zeros.first() {
            return vanish(p);
        }

        let log = if n == 0 {
            self.all_divide_log
        } else {
            let mut log = self.base_log;
            for &q in &divisors {
                if q > self.p_max || self.d % q == 0 {
                    continue;
                }
                let m = self.m_of(q);
                log += log_cp(q, m, true).expect("zero case handled");
                if let Some(l) = log_cp(q, m, false) {
                    log -= l;
                }
            }
            log
        };
        EulerProduct {
            value: log.exp(),
            tail_bound: self.tail_bound(n, &divisors),
            p_max: self.p_max,
            vanishing_prime: None,
        }
    }

    /// Bound for `Σ_{p > P, p ∤ D} |ln C_p|`: exact terms for primes dividing
    /// `N ∏ a_i`, and `|ln(1+δ)| ≤ |δ|/(1−|δ|)` with `|δ| ≤ (p−1)^{-m}` for
    /// the rest, summed over all integers `p − 1 ≥ P`.
    fn tail_bound(&self, n: i64, divisors: &[u64]) -> f64 {
        let pf = self.p_max as f64;
        let k = self.k as i32;
        let mut exact = 0.0;
        let mut seen: Vec<u64> = Vec::new();
        for &(p, m) in &self.large_coefficient_primes {
            match log_cp(p, m, n == 0 || divisors.binary_search(&p).is_ok()) {
                Some(l) => exact += l.abs(),
                None => return f64::INFINITY,
            }
            seen.push(p);
        }
        let exponent = if n == 0 {
            k - 1
        } else {
            for &q in divisors {
                if q > self.p_max && self.d % q != 0 && !seen.contains(&q) {
                    exact += log_cp(q, self.k, true).map(f64::abs).unwrap_or(f64::INFINITY);
                }
            }
            k
        };
        let generic = power_tail(pf, exponent) / (1.0 - pf.powi(-exponent));
        exact + generic
    }
}

/// `∏_{p ≤ P_max, p ∤ D} C_p` with a tail bound.
pub fn euler_product(a: &[i64], n: i64, d: u64, p_max: u64) -> Result<EulerProduct> {
    Ok(EulerContext::new(a, d, p_max)?.eval(n))
}

/// `∏_{p|N}(1 − (p−1)^{-2}) ∏_{p∤N}(1 + (p−1)^{-3})` over `p ≤ P`.
pub fn classical_singular_series(n: i64, p_max: u64) -> f64 {
    primes_to(p_max)
        .into_iter()
        .map(|p| {
            let q = (p - 1) as f64;
            if n % p as i64 == 0 {
                1.0 - 1.0 / (q * q)
            } else {
                1.0 + 1.0 / (q * q * q)
            }
        })
        .product()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum VanishingReason {
    #[serde(rename = "CD_zero")]
    CdZero,
    #[serde(rename = "Cp_zero")]
    CpZero(u64),
}

impl std::fmt::Display for VanishingReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VanishingReason::CdZero => write!(f, "CD_zero"),
            VanishingReason::CpZero(p) => write!(f, "Cp_zero({p})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalFactorReport {
    #[serde(rename = "N")]
    pub n: i64,
    #[serde(rename = "X")]
    pub x: u64,
    #[serde(rename = "D")]
    pub modulus: u64,
    pub prefactor: String,
    pub prefactor_value: f64,
    #[serde(rename = "C_inf")]
    pub c_inf: f64,
    #[serde(rename = "C_D")]
    pub c_d: String,
    #[serde(rename = "C_D_value")]
    pub c_d_value: f64,
    pub euler_truncated: f64,
    #[serde(rename = "P_max")]
    pub p_max: u64,
    pub tail_bound: f64,
    pub main_term: f64,
    pub vanishing_reason: Option<VanishingReason>,
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn rational_string(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// All `N`-independent data of the main term for one instance.
#[derive(Clone, Debug)]
pub struct LocalFactors {
    pub a: Vec<i64>,
    pub x: u64,
    pub modulus: u64,
    pub prefactor: BigRational,
    cd_counts: Vec<u128>,
    cd_den: u128,
    euler: EulerContext,
}

impl LocalFactors {
    pub fn new(instance: &ProblemInstance, p_max: u64) -> Result<LocalFactors> {
        instance.validate()?;
        let d = instance.modulus();
        let mut prefactor = BigRational::one();
        let mut cosets = Vec::new();
        for f in &instance.fields {
            let (num, den) = f.spec.density(f.class());
            prefactor *= BigRational::new(BigInt::from(num), BigInt::from(den));
            cosets.push(lift_coset(f.class(), f.spec.modulus(), d));
        }
        if cosets.iter().any(|h| h.is_empty()) {
            return Err(Error::Validation("a class has no residues mod D".into()));
        }
        let cd_counts = congruence_counts(&cosets, &instance.a, d);
        let cd_den = cosets.iter().map(|h| h.len() as u128).product();
        Ok(LocalFactors {
            a: instance.a.clone(),
            x: instance.x,
            modulus: d,
            prefactor,
            cd_counts,
            cd_den,
            euler: EulerContext::new(&instance.a, d, p_max)?,
        })
    }

    pub fn c_d(&self, n: i64) -> BigRational {
        let c = self.cd_counts[residue(n, self.modulus) as usize];
        BigRational::new(
            BigInt::from(self.modulus) * BigInt::from(c),
            BigInt::from(self.cd_den),
        )
    }

    pub fn report(&self, n: i64) -> LocalFactorReport {
        let c_inf = c_infinity(&self.a, self.x as f64, n as f64).expect("validated instance");
        let cd = self.c_d(n);
        let euler = self.euler.eval(n);
        let prefactor_value = rational_to_f64(&self.prefactor);
        let c_d_value = rational_to_f64(&cd);
        let vanishing_reason = if cd.is_zero() {
            Some(VanishingReason::CdZero)
        } else {
            euler.vanishing_prime.map(VanishingReason::CpZero)
        };
        let main_term = if vanishing_reason.is_some() {
            0.0
        } else {
            prefactor_value * c_inf * c_d_value * euler.value
        };
        LocalFactorReport {
            n,
            x: self.x,
            modulus: self.modulus,
            prefactor: rational_string(&self.prefactor),
            prefactor_value,
            c_inf,
            c_d: rational_string(&cd),
            c_d_value,
            euler_truncated: euler.value,
            p_max: self.euler.p_max,
            tail_bound: euler.tail_bound,
            main_term,
            vanishing_reason,
        }
    }

    pub fn reports(&self, ns: &[i64]) -> Vec<LocalFactorReport> {
        ns.par_iter().map(|&n| self.report(n)).collect()
    }
}

/// Main-term report for a single `N`.
pub fn main_term(instance: &ProblemInstance, n: i64, p_max: u64) -> Result<LocalFactorReport> {
    Ok(LocalFactors::new(instance, p_max)?.report(n))
}

/// Exhaustive `C_D` over `((Z/D)^*)^k` restricted to the cosets.
pub fn c_d_exhaustive(cosets: &[Vec<u64>], a: &[i64], n: i64, d: u64) -> BigRational {
    fn rec(cosets: &[Vec<u64>], a: &[i64], acc: i64, d: u64, target: u64, count: &mut u64) {
        match cosets.split_first() {
            None => {
                if residue(acc, d) == target {
                    *count += 1;
                }
            }
            Some((h, rest)) => {
                for &x in h {
                    rec(rest, &a[1..], acc + a[0] * x as i64, d, target, count);
                }
            }
        }
    }
    let mut count = 0;
    rec(cosets, a, 0, d, residue(n, d), &mut count);
    let den: u64 = cosets.iter().map(|h| h.len() as u64).product();
    BigRational::new(BigInt::from(d * count), BigInt::from(den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::ProblemInstance;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn c_inf_examples() {
        for n in [0.0, 10.0, 37.5, 100.0] {
            let v = c_infinity(&[1, 1, 1], 100.0, n).unwrap();
            assert!((v - n * n / 2.0).abs() <= 1e-8 * (n * n / 2.0).max(1.0), "{n}: {v}");
            let v2 = c_infinity(&[1, 1], 100.0, n).unwrap();
            assert!((v2 - n).abs() < 1e-9);
        }
        assert_eq!(c_infinity(&[1, 1, 1], 100.0, 301.0).unwrap(), 0.0);
        assert!(c_infinity(&[1], 10.0, 1.0).is_err());
    }

    #[test]
    fn c_inf_matches_lattice_count() {
        let x = 50i64;
        for n in 0..=150 {
            let mut count = 0;
            for n1 in 0..=x {
                for n2 in 0..=x {
                    let n3 = n - n1 - n2;
                    if (0..=x).contains(&n3) {
                        count += 1;
                    }
                }
            }
            let v = c_infinity(&[1, 1, 1], x as f64, n as f64).unwrap();
            assert!((v - count as f64).abs() <= 3.0 * x as f64, "N={n}: {v} vs {count}");
        }
    }

    #[test]
    fn c_inf_mixed_signs_against_lattice() {
        // a = (1, 2, -1), X = 40: lattice count / density agree to O(X)
        let x = 40i64;
        for n in (-30..=110).step_by(7) {
            let mut count = 0;
            for n1 in 0..=x {
                for n2 in 0..=x {
                    let n3 = n1 + 2 * n2 - n;
                    if (0..=x).contains(&n3) {
                        count += 1;
                    }
                }
            }
            let v = c_infinity(&[1, 2, -1], x as f64, n as f64).unwrap();
            assert!((v - count as f64).abs() <= 3.0 * x as f64, "N={n}: {v} vs {count}");
        }
    }

    #[test]
    fn c_inf_k4_closed_form() {
        // N ≤ X: volume of the simplex slice is N³/6
        let v = c_infinity(&[1, 1, 1, 1], 1000.0, 600.0).unwrap();
        assert!((v / (600f64.powi(3) / 6.0) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn c_d_examples() {
        let h = vec![vec![1u64]; 3];
        assert_eq!(c_d(&h, &[1, 1, 1], 3, 4), rat(4, 1));
        assert_eq!(c_d(&h, &[1, 1, 1], 7, 4), rat(4, 1));
        assert_eq!(c_d(&h, &[1, 1, 1], 1, 4), rat(0, 1));
        let t = vec![vec![0u64]; 3];
        assert_eq!(c_d(&t, &[1, 1, 1], 12345, 1), rat(1, 1));
    }

    #[test]
    fn c_d_matches_exhaustive() {
        for d in 1..=12u64 {
            let u = units(d);
            // full unit group, each singleton, and a pair
            let mut sets: Vec<Vec<u64>> = vec![u.clone()];
            sets.extend(u.iter().map(|&x| vec![x]));
            if u.len() >= 2 {
                sets.push(u[..2].to_vec());
            }
            for k in 2..=4usize {
                let a: Vec<i64> = (1..=k as i64).map(|i| if i % 2 == 0 { -i } else { i }).collect();
                for si in 0..sets.len() {
                    let cosets: Vec<Vec<u64>> =
                        (0..k).map(|i| sets[(si + i) % sets.len()].clone()).collect();
                    for n in 0..d as i64 {
                        assert_eq!(
                            c_d(&cosets, &a, n, d),
                            c_d_exhaustive(&cosets, &a, n, d),
                            "D={d} k={k} N={n}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn c_d_fft_path_matches_direct() {
        let d = 1155u64;
        let u = units(d);
        let cosets = vec![u.clone(), u.iter().copied().filter(|x| x % 3 == 1).collect(), u];
        let a = [1, -2, 3];
        assert_eq!(
            congruence_counts(&cosets, &a, d),
            congruence_counts_direct(&cosets, &a, d)
        );
    }

    #[test]
    fn c_p_examples() {
        assert_eq!(c_p(3, &[1, 1, 1], 0), rat(3, 4));
        assert_eq!(c_p(3, &[1, 1, 1], 6), rat(3, 4));
        assert_eq!(c_p(3, &[1, 1, 1], 1), rat(9, 8));
        assert_eq!(c_p_exhaustive(3, &[1, 1, 1], 0), rat(3 * 2, 8));
        assert_eq!(c_p(2, &[1, 1, 1], 4), rat(0, 1));
        assert_eq!(c_p(2, &[1, 1, 1], 5), rat(2, 1));
    }

    #[test]
    fn c_p_matches_exhaustive() {
        for p in primes_to(31) {
            for k in 2..=4i64 {
                let ones = vec![1i64; k as usize];
                let ramp: Vec<i64> = (1..=k).collect();
                for a in [&ones, &ramp] {
                    for n in 0..p as i64 {
                        assert_eq!(c_p(p, a, n), c_p_exhaustive(p, a, n), "p={p} a={a:?} N={n}");
                    }
                }
            }
        }
    }

    #[test]
    fn euler_matches_classical_series() {
        for n in [1i64, 3, 15, 101, 100_001, 3 * 5 * 7 * 11 * 13] {
            let e = euler_product(&[1, 1, 1], n, 1, 10_000).unwrap();
            let g = classical_singular_series(n, 10_000);
            assert!((e.value / g - 1.0).abs() < 1e-12, "N={n}");
        }
        let even = euler_product(&[1, 1, 1], 100, 1, 1000).unwrap();
        assert_eq!(even.value, 0.0);
        assert_eq!(even.vanishing_prime, Some(2));
        assert!(euler_product(&[1, 1, 1], 1, 1, 1).is_err());
    }

    #[test]
    fn euler_two_truncations() {
        for n in [100_001i64, 99_999, 123_457] {
            let a = euler_product(&[1, 1, 1], n, 1, 1000).unwrap();
            let b = euler_product(&[1, 1, 1], n, 1, 10_000).unwrap();
            assert!((a.value / b.value - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn euler_skips_primes_of_d() {
        // For D = 4, p = 2 is inside C_D.
        let e = euler_product(&[1, 1, 1], 100, 4, 100).unwrap();
        assert!(e.vanishing_prime.is_none());
        let k2n0 = euler_product(&[1, -1], 0, 1, 100).unwrap();
        assert!(k2n0.tail_bound.is_infinite());
    }

    #[test]
    fn euler_tail_bound_holds_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut tested = 0;
        while tested < 20 {
            let k = rng.gen_range(2..=4);
            let a: Vec<i64> = (0..k)
                .map(|_| rng.gen_range(1..=5i64) * if rng.gen_bool(0.5) { 1 } else { -1 })
                .collect();
            let n = rng.gen_range(-100_000i64..100_000);
            let p = rng.gen_range(50..500u64);
            let lo = euler_product(&a, n, 1, p).unwrap();
            let hi = euler_product(&a, n, 1, 2 * p).unwrap();
            if lo.vanishing_prime.is_some() {
                assert_eq!(hi.vanishing_prime, lo.vanishing_prime);
                continue;
            }
            assert!(
                (lo.value.ln() - hi.value.ln()).abs() <= lo.tail_bound,
                "a={a:?} N={n} P={p}"
            );
            tested += 1;
        }
    }

    #[test]
    fn main_term_examples() {
        let c = ProblemInstance::uniform("trivial", vec![1, 1, 1], 100_000, vec![100_001]).unwrap();
        let r = main_term(&c, 100_001, 10_000).unwrap();
        assert!(r.main_term > 0.0 && r.main_term.is_finite());
        assert_eq!(r.c_d, "1");
        assert_eq!(r.prefactor, "1");

        let g = ProblemInstance::uniform("gaussian-e", vec![1, 1, 1], 1000, vec![1001]).unwrap();
        let r = main_term(&g, 1001, 1000).unwrap();
        assert_eq!(r.main_term, 0.0);
        assert_eq!(r.vanishing_reason, Some(VanishingReason::CdZero));
        assert_eq!(r.prefactor, "1/8");
        let r = main_term(&g, 1003, 1000).unwrap();
        assert_eq!(r.c_d, "4");
        assert!(r.main_term > 0.0);

        // p1 + p2 - p3 = 0 has no solution in odd primes, so C_2 = 0 at N = 0
        let gold = ProblemInstance::uniform("trivial", vec![1, 1, -1], 1000, vec![0]).unwrap();
        let r = main_term(&gold, 0, 1000).unwrap();
        assert_eq!(r.vanishing_reason, Some(VanishingReason::CpZero(2)));
        assert!(r.c_inf > 0.0);
        let r = main_term(&gold, 1, 1000).unwrap();
        assert!(r.main_term > 0.0);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"vanishing_reason\":null"));
    }

    #[test]
    fn report_serializes_vanishing() {
        let c = ProblemInstance::uniform("trivial", vec![1, 1, 1], 1000, vec![100]).unwrap();
        let r = main_term(&c, 100, 100).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"vanishing_reason\":{\"Cp_zero\":2}"), "{json}");
    }

    proptest! {
        #[test]
        fn c_p_is_nonnegative_and_product_closed(p_idx in 0usize..10, n in -1000i64..1000, k in 2usize..5) {
            let p = primes_to(29)[p_idx];
            let a = vec![1i64; k];
            let v = c_p(p, &a, n);
            prop_assert!(v >= BigRational::zero());
            let l = log_cp(p, k as u32, residue(n, p) == 0);
            match l {
                None => prop_assert!(v.is_zero()),
                Some(l) => prop_assert!((l.exp() - rational_to_f64(&v)).abs() < 1e-12),
            }
        }
    }
}
