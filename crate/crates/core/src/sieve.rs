//! Prime tables, the local and sieved weights `Λ_p`, `Λ_z`, `Λ_{K,C}`, and
//! squarefree smooth-number counts.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::arith;
use crate::error::{Error, Result};
use crate::galois::{ClassSpec, GaloisSpec};

/// Largest supported sieve limit.
pub const MAX_LIMIT: u64 = 100_000_000;

const CACHE_MAGIC: &[u8; 4] = b"CHB1";
const SEGMENT: usize = 1 << 16;

/// Smallest-prime-factor table on `[0, limit]`; `spf[n] = 0` for `n < 2`.
#[derive(Clone, Debug)]
pub struct PrimeTable {
    limit: u64,
    spf: Vec<u32>,
    primes: Vec<u32>,
}

impl PrimeTable {
    pub fn new(limit: u64) -> Result<PrimeTable> {
        if limit > MAX_LIMIT {
            return Err(Error::ResourceLimit(format!(
                "sieve limit {limit} exceeds {MAX_LIMIT}"
            )));
        }
        let n = limit as usize;
        let root = (limit as f64).sqrt() as usize + 1;
        let base = simple_primes(root);
        let mut spf = vec![0u32; n + 1];
        spf.par_chunks_mut(SEGMENT).enumerate().for_each(|(seg, chunk)| {
            let lo = seg * SEGMENT;
            let hi = lo + chunk.len();
            for &p in &base {
                let p = p as usize;
                if p * p >= hi {
                    break;
                }
                let start = (p * p).max(lo.div_ceil(p) * p);
                let mut m = start;
                while m < hi {
                    if chunk[m - lo] == 0 {
                        chunk[m - lo] = p as u32;
                    }
                    m += p;
                }
            }
            for (i, v) in chunk.iter_mut().enumerate() {
                let m = lo + i;
                if m >= 2 && *v == 0 {
                    *v = m as u32;
                }
            }
        });
        let primes = collect_primes(&spf);
        Ok(PrimeTable {
            limit,
            spf,
            primes,
        })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    /// Primes up to `x` (clamped to the limit).
    pub fn primes_up_to(&self, x: u64) -> &[u32] {
        let end = self.primes.partition_point(|&p| p as u64 <= x);
        &self.primes[..end]
    }

    pub fn spf(&self, n: u64) -> u32 {
        self.spf[n as usize]
    }

    pub fn is_prime(&self, n: u64) -> bool {
        if n <= self.limit {
            n >= 2 && self.spf[n as usize] as u64 == n
        } else {
            arith::is_prime(n)
        }
    }

    /// `π(x)` for `x ≤ limit`.
    pub fn pi(&self, x: u64) -> usize {
        self.primes_up_to(x).len()
    }

    /// Factorization via the table; `n ≤ limit`.
    pub fn factorize(&self, mut n: u64) -> Vec<(u64, u32)> {
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            n /= p;
            match out.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&self.limit.to_le_bytes())?;
        for &v in &self.spf {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<PrimeTable> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(Error::Cache("bad magic".into()));
        }
        let mut lim = [0u8; 8];
        r.read_exact(&mut lim)?;
        let limit = u64::from_le_bytes(lim);
        if limit > MAX_LIMIT {
            return Err(Error::Cache(format!("limit {limit} too large")));
        }
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() != 4 * (limit as usize + 1) {
            return Err(Error::Cache("truncated table".into()));
        }
        let spf: Vec<u32> = bytes
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        let primes = collect_primes(&spf);
        Ok(PrimeTable {
            limit,
            spf,
            primes,
        })
    }

    /// Loads the cache when it holds a large enough table, otherwise sieves
    /// and tries to rewrite it. Cache failures never fail the call.
    pub fn cached(limit: u64, path: &Path) -> Result<PrimeTable> {
        if let Ok(t) = PrimeTable::load(path) {
            if t.limit >= limit {
                return Ok(t);
            }
        }
        let t = PrimeTable::new(limit)?;
        let _ = t.save(path);
        Ok(t)
    }
}

fn collect_primes(spf: &[u32]) -> Vec<u32> {
    spf.iter()
        .enumerate()
        .filter(|&(n, &s)| n >= 2 && s as usize == n)
        .map(|(n, _)| n as u32)
        .collect()
}

/// Eratosthenes up to `n`, for small bounds.
pub fn simple_primes(n: usize) -> Vec<u32> {
    if n < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u32);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

fn primes_le_real(z: f64) -> Vec<u32> {
    if !(z >= 2.0) {
        return Vec::new();
    }
    simple_primes(z.floor() as usize)
}

fn ratio(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `Λ_p(n)`: 0 if `p | n`, else `p/(p-1)`.
pub fn lambda_p(p: u64, n: u64) -> BigRational {
    if n % p == 0 {
        BigRational::zero()
    } else {
        ratio(p, p - 1)
    }
}

/// `C(z) = ∏_{p ≤ z} p/(p-1)`.
pub fn c_of_z(z: f64) -> BigRational {
    let (mut num, mut den) = (BigInt::one(), BigInt::one());
    for p in primes_le_real(z) {
        num *= p;
        den *= p - 1;
    }
    BigRational::new(num, den)
}

/// `C(z)` in double precision.
pub fn c_of_z_f64(z: f64) -> f64 {
    primes_le_real(z)
        .iter()
        .map(|&p| (p as f64 / (p as f64 - 1.0)).ln())
        .sum::<f64>()
        .exp()
}

/// `P(z) = ∏_{p ≤ z} p`.
pub fn p_of_z(z: f64) -> BigInt {
    primes_le_real(z).into_iter().fold(BigInt::one(), |acc, p| acc * p)
}

/// `P(z, q) = ∏_{p ≤ z, p ∤ q} p`.
pub fn p_of_z_q(z: f64, q: u64) -> BigInt {
    primes_le_real(z)
        .into_iter()
        .filter(|&p| q % p as u64 != 0)
        .fold(BigInt::one(), |acc, p| acc * p)
}

/// `true` when no prime `≤ z` divides `n`.
pub fn is_z_rough(z: f64, n: u64) -> bool {
    primes_le_real(z).into_iter().all(|p| n % p as u64 != 0)
}

/// `Λ_z(n) = ∏_{p ≤ z} Λ_p(n)`.
pub fn lambda_z(z: f64, n: u64) -> BigRational {
    if is_z_rough(z, n) {
        c_of_z(z)
    } else {
        BigRational::zero()
    }
}

/// `Λ_{K,C}(n) = φ(D_K)/|H|` when `n mod D_K ∈ H`, else 0.
pub fn lambda_kc(spec: &GaloisSpec, class: &ClassSpec, n: u64) -> BigRational {
    let m = spec.modulus();
    if class.contains_residue(n % m) {
        ratio(arith::euler_phi(m), class.coset.len() as u64)
    } else {
        BigRational::zero()
    }
}

/// `S(z, Y)`: squarefree `n ≤ Y` with every prime factor `≤ z`.
pub fn smooth_count(z: f64, y: f64) -> u64 {
    if !(y >= 1.0) {
        return 0;
    }
    let y = y.floor() as u64;
    let primes = primes_le_real(z.min(y as f64));
    fn dfs(primes: &[u32], start: usize, prod: u64, y: u64) -> u64 {
        let mut count = 1;
        for i in start..primes.len() {
            let p = primes[i] as u64;
            if prod * p > y {
                break;
            }
            count += dfs(primes, i + 1, prod * p, y);
        }
        count
    }
    dfs(&primes, 0, 1, y)
}

/// `(A, B, z)` with `z = log^B X`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SieveParams {
    pub a: f64,
    pub b: f64,
    pub z: f64,
}

impl SieveParams {
    pub fn new(x: u64, a: f64, b: f64) -> SieveParams {
        let lx = (x.max(2) as f64).ln();
        SieveParams { a, b, z: lx.powf(b) }
    }

    /// `B = 4A`.
    pub fn with_default_b(x: u64, a: f64) -> SieveParams {
        SieveParams::new(x, a, 4.0 * a)
    }

    /// An explicit `z`, bypassing the `log^B X` link.
    pub fn with_z(z: f64) -> SieveParams {
        SieveParams {
            a: f64::NAN,
            b: f64::NAN,
            z,
        }
    }
}

/// Per-field arrays over `0..=X`: `log p` on primes of the class, and the
/// matching 0/1 indicator.
#[derive(Clone, Debug)]
pub struct WeightedPrimeArray {
    pub x: u64,
    pub weights: Vec<f64>,
    pub indicator: Vec<u8>,
}

impl WeightedPrimeArray {
    pub fn count(&self) -> u64 {
        self.indicator.iter().map(|&b| b as u64).sum()
    }

    pub fn support(&self) -> Vec<u64> {
        self.indicator
            .iter()
            .enumerate()
            .filter(|&(_, &b)| b != 0)
            .map(|(n, _)| n as u64)
            .collect()
    }
}

pub fn weighted_prime_array(
    table: &PrimeTable,
    spec: &GaloisSpec,
    class: &ClassSpec,
    x: u64,
) -> Result<WeightedPrimeArray> {
    if x > table.limit() {
        return Err(Error::ResourceLimit(format!(
            "X = {x} exceeds the prime table limit {}",
            table.limit()
        )));
    }
    let idx = spec
        .class_index(&class.label)
        .ok_or_else(|| Error::Validation(format!("unknown class {:?}", class.label)))?;
    let primes = table.primes_up_to(x);
    let hits: Vec<Option<u64>> = primes
        .par_iter()
        .map(|&p| -> Result<Option<u64>> {
            Ok((spec.frobenius_index(p as u64)? == Some(idx)).then_some(p as u64))
        })
        .collect::<Result<_>>()?;
    let mut weights = vec![0.0; x as usize + 1];
    let mut indicator = vec![0u8; x as usize + 1];
    for p in hits.into_iter().flatten() {
        weights[p as usize] = (p as f64).ln();
        indicator[p as usize] = 1;
    }
    Ok(WeightedPrimeArray {
        x,
        weights,
        indicator,
    })
}

/// `Λ_{K,C}(n)·Λ_z(n)` for `n` in `0..=X` (index 0 holds 0), as doubles.
pub fn sieved_weight_array(
    table: &PrimeTable,
    spec: &GaloisSpec,
    class: &ClassSpec,
    z: f64,
    x: u64,
) -> Result<Vec<f64>> {
    if x > table.limit() {
        return Err(Error::ResourceLimit(format!(
            "X = {x} exceeds the prime table limit {}",
            table.limit()
        )));
    }
    let m = spec.modulus();
    let kc = arith::euler_phi(m) as f64 / class.coset.len() as f64;
    let cz = c_of_z_f64(z);
    let zi = if z >= 2.0 { z.floor() as u64 } else { 1 };
    let mut out = vec![0.0; x as usize + 1];
    out.par_iter_mut().enumerate().skip(1).for_each(|(n, v)| {
        let n = n as u64;
        let rough = n == 1 || table.spf(n) as u64 > zi;
        if rough && class.contains_residue(n % m) {
            *v = kc * cz;
        }
    });
    Ok(out)
}
