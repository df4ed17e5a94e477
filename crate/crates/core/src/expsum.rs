//! Rational approximation of reals, Weyl sums of integer polynomials, and
//! exponential sums over ideal norms of quadratic fields.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, gcd};
use crate::error::{Error, Result};
use crate::phase::{e_of, Alpha, ComplexSum, Turns};

/// Denominators up to this bound are scanned exhaustively when no
/// convergent qualifies.
pub const EXHAUSTIVE_Q: u64 = 10_000;

/// `a/q` with `err = |α - a/q|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalApprox {
    pub a: i64,
    pub q: u64,
    pub err: f64,
}

impl RationalApprox {
    /// `err < 1/q²`.
    pub fn qualifies(&self) -> bool {
        self.err * (self.q as f64) * (self.q as f64) < 1.0
    }
}

/// Exact value of α as a rational. Real inputs are dyadic; fixed phases
/// are taken in `[0, 1)`.
pub fn exact_value(alpha: Alpha) -> Result<BigRational> {
    match alpha {
        Alpha::Real(x) => BigRational::from_float(x)
            .ok_or_else(|| Error::Domain(format!("alpha must be finite, got {x}"))),
        Alpha::Rational { num, den } => Ok(BigRational::new(num.into(), den.into())),
        Alpha::Fixed(Turns(t)) => Ok(BigRational::new(
            BigInt::from(t),
            BigInt::one() << 128usize,
        )),
    }
}

/// Continued-fraction convergents `(a, q)` of `x` with `q ≤ qmax`.
fn convergents(x: &BigRational, qmax: u64) -> Vec<(BigInt, u64)> {
    let mut out = Vec::new();
    let (mut n, mut d) = (x.numer().clone(), x.denom().clone());
    let (mut h1, mut h2) = (BigInt::one(), BigInt::zero());
    let (mut k1, mut k2) = (BigInt::zero(), BigInt::one());
    loop {
        let (a, r) = n.div_mod_floor(&d);
        let h = &a * &h1 + &h2;
        let k = &a * &k1 + &k2;
        match k.to_u64() {
            Some(kq) if kq <= qmax => out.push((h.clone(), kq)),
            _ => break,
        }
        if r.is_zero() {
            break;
        }
        (h2, h1) = (h1, h);
        (k2, k1) = (k1, k);
        n = d;
        d = r;
    }
    out
}

fn make_approx(x: &BigRational, a: &BigInt, q: u64) -> Result<RationalApprox> {
    let err = (x - BigRational::new(a.clone(), BigInt::from(q))).abs();
    Ok(RationalApprox {
        a: a
            .to_i64()
            .ok_or_else(|| Error::Domain("numerator exceeds 64 bits".into()))?,
        q,
        err: err.to_f64().unwrap_or(f64::INFINITY),
    })
}

/// Exact test of `|x - a/q| < 1/q²` with `gcd(a, q) = 1`.
fn qualifies_exact(x: &BigRational, a: &BigInt, q: u64) -> bool {
    let qb = BigInt::from(q);
    if !a.gcd(&qb).is_one() {
        return false;
    }
    let diff = (x * BigRational::from_integer(qb.clone()) - BigRational::from_integer(a.clone())).abs();
    diff * BigRational::from_integer(qb) < BigRational::one()
}

/// Last convergent with `q ≤ qmax`; satisfies `|α - a/q| ≤ 1/(q·qmax)`.
pub fn best_approx(alpha: Alpha, qmax: u64) -> Result<RationalApprox> {
    if qmax == 0 {
        return Err(Error::Domain("qmax must be at least 1".into()));
    }
    let x = exact_value(alpha)?;
    let conv = convergents(&x, qmax);
    let (a, q) = conv.last().expect("q = 1 is always a convergent");
    make_approx(&x, a, *q)
}

/// Some reduced `a/q` with `qmin < q < qmax` and `|α - a/q| < 1/q²`:
/// convergents first, then every `q ≤ EXHAUSTIVE_Q` in the range.
pub fn has_denominator_in_range(alpha: Alpha, qmin: f64, qmax: f64) -> Result<Option<RationalApprox>> {
    let x = exact_value(alpha)?;
    has_denominator_in_range_exact(&x, qmin, qmax)
}

fn has_denominator_in_range_exact(x: &BigRational, qmin: f64, qmax: f64) -> Result<Option<RationalApprox>> {
    if !(qmax > qmin) || qmax <= 1.0 {
        return Ok(None);
    }
    let in_range = |q: u64| (q as f64) > qmin && (q as f64) < qmax;
    let cap = if qmax >= u64::MAX as f64 { u64::MAX } else { qmax.ceil() as u64 };
    for (a, q) in convergents(x, cap) {
        if in_range(q) && qualifies_exact(x, &a, q) {
            return make_approx(x, &a, q).map(Some);
        }
    }
    let lo = if qmin < 0.0 { 1 } else { qmin.floor() as u64 + 1 };
    let hi = cap.min(EXHAUSTIVE_Q);
    for q in lo.max(1)..=hi {
        if !in_range(q) {
            continue;
        }
        let qx = x * BigRational::from_integer(BigInt::from(q));
        let a = qx.round().to_integer();
        if qualifies_exact(x, &a, q) {
            return make_approx(x, &a, q).map(Some);
        }
    }
    Ok(None)
}

/// Number of `n ≤ Y` for which `nα` has no qualifying approximation with
/// denominator in `(A, X/A)`.
pub fn bad_multiple_count(alpha: Alpha, y: u64, a: f64, x: f64) -> Result<u64> {
    let base = exact_value(alpha)?;
    let mut count = 0;
    for n in 1..=y {
        let nx = &base * BigRational::from_integer(BigInt::from(n));
        if has_denominator_in_range_exact(&nx, a, x / a)?.is_none() {
            count += 1;
        }
    }
    Ok(count)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureSet {
    pub elements: Vec<u64>,
    pub x: u64,
    pub a: u64,
    pub b: f64,
    pub c: u64,
    /// Smallest element, or `None` when the set is empty.
    pub min_element: Option<u64>,
    /// `min_element / (B/A)`: the empirical constant in the size floor.
    pub floor_constant: Option<f64>,
    pub reciprocal_sum: f64,
    /// `A²/B + A⁴C/X`.
    pub reciprocal_scale: f64,
}

/// All `d/D` with `D ≤ A`, `D | d`, `d ≤ A·C`, and some reduced `a/d` within
/// `A/(X·D)` of α.
pub fn structure_set(alpha: Alpha, x: u64, a: u64, c: u64, b: f64) -> Result<StructureSet> {
    if x == 0 || a == 0 || c == 0 {
        return Err(Error::Domain("X, A, C must be positive".into()));
    }
    if !(b > 2.0 * a as f64) {
        return Err(Error::Domain(format!("need B > 2A, got B = {b}, A = {a}")));
    }
    let xv = exact_value(alpha)?;
    if xv.is_integer() {
        return Err(Error::DegenerateAlpha(format!("alpha = {alpha} is an integer")));
    }
    if has_denominator_in_range_exact(&xv, b, x as f64 / b)?.is_none() {
        return Err(Error::DegenerateAlpha(format!(
            "alpha = {alpha} has no approximation with denominator in (B, X/B)"
        )));
    }
    let radius = BigRational::new(BigInt::from(a), BigInt::from(x));
    let mut set = BTreeSet::new();
    for d in 1..=a.saturating_mul(c) {
        let db = BigRational::from_integer(BigInt::from(d));
        let lo = ((&xv - &radius) * &db).ceil().to_integer();
        let hi = ((&xv + &radius) * &db).floor().to_integer();
        let mut num = lo;
        // the smallest reduced error over admissible numerators
        let mut best: Option<BigRational> = None;
        while num <= hi {
            if num.gcd(&BigInt::from(d)).is_one() {
                let err = (&xv - BigRational::new(num.clone(), BigInt::from(d))).abs();
                if best.as_ref().is_none_or(|b| &err < b) {
                    best = Some(err);
                }
            }
            num += 1;
        }
        let Some(err) = best else { continue };
        for dd in 1..=a.min(d) {
            if d % dd != 0 {
                continue;
            }
            let bound = BigRational::new(BigInt::from(a), BigInt::from(x) * BigInt::from(dd));
            if err <= bound {
                set.insert(d / dd);
            }
        }
    }
    let elements: Vec<u64> = set.into_iter().collect();
    let min_element = elements.first().copied();
    let reciprocal_sum = elements.iter().map(|&s| 1.0 / s as f64).sum();
    let (af, cf, xf) = (a as f64, c as f64, x as f64);
    Ok(StructureSet {
        min_element,
        floor_constant: min_element.map(|m| m as f64 / (b / af)),
        reciprocal_sum,
        reciprocal_scale: af * af / b + af.powi(4) * cf / xf,
        elements,
        x,
        a,
        b,
        c,
    })
}

impl StructureSet {
    /// `n ≤ C` that are neither multiples of an element nor have `nα`
    /// approximable with denominator in `(A, X/(A·n))`.
    pub fn uncovered(&self, alpha: Alpha) -> Result<Vec<u64>> {
        let xv = exact_value(alpha)?;
        let mut out = Vec::new();
        for n in 1..=self.c {
            if self.elements.iter().any(|&s| n % s == 0) {
                continue;
            }
            let nx = &xv * BigRational::from_integer(BigInt::from(n));
            let upper = self.x as f64 / (self.a as f64 * n as f64);
            if has_denominator_in_range_exact(&nx, self.a as f64, upper)?.is_none() {
                out.push(n);
            }
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// characters and quadratic fields

/// Kronecker symbol `(d/n)` for `n ≥ 1`.
pub fn kronecker(d: i64, n: u64) -> i8 {
    if n == 0 {
        return if d.unsigned_abs() == 1 { 1 } else { 0 };
    }
    let mut n = n;
    let mut sign = 1i8;
    while n % 2 == 0 {
        n /= 2;
        match d.rem_euclid(8) {
            1 | 7 => {}
            3 | 5 => sign = -sign,
            _ => return 0,
        }
    }
    sign * jacobi(d.rem_euclid(n as i64) as u64, n)
}

/// Jacobi symbol `(a/n)` for odd `n`.
pub fn jacobi(mut a: u64, mut n: u64) -> i8 {
    debug_assert!(n % 2 == 1);
    a %= n;
    let mut s = 1i8;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                s = -s;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            s = -s;
        }
        a %= n;
    }
    if n == 1 {
        s
    } else {
        0
    }
}

pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    let squarefree = |m: u64| arith::factorize(m).iter().all(|&(_, e)| e == 1);
    match d.rem_euclid(4) {
        1 => squarefree(d.unsigned_abs()),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}

/// `Q(√d)` for a fundamental discriminant `d`, with `χ_d` tabulated mod `|d|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticField {
    pub d: i64,
    table: Vec<i8>,
}

impl QuadraticField {
    pub fn new(d: i64) -> Result<QuadraticField> {
        if !is_fundamental_discriminant(d) {
            return Err(Error::Domain(format!("{d} is not a fundamental discriminant")));
        }
        let m = d.unsigned_abs();
        let table = (0..m).map(|r| kronecker(d, if r == 0 { m } else { r })).collect();
        Ok(QuadraticField { d, table })
    }

    pub fn gaussian() -> QuadraticField {
        QuadraticField::new(-4).expect("-4 is fundamental")
    }

    #[inline]
    pub fn chi(&self, n: u64) -> i8 {
        self.table[(n % self.table.len() as u64) as usize]
    }

    /// `r_d(m) = Σ_{e | m} χ_d(e)` for `m ≤ X`, the number of ideals of norm `m`.
    pub fn ideal_counts(&self, x: u64) -> Vec<u32> {
        let n = x as usize;
        let mut r = vec![0i32; n + 1];
        for e in 1..=n {
            let c = self.chi(e as u64) as i32;
            if c == 0 {
                continue;
            }
            let mut m = e;
            while m <= n {
                r[m] += c;
                m += e;
            }
        }
        r.into_iter().map(|v| v as u32).collect()
    }
}

/// A Dirichlet character given by its values on `0..modulus`.
#[derive(Clone, Debug)]
pub struct DirichletCharacter {
    pub modulus: u64,
    pub label: String,
    values: Vec<Complex64>,
}

impl DirichletCharacter {
    pub fn principal(q: u64) -> DirichletCharacter {
        let values = (0..q)
            .map(|r| if gcd(r, q) == 1 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
            .collect();
        DirichletCharacter {
            modulus: q,
            label: format!("principal mod {q}"),
            values,
        }
    }

    /// `χ_d = (d/·)` of modulus `|d|`.
    pub fn kronecker(d: i64) -> DirichletCharacter {
        let q = d.unsigned_abs();
        let values = (0..q)
            .map(|r| Complex64::new(kronecker(d, if r == 0 { q } else { r }) as f64, 0.0))
            .collect();
        DirichletCharacter {
            modulus: q,
            label: format!("kronecker {d}"),
            values,
        }
    }

    /// Every character of `(Z/q)^*`, principal first.
    pub fn all(q: u64) -> Vec<DirichletCharacter> {
        if q == 1 {
            return vec![DirichletCharacter::principal(1)];
        }
        // cyclic components (modulus-of-component, generator, order)
        let mut comps: Vec<(u64, u64, u64)> = Vec::new();
        for (p, e) in arith::factorize(q) {
            let pe = p.pow(e);
            if p == 2 {
                if e == 2 {
                    comps.push((pe, 3, 2));
                } else if e >= 3 {
                    comps.push((pe, pe - 1, 2));
                    comps.push((pe, 5, pe / 4));
                }
            } else {
                let phi = pe / p * (p - 1);
                let g = (2..pe)
                    .find(|&g| {
                        gcd(g, p) == 1
                            && arith::prime_divisors(phi)
                                .iter()
                                .all(|&r| arith::pow_mod(g, phi / r, pe) != 1)
                    })
                    .expect("odd prime powers have primitive roots");
                comps.push((pe, g, phi));
            }
        }
        // discrete logs of every unit mod q
        let units = arith::units(q);
        let logs: Vec<Vec<u64>> = {
            let mut table = vec![Vec::new(); q as usize];
            let mut idx = vec![0u64; comps.len()];
            let total: u64 = comps.iter().map(|c| c.2).product();
            for _ in 0..total {
                // residue with these exponents via CRT over components
                let mut residue_per_pe: Vec<(u64, u64)> =
                    arith::factorize(q).iter().map(|&(p, e)| (p.pow(e), 1 % p.pow(e))).collect();
                for (ci, &(pe, g, _)) in comps.iter().enumerate() {
                    let v = arith::pow_mod(g, idx[ci], pe);
                    let slot = residue_per_pe.iter_mut().find(|l| l.0 == pe).unwrap();
                    slot.1 = arith::mul_mod(slot.1, v, pe);
                }
                let r = crt(q, &residue_per_pe);
                table[r as usize] = idx.clone();
                for ci in 0..comps.len() {
                    idx[ci] += 1;
                    if idx[ci] < comps[ci].2 {
                        break;
                    }
                    idx[ci] = 0;
                }
            }
            table
        };
        let total: u64 = comps.iter().map(|c| c.2).product();
        let mut out = Vec::with_capacity(total as usize);
        let mut j = vec![0u64; comps.len()];
        for t in 0..total {
            let mut values = vec![Complex64::new(0.0, 0.0); q as usize];
            for &u in &units {
                let l = &logs[u as usize];
                let mut frac = 0.0;
                for ci in 0..comps.len() {
                    frac += (j[ci] * l[ci] % comps[ci].2) as f64 / comps[ci].2 as f64;
                }
                values[u as usize] = e_of(frac - frac.round());
            }
            out.push(DirichletCharacter {
                modulus: q,
                label: format!("mod {q} #{t}"),
                values,
            });
            for ci in 0..comps.len() {
                j[ci] += 1;
                if j[ci] < comps[ci].2 {
                    break;
                }
                j[ci] = 0;
            }
        }
        out
    }

    #[inline]
    pub fn value(&self, n: u64) -> Complex64 {
        self.values[(n % self.modulus) as usize]
    }

    pub fn is_principal(&self) -> bool {
        (0..self.modulus).all(|r| {
            let v = self.values[r as usize];
            v.norm() < 1e-12 || (v - Complex64::new(1.0, 0.0)).norm() < 1e-12
        })
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im.abs() < 1e-12)
    }
}

fn crt(q: u64, parts: &[(u64, u64)]) -> u64 {
    let mut r = 0u64;
    for &(m, v) in parts {
        let rest = q / m;
        let inv = arith::mod_inverse(rest % m, m).unwrap_or(0);
        r = (r + arith::mul_mod(arith::mul_mod(v, inv, m), rest, q)) % q;
    }
    r
}

/// Characters on ideals: trivial, or `χ ∘ N` for a Dirichlet character.
#[derive(Clone, Debug)]
pub enum IdealCharacter {
    Trivial,
    NormComposed(DirichletCharacter),
    /// Anything else, e.g. characters of nontrivial infinity type.
    Other(String),
}

impl IdealCharacter {
    /// `ξ` on an ideal of norm `m`.
    pub fn on_norm(&self, m: u64) -> Result<Complex64> {
        match self {
            IdealCharacter::Trivial => Ok(Complex64::new(1.0, 0.0)),
            IdealCharacter::NormComposed(chi) => Ok(chi.value(m)),
            IdealCharacter::Other(s) => Err(Error::UnsupportedCharacter(s.clone())),
        }
    }

    pub fn check_supported(&self) -> Result<()> {
        match self {
            IdealCharacter::Other(s) => Err(Error::UnsupportedCharacter(s.clone())),
            _ => Ok(()),
        }
    }
}

/// `Σ_{m ≤ X, n | m} r_d(m)/m`.
pub fn norm_divisible_recip_sum(field: &QuadraticField, n: u64, x: u64) -> f64 {
    if n == 0 || n > x {
        return 0.0;
    }
    let r = field.ideal_counts(x);
    crate::phase::neumaier_sum((n..=x).step_by(n as usize).map(|m| r[m as usize] as f64 / m as f64))
}

/// `Σ_{m ≤ X} r_d(m) ξ(m) e(αm)`, weighted by `log m` if requested.
pub fn ideal_exp_sum(
    field: &QuadraticField,
    xi: &IdealCharacter,
    alpha: Alpha,
    x: u64,
    log_weighted: bool,
) -> Result<Complex64> {
    xi.check_supported()?;
    if x > 10_000_000 {
        return Err(Error::ResourceLimit(format!("X = {x} exceeds 10^7")));
    }
    let r = field.ideal_counts(x);
    let mut acc = ComplexSum::default();
    for (m, phase) in (1..=x).zip(alpha.walk(1)) {
        let c = r[m as usize];
        if c == 0 {
            continue;
        }
        let mut w = c as f64;
        if log_weighted {
            w *= (m as f64).ln();
        }
        acc.add(phase * xi.on_norm(m)? * w);
    }
    Ok(acc.value())
}

// ---------------------------------------------------------------------------
// Weyl sums

/// Forward differences `Δ^j P(1)`, `j = 0..=deg`, wrapped mod 2^128.
fn forward_differences(coeffs: &[i64]) -> Vec<i128> {
    let k = coeffs.len() - 1;
    let eval = |x: i128| -> i128 {
        coeffs
            .iter()
            .rev()
            .fold(0i128, |acc, &c| acc.wrapping_mul(x).wrapping_add(c as i128))
    };
    let mut row: Vec<i128> = (1..=k as i128 + 1).map(eval).collect();
    let mut out = Vec::with_capacity(k + 1);
    for _ in 0..=k {
        out.push(row[0]);
        row = row.windows(2).map(|w| w[1].wrapping_sub(w[0])).collect();
    }
    out
}

fn trim_poly(p: &[i64]) -> Result<&[i64]> {
    let mut end = p.len();
    while end > 0 && p[end - 1] == 0 {
        end -= 1;
    }
    if end < 2 {
        return Err(Error::Domain("polynomial must have degree at least 1".into()));
    }
    Ok(&p[..end])
}

/// `Σ_{x=1}^{X} e(α P(x))` for `P` in ascending coefficients, stepping the
/// difference table of `α·P` mod 1 exactly.
pub fn weyl_sum(poly: &[i64], alpha: Alpha, x: u64) -> Result<Complex64> {
    let p = trim_poly(poly)?;
    if x > 100_000_000 {
        return Err(Error::ResourceLimit(format!("X = {x} exceeds 10^8")));
    }
    let diffs = forward_differences(p);
    let mut acc = ComplexSum::default();
    match alpha {
        Alpha::Rational { num, den } => {
            let m = den as i128;
            let mut t: Vec<i128> = diffs
                .iter()
                .map(|&d| (num as i128 % m) * (d.rem_euclid(m)) % m)
                .map(|v| v.rem_euclid(m))
                .collect();
            let k = t.len();
            for _ in 0..x {
                let mut r = t[0];
                if 2 * r >= m {
                    r -= m;
                }
                acc.add(e_of(r as f64 / den as f64));
                for j in 0..k - 1 {
                    t[j] = (t[j] + t[j + 1]) % m;
                }
            }
        }
        _ => {
            let base = match alpha {
                Alpha::Real(v) => Turns::from_f64(v),
                Alpha::Fixed(t) => t,
                Alpha::Rational { .. } => unreachable!(),
            };
            let mut t: Vec<Turns> = diffs.iter().map(|&d| base.mul_int(d)).collect();
            let k = t.len();
            for _ in 0..x {
                acc.add(t[0].cis());
                for j in 0..k - 1 {
                    t[j] = t[j].add(t[j + 1]);
                }
            }
        }
    }
    Ok(acc.value())
}

/// `|weyl_sum| / (|c| X (1/q + 1/X + q/X^k)^{10^{-k}})` with `q` from
/// [`best_approx`] at `Qmax = X` and `c x^k` the leading term.
pub fn weyl_bound_ratio(poly: &[i64], alpha: Alpha, x: u64) -> Result<WeylRow> {
    let p = trim_poly(poly)?;
    if exact_value(alpha)?.is_integer() {
        return Err(Error::Domain("alpha is an integer; q is undefined".into()));
    }
    let s = weyl_sum(p, alpha, x)?;
    let approx = best_approx(alpha, x.max(1))?;
    let k = (p.len() - 1) as i32;
    let c = p[p.len() - 1].unsigned_abs() as f64;
    let (q, xf) = (approx.q as f64, x as f64);
    let inner = 1.0 / q + 1.0 / xf + q / xf.powi(k);
    let bound = c * xf * inner.powf(10f64.powi(-k));
    Ok(WeylRow {
        alpha: alpha.to_string(),
        q: approx.q,
        x,
        sum_re: s.re,
        sum_im: s.im,
        bound,
        ratio: s.norm() / bound,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeylRow {
    pub alpha: String,
    pub q: u64,
    #[serde(rename = "X")]
    pub x: u64,
    pub sum_re: f64,
    pub sum_im: f64,
    pub bound: f64,
    pub ratio: f64,
}

impl WeylRow {
    pub const CSV_HEADER: &'static str = "alpha,q,X,sum_re,sum_im,bound,ratio";

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{:.12e},{:.12e},{:.12e},{:.12e}",
            self.alpha, self.q, self.x, self.sum_re, self.sum_im, self.bound, self.ratio
        )
    }
}
