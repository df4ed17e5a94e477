//! Elliptic curves `y² = x³ + Ax + B` with `A = pq/4`, `B = npq²` whose
//! discriminant `−p²q³(p + 432n²q)` has only prime divisors that split
//! completely in a given field.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::is_prime;
use crate::error::{Error, Result};
use crate::galois::{FrobeniusResult, GaloisSpec};
use crate::sieve::PrimeTable;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrobeniusEntry {
    pub prime: u64,
    /// Class label, or `"ramified"`.
    pub class: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegralModel {
    #[serde(rename = "A")]
    pub a: String,
    #[serde(rename = "B")]
    pub b: String,
    pub discriminant: String,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveCertificate {
    pub p: u64,
    pub q: u64,
    pub r: u64,
    pub n: u64,
    /// `pq/4`, reduced.
    #[serde(rename = "A")]
    pub a: String,
    #[serde(rename = "B")]
    pub b: String,
    pub discriminant: String,
    pub identity_class: String,
    pub frobenius: Vec<FrobeniusEntry>,
    pub integral_model: IntegralModel,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub valid: bool,
    pub reasons: Vec<String>,
}

fn big(v: u64) -> BigInt {
    BigInt::from(v)
}

fn rational_string(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// `(A, B) = (pq/4, npq²)`.
pub fn curve_coefficients(p: u64, q: u64, n: u64) -> (BigRational, BigRational) {
    let a = BigRational::new(big(p) * big(q), big(4));
    let b = BigRational::from_integer(big(n) * big(p) * big(q) * big(q));
    (a, b)
}

/// `−16(4A³ + 27B²)`.
pub fn weierstrass_discriminant(a: &BigRational, b: &BigRational) -> BigRational {
    let four = BigRational::from_integer(big(4));
    let t27 = BigRational::from_integer(big(27));
    -BigRational::from_integer(big(16)) * (four * a * a * a + t27 * b * b)
}

/// `−p²q³(p + 432n²q)`.
pub fn closed_form_discriminant(p: u64, q: u64, n: u64) -> BigInt {
    let r = big(p) + big(432) * big(n) * big(n) * big(q);
    -(big(p).pow(2) * big(q).pow(3) * r)
}

pub fn discriminant_identity_holds(p: u64, q: u64, n: u64) -> bool {
    let (a, b) = curve_coefficients(p, q, n);
    weierstrass_discriminant(&a, &b) == BigRational::from_integer(closed_form_discriminant(p, q, n))
}

/// Index of the class of the identity element.
pub fn identity_class(spec: &GaloisSpec) -> Result<usize> {
    spec.classes()
        .iter()
        .position(|c| spec.element_order(c) == 1)
        .ok_or_else(|| Error::Validation("spec has no identity class".into()))
}

fn frobenius_entry(spec: &GaloisSpec, p: u64) -> Result<FrobeniusEntry> {
    Ok(FrobeniusEntry {
        prime: p,
        class: match spec.frobenius_class(p)? {
            FrobeniusResult::Class(l) => l,
            FrobeniusResult::Ramified => "ramified".to_string(),
        },
    })
}

fn build_certificate(spec: &GaloisSpec, p: u64, q: u64, r: u64, n: u64, id: usize) -> Result<CurveCertificate> {
    let (a, b) = curve_coefficients(p, q, n);
    let disc = closed_form_discriminant(p, q, n);
    let a_int = big(4) * big(p) * big(q);
    let b_int = big(64) * big(n) * big(p) * big(q) * big(q);
    let disc_int = disc.clone() * BigInt::from(4096);
    Ok(CurveCertificate {
        p,
        q,
        r,
        n,
        a: rational_string(&a),
        b: rational_string(&b),
        discriminant: disc.to_string(),
        identity_class: spec.classes()[id].label.clone(),
        frobenius: vec![
            frobenius_entry(spec, p)?,
            frobenius_entry(spec, q)?,
            frobenius_entry(spec, r)?,
        ],
        integral_model: IntegralModel {
            a: a_int.to_string(),
            b: b_int.to_string(),
            discriminant: disc_int.to_string(),
            note: "scaled by u = 2: A' = 2^4 A, B' = 2^6 B, discriminant gains 2^12".to_string(),
        },
    })
}

/// Searches primes `q`, then `p`, up to `search_limit` in increasing order
/// for `p, q, r = p + 432n²q` all prime and in the identity class, `n = D`.
pub fn construct_curve(spec: &GaloisSpec, search_limit: u64) -> Result<CurveCertificate> {
    let report = spec.validate();
    if !report.is_valid() {
        return Err(Error::InvalidSpec(report));
    }
    let id = identity_class(spec)?;
    let n = spec.modulus();
    let table = PrimeTable::new(search_limit.max(2))?;
    let primes = table.primes_up_to(search_limit);
    let in_identity = |p: u64| -> Result<bool> { Ok(spec.frobenius_index(p)? == Some(id)) };
    let good: Vec<u64> = primes
        .par_iter()
        .map(|&p| Ok(in_identity(p as u64)?.then_some(p as u64)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let step = 432u128 * n as u128 * n as u128;
    let found = good
        .par_iter()
        .map(|&q| -> Result<Option<(u64, u64, u64)>> {
            for &p in &good {
                let r = p as u128 + step * q as u128;
                if r > u64::MAX as u128 {
                    return Err(Error::ResourceLimit("r exceeds 64 bits".into()));
                }
                let r = r as u64;
                if is_prime(r) && in_identity(r)? {
                    return Ok(Some((p, q, r)));
                }
            }
            Ok(None)
        })
        .find_map_first(|res| match res {
            Ok(None) => None,
            other => Some(other),
        });
    match found {
        Some(Ok(Some((p, q, r)))) => build_certificate(spec, p, q, r, n, id),
        Some(Err(e)) => Err(e),
        _ => Err(Error::NotFoundWithinLimit { limit: search_limit }),
    }
}

fn parse_rational(s: &str) -> Option<BigRational> {
    match s.split_once('/') {
        Some((n, d)) => {
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n.trim().parse().ok()?, d))
        }
        None => Some(BigRational::from_integer(s.trim().parse().ok()?)),
    }
}

/// Strips every factor `p` from `v`.
fn strip(v: &mut BigInt, p: u64) {
    let bp = big(p);
    if bp <= BigInt::one() {
        return;
    }
    while !v.is_zero() && (&*v % &bp).is_zero() {
        *v /= &bp;
    }
}

/// Re-derives every claim of a certificate from scratch.
pub fn check_certificate(cert: &CurveCertificate, spec: &GaloisSpec) -> CertificateCheck {
    let mut reasons = Vec::new();
    let (p, q, r, n) = (cert.p, cert.q, cert.r, cert.n);
    let expected_r = p as u128 + 432 * (n as u128) * (n as u128) * q as u128;
    if r as u128 != expected_r {
        reasons.push("r ≠ p + 432n²q".to_string());
    }
    if n != spec.modulus() {
        reasons.push(format!("n = {n} but D = {}", spec.modulus()));
    }
    let id = identity_class(spec).ok();
    for (name, v) in [("p", p), ("q", q), ("r", r)] {
        if !is_prime(v) {
            reasons.push(format!("{name} not prime"));
            continue;
        }
        match spec.frobenius_index(v) {
            Ok(None) => reasons.push(format!("{name} ramified")),
            Ok(Some(i)) if Some(i) == id => {}
            Ok(Some(_)) => reasons.push(format!("{name} not identity class")),
            Err(e) => reasons.push(format!("{name}: {e}")),
        }
    }

    let (a, b) = curve_coefficients(p, q, n);
    if parse_rational(&cert.a) != Some(a.clone()) {
        reasons.push("A ≠ pq/4".to_string());
    }
    if parse_rational(&cert.b) != Some(b.clone()) {
        reasons.push("B ≠ npq²".to_string());
    }
    let weier = weierstrass_discriminant(&a, &b);
    let literal = -(big(p).pow(2) * big(q).pow(3) * big(r));
    if weier != BigRational::from_integer(literal.clone()) {
        reasons.push("−16(4A³+27B²) ≠ −p²q³r".to_string());
    }
    if cert.discriminant.parse::<BigInt>().ok() != Some(literal.clone()) {
        reasons.push("stated discriminant ≠ −p²q³r".to_string());
    }
    let mut cofactor = literal.abs();
    for v in [p, q, r] {
        strip(&mut cofactor, v);
    }
    if cofactor != BigInt::one() {
        reasons.push(format!("discriminant has prime divisors outside {{p, q, r}} (cofactor {cofactor})"));
    }

    let a_int = BigRational::from_integer(big(16)) * &a;
    let b_int = BigRational::from_integer(big(64)) * &b;
    if parse_rational(&cert.integral_model.a) != Some(a_int.clone())
        || parse_rational(&cert.integral_model.b) != Some(b_int.clone())
    {
        reasons.push("integral model coefficients ≠ (2⁴A, 2⁶B)".to_string());
    }
    let d_int = weierstrass_discriminant(&a_int, &b_int);
    if d_int != weier * BigRational::from_integer(BigInt::from(4096))
        || parse_rational(&cert.integral_model.discriminant) != Some(d_int)
    {
        reasons.push("integral model discriminant ≠ 2¹²Δ".to_string());
    }
    let transcript_ok = cert.frobenius.len() == 3
        && cert
            .frobenius
            .iter()
            .zip([p, q, r])
            .all(|(e, v)| e.prime == v && frobenius_entry(spec, v).map(|f| f == *e).unwrap_or(false));
    if !transcript_ok {
        reasons.push("Frobenius transcript does not match".to_string());
    }
    CertificateCheck {
        valid: reasons.is_empty(),
        reasons,
    }
}
