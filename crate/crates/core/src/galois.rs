//! Galois extensions of Q and classification of rational primes by the
//! conjugacy class of their Frobenius element.
//!
//! Two descriptions are supported. An abelian field is given by a modulus
//! `D_K` and one coset of `(Z/D_K)^*` per Galois element, so the Frobenius of
//! `p` is read off from `p mod D_K`. A general Galois field is given by a
//! monic defining polynomial `f` of degree `|G|`; since `f` generates a normal
//! extension, `f mod p` splits into `|G|/d` irreducible factors of a common
//! degree `d` equal to the order of Frobenius. Classes are told apart by that
//! order alone, so groups with two classes of the same element order are
//! rejected at validation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, euler_phi, gcd, is_prime, lcm, mod_inverse, mul_mod, units};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub label: String,
    /// `|C|`; always 1 for abelian fields.
    #[serde(default = "one_u64")]
    pub class_size: u64,
    /// Order of the Frobenius elements in this class. Required for
    /// polynomial specs; derived from the coset for abelian ones.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element_order: Option<u64>,
    /// Image of the class in `(Z/D)^*`.
    pub coset: Vec<u64>,
}

fn one_u64() -> u64 {
    1
}

impl ClassSpec {
    pub fn new(label: &str, coset: Vec<u64>) -> ClassSpec {
        ClassSpec {
            label: label.to_string(),
            class_size: 1,
            element_order: None,
            coset,
        }
    }

    pub fn with_order(label: &str, class_size: u64, element_order: u64, coset: Vec<u64>) -> ClassSpec {
        ClassSpec {
            label: label.to_string(),
            class_size,
            element_order: Some(element_order),
            coset,
        }
    }

    pub fn contains_residue(&self, r: u64) -> bool {
        self.coset.contains(&r)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AbelianSpec {
    pub modulus: u64,
    pub classes: Vec<ClassSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolynomialSpec {
    /// Coefficients in ascending degree order.
    pub coeffs: Vec<i64>,
    pub group_order: u64,
    /// Modulus `D` of the maximal abelian subfield.
    pub abel_modulus: u64,
    pub classes: Vec<ClassSpec>,
    #[serde(skip)]
    disc: OnceLock<BigInt>,
}

impl PolynomialSpec {
    pub fn new(coeffs: Vec<i64>, group_order: u64, abel_modulus: u64, classes: Vec<ClassSpec>) -> Self {
        PolynomialSpec {
            coeffs,
            group_order,
            abel_modulus,
            classes,
            disc: OnceLock::new(),
        }
    }

    pub fn discriminant(&self) -> &BigInt {
        self.disc.get_or_init(|| discriminant(&self.coeffs))
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GaloisSpec {
    Abelian(AbelianSpec),
    Polynomial(PolynomialSpec),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrobeniusResult {
    Class(String),
    Ramified,
}

pub const BUILTIN_SPECS: &[&str] = &["trivial", "gaussian", "s3-cbrt2"];

impl GaloisSpec {
    /// `Q` itself: modulus 1, a single class.
    pub fn trivial() -> GaloisSpec {
        GaloisSpec::Abelian(AbelianSpec {
            modulus: 1,
            classes: vec![ClassSpec::new("e", vec![0])],
        })
    }

    /// `Q(i)`: identity class `e` (p = 1 mod 4) and conjugation `c` (p = 3 mod 4).
    pub fn gaussian() -> GaloisSpec {
        GaloisSpec::Abelian(AbelianSpec {
            modulus: 4,
            classes: vec![ClassSpec::new("e", vec![1]), ClassSpec::new("c", vec![3])],
        })
    }

    /// Splitting field of `x^3 - 2`, generated by a root of `x^6 + 108`;
    /// Galois group `S_3` with abelianization `Q(sqrt(-3))`.
    pub fn s3_cbrt2() -> GaloisSpec {
        GaloisSpec::Polynomial(PolynomialSpec::new(
            vec![108, 0, 0, 0, 0, 0, 1],
            6,
            3,
            vec![
                ClassSpec::with_order("1", 1, 1, vec![1]),
                ClassSpec::with_order("2", 3, 2, vec![2]),
                ClassSpec::with_order("3", 2, 3, vec![1]),
            ],
        ))
    }

    pub fn builtin(name: &str) -> Option<GaloisSpec> {
        match name {
            "trivial" | "Q" | "rationals" => Some(Self::trivial()),
            "gaussian" | "Q(i)" => Some(Self::gaussian()),
            "s3-cbrt2" => Some(Self::s3_cbrt2()),
            _ => None,
        }
    }

    pub fn from_json(s: &str) -> Result<GaloisSpec> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }

    pub fn classes(&self) -> &[ClassSpec] {
        match self {
            GaloisSpec::Abelian(a) => &a.classes,
            GaloisSpec::Polynomial(p) => &p.classes,
        }
    }

    /// Modulus of the abelianization data (`D_K` or `D`).
    pub fn modulus(&self) -> u64 {
        match self {
            GaloisSpec::Abelian(a) => a.modulus,
            GaloisSpec::Polynomial(p) => p.abel_modulus,
        }
    }

    pub fn group_order(&self) -> u64 {
        match self {
            GaloisSpec::Abelian(a) => a.classes.len() as u64,
            GaloisSpec::Polynomial(p) => p.group_order,
        }
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.classes().iter().position(|c| c.label == label)
    }

    pub fn class(&self, label: &str) -> Option<&ClassSpec> {
        self.classes().iter().find(|c| c.label == label)
    }

    /// Chebotarev density `|C|/|G|` as a reduced fraction.
    pub fn density(&self, class: &ClassSpec) -> (u64, u64) {
        let (n, d) = (class.class_size, self.group_order());
        let g = gcd(n, d).max(1);
        (n / g, d / g)
    }

    /// Element order of a class; for abelian specs, the order of its coset
    /// in `(Z/D_K)^* / H^0`.
    pub fn element_order(&self, class: &ClassSpec) -> u64 {
        if let Some(o) = class.element_order {
            return o;
        }
        let m = self.modulus();
        let identity = self
            .classes()
            .iter()
            .find(|c| c.coset.contains(&(1 % m)))
            .map(|c| c.coset.clone())
            .unwrap_or_default();
        let Some(&h) = class.coset.first() else {
            return 0;
        };
        let mut x = h % m;
        let mut k = 1;
        while !identity.contains(&x) && k <= m {
            x = mul_mod(x, h, m);
            k += 1;
        }
        k
    }

    pub fn is_ramified(&self, p: u64) -> bool {
        match self {
            GaloisSpec::Abelian(a) => a.modulus % p == 0,
            GaloisSpec::Polynomial(ps) => {
                let disc = ps.discriminant();
                (disc % BigInt::from(p)).is_zero()
            }
        }
    }

    /// Index into [`GaloisSpec::classes`] of the Frobenius class of `p`, or
    /// `None` for ramified primes.
    pub fn frobenius_index(&self, p: u64) -> Result<Option<usize>> {
        if !is_prime(p) {
            return Err(Error::Domain(format!("{p} is not prime")));
        }
        if self.is_ramified(p) {
            return Ok(None);
        }
        match self {
            GaloisSpec::Abelian(a) => {
                let r = p % a.modulus;
                a.classes
                    .iter()
                    .position(|c| c.contains_residue(r))
                    .map(Some)
                    .ok_or_else(|| Error::InconsistentSpec {
                        prime: p,
                        detail: format!("residue {r} mod {} lies in no class", a.modulus),
                    })
            }
            GaloisSpec::Polynomial(ps) => {
                let degs = poly_factor_degrees(&ps.coeffs, p);
                let d = degs[0];
                if degs.iter().any(|&x| x != d) {
                    return Err(Error::InconsistentSpec {
                        prime: p,
                        detail: format!("factor degrees {degs:?} are not all equal"),
                    });
                }
                ps.classes
                    .iter()
                    .position(|c| c.element_order == Some(d as u64))
                    .map(Some)
                    .ok_or_else(|| Error::InconsistentSpec {
                        prime: p,
                        detail: format!("no class of element order {d}"),
                    })
            }
        }
    }

    pub fn frobenius_class(&self, p: u64) -> Result<FrobeniusResult> {
        Ok(match self.frobenius_index(p)? {
            Some(i) => FrobeniusResult::Class(self.classes()[i].label.clone()),
            None => FrobeniusResult::Ramified,
        })
    }

    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        let classes = self.classes();
        if classes.is_empty() {
            issues.push(ValidationIssue::EmptyClasses);
            return ValidationReport { issues };
        }
        let mut seen = BTreeSet::new();
        for c in classes {
            if !seen.insert(c.label.as_str()) {
                issues.push(ValidationIssue::DuplicateLabel { label: c.label.clone() });
            }
        }
        let m = self.modulus();
        if m == 0 {
            issues.push(ValidationIssue::ZeroModulus);
            return ValidationReport { issues };
        }
        check_cosets(m, classes, matches!(self, GaloisSpec::Abelian(_)), &mut issues);
        match self {
            GaloisSpec::Abelian(a) => {
                for c in &a.classes {
                    if c.class_size != 1 {
                        issues.push(ValidationIssue::ClassSizeSum {
                            sum: c.class_size,
                            group_order: 1,
                        });
                    }
                }
            }
            GaloisSpec::Polynomial(ps) => validate_polynomial(ps, &mut issues),
        }
        ValidationReport { issues }
    }

    /// Validates and returns the spec, or [`Error::InvalidSpec`].
    pub fn validated(self) -> Result<GaloisSpec> {
        let report = self.validate();
        if report.is_valid() {
            Ok(self)
        } else {
            Err(Error::InvalidSpec(report))
        }
    }
}

fn check_cosets(m: u64, classes: &[ClassSpec], must_partition: bool, issues: &mut Vec<ValidationIssue>) {
    let unit_set: BTreeSet<u64> = units(m).into_iter().collect();
    let mut bad = false;
    for c in classes {
        if c.coset.is_empty() {
            issues.push(ValidationIssue::EmptyCoset { label: c.label.clone() });
            bad = true;
        }
        for &r in &c.coset {
            if !unit_set.contains(&r) {
                issues.push(ValidationIssue::InvalidCoset {
                    label: c.label.clone(),
                    residue: r,
                });
                bad = true;
            }
        }
    }
    if bad {
        return;
    }
    let size = classes[0].coset.len();
    if classes.iter().any(|c| c.coset.len() != size) {
        issues.push(ValidationIssue::UnequalCosetSizes);
        return;
    }
    // every coset must be h*H0 for one common subgroup H0
    let mut subgroups = BTreeSet::new();
    for c in classes {
        let h = c.coset[0];
        let hinv = if m == 1 { 0 } else { mod_inverse(h, m).unwrap_or(0) };
        let h0: BTreeSet<u64> = c.coset.iter().map(|&x| mul_mod(x, hinv, m)).collect();
        let closed = h0.len() == c.coset.len()
            && h0.iter().all(|&x| h0.iter().all(|&y| h0.contains(&mul_mod(x, y, m))));
        if !closed {
            issues.push(ValidationIssue::NotACoset { label: c.label.clone() });
            return;
        }
        subgroups.insert(h0.into_iter().collect::<Vec<_>>());
    }
    if subgroups.len() > 1 {
        issues.push(ValidationIssue::MismatchedSubgroups);
        return;
    }
    let mut cover = BTreeMap::new();
    for c in classes {
        for &r in &c.coset {
            *cover.entry(r).or_insert(0usize) += 1;
        }
    }
    let covers_all = cover.len() == unit_set.len();
    let disjoint = cover.values().all(|&k| k == 1);
    if !covers_all || (must_partition && !disjoint) {
        issues.push(ValidationIssue::CosetsNotPartition);
    }
}

fn validate_polynomial(ps: &PolynomialSpec, issues: &mut Vec<ValidationIssue>) {
    let n = ps.degree();
    if n == 0 || *ps.coeffs.last().unwrap() != 1 {
        issues.push(ValidationIssue::NotMonic);
        return;
    }
    if n as u64 != ps.group_order {
        issues.push(ValidationIssue::DegreeMismatch {
            degree: n as u64,
            group_order: ps.group_order,
        });
    }
    let sum: u64 = ps.classes.iter().map(|c| c.class_size).sum();
    if sum != ps.group_order {
        issues.push(ValidationIssue::ClassSizeSum {
            sum,
            group_order: ps.group_order,
        });
    }
    let mut orders = BTreeMap::new();
    for c in &ps.classes {
        match c.element_order {
            None => issues.push(ValidationIssue::ElementOrderMissing { label: c.label.clone() }),
            Some(o) => {
                if o == 0 || ps.group_order % o != 0 {
                    issues.push(ValidationIssue::ElementOrderNotDividing { label: c.label.clone() });
                }
                if orders.insert(o, c.label.clone()).is_some() {
                    issues.push(ValidationIssue::UnidentifiableClasses { order: o });
                }
            }
        }
    }
    let disc = ps.discriminant().clone();
    if disc.is_zero() {
        issues.push(ValidationIssue::ZeroDiscriminant);
        return;
    }
    for q in arith::prime_divisors(ps.abel_modulus) {
        if !(&disc % BigInt::from(q)).is_zero() {
            issues.push(ValidationIssue::ModulusNotRamified { prime: q });
        }
    }
    if has_rational_root(&ps.coeffs) {
        issues.push(ValidationIssue::Reducible {
            reason: "rational root".into(),
        });
        return;
    }
    // Galois consistency and identifiability over small primes; the lcm of the
    // observed Frobenius orders divides the degree of every factor over Z.
    let mut order_lcm = 1u64;
    for p in (2u64..2000).filter(|&p| is_prime(p)) {
        if (&disc % BigInt::from(p)).is_zero() {
            continue;
        }
        let degs = poly_factor_degrees(&ps.coeffs, p);
        let d = degs[0];
        if degs.iter().any(|&x| x != d) {
            issues.push(ValidationIssue::NotGalois { prime: p });
            return;
        }
        if !orders.contains_key(&(d as u64)) {
            issues.push(ValidationIssue::MissingClassForOrder { order: d as u64 });
            return;
        }
        order_lcm = lcm(order_lcm, d as u64);
    }
    if order_lcm != n as u64 {
        issues.push(ValidationIssue::IrreducibilityUnconfirmed);
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "code")]
pub enum ValidationIssue {
    EmptyClasses,
    ZeroModulus,
    DuplicateLabel { label: String },
    EmptyCoset { label: String },
    InvalidCoset { label: String, residue: u64 },
    UnequalCosetSizes,
    NotACoset { label: String },
    MismatchedSubgroups,
    CosetsNotPartition,
    NotMonic,
    DegreeMismatch { degree: u64, group_order: u64 },
    ClassSizeSum { sum: u64, group_order: u64 },
    ElementOrderMissing { label: String },
    ElementOrderNotDividing { label: String },
    UnidentifiableClasses { order: u64 },
    ZeroDiscriminant,
    ModulusNotRamified { prime: u64 },
    Reducible { reason: String },
    NotGalois { prime: u64 },
    MissingClassForOrder { order: u64 },
    /// Non-fatal: no small prime certified irreducibility.
    IrreducibilityUnconfirmed,
}

impl ValidationIssue {
    pub fn code(&self) -> &'static str {
        use ValidationIssue::*;
        match self {
            EmptyClasses => "EmptyClasses",
            ZeroModulus => "ZeroModulus",
            DuplicateLabel { .. } => "DuplicateLabel",
            EmptyCoset { .. } => "EmptyCoset",
            InvalidCoset { .. } => "InvalidCoset",
            UnequalCosetSizes => "UnequalCosetSizes",
            NotACoset { .. } => "NotACoset",
            MismatchedSubgroups => "MismatchedSubgroups",
            CosetsNotPartition => "CosetsNotPartition",
            NotMonic => "NotMonic",
            DegreeMismatch { .. } => "DegreeMismatch",
            ClassSizeSum { .. } => "ClassSizeSum",
            ElementOrderMissing { .. } => "ElementOrderMissing",
            ElementOrderNotDividing { .. } => "ElementOrderNotDividing",
            UnidentifiableClasses { .. } => "UnidentifiableClasses",
            ZeroDiscriminant => "ZeroDiscriminant",
            ModulusNotRamified { .. } => "ModulusNotRamified",
            Reducible { .. } => "Reducible",
            NotGalois { .. } => "NotGalois",
            MissingClassForOrder { .. } => "MissingClassForOrder",
            IrreducibilityUnconfirmed => "IrreducibilityUnconfirmed",
        }
    }

    pub fn is_fatal(&self) -> bool {
        !matches!(self, ValidationIssue::IrreducibilityUnconfirmed)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.iter().all(|i| !i.is_fatal())
    }

    pub fn codes(&self) -> Vec<&'static str> {
        self.issues.iter().map(|i| i.code()).collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return write!(f, "valid");
        }
        let parts: Vec<String> = self.issues.iter().map(|i| format!("{i:?}")).collect();
        write!(f, "{}", parts.join("; "))
    }
}

// ---------------------------------------------------------------------------
// polynomials over Z and F_p

fn has_rational_root(coeffs: &[i64]) -> bool {
    // monic: rational roots are integers dividing the constant term
    let c0 = coeffs[0];
    if c0 == 0 {
        return true;
    }
    let eval = |x: i64| -> BigInt {
        coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, &c| acc * BigInt::from(x) + BigInt::from(c))
    };
    let c = c0.unsigned_abs();
    let mut divisors = vec![1u64];
    for (p, e) in arith::factorize(c) {
        let cur = divisors.clone();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            divisors.extend(cur.iter().map(|d| d * pk));
        }
    }
    divisors
        .into_iter()
        .any(|d| eval(d as i64).is_zero() || eval(-(d as i64)).is_zero())
}

/// Discriminant of an integer polynomial (ascending coefficients) as the
/// resultant `Res(f, f')` up to sign and leading coefficient.
pub fn discriminant(coeffs: &[i64]) -> BigInt {
    let n = coeffs.len().saturating_sub(1);
    if n == 0 {
        return BigInt::zero();
    }
    if n == 1 {
        return BigInt::one();
    }
    let f: Vec<BigInt> = coeffs.iter().rev().map(|&c| BigInt::from(c)).collect();
    let df: Vec<BigInt> = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .map(|(i, &c)| BigInt::from(c) * BigInt::from(i as i64))
        .collect();
    let size = 2 * n - 1;
    let mut m = vec![vec![BigInt::zero(); size]; size];
    for row in 0..n - 1 {
        for (j, c) in f.iter().enumerate() {
            m[row][row + j] = c.clone();
        }
    }
    for row in 0..n {
        for (j, c) in df.iter().enumerate() {
            m[n - 1 + row][row + j] = c.clone();
        }
    }
    let res = bareiss_det(m);
    let lead = BigInt::from(*coeffs.last().unwrap());
    let sign = if (n * (n - 1) / 2) % 2 == 1 { -BigInt::one() } else { BigInt::one() };
    sign * res / lead
}

fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v.div_floor(&prev);
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

type Fp = Vec<u64>;

fn trim(a: &mut Fp) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn reduce_mod_p(coeffs: &[i64], p: u64) -> Fp {
    let mut a: Fp = coeffs.iter().map(|&c| arith::rem_euclid(c as i128, p)).collect();
    trim(&mut a);
    a
}

fn make_monic(a: &mut Fp, p: u64) {
    if let Some(&lead) = a.last() {
        let inv = mod_inverse(lead, p).expect("nonzero lead over F_p");
        for c in a.iter_mut() {
            *c = mul_mod(*c, inv, p);
        }
    }
}

fn poly_rem(a: &Fp, m: &Fp, p: u64) -> Fp {
    let mut r = a.clone();
    trim(&mut r);
    let dm = m.len() - 1;
    let inv = mod_inverse(*m.last().unwrap(), p).unwrap();
    while r.len() > dm {
        let lead = mul_mod(*r.last().unwrap(), inv, p);
        let shift = r.len() - 1 - dm;
        for (i, &c) in m.iter().enumerate() {
            let sub = mul_mod(lead, c, p);
            r[shift + i] = (r[shift + i] + p - sub) % p;
        }
        trim(&mut r);
    }
    r
}

fn poly_mulmod(a: &Fp, b: &Fp, m: &Fp, p: u64) -> Fp {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + mul_mod(x, y, p)) % p;
        }
    }
    poly_rem(&prod, m, p)
}

fn poly_powmod(base: &Fp, mut e: u64, m: &Fp, p: u64) -> Fp {
    let mut acc = poly_rem(&vec![1], m, p);
    let mut b = poly_rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mulmod(&acc, &b, m, p);
        }
        b = poly_mulmod(&b, &b, m, p);
        e >>= 1;
    }
    acc
}

fn poly_gcd(a: &Fp, b: &Fp, p: u64) -> Fp {
    let (mut a, mut b) = (a.clone(), b.clone());
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    make_monic(&mut a, p);
    a
}

fn poly_divexact(a: &Fp, b: &Fp, p: u64) -> Fp {
    let mut r = a.clone();
    let db = b.len() - 1;
    let inv = mod_inverse(*b.last().unwrap(), p).unwrap();
    let mut q = vec![0u64; r.len().saturating_sub(db)];
    while r.len() > db && !r.is_empty() {
        let lead = mul_mod(*r.last().unwrap(), inv, p);
        let shift = r.len() - 1 - db;
        q[shift] = lead;
        for (i, &c) in b.iter().enumerate() {
            let sub = mul_mod(lead, c, p);
            r[shift + i] = (r[shift + i] + p - sub) % p;
        }
        trim(&mut r);
    }
    trim(&mut q);
    q
}

fn poly_sub_x(a: &Fp, p: u64) -> Fp {
    let mut r = a.clone();
    if r.len() < 2 {
        r.resize(2, 0);
    }
    r[1] = (r[1] + p - 1) % p;
    trim(&mut r);
    r
}

/// Degrees of the irreducible factors of `f mod p`, with multiplicity and in
/// ascending order, by distinct-degree factorization.
pub fn poly_factor_degrees(coeffs: &[i64], p: u64) -> Vec<usize> {
    let mut f = reduce_mod_p(coeffs, p);
    assert!(
        f.len() == coeffs.len(),
        "leading coefficient must be a unit mod p"
    );
    make_monic(&mut f, p);
    let mut degrees = Vec::new();
    let x: Fp = vec![0, 1];
    let mut h = poly_rem(&x, &f, p);
    let mut d = 1;
    while f.len() > 1 && 2 * d <= f.len() - 1 {
        h = poly_powmod(&h, p, &f, p);
        let mut g = poly_gcd(&poly_sub_x(&h, p), &f, p);
        while g.len() > 1 {
            let k = (g.len() - 1) / d;
            degrees.extend(std::iter::repeat_n(d, k));
            f = poly_divexact(&f, &g, p);
            g = poly_gcd(&g, &f, p);
        }
        h = poly_rem(&h, &f, p);
        d += 1;
    }
    if f.len() > 1 {
        degrees.push(f.len() - 1);
    }
    degrees.sort_unstable();
    degrees
}

/// `|(Z/D)^*|` divided by the coset size; the index of `H^0`.
pub fn coset_index(modulus: u64, class: &ClassSpec) -> u64 {
    euler_phi(modulus) / class.coset.len().max(1) as u64
}

/// Smallest positive residue of `n` mod `m` as a `u64`, for signed inputs.
pub fn residue(n: i64, m: u64) -> u64 {
    arith::rem_euclid(n as i128, m)
}

#[allow(dead_code)]
fn to_u64(x: &BigInt) -> Option<u64> {
    if x.is_negative() {
        None
    } else {
        x.to_u64()
    }
}
