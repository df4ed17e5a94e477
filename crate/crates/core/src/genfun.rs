//! Generating functions over primes in a Chebotarev class (`G`) and over
//! prime-power ideals of a field (`F`), with their sieved approximants
//! `G♯`, `F♯` and the differences `G♭ = G - G♯`, `F♭ = F - F♯`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{self, euler_phi};
use crate::error::{Error, Result};
use crate::expsum::{best_approx, kronecker, DirichletCharacter, IdealCharacter, QuadraticField};
use crate::galois::GaloisSpec;
use crate::phase::{e_of, Alpha, ComplexSum};
use crate::sieve::{self, PrimeTable, SieveParams};

/// Largest denominator for which rational phases come from a lookup table.
const PHASE_TABLE_MAX: u64 = 1 << 16;

/// `Σ w·e(αn)` over sparse `(n, w)` terms, each phase reduced exactly.
pub fn sparse_exp_sum(terms: &[(u64, f64)], alpha: Alpha) -> Complex64 {
    let mut acc = ComplexSum::default();
    match alpha {
        Alpha::Rational { num, den } if den <= PHASE_TABLE_MAX => {
            let table: Vec<Complex64> = (0..den)
                .map(|r| {
                    let s = if 2 * r >= den { r as f64 - den as f64 } else { r as f64 };
                    e_of(s / den as f64)
                })
                .collect();
            let a = num.rem_euclid(den as i64) as u64;
            for &(n, w) in terms {
                acc.add(table[arith::mul_mod(a, n % den, den) as usize] * w);
            }
        }
        _ => {
            for &(n, w) in terms {
                acc.add(alpha.e_at(n as i128) * w);
            }
        }
    }
    acc.value()
}

/// Context for `G_{K,C,X}` and its sieved approximant.
#[derive(Clone, Debug)]
pub struct GenfunContext {
    pub spec: GaloisSpec,
    pub class_label: String,
    pub x: u64,
    pub params: SieveParams,
    /// `(p, log p)` for primes `p ≤ X` of the class.
    prime_terms: Vec<(u64, f64)>,
    /// `(n, (|C|/|G|)·Λ_{K,C}(n)·Λ_z(n))` on the support.
    sharp_terms: Vec<(u64, f64)>,
}

impl GenfunContext {
    pub fn new(
        table: &PrimeTable,
        spec: &GaloisSpec,
        class_label: &str,
        x: u64,
        params: SieveParams,
    ) -> Result<GenfunContext> {
        let class = spec
            .class(class_label)
            .ok_or_else(|| Error::Validation(format!("unknown class {class_label:?}")))?;
        let w = sieve::weighted_prime_array(table, spec, class, x)?;
        let prime_terms = w
            .support()
            .into_iter()
            .map(|p| (p, w.weights[p as usize]))
            .collect();
        let (dn, dd) = spec.density(class);
        let density = dn as f64 / dd as f64;
        let sieved = sieve::sieved_weight_array(table, spec, class, params.z, x)?;
        let sharp_terms = sieved
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v != 0.0)
            .map(|(n, &v)| (n as u64, density * v))
            .collect();
        Ok(GenfunContext {
            spec: spec.clone(),
            class_label: class_label.to_string(),
            x,
            params,
            prime_terms,
            sharp_terms,
        })
    }

    pub fn prime_terms(&self) -> &[(u64, f64)] {
        &self.prime_terms
    }

    pub fn eval_g(&self, alpha: Alpha) -> Complex64 {
        sparse_exp_sum(&self.prime_terms, alpha)
    }

    pub fn eval_g_sharp(&self, alpha: Alpha) -> Complex64 {
        sparse_exp_sum(&self.sharp_terms, alpha)
    }

    pub fn eval_g_flat(&self, alpha: Alpha) -> Complex64 {
        self.eval_g(alpha) - self.eval_g_sharp(alpha)
    }

    /// One row per α, computed in parallel and returned in input order.
    pub fn minor_arc_scan(&self, alphas: &[Alpha]) -> Result<Vec<MinorArcRow>> {
        alphas
            .par_iter()
            .map(|&alpha| {
                let g = self.eval_g(alpha);
                let gs = self.eval_g_sharp(alpha);
                let q = best_approx(alpha, self.x.max(1))?.q;
                let flat = (g - gs).norm();
                Ok(MinorArcRow {
                    alpha: alpha.to_string(),
                    q_of_alpha: q,
                    g_re: g.re,
                    g_im: g.im,
                    gsharp_re: gs.re,
                    gsharp_im: gs.im,
                    gflat_abs: flat,
                    x: self.x,
                    z: self.params.z,
                    gflat_over_x: if self.x == 0 { 0.0 } else { flat / self.x as f64 },
                })
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinorArcRow {
    pub alpha: String,
    pub q_of_alpha: u64,
    #[serde(rename = "G_re")]
    pub g_re: f64,
    #[serde(rename = "G_im")]
    pub g_im: f64,
    #[serde(rename = "Gsharp_re")]
    pub gsharp_re: f64,
    #[serde(rename = "Gsharp_im")]
    pub gsharp_im: f64,
    #[serde(rename = "Gflat_abs")]
    pub gflat_abs: f64,
    #[serde(rename = "X")]
    pub x: u64,
    pub z: f64,
    #[serde(skip)]
    pub gflat_over_x: f64,
}

impl MinorArcRow {
    pub const CSV_HEADER: &'static str = "alpha,q_of_alpha,G_re,G_im,Gsharp_re,Gsharp_im,Gflat_abs,X,z";

    pub fn csv(&self) -> String {
        format!(
            "{},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{},{:.6}",
            self.alpha,
            self.q_of_alpha,
            self.g_re,
            self.g_im,
            self.gsharp_re,
            self.gsharp_im,
            self.gflat_abs,
            self.x,
            self.z
        )
    }
}

// ---------------------------------------------------------------------------
// F over Q and quadratic fields

/// The field `L` of `F_{L,ξ,X}`.
#[derive(Clone, Debug)]
pub enum NormField {
    Rationals,
    Quadratic(QuadraticField),
}

impl NormField {
    /// Dirichlet character cutting out `L`; `None` for `Q`.
    fn chi_d(&self, p: u64) -> i8 {
        match self {
            NormField::Rationals => 1,
            NormField::Quadratic(f) => f.chi(p),
        }
    }

    /// `Λ_{L/Q}(n)`: `φ(|d|)/|H_L|` on the norm subgroup, 1 for `Q`.
    pub fn lambda_l(&self, n: u64) -> f64 {
        match self {
            NormField::Rationals => 1.0,
            NormField::Quadratic(f) => {
                if f.chi(n) == 1 {
                    2.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// A prime-power ideal: its norm and `Λ_L = log N(𝔭)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FTerm {
    pub norm: u64,
    pub weight: f64,
}

/// One entry per prime-power ideal of norm `≤ X`, derived from the
/// splitting type of each rational prime.
pub fn f_terms(table: &PrimeTable, field: &NormField, x: u64) -> Result<Vec<FTerm>> {
    if x > table.limit() {
        return Err(Error::ResourceLimit(format!(
            "X = {x} exceeds the prime table limit {}",
            table.limit()
        )));
    }
    let mut out = Vec::new();
    for &p in table.primes_up_to(x) {
        let p = p as u64;
        let (norm_p, copies) = match field.chi_d(p) {
            1 => (p, if matches!(field, NormField::Rationals) { 1 } else { 2 }),
            0 => (p, 1),
            _ => match p.checked_mul(p) {
                Some(pp) => (pp, 1),
                None => continue,
            },
        };
        let weight = (norm_p as f64).ln();
        let mut m = norm_p;
        while m <= x {
            for _ in 0..copies {
                out.push(FTerm { norm: m, weight });
            }
            match m.checked_mul(norm_p) {
                Some(v) => m = v,
                None => break,
            }
        }
    }
    out.sort_by(|a, b| a.norm.cmp(&b.norm));
    Ok(out)
}

/// Terms of `F` with `ξ` folded into complex weights.
#[derive(Clone, Debug)]
pub struct FContext {
    pub field: NormField,
    pub x: u64,
    pub z: f64,
    terms: Vec<(u64, Complex64)>,
    /// `None` when `ξ` is not norm-composed, so `F♯ = 0`.
    sharp: Option<Vec<(u64, Complex64)>>,
}

fn complex_sum(terms: &[(u64, Complex64)], alpha: Alpha) -> Complex64 {
    let mut acc = ComplexSum::default();
    for &(n, w) in terms {
        acc.add(alpha.e_at(n as i128) * w);
    }
    acc.value()
}

impl FContext {
    pub fn new(table: &PrimeTable, field: NormField, xi: &IdealCharacter, x: u64, z: f64) -> Result<FContext> {
        xi.check_supported()?;
        let terms = f_terms(table, &field, x)?
            .into_iter()
            .map(|t| Ok((t.norm, xi.on_norm(t.norm)? * t.weight)))
            .collect::<Result<Vec<_>>>()?;
        let sharp = match xi {
            IdealCharacter::Other(_) => None,
            _ => {
                let cz = sieve::c_of_z_f64(z);
                let zi = if z >= 2.0 { z.floor() as u64 } else { 1 };
                let mut v = Vec::new();
                for n in 1..=x {
                    if n > 1 && (table.spf(n) as u64) <= zi {
                        continue;
                    }
                    let l = field.lambda_l(n);
                    if l == 0.0 {
                        continue;
                    }
                    let c = xi.on_norm(n)?;
                    if c.norm() == 0.0 {
                        continue;
                    }
                    v.push((n, c * (l * cz)));
                }
                Some(v)
            }
        };
        Ok(FContext {
            field,
            x,
            z,
            terms,
            sharp,
        })
    }

    pub fn eval_f(&self, alpha: Alpha) -> Complex64 {
        complex_sum(&self.terms, alpha)
    }

    pub fn eval_f_sharp(&self, alpha: Alpha) -> Complex64 {
        match &self.sharp {
            Some(t) => complex_sum(t, alpha),
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn eval_f_flat(&self, alpha: Alpha) -> Complex64 {
        self.eval_f(alpha) - self.eval_f_sharp(alpha)
    }
}

/// `F_{L,ξ,X}(α)`.
pub fn eval_f(table: &PrimeTable, field: &NormField, xi: &IdealCharacter, x: u64, alpha: Alpha) -> Result<Complex64> {
    Ok(FContext::new(table, field.clone(), xi, x, 0.0)?.eval_f(alpha))
}

/// `F♯_{L,ξ,X,z}(α)`; zero when `ξ` is not norm-composed.
pub fn eval_f_sharp(
    table: &PrimeTable,
    field: &NormField,
    xi: &IdealCharacter,
    x: u64,
    z: f64,
    alpha: Alpha,
) -> Result<Complex64> {
    if let IdealCharacter::Other(_) = xi {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(FContext::new(table, field.clone(), xi, x, z)?.eval_f_sharp(alpha))
}

/// `F(0)/Y` and the value `r ∈ {0, 1}` it should approach.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FZeroRatio {
    pub y: u64,
    pub ratio: f64,
    pub r: u8,
}

/// `r = 1` exactly when `ξ` is trivial on all prime ideals away from a
/// finite set, which for `χ ∘ N` depends only on residues mod
/// `lcm(|d|, q)` (each class contains primes).
pub fn expected_r(field: &NormField, xi: &IdealCharacter) -> Result<u8> {
    let chi = match xi {
        IdealCharacter::Trivial => return Ok(1),
        IdealCharacter::NormComposed(c) => c,
        IdealCharacter::Other(s) => return Err(Error::UnsupportedCharacter(s.clone())),
    };
    let d = match field {
        NormField::Rationals => 1u64,
        NormField::Quadratic(f) => f.d.unsigned_abs(),
    };
    let m = arith::lcm(d, chi.modulus);
    let one = Complex64::new(1.0, 0.0);
    for r in arith::units(m) {
        let norm_value = match field.chi_d(r) {
            1 => chi.value(r),
            _ => chi.value(arith::mul_mod(r, r, m.max(1))),
        };
        if (norm_value - one).norm() > 1e-9 {
            return Ok(0);
        }
    }
    Ok(1)
}

pub fn f_at_zero_ratio(table: &PrimeTable, field: &NormField, xi: &IdealCharacter, y: u64) -> Result<FZeroRatio> {
    let r = expected_r(field, xi)?;
    if y < 2 {
        return Ok(FZeroRatio { y, ratio: 0.0, r });
    }
    let f = eval_f(table, field, xi, y, Alpha::Real(0.0))?;
    Ok(FZeroRatio {
        y,
        ratio: f.re / y as f64,
        r,
    })
}

// ---------------------------------------------------------------------------
// the character decomposition of G

/// The two ways `G_{K,C}` is expressed through `F`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Instantiation {
    /// Identity class of a quadratic abelian `K`: `L = K`, trivial `χ`.
    QuadraticIdentity,
    /// Any abelian `K` and class: `L = Q`, Dirichlet characters mod `D_K`
    /// trivial on `H^0`.
    AbelianOverQ,
}

/// The Dirichlet characters mod `D_K` that factor through `Gal(K/Q)`, i.e.
/// are trivial on the identity coset.
pub fn galois_characters(spec: &GaloisSpec) -> Result<Vec<DirichletCharacter>> {
    let GaloisSpec::Abelian(a) = spec else {
        return Err(Error::UnsupportedInstantiation("spec is not abelian".into()));
    };
    let m = a.modulus;
    let ident = a
        .classes
        .iter()
        .find(|c| c.contains_residue(1 % m))
        .ok_or_else(|| Error::UnsupportedInstantiation("no identity class".into()))?;
    let one = Complex64::new(1.0, 0.0);
    Ok(DirichletCharacter::all(m)
        .into_iter()
        .filter(|chi| ident.coset.iter().all(|&h| (chi.value(h) - one).norm() < 1e-9))
        .collect())
}

/// The quadratic field `K` of a two-class abelian spec: `d = ±D_K` with
/// `χ_d` trivial on the identity coset.
pub fn quadratic_field_of(spec: &GaloisSpec) -> Result<QuadraticField> {
    let GaloisSpec::Abelian(a) = spec else {
        return Err(Error::UnsupportedInstantiation("spec is not abelian".into()));
    };
    if a.classes.len() != 2 {
        return Err(Error::UnsupportedInstantiation("K is not quadratic".into()));
    }
    let m = a.modulus;
    let ident = a
        .classes
        .iter()
        .find(|c| c.contains_residue(1 % m))
        .ok_or_else(|| Error::UnsupportedInstantiation("no identity class".into()))?;
    for d in [-(m as i64), m as i64] {
        if QuadraticField::new(d).is_ok() && ident.coset.iter().all(|&h| kronecker(d, h) == 1) {
            return QuadraticField::new(d);
        }
    }
    Err(Error::UnsupportedInstantiation(format!(
        "no quadratic field of discriminant ±{m} matches the identity coset"
    )))
}

/// Precomputed right-hand side of the decomposition for one `(K, C, X)`.
#[derive(Clone, Debug)]
pub struct RelationContext {
    pub g: GenfunContext,
    /// `(|C|/|G|) Σ_χ χ̄(c) F_{L,χ}` as a single list of weighted norms.
    rhs_terms: Vec<(u64, Complex64)>,
}

impl RelationContext {
    pub fn new(table: &PrimeTable, spec: &GaloisSpec, class_label: &str, x: u64, inst: Instantiation) -> Result<Self> {
        let class = spec
            .class(class_label)
            .ok_or_else(|| Error::Validation(format!("unknown class {class_label:?}")))?;
        let g = GenfunContext::new(table, spec, class_label, x, SieveParams::with_z(0.0))?;
        let (dn, dd) = spec.density(class);
        let density = dn as f64 / dd as f64;
        let rhs_terms = match inst {
            Instantiation::QuadraticIdentity => {
                let field = quadratic_field_of(spec)?;
                if !class.contains_residue(1 % spec.modulus()) {
                    return Err(Error::UnsupportedInstantiation(
                        "quadratic instantiation needs the identity class".into(),
                    ));
                }
                f_terms(table, &NormField::Quadratic(field), x)?
                    .into_iter()
                    .map(|t| (t.norm, Complex64::new(density * t.weight, 0.0)))
                    .collect()
            }
            Instantiation::AbelianOverQ => {
                let chars = galois_characters(spec)?;
                let c = class.coset[0];
                let base = f_terms(table, &NormField::Rationals, x)?;
                base.into_iter()
                    .map(|t| {
                        let s: Complex64 = chars.iter().map(|chi| chi.value(c).conj() * chi.value(t.norm)).sum();
                        (t.norm, s * (density * t.weight))
                    })
                    .collect()
            }
        };
        Ok(RelationContext { g, rhs_terms })
    }

    pub fn rhs(&self, alpha: Alpha) -> Complex64 {
        complex_sum(&self.rhs_terms, alpha)
    }

    /// `|G(α) - (|C|/|G|) Σ_χ χ̄(c) F_{L,χ}(α)|`.
    pub fn residual(&self, alpha: Alpha) -> f64 {
        if self.g.x < 2 {
            return 0.0;
        }
        (self.g.eval_g(alpha) - self.rhs(alpha)).norm()
    }
}

pub fn gf_relation_residual(
    table: &PrimeTable,
    spec: &GaloisSpec,
    class_label: &str,
    x: u64,
    inst: Instantiation,
    alpha: Alpha,
) -> Result<f64> {
    if matches!(spec, GaloisSpec::Polynomial(_)) {
        return Err(Error::UnsupportedInstantiation(
            "only abelian fields are decomposed into Dirichlet characters".into(),
        ));
    }
    Ok(RelationContext::new(table, spec, class_label, x, inst)?.residual(alpha))
}

/// `|C|/|G|` times `φ(D_K)/|H|`, the mean of the `G♯` weights on `n ≤ X`.
pub fn sharp_weight_scale(spec: &GaloisSpec, class_label: &str) -> Option<f64> {
    let c = spec.class(class_label)?;
    let (dn, dd) = spec.density(c);
    Some(dn as f64 / dd as f64 * euler_phi(spec.modulus()) as f64 / c.coset.len() as f64)
}
