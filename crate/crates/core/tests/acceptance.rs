//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails that is not listed in `KNOWN_FAILING`.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;

use chebotarev::arith::units;
use chebotarev::circle::{
    bad_fraction, brute_force_all, representation_counts, summarize, verify_with_counts,
};
use chebotarev::ecapp::{check_certificate, construct_curve};
use chebotarev::expsum::{weyl_sum, DirichletCharacter, IdealCharacter, QuadraticField};
use chebotarev::galois::GaloisSpec;
use chebotarev::genfun::{f_at_zero_ratio, GenfunContext, Instantiation, NormField, RelationContext};
use chebotarev::instance::{FieldClass, ProblemInstance};
use chebotarev::phase::Alpha;
use chebotarev::sieve::{smooth_count, PrimeTable, SieveParams};
use chebotarev::singular::{c_d, c_d_exhaustive, c_p, c_p_exhaustive};

/// Criteria whose target is unreachable as stated; they are evaluated in
/// full and reported, but do not fail the run.
const KNOWN_FAILING: &[(u32, &str)] = &[
    (
        6,
        "chi_-4 composed with the norm is 1 on every unramified prime ideal of Q(i), so F(0)/Y tends to 1, not 0",
    ),
    (
        7,
        "with B = 4 the sieve level log^4 X exceeds sqrt X for every X <= 1e6 (and X itself at 1e4), so G_sharp \
         misses the mass of G at alpha = 0 and 1/2; with A = 1 the bound only keeps |G_flat| log X / X bounded",
    ),
];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

// 1
fn oracle_equivalence(table: &PrimeTable) -> Outcome {
    let start = Instant::now();
    let fields = ["trivial", "gaussian-e", "gaussian-c", "s3-cbrt2-1", "s3-cbrt2-2", "s3-cbrt2-3"];
    let mut rng = ChaCha8Rng::seed_from_u64(0xc1);
    let mut checked = 0usize;
    let mut worst_rel = 0.0f64;
    let mut failures = Vec::new();
    let mut made = 0;
    while made < 10 {
        let k = rng.gen_range(2..=3usize);
        let a: Vec<i64> = (0..k)
            .map(|_| rng.gen_range(1..=3i64) * if rng.gen_bool(0.5) { -1 } else { 1 })
            .collect();
        let fc: Vec<FieldClass> = (0..k)
            .map(|_| FieldClass::builtin(fields[rng.gen_range(0..fields.len())]).unwrap())
            .collect();
        let x = rng.gen_range(50..=500u64);
        let Ok(inst) = ProblemInstance::new(fc, a, x, vec![]) else {
            continue; // common divisor, redraw
        };
        made += 1;
        let fast = representation_counts(table, &inst).unwrap();
        let slow = brute_force_all(table, &inst).unwrap();
        let (lo, hi) = inst.n_bounds();
        for n in lo..=hi {
            let (fw, fu) = fast.get(n);
            let (sw, su) = slow.get(n);
            checked += 1;
            let rel = if sw == 0.0 { fw.abs() } else { (fw - sw).abs() / sw.abs() };
            worst_rel = worst_rel.max(rel);
            if fu != su || rel > 1e-6 {
                failures.push(format!("a={:?} X={} N={n}", inst.a, inst.x));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures.is_empty() && secs < 60.0,
        format!(
            "10 instances, {checked} N values, max weighted rel err {worst_rel:.1e}, {} mismatches, {secs:.1}s",
            failures.len()
        ),
    )
}

// 2
fn classical_vinogradov(table: &PrimeTable) -> Outcome {
    let start = Instant::now();
    let inst = ProblemInstance::builtin("classical-vinogradov").unwrap();
    let counts = representation_counts(table, &inst).unwrap();
    let rows = verify_with_counts(&counts, &inst, &inst.n_values, 10_000).unwrap();
    let s = summarize(&rows);
    let secs = start.elapsed().as_secs_f64();
    let med = s.median_abs_dev.unwrap_or(f64::INFINITY);
    let p90 = s.p90_abs_dev.unwrap_or(f64::INFINITY);
    outcome(
        rows.len() == 50 && rows.iter().all(|r| r.n % 2 == 1) && med <= 0.05 && p90 <= 0.15 && secs < 600.0,
        format!("{} odd N, median |ratio-1| = {med:.4} (<= 0.05), p90 = {p90:.4} (<= 0.15), {secs:.1}s", rows.len()),
    )
}

// 3
fn gaussian_vinogradov(table: &PrimeTable) -> Outcome {
    let inst = ProblemInstance::builtin("gaussian-vinogradov").unwrap();
    let counts = representation_counts(table, &inst).unwrap();
    let (lo, hi) = inst.n_bounds();
    let stray = (lo..=hi).filter(|n| n.rem_euclid(4) != 3 && counts.get(*n).1 != 0).count();
    let rows = verify_with_counts(&counts, &inst, &inst.n_values, 10_000).unwrap();
    let s = summarize(&rows);
    let med = s.median_abs_dev.unwrap_or(f64::INFINITY);
    outcome(
        stray == 0 && rows.len() == 30 && rows.iter().all(|r| r.n % 4 == 3) && med <= 0.10,
        format!("{stray} nonzero S(N) off 3 mod 4; {} N = 3 mod 4, median |ratio-1| = {med:.4} (<= 0.10)", rows.len()),
    )
}

// 4
fn local_factor_exactness() -> Outcome {
    let start = Instant::now();
    let coeff_sets: Vec<Vec<i64>> = vec![
        vec![1, 1],
        vec![1, -1],
        vec![2, -3],
        vec![1, 1, 1],
        vec![1, -2, 3],
        vec![3, 3, -2],
        vec![1, 1, 1, 1],
        vec![1, -1, 2, -3],
    ];
    let mut cases = 0usize;
    let mut bad = Vec::new();
    for d in 1..=12u64 {
        let u = units(d);
        let mut sets: Vec<Vec<u64>> = vec![u.clone()];
        sets.extend(u.iter().map(|&x| vec![x]));
        if u.len() >= 2 {
            sets.push(u[..2].to_vec());
            sets.push(u[u.len() / 2..].to_vec());
        }
        for a in &coeff_sets {
            for si in 0..sets.len() {
                let cosets: Vec<Vec<u64>> = (0..a.len()).map(|i| sets[(si + i) % sets.len()].clone()).collect();
                for n in 0..d as i64 {
                    cases += 1;
                    if c_d(&cosets, a, n, d) != c_d_exhaustive(&cosets, a, n, d) {
                        bad.push(format!("C_D D={d} a={a:?} N={n}"));
                    }
                }
            }
        }
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
        let mut sets = coeff_sets.clone();
        let pi = p as i64;
        sets.push(vec![pi, 1, 1]);
        sets.push(vec![1, -pi, 2 * pi, 1]);
        for a in &sets {
            for n in 0..p as i64 {
                cases += 1;
                if c_p(p, a, n) != c_p_exhaustive(p, a, n) {
                    bad.push(format!("C_p p={p} a={a:?} N={n}"));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        bad.is_empty() && secs < 10.0,
        format!("{cases} exact comparisons, {} mismatches {:?}, {secs:.2}s", bad.len(), bad.iter().take(3).collect::<Vec<_>>()),
    )
}

// 5
fn relation_residual_growth(table: &PrimeTable) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc5);
    let alphas: Vec<Alpha> = (0..64).map(|_| Alpha::real(rng.gen::<f64>()).unwrap()).collect();
    let spec = GaloisSpec::gaussian();
    let limit = 10f64.sqrt() * 3.0;
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, inst) in [
        ("quadratic", Instantiation::QuadraticIdentity),
        ("over-Q", Instantiation::AbelianOverQ),
    ] {
        let med = |x: u64| {
            let ctx = RelationContext::new(table, &spec, "e", x, inst).unwrap();
            median(alphas.par_iter().map(|&a| ctx.residual(a)).collect())
        };
        let (m4, m5) = (med(10_000), med(100_000));
        let growth = m5 / m4;
        pass &= growth <= limit;
        parts.push(format!("{name}: {m4:.1} -> {m5:.1}, growth {growth:.2}"));
    }
    outcome(pass, format!("{} (<= {limit:.2})", parts.join("; ")))
}

// 6
fn f_at_zero(table: &PrimeTable) -> Outcome {
    let y = 1_000_000;
    let field = NormField::Quadratic(QuadraticField::gaussian());
    let triv = f_at_zero_ratio(table, &field, &IdealCharacter::Trivial, y).unwrap();
    let chi4 = IdealCharacter::NormComposed(DirichletCharacter::kronecker(-4));
    let twisted = f_at_zero_ratio(table, &field, &chi4, y).unwrap();
    let chi3 = IdealCharacter::NormComposed(DirichletCharacter::kronecker(-3));
    let other = f_at_zero_ratio(table, &field, &chi3, y).unwrap();
    let a_ok = (0.98..=1.02).contains(&triv.ratio);
    let b_ok = twisted.ratio.abs() <= 0.02;
    outcome(
        a_ok && b_ok,
        format!(
            "trivial: F(0)/Y = {:.4} in [0.98, 1.02]; chi_-4 o N: |F(0)|/Y = {:.4} (<= 0.02, r = {}); \
             for reference chi_-3 o N gives {:.4} (r = {})",
            triv.ratio,
            twisted.ratio.abs(),
            twisted.r,
            other.ratio.abs(),
            other.r
        ),
    )
}

fn decay_grid() -> Vec<Alpha> {
    let mut g: Vec<Alpha> = [
        (0, 1),
        (1, 2),
        (1, 3),
        (2, 3),
        (1, 4),
        (3, 4),
        (1, 5),
        (2, 5),
        (1, 6),
        (1, 7),
        (1, 8),
        (1, 10),
        (1, 12),
        (1, 13),
        (1, 17),
        (1, 20),
    ]
    .iter()
    .map(|&(a, q)| Alpha::rational(a, q).unwrap())
    .collect();
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    g.extend((1..=100).map(|j| Alpha::real((j as f64 * phi).fract()).unwrap()));
    g
}

// 7
fn flat_decay(table: &PrimeTable) -> Outcome {
    let grid = decay_grid();
    assert_eq!(grid.len(), 116);
    // (max over the grid of |G_flat| log X / X, the maximizing alpha)
    let series = |spec: &GaloisSpec, b: f64| -> Vec<(f64, String)> {
        let label = spec.classes()[0].label.clone();
        [10_000u64, 100_000, 1_000_000]
            .iter()
            .map(|&x| {
                let ctx = GenfunContext::new(table, spec, &label, x, SieveParams::new(x, 1.0, b)).unwrap();
                let (m, a) = grid
                    .par_iter()
                    .map(|&a| (ctx.eval_g_flat(a).norm(), a))
                    .reduce(|| (0.0, Alpha::Real(0.0)), |p, q| if q.0 > p.0 { q } else { p });
                (m * (x as f64).ln() / x as f64, a.to_string())
            })
            .collect()
    };
    let show = |s: &[(f64, String)]| {
        s.iter().map(|(v, a)| format!("{v:.4}@{a}")).collect::<Vec<_>>().join(" -> ")
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, spec) in [("trivial", GaloisSpec::trivial()), ("Q(i)", GaloisSpec::gaussian())] {
        let s = series(&spec, 4.0);
        pass &= s.windows(2).all(|w| w[1].0 <= w[0].0);
        parts.push(format!("{name}: {}", show(&s)));
    }
    let reference = series(&GaloisSpec::trivial(), 1.0);
    outcome(
        pass,
        format!(
            "max |G_flat| log X / X over 116 alphas, X = 1e4, 1e5, 1e6, B = 4; {}; for reference trivial with B = 1: {}",
            parts.join("; "),
            show(&reference)
        ),
    )
}

// 8
fn gauss_sums() -> Outcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for q in [5u64, 13, 17, 29] {
        for a in 1..q as i64 {
            let s = weyl_sum(&[0, 0, 1], Alpha::rational(a, q).unwrap(), q).unwrap();
            worst = worst.max((s.norm() - (q as f64).sqrt()).abs());
            cases += 1;
        }
    }
    outcome(worst <= 1e-9, format!("{cases} sums, max ||S| - sqrt q| = {worst:.1e} (<= 1e-9)"))
}

// 9
fn smooth_numbers(table: &PrimeTable) -> Outcome {
    // Oracle: factor every n <= 10^6 with the smallest-prime-factor table.
    let y_max = 1_000_000u64;
    let mut largest = vec![0u64; y_max as usize + 1];
    let mut squarefree = vec![true; y_max as usize + 1];
    for n in 2..=y_max {
        let f = table.factorize(n);
        largest[n as usize] = f.iter().map(|&(p, _)| p).max().unwrap();
        squarefree[n as usize] = f.iter().all(|&(_, e)| e == 1);
    }
    let zs = [1.0, 2.0, 2.5, 3.0, 5.0, 7.0, 10.0, 13.0, 19.9, 23.0, 29.0, 30.0];
    let ys = [1u64, 10, 100, 1_000, 12_345, 100_000, 1_000_000];
    let mut mismatches = 0;
    for &z in &zs {
        for &y in &ys {
            let expected = 1 + (2..=y)
                .filter(|&n| squarefree[n as usize] && largest[n as usize] as f64 <= z)
                .count() as u64;
            if smooth_count(z, y as f64) != expected {
                mismatches += 1;
            }
        }
    }

    let x = 1e6f64;
    let mut fits = Vec::new();
    for b in [2.0f64, 3.0] {
        let z = x.ln().powf(b);
        let worst = [1e3, 1e4, 1e5, 1e6]
            .iter()
            .map(|&y| smooth_count(z, y) as f64 / y.powf(1.0 - 1.0 / (2.0 * b)))
            .fold(0.0f64, f64::max);
        fits.push(worst.ln().max(0.0) / x.ln().sqrt());
    }
    let pass = mismatches == 0 && fits.iter().all(|&c| c < 3.0);
    outcome(
        pass,
        format!(
            "{} (z, Y) pairs, {mismatches} mismatches; fitted c for B = 2, 3: {:.3}, {:.3} (< 3)",
            zs.len() * ys.len(),
            fits[0],
            fits[1]
        ),
    )
}

// 10
fn parseval(table: &PrimeTable) -> Outcome {
    let x = 1000u64;
    let inst = ProblemInstance::uniform("trivial", vec![1, 1, 1], x, vec![]).unwrap();
    let s = representation_counts(table, &inst).unwrap();
    let sum_sq: f64 = s.weighted.iter().map(|v| v * v).sum();
    // |H|² = |G|⁶ on an M-point grid, with G from the primes directly.
    let m = 4096usize;
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for &p in table.primes_up_to(x) {
        buf[p as usize].re = (p as f64).ln();
    }
    FftPlanner::<f64>::new().plan_fft_forward(m).process(&mut buf);
    let quad = buf.iter().map(|g| g.norm_sqr().powi(3)).sum::<f64>() / m as f64;
    let rel = (quad / sum_sq - 1.0).abs();
    outcome(rel <= 0.005, format!("sum S^2 = {sum_sq:.6e}, grid = {quad:.6e}, rel diff {rel:.1e} (<= 5e-3)"))
}

fn integer_prime_divisors_are(disc: &str, allowed: &[u64]) -> bool {
    let Ok(mut v) = disc.trim_start_matches('-').parse::<num_bigint::BigUint>() else {
        return false;
    };
    for &p in allowed {
        let p = num_bigint::BigUint::from(p);
        let mut seen = false;
        while &v % &p == num_bigint::BigUint::from(0u8) {
            v /= &p;
            seen = true;
        }
        if !seen {
            return false;
        }
    }
    v == num_bigint::BigUint::from(1u8)
}

// 11
fn ec_certificates() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, spec) in [("Q", GaloisSpec::trivial()), ("Q(i)", GaloisSpec::gaussian())] {
        match construct_curve(&spec, 1_000_000) {
            Ok(cert) => {
                let check = check_certificate(&cert, &spec);
                let factored = integer_prime_divisors_are(&cert.discriminant, &[cert.p, cert.q, cert.r]);
                pass &= check.valid && factored;
                parts.push(format!(
                    "{name}: p={} q={} r={} valid={} disc primes = {{p,q,r}}: {factored}",
                    cert.p, cert.q, cert.r, check.valid
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{name}: {e}"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(pass && secs < 60.0, format!("{}; {secs:.2}s", parts.join("; ")))
}

// 12
fn k2_average(table: &PrimeTable) -> Outcome {
    let frac = |x: u64| {
        let ns: Vec<i64> = (2..=x as i64).collect();
        let inst = ProblemInstance::uniform("trivial", vec![1, -1], x, ns.clone()).unwrap();
        let counts = representation_counts(table, &inst).unwrap();
        bad_fraction(&verify_with_counts(&counts, &inst, &ns, 10_000).unwrap())
    };
    let (f4, f5) = (frac(10_000), frac(100_000));
    outcome(f5 < f4, format!("bad fraction {f4:.4} at X = 1e4 -> {f5:.4} at X = 1e5"))
}

fn main() {
    let table = PrimeTable::new(1_000_000).expect("prime table");
    type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;
    let checks: Vec<(u32, &str, Check)> = vec![
        (1, "oracle equivalence", Box::new(|| oracle_equivalence(&table))),
        (2, "classical Vinogradov", Box::new(|| classical_vinogradov(&table))),
        (3, "Q(i) identity-class ternary", Box::new(|| gaussian_vinogradov(&table))),
        (4, "local factor exactness", Box::new(local_factor_exactness)),
        (5, "G/F relation residual growth", Box::new(|| relation_residual_growth(&table))),
        (6, "F at alpha = 0", Box::new(|| f_at_zero(&table))),
        (7, "G_flat decay", Box::new(|| flat_decay(&table))),
        (8, "Gauss sums", Box::new(gauss_sums)),
        (9, "smooth numbers", Box::new(|| smooth_numbers(&table))),
        (10, "Parseval", Box::new(|| parseval(&table))),
        (11, "elliptic-curve certificates", Box::new(ec_certificates)),
        (12, "k = 2 average", Box::new(|| k2_average(&table))),
    ];

    let mut unexpected = 0;
    for (id, name, check) in checks {
        let start = Instant::now();
        let o = check();
        let known = KNOWN_FAILING.iter().find(|(k, _)| *k == id);
        let tag = match (o.pass, known) {
            (true, _) => "PASS",
            (false, Some(_)) => "FAIL (known)",
            (false, None) => {
                unexpected += 1;
                "FAIL"
            }
        };
        println!(
            "criterion {id:>2} {tag}: {name}: {} [{:.1}s]",
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if let (false, Some((_, why))) = (o.pass, known) {
            println!("             note: {why}");
        }
    }
    if unexpected > 0 {
        eprintln!("{unexpected} acceptance criteria failed");
        std::process::exit(1);
    }
}
