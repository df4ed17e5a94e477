use proptest::prelude::*;

use chebotarev::circle::{
    brute_force_s, h_sharp_coefficients, representation_counts, verify_with_counts,
};
use chebotarev::galois::{FrobeniusResult, GaloisSpec};
use chebotarev::instance::{builtin_instance_names, ProblemInstance};
use chebotarev::sieve::PrimeTable;
use chebotarev::singular::{c_p, c_p_exhaustive, LocalFactors};

fn table() -> PrimeTable {
    PrimeTable::new(20_000).unwrap()
}

#[test]
fn builtin_instances_load_and_validate() {
    let names = builtin_instance_names();
    for want in ["classical-vinogradov", "gaussian-vinogradov", "twin-average"] {
        assert!(names.contains(&want));
        let inst = ProblemInstance::builtin(want).unwrap();
        inst.validate().unwrap();
        assert!(!inst.n_values.is_empty());
    }
}

#[test]
fn instance_file_forms_agree() {
    let short = r#"{"fields": ["gaussian-e", "trivial"], "a": [1, 1], "X": 100, "N": {"from": 10, "to": 20, "step": 5}}"#;
    let long = r#"{"fields": [{"builtin": "gaussian", "class": "e"}, "trivial"], "a": [1, 1], "X": 100, "N": [10, 15, 20]}"#;
    let a = ProblemInstance::from_json(short).unwrap();
    let b = ProblemInstance::from_json(long).unwrap();
    assert_eq!(a.n_values, b.n_values);
    assert_eq!(a.fields[0].spec, b.fields[0].spec);
    assert_eq!(a.modulus(), 4);
}

// The sieved main-term approximant at a sieve level well below sqrt X.
// (At z = log^4 X the support of Λ_z near X is only the primes above z.)
#[test]
fn h_sharp_tracks_main_term_at_moderate_z() {
    let t = table();
    let x = 10_000u64;
    let inst = ProblemInstance::uniform("trivial", vec![1, 1, 1], x, vec![]).unwrap();
    let lf = LocalFactors::new(&inst, 10_000).unwrap();
    let h = h_sharp_coefficients(&t, &inst, (x as f64).ln()).unwrap();
    for n in (0..20).map(|i| 9_961 + 2 * i) {
        let ratio = h.get(n).0 / lf.report(n).main_term;
        assert!((0.9..=1.1).contains(&ratio), "N={n} ratio={ratio}");
    }
}

#[test]
fn verify_rows_flag_boundary_and_unattainable() {
    let t = table();
    let inst = ProblemInstance::uniform("trivial", vec![1, 1, 1], 1000, vec![]).unwrap();
    let s = representation_counts(&t, &inst).unwrap();
    let rows = verify_with_counts(&s, &inst, &[1501, 2999, 5000], 1000).unwrap();
    assert!(rows[0].flags.is_empty(), "{:?}", rows[0].flags);
    assert!(rows[1].flags.iter().any(|f| f == "boundary"));
    assert!(rows[2].flags.iter().any(|f| f == "unattainable"));
    assert_eq!(rows[2].s_unweighted, 0);
}

fn field_name() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec!["trivial", "gaussian-e", "gaussian-c", "s3-cbrt2-2", "s3-cbrt2-3"])
}

fn coefficient() -> impl Strategy<Value = i64> {
    prop::sample::select(vec![-3i64, -2, -1, 1, 2, 3])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn counts_match_meet_in_the_middle(
        fields in prop::collection::vec(field_name(), 2..=3),
        coeffs in prop::collection::vec(coefficient(), 3),
        x in 20u64..300,
        probe in 0usize..1000,
    ) {
        let k = fields.len();
        let inst = ProblemInstance::new(
            fields.iter().map(|f| chebotarev::instance::FieldClass::builtin(f).unwrap()).collect(),
            coeffs[..k].to_vec(),
            x,
            vec![],
        );
        prop_assume!(inst.is_ok());
        let inst = inst.unwrap();
        let t = table();
        let s = representation_counts(&t, &inst).unwrap();
        let (lo, hi) = inst.n_bounds();
        let n = lo + (probe as i64).rem_euclid(hi - lo + 1);
        let (w, u) = brute_force_s(&t, &inst, n).unwrap();
        prop_assert_eq!(s.get(n).1, u);
        prop_assert!((s.get(n).0 - w).abs() <= 1e-9 * w.abs().max(1.0));
    }

    #[test]
    fn counts_are_invariant_under_permutation(
        coeffs in prop::collection::vec(coefficient(), 3),
        x in 20u64..200,
    ) {
        let inst = ProblemInstance::uniform("gaussian-e", coeffs.clone(), x, vec![]);
        prop_assume!(inst.is_ok());
        let mut rev = coeffs.clone();
        rev.reverse();
        let other = ProblemInstance::uniform("gaussian-e", rev, x, vec![]).unwrap();
        let t = table();
        let a = representation_counts(&t, &inst.unwrap()).unwrap();
        let b = representation_counts(&t, &other).unwrap();
        prop_assert_eq!(a.offset, b.offset);
        prop_assert_eq!(a.unweighted, b.unweighted);
    }

    #[test]
    fn local_factor_matches_enumeration(
        p in prop::sample::select(vec![2u64, 3, 5, 7, 11, 13]),
        coeffs in prop::collection::vec(-6i64..=6, 2..=4),
        n in -50i64..50,
    ) {
        prop_assume!(coeffs.iter().all(|&c| c != 0));
        prop_assert_eq!(c_p(p, &coeffs, n), c_p_exhaustive(p, &coeffs, n));
    }

    #[test]
    fn main_term_is_nonnegative(n in 0i64..3000) {
        let inst = ProblemInstance::uniform("s3-cbrt2-2", vec![1, 1, -1], 1000, vec![]).unwrap();
        let lf = LocalFactors::new(&inst, 1000).unwrap();
        let r = lf.report(n);
        prop_assert!(r.main_term >= 0.0);
        if r.vanishing_reason.is_some() {
            prop_assert_eq!(r.main_term, 0.0);
        } else if r.c_inf > 0.0 {
            prop_assert!(r.main_term > 0.0);
        }
    }

    #[test]
    fn gaussian_frobenius_is_residue_mod_4(p in 3u64..100_000) {
        prop_assume!(chebotarev::arith::is_prime(p));
        let spec = GaloisSpec::gaussian();
        let FrobeniusResult::Class(label) = spec.frobenius_class(p).unwrap() else {
            panic!("p = {p} should be unramified");
        };
        prop_assert_eq!(label == "e", p % 4 == 1);
    }
}
