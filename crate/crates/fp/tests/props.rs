//! Property tests for the scalar float layer.

use proptest::prelude::*;
use tcvar_fp::sample::{enumerate_all, sample_fpnum};
use tcvar_fp::{
    decode, encode, fp_compare, fp_iter_add, fp_iter_mul, fp_mul, round_p, FpNum, Precision,
};

use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arb_fpnum(p: u32) -> impl Strategy<Value = FpNum> {
    let prec = Precision::new(p).unwrap();
    (any::<u64>(), any::<u64>()).prop_map(move |(a, b)| {
        let mut rng = ChaCha8Rng::seed_from_u64(a ^ b.rotate_left(17));
        sample_fpnum(&mut rng, prec)
    })
}

proptest! {
    #[test]
    fn iter_add_is_permutation_invariant(
        xs in proptest::collection::vec(arb_fpnum(4), 1..32),
        seed in any::<u64>(),
    ) {
        let base = fp_iter_add(&xs).unwrap();
        let mut shuffled = xs.clone();
        // Deterministic Fisher-Yates driven by the extra seed.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::Rng;
        for i in (1..shuffled.len()).rev() {
            let j = rng.gen_range(0..=i);
            shuffled.swap(i, j);
        }
        prop_assert_eq!(base, fp_iter_add(&shuffled).unwrap());
    }

    #[test]
    fn iter_mul_is_permutation_invariant(
        xs in proptest::collection::vec(arb_fpnum(4), 1..12),
    ) {
        let base = fp_iter_mul(&xs).unwrap();
        let mut rev = xs.clone();
        rev.reverse();
        prop_assert_eq!(base, fp_iter_mul(&rev).unwrap());
    }

    #[test]
    fn round_is_idempotent_on_valid_values(x in arb_fpnum(6)) {
        let r = round_p(&BigInt::from(x.significand()), x.exponent(), x.precision());
        prop_assert_eq!(r, x);
    }

    #[test]
    fn compare_matches_exact_rational_order(x in arb_fpnum(5), y in arb_fpnum(5)) {
        // Exact order via big integers at a common scale.
        let t = (1i64 << 6) + 26;
        let xv = BigInt::from(x.significand()) << (x.exponent() + t) as usize;
        let yv = BigInt::from(y.significand()) << (y.exponent() + t) as usize;
        prop_assert_eq!(fp_compare(&x, &y), xv.cmp(&yv));
    }

    #[test]
    fn mul_by_one_is_identity(x in arb_fpnum(6)) {
        let one = FpNum::one(x.precision());
        prop_assert_eq!(fp_mul(&one, &x), x);
    }

    #[test]
    fn encode_decode_round_trip_random_large_p(x in arb_fpnum(14)) {
        let enc = encode(&x);
        prop_assert_eq!(decode(enc.bits(), x.precision()).unwrap(), x);
    }
}

#[test]
fn encode_decode_round_trip_exhaustive_small_p() {
    for pb in 2..=6u32 {
        let p = Precision::new(pb).unwrap();
        for x in enumerate_all(p) {
            let enc = encode(&x);
            assert_eq!(enc.width(), 2 * pb as usize + 3);
            assert_eq!(decode(enc.bits(), p).unwrap(), x, "round trip failed at {x}");
        }
    }
}

#[test]
fn each_valid_encoding_is_unique() {
    // Canonicality: distinct values never share a bit pattern.
    let p = Precision::new(4).unwrap();
    let mut seen = std::collections::HashSet::new();
    for x in enumerate_all(p) {
        assert!(seen.insert(encode(&x).bits().to_vec()), "duplicate encoding for {x}");
    }
}
