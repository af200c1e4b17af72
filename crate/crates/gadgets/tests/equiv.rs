//! Gadget/reference bit-exact equivalence.
//!
//! Exhaustive at p = 3: every pair of the 129 valid floats through the
//! add/mul/div/compare circuits must decode to exactly the reference
//! result. Randomized at p in {4, 6, 8}. The circuit is built once per
//! (op, p, policy) and evaluated per input pair.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::cmp::Ordering;
use tcvar_fp::sample::{enumerate_all, sample_fpnum};
use tcvar_fp::{
    decode, encode, fp_add, fp_compare, fp_div_total, fp_floor, fp_mul, FpNum, Precision,
};
use tcvar_gadgets::{
    g_add, g_compare, g_div, g_floor, g_mul, DepthPolicy, GadgetBuilder,
};
use tcvar_netlist::Circuit;

fn p(v: u32) -> Precision {
    Precision::new(v).unwrap()
}

struct BinOpCircuit {
    circ: Circuit,
    p: Precision,
}

impl BinOpCircuit {
    fn build(
        pr: Precision,
        policy: DepthPolicy,
        f: impl Fn(&mut GadgetBuilder, &tcvar_gadgets::FpWires, &tcvar_gadgets::FpWires) -> Vec<tcvar_netlist::GateId>,
    ) -> Self {
        let mut circ = Circuit::new();
        let outs = {
            let mut b = GadgetBuilder::new(&mut circ, pr, policy).unwrap();
            let x = b.input_bundle();
            let y = b.input_bundle();
            f(&mut b, &x, &y)
        };
        circ.set_outputs(outs);
        BinOpCircuit { circ, p: pr }
    }

    fn run(&self, x: &FpNum, y: &FpNum) -> Vec<bool> {
        let mut bits = encode(x).bits().to_vec();
        bits.extend(encode(y).bits());
        self.circ.evaluate(&bits).unwrap()
    }

    fn run_fp(&self, x: &FpNum, y: &FpNum) -> FpNum {
        let out = self.run(x, y);
        decode(&out, self.p).expect("gadget output must be canonical")
    }
}

#[test]
fn exhaustive_p3_add_mul_div_bit_exact() {
    for policy in [DepthPolicy::Strict, DepthPolicy::Tree] {
        let pr = p(3);
        let all = enumerate_all(pr);
        let addc = BinOpCircuit::build(pr, policy, |b, x, y| g_add(b, x, y).unwrap().to_flat());
        let mulc = BinOpCircuit::build(pr, policy, |b, x, y| g_mul(b, x, y).unwrap().to_flat());
        let divc = BinOpCircuit::build(pr, policy, |b, x, y| {
            let (q, flag) = g_div(b, x, y).unwrap();
            let mut o = q.to_flat();
            o.push(flag);
            o
        });
        for x in &all {
            for y in &all {
                assert_eq!(
                    addc.run_fp(x, y),
                    fp_add(x, y),
                    "{policy}: add mismatch at {x} + {y}"
                );
                assert_eq!(
                    mulc.run_fp(x, y),
                    fp_mul(x, y),
                    "{policy}: mul mismatch at {x} * {y}"
                );
                let out = divc.run(x, y);
                let got = decode(&out[..out.len() - 1], pr).unwrap();
                let want = fp_div_total(x, y);
                assert_eq!(got, want.num, "{policy}: div mismatch at {x} / {y}");
                assert_eq!(out[out.len() - 1], y.is_zero(), "div0 flag at {x} / {y}");
            }
        }
    }
}

#[test]
fn exhaustive_p3_compare_and_floor() {
    let pr = p(3);
    let all = enumerate_all(pr);
    let cmpc = BinOpCircuit::build(pr, DepthPolicy::Strict, |b, x, y| {
        let c = g_compare(b, x, y).unwrap();
        vec![c.lt, c.eq, c.gt]
    });
    let mut floorc = Circuit::new();
    let outs = {
        let mut b = GadgetBuilder::new(&mut floorc, pr, DepthPolicy::Strict).unwrap();
        let x = b.input_bundle();
        g_floor(&mut b, &x).unwrap().to_flat()
    };
    floorc.set_outputs(outs);

    for x in &all {
        let bits = encode(x).bits().to_vec();
        let out = floorc.evaluate(&bits).unwrap();
        assert_eq!(
            decode(&out, pr).unwrap(),
            fp_floor(x),
            "floor mismatch at {x}"
        );
        for y in &all {
            let out = cmpc.run(x, y);
            let want = match fp_compare(x, y) {
                Ordering::Less => [true, false, false],
                Ordering::Equal => [false, true, false],
                Ordering::Greater => [false, false, true],
            };
            assert_eq!(out, want, "compare mismatch at {x} vs {y}");
        }
    }
}

#[test]
fn randomized_higher_precisions_bit_exact() {
    for pb in [4u32, 6, 8] {
        let pr = p(pb);
        let policy = DepthPolicy::Strict;
        let addc = BinOpCircuit::build(pr, policy, |b, x, y| g_add(b, x, y).unwrap().to_flat());
        let mulc = BinOpCircuit::build(pr, policy, |b, x, y| g_mul(b, x, y).unwrap().to_flat());
        let divc =
            BinOpCircuit::build(pr, policy, |b, x, y| g_div(b, x, y).unwrap().0.to_flat());
        let mut rng = ChaCha8Rng::seed_from_u64(0xE0_u64 + pb as u64);
        for _ in 0..1000 {
            let x = sample_fpnum(&mut rng, pr);
            let y = sample_fpnum(&mut rng, pr);
            assert_eq!(addc.run_fp(&x, &y), fp_add(&x, &y), "add at {x} + {y} (p={pb})");
            assert_eq!(mulc.run_fp(&x, &y), fp_mul(&x, &y), "mul at {x} * {y} (p={pb})");
            assert_eq!(
                divc.run_fp(&x, &y),
                fp_div_total(&x, &y).num,
                "div at {x} / {y} (p={pb})"
            );
        }
    }
}

#[test]
fn compare_is_reflexive_eq_on_random_values() {
    let pr = p(5);
    let cmpc = BinOpCircuit::build(pr, DepthPolicy::Strict, |b, x, y| {
        let c = g_compare(b, x, y).unwrap();
        vec![c.lt, c.eq, c.gt]
    });
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for _ in 0..50 {
        let x = sample_fpnum(&mut rng, pr);
        assert_eq!(cmpc.run(&x, &x), vec![false, true, false]);
    }
}

#[test]
fn gadget_outputs_are_always_canonical() {
    // decode() rejects non-canonical patterns, so running it over the
    // randomized suites above already enforces this; here zero and the
    // saturation edges get explicit coverage.
    let pr = p(4);
    let addc =
        BinOpCircuit::build(pr, DepthPolicy::Strict, |b, x, y| g_add(b, x, y).unwrap().to_flat());
    let z = FpNum::zero(pr);
    let m = FpNum::max_magnitude(false, pr);
    for (x, y) in [(z, z), (m, m), (m, z), (z, m.neg()), (m, m.neg())] {
        let out = addc.run(&x, &y);
        let got = decode(&out, pr).expect("canonical");
        assert_eq!(got, fp_add(&x, &y));
    }
}
