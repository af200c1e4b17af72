//! Cross-cutting netlist checks: evaluator vs a naive recursive
//! interpreter, lowering equivalence on random circuits, metric stability
//! under the text round trip, and dedup transparency.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tcvar_netlist::{deserialize, lower_thresholds, serialize, Circuit, GateId, GateKind};

/// Independent recursive interpreter used as the evaluation oracle.
fn naive_eval(c: &Circuit, assignment: &[bool]) -> Vec<bool> {
    fn go(c: &Circuit, g: GateId, assignment: &[bool], memo: &mut Vec<Option<bool>>) -> bool {
        if let Some(v) = memo[g.index()] {
            return v;
        }
        let v = match c.kind(g) {
            GateKind::Input => {
                let pos = c.inputs().iter().position(|x| *x == g).unwrap();
                assignment[pos]
            }
            GateKind::Const0 => false,
            GateKind::Const1 => true,
            GateKind::Not => !go(c, GateId(c.gate_inputs(g)[0]), assignment, memo),
            kind => {
                let ones = c
                    .gate_inputs(g)
                    .to_vec()
                    .iter()
                    .filter(|&&i| go(c, GateId(i), assignment, memo))
                    .count();
                let f = c.gate_inputs(g).len();
                match kind {
                    GateKind::And => ones == f,
                    GateKind::Or => ones > 0,
                    GateKind::Majority => ones >= f / 2 + 1,
                    GateKind::Threshold(k) => ones >= k as usize,
                    _ => unreachable!(),
                }
            }
        };
        memo[g.index()] = Some(v);
        v
    }
    let mut memo = vec![None; c.size()];
    c.outputs()
        .iter()
        .map(|&g| go(c, g, assignment, &mut memo))
        .collect()
}

fn random_circuit(rng: &mut ChaCha8Rng, n_inputs: usize, n_gates: usize, dedup: bool) -> Circuit {
    let mut c = if dedup { Circuit::new() } else { Circuit::new_raw() };
    let mut ids = Vec::new();
    for _ in 0..n_inputs {
        ids.push(c.add_gate(GateKind::Input, &[]).unwrap());
    }
    for _ in 0..n_gates {
        let kind = rng.gen_range(0..6);
        let f = rng.gen_range(1..=5.min(ids.len()));
        let ins: Vec<GateId> = (0..f)
            .map(|_| ids[rng.gen_range(0..ids.len())])
            .collect();
        let id = match kind {
            0 => c.add_gate(GateKind::Not, &ins[..1]).unwrap(),
            1 => c.add_gate(GateKind::And, &ins).unwrap(),
            2 => c.add_gate(GateKind::Or, &ins).unwrap(),
            3 => c.add_gate(GateKind::Majority, &ins).unwrap(),
            4 => {
                let k = rng.gen_range(0..=(f as u32 + 1));
                c.add_gate(GateKind::Threshold(k), &ins).unwrap()
            }
            _ => c
                .add_gate(
                    if rng.gen() {
                        GateKind::Const0
                    } else {
                        GateKind::Const1
                    },
                    &[],
                )
                .unwrap(),
        };
        ids.push(id);
    }
    let n_out = rng.gen_range(1..=4);
    let outs: Vec<GateId> = (0..n_out)
        .map(|_| ids[rng.gen_range(0..ids.len())])
        .collect();
    c.set_outputs(outs);
    c
}

#[test]
fn evaluator_matches_naive_interpreter_on_random_circuits() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..40 {
        let n_inputs = rng.gen_range(1..=8);
        let n_gates = rng.gen_range(1..=200);
        let c = random_circuit(&mut rng, n_inputs, n_gates, case % 2 == 0);
        for _ in 0..100 {
            let bits: Vec<bool> = (0..n_inputs).map(|_| rng.gen()).collect();
            assert_eq!(
                c.evaluate(&bits).unwrap(),
                naive_eval(&c, &bits),
                "case {case} diverged"
            );
        }
    }
}

#[test]
fn lowering_preserves_evaluation_exhaustively() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..30 {
        let n_inputs = rng.gen_range(1..=10);
        let n_gates = rng.gen_range(1..=60);
        let c = random_circuit(&mut rng, n_inputs, n_gates, true);
        let low = lower_thresholds(&c).unwrap();
        assert!(low
            .iter_gates()
            .all(|(_, k, _)| !matches!(k, GateKind::Threshold(_))));
        for bits in 0..(1u32 << n_inputs) {
            let assignment: Vec<bool> = (0..n_inputs).map(|i| bits >> i & 1 == 1).collect();
            assert_eq!(
                c.evaluate(&assignment).unwrap(),
                low.evaluate(&assignment).unwrap()
            );
        }
    }
}

#[test]
fn depth_and_size_survive_text_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for _ in 0..20 {
        let (ni, ng) = (rng.gen_range(1..=6), rng.gen_range(1..=120));
        let c = random_circuit(&mut rng, ni, ng, true);
        let text = serialize(&c);
        let back = deserialize(&text).unwrap();
        assert_eq!(back.size(), c.size());
        assert_eq!(back.depth(), c.depth());
        assert_eq!(serialize(&back), text);
    }
}

#[test]
fn dedup_never_changes_behavior() {
    // Build the same random structure with and without structural hashing.
    for seed in 0..10u64 {
        let mut r1 = ChaCha8Rng::seed_from_u64(1000 + seed);
        let mut r2 = ChaCha8Rng::seed_from_u64(1000 + seed);
        let n_inputs = 6;
        let a = random_circuit(&mut r1, n_inputs, 80, true);
        let b = random_circuit(&mut r2, n_inputs, 80, false);
        assert!(a.size() <= b.size());
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
        for _ in 0..50 {
            let bits: Vec<bool> = (0..n_inputs).map(|_| rng.gen()).collect();
            assert_eq!(a.evaluate(&bits).unwrap(), b.evaluate(&bits).unwrap());
        }
    }
}

#[test]
fn depth_matches_longest_path_oracle() {
    // Recompute depth by an independent DFS longest-path pass.
    fn longest(c: &Circuit, g: GateId, memo: &mut Vec<Option<u32>>) -> u32 {
        if let Some(v) = memo[g.index()] {
            return v;
        }
        let v = c
            .gate_inputs(g)
            .to_vec()
            .iter()
            .map(|&i| longest(c, GateId(i), memo) + 1)
            .max()
            .unwrap_or(0);
        memo[g.index()] = Some(v);
        v
    }
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    for _ in 0..20 {
        let (ni, ng) = (rng.gen_range(1..=6), rng.gen_range(1..=150));
        let c = random_circuit(&mut rng, ni, ng, true);
        let mut memo = vec![None; c.size()];
        let want = c
            .outputs()
            .iter()
            .map(|&g| longest(&c, g, &mut memo))
            .max()
            .unwrap_or(0);
        assert_eq!(c.depth(), want);
        let lm = c.levelize();
        for (g, _, _) in c.iter_gates() {
            assert_eq!(lm.level(g), longest(&c, g, &mut memo));
        }
    }
}
