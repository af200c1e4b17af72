//! THRESHOLD(k) elimination: rewrite every threshold as one MAJORITY over
//! the original inputs padded with constants, leaving a pure
//! AND/OR/NOT/MAJORITY circuit with identical behavior and unchanged depth
//! (constants live at level 0).
//!
//! For fan-in f and 1 <= k: pad so the strict-majority condition coincides
//! with "at least k ones". With z CONST0 pads and c CONST1 pads the gate
//! fires iff ones + c >= floor((f+c+z)/2) + 1; choosing an odd padded
//! fan-in gives exactly z - c = 2k - f - 1. THRESHOLD(0) is constant true.

use crate::{Circuit, GateId, GateKind, NetResult};

pub fn lower_thresholds(c: &Circuit) -> NetResult<Circuit> {
    // Raw mode: gate ids shift only by the inserted constant pads, and
    // no re-hashing reorders anything.
    let mut out = Circuit::new_raw();
    let mut map: Vec<u32> = Vec::with_capacity(c.size());
    let mut const0: Option<GateId> = None;
    let mut const1: Option<GateId> = None;

    for (_, kind, ins) in c.iter_gates() {
        let mapped: Vec<GateId> = ins.iter().map(|&g| GateId(map[g as usize])).collect();
        let new_id = match kind {
            GateKind::Threshold(0) => {
                let c1 = get_const(&mut out, &mut const1, GateKind::Const1)?;
                // Keep a gate per source gate so outputs stay mappable;
                // an OR over the constant is behavior-identical and level 1,
                // never deeper than the threshold it replaces.
                out.add_gate(GateKind::Or, &[c1])?
            }
            GateKind::Threshold(k) => {
                let f = mapped.len() as i64;
                let k = k as i64;
                let mut padded = mapped.clone();
                if 2 * k - f - 1 >= 0 {
                    let zeros = (2 * k - f - 1) as usize;
                    let c0 = get_const(&mut out, &mut const0, GateKind::Const0)?;
                    padded.extend(std::iter::repeat(c0).take(zeros));
                } else {
                    let ones = (f + 1 - 2 * k) as usize;
                    let c1 = get_const(&mut out, &mut const1, GateKind::Const1)?;
                    padded.extend(std::iter::repeat(c1).take(ones));
                }
                out.add_gate(GateKind::Majority, &padded)?
            }
            other => out.add_gate(other, &mapped)?,
        };
        map.push(new_id.0);
    }
    out.set_outputs(
        c.outputs()
            .iter()
            .map(|g| GateId(map[g.index()]))
            .collect(),
    );
    Ok(out)
}

fn get_const(
    out: &mut Circuit,
    slot: &mut Option<GateId>,
    kind: GateKind,
) -> NetResult<GateId> {
    if let Some(g) = *slot {
        return Ok(g);
    }
    let g = out.add_gate(kind, &[])?;
    *slot = Some(g);
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exhaustive_equal(a: &Circuit, b: &Circuit) {
        let n = a.inputs().len();
        assert_eq!(n, b.inputs().len());
        assert!(n <= 16);
        for bits in 0..(1u32 << n) {
            let assignment: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
            assert_eq!(
                a.evaluate(&assignment).unwrap(),
                b.evaluate(&assignment).unwrap(),
                "diverges on {assignment:?}"
            );
        }
    }

    #[test]
    fn threshold_one_becomes_or_equivalent() {
        let mut c = Circuit::new();
        let a = c.add_gate(GateKind::Input, &[]).unwrap();
        let b = c.add_gate(GateKind::Input, &[]).unwrap();
        let t = c.add_gate(GateKind::Threshold(1), &[a, b]).unwrap();
        c.set_outputs(vec![t]);
        let low = lower_thresholds(&c).unwrap();
        assert!(low
            .iter_gates()
            .all(|(_, k, _)| !matches!(k, GateKind::Threshold(_))));
        exhaustive_equal(&c, &low);
    }

    #[test]
    fn threshold_all_of_is_and_equivalent() {
        for f in 1..=4usize {
            let mut c = Circuit::new();
            let ins: Vec<GateId> = (0..f)
                .map(|_| c.add_gate(GateKind::Input, &[]).unwrap())
                .collect();
            let t = c.add_gate(GateKind::Threshold(f as u32), &ins).unwrap();
            let and = c.add_gate(GateKind::And, &ins).unwrap();
            c.set_outputs(vec![t, and]);
            let low = lower_thresholds(&c).unwrap();
            exhaustive_equal(&c, &low);
            // The two outputs agree with each other, too.
            for bits in 0..(1u32 << f) {
                let assignment: Vec<bool> = (0..f).map(|i| bits >> i & 1 == 1).collect();
                let out = low.evaluate(&assignment).unwrap();
                assert_eq!(out[0], out[1]);
            }
        }
    }

    #[test]
    fn untouched_circuit_is_identical() {
        let mut c = Circuit::new();
        let a = c.add_gate(GateKind::Input, &[]).unwrap();
        let b = c.add_gate(GateKind::Input, &[]).unwrap();
        let or = c.add_gate(GateKind::Or, &[a, b]).unwrap();
        let m = c.add_gate(GateKind::Majority, &[a, b, or]).unwrap();
        c.set_outputs(vec![m]);
        let low = lower_thresholds(&c).unwrap();
        assert_eq!(crate::serialize(&c), crate::serialize(&low));
    }

    #[test]
    fn lowering_never_increases_depth_beyond_padding() {
        let mut c = Circuit::new();
        let ins: Vec<GateId> = (0..5)
            .map(|_| c.add_gate(GateKind::Input, &[]).unwrap())
            .collect();
        let t = c.add_gate(GateKind::Threshold(3), &ins).unwrap();
        let n = c.add_gate(GateKind::Not, &[t]).unwrap();
        c.set_outputs(vec![n]);
        let low = lower_thresholds(&c).unwrap();
        assert_eq!(low.depth(), c.depth());
        exhaustive_equal(&c, &low);
    }
}
