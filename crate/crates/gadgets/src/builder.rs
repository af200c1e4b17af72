//! Construction context: a circuit plus precision, policy, and
//! constant-folding push helpers.
//!
//! Folding keeps baked weights cheap: AND/OR absorb constants, thresholds
//! over partially-constant inputs shrink their constant, and single-input
//! reductions pass wires through without a gate.

use crate::{FpWires, GadgetError, GadgetResult, MAX_CIRCUIT_PRECISION};
use tcvar_fp::{layout, FpNum, Precision};
use tcvar_netlist::{Circuit, GateId, GateKind};

/// How reductions inside scalar gadgets are built.
///
/// `Strict` uses counting constructions and flat (or two-level block)
/// carry-lookahead everywhere: stage depth is a fixed constant independent
/// even of the working width. `Tree` permits balanced prefix networks for
/// scalar-internal carries (smaller circuits, depth logarithmic in the
/// p-dependent width) and unlocks iterated multiplication over more than
/// two operands. Under both, depth never depends on the operand count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DepthPolicy {
    Strict,
    Tree,
}

impl std::fmt::Display for DepthPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DepthPolicy::Strict => write!(f, "strict"),
            DepthPolicy::Tree => write!(f, "tree"),
        }
    }
}

impl std::str::FromStr for DepthPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(DepthPolicy::Strict),
            "tree" => Ok(DepthPolicy::Tree),
            other => Err(format!("unknown policy {other:?} (strict|tree)")),
        }
    }
}

pub struct GadgetBuilder<'a> {
    pub circ: &'a mut Circuit,
    pub p: Precision,
    pub policy: DepthPolicy,
    const0: Option<GateId>,
    const1: Option<GateId>,
}

impl<'a> GadgetBuilder<'a> {
    pub fn new(circ: &'a mut Circuit, p: Precision, policy: DepthPolicy) -> GadgetResult<Self> {
        if p.get() > MAX_CIRCUIT_PRECISION {
            return Err(GadgetError::PrecisionTooLarge(
                p.get(),
                MAX_CIRCUIT_PRECISION,
            ));
        }
        Ok(GadgetBuilder {
            circ,
            p,
            policy,
            const0: None,
            const1: None,
        })
    }

    pub fn check_p(&self, w: &FpWires) -> GadgetResult<()> {
        if w.p != self.p {
            return Err(GadgetError::PrecisionMismatch(w.p, self.p));
        }
        Ok(())
    }

    pub fn zero_gate(&mut self) -> GateId {
        if let Some(g) = self.const0 {
            return g;
        }
        let g = self.circ.add_gate(GateKind::Const0, &[]).unwrap();
        self.const0 = Some(g);
        g
    }

    pub fn one_gate(&mut self) -> GateId {
        if let Some(g) = self.const1 {
            return g;
        }
        let g = self.circ.add_gate(GateKind::Const1, &[]).unwrap();
        self.const1 = Some(g);
        g
    }

    pub fn bit(&mut self, v: bool) -> GateId {
        if v {
            self.one_gate()
        } else {
            self.zero_gate()
        }
    }

    #[inline]
    fn is_const(&self, g: GateId) -> Option<bool> {
        match self.circ.kind(g) {
            GateKind::Const0 => Some(false),
            GateKind::Const1 => Some(true),
            _ => None,
        }
    }

    pub fn input(&mut self) -> GateId {
        self.circ.add_gate(GateKind::Input, &[]).unwrap()
    }

    pub fn not(&mut self, a: GateId) -> GateId {
        match self.circ.kind(a) {
            GateKind::Const0 => self.one_gate(),
            GateKind::Const1 => self.zero_gate(),
            GateKind::Not => GateId(self.circ.gate_inputs(a)[0]),
            _ => self.circ.add_gate(GateKind::Not, &[a]).unwrap(),
        }
    }

    pub fn and(&mut self, ins: &[GateId]) -> GateId {
        let mut live = Vec::with_capacity(ins.len());
        for &g in ins {
            match self.is_const(g) {
                Some(false) => return self.zero_gate(),
                Some(true) => {}
                None => live.push(g),
            }
        }
        live.sort_unstable();
        live.dedup();
        match live.len() {
            0 => self.one_gate(),
            1 => live[0],
            _ => self.circ.add_gate(GateKind::And, &live).unwrap(),
        }
    }

    pub fn or(&mut self, ins: &[GateId]) -> GateId {
        let mut live = Vec::with_capacity(ins.len());
        for &g in ins {
            match self.is_const(g) {
                Some(true) => return self.one_gate(),
                Some(false) => {}
                None => live.push(g),
            }
        }
        live.sort_unstable();
        live.dedup();
        match live.len() {
            0 => self.zero_gate(),
            1 => live[0],
            _ => self.circ.add_gate(GateKind::Or, &live).unwrap(),
        }
    }

    /// Fires iff at least k of ins are 1; constants fold into k.
    pub fn threshold(&mut self, k: u32, ins: &[GateId]) -> GateId {
        let mut live = Vec::with_capacity(ins.len());
        let mut k = k as i64;
        for &g in ins {
            match self.is_const(g) {
                Some(true) => k -= 1,
                Some(false) => {}
                None => live.push(g),
            }
        }
        if k <= 0 {
            return self.one_gate();
        }
        if k as usize > live.len() {
            return self.zero_gate();
        }
        live.sort_unstable();
        if k == 1 {
            return self.or(&live);
        }
        if k as usize == live.len() {
            return self.and(&live);
        }
        self.circ
            .add_gate(GateKind::Threshold(k as u32), &live)
            .unwrap()
    }

    /// Threshold bank T>=1..=max_k over one input list; constants fold into
    /// the thresholds and the live gates share one arena slice.
    pub fn threshold_bank(&mut self, ins: &[GateId], max_k: u32) -> Vec<GateId> {
        let mut live = Vec::with_capacity(ins.len());
        let mut bias = 0i64;
        for &g in ins {
            match self.is_const(g) {
                Some(true) => bias += 1,
                Some(false) => {}
                None => live.push(g),
            }
        }
        live.sort_unstable();
        // Effective threshold k' = k - bias ranges over 1..=max_kp.
        let max_kp = (max_k as i64 - bias).clamp(0, live.len() as i64) as u32;
        let bank = if max_kp >= 1 {
            self.circ.add_threshold_bank(&live, max_kp).unwrap()
        } else {
            Vec::new()
        };
        let mut out = Vec::with_capacity(max_k as usize);
        for k in 1..=max_k as i64 {
            let kp = k - bias;
            if kp <= 0 {
                out.push(self.one_gate());
            } else if kp as usize > live.len() {
                out.push(self.zero_gate());
            } else {
                out.push(bank[(kp - 1) as usize]);
            }
        }
        out
    }

    pub fn xor2(&mut self, a: GateId, b: GateId) -> GateId {
        if let Some(v) = self.is_const(a) {
            return if v { self.not(b) } else { b };
        }
        if let Some(v) = self.is_const(b) {
            return if v { self.not(a) } else { a };
        }
        if a == b {
            return self.zero_gate();
        }
        let o = self.or(&[a, b]);
        let n = self.and(&[a, b]);
        let nn = self.not(n);
        self.and(&[o, nn])
    }

    /// s ? a : b.
    pub fn mux(&mut self, s: GateId, a: GateId, b: GateId) -> GateId {
        if let Some(v) = self.is_const(s) {
            return if v { a } else { b };
        }
        if a == b {
            return a;
        }
        let ns = self.not(s);
        let ta = self.and(&[s, a]);
        let tb = self.and(&[ns, b]);
        self.or(&[ta, tb])
    }

    pub fn mux_vec(&mut self, s: GateId, a: &[GateId], b: &[GateId]) -> Vec<GateId> {
        assert_eq!(a.len(), b.len());
        a.iter()
            .zip(b)
            .map(|(&x, &y)| self.mux(s, x, y))
            .collect()
    }

    /// Fresh input bundle in canonical encoding order.
    pub fn input_bundle(&mut self) -> FpWires {
        let bits: Vec<GateId> = (0..layout::width(self.p.get()))
            .map(|_| self.input())
            .collect();
        FpWires::from_flat(&bits, self.p)
    }

    /// Baked constant bundle for a value.
    pub fn constant_bundle(&mut self, x: &FpNum) -> FpWires {
        assert_eq!(x.precision(), self.p);
        let enc = tcvar_fp::encode(x);
        let bits: Vec<GateId> = enc.bits().iter().map(|&b| self.bit(b)).collect();
        FpWires::from_flat(&bits, self.p)
    }

    /// Canonical zero bundle.
    pub fn zero_bundle(&mut self) -> FpWires {
        let z = FpNum::zero(self.p);
        self.constant_bundle(&z)
    }

    pub fn mux_bundle(&mut self, s: GateId, a: &FpWires, b: &FpWires) -> FpWires {
        let fa = a.to_flat();
        let fb = b.to_flat();
        let bits = self.mux_vec(s, &fa, &fb);
        FpWires::from_flat(&bits, self.p)
    }
}
