//! Append-only DAG netlist over unbounded-fan-in gates.
//!
//! Gates are stored structure-of-arrays with input lists in one shared
//! arena, so circuits in the tens of millions of gates stay cheap: one
//! packed kind word, one (start, len) slice and one level per gate.
//! Structural hashing (on by default) dedupes identical (kind, inputs)
//! gates at insertion time; the pre-dedup insertion count is kept as the
//! raw size. Banks of THRESHOLD gates over one input set share a single
//! arena slice.

mod dedup;
mod lower;
mod text;

pub use lower::lower_thresholds;
pub use text::{deserialize, serialize};

use thiserror::Error;

/// Index of a gate within its circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GateId(pub u32);

impl GateId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for GateId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Input,
    Const0,
    Const1,
    And,
    Or,
    Not,
    /// Fires iff strictly more than half of the inputs are 1
    /// (>= floor(f/2) + 1 of f).
    Majority,
    /// Fires iff at least k inputs are 1. Sugar; `lower_thresholds`
    /// rewrites it to a padded MAJORITY.
    Threshold(u32),
}

const TAG_INPUT: u32 = 0;
const TAG_CONST0: u32 = 1;
const TAG_CONST1: u32 = 2;
const TAG_AND: u32 = 3;
const TAG_OR: u32 = 4;
const TAG_NOT: u32 = 5;
const TAG_MAJ: u32 = 6;
const TAG_THR: u32 = 7;
const TAG_BITS: u32 = 3;
const TAG_MASK: u32 = (1 << TAG_BITS) - 1;

impl GateKind {
    #[inline]
    fn pack(self) -> u32 {
        match self {
            GateKind::Input => TAG_INPUT,
            GateKind::Const0 => TAG_CONST0,
            GateKind::Const1 => TAG_CONST1,
            GateKind::And => TAG_AND,
            GateKind::Or => TAG_OR,
            GateKind::Not => TAG_NOT,
            GateKind::Majority => TAG_MAJ,
            GateKind::Threshold(k) => {
                assert!(k < (1 << (32 - TAG_BITS)), "threshold constant too large");
                TAG_THR | (k << TAG_BITS)
            }
        }
    }

    #[inline]
    fn unpack(word: u32) -> GateKind {
        match word & TAG_MASK {
            TAG_INPUT => GateKind::Input,
            TAG_CONST0 => GateKind::Const0,
            TAG_CONST1 => GateKind::Const1,
            TAG_AND => GateKind::And,
            TAG_OR => GateKind::Or,
            TAG_NOT => GateKind::Not,
            TAG_MAJ => GateKind::Majority,
            TAG_THR => GateKind::Threshold(word >> TAG_BITS),
            _ => unreachable!(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetlistError {
    #[error("invalid fan-in {got} for {kind:?}")]
    InvalidFanIn { kind: GateKind, got: usize },
    #[error("gate {0} references id {1} at or above itself")]
    DanglingInput(u32, u32),
    #[error("assignment length {got} does not match input count {want}")]
    ArityMismatch { want: usize, got: usize },
    #[error("gate budget exhausted ({0} gates); raise TCVAR_MAX_GATES to compile larger models")]
    GateCapExceeded(u64),
    #[error("parse error at line {line}: {msg}")]
    ParseError { line: usize, msg: String },
}

pub type NetResult<T> = Result<T, NetlistError>;

/// Levels per gate: sources at 0, every other gate one past its deepest
/// input. Depth of the circuit is the maximum level over its outputs.
#[derive(Debug, Clone)]
pub struct LevelMap(pub Vec<u32>);

impl LevelMap {
    #[inline]
    pub fn level(&self, g: GateId) -> u32 {
        self.0[g.index()]
    }
}

#[derive(Debug, Clone, Default)]
pub struct Circuit {
    kinds: Vec<u32>,
    starts: Vec<u32>,
    lens: Vec<u32>,
    arena: Vec<u32>,
    levels: Vec<u32>,
    inputs: Vec<GateId>,
    outputs: Vec<GateId>,
    labels: Vec<(u32, String)>,
    dedup: Option<dedup::DedupTable>,
    raw_insertions: u64,
    gate_cap: u64,
}

impl Circuit {
    /// Fresh circuit with structural hashing enabled.
    pub fn new() -> Self {
        Circuit {
            dedup: Some(dedup::DedupTable::new()),
            gate_cap: u64::MAX,
            ..Default::default()
        }
    }

    /// Fresh circuit without structural hashing (every insertion appends).
    pub fn new_raw() -> Self {
        Circuit {
            dedup: None,
            gate_cap: u64::MAX,
            ..Default::default()
        }
    }

    pub fn set_gate_cap(&mut self, cap: u64) {
        self.gate_cap = cap;
    }

    /// Number of gates after dedup, the circuit size metric.
    #[inline]
    pub fn size(&self) -> usize {
        self.kinds.len()
    }

    /// Number of `add_gate` calls, before structural hashing.
    #[inline]
    pub fn raw_size(&self) -> u64 {
        self.raw_insertions
    }

    #[inline]
    pub fn kind(&self, g: GateId) -> GateKind {
        GateKind::unpack(self.kinds[g.index()])
    }

    #[inline]
    pub fn gate_inputs(&self, g: GateId) -> &[u32] {
        let i = g.index();
        let lo = self.starts[i] as usize;
        &self.arena[lo..lo + self.lens[i] as usize]
    }

    pub fn inputs(&self) -> &[GateId] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[GateId] {
        &self.outputs
    }

    pub fn set_outputs(&mut self, outs: Vec<GateId>) {
        for o in &outs {
            assert!(o.index() < self.size(), "output references a missing gate");
        }
        self.outputs = outs;
    }

    pub fn add_label(&mut self, g: GateId, label: impl Into<String>) {
        self.labels.push((g.0, label.into()));
    }

    pub fn labels(&self) -> &[(u32, String)] {
        &self.labels
    }

    fn fan_in_ok(kind: GateKind, n: usize) -> bool {
        match kind {
            GateKind::Input | GateKind::Const0 | GateKind::Const1 => n == 0,
            GateKind::Not => n == 1,
            GateKind::And | GateKind::Or | GateKind::Majority | GateKind::Threshold(_) => n >= 1,
        }
    }

    fn lookup(&self, word: u32, inputs: &[GateId]) -> Option<GateId> {
        let tbl = self.dedup.as_ref()?;
        let mut probe = tbl.begin(word, inputs);
        while let Some(cand) = probe.next_candidate() {
            let i = cand as usize;
            let lo = self.starts[i] as usize;
            let slice = &self.arena[lo..lo + self.lens[i] as usize];
            if self.kinds[i] == word
                && slice.len() == inputs.len()
                && slice.iter().zip(inputs).all(|(a, b)| *a == b.0)
            {
                return Some(GateId(cand));
            }
        }
        None
    }

    fn append(
        &mut self,
        word: u32,
        inputs: &[GateId],
        shared: Option<(u32, u32)>,
    ) -> NetResult<GateId> {
        if self.size() as u64 >= self.gate_cap {
            return Err(NetlistError::GateCapExceeded(self.gate_cap));
        }
        let id = GateId(self.size() as u32);
        let (start, len) = match shared {
            Some(s) => s,
            None => {
                let start = self.arena.len() as u32;
                self.arena.extend(inputs.iter().map(|g| g.0));
                (start, inputs.len() as u32)
            }
        };
        let mut level = 0u32;
        for g in inputs {
            level = level.max(self.levels[g.index()] + 1);
        }
        self.kinds.push(word);
        self.starts.push(start);
        self.lens.push(len);
        self.levels.push(level);
        if word & TAG_MASK == TAG_INPUT {
            self.inputs.push(id);
        } else if let Some(tbl) = self.dedup.as_mut() {
            tbl.insert(
                word,
                inputs,
                id.0,
                &self.kinds,
                &self.starts,
                &self.lens,
                &self.arena,
            );
        }
        Ok(id)
    }

    /// Appends a gate (or returns the existing identical one when dedup is
    /// on). Inputs must already exist. Input gates are never deduped.
    pub fn add_gate(&mut self, kind: GateKind, inputs: &[GateId]) -> NetResult<GateId> {
        if !Self::fan_in_ok(kind, inputs.len()) {
            return Err(NetlistError::InvalidFanIn {
                kind,
                got: inputs.len(),
            });
        }
        let next = self.size() as u32;
        for g in inputs {
            if g.0 >= next {
                return Err(NetlistError::DanglingInput(next, g.0));
            }
        }
        self.raw_insertions += 1;
        let word = kind.pack();
        if kind != GateKind::Input {
            if let Some(hit) = self.lookup(word, inputs) {
                return Ok(hit);
            }
        }
        self.append(word, inputs, None)
    }

    /// Appends Threshold(k) gates for k = 1..=max_k over one input set,
    /// sharing a single arena slice across the bank. The population
    /// counters emit O(h) such gates per column; sharing keeps the arena
    /// linear instead of quadratic in column height.
    pub fn add_threshold_bank(&mut self, inputs: &[GateId], max_k: u32) -> NetResult<Vec<GateId>> {
        if inputs.is_empty() || max_k == 0 {
            return Err(NetlistError::InvalidFanIn {
                kind: GateKind::Threshold(max_k),
                got: inputs.len(),
            });
        }
        let next = self.size() as u32;
        for g in inputs {
            if g.0 >= next {
                return Err(NetlistError::DanglingInput(next, g.0));
            }
        }
        let mut out = Vec::with_capacity(max_k as usize);
        let mut slice: Option<(u32, u32)> = None;
        for k in 1..=max_k {
            self.raw_insertions += 1;
            let word = GateKind::Threshold(k).pack();
            if let Some(hit) = self.lookup(word, inputs) {
                out.push(hit);
                continue;
            }
            let id = self.append(word, inputs, slice)?;
            if slice.is_none() {
                slice = Some((self.starts[id.index()], self.lens[id.index()]));
            }
            out.push(id);
        }
        Ok(out)
    }

    /// Swaps a CONST0/CONST1 gate, the fault-injection hook.
    pub fn flip_const(&mut self, g: GateId) -> NetResult<()> {
        match self.kind(g) {
            GateKind::Const0 => self.kinds[g.index()] = GateKind::Const1.pack(),
            GateKind::Const1 => self.kinds[g.index()] = GateKind::Const0.pack(),
            k => {
                return Err(NetlistError::InvalidFanIn { kind: k, got: 0 });
            }
        }
        Ok(())
    }

    pub fn levelize(&self) -> LevelMap {
        LevelMap(self.levels.clone())
    }

    #[inline]
    pub fn level_of(&self, g: GateId) -> u32 {
        self.levels[g.index()]
    }

    /// Max level over outputs; 0 for circuits without gates above sources.
    pub fn depth(&self) -> u32 {
        self.outputs
            .iter()
            .map(|g| self.levels[g.index()])
            .max()
            .unwrap_or(0)
    }

    /// Longest path to `outs` counting only gates with ids in [from, to);
    /// everything outside the range sits at relative level 0. Used for
    /// per-fragment depth accounting.
    pub fn fragment_depth(&self, from: u32, to: u32, outs: &[GateId]) -> u32 {
        let from = from as usize;
        let to = to as usize;
        let mut local = vec![0u32; to - from];
        for i in from..to {
            if self.lens[i] == 0 {
                continue; // sources stay at level 0
            }
            let lo = self.starts[i] as usize;
            let mut lvl = 0;
            for &inp in &self.arena[lo..lo + self.lens[i] as usize] {
                let v = if (inp as usize) >= from && (inp as usize) < to {
                    local[inp as usize - from] + 1
                } else {
                    1
                };
                lvl = lvl.max(v);
            }
            local[i - from] = lvl;
        }
        outs.iter()
            .filter(|g| g.index() >= from && g.index() < to)
            .map(|g| local[g.index() - from])
            .max()
            .unwrap_or(0)
    }

    /// Evaluates the circuit on one assignment, one bit per declared input.
    pub fn evaluate(&self, assignment: &[bool]) -> NetResult<Vec<bool>> {
        if assignment.len() != self.inputs.len() {
            return Err(NetlistError::ArityMismatch {
                want: self.inputs.len(),
                got: assignment.len(),
            });
        }
        let mut vals = vec![false; self.size()];
        let mut input_ix = 0usize;
        for i in 0..self.size() {
            let lo = self.starts[i] as usize;
            let ins = &self.arena[lo..lo + self.lens[i] as usize];
            vals[i] = match GateKind::unpack(self.kinds[i]) {
                GateKind::Input => {
                    let v = assignment[input_ix];
                    input_ix += 1;
                    v
                }
                GateKind::Const0 => false,
                GateKind::Const1 => true,
                GateKind::And => ins.iter().all(|&g| vals[g as usize]),
                GateKind::Or => ins.iter().any(|&g| vals[g as usize]),
                GateKind::Not => !vals[ins[0] as usize],
                GateKind::Majority => {
                    let ones = ins.iter().filter(|&&g| vals[g as usize]).count();
                    ones >= ins.len() / 2 + 1
                }
                GateKind::Threshold(k) => {
                    let ones = ins.iter().filter(|&&g| vals[g as usize]).count();
                    ones >= k as usize
                }
            };
        }
        Ok(self.outputs.iter().map(|g| vals[g.index()]).collect())
    }

    /// Iterates (id, kind, inputs) in id order.
    pub fn iter_gates(&self) -> impl Iterator<Item = (GateId, GateKind, &[u32])> + '_ {
        (0..self.size()).map(move |i| {
            let lo = self.starts[i] as usize;
            (
                GateId(i as u32),
                GateKind::unpack(self.kinds[i]),
                &self.arena[lo..lo + self.lens[i] as usize],
            )
        })
    }

    /// Approximate heap footprint, for budget diagnostics.
    pub fn heap_bytes(&self) -> usize {
        (self.kinds.capacity() + self.starts.capacity() + self.lens.capacity())
            .saturating_mul(4)
            + self.arena.capacity() * 4
            + self.levels.capacity() * 4
            + self.dedup.as_ref().map_or(0, |d| d.heap_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_add_and_eval() {
        let mut c = Circuit::new();
        let a = c.add_gate(GateKind::Input, &[]).unwrap();
        let b = c.add_gate(GateKind::Input, &[]).unwrap();
        let and = c.add_gate(GateKind::And, &[a, b]).unwrap();
        let not = c.add_gate(GateKind::Not, &[and]).unwrap();
        c.set_outputs(vec![not]);
        assert_eq!(c.evaluate(&[true, true]).unwrap(), vec![false]);
        assert_eq!(c.evaluate(&[true, false]).unwrap(), vec![true]);
        assert_eq!(c.depth(), 2);
        assert_eq!(c.size(), 4);
    }

    #[test]
    fn dedup_returns_same_id() {
        let mut c = Circuit::new();
        let a = c.add_gate(GateKind::Input, &[]).unwrap();
        let g1 = c.add_gate(GateKind::And, &[a, a]).unwrap();
        let g2 = c.add_gate(GateKind::And, &[a, a]).unwrap();
        assert_eq!(g1, g2);
        assert_eq!(c.size(), 2);
        assert_eq!(c.raw_size(), 3);
    }

    #[test]
    fn majority_is_strict() {
        let mut c = Circuit::new();
        let a = c.add_gate(GateKind::Input, &[]).unwrap();
        let b = c.add_gate(GateKind::Input, &[]).unwrap();
        let m = c.add_gate(GateKind::Majority, &[a, b]).unwrap();
        c.set_outputs(vec![m]);
        // Fan-in 2 needs >= 2 ones.
        assert_eq!(c.evaluate(&[true, false]).unwrap(), vec![false]);
        assert_eq!(c.evaluate(&[true, true]).unwrap(), vec![true]);
    }

    #[test]
    fn threshold_zero_always_fires() {
        let mut c = Circuit::new();
        let a = c.add_gate(GateKind::Input, &[]).unwrap();
        let t = c.add_gate(GateKind::Threshold(0), &[a]).unwrap();
        c.set_outputs(vec![t]);
        assert_eq!(c.evaluate(&[false]).unwrap(), vec![true]);
    }

    #[test]
    fn fan_in_violations_are_rejected() {
        let mut c = Circuit::new();
        let a = c.add_gate(GateKind::Input, &[]).unwrap();
        assert!(matches!(
            c.add_gate(GateKind::Majority, &[]),
            Err(NetlistError::InvalidFanIn { .. })
        ));
        assert!(matches!(
            c.add_gate(GateKind::Not, &[a, a]),
            Err(NetlistError::InvalidFanIn { .. })
        ));
        assert!(matches!(
            c.add_gate(GateKind::And, &[GateId(5)]),
            Err(NetlistError::DanglingInput(..))
        ));
    }

    #[test]
    fn gate_cap_is_enforced() {
        let mut c = Circuit::new();
        c.set_gate_cap(2);
        let a = c.add_gate(GateKind::Input, &[]).unwrap();
        let _ = c.add_gate(GateKind::Not, &[a]).unwrap();
        assert!(matches!(
            c.add_gate(GateKind::Or, &[a, a]),
            Err(NetlistError::GateCapExceeded(2))
        ));
    }

    #[test]
    fn threshold_bank_shares_slices_and_evaluates() {
        let mut c = Circuit::new();
        let ins: Vec<GateId> = (0..4)
            .map(|_| c.add_gate(GateKind::Input, &[]).unwrap())
            .collect();
        let bank = c.add_threshold_bank(&ins, 4).unwrap();
        c.set_outputs(bank.clone());
        let r = c.evaluate(&[true, false, true, true]).unwrap();
        assert_eq!(r, vec![true, true, true, false]);
        // One shared slice for the whole bank.
        assert_eq!(c.arena.len(), 4);
        // And the bank entries dedup against later identical gates.
        let again = c.add_gate(GateKind::Threshold(2), &ins).unwrap();
        assert_eq!(again, bank[1]);
    }

    #[test]
    fn input_gates_are_never_deduped() {
        let mut c = Circuit::new();
        let a = c.add_gate(GateKind::Input, &[]).unwrap();
        let b = c.add_gate(GateKind::Input, &[]).unwrap();
        assert_ne!(a, b);
        assert_eq!(c.inputs().len(), 2);
    }
}
