//! Open-addressing structural-hash table: gate content -> gate id.
//!
//! Slots hold id + 1 (0 = empty); collisions are resolved by the caller
//! comparing actual gate content, so the table never stores hashes and
//! costs 4 bytes per slot.

use crate::GateId;

const SEED: u64 = 0x9e3779b97f4a7c15;

#[inline]
pub fn hash_gate(word: u32, inputs: &[GateId]) -> u64 {
    let mut h = SEED ^ (word as u64).wrapping_mul(0xff51afd7ed558ccd);
    for g in inputs {
        h = (h.rotate_left(23) ^ (g.0 as u64 + 1)).wrapping_mul(0xc4ceb9fe1a85ec53);
    }
    h ^ (h >> 29)
}

#[inline]
fn hash_raw(word: u32, inputs: &[u32]) -> u64 {
    let mut h = SEED ^ (word as u64).wrapping_mul(0xff51afd7ed558ccd);
    for g in inputs {
        h = (h.rotate_left(23) ^ (*g as u64 + 1)).wrapping_mul(0xc4ceb9fe1a85ec53);
    }
    h ^ (h >> 29)
}

#[derive(Debug, Clone)]
pub struct DedupTable {
    slots: Vec<u32>,
    mask: usize,
    len: usize,
}

pub struct Probe<'a> {
    tbl: &'a DedupTable,
    pos: usize,
}

impl<'a> Probe<'a> {
    /// Next occupied slot on the probe path; the caller checks content
    /// equality and keeps probing on mismatch.
    pub fn next_candidate(&mut self) -> Option<u32> {
        loop {
            let v = self.tbl.slots[self.pos];
            self.pos = (self.pos + 1) & self.tbl.mask;
            if v == 0 {
                return None;
            }
            return Some(v - 1);
        }
    }
}

impl DedupTable {
    pub fn new() -> Self {
        let cap = 1 << 12;
        DedupTable {
            slots: vec![0; cap],
            mask: cap - 1,
            len: 0,
        }
    }

    pub fn begin(&self, word: u32, inputs: &[GateId]) -> Probe<'_> {
        Probe {
            tbl: self,
            pos: (hash_gate(word, inputs) as usize) & self.mask,
        }
    }

    fn place(slots: &mut [u32], mask: usize, h: u64, id: u32) {
        let mut pos = (h as usize) & mask;
        while slots[pos] != 0 {
            pos = (pos + 1) & mask;
        }
        slots[pos] = id + 1;
    }

    /// Inserts after a failed probe. Grows and rehashes from gate storage
    /// when load passes ~60%.
    #[allow(clippy::too_many_arguments)]
    pub fn insert(
        &mut self,
        word: u32,
        inputs: &[GateId],
        id: u32,
        kinds: &[u32],
        starts: &[u32],
        lens: &[u32],
        arena: &[u32],
    ) {
        if (self.len + 1) * 5 > self.slots.len() * 3 {
            let cap = self.slots.len() * 2;
            let mut slots = vec![0u32; cap];
            let mask = cap - 1;
            for (i, &w) in kinds.iter().enumerate() {
                // Input gates never enter the table; the gate being
                // inserted right now is placed once, below.
                if w & 0b111 == 0 || i as u32 == id {
                    continue;
                }
                let lo = starts[i] as usize;
                let slice = &arena[lo..lo + lens[i] as usize];
                Self::place(&mut slots, mask, hash_raw(w, slice), i as u32);
            }
            self.slots = slots;
            self.mask = mask;
        }
        Self::place(&mut self.slots, self.mask, hash_gate(word, inputs), id);
        self.len += 1;
    }

    pub fn heap_bytes(&self) -> usize {
        self.slots.capacity() * 4
    }
}
