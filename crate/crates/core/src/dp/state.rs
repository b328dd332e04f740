//! Separator states packed into a `u128`.
//!
//! Slot `i` (bottom to top) uses five bits: a four-bit component label
//! (`0` for a zero-degree vertex) and one odd-parity bit. Labels are kept in
//! canonical first-occurrence order. The top bit marks a closed state, in
//! which the tour has already been completed to the left of the separator.

use std::fmt;

/// Largest frontier the packing supports.
pub const MAX_SLOTS: usize = 15;

const SLOT_BITS: u32 = 5;
const CLOSED_BIT: u128 = 1 << 127;
/// Temporary labels handed out by [`Frontier::add`]; canonical labels stay
/// below it.
const FRESH_LABEL: u8 = 16;
const LABEL_SPACE: usize = 32;

/// Degree parity label of a frontier vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    /// Zero degree.
    Zero,
    /// Even, non-zero degree.
    Even,
    /// Odd degree.
    Odd,
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Zero => "0",
            Parity::Even => "E",
            Parity::Odd => "U",
        })
    }
}

/// Canonical packed separator state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DpState(pub(crate) u128);

impl DpState {
    pub const EMPTY: DpState = DpState(0);
    pub const CLOSED: DpState = DpState(CLOSED_BIT);

    #[inline]
    pub fn is_closed(self) -> bool {
        self.0 & CLOSED_BIT != 0
    }

    #[inline]
    pub fn raw(self) -> u128 {
        self.0
    }

    /// Builds a state from per-slot `(component, odd)` pairs; labels are
    /// canonicalised. Returns `None` for crossing partitions or a zero label
    /// with odd parity.
    pub fn from_slots(slots: &[(u8, bool)]) -> Option<Self> {
        let mut frontier = Frontier::new(slots.len());
        for (i, &(comp, odd)) in slots.iter().enumerate() {
            if (comp == 0 && odd) || comp as usize >= LABEL_SPACE {
                return None;
            }
            frontier.comp[i] = comp;
            frontier.odd[i] = odd;
        }
        frontier.pack()
    }

    #[inline]
    pub fn component(self, slot: usize) -> u8 {
        ((self.0 >> (slot as u32 * SLOT_BITS)) & 0xF) as u8
    }

    #[inline]
    pub fn is_odd(self, slot: usize) -> bool {
        (self.0 >> (slot as u32 * SLOT_BITS + 4)) & 1 == 1
    }

    pub fn parity(self, slot: usize) -> Parity {
        match (self.component(slot), self.is_odd(slot)) {
            (0, _) => Parity::Zero,
            (_, true) => Parity::Odd,
            (_, false) => Parity::Even,
        }
    }

    /// Display form over `slots` frontier vertices, e.g. `{(E,E,E)(1,1,2)}`.
    pub fn display(self, slots: usize) -> String {
        if self.is_closed() {
            return "{closed}".to_string();
        }
        let parities: Vec<String> = (0..slots).map(|i| self.parity(i).to_string()).collect();
        let comps: Vec<String> = (0..slots)
            .map(|i| match self.component(i) {
                0 => "-".to_string(),
                c => c.to_string(),
            })
            .collect();
        format!("{{({})({})}}", parities.join(","), comps.join(","))
    }
}

/// Unpacked, mutable working copy of a state.
#[derive(Debug, Clone)]
pub(crate) struct Frontier {
    pub slots: usize,
    pub comp: [u8; MAX_SLOTS],
    pub odd: [bool; MAX_SLOTS],
    next_label: u8,
}

impl Frontier {
    pub fn new(slots: usize) -> Self {
        debug_assert!(slots <= MAX_SLOTS);
        Self { slots, comp: [0; MAX_SLOTS], odd: [false; MAX_SLOTS], next_label: FRESH_LABEL }
    }

    pub fn unpack(state: DpState, slots: usize) -> Self {
        let mut f = Self::new(slots);
        for i in 0..slots {
            f.comp[i] = state.component(i);
            f.odd[i] = state.is_odd(i);
        }
        f
    }

    /// Adds `degree` incident edge ends to `slot`.
    #[inline]
    pub fn add(&mut self, slot: usize, degree: u8) {
        if degree == 0 {
            return;
        }
        if self.comp[slot] == 0 {
            debug_assert!((self.next_label as usize) < LABEL_SPACE);
            self.comp[slot] = self.next_label;
            self.next_label += 1;
        }
        self.odd[slot] ^= degree & 1 == 1;
    }

    /// Joins the components of two non-zero slots.
    #[inline]
    pub fn merge(&mut self, keep: usize, other: usize) {
        let (to, from) = (self.comp[keep], self.comp[other]);
        if to == from {
            return;
        }
        for c in &mut self.comp[..self.slots] {
            if *c == from {
                *c = to;
            }
        }
    }

    /// Whether `slot`'s component appears in no other slot.
    #[inline]
    pub fn is_sole_member(&self, slot: usize) -> bool {
        let c = self.comp[slot];
        (0..self.slots).all(|i| i == slot || self.comp[i] != c)
    }

    pub fn all_zero(&self) -> bool {
        self.comp[..self.slots].iter().all(|&c| c == 0)
    }

    /// Canonical packing, or `None` if the partition crosses.
    pub fn pack(&self) -> Option<DpState> {
        let mut map = [0u8; LABEL_SPACE];
        let mut next = 1u8;
        let mut stack = [0u8; MAX_SLOTS];
        let mut depth = 0;
        let mut finished: u32 = 0;
        let mut raw: u128 = 0;
        for i in 0..self.slots {
            let c = self.comp[i];
            if c == 0 {
                continue;
            }
            let label = if map[c as usize] == 0 {
                map[c as usize] = next;
                next += 1;
                stack[depth] = map[c as usize];
                depth += 1;
                map[c as usize]
            } else {
                let label = map[c as usize];
                if finished & (1 << label) != 0 {
                    return None;
                }
                while stack[depth - 1] != label {
                    depth -= 1;
                    finished |= 1 << stack[depth];
                }
                label
            };
            let bits = label as u128 | ((self.odd[i] as u128) << 4);
            raw |= bits << (i as u32 * SLOT_BITS);
        }
        Some(DpState(raw))
    }
}
