//! Open-addressing map from nonzero field elements to small integers.

/// Slots allocated per stored entry, as the ratio `SLOT_NUM / SLOT_DEN`
/// (load factor 3/4).
const SLOT_NUM: u64 = 4;
const SLOT_DEN: u64 = 3;

/// Bytes per slot: one key word and one value word.
pub const SLOT_BYTES: u64 = 16;

/// Slot count used for `entries` keys.
pub fn slots_for(entries: u64) -> u64 {
    (entries * SLOT_NUM).div_ceil(SLOT_DEN).max(entries + 1)
}

/// Linear-probing table keyed by nonzero `u64`; key 0 marks an empty slot.
/// The layout depends only on the insertion order, so a table rebuilt with the
/// same inserts is bit-identical.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementMap {
    slots: Vec<[u64; 2]>,
    len: u64,
}

#[inline]
fn home(key: u64, cap: u64) -> usize {
    let h = key.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    ((h as u128 * cap as u128) >> 64) as usize
}

impl ElementMap {
    pub fn with_entries(entries: u64) -> Self {
        ElementMap {
            slots: vec![[0, 0]; slots_for(entries) as usize],
            len: 0,
        }
    }

    /// Inserts a key that must not already be present.
    pub fn insert_new(&mut self, key: u64, value: u64) {
        debug_assert!(key != 0);
        let cap = self.slots.len();
        let mut i = home(key, cap as u64);
        loop {
            let slot = &mut self.slots[i];
            if slot[0] == 0 {
                *slot = [key, value];
                self.len += 1;
                assert!(self.len < cap as u64, "element map over capacity");
                return;
            }
            debug_assert!(slot[0] != key, "duplicate key");
            i += 1;
            if i == cap {
                i = 0;
            }
        }
    }

    #[inline]
    pub fn get(&self, key: u64) -> Option<u64> {
        let cap = self.slots.len();
        let mut i = home(key, cap as u64);
        loop {
            let slot = self.slots[i];
            if slot[0] == key {
                return Some(slot[1]);
            }
            if slot[0] == 0 {
                return None;
            }
            i += 1;
            if i == cap {
                i = 0;
            }
        }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn slots(&self) -> &[[u64; 2]] {
        &self.slots
    }

    pub fn bytes(&self) -> u64 {
        self.slots.len() as u64 * SLOT_BYTES
    }

    /// Rebuilds from raw slots, checking the probe invariant.
    pub fn from_slots(slots: Vec<[u64; 2]>) -> Option<Self> {
        let len = slots.iter().filter(|s| s[0] != 0).count() as u64;
        if slots.is_empty() || len >= slots.len() as u64 {
            return None;
        }
        let map = ElementMap { slots, len };
        let ok = map
            .slots
            .iter()
            .filter(|s| s[0] != 0)
            .all(|s| map.get(s[0]) == Some(s[1]));
        ok.then_some(map)
    }
}
