//! Per-thread operation counters.
//!
//! The inverse DCT and every routine that writes reconstructed pixels bump
//! these counters, so a caller can prove that a code path performed no pixel
//! work at all. Counters are thread-local; take a [`snapshot`] before and
//! after the work on the same thread and diff them.

use std::cell::Cell;

thread_local! {
    static IDCT_CALLS: Cell<u64> = const { Cell::new(0) };
    static PIXEL_WRITES: Cell<u64> = const { Cell::new(0) };
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub idct_calls: u64,
    pub pixel_writes: u64,
}

impl OpCounts {
    pub fn since(self, earlier: OpCounts) -> OpCounts {
        OpCounts {
            idct_calls: self.idct_calls - earlier.idct_calls,
            pixel_writes: self.pixel_writes - earlier.pixel_writes,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.idct_calls == 0 && self.pixel_writes == 0
    }
}

pub fn snapshot() -> OpCounts {
    OpCounts {
        idct_calls: IDCT_CALLS.with(Cell::get),
        pixel_writes: PIXEL_WRITES.with(Cell::get),
    }
}

#[inline]
pub(crate) fn count_idct() {
    IDCT_CALLS.with(|c| c.set(c.get() + 1));
}

#[inline]
pub(crate) fn count_pixel_writes(n: u64) {
    PIXEL_WRITES.with(|c| c.set(c.get() + n));
}
