//! Zigzag scan between natural row-major `(row * 8 + col)` order and
//! low-to-high frequency order.

/// Zigzag index → natural index.
pub const ZIGZAG_TO_NATURAL: [usize; 64] = [
    0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5, 12, 19, 26, 33, 40, 48, 41, 34, 27, 20,
    13, 6, 7, 14, 21, 28, 35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51, 58, 59,
    52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
];

/// Natural index → zigzag index.
pub const NATURAL_TO_ZIGZAG: [usize; 64] = {
    let mut table = [0usize; 64];
    let mut i = 0;
    while i < 64 {
        table[ZIGZAG_TO_NATURAL[i]] = i;
        i += 1;
    }
    table
};

/// `(row, col)` of the zigzag index `i`.
#[inline]
pub fn position(i: usize) -> (usize, usize) {
    let n = ZIGZAG_TO_NATURAL[i];
    (n / 8, n % 8)
}

pub fn zigzag<T: Copy>(block: &[[T; 8]; 8]) -> [T; 64] {
    std::array::from_fn(|i| {
        let (r, c) = position(i);
        block[r][c]
    })
}

pub fn inverse_zigzag<T: Copy>(v: &[T; 64]) -> [[T; 8]; 8] {
    std::array::from_fn(|r| std::array::from_fn(|c| v[NATURAL_TO_ZIGZAG[r * 8 + c]]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_first_steps() {
        assert_eq!(position(0), (0, 0));
        assert_eq!(position(1), (0, 1));
        assert_eq!(position(2), (1, 0));
        assert_eq!(position(63), (7, 7));
    }

    #[test]
    fn permutation_roundtrip() {
        let mut b = [[0u16; 8]; 8];
        for r in 0..8 {
            for c in 0..8 {
                b[r][c] = (r * 8 + c) as u16;
            }
        }
        assert_eq!(inverse_zigzag(&zigzag(&b)), b);
        let mut seen = [false; 64];
        for &n in &ZIGZAG_TO_NATURAL {
            assert!(!seen[n]);
            seen[n] = true;
        }
    }

    #[test]
    fn frequency_grows_along_scan() {
        // anti-diagonal index u + v is non-decreasing in zigzag order
        let mut prev = 0;
        for i in 0..64 {
            let (r, c) = position(i);
            assert!(r + c >= prev);
            prev = r + c;
        }
    }
}
