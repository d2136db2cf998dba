//! Small deterministic PRNG (SplitMix64).
//!
//! Randomized rational sample points and numeric spot checks must be
//! reproducible byte-for-byte across runs and platforms, so the engine
//! carries its own fixed-algorithm generator instead of depending on an
//! external crate whose stream might change between versions.

/// SplitMix64 generator. Cheap, full-period over 2^64 seeds, and stable.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    /// Creates a generator from a seed. Equal seeds yield equal streams.
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Next raw 64-bit value.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform integer in `[lo, hi]` (inclusive). Requires `lo <= hi`.
    pub fn int_in(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi);
        let span = (hi - lo) as u64 + 1;
        lo + (self.next_u64() % span) as i64
    }

    /// Small nonzero rational sample point `p/q` with `p` in `[-bound, bound]`
    /// and `q` in `[1, qmax]`. Used for randomized evaluation of symbolic
    /// coefficients at exact rational arguments.
    pub fn rational(&mut self, bound: i64, qmax: i64) -> (i64, i64) {
        let q = self.int_in(1, qmax);
        loop {
            let p = self.int_in(-bound, bound);
            if p != 0 {
                return (p, q);
            }
        }
    }

    /// Uniform float in `(0, 1)`, deterministic across platforms.
    pub fn unit_f64(&mut self) -> f64 {
        // 53 significand bits; offset by half an ulp to stay inside (0, 1).
        ((self.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    }

    /// Uniform float in `[lo, hi]`.
    pub fn f64_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit_f64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_stream() {
        let mut a = SplitMix64::new(7);
        let mut b = SplitMix64::new(7);
        for _ in 0..32 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn rational_points_are_nonzero_and_bounded() {
        let mut g = SplitMix64::new(42);
        for _ in 0..256 {
            let (p, q) = g.rational(9, 7);
            assert!(p != 0 && p.abs() <= 9);
            assert!((1..=7).contains(&q));
        }
    }
}
