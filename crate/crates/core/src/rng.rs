//! Deterministic counter-based random substreams.
//!
//! Every substream is keyed by `(seed, domain, index)` and is independent of
//! the order in which substreams are created or consumed, so a simulation can
//! hand iteration `i` its own stream on any thread and still reproduce the
//! same numbers.
//!
//! The key is mixed into a 64-bit state with the SplitMix64 finaliser. The
//! stream itself is SplitMix64: the state advances by the golden-ratio
//! increment `0x9e3779b97f4a7c15` (period 2^64) and each output is the
//! finaliser applied to the new state.

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output function (Stafford variant 13).
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Separates substreams used for different purposes under the same seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamDomain {
    /// Choosing the actual project cost for a case.
    Case,
    /// Per-iteration benefit/cost deviates.
    Draw,
}

impl StreamDomain {
    fn tag(self) -> u64 {
        match self {
            StreamDomain::Case => 0x4341_5345, // "CASE"
            StreamDomain::Draw => 0x4452_4157, // "DRAW"
        }
    }
}

#[derive(Debug, Clone)]
pub struct Substream {
    state: u64,
}

impl Substream {
    pub fn new(seed: u64, domain: StreamDomain, index: u64) -> Self {
        let key = mix64(seed ^ mix64(domain.tag()));
        let state = mix64(key.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)));
        Substream { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform on `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[lo, hi]`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform on `[-1, 1)`.
    pub fn symmetric_unit(&mut self) -> f64 {
        2.0 * self.next_f64() - 1.0
    }
}
