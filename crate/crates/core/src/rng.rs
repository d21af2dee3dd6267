//! Counter-based randomness.
//!
//! Every draw is a pure function of `(seed, stream, substream path, lane, counter)`,
//! so results never depend on how work is scheduled across threads. The mixer is
//! the SplitMix64 finaliser applied twice with distinct odd multipliers.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const LANE_MUL: u64 = 0xD1B5_4A32_D192_ED03;
const COUNTER_MUL: u64 = 0xABC9_8388_FB8F_AC03;

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Map a 64-bit word to a uniform double in `[0, 1)`.
#[inline]
pub fn to_unit(w: u64) -> f64 {
    (w >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// A reproducible source of random words.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    key: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let key = mix64(seed.wrapping_add(GOLDEN) ^ mix64(stream.wrapping_mul(GOLDEN).wrapping_add(1)));
        RngStream { seed, stream, key }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Child stream; distinct indices give independent children.
    pub fn substream(&self, index: u64) -> Self {
        let key = mix64(self.key ^ mix64(index.wrapping_add(GOLDEN).wrapping_mul(LANE_MUL)));
        RngStream { seed: self.seed, stream: self.stream, key }
    }

    /// Random word addressed by `(lane, counter)`.
    #[inline]
    pub fn word(&self, lane: u64, counter: u64) -> u64 {
        let h = mix64(self.key ^ lane.wrapping_mul(LANE_MUL));
        mix64(h ^ counter.wrapping_mul(COUNTER_MUL).wrapping_add(GOLDEN))
    }

    #[inline]
    pub fn uniform(&self, lane: u64, counter: u64) -> f64 {
        to_unit(self.word(lane, counter))
    }

    /// Keyed hasher for one lane: `lane(l).word(c) == word(l, c)`.
    #[inline]
    pub fn lane(&self, lane: u64) -> Lane {
        Lane { key: mix64(self.key ^ lane.wrapping_mul(LANE_MUL)) }
    }

    /// Sequential generator over one lane of this stream.
    pub fn sequence(&self, lane: u64) -> Sequence {
        Sequence { lane_key: mix64(self.key ^ lane.wrapping_mul(LANE_MUL)), counter: 0 }
    }
}

/// One lane of a stream with its key precomputed.
#[derive(Clone, Copy, Debug)]
pub struct Lane {
    key: u64,
}

impl Lane {
    #[inline]
    pub fn word(&self, counter: u64) -> u64 {
        mix64(self.key ^ counter.wrapping_mul(COUNTER_MUL).wrapping_add(GOLDEN))
    }

    #[inline]
    pub fn uniform(&self, counter: u64) -> f64 {
        to_unit(self.word(counter))
    }
}

/// Sequential view of a lane: successive counters.
#[derive(Clone, Debug)]
pub struct Sequence {
    lane_key: u64,
    counter: u64,
}

impl Sequence {
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let w = mix64(self.lane_key ^ self.counter.wrapping_mul(COUNTER_MUL).wrapping_add(GOLDEN));
        self.counter += 1;
        w
    }

    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        to_unit(self.next_u64())
    }

    /// Uniform in `(0, 1]`, safe for logarithms.
    #[inline]
    pub fn next_open(&mut self) -> f64 {
        1.0 - self.next_f64()
    }

    #[inline]
    pub fn next_bool(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }

    /// Exponential variate with the given rate.
    #[inline]
    pub fn exponential(&mut self, rate: f64) -> f64 {
        -self.next_open().ln() / rate
    }

    /// Uniform integer in `0..bound` (Lemire's multiply-shift with rejection).
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        loop {
            let m = (self.next_u64() as u128) * (bound as u128);
            let low = m as u64;
            if low >= bound.wrapping_neg() % bound {
                return (m >> 64) as u64;
            }
        }
    }
}
