//! Counter-based random streams.
//!
//! Every draw is a pure function of `(master seed, stream index, lane, counter)`
//! evaluated with the Philox4x32-10 bijection, so a replica's samples do not
//! depend on thread scheduling or on how many other replicas ran before it.
//! The 128-bit Philox counter is laid out as
//! `[counter lo32, counter hi24 | lane << 24, index lo32, index hi32]`
//! and the 64-bit key is the master seed.

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

/// Largest counter addressable inside one lane.
pub const MAX_COUNTER: u64 = (1 << 56) - 1;

#[inline(always)]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = a as u64 * b as u64;
    ((p >> 32) as u32, p as u32)
}

/// Philox4x32 with 10 rounds.
#[inline]
pub fn philox4x32_10(mut ctr: [u32; 4], mut key: [u32; 2]) -> [u32; 4] {
    for round in 0..10 {
        if round > 0 {
            key[0] = key[0].wrapping_add(PHILOX_W0);
            key[1] = key[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, ctr[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, ctr[2]);
        ctr = [hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0];
    }
    ctr
}

/// Independent sub-streams of one replica.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum Lane {
    Weights = 0,
    LeftWalk = 1,
    RightWalk = 2,
    Clocks = 3,
    Resample = 4,
    Aux = 5,
}

/// Maps the top 52 bits of `bits` to a lattice midpoint in the open interval (0, 1).
#[inline]
pub fn open_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Mean-1 exponential by inverse transform, `-ln(1 - u)`.
#[inline]
pub fn exponential_from(bits: u64) -> f64 {
    -(1.0 - open_unit(bits)).ln()
}

/// Stateless random access into a `(seed, index, lane)` stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CounterKey {
    key: [u32; 2],
    index: u64,
    lane: u8,
}

impl CounterKey {
    pub fn new(seed: u64, index: u64, lane: Lane) -> Self {
        CounterKey {
            key: [seed as u32, (seed >> 32) as u32],
            index,
            lane: lane as u8,
        }
    }

    #[inline]
    pub fn bits_at(&self, counter: u64) -> u64 {
        debug_assert!(counter <= MAX_COUNTER, "counter {counter} overflows its lane");
        let ctr = [
            counter as u32,
            ((counter >> 32) as u32 & 0x00FF_FFFF) | ((self.lane as u32) << 24),
            self.index as u32,
            (self.index >> 32) as u32,
        ];
        let out = philox4x32_10(ctr, self.key);
        out[0] as u64 | ((out[1] as u64) << 32)
    }

    #[inline]
    pub fn uniform_at(&self, counter: u64) -> f64 {
        open_unit(self.bits_at(counter))
    }

    #[inline]
    pub fn exponential_at(&self, counter: u64) -> f64 {
        exponential_from(self.bits_at(counter))
    }
}

/// Sequential view of one counter-based stream. Owned by a single replica.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    index: u64,
    key: CounterKey,
    counter: u64,
}

impl RngStream {
    pub fn new(seed: u64, index: u64) -> Self {
        Self::with_lane(seed, index, Lane::Aux)
    }

    pub fn with_lane(seed: u64, index: u64, lane: Lane) -> Self {
        RngStream {
            seed,
            index,
            key: CounterKey::new(seed, index, lane),
            counter: 0,
        }
    }

    /// Same seed and index, different lane, counter reset.
    pub fn lane(&self, lane: Lane) -> RngStream {
        RngStream::with_lane(self.seed, self.index, lane)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub fn key(&self) -> CounterKey {
        self.key
    }

    pub fn next_u64(&mut self) -> u64 {
        let bits = self.key.bits_at(self.counter);
        self.counter += 1;
        bits
    }

    /// Uniform on the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        open_unit(self.next_u64())
    }

    pub fn exponential(&mut self) -> f64 {
        exponential_from(self.next_u64())
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Uniform integer in `0..n` (multiply-shift; bias below 2^-32 for n < 2^32).
    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }
}
