use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Purpose tags partitioning the 64-bit stream-id space.
///
/// The high 16 bits of a stream id carry the tag, the low 48 bits the trial
/// index, so different experiments driven by one master seed never share a
/// stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u16)]
pub enum StreamTag {
    Trajectory = 1,
    Evl = 2,
    DPrime = 3,
    Hitting = 4,
    Return = 5,
    Repp = 6,
    Probe = 7,
    Bootstrap = 8,
    Test = 0xfff0,
}

/// Combine a purpose tag and trial index into a stream id.
pub const fn stream_id(tag: StreamTag, index: u64) -> u64 {
    ((tag as u64) << 48) | (index & 0x0000_ffff_ffff_ffff)
}

/// Counter-based random stream.
///
/// Backed by ChaCha8 keyed with the master seed; the stream id selects the
/// ChaCha nonce and the 128-bit word position is the counter. Every draw is
/// therefore a pure function of `(master_seed, stream_id, counter)`, and
/// trials with distinct ids can be generated in any order on any worker.
#[derive(Debug, Clone)]
pub struct RandomStream {
    master_seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_id);
        Self {
            master_seed,
            stream_id,
            rng,
        }
    }

    pub fn for_trial(master_seed: u64, tag: StreamTag, index: u64) -> Self {
        Self::new(master_seed, stream_id(tag, index))
    }

    /// Reposition the stream at an absolute counter value (in 32-bit words).
    pub fn at_counter(master_seed: u64, stream_id: u64, counter: u128) -> Self {
        let mut s = Self::new(master_seed, stream_id);
        s.rng.set_word_pos(counter);
        s
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Current position in 32-bit words. Each `next_u64` advances it by 2.
    pub fn counter(&self) -> u128 {
        self.rng.get_word_pos()
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform draw on the open interval (0, 1) with 53 bits of resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw on the open interval (lo, hi).
    #[inline]
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard exponential draw (inverse CDF).
    pub fn exponential(&mut self) -> f64 {
        -self.uniform().ln()
    }

    /// Poisson draw by inversion; adequate for the small means used in tests.
    pub fn poisson(&mut self, mean: f64) -> u64 {
        let u = self.uniform();
        let mut k = 0u64;
        let mut p = (-mean).exp();
        let mut cdf = p;
        while u > cdf && k < 10_000 {
            k += 1;
            p *= mean / k as f64;
            cdf += p;
        }
        k
    }
}
