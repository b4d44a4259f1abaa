//! Counter-indexed random streams.
//!
//! Every stream is identified by a [`NoiseKey`]; the `i`-th draw of a key is
//! a pure function of `(key, i)`. The key is expanded into a ChaCha8 seed and
//! the counter addresses the keystream directly, so any draw can be replayed
//! in O(1) and streams never share state.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Kind of stream within one channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamClass {
    /// Unit-rate Poisson inter-arrival gaps of a next-reaction clock.
    NrmGap,
    /// Candidate inter-arrival gaps of the thinning simulator.
    ThinningGap,
    /// Uniform marks of the thinning simulator.
    ThinningMark,
}

impl StreamClass {
    fn tag(self) -> u64 {
        match self {
            StreamClass::NrmGap => 0x6e72_6d5f_6761_7021,
            StreamClass::ThinningGap => 0x7468_696e_6761_7021,
            StreamClass::ThinningMark => 0x7468_696e_6d72_6b21,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NoiseKey {
    pub seed: u64,
    pub interval_index: u64,
    pub channel_index: u64,
    pub stream_class: StreamClass,
}

impl NoiseKey {
    fn rng_seed(&self) -> [u8; 32] {
        let mut bytes = [0u8; 32];
        let words = [self.seed, self.interval_index, self.channel_index, self.stream_class.tag()];
        for (chunk, word) in bytes.chunks_exact_mut(8).zip(words) {
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        bytes
    }

    fn rng_at(&self, counter: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.rng_seed());
        // two 32-bit keystream words per draw
        rng.set_word_pos(u128::from(counter) * 2);
        rng
    }
}

/// The noise of one parareal interval: `(seed, interval)` with the channel
/// and stream class left open.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IntervalNoise {
    pub seed: u64,
    pub interval_index: u64,
}

impl IntervalNoise {
    pub fn new(seed: u64, interval_index: u64) -> Self {
        Self { seed, interval_index }
    }

    pub fn key(&self, channel_index: usize, stream_class: StreamClass) -> NoiseKey {
        NoiseKey {
            seed: self.seed,
            interval_index: self.interval_index,
            channel_index: channel_index as u64,
            stream_class,
        }
    }
}

#[inline]
fn to_open_unit(bits: u64) -> f64 {
    // 52 bits offset by half a step: strictly inside (0, 1), no rounding to 1
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// The `counter`-th uniform of the stream `key`, strictly inside `(0, 1)`.
pub fn uniform_at(key: NoiseKey, counter: u64) -> f64 {
    to_open_unit(key.rng_at(counter).next_u64())
}

/// Sequential reader over one stream.
#[derive(Debug, Clone)]
pub struct NoiseSource {
    key: NoiseKey,
    counter: u64,
    rng: ChaCha8Rng,
}

impl NoiseSource {
    pub fn new(key: NoiseKey) -> Self {
        Self::at(key, 0)
    }

    pub fn at(key: NoiseKey, counter: u64) -> Self {
        Self { key, counter, rng: key.rng_at(counter) }
    }

    pub fn key(&self) -> NoiseKey {
        self.key
    }

    /// Index of the next draw, equal to the number of draws taken so far
    /// when the source started at zero.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub fn next_uniform(&mut self) -> f64 {
        self.counter += 1;
        to_open_unit(self.rng.next_u64())
    }

    /// Exponential(1) gap `-ln U`.
    pub fn exponential_gap(&mut self) -> f64 {
        -self.next_uniform().ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(channel: u64) -> NoiseKey {
        NoiseKey { seed: 7, interval_index: 3, channel_index: channel, stream_class: StreamClass::NrmGap }
    }

    #[test]
    fn uniform_is_deterministic() {
        assert_eq!(uniform_at(key(0), 12).to_bits(), uniform_at(key(0), 12).to_bits());
    }

    #[test]
    fn sequential_matches_random_access() {
        let mut src = NoiseSource::new(key(2));
        for i in 0..100 {
            assert_eq!(src.next_uniform().to_bits(), uniform_at(key(2), i).to_bits());
        }
        assert_eq!(src.counter(), 100);
        let mut resumed = NoiseSource::at(key(2), 40);
        assert_eq!(resumed.next_uniform().to_bits(), uniform_at(key(2), 40).to_bits());
    }

    #[test]
    fn open_unit_interval_extremes() {
        assert!(to_open_unit(0) > 0.0);
        assert!(to_open_unit(u64::MAX) < 1.0);
    }

    #[test]
    fn uniform_mean() {
        let mut src = NoiseSource::new(key(0));
        let n = 100_000;
        let mean = (0..n).map(|_| src.next_uniform()).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.005, "mean {mean}");
    }

    #[test]
    fn channels_uncorrelated() {
        let n = 10_000;
        let mut a = NoiseSource::new(key(0));
        let mut b = NoiseSource::new(key(1));
        let pairs: Vec<(f64, f64)> = (0..n).map(|_| (a.next_uniform(), b.next_uniform())).collect();
        let (ma, mb) = pairs.iter().fold((0.0, 0.0), |(sa, sb), &(x, y)| (sa + x, sb + y));
        let (ma, mb) = (ma / n as f64, mb / n as f64);
        let cov: f64 = pairs.iter().map(|&(x, y)| (x - ma) * (y - mb)).sum::<f64>();
        let va: f64 = pairs.iter().map(|&(x, _)| (x - ma).powi(2)).sum::<f64>();
        let vb: f64 = pairs.iter().map(|&(_, y)| (y - mb).powi(2)).sum::<f64>();
        let corr = cov / (va * vb).sqrt();
        assert!(corr.abs() < 0.03, "correlation {corr}");
    }

    #[test]
    fn exponential_gaps() {
        let mut src = NoiseSource::new(key(5));
        let n = 100_000;
        let gaps: Vec<f64> = (0..n).map(|_| src.exponential_gap()).collect();
        assert!(gaps.iter().all(|&g| g > 0.0 && g.is_finite()));
        let mean = gaps.iter().sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
        let mut replay = NoiseSource::new(key(5));
        assert!(gaps.iter().take(1000).all(|g| g.to_bits() == replay.exponential_gap().to_bits()));
    }

    #[test]
    fn key_components_separate_streams() {
        let base = key(0);
        let variants = [
            NoiseKey { seed: 8, ..base },
            NoiseKey { interval_index: 4, ..base },
            NoiseKey { channel_index: 1, ..base },
            NoiseKey { stream_class: StreamClass::ThinningMark, ..base },
        ];
        for v in variants {
            assert_ne!(uniform_at(v, 0).to_bits(), uniform_at(base, 0).to_bits());
        }
    }
}
