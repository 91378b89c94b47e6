//! Seeded randomness.
//!
//! Every random decision in a run flows from one 64-bit seed. The seed is
//! split into independent named streams, each a SplitMix64 generator, so
//! that adding draws to one consumer never perturbs another. The exact
//! derivation is documented in `docs/rng.md` and must stay stable: other
//! implementations reproduce the acceptance traces from it.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer (Stafford variant 13).
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(state: u64) -> Self {
        Self { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in the closed range `[lo, hi]`.
    ///
    /// Plain modulo reduction; the bias is below 2^-32 for every span this
    /// crate draws from, and the mapping is trivial to port.
    pub fn range_inclusive(&mut self, lo: u32, hi: u32) -> u32 {
        assert!(lo <= hi, "empty range {lo}..={hi}");
        let span = u64::from(hi - lo) + 1;
        lo + (self.next_u64() % span) as u32
    }

    pub fn next_bool(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }
}

/// Consumers of the run seed. The discriminant is the stream index used in
/// the derivation and is part of the reproducibility contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Scene = 1,
    Choice = 2,
    Duration = 3,
}

/// Starting state of stream `stream` for run seed `seed`.
pub fn stream_state(seed: u64, stream: Stream) -> u64 {
    mix64(seed.wrapping_add((stream as u64).wrapping_mul(GOLDEN_GAMMA)))
}

/// The three per-consumer generators derived from one seed.
#[derive(Debug, Clone)]
pub struct SeedStreams {
    pub scene: SplitMix64,
    pub choice: SplitMix64,
    pub duration: SplitMix64,
}

impl SeedStreams {
    pub fn new(seed: u64) -> Self {
        Self {
            scene: SplitMix64::new(stream_state(seed, Stream::Scene)),
            choice: SplitMix64::new(stream_state(seed, Stream::Choice)),
            duration: SplitMix64::new(stream_state(seed, Stream::Duration)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_vector() {
        // Published SplitMix64 outputs for state 1234567.
        let mut g = SplitMix64::new(1234567);
        let expected = [
            6457827717110365317u64,
            3203168211198807973,
            9817491932198370423,
            4593380528125082431,
            16408922859458223821,
        ];
        for e in expected {
            assert_eq!(g.next_u64(), e);
        }
    }

    #[test]
    fn seed_42_reference_vector() {
        // Values from an independent implementation, also listed in docs/rng.md.
        assert_eq!(stream_state(42, Stream::Scene), 0xbdd7_3226_2feb_6e95);
        assert_eq!(stream_state(42, Stream::Choice), 0x28ef_e333_b266_f103);
        assert_eq!(stream_state(42, Stream::Duration), 0x4752_6757_130f_9f52);
        let mut s = SeedStreams::new(42);
        assert_eq!(s.duration.clone().next_u64(), 6938366530895179);
        assert_eq!(s.duration.range_inclusive(30, 300), 161);
        assert_eq!(s.scene.clone().next_u64(), 6332618229526065668);
        assert!((s.scene.next_f64() * std::f64::consts::TAU - 2.156966761003824).abs() < 1e-15);
        assert_eq!(s.choice.clone().next_u64(), 18201609923829866926);
        assert!(s.choice.next_bool());
    }

    #[test]
    fn streams_are_distinct_and_reproducible() {
        let a = SeedStreams::new(42);
        let b = SeedStreams::new(42);
        assert_eq!(a.scene, b.scene);
        assert_ne!(a.scene, a.choice);
        assert_ne!(a.choice, a.duration);
    }

    #[test]
    fn degenerate_range() {
        let mut g = SplitMix64::new(7);
        for _ in 0..100 {
            assert_eq!(g.range_inclusive(120, 120), 120);
        }
    }

    #[test]
    fn unit_interval() {
        let mut g = SplitMix64::new(99);
        for _ in 0..10_000 {
            let x = g.next_f64();
            assert!((0.0..1.0).contains(&x));
        }
    }
}
