//! Counter-based, splittable random streams.
//!
//! Every random quantity in the crate is a pure function of a 64-bit key and
//! a counter: `draw(key, i) = mix(key, i)`. Two consequences matter here:
//!
//! - a trial's stream depends only on its derived key, never on which worker
//!   thread ran it or in what order, so sweeps are bit-identical for any
//!   thread count;
//! - vertex fitness values can be evaluated lazily by vertex label without
//!   materializing `2^N` draws, which is what makes `N = 30` fields usable.
//!
//! The mixing function is the SplitMix64 finalizer (Stafford's "Mix13").

use rand_core::{impls, RngCore, SeedableRng};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output finalizer; a bijection on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The `counter`-th 64-bit draw of the stream identified by `key`.
#[inline]
pub fn draw_u64(key: u64, counter: u64) -> u64 {
    mix64(key ^ mix64(counter.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Maps 64 random bits to a double in `[0, 1)` with 53 bits of resolution.
#[inline]
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform `[0, 1)` draw at position `counter` of stream `key`.
#[inline]
pub fn draw_unit(key: u64, counter: u64) -> f64 {
    unit_f64(draw_u64(key, counter))
}

/// Derives a substream key from a master seed and a path of indices,
/// e.g. `derive_key(master, &[n, offset_index, trial_index])`.
pub fn derive_key(master: u64, path: &[u64]) -> u64 {
    let mut h = mix64(master ^ 0x6A09_E667_F3BC_C909);
    for (depth, &part) in path.iter().enumerate() {
        let salt = (depth as u64 + 1).wrapping_mul(GOLDEN_GAMMA);
        h = mix64(h ^ mix64(part.wrapping_add(salt)));
    }
    h
}

/// Sequential view of a counter-based stream, usable with any `rand`
/// distribution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(key: u64) -> Self {
        Self { key, counter: 0 }
    }

    pub fn from_path(master: u64, path: &[u64]) -> Self {
        Self::new(derive_key(master, path))
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    pub fn position(&self) -> u64 {
        self.counter
    }

    /// Independent child stream; does not advance `self`.
    pub fn split(&self, id: u64) -> Self {
        Self::new(derive_key(self.key, &[id]))
    }

    #[inline]
    pub fn next_unit(&mut self) -> f64 {
        unit_f64(self.next_u64())
    }
}

impl RngCore for CounterRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        let v = draw_u64(self.key, self.counter);
        self.counter = self.counter.wrapping_add(1);
        v
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        impls::fill_bytes_via_next(self, dst)
    }
}

impl SeedableRng for CounterRng {
    type Seed = [u8; 8];

    fn from_seed(seed: Self::Seed) -> Self {
        Self::new(u64::from_le_bytes(seed))
    }

    fn seed_from_u64(state: u64) -> Self {
        Self::new(state)
    }
}
