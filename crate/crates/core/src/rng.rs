//! Fixed, in-repo pseudo-random source.
//!
//! The generator is SplitMix64 (Steele, Lea & Flood, "Fast splittable
//! pseudorandom number generators", OOPSLA 2014): a 64-bit counter
//! advanced by the golden-gamma constant and finalized with a
//! variant of the MurmurHash3 mixer. It is implemented here rather than
//! pulled from a platform RNG so that a seed replays the same draw
//! sequence on every platform and in every language port.

/// Deterministic 64-bit generator. One instance drives a whole run;
/// draws happen in event-processing order.
#[derive(Debug, Clone)]
pub struct DetRng {
    state: u64,
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl DetRng {
    pub fn new(seed: u64) -> Self {
        DetRng { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform integer in `[lo, hi]`, inclusive. Always consumes at least
    /// one draw. Unbiased: draws are masked to the smallest covering
    /// power of two and rejected while above the range.
    ///
    /// `lo > hi` is a caller logic error and panics.
    pub fn rand_int(&mut self, lo: u64, hi: u64) -> u64 {
        assert!(lo <= hi, "rand_int: empty range [{lo}, {hi}]");
        let span = hi - lo; // inclusive span - 1
        if span == u64::MAX {
            return self.next_u64();
        }
        let range = span + 1;
        let mask = range.next_power_of_two().wrapping_sub(1);
        loop {
            let v = self.next_u64() & mask;
            if v < range {
                return lo + v;
            }
        }
    }
}

/// Derives an independent child seed from a root seed and a label.
///
/// The label is folded with FNV-1a and the result passed through the
/// SplitMix64 finalizer, so differently-labelled streams share no
/// structure with each other or with the root stream.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = FNV_OFFSET;
    for b in label.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    mix64(seed ^ h)
}
