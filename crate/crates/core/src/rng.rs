//! Deterministic random source: xoshiro256++ seeded through splitmix64,
//! with Box-Muller Gaussians. Same seed, same platform: identical draws.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// One splitmix64 step: advance by the golden-ratio increment, then mix.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of a named sub-stream. Distinct stream ids give
/// statistically independent generators for the same master seed, so
/// consumers (init, shuffling, noise, pairing, scoring) cannot perturb
/// each other's draw sequences.
pub fn substream_seed(master: u64, stream: u64) -> u64 {
    let mut s = master;
    let mixed = splitmix64(&mut s) ^ stream.wrapping_mul(GOLDEN);
    let mut s2 = mixed;
    splitmix64(&mut s2)
}

/// Stream ids used by the training/scoring pipeline.
pub mod streams {
    pub const INIT: u64 = 1;
    pub const SHUFFLE: u64 = 2;
    pub const NOISE: u64 = 3;
    pub const PAIR: u64 = 4;
    pub const SCORE: u64 = 5;
    pub const SPLIT: u64 = 6;
}

/// xoshiro256++ generator with a cached Box-Muller spare. Single-owner:
/// clone-free handoff keeps every draw attributable to one stream.
#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    s: [u64; 4],
    spare: Option<f64>,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let mut s = [0u64; 4];
        for slot in &mut s {
            *slot = splitmix64(&mut sm);
        }
        if s == [0, 0, 0, 0] {
            s[0] = 1; // xoshiro state must not be all zero
        }
        RandomSource { seed, s, spare: None }
    }

    /// Generator for a named sub-stream of `master`.
    pub fn substream(master: u64, stream: u64) -> Self {
        RandomSource::new(substream_seed(master, stream))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[0]
            .wrapping_add(s[3])
            .rotate_left(23)
            .wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform draw in [0, 1) with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform index in [0, n). Modulo reduction; the bias is below n/2^64,
    /// far beneath observability at the sizes used here.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0) is undefined");
        (self.next_u64() % n as u64) as usize
    }

    /// One standard normal draw (Box-Muller, cached second draw).
    pub fn next_gauss(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps ln finite; u2 in [0, 1).
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (sin, cos) = (2.0 * std::f64::consts::PI * u2).sin_cos();
        self.spare = Some(r * sin);
        r * cos
    }

    /// n independent standard normal draws; n must be at least 1.
    pub fn gauss(&mut self, n: usize) -> Vec<f64> {
        assert!(n >= 1, "gauss(0) is disallowed");
        (0..n).map(|_| self.next_gauss()).collect()
    }

    pub fn fill_gauss(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.next_gauss();
        }
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.below(i + 1);
            xs.swap(i, j);
        }
    }
}
