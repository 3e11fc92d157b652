//! Counter-based random streams.
//!
//! Every draw is a pure function of `(master_seed, path_index, tag, counter)`,
//! so a noise mode consumes the identical increments no matter which
//! truncation level asks for it, and paths can be generated concurrently
//! without any shared state. The mixer is the splitmix64 finalizer, chained
//! over the key components.

/// splitmix64 finalizer: a bijective 64-bit mixer with full avalanche.
#[inline]
pub const fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
const fn chain(h: u64, v: u64) -> u64 {
    mix64(
        h ^ v
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(0x2545_f491_4f6c_dd1d),
    )
}

/// What a stream is for. Distinct tags give statistically independent streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StreamTag {
    /// Brownian increments of one noise mode (1-based).
    NoiseMode(u64),
    /// Auxiliary draws (initial data randomization, diagnostics, ...).
    Purpose(u64),
}

/// Identifies one independent stream of standard-normal draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub master_seed: u64,
    pub path_index: u64,
    pub tag: StreamTag,
}

impl StreamKey {
    pub fn noise_mode(master_seed: u64, path_index: u64, mode: usize) -> Self {
        StreamKey {
            master_seed,
            path_index,
            tag: StreamTag::NoiseMode(mode as u64),
        }
    }

    pub fn purpose(master_seed: u64, path_index: u64, id: u64) -> Self {
        StreamKey {
            master_seed,
            path_index,
            tag: StreamTag::Purpose(id),
        }
    }

    fn state(&self) -> u64 {
        let h = chain(mix64(self.master_seed), self.path_index);
        match self.tag {
            StreamTag::NoiseMode(m) => chain(chain(h, 0x01), m),
            StreamTag::Purpose(p) => chain(chain(h, 0x02), p),
        }
    }
}

/// A stream of independent `N(0,1)` draws, addressable by index.
#[derive(Clone, Debug)]
pub struct NormalStream {
    state: u64,
    counter: u64,
}

/// Build the draw source for a key. Deterministic: the same key always
/// yields the same stream.
pub fn derive_stream(key: StreamKey) -> NormalStream {
    NormalStream {
        state: key.state(),
        counter: 0,
    }
}

impl NormalStream {
    /// Uniform in (0,1), never exactly 0 or 1.
    #[inline]
    fn uniform_at(&self, counter: u64) -> f64 {
        let bits = chain(self.state, counter);
        ((bits >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
    }

    /// The `index`-th standard-normal draw of this stream (random access).
    #[inline]
    pub fn normal_at(&self, index: u64) -> f64 {
        // Box-Muller, cosine branch only; two uniforms per draw keeps the
        // stream addressable without carry-over state.
        let u1 = self.uniform_at(2 * index);
        let u2 = self.uniform_at(2 * index + 1);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Next sequential draw.
    pub fn next_normal(&mut self) -> f64 {
        let z = self.normal_at(self.counter);
        self.counter += 1;
        z
    }
}
