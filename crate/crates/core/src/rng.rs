//! Deterministic seedable random streams.
//!
//! Every random decision in the engine flows from a single run seed through
//! named sub-streams, so that a run is a pure function of its seed and the
//! worker count. The generator is a self-contained splitmix64/xoshiro256**
//! pair: no platform or dependency drift can change the draw sequence.

/// splitmix64 step, used for seeding and for one-shot hashing.
#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes an arbitrary sequence of words into a single 64-bit value.
pub fn mix64(words: &[u64]) -> u64 {
    let mut state = 0x51_7c_c1_b7_27_22_0a_95u64;
    for &w in words {
        state ^= w;
        state = splitmix64(&mut state);
    }
    splitmix64(&mut state)
}

/// A deterministic random stream (xoshiro256**) with a draw counter.
///
/// The counter feeds mutation audit records: every accepted mutation reports
/// how many draws it consumed, which pins down replays exactly.
#[derive(Debug, Clone)]
pub struct Stream {
    s: [u64; 4],
    draws: u64,
}

impl Stream {
    /// Stream seeded directly from a 64-bit value.
    pub fn seed_from(seed: u64) -> Self {
        let mut sm = seed;
        let s = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Stream { s, draws: 0 }
    }

    /// Derives a named sub-stream, e.g. per tournament or per founder.
    pub fn derive(root_seed: u64, label: &str, index: u64) -> Self {
        let mut words = [0u64; 8];
        words[0] = root_seed;
        words[1] = index;
        let bytes = label.as_bytes();
        for (i, chunk) in bytes.chunks(8).take(6).enumerate() {
            let mut w = [0u8; 8];
            w[..chunk.len()].copy_from_slice(chunk);
            words[2 + i] = u64::from_le_bytes(w);
        }
        Stream::seed_from(mix64(&words))
    }

    /// Number of draws consumed so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.draws += 1;
        let s = &mut self.s;
        let result = s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform integer in `[0, n)` via Lemire's unbiased method.
    pub fn next_below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        let mut x = self.next_u64();
        let mut m = (x as u128) * (n as u128);
        let mut lo = m as u64;
        if lo < n {
            let threshold = n.wrapping_neg() % n;
            while lo < threshold {
                x = self.next_u64();
                m = (x as u128) * (n as u128);
                lo = m as u64;
            }
        }
        (m >> 64) as u64
    }

    /// Uniform f64 in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform f64 in `[lo, hi)`.
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Picks one element of a slice uniformly.
    pub fn choose<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.next_below(items.len() as u64) as usize]
    }

    /// Picks one element uniformly, excluding any equal to `current`.
    pub fn choose_other<'a, T: PartialEq>(&mut self, items: &'a [T], current: &T) -> &'a T {
        loop {
            let pick = self.choose(items);
            if pick != current {
                return pick;
            }
        }
    }

    /// Samples `k` distinct indices from `[0, n)` uniformly without replacement.
    pub fn sample_indices(&mut self, n: usize, k: usize, out: &mut alloc::vec::Vec<usize>) {
        debug_assert!(k <= n);
        out.clear();
        while out.len() < k {
            let idx = self.next_below(n as u64) as usize;
            if !out.contains(&idx) {
                out.push(idx);
            }
        }
    }
}
