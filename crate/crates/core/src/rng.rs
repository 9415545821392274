//! Deterministic random number generation.
//!
//! Everything stochastic in the simulator — payload bits and noise — comes
//! from the splitmix64 generator pinned here, so identical seeds reproduce
//! identical waveforms across platforms and runs. Gaussian variates are
//! derived with the Box–Muller transform in a documented consumption order.

/// splitmix64: a tiny, fast, well-mixed 64-bit generator.
///
/// The update and output constants follow the reference implementation;
/// the unit tests pin known-answer outputs so any deviation is caught.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    /// Seeds the generator. Any 64-bit value is a valid seed.
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Next 64-bit output.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// One payload bit: the most significant bit of the next output.
    pub fn next_bit(&mut self) -> u8 {
        (self.next_u64() >> 63) as u8
    }

    /// Uniform double in the half-open interval [0, 1), using the top 53 bits.
    fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Two independent standard-normal variates via Box–Muller.
    ///
    /// Consumption order is part of the determinism contract: the first
    /// 64-bit draw feeds the radius (shifted into (0, 1] so the logarithm is
    /// finite), the second feeds the angle, and the cosine branch is
    /// returned first.
    pub fn next_gaussian_pair(&mut self) -> (f64, f64) {
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        (r * angle.cos(), r * angle.sin())
    }
}
