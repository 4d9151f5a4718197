//! Small deterministic random source.
//!
//! Certificate verification and test instance generation must be exactly
//! reproducible from a seed across platforms, so we use a fixed splitmix64
//! stream instead of an external RNG crate.

use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct SampleRng {
    state: u64,
}

impl SampleRng {
    pub fn new(seed: u64) -> Self {
        Self {
            state: seed.wrapping_add(0x9e37_79b9_7f4a_7c15),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [-1, 1) x [-1, 1) on both components.
    pub fn next_complex(&mut self) -> Complex64 {
        Complex64::new(
            2.0 * self.next_f64() - 1.0,
            2.0 * self.next_f64() - 1.0,
        )
    }

    /// Area-uniform sample from the annulus r_min <= |z| <= r_max.
    pub fn next_annulus(&mut self, r_min: f64, r_max: f64) -> Complex64 {
        let u = self.next_f64();
        let r = (r_min * r_min + u * (r_max * r_max - r_min * r_min)).sqrt();
        let theta = 2.0 * std::f64::consts::PI * self.next_f64();
        Complex64::from_polar(r, theta)
    }
}
