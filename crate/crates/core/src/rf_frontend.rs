//! Device RF front end: memoryless PA nonlinearity `psi(s) = alpha*s / (1 + beta*s^2)`.
//!
//! The pulse is rectangular and the nonlinearity memoryless, so the
//! impairment acts on the symbol amplitude directly.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_ALPHA: f64 = 2.1587;
pub const DEFAULT_BETA: f64 = 1.1417;
/// Relative half-width of the uniform parameter spread around the defaults.
pub const DEFAULT_SPREAD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceProfile {
    pub device_id: u32,
    pub alpha: f64,
    pub beta: f64,
    pub legitimate: bool,
}

impl DeviceProfile {
    pub fn nominal(device_id: u32, legitimate: bool) -> Self {
        Self {
            device_id,
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            legitimate,
        }
    }
}

/// Applies the PA nonlinearity of `profile` to a baseband amplitude.
pub fn distort(amplitude: f64, profile: &DeviceProfile) -> f64 {
    profile.alpha * amplitude / (1.0 + profile.beta * amplitude * amplitude)
}

/// Impairment-free front end.
pub fn ideal_passthrough(amplitude: f64) -> f64 {
    amplitude
}

/// Distribution of PA parameters across a device population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationModel {
    pub alpha: f64,
    pub beta: f64,
    pub spread: f64,
    /// Draw alpha and beta from one shared uniform variate instead of two.
    pub correlated: bool,
}

impl Default for PopulationModel {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            spread: DEFAULT_SPREAD,
            correlated: false,
        }
    }
}

impl PopulationModel {
    pub fn alpha_range(&self) -> (f64, f64) {
        (self.alpha * (1.0 - self.spread), self.alpha * (1.0 + self.spread))
    }

    pub fn beta_range(&self) -> (f64, f64) {
        (self.beta * (1.0 - self.spread), self.beta * (1.0 + self.spread))
    }

    /// Draws one profile. Device ids and the legitimacy flag are the caller's.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, device_id: u32, legitimate: bool) -> DeviceProfile {
        let (a_lo, a_hi) = self.alpha_range();
        let (b_lo, b_hi) = self.beta_range();
        let u: f64 = rng.random();
        let v: f64 = if self.correlated { u } else { rng.random() };
        DeviceProfile {
            device_id,
            alpha: a_lo + (a_hi - a_lo) * u,
            beta: b_lo + (b_hi - b_lo) * v,
            legitimate,
        }
    }
}

/// Samples `count` legitimate device profiles with ids `0..count` from the
/// default population.
pub fn sample_population(count: usize, seed: u64) -> Vec<DeviceProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = PopulationModel::default();
    (0..count)
        .map(|id| model.draw(&mut rng, id as u32, true))
        .collect()
}
