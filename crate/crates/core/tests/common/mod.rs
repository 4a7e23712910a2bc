#![allow(dead_code)]

use eit4::{DecayRates, RabiFields};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const G3: f64 = 1.2e8;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

/// Rates and Rabi magnitudes log-uniform in [1e6, 1e9] s⁻¹, uniform phases.
pub fn random_set<R: Rng>(rng: &mut R) -> (DecayRates, RabiFields) {
    let mut rate = || log_uniform(rng, 1e6, 1e9);
    let decay = DecayRates::new(rate(), rate(), rate()).unwrap();
    let mags = [rate(), rate(), rate()];
    let tau = std::f64::consts::TAU;
    let phases: [f64; 3] = std::array::from_fn(|_| rng.random::<f64>() * tau);
    let fields = RabiFields::from_polar(
        (mags[0], phases[0]),
        (mags[1], phases[1]),
        (mags[2], phases[2]),
    )
    .unwrap();
    (decay, fields)
}

pub fn reference() -> (DecayRates, RabiFields) {
    (
        DecayRates::SODIUM,
        RabiFields::real(4.0 * G3, 0.04 * G3, 0.4 * G3),
    )
}
