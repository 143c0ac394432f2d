//! Exact samplers for the waiting-time/jump building blocks with
//! deterministic, splittable seeding.
//!
//! ChaCha streams give reproducible parallel Monte Carlo: a `(seed, stream)`
//! pair always produces the same draw sequence, regardless of which thread
//! consumes it.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{FrechetShape, ModelSpec, StableIndex};

/// A reproducible random stream: same `(seed, stream)` gives bit-identical
/// output independent of thread scheduling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeededStream {
    pub seed: u64,
    pub stream: u64,
}

impl SeededStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(self.stream);
        r
    }
}

/// Uniform on the open interval (0, 1): rejects exact zeros so logarithms and
/// negative powers stay finite.
#[inline]
fn uniform_open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 && u < 1.0 {
            return u;
        }
    }
}

/// One draw of the positive beta-stable law normalized by
/// E[exp(-sW)] = exp(-s^beta), via Kanter's representation
/// (the one-sided Chambers-Mallows-Stuck specialization):
///
/// ```text
/// W = (sin(beta U) / sin(U)^{1/beta}) * (sin((1-beta) U) / E)^{(1-beta)/beta}
/// ```
///
/// with U uniform on (0, pi) and E standard exponential. Exact; no rejection.
pub fn sample_stable_subordinator<R: Rng + ?Sized>(beta: StableIndex, rng: &mut R) -> f64 {
    let b = beta.get();
    let u = std::f64::consts::PI * uniform_open01(rng);
    let e = -uniform_open01(rng).ln();
    let a = (b * u).sin() * u.sin().powf(-1.0 / b);
    a * (((1.0 - b) * u).sin() / e).powf((1.0 - b) / b)
}

/// One Frechet(shape) draw by inverse transform: Z = (-ln U)^{-1/shape}.
pub fn sample_frechet<R: Rng + ?Sized>(shape: FrechetShape, rng: &mut R) -> f64 {
    (-uniform_open01(rng).ln()).powf(-1.0 / shape.get())
}

/// One waiting-time/jump pair (W, J) under `model`.
pub fn sample_pair<R: Rng + ?Sized>(model: &ModelSpec, rng: &mut R) -> (f64, f64) {
    match model {
        ModelSpec::IndependentStableFrechet { beta, alpha } => {
            let w = sample_stable_subordinator(*beta, rng);
            let j = sample_frechet(*alpha, rng);
            (w, j)
        }
        ModelSpec::CoupledProductFrechet { beta, gamma } => {
            let w = sample_stable_subordinator(*beta, rng);
            let z = sample_frechet(*gamma, rng);
            (w, w.powf(1.0 / gamma.get()) * z)
        }
        ModelSpec::ExponentialIndependent { rate } => {
            let w = -uniform_open01(rng).ln() / rate;
            // standard Pareto: F_J(x) = 1 - 1/x on [1, inf)
            let j = 1.0 / uniform_open01(rng);
            (w, j)
        }
    }
}
