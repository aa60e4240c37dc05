//! Scalar abstraction for the algebra and cone machinery.
//!
//! Everything numeric in this crate is generic over [`Scalar`], which is a
//! floating-point type plus the handful of special functions and sampling
//! primitives the Wishart family needs. `f64` is the type you want for the
//! documented tolerances; `f32` is supported for completeness.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar usable throughout the crate.
pub trait Scalar:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + num_traits::NumAssign
    + Sum
    + Send
    + Sync
    + Debug
    + Display
    + 'static
{
    /// Natural log of the gamma function.
    fn ln_gamma(self) -> Self;

    /// Draw from Gamma(shape, rate) with the shape/rate parameterization.
    fn sample_gamma<R: Rng + ?Sized>(rng: &mut R, shape: Self, rate: Self) -> Self;

    /// Draw from Normal(mean, sd).
    fn sample_normal<R: Rng + ?Sized>(rng: &mut R, mean: Self, sd: Self) -> Self;

    /// Lossy conversion from f64, for tolerances and literals.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts to any Scalar")
    }

    /// Lossy conversion to f64, for reporting and statistics.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }
}

impl Scalar for f64 {
    fn ln_gamma(self) -> Self {
        statrs::function::gamma::ln_gamma(self)
    }

    fn sample_gamma<R: Rng + ?Sized>(rng: &mut R, shape: Self, rate: Self) -> Self {
        Gamma::new(shape, 1.0 / rate)
            .expect("gamma parameters must be positive")
            .sample(rng)
    }

    fn sample_normal<R: Rng + ?Sized>(rng: &mut R, mean: Self, sd: Self) -> Self {
        Normal::new(mean, sd)
            .expect("normal sd must be finite")
            .sample(rng)
    }
}

impl Scalar for f32 {
    fn ln_gamma(self) -> Self {
        statrs::function::gamma::ln_gamma(self as f64) as f32
    }

    fn sample_gamma<R: Rng + ?Sized>(rng: &mut R, shape: Self, rate: Self) -> Self {
        Gamma::new(shape, 1.0 / rate)
            .expect("gamma parameters must be positive")
            .sample(rng)
    }

    fn sample_normal<R: Rng + ?Sized>(rng: &mut R, mean: Self, sd: Self) -> Self {
        Normal::new(mean, sd)
            .expect("normal sd must be finite")
            .sample(rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_known_values() {
        assert!((Scalar::ln_gamma(1.0f64) - 0.0).abs() < 1e-14);
        assert!((Scalar::ln_gamma(5.0f64) - 24.0f64.ln()).abs() < 1e-12);
        // Gamma(1/2) = sqrt(pi)
        assert!((Scalar::ln_gamma(0.5f64) - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-12);
    }

    #[test]
    fn gamma_sampler_moments() {
        let mut rng = crate::rng::stream(7, 0);
        let n = 40_000;
        let (shape, rate) = (2.5f64, 2.0f64);
        let mean: f64 = (0..n)
            .map(|_| f64::sample_gamma(&mut rng, shape, rate))
            .sum::<f64>()
            / n as f64;
        // E = shape/rate = 1.25, sd of the mean ~ sqrt(shape)/rate/sqrt(n) ~ 0.004
        assert!((mean - 1.25).abs() < 0.02, "mean {mean}");
    }
}
