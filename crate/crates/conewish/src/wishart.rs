//! The Wishart family on the cone: density, Laplace transform, sampler,
//! and standardization.
//!
//! A model is a multiplier (one positive weight per poset element, constrained
//! by the dimensional bookkeeping) together with a scale point `sigma`. The
//! standard member has `sigma = e^chi = diag(lambda)`; its triangular factor
//! has fully independent entries, which is what the sampler exploits:
//! `t_ii^2 ~ Gamma(lambda_i - preds_i / 2, 1)` on the diagonal and
//! `t_ij ~ Normal(0, 1/2)` on the strictly-below entries. General scales are
//! reached by the triangular group action, never by reparameterizing the
//! sampler.

use crate::algebra::StructuredMatrix;
use crate::cone::{
    chi_inverse, pi_action, require_unique_paths, theta_chi, triangular_inverse, ConeError,
    ConePoint, DualPoint,
};
use crate::poset::{Poset, PosetDims};
use crate::scalar::Scalar;
use rand::Rng;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum WishartError {
    #[error("multiplier must be positive at index {index}")]
    NotPositive { index: usize },
    #[error(
        "multiplier is outside the admissible domain: lambda[{index}] = {lambda} \
         must exceed {bound}"
    )]
    InvalidMultiplier {
        index: usize,
        lambda: f64,
        bound: f64,
    },
    #[error("multiplier has {got} entries but the poset has {want}")]
    LengthMismatch { got: usize, want: usize },
    #[error(transparent)]
    Cone(#[from] ConeError),
}

/// The parameter `(lambda_i)` of a multiplier on the acting group.
#[derive(Clone, Debug, PartialEq)]
pub struct Multiplier<T> {
    lambdas: Vec<T>,
}

impl<T: Scalar> Multiplier<T> {
    pub fn new(lambdas: Vec<T>) -> Result<Self, WishartError> {
        for (index, &l) in lambdas.iter().enumerate() {
            if !(l > T::zero()) {
                return Err(WishartError::NotPositive { index });
            }
        }
        Ok(Multiplier { lambdas })
    }

    pub fn constant(value: T, n: usize) -> Result<Self, WishartError> {
        Self::new(vec![value; n])
    }

    pub fn lambdas(&self) -> &[T] {
        &self.lambdas
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Membership in the admissible domain.
    pub fn in_domain(&self, poset: &Poset) -> bool {
        self.validate(poset).is_ok()
    }

    /// Admissibility: `lambda_i > preds_i / 2` for every element.
    pub fn validate(&self, poset: &Poset) -> Result<(), WishartError> {
        if self.lambdas.len() != poset.len() {
            return Err(WishartError::LengthMismatch {
                got: self.lambdas.len(),
                want: poset.len(),
            });
        }
        let dims = poset.dims();
        for (index, &l) in self.lambdas.iter().enumerate() {
            let bound = dims.preds[index] as f64 / 2.0;
            if !(l.to_f64_lossy() > bound) {
                return Err(WishartError::InvalidMultiplier {
                    index,
                    lambda: l.to_f64_lossy(),
                    bound,
                });
            }
        }
        Ok(())
    }

    /// Gamma shapes of the squared factor diagonal under the standard member.
    pub fn gamma_shapes(&self, dims: &PosetDims) -> Vec<T> {
        self.lambdas
            .iter()
            .enumerate()
            .map(|(i, &l)| l - T::of(dims.preds[i] as f64 / 2.0))
            .collect()
    }
}

/// `e^chi = diag(lambda)`, the scale fixed by the standard member.
pub fn e_chi<T: Scalar>(chi: &Multiplier<T>, poset: &Arc<Poset>) -> ConePoint<T> {
    let sqrt: Vec<T> = chi.lambdas().iter().map(|&l| l.sqrt()).collect();
    ConePoint::from_factor(StructuredMatrix::diagonal(poset, &sqrt))
}

/// Draws from the standard member: independent factor entries, then `T T*`.
pub fn sample_standard<T: Scalar, R: Rng + ?Sized>(
    chi: &Multiplier<T>,
    poset: &Arc<Poset>,
    rng: &mut R,
) -> Result<ConePoint<T>, WishartError> {
    chi.validate(poset)?;
    require_unique_paths(poset)?;
    Ok(sample_standard_unchecked(chi, poset, rng))
}

pub(crate) fn sample_standard_unchecked<T: Scalar, R: Rng + ?Sized>(
    chi: &Multiplier<T>,
    poset: &Arc<Poset>,
    rng: &mut R,
) -> ConePoint<T> {
    let dims = poset.dims();
    let shapes = chi.gamma_shapes(&dims);
    let mut t = StructuredMatrix::zeros(poset);
    let half_sd = T::of(0.5).sqrt();
    for i in 0..poset.len() {
        t.set(i, i, T::sample_gamma(rng, shapes[i], T::one()).sqrt());
        for j in 0..i {
            if poset.lt(j, i) {
                t.set(i, j, T::sample_normal(rng, T::zero(), half_sd));
            }
        }
    }
    ConePoint::from_factor(t)
}

/// A Wishart model: multiplier and scale, with the deformed inverse and the
/// log-normalizer cached.
#[derive(Clone, Debug)]
pub struct WishartModel<T> {
    poset: Arc<Poset>,
    chi: Multiplier<T>,
    sigma: ConePoint<T>,
    sigma_chi_inverse: DualPoint<T>,
    dims: PosetDims,
    log_normalizer: T,
}

impl<T: Scalar> WishartModel<T> {
    pub fn new(chi: Multiplier<T>, sigma: ConePoint<T>) -> Result<Self, WishartError> {
        let poset = Arc::clone(sigma.poset());
        chi.validate(&poset)?;
        require_unique_paths(&poset)?;
        let dims = poset.dims();
        let sigma_chi_inverse = chi_inverse(&sigma, chi.lambdas());
        let n = poset.len() as f64;
        let mut log_norm = T::of((n - dims.n_total) / 2.0 * std::f64::consts::PI.ln());
        for (i, &l) in chi.lambdas().iter().enumerate() {
            log_norm += l * l.ln();
            log_norm -= (l - T::of(dims.preds[i] as f64 / 2.0)).ln_gamma();
            log_norm -= l * sigma.generalized_power(i).ln();
        }
        Ok(WishartModel {
            poset,
            chi,
            sigma,
            sigma_chi_inverse,
            dims,
            log_normalizer: log_norm,
        })
    }

    /// The standard member, with scale `e^chi`.
    pub fn standard(chi: Multiplier<T>, poset: &Arc<Poset>) -> Result<Self, WishartError> {
        chi.validate(poset)?;
        require_unique_paths(poset)?;
        let sigma = e_chi(&chi, poset);
        Self::new(chi, sigma)
    }

    pub fn poset(&self) -> &Arc<Poset> {
        &self.poset
    }

    pub fn chi(&self) -> &Multiplier<T> {
        &self.chi
    }

    pub fn sigma(&self) -> &ConePoint<T> {
        &self.sigma
    }

    /// The cached `sigma^{-chi}`, the natural parameter of the family.
    pub fn sigma_chi_inverse(&self) -> &DualPoint<T> {
        &self.sigma_chi_inverse
    }

    pub fn log_density(&self, x: &ConePoint<T>) -> T {
        let mut acc = self.log_normalizer;
        for (i, &l) in self.chi.lambdas().iter().enumerate() {
            let exponent = l - T::of(self.dims.n_i[i]);
            acc += exponent * x.generalized_power(i).ln();
        }
        acc - self.sigma_chi_inverse.matrix().trace_product(x.matrix())
    }

    pub fn density(&self, x: &ConePoint<T>) -> T {
        self.log_density(x).exp()
    }

    /// Analytic Laplace transform at a Hermitian `theta` (zero allowed):
    /// the product of generalized powers of `(theta + sigma^{-chi})^chi`
    /// against those of `sigma`.
    pub fn laplace_transform(&self, theta: &StructuredMatrix<T>) -> Result<T, ConeError> {
        let shifted = theta.add(self.sigma_chi_inverse.matrix());
        let dual = DualPoint::decompose(&shifted)?;
        let point = theta_chi(&dual, self.chi.lambdas());
        let mut log_l = T::zero();
        for (i, &l) in self.chi.lambdas().iter().enumerate() {
            log_l += l * (point.generalized_power(i).ln() - self.sigma.generalized_power(i).ln());
        }
        Ok(log_l.exp())
    }

    /// The triangular transform of the standardizing map
    /// `rho = pi(sqrt(diag(lambda)) T^{-1})` for `sigma = T T*`.
    pub fn standardizing_transform(&self) -> StructuredMatrix<T> {
        let t_inv = triangular_inverse(&self.sigma.factor().t_plus());
        scale_rows_by_sqrt(&t_inv, self.chi.lambdas())
    }

    /// Moves a draw of this model onto the standard member.
    pub fn standardize(&self, x: &ConePoint<T>) -> ConePoint<T> {
        pi_action(&self.standardizing_transform(), x)
    }

    /// The inverse transform `rho^{-1} = pi(T sqrt(diag(lambda))^{-1})`.
    pub fn destandardizing_transform(&self) -> StructuredMatrix<T> {
        let inv_sqrt: Vec<T> = self.chi.lambdas().iter().map(|&l| T::one() / l).collect();
        scale_cols_by_sqrt(&self.sigma.factor().t_plus(), &inv_sqrt)
    }

    /// Draws from the model: a standard draw pushed through `rho^{-1}`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ConePoint<T> {
        let standard = sample_standard_unchecked(&self.chi, &self.poset, rng);
        pi_action(&self.destandardizing_transform(), &standard)
    }
}

fn scale_rows_by_sqrt<T: Scalar>(m: &StructuredMatrix<T>, factors: &[T]) -> StructuredMatrix<T> {
    let mut out = m.clone();
    for i in 0..m.len() {
        let s = factors[i].sqrt();
        for j in 0..=i {
            if m.poset().leq(j, i) {
                out.set(i, j, m.get(i, j) * s);
            }
        }
    }
    out
}

fn scale_cols_by_sqrt<T: Scalar>(m: &StructuredMatrix<T>, factors: &[T]) -> StructuredMatrix<T> {
    let mut out = m.clone();
    for j in 0..m.len() {
        let s = factors[j].sqrt();
        for i in j..m.len() {
            if m.poset().leq(j, i) {
                out.set(i, j, m.get(i, j) * s);
            }
        }
    }
    out
}
