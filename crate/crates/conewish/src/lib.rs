//! Matrix algebras over finite posets, the homogeneous cones they generate,
//! and the Wishart family on those cones.
//!
//! The building blocks, bottom up:
//!
//! - [`poset`]: finite posets from cover relations, the unique-Hasse-path
//!   condition, sources, separators, and dimensional bookkeeping;
//! - [`algebra`]: structured matrices with the comparability mask, the
//!   masked product, involution, trace, and the six-axiom checker;
//! - [`cone`]: generalized Cholesky factorization, generalized powers,
//!   triangular group action, division, the deformed inverse maps between
//!   the cone and its dual, component decomposition, and up-set restriction;
//! - [`wishart`]: multipliers, density, Laplace transform, the
//!   independent-entry sampler of the standard member, standardization;
//! - [`characterize`]: the Monte-Carlo suite checking entry independence,
//!   quotient invariance, sum/quotient independence, and component blocks.
//!
//! Everything numeric is generic over [`scalar::Scalar`]; the `F64` aliases
//! below are the concrete types the CLI and the test suites use.

pub mod algebra;
pub mod characterize;
pub mod cone;
pub mod io;
pub mod linalg;
pub mod poset;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod wishart;

pub use poset::Poset;
pub use scalar::Scalar;

pub type StructuredMatrixF64 = algebra::StructuredMatrix<f64>;
pub type TriangularFactorF64 = cone::TriangularFactor<f64>;
pub type ConePointF64 = cone::ConePoint<f64>;
pub type DualPointF64 = cone::DualPoint<f64>;
pub type MultiplierF64 = wishart::Multiplier<f64>;
pub type WishartModelF64 = wishart::WishartModel<f64>;

pub type StructuredMatrixF32 = algebra::StructuredMatrix<f32>;
pub type ConePointF32 = cone::ConePoint<f32>;
pub type MultiplierF32 = wishart::Multiplier<f32>;
pub type WishartModelF32 = wishart::WishartModel<f32>;
