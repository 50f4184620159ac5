//! Two-layer noisy-OR networks with hidden inputs.
//!
//! The crate covers the whole pipeline from a weighted bipartite structure to
//! its exact recovery from observed output samples:
//!
//! - [`network`]: networks, families, structural equivalence, basic blocks and
//!   their succinct names, induced subnetworks.
//! - [`distribution`]: exact all-zero and pattern probabilities in rational
//!   arithmetic, plus a brute-force joint used as an independent check.
//! - [`sampler`]: seeded generation of output draws and empirical statistics.
//! - [`poly`] and [`analysis`]: the all-zero probability as a polynomial in the
//!   input bias, identity testing, separation profiles and exhaustive checks.
//! - [`seq`]: subnetwork equivalence query oracles (structural, exact
//!   distributional, statistical).
//! - [`reconstruct`]: incremental and basic-block structure recovery.

pub mod analysis;
pub mod distribution;
pub mod error;
pub mod network;
pub mod poly;
pub mod rational;
pub mod reconstruct;
pub mod sampler;
pub mod seq;
pub mod subset;

pub use distribution::{BiasSetting, Limits};
pub use error::{Error, Result};
pub use network::{BasicBlockPartition, BlockName, Literal, NetworkFamily, NoisyOrNetwork, Subclass};
pub use poly::UnivariatePolynomial;
pub use rational::Rational;
pub use sampler::SampleSet;
