//! Clayton copulas with multiple risk factors: evaluation, simulation,
//! Spearman's rho, simultaneous-default probabilities and tail dependence.
//!
//! Indices in this crate are 0-based.

pub mod copula;
pub mod dependence;
pub mod error;
pub mod gammaconv;
pub mod model;
pub mod quadrature;
pub mod sampler;
pub mod specfun;
pub mod taildep;

pub use copula::{
    bivariate_cdf, classify_special_case, copula_cdf, joint_survival, marginal_survival,
    marginal_survival_inverse, SpecialCase,
};
pub use dependence::{
    simdefault_analytic, simdefault_mc, spearman_archimedean, spearman_rho, spearman_rho_numeric,
    McEstimate,
};
pub use error::{Error, ErrorClass, Result};
pub use gammaconv::Bounded;
pub use model::{BivariateParams, ExposureMatrix, FactorKind, MrfModel, RiskFactorSpec, SubsetSets};
pub use sampler::{empirical_copula, sample_copula, sample_default_times, SampleBatch, SampleKind};
pub use taildep::{
    classical_indices, estimate_tail_exponent, maximal_indices, maximal_path, tail_indices,
    MaxDependencePoint, Regime, TailIndices, TailPath,
};
