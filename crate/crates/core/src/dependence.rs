//! Spearman's rho of bivariate margins and probabilities of simultaneous
//! default within a sub-portfolio.

use rayon::prelude::*;
use serde::Serialize;

use crate::copula::bivariate_cdf_unchecked;
use crate::error::{Error, Result};
use crate::gammaconv::{self, Bounded, GammaComponent};
use crate::model::{BivariateParams, MrfModel};
use crate::quadrature::{integrate, QuadOptions};
use crate::sampler::{draw_frailties, draw_rng, factor_laws, SampleBatch};
use crate::specfun::{hyp_pfq, Acceleration, HypergeometricSpec};

const RHO_SLACK: f64 = 1e-10;
/// Term budget for plain summation before switching to acceleration.
const PLAIN_TERMS: usize = 10_000;

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub draws: usize,
}

impl McEstimate {
    fn from_values(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            std_error: (var / n).sqrt(),
            draws: values.len(),
        }
    }
}

/// Sums a series at `z = -1`, switching to alternating-series acceleration
/// when plain summation runs out of terms.
fn alternating_sum(spec: HypergeometricSpec) -> Result<f64> {
    match hyp_pfq(&spec.clone().max_terms(PLAIN_TERMS)) {
        Err(Error::NoConvergence { .. }) => {
            log::debug!("plain summation stalled; using accelerated summation");
            hyp_pfq(&spec.acceleration(Acceleration::Alternating))
        }
        other => other,
    }
}

fn clip_rho(rho: f64) -> Result<f64> {
    if !(-RHO_SLACK..=1.0 + RHO_SLACK).contains(&rho) {
        return Err(Error::NoConvergence {
            what: "spearman rho outside [0, 1]",
            iterations: 0,
        });
    }
    Ok(rho.clamp(0.0, 1.0))
}

/// Closed-form Spearman's rho
/// `ρ = (6/b)(ξ_k h(ξ_i) + ξ_i h(ξ_k)) − 3`, `b = 2ξ_i + 2ξ_k − ξ_common`,
/// `h(x) = ₃F₂(2x, 1, γ; 2x+1, b+1; −1)`.
pub fn spearman_rho(p: &BivariateParams) -> Result<f64> {
    let (xi_i, xi_k) = (p.xi_i(), p.xi_k());
    let b = 2.0 * xi_i + 2.0 * xi_k - p.xi_common();
    let h = |x: f64| {
        alternating_sum(HypergeometricSpec::new(
            &[2.0 * x, 1.0, p.gamma_common],
            &[2.0 * x + 1.0, b + 1.0],
            -1.0,
        ))
    };
    let rho = 6.0 / b * (xi_k * h(xi_i)? + xi_i * h(xi_k)?) - 3.0;
    clip_rho(rho)
}

/// `12 ∬ C(u, v) du dv − 3` by nested adaptive quadrature, with the kink
/// `u^{1/ξ_i} = v^{1/ξ_k}` as a panel boundary of every inner integral.
pub fn spearman_rho_numeric(p: &BivariateParams, tol: f64) -> Result<f64> {
    if !(tol >= 1e-10) {
        return Err(Error::InvalidTolerance(tol));
    }
    let inner_opts = QuadOptions {
        abs_tol: tol * 1e-2,
        rel_tol: 0.0,
        max_intervals: 4000,
    };
    let outer_opts = QuadOptions {
        abs_tol: tol / 24.0,
        rel_tol: 0.0,
        max_intervals: 4000,
    };
    let ratio = p.xi_k() / p.xi_i();
    let kinked = p.alpha_common > 0.0;
    let mut failure = None;
    let outer = integrate(
        |u| {
            if u == 0.0 {
                return 0.0;
            }
            let breaks = if kinked { vec![u.powf(ratio)] } else { Vec::new() };
            match integrate(|v| bivariate_cdf_unchecked(p, u, v), 0.0, 1.0, &breaks, inner_opts) {
                Ok(r) => r.value,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        0.0,
        1.0,
        &[],
        outer_opts,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(12.0 * outer?.value - 3.0)
}

/// Archimedean special case (`α = 0`):
/// `ρ = 3[₃F₂(1, 1, γ; 2ξ_i+1, 2ξ_k+1; 1) − 1]`.
pub fn spearman_archimedean(p: &BivariateParams) -> Result<f64> {
    if p.alpha_common != 0.0 {
        return Err(Error::PreconditionViolated(format!(
            "archimedean form needs no shared comonotone shape, got {}",
            p.alpha_common
        )));
    }
    let f = hyp_pfq(&HypergeometricSpec::new(
        &[1.0, 1.0, p.gamma_common],
        &[2.0 * p.xi_i() + 1.0, 2.0 * p.xi_k() + 1.0],
        1.0,
    ))?;
    Ok(3.0 * (f - 1.0))
}

/// Marshall–Olkin special case (`γ = 0`): `ρ = 3α/(2ξ_i + 2ξ_k − α)`.
pub fn spearman_marshall_olkin(p: &BivariateParams) -> Result<f64> {
    if p.gamma_common != 0.0 {
        return Err(Error::PreconditionViolated(format!(
            "Marshall-Olkin form needs no shared independent shape, got {}",
            p.gamma_common
        )));
    }
    let a = p.alpha_common;
    Ok(3.0 * a / (2.0 * p.xi_i() + 2.0 * p.xi_k() - a))
}

/// Pairwise [`spearman_rho`] over all components, with ones on the diagonal.
pub fn spearman_matrix(model: &MrfModel) -> Result<Vec<Vec<f64>>> {
    let n = model.dim();
    let mut out = vec![vec![1.0; n]; n];
    for i in 0..n {
        for k in i + 1..n {
            let rho = spearman_rho(&model.bivariate_params(i, k)?)?;
            out[i][k] = rho;
            out[k][i] = rho;
        }
    }
    Ok(out)
}

fn check_subset(model: &MrfModel, subset: &[usize]) -> Result<crate::model::SubsetSets> {
    if subset.len() < 2 {
        return Err(Error::SubsetTooSmall {
            min: 2,
            found: subset.len(),
        });
    }
    model.factor_sets(subset)
}

/// Probability that every member of `subset` defaults at the same instant.
///
/// The members default together exactly when the first arrival among the
/// factors hitting them comes from a comonotone factor they all share, which
/// gives `E[Λ_common / (Σ_{comonotone j} Λ_j + Σ_{independent j} r_j Λ_j)]`
/// with `r_j` the number of members hit by `j`. `r_j Λ_j` is a gamma variable
/// of rate `1/r_j`, so the denominator is a gamma convolution.
pub fn simdefault_analytic(model: &MrfModel, subset: &[usize]) -> Result<Bounded> {
    let sets = check_subset(model, subset)?;
    let alpha: f64 = sets
        .common_by_kind
        .comonotone
        .iter()
        .map(|&j| model.factor(j).shape)
        .sum();
    if sets.common_by_kind.comonotone.is_empty() {
        return Ok(Bounded {
            value: 0.0,
            error_bound: 0.0,
        });
    }
    let mut components = Vec::with_capacity(sets.all.len());
    for &j in &sets.all_by_kind.comonotone {
        components.push(GammaComponent::new(model.factor(j).shape, 1.0)?);
    }
    for &j in &sets.all_by_kind.independent {
        let r = sets.restricted_cardinality[j] as f64;
        components.push(GammaComponent::new(model.factor(j).shape, 1.0 / r)?);
    }
    let pmf = gammaconv::convolution_pmf(&components, gammaconv::DEFAULT_MASS_TOLERANCE)?;
    gammaconv::expected_ratio(&pmf, alpha)
}

/// Monte Carlo average of the ratio in [`simdefault_analytic`] over frailty
/// draws. Each draw uses the sampler's per-draw stream, so the result does not
/// depend on the thread count.
pub fn simdefault_mc(model: &MrfModel, subset: &[usize], draws: usize, seed: u64) -> Result<McEstimate> {
    let sets = check_subset(model, subset)?;
    if draws == 0 {
        return Err(Error::ZeroCount);
    }
    if sets.common_by_kind.comonotone.is_empty() {
        return Ok(McEstimate {
            mean: 0.0,
            std_error: 0.0,
            draws,
        });
    }
    let laws = factor_laws(model);
    let m = model.factor_count();
    let ratios: Vec<f64> = (0..draws as u64)
        .into_par_iter()
        .map_init(
            || vec![0.0; m],
            |lambda, d| {
                let mut rng = draw_rng(seed, d);
                draw_frailties(model, &laws, &mut rng, lambda);
                let num: f64 = sets.common_by_kind.comonotone.iter().map(|&j| lambda[j]).sum();
                let den: f64 = sets.all_by_kind.comonotone.iter().map(|&j| lambda[j]).sum::<f64>()
                    + sets
                        .all_by_kind
                        .independent
                        .iter()
                        .map(|&j| sets.restricted_cardinality[j] as f64 * lambda[j])
                        .sum::<f64>();
                num / den
            },
        )
        .collect();
    Ok(McEstimate::from_values(&ratios))
}

/// Fraction of rows where every member of `subset` takes exactly the same
/// value, with its binomial standard error.
pub fn tie_frequency(batch: &SampleBatch, subset: &[usize]) -> Result<McEstimate> {
    if batch.rows == 0 {
        return Err(Error::EmptyBatch);
    }
    if subset.len() < 2 {
        return Err(Error::SubsetTooSmall {
            min: 2,
            found: subset.len(),
        });
    }
    for &i in subset {
        if i >= batch.cols {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: batch.cols,
            });
        }
    }
    let ties = (0..batch.rows)
        .filter(|&r| {
            let row = batch.row(r);
            subset.iter().all(|&i| row[i] == row[subset[0]])
        })
        .count();
    let n = batch.rows as f64;
    let p = ties as f64 / n;
    Ok(McEstimate {
        mean: p,
        std_error: (p * (1.0 - p) / n).sqrt(),
        draws: batch.rows,
    })
}
