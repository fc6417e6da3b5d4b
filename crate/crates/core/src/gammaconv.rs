//! Mixing law of a sum of independent gamma variables with unequal rates.
//!
//! If `Λ_i ~ Gamma(ξ_i, rate σ_i)` are independent, their sum is distributed as
//! `Gamma(ξ + K, rate σ₊)` with `ξ = Σξ_i`, `σ₊ = max σ_i` and `K` a
//! non-negative integer variable with
//!
//! ```text
//! p_k = c₊ δ_k,   c₊ = Π (σ_i/σ₊)^{ξ_i},
//! δ_0 = 1,        δ_k = k⁻¹ Σ_{l=1}^{k} g_l δ_{k-l},   g_l = Σ_i ξ_i (1 − σ_i/σ₊)^l.
//! ```
//!
//! The parameter is a rate: the density kernel is `e^{−σλ}`.

use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_MASS_TOLERANCE: f64 = 1e-12;
pub const MAX_TERMS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaComponent {
    pub shape: f64,
    pub rate: f64,
}

impl GammaComponent {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "shape",
                value: shape,
            });
        }
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "rate",
                value: rate,
            });
        }
        Ok(Self { shape, rate })
    }
}

/// Truncated law of `K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvolutionPmf {
    pub c_plus: f64,
    pub deltas: Vec<f64>,
    pub probs: Vec<f64>,
    /// `σ₊`, the largest rate.
    pub sigma_max: f64,
    /// `ξ`, the summed shape.
    pub total_shape: f64,
    /// Largest `k` retained.
    pub truncation_k: usize,
    /// `1 − Σ p_k`, clamped at zero.
    pub mass_deficit: f64,
}

/// A value together with a bound on its absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounded {
    pub value: f64,
    pub error_bound: f64,
}

pub fn convolution_pmf(components: &[GammaComponent], mass_tolerance: f64) -> Result<ConvolutionPmf> {
    if components.is_empty() {
        return Err(Error::PreconditionViolated("no gamma components".into()));
    }
    if !(mass_tolerance > 0.0 && mass_tolerance < 1.0) {
        return Err(Error::InvalidTolerance(mass_tolerance));
    }
    let sigma_max = components.iter().map(|c| c.rate).fold(f64::MIN, f64::max);
    let total_shape: f64 = components.iter().map(|c| c.shape).sum();
    let ln_c_plus: f64 = components
        .iter()
        .map(|c| c.shape * (c.rate / sigma_max).ln())
        .sum();
    let c_plus = ln_c_plus.exp();
    if c_plus == 0.0 {
        return Err(Error::NoConvergence {
            what: "gamma convolution (c+ underflows)",
            iterations: 0,
        });
    }

    // (shape, 1 - σ_i/σ₊) for the components that actually contribute to g_l
    let decay: Vec<(f64, f64)> = components
        .iter()
        .map(|c| (c.shape, 1.0 - c.rate / sigma_max))
        .filter(|&(_, q)| q > 0.0)
        .collect();

    let mut deltas = vec![1.0];
    let mut probs = vec![c_plus];
    let mut g: Vec<f64> = vec![0.0]; // g[0] unused
    let mut powers: Vec<f64> = decay.iter().map(|_| 1.0).collect();
    let mut mass = c_plus;

    let mut k = 0;
    while 1.0 - mass > mass_tolerance {
        k += 1;
        if k > MAX_TERMS {
            return Err(Error::NoConvergence {
                what: "gamma convolution pmf",
                iterations: MAX_TERMS,
            });
        }
        let mut g_k = 0.0;
        for ((shape, q), pw) in decay.iter().zip(powers.iter_mut()) {
            *pw *= q;
            g_k += shape * *pw;
        }
        g.push(g_k);
        let delta_k = (1..=k).map(|l| g[l] * deltas[k - l]).sum::<f64>() / k as f64;
        deltas.push(delta_k);
        let p = c_plus * delta_k;
        probs.push(p);
        mass += p;
    }

    Ok(ConvolutionPmf {
        c_plus,
        deltas,
        probs,
        sigma_max,
        total_shape,
        truncation_k: k,
        mass_deficit: (1.0 - mass).max(0.0),
    })
}

/// `numerator_shape · E[1/(ξ + K)]`.
///
/// The omitted tail `Σ_{k>K} p_k/(ξ+k)` is at most `mass_deficit/ξ`, which
/// is reported as the error bound (scaled by the numerator shape).
pub fn expected_ratio(pmf: &ConvolutionPmf, numerator_shape: f64) -> Result<Bounded> {
    if !(numerator_shape >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "numerator_shape",
            value: numerator_shape,
        });
    }
    if numerator_shape == 0.0 {
        return Ok(Bounded {
            value: 0.0,
            error_bound: 0.0,
        });
    }
    let sum: f64 = pmf
        .probs
        .iter()
        .enumerate()
        .map(|(k, p)| p / (pmf.total_shape + k as f64))
        .sum();
    Ok(Bounded {
        value: numerator_shape * sum,
        error_bound: numerator_shape * pmf.mass_deficit / pmf.total_shape
            + 4.0 * f64::EPSILON * numerator_shape * sum,
    })
}
