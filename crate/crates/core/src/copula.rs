//! Evaluation of the Clayton MRF copula
//!
//! ```text
//! C(u) = Π_{j comonotone} min_{i∈RC_j} u_i^{ξ_j/ξ_{c,i}}
//!      · Π_{j independent} [1 + Σ_{i∈RC_j} (u_i^{-1/ξ_{c,i}} − 1)]^{−ξ_j}
//! ```
//!
//! together with the gamma-frailty margins `S_i(t) = (1+t)^{−ξ_{c,i}}`, the
//! joint survival function they couple to, and a generic Laplace-transform
//! form of the same construction for other frailty laws.
//!
//! Powers are evaluated as exponentials of scaled logarithms, and a zero
//! coordinate short-circuits to 0 before any logarithm is taken.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{BivariateParams, FactorKind, MrfModel};

fn check_unit(index: usize, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::CoordinateOutOfRange { index, value })
    }
}

/// `ln(1 + Σ (e^{a_i} − 1))` for `a_i ≥ 0`, without overflow for large `a_i`.
fn ln_one_plus_sum_expm1(a: impl Iterator<Item = f64> + Clone) -> f64 {
    let s: f64 = a.clone().map(f64::exp_m1).sum();
    if s.is_finite() {
        return s.ln_1p();
    }
    // 1 + Σ(e^{a_i} − 1) = e^M (Σ e^{a_i−M} − (k−1) e^{−M})
    let m = a.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::INFINITY {
        return f64::INFINITY;
    }
    let k = a.clone().count() as f64;
    let inner: f64 = a.map(|x| (x - m).exp()).sum::<f64>() - (k - 1.0) * (-m).exp();
    m + inner.ln()
}

/// `S_i(t) = (1+t)^{−ξ_{c,i}}`.
pub fn marginal_survival(model: &MrfModel, i: usize, t: f64) -> Result<f64> {
    model.check_index(i)?;
    if !(t >= 0.0) {
        return Err(Error::NegativeTime { index: i, value: t });
    }
    Ok((-model.agg_shape(i) * t.ln_1p()).exp())
}

/// `S_i⁻¹(u) = u^{−1/ξ_{c,i}} − 1`, with `S_i⁻¹(0) = +∞`.
pub fn marginal_survival_inverse(model: &MrfModel, i: usize, u: f64) -> Result<f64> {
    model.check_index(i)?;
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::DomainError {
            what: "marginal survival inverse",
            value: u,
        });
    }
    if u == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((-u.ln() / model.agg_shape(i)).exp_m1())
}

/// `ln C(u)` for a validated point with every coordinate positive.
fn ln_copula(model: &MrfModel, u: &[f64]) -> f64 {
    let ln_u: Vec<f64> = u.iter().map(|x| x.ln()).collect();
    let scaled: Vec<f64> = ln_u
        .iter()
        .zip(model.agg_shapes())
        .map(|(l, xi)| l / xi)
        .collect();
    let mut acc = 0.0;
    for (j, f) in model.factors().iter().enumerate() {
        let members = model.rc(j);
        if members.is_empty() {
            continue;
        }
        match f.kind {
            FactorKind::Comonotone => {
                let lowest = members
                    .iter()
                    .map(|&i| scaled[i])
                    .fold(f64::INFINITY, f64::min);
                acc += f.shape * lowest;
            }
            FactorKind::Independent => {
                let terms = members.iter().map(|&i| -scaled[i]);
                acc -= f.shape * ln_one_plus_sum_expm1(terms);
            }
        }
    }
    acc
}

/// `C(u_1, …, u_n)` of the Clayton MRF copula.
pub fn copula_cdf(model: &MrfModel, u: &[f64]) -> Result<f64> {
    if u.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            what: "copula point",
            expected: model.dim(),
            found: u.len(),
        });
    }
    for (i, &x) in u.iter().enumerate() {
        check_unit(i, x)?;
    }
    if u.iter().any(|&x| x == 0.0) {
        return Ok(0.0);
    }
    Ok(ln_copula(model, u).exp())
}

/// `ln C(u, v)` of the bivariate margin from logarithmic coordinates
/// (`ln_u, ln_v ≤ 0`, `−∞` allowed).
pub fn ln_bivariate_cdf(p: &BivariateParams, ln_u: f64, ln_v: f64) -> f64 {
    if ln_u == f64::NEG_INFINITY || ln_v == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let (xi_i, xi_k) = (p.xi_i(), p.xi_k());
    let (su, sv) = (ln_u / xi_i, ln_v / xi_k);
    let mut acc = p.xi_i_rest * su + p.xi_k_rest * sv;
    if p.alpha_common > 0.0 {
        acc += p.alpha_common * su.min(sv);
    }
    if p.gamma_common > 0.0 {
        acc -= p.gamma_common * ln_one_plus_sum_expm1([-su, -sv].into_iter());
    }
    acc
}

/// `C(u, v)` of the `(i, k)` margin.
pub fn bivariate_cdf(p: &BivariateParams, u: f64, v: f64) -> Result<f64> {
    check_unit(0, u)?;
    check_unit(1, v)?;
    Ok(bivariate_cdf_unchecked(p, u, v))
}

/// [`bivariate_cdf`] without range checks, for inner loops.
#[inline]
pub fn bivariate_cdf_unchecked(p: &BivariateParams, u: f64, v: f64) -> f64 {
    if u == 0.0 || v == 0.0 {
        return 0.0;
    }
    ln_bivariate_cdf(p, u.ln(), v.ln()).exp()
}

/// `S(t) = Π_{j comonotone} (1 + max_{RC_j} t_i)^{−ξ_j} · Π_{j independent} (1 + Σ_{RC_j} t_i)^{−ξ_j}`.
pub fn joint_survival(model: &MrfModel, t: &[f64]) -> Result<f64> {
    if t.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            what: "time vector",
            expected: model.dim(),
            found: t.len(),
        });
    }
    for (i, &x) in t.iter().enumerate() {
        if !(x >= 0.0) {
            return Err(Error::NegativeTime { index: i, value: x });
        }
    }
    let mut acc = 0.0;
    for (j, f) in model.factors().iter().enumerate() {
        let members = model.rc(j);
        if members.is_empty() {
            continue;
        }
        let load = match f.kind {
            FactorKind::Comonotone => members.iter().map(|&i| t[i]).fold(0.0, f64::max),
            FactorKind::Independent => members.iter().map(|&i| t[i]).sum(),
        };
        acc -= f.shape * load.ln_1p();
    }
    Ok(acc.exp())
}

/// Named sub-families reached by particular exposure patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpecialCase {
    Product,
    FrechetUpper,
    ClaytonArchimedean,
    MarshallOlkin,
    GeneralMRF,
}

pub fn classify_special_case(model: &MrfModel) -> SpecialCase {
    let n = model.dim();
    let nonempty: Vec<usize> = (0..model.factor_count())
        .filter(|&j| !model.rc(j).is_empty())
        .collect();
    if nonempty.iter().all(|&j| model.rc(j).len() <= 1) {
        return SpecialCase::Product;
    }
    if let [j] = nonempty[..] {
        if model.rc(j).len() == n {
            return match model.factor(j).kind {
                FactorKind::Comonotone => SpecialCase::FrechetUpper,
                FactorKind::Independent => SpecialCase::ClaytonArchimedean,
            };
        }
    }
    if nonempty
        .iter()
        .all(|&j| model.factor(j).kind == FactorKind::Comonotone)
    {
        return SpecialCase::MarshallOlkin;
    }
    SpecialCase::GeneralMRF
}

/// Frailty laws entering the copula through their Laplace transforms.
///
/// The copula is
/// `Π_{j comonotone} ψ_j(max_{RC_j} ψ_i⁻¹(u_i)) · Π_{j independent} ψ_j(Σ_{RC_j} ψ_i⁻¹(u_i))`,
/// where `ψ_j` is the transform of factor `j` and `ψ_i` that of the summed
/// frailty of component `i`.
pub trait FrailtyFamily {
    fn factor_transform(&self, factor: usize, x: f64) -> f64;
    /// Inverse of the component's aggregated transform; `+∞` at `u = 0`.
    fn margin_inverse(&self, component: usize, u: f64) -> f64;
}

/// Independent `Gamma(ξ_j, 1)` frailties: `ψ_j(x) = (1+x)^{−ξ_j}`.
pub struct GammaFrailty<'a> {
    model: &'a MrfModel,
}

impl<'a> GammaFrailty<'a> {
    pub fn new(model: &'a MrfModel) -> Self {
        Self { model }
    }
}

impl FrailtyFamily for GammaFrailty<'_> {
    fn factor_transform(&self, factor: usize, x: f64) -> f64 {
        (-self.model.factor(factor).shape * x.ln_1p()).exp()
    }

    fn margin_inverse(&self, component: usize, u: f64) -> f64 {
        if u == 0.0 {
            f64::INFINITY
        } else {
            (-u.ln() / self.model.agg_shape(component)).exp_m1()
        }
    }
}

/// Copula built from an arbitrary [`FrailtyFamily`] over the model's exposure.
pub fn frailty_copula_cdf<F: FrailtyFamily>(model: &MrfModel, family: &F, u: &[f64]) -> Result<f64> {
    if u.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            what: "copula point",
            expected: model.dim(),
            found: u.len(),
        });
    }
    for (i, &x) in u.iter().enumerate() {
        check_unit(i, x)?;
    }
    let inv: Vec<f64> = u
        .iter()
        .enumerate()
        .map(|(i, &x)| family.margin_inverse(i, x))
        .collect();
    let mut prod = 1.0;
    for (j, f) in model.factors().iter().enumerate() {
        let members = model.rc(j);
        if members.is_empty() {
            continue;
        }
        let load = match f.kind {
            FactorKind::Comonotone => members.iter().map(|&i| inv[i]).fold(0.0, f64::max),
            FactorKind::Independent => members.iter().map(|&i| inv[i]).sum(),
        };
        prod *= family.factor_transform(j, load);
    }
    Ok(prod)
}
