//! Lower tail dependence of bivariate margins, along the diagonal and along
//! the path of maximal dependence `x ↦ C(x, u²/x)`.

use serde::Serialize;

use crate::copula::ln_bivariate_cdf;
use crate::error::{Error, Result};
use crate::model::BivariateParams;

/// Smallest `u` accepted by [`estimate_tail_exponent`]; below it the
/// `u^{−1/ξ}` terms lose too much precision.
pub const MIN_GRID_U: f64 = 1e-8;
const MAX_GRID_U: f64 = 0.05;
/// Bisection stops when the bracket in `ln x` is this narrow.
const ROOT_WIDTH: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailTriple {
    pub lambda: f64,
    pub chi: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailIndices {
    pub classical: TailTriple,
    pub maximal: TailTriple,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// Maximum at the kink of the `min` term.
    Kink,
    /// Maximum at a stationary point away from the kink.
    InteriorRoot,
    /// No shared factor: `C(x, u²/x) = u²` for every `x`; the diagonal is returned.
    Diagonal,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Kink => "kink",
            Regime::InteriorRoot => "interior_root",
            Regime::Diagonal => "diagonal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxDependencePoint {
    pub u: f64,
    pub x_star: f64,
    pub pi_star: f64,
    pub regime: Regime,
}

impl MaxDependencePoint {
    pub fn y_star(&self) -> f64 {
        self.u * self.u / self.x_star
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailPath {
    Diagonal,
    Maximal,
}

fn lambda_lower(p: &BivariateParams) -> f64 {
    if p.xi_i_rest == 0.0 && p.xi_k_rest == 0.0 {
        2f64.powf(-p.gamma_common)
    } else {
        0.0
    }
}

/// Tail indices along the diagonal.
pub fn classical_indices(p: &BivariateParams) -> TailTriple {
    let c = p.xi_common();
    let (xi_i, xi_k) = (p.xi_i(), p.xi_k());
    TailTriple {
        lambda: lambda_lower(p),
        chi: (c / (xi_i + p.xi_i_rest)).min(c / (xi_k + p.xi_k_rest)),
        kappa: 2.0 - (c / xi_i).min(c / xi_k),
    }
}

/// Tail indices along the path of maximal dependence.
pub fn maximal_indices(p: &BivariateParams) -> TailTriple {
    let c = p.xi_common();
    let (a, b) = (p.xi_i_rest, p.xi_k_rest);
    TailTriple {
        lambda: lambda_lower(p),
        chi: c / (a + c + b),
        kappa: 2.0 * (1.0 - c / (a + 2.0 * c + b)),
    }
}

pub fn tail_indices(p: &BivariateParams) -> TailIndices {
    TailIndices {
        classical: classical_indices(p),
        maximal: maximal_indices(p),
    }
}

/// Objective `ln C(x, u²/x)` in terms of `lx = ln x` and `l2 = 2 ln u`.
fn objective(p: &BivariateParams, lx: f64, l2: f64) -> f64 {
    ln_bivariate_cdf(p, lx, l2 - lx)
}

/// Sign-carrying multiple of the objective's slope in `ln x` when the `min`
/// term is fixed to one branch: `delta` is the linear slope of that branch.
///
/// `d/dlnx = delta + γ (x^{−1/ξ_i}/ξ_i − y^{−1/ξ_k}/ξ_k) / (x^{−1/ξ_i} + y^{−1/ξ_k} − 1)`;
/// the value returned is the numerator after multiplying by the positive
/// denominator, scaled by `e^{−max}` to avoid overflow.
fn slope_numerator(p: &BivariateParams, delta: f64, lx: f64, l2: f64) -> f64 {
    let (xi_i, xi_k, g) = (p.xi_i(), p.xi_k(), p.gamma_common);
    let a = -lx / xi_i;
    let b = -(l2 - lx) / xi_k;
    let m = a.max(b);
    let (ea, eb, e1) = ((a - m).exp(), (b - m).exp(), (-m).exp());
    (delta + g / xi_i) * ea + (delta - g / xi_k) * eb - delta * e1
}

/// Bisection for a sign change of `f` between `lo` (positive) and `hi`
/// (non-positive).
fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    while hi - lo > ROOT_WIDTH * lo.abs().max(hi.abs()).max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `(ln x*, regime)` for `ξ_i ≥ ξ_k`.
fn oriented_argmax(p: &BivariateParams, l2: f64) -> (f64, Regime) {
    let (xi_i, xi_k, alpha) = (p.xi_i(), p.xi_k(), p.alpha_common);
    let kink = l2 * xi_i / (xi_i + xi_k);
    // slopes of the linear part below the kink (x-branch of min) and above it
    let delta_low = (p.xi_i_rest + alpha) / xi_i - p.xi_k_rest / xi_k;
    let delta_high = p.xi_i_rest / xi_i - (p.xi_k_rest + alpha) / xi_k;
    let low = |lx: f64| slope_numerator(p, delta_low, lx, l2);
    let high = |lx: f64| slope_numerator(p, delta_high, lx, l2);

    if low(kink) < 0.0 {
        // only reachable without a kink term; the maximum lies below
        if low(l2) <= 0.0 {
            return (l2, Regime::InteriorRoot);
        }
        return (bisect(low, l2, kink), Regime::InteriorRoot);
    }
    if high(kink) <= 0.0 {
        return (kink, Regime::Kink);
    }
    if high(0.0) > 0.0 {
        return (0.0, Regime::InteriorRoot);
    }
    (bisect(high, kink, 0.0), Regime::InteriorRoot)
}

/// Maximizer of `x ↦ C(x, u²/x)` over `[u², 1]`.
pub fn maximal_path(p: &BivariateParams, u: f64) -> Result<MaxDependencePoint> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::DomainError {
            what: "maximal path level",
            value: u,
        });
    }
    let (lx, regime) = ln_argmax(p, u);
    Ok(MaxDependencePoint {
        u,
        x_star: lx.exp(),
        pi_star: objective(p, lx, 2.0 * u.ln()).exp(),
        regime,
    })
}

/// `(ln x*, regime)` in the caller's orientation.
fn ln_argmax(p: &BivariateParams, u: f64) -> (f64, Regime) {
    let l2 = 2.0 * u.ln();
    if p.xi_common() == 0.0 {
        return (0.5 * l2, Regime::Diagonal);
    }
    if p.xi_i() >= p.xi_k() {
        oriented_argmax(p, l2)
    } else {
        let (ly, regime) = oriented_argmax(&p.swapped(), l2);
        (l2 - ly, regime)
    }
}

/// `ln C(u, u)` or `ln Π*(u)`.
pub fn ln_path_value(p: &BivariateParams, path: TailPath, u: f64) -> f64 {
    let lu = u.ln();
    match path {
        TailPath::Diagonal => ln_bivariate_cdf(p, lu, lu),
        TailPath::Maximal => {
            let (lx, _) = ln_argmax(p, u);
            objective(p, lx, 2.0 * lu)
        }
    }
}

/// Nine log-spaced levels from `1e-2` down to `1e-6`.
pub fn default_tail_grid() -> Vec<f64> {
    (0..9).map(|k| 10f64.powf(-2.0 - 0.5 * k as f64)).collect()
}

/// Least-squares slope of `ln Π(u)` against `ln u` over a decreasing grid.
pub fn estimate_tail_exponent(p: &BivariateParams, path: TailPath, u_grid: &[f64]) -> Result<f64> {
    if u_grid.len() < 5 {
        return Err(Error::DegenerateGrid(format!(
            "need at least 5 points, got {}",
            u_grid.len()
        )));
    }
    if let Some(&bad) = u_grid.iter().find(|&&u| !(MIN_GRID_U..=MAX_GRID_U).contains(&u)) {
        return Err(Error::DegenerateGrid(format!(
            "level {bad} outside [{MIN_GRID_U}, {MAX_GRID_U}]"
        )));
    }
    if u_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::DegenerateGrid("levels must be strictly decreasing".into()));
    }
    if u_grid[0] / u_grid[u_grid.len() - 1] < 100.0 {
        return Err(Error::DegenerateGrid("levels must span at least two decades".into()));
    }
    let xs: Vec<f64> = u_grid.iter().map(|u| u.ln()).collect();
    let ys: Vec<f64> = u_grid.iter().map(|&u| ln_path_value(p, path, u)).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}
