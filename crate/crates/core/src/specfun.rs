//! Generalized hypergeometric series `_{q+1}F_q(a; b; z)` on the closed unit disk
//! (real arguments only).
//!
//! The series is summed by forward term recursion
//! `t_{k+1} = t_k · Π(a_i+k) / Π(b_j+k) · z/(k+1)` with Neumaier-compensated
//! accumulation. At `z = -1` an optional Cohen–Rodriguez Villegas–Zagier
//! acceleration can replace the plain sum; at `z = 1`, where convergence is
//! only algebraic, the partial sums are extrapolated with Levin's
//! u-transform.

use crate::error::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-13;
pub const DEFAULT_MAX_TERMS: usize = 100_000;

/// Successive Levin estimates must agree to this relative level for a `z = 1`
/// evaluation to be accepted. The transform loses digits to cancellation
/// beyond roughly 1e-12, so tighter requested tolerances are capped here.
const LEVIN_ACCEPT: f64 = 1e-9;
const LEVIN_MAX_ORDER: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Acceleration {
    #[default]
    None,
    /// Alternating-series acceleration for `z = -1`. Valid when `|t_k|` is a
    /// moment sequence (true for positive parameters with `b_j > a_i`
    /// pairings, as in the rank-correlation series).
    Alternating,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypergeometricSpec {
    pub numerator: Vec<f64>,
    pub denominator: Vec<f64>,
    pub z: f64,
    pub tolerance: f64,
    pub max_terms: usize,
    pub acceleration: Acceleration,
}

impl HypergeometricSpec {
    pub fn new(numerator: &[f64], denominator: &[f64], z: f64) -> Self {
        Self {
            numerator: numerator.to_vec(),
            denominator: denominator.to_vec(),
            z,
            tolerance: DEFAULT_TOLERANCE,
            max_terms: DEFAULT_MAX_TERMS,
            acceleration: Acceleration::None,
        }
    }

    pub fn tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn max_terms(mut self, n: usize) -> Self {
        self.max_terms = n;
        self
    }

    pub fn acceleration(mut self, acc: Acceleration) -> Self {
        self.acceleration = acc;
        self
    }
}

/// `d = Σb − Σa`; decides convergence on `|z| = 1`.
pub fn convergence_margin(spec: &HypergeometricSpec) -> f64 {
    spec.denominator.iter().sum::<f64>() - spec.numerator.iter().sum::<f64>()
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// Number of terms after which the series terminates, if any numerator
/// parameter is zero or a negative integer.
fn terminating_length(spec: &HypergeometricSpec) -> Option<usize> {
    spec.numerator
        .iter()
        .filter(|&&a| is_nonpositive_integer(a))
        .map(|&a| (-a) as usize + 1)
        .min()
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[inline]
fn term_ratio(spec: &HypergeometricSpec, k: usize) -> f64 {
    let kf = k as f64;
    let mut r = spec.z / (kf + 1.0);
    for &a in &spec.numerator {
        r *= a + kf;
    }
    for &b in &spec.denominator {
        r /= b + kf;
    }
    r
}

fn terms(spec: &HypergeometricSpec, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut t = 1.0;
    for k in 0..count {
        out.push(t);
        t *= term_ratio(spec, k);
    }
    out
}

fn validate(spec: &HypergeometricSpec) -> Result<()> {
    if !(spec.tolerance > 0.0) || !spec.tolerance.is_finite() {
        return Err(Error::InvalidTolerance(spec.tolerance));
    }
    if spec.max_terms == 0 {
        return Err(Error::InvalidParameter {
            name: "max_terms",
            value: 0.0,
        });
    }
    for &b in &spec.denominator {
        if is_nonpositive_integer(b) || !b.is_finite() {
            return Err(Error::InvalidParameter {
                name: "denominator",
                value: b,
            });
        }
    }
    if spec.numerator.iter().any(|a| !a.is_finite()) || !spec.z.is_finite() {
        return Err(Error::InvalidParameter {
            name: "numerator/argument",
            value: f64::NAN,
        });
    }
    Ok(())
}

/// Evaluates the series described by `spec`.
pub fn hyp_pfq(spec: &HypergeometricSpec) -> Result<f64> {
    validate(spec)?;
    if spec.z == 0.0 {
        return Ok(1.0);
    }
    if let Some(len) = terminating_length(spec) {
        let mut acc = Neumaier::default();
        for t in terms(spec, len) {
            acc.add(t);
        }
        return Ok(acc.value());
    }
    let d = convergence_margin(spec);
    if spec.z.abs() > 1.0 {
        return Err(Error::DivergentSeries(format!("|z| = {} > 1", spec.z.abs())));
    }
    if spec.z == 1.0 {
        if !(d > 0.0) {
            return Err(Error::DivergentSeries(format!(
                "z = 1 requires d > 0, got d = {d}"
            )));
        }
        return levin_u(spec);
    }
    if spec.z == -1.0 {
        if !(d > -1.0) {
            return Err(Error::DivergentSeries(format!(
                "z = -1 requires d > -1, got d = {d}"
            )));
        }
        if spec.acceleration == Acceleration::Alternating {
            return alternating_accelerated(spec);
        }
    }
    direct_sum(spec)
}

/// Plain forward summation for `|z| < 1` or `z = -1`.
fn direct_sum(spec: &HypergeometricSpec) -> Result<f64> {
    let mut acc = Neumaier::default();
    let mut t = 1.0;
    for k in 0..spec.max_terms {
        acc.add(t);
        let r = term_ratio(spec, k);
        let next = t * r;
        let s = acc.value();
        if next == 0.0 {
            return Ok(s);
        }
        // Stop only while the terms shrink. At z = -1 consecutive partial sums
        // bracket the limit, so the bracket width |next| bounds the error;
        // inside the disk the tail is dominated by a geometric series.
        if r.abs() < 1.0 {
            let remainder = if spec.z == -1.0 {
                next.abs()
            } else {
                next.abs() / (1.0 - r.abs().max(spec.z.abs()))
            };
            if remainder <= spec.tolerance * s.abs() {
                return Ok(s);
            }
        }
        t = next;
    }
    Err(Error::NoConvergence {
        what: "hypergeometric series",
        iterations: spec.max_terms,
    })
}

/// Cohen, Rodriguez Villegas and Zagier, "Convergence acceleration of
/// alternating series", algorithm 1, applied to `Σ (-1)^k |t_k|`.
fn alternating_accelerated(spec: &HypergeometricSpec) -> Result<f64> {
    let base = ((2.0 / spec.tolerance).ln() / (3.0 + 8f64.sqrt()).ln()).ceil() as usize + 2;
    let n_max = base + 8;
    let t = terms(spec, n_max);
    if t.iter().enumerate().any(|(k, &x)| (x < 0.0) != (k % 2 == 1)) {
        // sign pattern is not strictly alternating; acceleration does not apply
        return direct_sum(spec);
    }
    let mags: Vec<f64> = t.iter().map(|x| x.abs()).collect();
    let crvz = |n: usize| -> f64 {
        let mut d = (3.0 + 8f64.sqrt()).powi(n as i32);
        d = (d + 1.0 / d) / 2.0;
        let mut b = -1.0;
        let mut c = -d;
        let mut s = 0.0;
        for (k, &a) in mags.iter().enumerate().take(n) {
            c = b - c;
            s += c * a;
            let kf = k as f64;
            let nf = n as f64;
            b *= (kf + nf) * (kf - nf) / ((kf + 0.5) * (kf + 1.0));
        }
        s / d
    };
    let lo = crvz(base);
    let hi = crvz(n_max);
    if (hi - lo).abs() <= spec.tolerance * hi.abs().max(f64::MIN_POSITIVE) * 10.0 {
        Ok(hi)
    } else {
        direct_sum(spec)
    }
}

/// Levin u-transform of the partial sums at `z = 1`, with remainder
/// estimates `ω_j = (j+1) t_j`.
fn levin_u(spec: &HypergeometricSpec) -> Result<f64> {
    let t = terms(spec, LEVIN_MAX_ORDER + 1);
    let mut partial = Vec::with_capacity(t.len());
    let mut acc = Neumaier::default();
    for &x in &t {
        acc.add(x);
        partial.push(acc.value());
    }
    if let Some(pos) = t.iter().position(|&x| x == 0.0) {
        return Ok(partial[pos]);
    }

    let mut estimates = Vec::with_capacity(LEVIN_MAX_ORDER);
    for k in 1..LEVIN_MAX_ORDER {
        let (mut num, mut den) = (0.0, 0.0);
        let mut binom = 1.0;
        for j in 0..=k {
            let w = (j as f64 + 1.0) * t[j];
            let ratio = ((1.0 + j as f64) / (1.0 + k as f64)).powi(k as i32 - 1);
            let c = if j % 2 == 0 { binom } else { -binom } * ratio;
            num += c * partial[j] / w;
            den += c / w;
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
        estimates.push(num / den);
    }

    let accept = spec.tolerance.max(LEVIN_ACCEPT);
    let mut best: Option<(f64, f64)> = None;
    for w in estimates.windows(2) {
        let diff = (w[1] - w[0]).abs() / w[1].abs().max(f64::MIN_POSITIVE);
        if diff <= spec.tolerance {
            return Ok(w[1]);
        }
        if best.map_or(true, |(d, _)| diff < d) {
            best = Some((diff, w[1]));
        }
    }
    match best {
        Some((diff, value)) if diff <= accept => Ok(value),
        _ => Err(Error::NoConvergence {
            what: "Levin u-transform at z = 1",
            iterations: LEVIN_MAX_ORDER,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_numerator_parameter_gives_one() {
        for z in [-1.0, -0.3, 0.7, 1.0] {
            let spec = HypergeometricSpec::new(&[2.5, 1.0, 0.0], &[3.0, 4.0], z);
            assert_eq!(hyp_pfq(&spec).unwrap(), 1.0);
        }
    }

    #[test]
    fn zero_argument_gives_one() {
        let spec = HypergeometricSpec::new(&[0.3, 7.0], &[1.5], 0.0);
        assert_eq!(hyp_pfq(&spec).unwrap(), 1.0);
    }

    #[test]
    fn log_two_at_minus_one() {
        let spec = HypergeometricSpec::new(&[1.0, 1.0], &[2.0], -1.0);
        // d = 0, so the plain alternating sum needs ~1e13 terms; use the accelerator
        let v = hyp_pfq(&spec.clone().acceleration(Acceleration::Alternating)).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-13, "{v}");

        // independent check: 200-term partial sum of Σ (-1)^k/(k+1), bracketed
        let partial: f64 = (0..200).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } / (k as f64 + 1.0)).sum();
        assert!((v - partial).abs() < 1.0 / 200.0);
    }

    #[test]
    fn plain_sum_hits_term_cap() {
        let spec = HypergeometricSpec::new(&[1.0, 1.0], &[2.0], -1.0).max_terms(1000);
        assert!(matches!(hyp_pfq(&spec), Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn divergence_is_reported() {
        let spec = HypergeometricSpec::new(&[1.0, 1.0], &[2.0], 1.0);
        assert!(matches!(hyp_pfq(&spec), Err(Error::DivergentSeries(_))));
        let spec = HypergeometricSpec::new(&[1.0], &[], 1.5);
        assert!(matches!(hyp_pfq(&spec), Err(Error::DivergentSeries(_))));
        let spec = HypergeometricSpec::new(&[3.0, 1.0], &[1.5], -1.0);
        assert!(matches!(hyp_pfq(&spec), Err(Error::DivergentSeries(_))));
    }

    #[test]
    fn bad_denominator_and_tolerance() {
        let spec = HypergeometricSpec::new(&[1.0], &[-2.0], 0.5);
        assert!(hyp_pfq(&spec).is_err());
        let spec = HypergeometricSpec::new(&[1.0], &[2.0], 0.5).tolerance(0.0);
        assert!(matches!(hyp_pfq(&spec), Err(Error::InvalidTolerance(_))));
    }

    #[test]
    fn elementary_closed_forms() {
        // 1F0(a;;z) = (1-z)^-a
        let v = hyp_pfq(&HypergeometricSpec::new(&[1.7], &[], 0.4)).unwrap();
        assert!((v - 0.6f64.powf(-1.7)).abs() < 1e-12);
        // 2F1(1,1;2;z) = -ln(1-z)/z
        let v = hyp_pfq(&HypergeometricSpec::new(&[1.0, 1.0], &[2.0], 0.5)).unwrap();
        assert!((v - 2.0 * 2f64.ln()).abs() < 1e-12);
        // terminating: 2F1(-2, b; c; z) = 1 - 2bz/c + b(b+1)z^2/(c(c+1))
        let (b, c, z) = (1.5, 2.5, 0.8);
        let v = hyp_pfq(&HypergeometricSpec::new(&[-2.0, b], &[c], z)).unwrap();
        let want = 1.0 - 2.0 * b * z / c + b * (b + 1.0) * z * z / (c * (c + 1.0));
        assert!((v - want).abs() < 1e-15);
    }

    #[test]
    fn gauss_sum_at_one() {
        // 2F1(a,b;c;1) = Γ(c)Γ(c-a-b)/(Γ(c-a)Γ(c-b)); with a=b=1, c=4: 3!·1!/(2!·2!) = 1.5
        let v = hyp_pfq(&HypergeometricSpec::new(&[1.0, 1.0], &[4.0], 1.0)).unwrap();
        assert!((v - 1.5).abs() < 1e-9, "{v}");
        // a=0.5, b=1, c=3: Γ(3)Γ(1.5)/(Γ(2.5)Γ(2)) = 2/1.5
        let v = hyp_pfq(&HypergeometricSpec::new(&[0.5, 1.0], &[3.0], 1.0)).unwrap();
        assert!((v - 2.0 / 1.5).abs() < 1e-9, "{v}");
    }

    #[test]
    fn margins() {
        let (x, g, b) = (4.1, 0.5, 9.9);
        let spec = HypergeometricSpec::new(&[2.0 * x, 1.0, g], &[2.0 * x + 1.0, b + 1.0], -1.0);
        assert!((convergence_margin(&spec) - 10.4).abs() < 1e-12);
        assert_eq!(convergence_margin(&HypergeometricSpec::new(&[1.0, 1.0], &[2.0], 1.0)), 0.0);
        assert_eq!(convergence_margin(&HypergeometricSpec::new(&[1.0, 1.0, 1.0], &[3.0, 3.0], 1.0)), 3.0);
    }

    #[test]
    fn accelerated_matches_plain_on_fast_series() {
        let spec = HypergeometricSpec::new(&[8.2, 1.0, 0.5], &[9.2, 10.9], -1.0);
        let plain = hyp_pfq(&spec).unwrap();
        let fast = hyp_pfq(&spec.clone().acceleration(Acceleration::Alternating)).unwrap();
        assert!((plain - fast).abs() < 1e-13);
    }

    proptest! {
        #[test]
        fn matched_pair_cancels(a in 0.1f64..5.0, b in 0.1f64..5.0, c in 0.5f64..6.0, shared in 0.2f64..4.0, z in -0.95f64..0.95) {
            let reduced = hyp_pfq(&HypergeometricSpec::new(&[a, b], &[c], z)).unwrap();
            let padded = hyp_pfq(&HypergeometricSpec::new(&[a, shared, b], &[shared, c], z)).unwrap();
            // alternating sums lose accuracy in proportion to Σ|t_k| = pFq(|z|)
            let scale = hyp_pfq(&HypergeometricSpec::new(&[a, b], &[c], z.abs())).unwrap();
            prop_assert!((reduced - padded).abs() <= 1e-13 * scale.max(1.0));
        }

        #[test]
        fn any_zero_numerator_is_exactly_one(a in 0.1f64..5.0, c in 0.5f64..6.0, d in 0.5f64..6.0, z in -1.0f64..1.0) {
            let v = hyp_pfq(&HypergeometricSpec::new(&[a, 0.0, 1.0], &[c, d], z)).unwrap();
            prop_assert_eq!(v, 1.0);
        }
    }
}
