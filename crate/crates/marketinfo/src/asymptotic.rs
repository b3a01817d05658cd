//! Asymptotic null law of the estimated market information: a gamma
//! distribution with integer shape 2^{L-1} and scale 1/(ln 2 * N), its
//! Erlang closed-form tail, critical values, and the remainder bound of the
//! characteristic-function expansion (Lah numbers included).

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::symbolic::MAX_L;

/// Parameters of the asymptotic gamma null law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParams {
    /// Shape k = 2^{L-1}, always an exact power of two.
    pub shape: u64,
    /// Scale theta = 1/(ln 2 * N).
    pub scale: f64,
    pub l: u32,
    pub n: usize,
}

/// Gamma parameters for pattern length L and effective sample size N.
/// N is the number of (L+1)-grams, i.e. bit count minus L, not the raw
/// series length; the two differ by L and coincide asymptotically.
pub fn gamma_params(l: u32, n: usize) -> Result<GammaParams> {
    if l == 0 || l > MAX_L {
        return Err(Error::Domain(format!("pattern length {l} not in [1, {MAX_L}]")));
    }
    if n == 0 {
        return Err(Error::Domain("sample size must be positive".into()));
    }
    Ok(GammaParams {
        shape: 1u64 << (l - 1),
        scale: 1.0 / (LN_2 * n as f64),
        l,
        n,
    })
}

/// Tail probability P(X > x) of the gamma law. With integer shape the tail
/// is the Erlang finite sum e^{-x/theta} sum_{m<k} (x/theta)^m / m!,
/// accumulated from the smallest term to bound rounding error.
pub fn survival(x: f64, params: &GammaParams) -> Result<f64> {
    if x < 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!("survival needs x >= 0, got {x}")));
    }
    let z = x / params.scale;
    let k = params.shape;
    // terms z^m / m! for m = 0..k, built largest index first so the sum
    // runs smallest-to-largest when z < m (the common tail regime)
    let mut terms = Vec::with_capacity(k as usize);
    let mut t = 1.0f64;
    terms.push(t);
    for m in 1..k {
        t *= z / m as f64;
        terms.push(t);
    }
    terms.sort_by(|a, b| a.total_cmp(b));
    let sum: f64 = terms.iter().sum();
    Ok(((-z).exp() * sum).clamp(0.0, 1.0))
}

/// Quantile of the tail: the x with survival(x) = alpha, by bracketing
/// bisection to 1e-10 relative tolerance.
pub fn critical_value(alpha: f64, params: &GammaParams) -> Result<f64> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha {alpha} not in (0, 1)")));
    }
    // 40 mean-units past the mean covers any practical alpha
    let mut lo = 0.0f64;
    let mut hi = params.scale * (params.shape as f64 + 40.0);
    while survival(hi, params)? > alpha {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if survival(mid, params)? > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-10 * hi.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Lah number L(k, l) = C(k-1, l-1) * k! / l!, exact.
pub fn lah_number(k: u64, l: u64) -> Result<u128> {
    if l < 1 || l > k {
        return Err(Error::Domain(format!("Lah number needs 1 <= l <= k, got ({k}, {l})")));
    }
    if k > 20 {
        return Err(Error::Domain(format!("Lah number overflow guard: k = {k} > 20")));
    }
    let choose = |n: u64, r: u64| -> u128 {
        let r = r.min(n - r);
        let mut acc: u128 = 1;
        for i in 0..r {
            acc = acc * (n - i) as u128 / (i + 1) as u128;
        }
        acc
    };
    let falling: u128 = ((l + 1)..=k).map(|v| v as u128).product(); // k!/l!
    Ok(choose(k - 1, l - 1) * falling)
}

/// Inputs of the characteristic-function remainder bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub t: f64,
    /// Prefix probability p_j.
    pub p_j: f64,
    /// Norm order, at least 2.
    pub q: u64,
    /// Slack factor, > 1 in the finite-sample statement; exactly 1 gives
    /// the asymptotic form of the bound.
    pub epsilon: f64,
    pub n_j: f64,
}

/// Upper bound on the remainder |R(t, n_j)| of the expansion of the
/// per-prefix characteristic-function factor:
/// (eps/96) (q-1)^{1-1/q} (4q-1)^3
///   [sum_{l=1..4} |2^5 t p_j / (15 ln 2)|^l L(4,l) / (5ql-1)^{1/q}]
///   n_j^{-2+1/(2q)}.
pub fn error_bound(params: &BoundParams) -> Result<f64> {
    let BoundParams { t, p_j, q, epsilon, n_j } = *params;
    if q < 2 {
        return Err(Error::Domain(format!("bound needs q >= 2, got {q}")));
    }
    if !(0.0..=1.0).contains(&p_j) {
        return Err(Error::Domain(format!("p_j {p_j} outside [0, 1]")));
    }
    if epsilon < 1.0 {
        return Err(Error::Domain(format!("epsilon {epsilon} below 1")));
    }
    if n_j <= 0.0 {
        return Err(Error::Domain(format!("n_j {n_j} must be positive")));
    }
    let qf = q as f64;
    let base = (32.0 * t * p_j / (15.0 * LN_2)).abs();
    let mut series = 0.0;
    for l in 1..=4u64 {
        let lah = lah_number(4, l)? as f64;
        series += base.powi(l as i32) * lah / (5.0 * qf * l as f64 - 1.0).powf(1.0 / qf);
    }
    let prefactor =
        (epsilon / 96.0) * (qf - 1.0).powf(1.0 - 1.0 / qf) * (4.0 * qf - 1.0).powi(3);
    Ok(prefactor * series * n_j.powf(-2.0 + 1.0 / (2.0 * qf)))
}
