//! Shannon entropy of the symbolic distribution, the entropy an efficient
//! market would exhibit, and their difference: the market information.
//!
//! All entropies are in bits (base-2 logarithm). The convention
//! 0*log2(0) = 0 is applied by explicit branching at every occurrence.

use crate::error::{Error, Result};
use crate::symbolic::{count_patterns, empirical_probs, BinarySequence};

const NORM_TOL: f64 = 1e-9;

/// x * log2(x) with the 0*log2(0) = 0 convention.
#[inline]
pub(crate) fn xlog2(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

fn check_dist(dist: &[f64]) -> Result<()> {
    let mut sum = 0.0;
    for &p in dist {
        if p < 0.0 || !p.is_finite() {
            return Err(Error::Domain(format!("probability {p} is invalid")));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > NORM_TOL {
        return Err(Error::Domain(format!(
            "distribution sums to {sum}, expected 1"
        )));
    }
    Ok(())
}

/// Shannon entropy -sum p_i log2(p_i) of a discrete distribution, in bits.
pub fn shannon_entropy(dist: &[f64]) -> Result<f64> {
    check_dist(dist)?;
    Ok(-dist.iter().copied().map(xlog2).sum::<f64>())
}

/// Entropy of the full (L+1)-pattern distribution, decomposed into prefix
/// probabilities `p` and conditional suffix probabilities `pi`. A `pi[i]`
/// may be `None` only where `p[i] = 0`.
pub fn entropy_full(p: &[f64], pi: &[Option<f64>]) -> Result<f64> {
    check_dist(p)?;
    if p.len() != pi.len() {
        return Err(Error::Domain(format!(
            "{} prefix probabilities but {} conditional probabilities",
            p.len(),
            pi.len()
        )));
    }
    let mut h = 0.0;
    for (i, (&pi_val, &p_val)) in pi.iter().zip(p).enumerate() {
        if p_val == 0.0 {
            continue;
        }
        let cond = pi_val.ok_or_else(|| {
            Error::Domain(format!(
                "conditional probability undefined at index {i} where p > 0"
            ))
        })?;
        if !(0.0..=1.0).contains(&cond) {
            return Err(Error::Domain(format!(
                "conditional probability {cond} outside [0, 1]"
            )));
        }
        h -= xlog2(p_val * cond) + xlog2(p_val * (1.0 - cond));
    }
    Ok(h)
}

/// Entropy of the full pattern under the efficient-market null: 1 + H^L,
/// i.e. [`entropy_full`] with every conditional probability equal to 1/2.
pub fn entropy_star(p: &[f64]) -> Result<f64> {
    Ok(1.0 + shannon_entropy(p)?)
}

/// Market information: the gap between the efficient-market entropy and the
/// observed entropy. Nonnegative, zero exactly when every conditional
/// probability with positive prefix mass is 1/2, and at most 1 bit.
pub fn market_information(p: &[f64], pi: &[Option<f64>]) -> Result<f64> {
    Ok(entropy_star(p)? - entropy_full(p, pi)?)
}

/// The information estimate together with everything that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct InformationEstimate {
    pub l: u32,
    pub n: usize,
    pub p_hat: Vec<f64>,
    pub pi_hat: Vec<Option<f64>>,
    pub h_full: f64,
    pub h_star: f64,
    pub info: f64,
}

/// Estimate the market information of a bit sequence at pattern length L,
/// recording all intermediate quantities.
pub fn estimate_information(bits: &BinarySequence, l: u32) -> Result<InformationEstimate> {
    let table = count_patterns(bits, l)?;
    let (p_hat, pi_hat) = empirical_probs(&table)?;
    let h_full = entropy_full(&p_hat, &pi_hat)?;
    let h_star = entropy_star(&p_hat)?;
    Ok(InformationEstimate {
        l,
        n: table.n,
        p_hat,
        pi_hat,
        h_full,
        h_star,
        info: h_star - h_full,
    })
}
