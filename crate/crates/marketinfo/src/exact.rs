//! Exact finite-sample distribution of the estimated market information
//! under the efficient-market null with known prefix probabilities: the
//! moment-generating function, moments of any order, a linear-cost first
//! moment, and a brute-force enumeration of the full pmf.

use crate::error::{Error, Result};
use crate::information::{market_information, xlog2};

/// Default cap on the number of terms in the nested enumeration sums.
pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// The conditioning setup: known prefix probabilities p_i = counts_i / N
/// and the per-prefix sample counts n_i.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalSetup {
    pub l: u32,
    pub counts: Vec<usize>,
    pub p: Vec<f64>,
}

impl ConditionalSetup {
    /// Build from per-prefix counts; prefix probabilities are the count
    /// fractions, so the conditioning event "empirical = true" holds exactly.
    pub fn from_counts(l: u32, counts: Vec<usize>) -> Result<Self> {
        let size = 1usize << l;
        if counts.len() != size {
            return Err(Error::Domain(format!(
                "expected {size} counts for L={l}, got {}",
                counts.len()
            )));
        }
        let total: usize = counts.iter().sum();
        if total == 0 {
            return Err(Error::Domain("all counts are zero".into()));
        }
        if counts.contains(&0) {
            return Err(Error::Domain(
                "every prefix needs at least one observation".into(),
            ));
        }
        let p = counts.iter().map(|&c| c as f64 / total as f64).collect();
        Ok(Self { l, counts, p })
    }

    /// Number of terms the full enumeration over (j_1, ..., j_{2^L}) visits.
    pub fn enumeration_terms(&self) -> u128 {
        self.counts
            .iter()
            .fold(1u128, |acc, &n| acc.saturating_mul(n as u128 + 1))
    }

    fn check_budget(&self, budget: u128) -> Result<()> {
        let terms = self.enumeration_terms();
        if terms > budget {
            return Err(Error::BudgetExceeded { terms, budget });
        }
        Ok(())
    }
}

/// Kahan compensated accumulator, used so the nested sums hold 1e-9
/// cross-check tolerances.
#[derive(Default, Clone, Copy)]
struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }
}

/// log of the binomial coefficient C(n, j), stable for any n we accept.
fn ln_choose(n: usize, j: usize) -> f64 {
    let j = j.min(n - j);
    let mut acc = 0.0;
    for i in 0..j {
        acc += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    acc
}

/// The full Binomial(n, 1/2) pmf, built by the recurrence
/// ln C(n, j+1) = ln C(n, j) + ln(n-j) - ln(j+1).
fn binom_half_pmf_row(n: usize) -> Vec<f64> {
    let ln_half_n = -(n as f64) * std::f64::consts::LN_2;
    let mut row = Vec::with_capacity(n + 1);
    let mut ln_c = 0.0;
    for j in 0..=n {
        row.push((ln_c + ln_half_n).exp());
        if j < n {
            ln_c += ((n - j) as f64).ln() - ((j + 1) as f64).ln();
        }
    }
    row
}

/// Moment-generating function of the estimated information, conditionally on
/// the efficient-market event with known prefix probabilities. The per-prefix
/// summand is C(n,j) 2^{-n} exp(t * p * [x log2 x + (1-x) log2(1-x)]) with
/// x = j/n; the boundary cases j = 0 and j = n carry the 0*log2(0)
/// convention in the exponent, so the factor is exp(0) there, never 0^0.
pub fn mgf_exact(t: f64, setup: &ConditionalSetup) -> Result<f64> {
    let mut product = t.exp();
    for (&n, &p) in setup.counts.iter().zip(&setup.p) {
        let pmf = binom_half_pmf_row(n);
        let mut acc = Kahan::default();
        for (j, &w) in pmf.iter().enumerate() {
            let x = j as f64 / n as f64;
            let exponent = t * p * (xlog2(x) + xlog2(1.0 - x));
            acc.add(w * exponent.exp());
        }
        product *= acc.sum;
    }
    if !product.is_finite() {
        return Err(Error::Range(format!(
            "MGF overflowed at t = {t} (counts sum {})",
            setup.counts.iter().sum::<usize>()
        )));
    }
    Ok(product)
}

/// The summand weight alpha for a tuple of per-prefix successes: the signed
/// entropy defect sum_k p_k [x log2 x + (1-x) log2(1-x)], x = j_k / n_k.
fn alpha(setup: &ConditionalSetup, js: &[usize]) -> f64 {
    let mut acc = Kahan::default();
    for ((&j, &n), &p) in js.iter().zip(&setup.counts).zip(&setup.p) {
        let x = j as f64 / n as f64;
        acc.add(p * (xlog2(x) + xlog2(1.0 - x)));
    }
    acc.sum
}

/// Visit every tuple (j_1, ..., j_{2^L}) with 0 <= j_i <= n_i, in
/// lexicographic order, passing the tuple and its product binomial weight.
fn for_each_tuple<F: FnMut(&[usize], f64)>(setup: &ConditionalSetup, mut f: F) {
    let k = setup.counts.len();
    let mut js = vec![0usize; k];
    // per-prefix Binomial(n_i, 1/2) pmfs, precomputed
    let pmfs: Vec<Vec<f64>> = setup.counts.iter().map(|&n| binom_half_pmf_row(n)).collect();
    loop {
        let weight: f64 = js.iter().enumerate().map(|(i, &j)| pmfs[i][j]).product();
        f(&js, weight);
        // odometer increment
        let mut i = 0;
        loop {
            if i == k {
                return;
            }
            js[i] += 1;
            if js[i] <= setup.counts[i] {
                break;
            }
            js[i] = 0;
            i += 1;
        }
    }
}

/// Conditional moment of order r via the nested binomial sum, expanding
/// (1 + alpha)^r binomially so the boundary conventions match the
/// closed-form expressions term by term.
pub fn moment_exact(r: u32, setup: &ConditionalSetup) -> Result<f64> {
    moment_exact_with_budget(r, setup, DEFAULT_BUDGET)
}

pub fn moment_exact_with_budget(r: u32, setup: &ConditionalSetup, budget: u128) -> Result<f64> {
    setup.check_budget(budget)?;
    if r == 0 {
        return Ok(1.0);
    }
    let binom_r: Vec<f64> = (0..=r).map(|m| ln_choose(r as usize, m as usize).exp()).collect();
    let mut acc = Kahan::default();
    for_each_tuple(setup, |js, weight| {
        let a = alpha(setup, js);
        let mut inner = 0.0;
        let mut a_pow = 1.0;
        for &c in &binom_r {
            inner += c * a_pow;
            a_pow *= a;
        }
        acc.add(weight * inner);
    });
    Ok(acc.sum)
}

/// First moment in closed form, linear in the total count:
/// 1 + sum_i p_i 2^{1-n_i} sum_j C(n_i, j) (j/n_i) log2(j/n_i).
pub fn mean_exact(setup: &ConditionalSetup) -> f64 {
    let mut acc = Kahan::default();
    acc.add(1.0);
    for (&n, &p) in setup.counts.iter().zip(&setup.p) {
        // fold 2^{1-n} into each term via the Binomial(n, 1/2) pmf
        let pmf = binom_half_pmf_row(n);
        let mut inner = Kahan::default();
        for (j, &w) in pmf.iter().enumerate().skip(1) {
            let x = j as f64 / n as f64;
            inner.add(w * xlog2(x));
        }
        acc.add(2.0 * p * inner.sum);
    }
    acc.sum
}

/// The exact law of the estimated information as a finite list of atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactPmf {
    pub atoms: Vec<(f64, f64)>,
}

impl ExactPmf {
    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|&(v, p)| v * p).sum()
    }

    pub fn moment(&self, r: u32) -> f64 {
        self.atoms.iter().map(|&(v, p)| v.powi(r as i32) * p).sum()
    }

    /// Expectation of exp(t X) over the atoms.
    pub fn mgf(&self, t: f64) -> f64 {
        self.atoms.iter().map(|&(v, p)| (t * v).exp() * p).sum()
    }
}

/// Brute-force oracle: the per-prefix success counts are independent
/// Binomial(n_i, 1/2) draws; enumerate every tuple, compute the information
/// through the entropy formulas, and aggregate equal values.
pub fn enumerate_pmf(setup: &ConditionalSetup) -> Result<ExactPmf> {
    enumerate_pmf_with_budget(setup, DEFAULT_BUDGET)
}

pub fn enumerate_pmf_with_budget(setup: &ConditionalSetup, budget: u128) -> Result<ExactPmf> {
    setup.check_budget(budget)?;
    let mut raw: Vec<(f64, f64)> = Vec::new();
    let mut failure: Option<Error> = None;
    for_each_tuple(setup, |js, weight| {
        if failure.is_some() {
            return;
        }
        let pi: Vec<Option<f64>> = js
            .iter()
            .zip(&setup.counts)
            .map(|(&j, &n)| Some(j as f64 / n as f64))
            .collect();
        match market_information(&setup.p, &pi) {
            Ok(v) => raw.push((v, weight)),
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    for (v, w) in raw {
        match atoms.last_mut() {
            Some((last_v, last_w)) if (v - *last_v).abs() <= 1e-12 => *last_w += w,
            _ => atoms.push((v, w)),
        }
    }
    Ok(ExactPmf { atoms })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup_l1(a: usize, b: usize) -> ConditionalSetup {
        ConditionalSetup::from_counts(1, vec![a, b]).unwrap()
    }

    #[test]
    fn mgf_at_zero_is_one() {
        let s = setup_l1(3, 5);
        assert!((mgf_exact(0.0, &s).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mgf_matches_pmf_weighted_sum() {
        let s = setup_l1(2, 2);
        let pmf = enumerate_pmf(&s).unwrap();
        for t in [-1.0, 0.5, 1.0] {
            let direct = mgf_exact(t, &s).unwrap();
            assert!((direct - pmf.mgf(t)).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn mgf_derivative_matches_mean() {
        let s = setup_l1(4, 3);
        let h = 1e-5;
        let d = (mgf_exact(h, &s).unwrap() - mgf_exact(-h, &s).unwrap()) / (2.0 * h);
        assert!((d - mean_exact(&s)).abs() < 1e-6);
    }

    #[test]
    fn moment_zero_is_one() {
        let s = setup_l1(5, 2);
        assert_eq!(moment_exact(0, &s).unwrap(), 1.0);
    }

    #[test]
    fn mean_hand_value() {
        let s = setup_l1(2, 2);
        assert!((mean_exact(&s) - 0.5).abs() < 1e-12);
        assert!((moment_exact(1, &s).unwrap() - 0.5).abs() < 1e-12);
        assert!((enumerate_pmf(&s).unwrap().mean() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_observation_is_deterministic_one() {
        let s = setup_l1(1, 1);
        assert!((mean_exact(&s) - 1.0).abs() < 1e-12);
        let pmf = enumerate_pmf(&s).unwrap();
        assert_eq!(pmf.atoms.len(), 1);
        assert!((pmf.atoms[0].0 - 1.0).abs() < 1e-12);
        assert!((pmf.atoms[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn variance_nonnegative() {
        for (a, b) in [(2, 3), (4, 4), (5, 2), (3, 6)] {
            let s = setup_l1(a, b);
            let m1 = moment_exact(1, &s).unwrap();
            let m2 = moment_exact(2, &s).unwrap();
            assert!(m2 - m1 * m1 >= -1e-12, "counts ({a},{b})");
        }
    }

    #[test]
    fn pmf_values_nonnegative_and_normalized() {
        let s = ConditionalSetup::from_counts(2, vec![2, 3, 2, 3]).unwrap();
        let pmf = enumerate_pmf(&s).unwrap();
        let total: f64 = pmf.atoms.iter().map(|&(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-10);
        assert!(pmf.atoms.iter().all(|&(v, p)| v >= -1e-12 && p > 0.0));
    }

    #[test]
    fn mean_close_to_gamma_mean_for_large_counts() {
        // asymptotic mean is k*theta = 2^{L-1}/(ln 2 * N)
        let s = setup_l1(50, 50);
        let asymptotic = 1.0 / (std::f64::consts::LN_2 * 100.0);
        let exact = mean_exact(&s);
        assert!((exact - asymptotic).abs() / asymptotic < 0.15);
    }

    #[test]
    fn bias_decays() {
        let mut prev = f64::INFINITY;
        for m in [2usize, 4, 8, 16, 32, 64, 128, 256] {
            let v = mean_exact(&setup_l1(m, m));
            assert!(v < prev, "mean not decreasing at m={m}");
            prev = v;
        }
        assert!(mean_exact(&setup_l1(128, 128)) < 0.05);
    }

    #[test]
    fn budget_refusal() {
        let s = ConditionalSetup::from_counts(1, vec![10_000, 10_000]).unwrap();
        match moment_exact(1, &s) {
            Err(Error::BudgetExceeded { terms, .. }) => assert!(terms > DEFAULT_BUDGET),
            other => panic!("expected budget error, got {other:?}"),
        }
        // the closed-form mean still runs fine at this size
        assert!(mean_exact(&s) > 0.0);
    }

    #[test]
    fn zero_count_rejected() {
        assert!(ConditionalSetup::from_counts(1, vec![0, 4]).is_err());
    }
}
