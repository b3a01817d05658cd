//! The market-efficiency test: null hypothesis "every conditional suffix
//! probability equals 1/2", statistic = estimated market information,
//! p-value from the asymptotic gamma law.

use crate::asymptotic::{gamma_params, survival, GammaParams};
use crate::error::{Error, Result};
use crate::information::{estimate_information, InformationEstimate};
use crate::symbolic::{gray_pattern, BinarySequence};

/// Below this many (L+1)-grams the gamma approximation is not trustworthy;
/// results carry a warning instead of being refused.
pub const SMALL_SAMPLE_THRESHOLD: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub estimate: InformationEstimate,
    pub params: GammaParams,
    pub p_value: f64,
    pub reject_95: bool,
    pub reject_99: bool,
    pub reject_999: bool,
    pub small_sample_warning: bool,
}

/// Run the efficiency test on a bit sequence at pattern length L.
///
/// Errors if any prefix pattern was never observed: the asymptotic law
/// presumes every prefix probability is positive, so the caller should
/// reduce L or lengthen the window instead.
pub fn test_efficiency(bits: &BinarySequence, l: u32) -> Result<TestResult> {
    let estimate = estimate_information(bits, l)?;
    if let Some(slot) = estimate.p_hat.iter().position(|&p| p == 0.0) {
        let pattern = gray_pattern(l, slot + 1)?;
        let rendered: String = pattern.bits.iter().map(|b| char::from(b'0' + b)).collect();
        return Err(Error::UnobservedPrefix {
            pattern: rendered,
            index: slot + 1,
        });
    }
    let params = gamma_params(l, estimate.n)?;
    let p_value = survival(estimate.info, &params)?;
    Ok(TestResult {
        small_sample_warning: estimate.n < SMALL_SAMPLE_THRESHOLD,
        reject_95: p_value < 0.05,
        reject_99: p_value < 0.01,
        reject_999: p_value < 0.001,
        p_value,
        params,
        estimate,
    })
}
