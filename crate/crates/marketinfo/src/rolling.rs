//! Rolling-window estimation and testing over a price series: one test per
//! date using the most recent `window` returns, plus rejection-rate
//! summaries over all emitted dates.

use chrono::NaiveDate;
use rayon::prelude::*;

use crate::asymptotic::critical_value;
use crate::efficiency::test_efficiency;
use crate::error::{Error, Result};
use crate::symbolic::{encode_returns, BinarySequence, PriceSeries};

#[derive(Debug, Clone, PartialEq)]
pub struct RollingConfig {
    /// Returns per window.
    pub window: usize,
    pub l: u32,
    /// Confidence levels, strictly increasing, each in (0, 1).
    pub levels: Vec<f64>,
    /// Rows to advance between windows.
    pub step: usize,
}

impl Default for RollingConfig {
    fn default() -> Self {
        Self {
            window: 100,
            l: 1,
            levels: vec![0.95, 0.99, 0.999],
            step: 1,
        }
    }
}

impl RollingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < self.l as usize + 1 {
            return Err(Error::Domain(format!(
                "window {} smaller than L + 1 = {}",
                self.window,
                self.l + 1
            )));
        }
        if self.step == 0 {
            return Err(Error::Domain("step must be positive".into()));
        }
        if self.levels.is_empty() {
            return Err(Error::Domain("need at least one confidence level".into()));
        }
        for w in self.levels.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Domain("levels must be strictly increasing".into()));
            }
        }
        if self.levels.iter().any(|&l| !(0.0 < l && l < 1.0)) {
            return Err(Error::Domain("levels must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RollingRow {
    pub date: NaiveDate,
    /// `None` when the window could not be tested (unobserved prefix);
    /// `reason` then carries a short code.
    pub info: Option<f64>,
    pub p_value: Option<f64>,
    pub critical_values: Vec<f64>,
    pub rejects: Vec<bool>,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RollingSummary {
    /// Fraction of tested dates rejected at each configured level.
    pub rejection_fractions: Vec<(f64, f64)>,
    pub rows_total: usize,
    pub rows_skipped: usize,
}

/// Run the rolling analysis. Each output row uses the `window + 1` prices
/// ending at its date. Windows are independent and run concurrently; rows
/// come back in date order.
pub fn run_roll(series: &PriceSeries, config: &RollingConfig) -> Result<(Vec<RollingRow>, RollingSummary)> {
    config.validate()?;
    let w = config.window;
    if series.len() < w + 1 {
        return Err(Error::InputTooShort {
            needed: w + 1,
            got: series.len(),
        });
    }
    let bits = encode_returns(series);
    let dates = series.dates();
    let starts: Vec<usize> = (0..=bits.len() - w).step_by(config.step).collect();
    let rows: Vec<RollingRow> = starts
        .par_iter()
        .map(|&start| {
            let date = dates[start + w];
            let window_bits =
                BinarySequence::new(bits.bits()[start..start + w].to_vec()).expect("bits are 0/1");
            match test_efficiency(&window_bits, config.l) {
                Ok(r) => {
                    let critical_values = config
                        .levels
                        .iter()
                        .map(|&level| critical_value(1.0 - level, &r.params))
                        .collect::<Result<Vec<f64>>>()?;
                    let rejects = config
                        .levels
                        .iter()
                        .map(|&level| r.p_value < 1.0 - level)
                        .collect();
                    Ok(RollingRow {
                        date,
                        info: Some(r.estimate.info),
                        p_value: Some(r.p_value),
                        critical_values,
                        rejects,
                        reason: None,
                    })
                }
                Err(Error::UnobservedPrefix { pattern, .. }) => Ok(RollingRow {
                    date,
                    info: None,
                    p_value: None,
                    critical_values: Vec::new(),
                    rejects: vec![false; config.levels.len()],
                    reason: Some(format!("unobserved_prefix:{pattern}")),
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let tested = rows.iter().filter(|r| r.p_value.is_some()).count();
    let rejection_fractions = config
        .levels
        .iter()
        .enumerate()
        .map(|(k, &level)| {
            let hits = rows.iter().filter(|r| r.rejects[k]).count();
            (level, hits as f64 / tested.max(1) as f64)
        })
        .collect();
    let summary = RollingSummary {
        rejection_fractions,
        rows_total: rows.len(),
        rows_skipped: rows.len() - tested,
    };
    Ok((rows, summary))
}
