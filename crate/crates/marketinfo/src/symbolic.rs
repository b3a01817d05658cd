//! Symbolic representation of a price series: binary increase indicators,
//! Gray-ordered patterns, and overlapping (L+1)-gram counts.

use chrono::NaiveDate;

use crate::error::{Error, Result};

/// Largest supported pattern length. Tables have 2^L entries, so this keeps
/// memory trivial while far exceeding practical use (L is 1 or 2 in practice).
pub const MAX_L: u32 = 16;

/// A series of strictly positive prices at strictly increasing dates.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    dates: Vec<NaiveDate>,
    prices: Vec<f64>,
}

impl PriceSeries {
    pub fn new(dates: Vec<NaiveDate>, prices: Vec<f64>) -> Result<Self> {
        if prices.len() < 2 {
            return Err(Error::InputTooShort {
                needed: 2,
                got: prices.len(),
            });
        }
        if dates.len() != prices.len() {
            return Err(Error::Domain(format!(
                "{} dates but {} prices",
                dates.len(),
                prices.len()
            )));
        }
        for w in dates.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Domain(format!(
                    "dates not strictly increasing at {}",
                    w[1]
                )));
            }
        }
        for &p in &prices {
            if p <= 0.0 || !p.is_finite() {
                return Err(Error::Domain(format!("price {p} is not strictly positive")));
            }
        }
        Ok(Self { dates, prices })
    }

    /// Parse `date,price` CSV text. Expects a header row; rows must already be
    /// sorted ascending by date. Parse failures report the 1-based row number.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut dates = Vec::new();
        let mut prices = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let row = idx + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if idx == 0 {
                let header = line.to_ascii_lowercase();
                if header != "date,price" {
                    return Err(Error::CsvParse {
                        row,
                        reason: format!("expected header `date,price`, got `{line}`"),
                    });
                }
                continue;
            }
            let (date_str, price_str) = line.split_once(',').ok_or(Error::CsvParse {
                row,
                reason: "expected two comma-separated fields".into(),
            })?;
            let date = NaiveDate::parse_from_str(date_str.trim(), "%Y-%m-%d").map_err(|e| {
                Error::CsvParse {
                    row,
                    reason: format!("bad date `{date_str}`: {e}"),
                }
            })?;
            let price: f64 = price_str.trim().parse().map_err(|e| Error::CsvParse {
                row,
                reason: format!("bad price `{price_str}`: {e}"),
            })?;
            dates.push(date);
            prices.push(price);
        }
        Self::new(dates, prices)
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }
}

/// A sequence of increase indicators: bit i is 1 iff the price strictly rose.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinarySequence {
    bits: Vec<u8>,
}

impl BinarySequence {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::Domain(format!("bit value {b} is not 0 or 1")));
        }
        Ok(Self { bits })
    }

    /// Parse a string of '0'/'1' characters.
    pub fn from_str_bits(s: &str) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                _ => Err(Error::Domain(format!("invalid bit character `{c}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { bits })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Encode consecutive price moves as increase indicators. A tie or a drop
/// maps to 0: the indicator uses the strict inequality P_i - P_{i-1} > 0.
pub fn encode_returns(series: &PriceSeries) -> BinarySequence {
    let prices = series.prices();
    let bits = prices
        .windows(2)
        .map(|w| u8::from(w[1] - w[0] > 0.0))
        .collect();
    BinarySequence { bits }
}

/// A length-L bit tuple together with its 1-based position in the reflected
/// binary Gray ordering. Position 1 is the all-zeros tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub len: u32,
    pub bits: Vec<u8>,
    pub index: usize,
}

fn check_l(l: u32) -> Result<()> {
    if l == 0 || l > MAX_L {
        return Err(Error::Domain(format!("pattern length {l} not in [1, {MAX_L}]")));
    }
    Ok(())
}

/// Pattern at a 1-based Gray position, via the canonical reflected code:
/// value = (i-1) XOR ((i-1) >> 1), most significant bit first.
pub fn gray_pattern(l: u32, index: usize) -> Result<Pattern> {
    check_l(l)?;
    let size = 1usize << l;
    if index < 1 || index > size {
        return Err(Error::Domain(format!(
            "Gray index {index} out of range [1, {size}]"
        )));
    }
    let x = index - 1;
    let g = x ^ (x >> 1);
    let bits = (0..l).rev().map(|k| ((g >> k) & 1) as u8).collect();
    Ok(Pattern {
        len: l,
        bits,
        index,
    })
}

/// Inverse of [`gray_pattern`]: recover the 1-based Gray position of a tuple.
pub fn gray_index(bits: &[u8]) -> Result<usize> {
    let l = bits.len() as u32;
    check_l(l)?;
    let mut g = 0usize;
    for &b in bits {
        if b > 1 {
            return Err(Error::Domain(format!("bit value {b} is not 0 or 1")));
        }
        g = (g << 1) | b as usize;
    }
    // undo g = x ^ (x >> 1) with doubling shifts
    let mut x = g;
    let mut shift = 1;
    while shift < l as usize {
        x ^= x >> shift;
        shift <<= 1;
    }
    Ok(x + 1)
}

/// Overlapping (L+1)-gram counts, indexed by the Gray position of the L-bit
/// prefix. The sufficient statistic for everything downstream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternTable {
    pub l: u32,
    /// Total number of (L+1)-grams: sequence length minus L.
    pub n: usize,
    pub prefix_counts: Vec<usize>,
    pub suffix_one_counts: Vec<usize>,
}

/// Count overlapping windows of length L+1, step 1, over the bit sequence.
pub fn count_patterns(bits: &BinarySequence, l: u32) -> Result<PatternTable> {
    check_l(l)?;
    let l_us = l as usize;
    if bits.len() < l_us + 1 {
        return Err(Error::InputTooShort {
            needed: l_us + 1,
            got: bits.len(),
        });
    }
    let size = 1usize << l;
    let mut prefix_counts = vec![0usize; size];
    let mut suffix_one_counts = vec![0usize; size];
    let data = bits.bits();
    for window in data.windows(l_us + 1) {
        let slot = gray_index(&window[..l_us])? - 1;
        prefix_counts[slot] += 1;
        if window[l_us] == 1 {
            suffix_one_counts[slot] += 1;
        }
    }
    Ok(PatternTable {
        l,
        n: bits.len() - l_us,
        prefix_counts,
        suffix_one_counts,
    })
}

/// Empirical prefix probabilities and conditional suffix probabilities.
/// `pi_hat[i]` is `None` for prefixes that were never observed.
pub fn empirical_probs(table: &PatternTable) -> Result<(Vec<f64>, Vec<Option<f64>>)> {
    if table.n == 0 {
        return Err(Error::Domain("empty pattern table".into()));
    }
    let n = table.n as f64;
    let p_hat = table
        .prefix_counts
        .iter()
        .map(|&c| c as f64 / n)
        .collect();
    let pi_hat = table
        .prefix_counts
        .iter()
        .zip(&table.suffix_one_counts)
        .map(|(&c, &ones)| {
            if c > 0 {
                Some(ones as f64 / c as f64)
            } else {
                None
            }
        })
        .collect();
    Ok((p_hat, pi_hat))
}
