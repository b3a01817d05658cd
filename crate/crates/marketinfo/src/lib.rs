//! Market information of a binary-encoded price-return series, and a
//! statistical test of the weak-form efficient market hypothesis.
//!
//! A price series is encoded as increase indicators, overlapping
//! (L+1)-grams are counted by their L-bit prefix, and the market
//! information is the gap between the Shannon entropy an efficient market
//! would show (every conditional continuation probability 1/2) and the
//! observed entropy. Under the null the estimator follows, asymptotically,
//! a gamma law with shape 2^{L-1} and scale 1/(ln 2 * N), where N is the
//! number of (L+1)-grams in the window (bit count minus L); the library
//! uses that effective count rather than the raw series length for the
//! scale, a 1% difference at N = 100 that shrinks with the window.

pub mod asymptotic;
pub mod efficiency;
pub mod error;
pub mod exact;
pub mod information;
pub mod montecarlo;
pub mod rolling;
pub mod symbolic;

pub use error::{Error, Result};
