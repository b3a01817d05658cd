//! C ABI for the marketinfo library.
//!
//! Scalar results come back through out-pointers with an [`MiStatus`] return
//! code; the exact pmf is exposed through an opaque handle with accessor
//! functions. The header is generated into `include/marketinfo.h` at build
//! time.

use std::slice;

use marketinfo::asymptotic::{critical_value, gamma_params, survival};
use marketinfo::efficiency::test_efficiency;
use marketinfo::error::Error;
use marketinfo::exact::{enumerate_pmf, mean_exact, ConditionalSetup, ExactPmf};
use marketinfo::information::estimate_information;
use marketinfo::symbolic::BinarySequence;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MiStatus {
    MiOk = 0,
    /// A null pointer or malformed argument.
    MiInvalidArgument = 1,
    /// Input data too short or otherwise unusable.
    MiDataError = 2,
    /// A prefix pattern was never observed; reduce L or lengthen the window.
    MiUnobservedPrefix = 3,
    /// Computation budget or numerical range exceeded.
    MiLimitError = 4,
}

fn status_of(err: &Error) -> MiStatus {
    match err {
        Error::Domain(_) => MiStatus::MiInvalidArgument,
        Error::InputTooShort { .. } | Error::CsvParse { .. } | Error::Io(_) => MiStatus::MiDataError,
        Error::UnobservedPrefix { .. } => MiStatus::MiUnobservedPrefix,
        Error::BudgetExceeded { .. } | Error::Range(_) => MiStatus::MiLimitError,
    }
}

unsafe fn bits_from_raw(bits: *const u8, len: usize) -> Result<BinarySequence, MiStatus> {
    if bits.is_null() {
        return Err(MiStatus::MiInvalidArgument);
    }
    BinarySequence::new(slice::from_raw_parts(bits, len).to_vec())
        .map_err(|e| status_of(&e))
}

/// Result of the efficiency test.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MiTestResult {
    /// Estimated market information, in bits.
    pub info: f64,
    /// Tail probability under the asymptotic gamma null law.
    pub p_value: f64,
    /// Number of (L+1)-grams in the input.
    pub n: u64,
    /// Gamma shape 2^{L-1}.
    pub shape: u64,
    /// Gamma scale 1/(ln 2 * N).
    pub scale: f64,
    pub reject_95: bool,
    pub reject_99: bool,
    pub reject_999: bool,
    /// Set when N < 100 and the gamma approximation is rough.
    pub small_sample_warning: bool,
}

/// Estimate the market information of a 0/1 byte array at pattern length L.
///
/// # Safety
/// `bits` must point to `len` readable bytes; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mi_estimate(
    bits: *const u8,
    len: usize,
    l: u32,
    out: *mut f64,
) -> MiStatus {
    if out.is_null() {
        return MiStatus::MiInvalidArgument;
    }
    let seq = match bits_from_raw(bits, len) {
        Ok(s) => s,
        Err(status) => return status,
    };
    match estimate_information(&seq, l) {
        Ok(est) => {
            *out = est.info;
            MiStatus::MiOk
        }
        Err(e) => status_of(&e),
    }
}

/// Run the market-efficiency test on a 0/1 byte array.
///
/// # Safety
/// `bits` must point to `len` readable bytes; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mi_test(
    bits: *const u8,
    len: usize,
    l: u32,
    out: *mut MiTestResult,
) -> MiStatus {
    if out.is_null() {
        return MiStatus::MiInvalidArgument;
    }
    let seq = match bits_from_raw(bits, len) {
        Ok(s) => s,
        Err(status) => return status,
    };
    match test_efficiency(&seq, l) {
        Ok(r) => {
            *out = MiTestResult {
                info: r.estimate.info,
                p_value: r.p_value,
                n: r.estimate.n as u64,
                shape: r.params.shape,
                scale: r.params.scale,
                reject_95: r.reject_95,
                reject_99: r.reject_99,
                reject_999: r.reject_999,
                small_sample_warning: r.small_sample_warning,
            };
            MiStatus::MiOk
        }
        Err(e) => status_of(&e),
    }
}

/// Tail probability P(X > x) of the asymptotic null law for (L, N).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mi_survival(x: f64, l: u32, n: u64, out: *mut f64) -> MiStatus {
    if out.is_null() {
        return MiStatus::MiInvalidArgument;
    }
    let result = gamma_params(l, n as usize).and_then(|p| survival(x, &p));
    match result {
        Ok(v) => {
            *out = v;
            MiStatus::MiOk
        }
        Err(e) => status_of(&e),
    }
}

/// Critical value of the test: the information level with tail probability
/// `alpha` under the null law for (L, N).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mi_critical_value(alpha: f64, l: u32, n: u64, out: *mut f64) -> MiStatus {
    if out.is_null() {
        return MiStatus::MiInvalidArgument;
    }
    let result = gamma_params(l, n as usize).and_then(|p| critical_value(alpha, &p));
    match result {
        Ok(v) => {
            *out = v;
            MiStatus::MiOk
        }
        Err(e) => status_of(&e),
    }
}

/// Exact conditional mean of the estimator given per-prefix counts.
/// `counts_len` must be a power of two, at least 2.
///
/// # Safety
/// `counts` must point to `counts_len` readable entries; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mi_mean_exact(
    counts: *const u64,
    counts_len: usize,
    out: *mut f64,
) -> MiStatus {
    if counts.is_null() || out.is_null() {
        return MiStatus::MiInvalidArgument;
    }
    if !counts_len.is_power_of_two() || counts_len < 2 {
        return MiStatus::MiInvalidArgument;
    }
    let l = counts_len.trailing_zeros();
    let counts: Vec<usize> = slice::from_raw_parts(counts, counts_len)
        .iter()
        .map(|&c| c as usize)
        .collect();
    match ConditionalSetup::from_counts(l, counts) {
        Ok(setup) => {
            *out = mean_exact(&setup);
            MiStatus::MiOk
        }
        Err(e) => status_of(&e),
    }
}

/// Opaque handle to an enumerated exact pmf.
pub struct MiPmf(ExactPmf);

/// Enumerate the exact law of the estimator for per-prefix counts, writing
/// an owned handle to `out`. Free it with [`mi_pmf_free`].
///
/// # Safety
/// `counts` must point to `counts_len` readable entries; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mi_pmf_new(
    counts: *const u64,
    counts_len: usize,
    out: *mut *mut MiPmf,
) -> MiStatus {
    if counts.is_null() || out.is_null() {
        return MiStatus::MiInvalidArgument;
    }
    if !counts_len.is_power_of_two() || counts_len < 2 {
        return MiStatus::MiInvalidArgument;
    }
    let l = counts_len.trailing_zeros();
    let counts: Vec<usize> = slice::from_raw_parts(counts, counts_len)
        .iter()
        .map(|&c| c as usize)
        .collect();
    let pmf = ConditionalSetup::from_counts(l, counts).and_then(|s| enumerate_pmf(&s));
    match pmf {
        Ok(p) => {
            *out = Box::into_raw(Box::new(MiPmf(p)));
            MiStatus::MiOk
        }
        Err(e) => status_of(&e),
    }
}

/// Number of atoms in the pmf.
///
/// # Safety
/// `pmf` must be a live handle from [`mi_pmf_new`].
#[no_mangle]
pub unsafe extern "C" fn mi_pmf_len(pmf: *const MiPmf) -> usize {
    if pmf.is_null() {
        return 0;
    }
    let pmf = &*pmf;
    pmf.0.atoms.len()
}

/// Value and probability of the atom at `index`.
///
/// # Safety
/// `pmf` must be a live handle; `value` and `probability` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mi_pmf_atom(
    pmf: *const MiPmf,
    index: usize,
    value: *mut f64,
    probability: *mut f64,
) -> MiStatus {
    if pmf.is_null() || value.is_null() || probability.is_null() {
        return MiStatus::MiInvalidArgument;
    }
    let pmf = &*pmf;
    match pmf.0.atoms.get(index) {
        Some(&(v, p)) => {
            *value = v;
            *probability = p;
            MiStatus::MiOk
        }
        None => MiStatus::MiInvalidArgument,
    }
}

/// Release a pmf handle. A null pointer is a no-op.
///
/// # Safety
/// `pmf` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn mi_pmf_free(pmf: *mut MiPmf) {
    if !pmf.is_null() {
        drop(Box::from_raw(pmf));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_through_ffi_matches_library() {
        let bits: Vec<u8> = (0..101).map(|i| (i % 2) as u8).collect();
        let mut out = MiTestResult {
            info: 0.0,
            p_value: 0.0,
            n: 0,
            shape: 0,
            scale: 0.0,
            reject_95: false,
            reject_99: false,
            reject_999: false,
            small_sample_warning: true,
        };
        let status = unsafe { mi_test(bits.as_ptr(), bits.len(), 1, &mut out) };
        assert_eq!(status, MiStatus::MiOk);
        assert!((out.info - 1.0).abs() < 1e-12);
        assert_eq!(out.n, 100);
        assert!(out.reject_999);
        assert!(!out.small_sample_warning);
    }

    #[test]
    fn unobserved_prefix_status() {
        let bits = [1u8; 40];
        let mut out = 0.0f64;
        // estimation itself is fine
        assert_eq!(unsafe { mi_estimate(bits.as_ptr(), bits.len(), 1, &mut out) }, MiStatus::MiOk);
        let mut res = unsafe { std::mem::zeroed() };
        assert_eq!(
            unsafe { mi_test(bits.as_ptr(), bits.len(), 1, &mut res) },
            MiStatus::MiUnobservedPrefix
        );
    }

    #[test]
    fn null_pointers_rejected() {
        let mut out = 0.0f64;
        assert_eq!(unsafe { mi_estimate(std::ptr::null(), 0, 1, &mut out) }, MiStatus::MiInvalidArgument);
        assert_eq!(
            unsafe { mi_survival(0.1, 1, 100, std::ptr::null_mut()) },
            MiStatus::MiInvalidArgument
        );
    }

    #[test]
    fn survival_critical_roundtrip() {
        let mut cv = 0.0f64;
        assert_eq!(unsafe { mi_critical_value(0.05, 1, 100, &mut cv) }, MiStatus::MiOk);
        let mut back = 0.0f64;
        assert_eq!(unsafe { mi_survival(cv, 1, 100, &mut back) }, MiStatus::MiOk);
        assert!((back - 0.05).abs() < 1e-9);
    }

    #[test]
    fn pmf_handle_lifecycle() {
        let counts = [2u64, 2];
        let mut handle: *mut MiPmf = std::ptr::null_mut();
        assert_eq!(unsafe { mi_pmf_new(counts.as_ptr(), 2, &mut handle) }, MiStatus::MiOk);
        let len = unsafe { mi_pmf_len(handle) };
        assert!(len >= 2);
        let (mut total, mut mean) = (0.0, 0.0);
        for i in 0..len {
            let (mut v, mut p) = (0.0, 0.0);
            assert_eq!(unsafe { mi_pmf_atom(handle, i, &mut v, &mut p) }, MiStatus::MiOk);
            total += p;
            mean += v * p;
        }
        assert!((total - 1.0).abs() < 1e-10);
        assert!((mean - 0.5).abs() < 1e-12);
        let mut mean_direct = 0.0f64;
        assert_eq!(unsafe { mi_mean_exact(counts.as_ptr(), 2, &mut mean_direct) }, MiStatus::MiOk);
        assert!((mean_direct - 0.5).abs() < 1e-12);
        unsafe { mi_pmf_free(handle) };
    }
}
