//! C ABI over the rankcorr library: flat-array entry points for the
//! correlation metrics and losses, plus an opaque handle for the memory
//! bank. Every function returns an [`RcStatus`] code; outputs go through
//! caller-provided buffers, so no allocation crosses the boundary except
//! the bank handle itself.

use std::ffi::CStr;
use std::os::raw::c_char;

use rankcorr::bank::MemoryBank;
use rankcorr::baseline::{margin_rank_loss_with, permutahedron_project, MarginOrder, ProjectionConfig};
use rankcorr::correlation::{hard_rank, plcc, srocc, srocc_closed_form};
use rankcorr::error::Error;
use rankcorr::soft_rank::{
    mono_loss, soft_rank, soft_rank_jacobian, GradTaggedScores, SoftRankConfig,
};

/// Result code of every C entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    LengthMismatch = 3,
    TooShort = 4,
    NonFinite = 5,
    DegenerateVariance = 6,
    TiesPresent = 7,
    InvalidConfig = 8,
    LabelConflict = 9,
    DuplicateId = 10,
    ParseError = 11,
    IoError = 12,
    Divergence = 13,
}

impl From<&Error> for RcStatus {
    fn from(error: &Error) -> Self {
        match error {
            Error::LengthMismatch { .. } => RcStatus::LengthMismatch,
            Error::TooShort { .. } => RcStatus::TooShort,
            Error::NonFinite { .. } => RcStatus::NonFinite,
            Error::DegenerateVariance { .. } => RcStatus::DegenerateVariance,
            Error::TiesPresent => RcStatus::TiesPresent,
            Error::InvalidConfig(_) => RcStatus::InvalidConfig,
            Error::LabelConflict { .. } => RcStatus::LabelConflict,
            Error::DuplicateId { .. } => RcStatus::DuplicateId,
            Error::Parse { .. } => RcStatus::ParseError,
            Error::Io(_) => RcStatus::IoError,
            Error::Divergence { .. } => RcStatus::Divergence,
        }
    }
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn rc_status_message(status: RcStatus) -> *const c_char {
    let message: &'static [u8] = match status {
        RcStatus::Ok => b"ok\0",
        RcStatus::NullPointer => b"null pointer argument\0",
        RcStatus::InvalidUtf8 => b"string argument is not valid UTF-8\0",
        RcStatus::LengthMismatch => b"input lengths differ\0",
        RcStatus::TooShort => b"input too short\0",
        RcStatus::NonFinite => b"non-finite value in input\0",
        RcStatus::DegenerateVariance => b"degenerate variance (constant input)\0",
        RcStatus::TiesPresent => b"tied values where distinct values are required\0",
        RcStatus::InvalidConfig => b"invalid configuration value\0",
        RcStatus::LabelConflict => b"ground-truth label conflicts with stored value\0",
        RcStatus::DuplicateId => b"duplicate sample id\0",
        RcStatus::ParseError => b"parse error\0",
        RcStatus::IoError => b"i/o error\0",
        RcStatus::Divergence => b"training diverged\0",
    };
    message.as_ptr() as *const c_char
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

unsafe fn slice_in<'a>(ptr: *const f64, len: usize) -> Option<&'a [f64]> {
    if len == 0 {
        Some(&[])
    } else if ptr.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(ptr, len))
    }
}

unsafe fn slice_out<'a>(ptr: *mut f64, len: usize) -> Option<&'a mut [f64]> {
    if len == 0 {
        Some(&mut [])
    } else if ptr.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts_mut(ptr, len))
    }
}

unsafe fn ids_in(ids: *const *const c_char, len: usize) -> Result<Vec<String>, RcStatus> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if ids.is_null() {
        return Err(RcStatus::NullPointer);
    }
    let raw = std::slice::from_raw_parts(ids, len);
    let mut out = Vec::with_capacity(len);
    for &ptr in raw {
        if ptr.is_null() {
            return Err(RcStatus::NullPointer);
        }
        match CStr::from_ptr(ptr).to_str() {
            Ok(s) => out.push(s.to_string()),
            Err(_) => return Err(RcStatus::InvalidUtf8),
        }
    }
    Ok(out)
}

fn write_scalar(out: *mut f64, value: f64) -> RcStatus {
    if out.is_null() {
        return RcStatus::NullPointer;
    }
    unsafe { *out = value };
    RcStatus::Ok
}

/// Pearson linear correlation of two length-`len` vectors.
///
/// # Safety
/// `a` and `b` must point to `len` readable doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn rc_plcc(
    a: *const f64,
    b: *const f64,
    len: usize,
    out: *mut f64,
) -> RcStatus {
    let (Some(a), Some(b)) = (slice_in(a, len), slice_in(b, len)) else {
        return RcStatus::NullPointer;
    };
    match plcc(a, b) {
        Ok(value) => write_scalar(out, value),
        Err(e) => (&e).into(),
    }
}

/// Spearman rank-order correlation (fractional ranks, tie-aware).
///
/// # Safety
/// `q` and `qhat` must point to `len` readable doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rc_srocc(
    q: *const f64,
    qhat: *const f64,
    len: usize,
    out: *mut f64,
) -> RcStatus {
    let (Some(q), Some(qhat)) = (slice_in(q, len), slice_in(qhat, len)) else {
        return RcStatus::NullPointer;
    };
    match srocc(q, qhat) {
        Ok(value) => write_scalar(out, value),
        Err(e) => (&e).into(),
    }
}

/// Closed-form Spearman correlation from squared rank differences;
/// requires tie-free inputs.
///
/// # Safety
/// `q` and `qhat` must point to `len` readable doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rc_srocc_closed_form(
    q: *const f64,
    qhat: *const f64,
    len: usize,
    out: *mut f64,
) -> RcStatus {
    let (Some(q), Some(qhat)) = (slice_in(q, len), slice_in(qhat, len)) else {
        return RcStatus::NullPointer;
    };
    match srocc_closed_form(q, qhat) {
        Ok(value) => write_scalar(out, value),
        Err(e) => (&e).into(),
    }
}

/// Fractional hard ranks of `x` into `out_ranks` (length `len`).
///
/// # Safety
/// `x` must point to `len` readable doubles; `out_ranks` to `len` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn rc_hard_rank(
    x: *const f64,
    len: usize,
    out_ranks: *mut f64,
) -> RcStatus {
    let (Some(x), Some(out)) = (slice_in(x, len), slice_out(out_ranks, len)) else {
        return RcStatus::NullPointer;
    };
    match hard_rank(x) {
        Ok(ranks) => {
            out.copy_from_slice(&ranks);
            RcStatus::Ok
        }
        Err(e) => (&e).into(),
    }
}

/// Smooth ranks of `x` at steepness `k` into `out_ranks` (length `len`).
/// Pass `eps <= 0` to use the default guard threshold.
///
/// # Safety
/// `x` must point to `len` readable doubles; `out_ranks` to `len` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn rc_soft_rank(
    x: *const f64,
    len: usize,
    k: f64,
    eps: f64,
    out_ranks: *mut f64,
) -> RcStatus {
    let (Some(x), Some(out)) = (slice_in(x, len), slice_out(out_ranks, len)) else {
        return RcStatus::NullPointer;
    };
    let cfg = match config(k, eps) {
        Ok(cfg) => cfg,
        Err(status) => return status,
    };
    match soft_rank(x, &cfg) {
        Ok(ranks) => {
            out.copy_from_slice(&ranks);
            RcStatus::Ok
        }
        Err(e) => (&e).into(),
    }
}

/// Dense Jacobian of the smooth ranks, row-major into `out_jacobian`
/// (length `len * len`).
///
/// # Safety
/// `x` must point to `len` readable doubles; `out_jacobian` to `len * len`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rc_soft_rank_jacobian(
    x: *const f64,
    len: usize,
    k: f64,
    eps: f64,
    out_jacobian: *mut f64,
) -> RcStatus {
    let (Some(x), Some(out)) = (slice_in(x, len), slice_out(out_jacobian, len * len)) else {
        return RcStatus::NullPointer;
    };
    let cfg = match config(k, eps) {
        Ok(cfg) => cfg,
        Err(status) => return status,
    };
    match soft_rank_jacobian(x, &cfg) {
        Ok(rows) => {
            for (i, row) in rows.iter().enumerate() {
                out[i * len..(i + 1) * len].copy_from_slice(row);
            }
            RcStatus::Ok
        }
        Err(e) => (&e).into(),
    }
}

fn config(k: f64, eps: f64) -> Result<SoftRankConfig, RcStatus> {
    let eps = if eps <= 0.0 {
        SoftRankConfig::DEFAULT_EPS
    } else {
        eps
    };
    SoftRankConfig::with_eps(k, eps).map_err(|e| (&e).into())
}

/// Monotonicity loss of predictions `qhat` against ground truth `q`.
///
/// `grad_mask` may be NULL (all entries live) or point to `len` bytes where
/// non-zero marks a live entry. `out_grad` may be NULL when the gradient is
/// not wanted; `out_degenerate` may be NULL.
///
/// # Safety
/// All non-NULL pointers must reference buffers of `len` elements.
#[no_mangle]
pub unsafe extern "C" fn rc_mono_loss(
    qhat: *const f64,
    q: *const f64,
    grad_mask: *const u8,
    len: usize,
    k: f64,
    eps: f64,
    out_loss: *mut f64,
    out_grad: *mut f64,
    out_degenerate: *mut bool,
) -> RcStatus {
    let (Some(qhat), Some(q)) = (slice_in(qhat, len), slice_in(q, len)) else {
        return RcStatus::NullPointer;
    };
    let cfg = match config(k, eps) {
        Ok(cfg) => cfg,
        Err(status) => return status,
    };
    let mask: Vec<bool> = if grad_mask.is_null() {
        vec![true; len]
    } else {
        std::slice::from_raw_parts(grad_mask, len)
            .iter()
            .map(|&m| m != 0)
            .collect()
    };
    let tagged = match GradTaggedScores::new(qhat.to_vec(), mask) {
        Ok(tagged) => tagged,
        Err(e) => return (&e).into(),
    };
    match mono_loss(&tagged, q, &cfg) {
        Ok(result) => {
            if !out_grad.is_null() {
                std::slice::from_raw_parts_mut(out_grad, len).copy_from_slice(&result.grad);
            }
            if !out_degenerate.is_null() {
                *out_degenerate = result.degenerate;
            }
            write_scalar(out_loss, result.loss)
        }
        Err(e) => (&e).into(),
    }
}

/// Pairwise margin ranking loss, with the comparison sign taken from the
/// predicted order unless `ground_truth_order` is set.
///
/// # Safety
/// `qhat` and `q` must point to `len` readable doubles; `out_grad`, when
/// non-NULL, to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rc_margin_rank_loss(
    qhat: *const f64,
    q: *const f64,
    len: usize,
    ground_truth_order: bool,
    out_loss: *mut f64,
    out_grad: *mut f64,
) -> RcStatus {
    let (Some(qhat), Some(q)) = (slice_in(qhat, len), slice_in(q, len)) else {
        return RcStatus::NullPointer;
    };
    let tagged = match GradTaggedScores::all_live(qhat.to_vec()) {
        Ok(tagged) => tagged,
        Err(e) => return (&e).into(),
    };
    let order = if ground_truth_order {
        MarginOrder::GroundTruth
    } else {
        MarginOrder::Predicted
    };
    match margin_rank_loss_with(&tagged, q, order) {
        Ok(result) => {
            if !out_grad.is_null() {
                std::slice::from_raw_parts_mut(out_grad, len).copy_from_slice(&result.grad);
            }
            write_scalar(out_loss, result.loss)
        }
        Err(e) => (&e).into(),
    }
}

/// Euclidean projection of `-x / beta` onto the permutahedron of
/// `{1, .., len}`.
///
/// # Safety
/// `x` must point to `len` readable doubles; `out` to `len` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn rc_permutahedron_project(
    x: *const f64,
    len: usize,
    beta: f64,
    out: *mut f64,
) -> RcStatus {
    let (Some(x), Some(out)) = (slice_in(x, len), slice_out(out, len)) else {
        return RcStatus::NullPointer;
    };
    let cfg = match ProjectionConfig::new(beta) {
        Ok(cfg) => cfg,
        Err(e) => return (&e).into(),
    };
    match permutahedron_project(x, &cfg) {
        Ok(z) => {
            out.copy_from_slice(&z);
            RcStatus::Ok
        }
        Err(e) => (&e).into(),
    }
}

/// Ordered pairwise evaluations behind a full smooth rank vector.
#[no_mangle]
pub extern "C" fn rc_mono_loss_cost(n: usize) -> u64 {
    rankcorr::soft_rank::mono_loss_cost(n)
}

/// Ordered pair evaluations of the margin loss.
#[no_mangle]
pub extern "C" fn rc_margin_loss_cost(n: usize) -> u64 {
    rankcorr::baseline::margin_loss_cost(n)
}

/// Opaque memory bank handle.
pub struct RcBank {
    inner: MemoryBank,
}

/// Creates a memory bank retaining entries for the last `retention_epochs`
/// epochs. Returns NULL when `retention_epochs` is zero.
#[no_mangle]
pub extern "C" fn rc_bank_new(retention_epochs: u64) -> *mut RcBank {
    match MemoryBank::new(retention_epochs) {
        Ok(inner) => Box::into_raw(Box::new(RcBank { inner })),
        Err(_) => std::ptr::null_mut(),
    }
}

/// Frees a bank created by [`rc_bank_new`] or [`rc_bank_load`]. NULL is
/// ignored.
///
/// # Safety
/// `bank` must be a pointer previously returned by this library and not
/// yet freed.
#[no_mangle]
pub unsafe extern "C" fn rc_bank_free(bank: *mut RcBank) {
    if !bank.is_null() {
        drop(Box::from_raw(bank));
    }
}

/// Number of samples currently stored; 0 for NULL.
///
/// # Safety
/// `bank` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn rc_bank_len(bank: *const RcBank) -> usize {
    bank.as_ref().map(|b| b.inner.len()).unwrap_or(0)
}

/// Records a batch of `len` samples at `epoch`.
///
/// # Safety
/// `ids` must point to `len` NUL-terminated strings; `preds` and `mos` to
/// `len` readable doubles; `bank` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_bank_update(
    bank: *mut RcBank,
    ids: *const *const c_char,
    preds: *const f64,
    mos: *const f64,
    len: usize,
    epoch: u64,
) -> RcStatus {
    let Some(bank) = bank.as_mut() else {
        return RcStatus::NullPointer;
    };
    let (Some(preds), Some(mos)) = (slice_in(preds, len), slice_in(mos, len)) else {
        return RcStatus::NullPointer;
    };
    let ids = match ids_in(ids, len) {
        Ok(ids) => ids,
        Err(status) => return status,
    };
    match bank.inner.update(&ids, preds, mos, epoch) {
        Ok(()) => RcStatus::Ok,
        Err(e) => (&e).into(),
    }
}

/// Evicts entries older than the retention horizon at `current_epoch`.
///
/// # Safety
/// `bank` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_bank_evict(bank: *mut RcBank, current_epoch: u64) -> RcStatus {
    let Some(bank) = bank.as_mut() else {
        return RcStatus::NullPointer;
    };
    bank.inner.evict(current_epoch);
    RcStatus::Ok
}

/// Size of the union that [`rc_bank_mono_loss`] would evaluate for a batch
/// of `len` ids: `len` plus the bank entries not in the batch.
///
/// # Safety
/// `bank` must be a live handle; `ids` must point to `len` NUL-terminated
/// strings; `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rc_bank_assembled_len(
    bank: *const RcBank,
    ids: *const *const c_char,
    len: usize,
    out_len: *mut usize,
) -> RcStatus {
    let Some(bank) = bank.as_ref() else {
        return RcStatus::NullPointer;
    };
    if out_len.is_null() {
        return RcStatus::NullPointer;
    }
    let ids = match ids_in(ids, len) {
        Ok(ids) => ids,
        Err(status) => return status,
    };
    let (context, _) = bank.inner.context_excluding(&ids);
    *out_len = len + context.len();
    RcStatus::Ok
}

/// Monotonicity loss of the current batch assembled with the bank: bank
/// entries join as gradient-free constants, and `out_grad` (length `len`,
/// may be NULL) receives the gradient for the batch entries only. The bank
/// itself is not modified; call [`rc_bank_update`] afterwards to record
/// the batch.
///
/// # Safety
/// `ids` must point to `len` NUL-terminated strings; `preds` and `mos` to
/// `len` readable doubles; `out_grad`, when non-NULL, to `len` writable
/// doubles; `bank` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_bank_mono_loss(
    bank: *const RcBank,
    ids: *const *const c_char,
    preds: *const f64,
    mos: *const f64,
    len: usize,
    k: f64,
    eps: f64,
    out_loss: *mut f64,
    out_grad: *mut f64,
    out_degenerate: *mut bool,
) -> RcStatus {
    let Some(bank) = bank.as_ref() else {
        return RcStatus::NullPointer;
    };
    let (Some(preds), Some(mos)) = (slice_in(preds, len), slice_in(mos, len)) else {
        return RcStatus::NullPointer;
    };
    let ids = match ids_in(ids, len) {
        Ok(ids) => ids,
        Err(status) => return status,
    };
    let cfg = match config(k, eps) {
        Ok(cfg) => cfg,
        Err(status) => return status,
    };
    let (tagged, union_mos) = match bank.inner.assemble(&ids, preds, mos) {
        Ok(pair) => pair,
        Err(e) => return (&e).into(),
    };
    match mono_loss(&tagged, &union_mos, &cfg) {
        Ok(result) => {
            if !out_grad.is_null() {
                std::slice::from_raw_parts_mut(out_grad, len).copy_from_slice(&result.grad[..len]);
            }
            if !out_degenerate.is_null() {
                *out_degenerate = result.degenerate;
            }
            write_scalar(out_loss, result.loss)
        }
        Err(e) => (&e).into(),
    }
}

/// Saves the bank to `path` in the line-oriented text format.
///
/// # Safety
/// `bank` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rc_bank_save(bank: *const RcBank, path: *const c_char) -> RcStatus {
    let Some(bank) = bank.as_ref() else {
        return RcStatus::NullPointer;
    };
    if path.is_null() {
        return RcStatus::NullPointer;
    }
    let Ok(path) = CStr::from_ptr(path).to_str() else {
        return RcStatus::InvalidUtf8;
    };
    match bank.inner.save(path) {
        Ok(()) => RcStatus::Ok,
        Err(e) => (&e).into(),
    }
}

/// Loads a bank saved by [`rc_bank_save`]. On success writes a fresh
/// handle to `out_bank`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out_bank` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rc_bank_load(
    path: *const c_char,
    retention_epochs: u64,
    out_bank: *mut *mut RcBank,
) -> RcStatus {
    if path.is_null() || out_bank.is_null() {
        return RcStatus::NullPointer;
    }
    let Ok(path) = CStr::from_ptr(path).to_str() else {
        return RcStatus::InvalidUtf8;
    };
    match MemoryBank::load(path, retention_epochs) {
        Ok(inner) => {
            *out_bank = Box::into_raw(Box::new(RcBank { inner }));
            RcStatus::Ok
        }
        Err(e) => (&e).into(),
    }
}
