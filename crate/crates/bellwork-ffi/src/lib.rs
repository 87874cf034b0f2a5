//! C ABI for the bellwork toolkit.
//!
//! Objects cross the boundary as opaque handles (`BwGame`, `BwBehavior`,
//! `BwWorkRecord`) created and freed by this library; every fallible call
//! returns a `BwStatus` and writes results through out-pointers. Strings
//! returned by the library are NUL-terminated UTF-8 owned by Rust and must
//! be released with `bw_string_free`.
//!
//! All functions taking pointers are `unsafe`: the caller must pass either
//! NULL (reported as `BW_STATUS_NULL_POINTER`) or pointers that are valid
//! for the access implied by their type — handles previously returned by
//! this library and not yet freed, NUL-terminated strings, and writable
//! out-locations. Panics are caught at the boundary and reported as
//! `BW_STATUS_INTERNAL_PANIC`.
//!
//! The generated header lives at `include/bellwork.h`.

#![warn(unsafe_op_in_unsafe_fn)]

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use bellwork::behaviors::{
    chained_quantum_behavior, chsh_value, local_zeros, noisy_pr, pr_box, success_probability,
    tsirelson_behavior, Behavior,
};
use bellwork::certifier::{
    certify, clopper_pearson, hoeffding_epsilon, symmetric_flip_threshold, wilson, Method,
    ReadoutModel, Sided,
};
use bellwork::error::Error;
use bellwork::games::{
    local_value, make_chained, make_chsh, ns_value, quantum_value_closed, quantum_value_lower,
    GameValues, XorGame,
};
use bellwork::ledger::binary_entropy;
use bellwork::transducer::{exact_work_mean, simulate, Variant, WorkRecord};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SizeLimit = 3,
    MissingParameter = 4,
    InconsistentMarginal = 5,
    DegenerateCalibration = 6,
    ParseError = 7,
    IoError = 8,
    InvalidUtf8 = 9,
    /// The requested value is not defined for this input (for example a
    /// closed-form quantum value of an untagged game).
    NotAvailable = 10,
    InternalPanic = 11,
}

impl From<&Error> for BwStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParameter(_) => BwStatus::InvalidArgument,
            Error::SizeLimit(_) => BwStatus::SizeLimit,
            Error::MissingParameter(_) => BwStatus::MissingParameter,
            Error::InconsistentMarginal(_) => BwStatus::InconsistentMarginal,
            Error::DegenerateCalibration(_) => BwStatus::DegenerateCalibration,
            Error::Parse(_) => BwStatus::ParseError,
            Error::Io(_) => BwStatus::IoError,
        }
    }
}

/// Confidence-bound constructions selectable through the C API.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BwMethod {
    Hoeffding = 0,
    Azuma = 1,
    ClopperPearson = 2,
    Wilson = 3,
}

impl From<BwMethod> for Method {
    fn from(m: BwMethod) -> Self {
        match m {
            BwMethod::Hoeffding => Method::Hoeffding,
            BwMethod::Azuma => Method::Azuma,
            BwMethod::ClopperPearson => Method::ClopperPearson,
            BwMethod::Wilson => Method::Wilson,
        }
    }
}

/// Opaque XOR game handle.
pub struct BwGame(XorGame);
/// Opaque behaviour handle.
pub struct BwBehavior(Behavior);
/// Opaque work-record handle.
pub struct BwWorkRecord(WorkRecord);

fn guarded(body: impl FnOnce() -> BwStatus) -> BwStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => BwStatus::InternalPanic,
    }
}

unsafe fn cstr_arg<'a>(s: *const c_char) -> Result<&'a str, BwStatus> {
    if s.is_null() {
        return Err(BwStatus::NullPointer);
    }
    unsafe { CStr::from_ptr(s) }
        .to_str()
        .map_err(|_| BwStatus::InvalidUtf8)
}

fn string_out(text: String, out: *mut *mut c_char) -> BwStatus {
    if out.is_null() {
        return BwStatus::NullPointer;
    }
    match CString::new(text) {
        Ok(c) => {
            unsafe { out.write(c.into_raw()) };
            BwStatus::Ok
        }
        Err(_) => BwStatus::InvalidUtf8,
    }
}

macro_rules! deref {
    ($ptr:expr) => {
        match unsafe { $ptr.as_ref() } {
            Some(r) => &r.0,
            None => return BwStatus::NullPointer,
        }
    };
}

macro_rules! out_write {
    ($out:expr, $value:expr) => {{
        if $out.is_null() {
            return BwStatus::NullPointer;
        }
        unsafe { $out.write($value) };
    }};
}

// ---------------------------------------------------------------------------
// Games
// ---------------------------------------------------------------------------

/// Create the CHSH game.
///
/// # Safety
/// `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bw_game_chsh(out: *mut *mut BwGame) -> BwStatus {
    guarded(|| {
        out_write!(out, Box::into_raw(Box::new(BwGame(make_chsh()))));
        BwStatus::Ok
    })
}

/// Create the N-cycle chained game (N >= 2).
///
/// # Safety
/// `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bw_game_chained(n: u32, out: *mut *mut BwGame) -> BwStatus {
    guarded(|| match make_chained(n) {
        Ok(game) => {
            out_write!(out, Box::into_raw(Box::new(BwGame(game))));
            BwStatus::Ok
        }
        Err(e) => (&e).into(),
    })
}

/// Parse a game from its JSON schema.
///
/// # Safety
/// `json` must be NULL or a valid NUL-terminated string; `out` must be
/// NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bw_game_from_json(json: *const c_char, out: *mut *mut BwGame) -> BwStatus {
    guarded(|| {
        let text = match unsafe { cstr_arg(json) } {
            Ok(t) => t,
            Err(s) => return s,
        };
        match XorGame::from_json(text) {
            Ok(game) => {
                out_write!(out, Box::into_raw(Box::new(BwGame(game))));
                BwStatus::Ok
            }
            Err(e) => (&e).into(),
        }
    })
}

/// Release a game handle. NULL is a no-op.
///
/// # Safety
/// `game` must be NULL or a handle returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bw_game_free(game: *mut BwGame) {
    if !game.is_null() {
        drop(unsafe { Box::from_raw(game) });
    }
}

/// The game's name tag as a new string (free with `bw_string_free`).
///
/// # Safety
/// `game` must be NULL or a live handle; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bw_game_name(game: *const BwGame, out: *mut *mut c_char) -> BwStatus {
    guarded(|| {
        let game = deref!(game);
        string_out(game.name().to_string(), out)
    })
}

/// Exact local value by deterministic-strategy enumeration.
///
/// # Safety
/// `game` must be NULL or a live handle; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bw_game_local_value(game: *const BwGame, out: *mut f64) -> BwStatus {
    guarded(|| {
        let game = deref!(game);
        match local_value(game) {
            Ok(v) => {
                out_write!(out, v);
                BwStatus::Ok
            }
            Err(e) => (&e).into(),
        }
    })
}

/// Nonsignalling value (always 1 for XOR games).
///
/// # Safety
/// `game` must be NULL or a live handle; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bw_game_ns_value(game: *const BwGame, out: *mut f64) -> BwStatus {
    guarded(|| {
        let game = deref!(game);
        out_write!(out, ns_value(game));
        BwStatus::Ok
    })
}

/// Closed-form quantum value for CHSH / chained games;
/// `BW_STATUS_NOT_AVAILABLE` for untagged games.
///
/// # Safety
/// `game` must be NULL or a live handle; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bw_game_quantum_closed(game: *const BwGame, out: *mut f64) -> BwStatus {
    guarded(|| {
        let game = deref!(game);
        match quantum_value_closed(game) {
            Some(v) => {
                out_write!(out, v);
                BwStatus::Ok
            }
            None => BwStatus::NotAvailable,
        }
    })
}

/// Ascent lower bound on the quantum value. `out_converged` may be NULL.
///
/// # Safety
/// `game` must be NULL or a live handle; `out` and `out_converged` must be
/// NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bw_game_quantum_lower(
    game: *const BwGame,
    restarts: u32,
    tol: f64,
    out: *mut f64,
    out_converged: *mut bool,
) -> BwStatus {
    guarded(|| {
        let game = deref!(game);
        match quantum_value_lower(game, restarts as usize, tol) {
            Ok(bound) => {
                out_write!(out, bound.value);
                if !out_converged.is_null() {
                    unsafe { out_converged.write(bound.converged) };
                }
                BwStatus::Ok
            }
            Err(e) => (&e).into(),
        }
    })
}

// ---------------------------------------------------------------------------
// Behaviours
// ---------------------------------------------------------------------------

fn behavior_out(result: Result<Behavior, Error>, out: *mut *mut BwBehavior) -> BwStatus {
    match result {
        Ok(b) => {
            if out.is_null() {
                return BwStatus::NullPointer;
            }
            unsafe { out.write(Box::into_raw(Box::new(BwBehavior(b)))) };
            BwStatus::Ok
        }
        Err(e) => (&e).into(),
    }
}

/// The PR box on CHSH labels.
///
/// # Safety
/// `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bw_behavior_pr(out: *mut *mut BwBehavior) -> BwStatus {
    guarded(|| behavior_out(Ok(pr_box()), out))
}

/// The Tsirelson-optimal CHSH behaviour.
///
/// # Safety
/// `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bw_behavior_tsirelson(out: *mut *mut BwBehavior) -> BwStatus {
    guarded(|| behavior_out(Ok(tsirelson_behavior()), out))
}

/// The all-zeros deterministic box on the game's question sets.
///
/// # Safety
/// `game` must be NULL or a live handle; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bw_behavior_local_zeros(
    game: *const BwGame,
    out: *mut *mut BwBehavior,
) -> BwStatus {
    guarded(|| {
        let game = deref!(game);
        behavior_out(Ok(local_zeros(game)), out)
    })
}

/// The noisy-PR mixture (1 - eps) PR + eps local.
///
/// # Safety
/// `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bw_behavior_noisy_pr(eps: f64, out: *mut *mut BwBehavior) -> BwStatus {
    guarded(|| behavior_out(noisy_pr(eps), out))
}

/// The quantum-optimal chained behaviour for N >= 2.
///
/// # Safety
/// `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bw_behavior_chained_quantum(
    n: u32,
    out: *mut *mut BwBehavior,
) -> BwStatus {
    guarded(|| behavior_out(chained_quantum_behavior(n), out))
}

/// Parse a behaviour from its JSON schema (full table or correlators).
///
/// # Safety
/// `json` must be NULL or a valid NUL-terminated string; `out` must be
/// NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bw_behavior_from_json(
    json: *const c_char,
    out: *mut *mut BwBehavior,
) -> BwStatus {
    guarded(|| {
        let text = match unsafe { cstr_arg(json) } {
            Ok(t) => t,
            Err(s) => return s,
        };
        behavior_out(Behavior::from_json(text), out)
    })
}

/// Release a behaviour handle. NULL is a no-op.
///
/// # Safety
/// `behavior` must be NULL or a handle returned by this library, not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn bw_behavior_free(behavior: *mut BwBehavior) {
    if !behavior.is_null() {
        drop(unsafe { Box::from_raw(behavior) });
    }
}

/// Success probability of a behaviour on a game.
///
/// # Safety
/// Handles must be NULL or live; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bw_success_probability(
    game: *const BwGame,
    behavior: *const BwBehavior,
    out: *mut f64,
) -> BwStatus {
    guarded(|| {
        let game = deref!(game);
        let behavior = deref!(behavior);
        match success_probability(game, behavior) {
            Ok(p) => {
                out_write!(out, p);
                BwStatus::Ok
            }
            Err(e) => (&e).into(),
        }
    })
}

/// CHSH value S of a CHSH-labeled behaviour.
///
/// # Safety
/// `behavior` must be NULL or a live handle; `out` must be NULL or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn bw_chsh_value(behavior: *const BwBehavior, out: *mut f64) -> BwStatus {
    guarded(|| {
        let behavior = deref!(behavior);
        match chsh_value(behavior) {
            Ok(s) => {
                out_write!(out, s);
                BwStatus::Ok
            }
            Err(e) => (&e).into(),
        }
    })
}

// ---------------------------------------------------------------------------
// Transducer
// ---------------------------------------------------------------------------

/// Exact mean banked work per round, by transcript enumeration.
///
/// # Safety
/// Handles must be NULL or live; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bw_exact_work_mean(
    game: *const BwGame,
    behavior: *const BwBehavior,
    delta: f64,
    out: *mut f64,
) -> BwStatus {
    guarded(|| {
        let game = deref!(game);
        let behavior = deref!(behavior);
        match exact_work_mean(game, behavior, delta) {
            Ok(w) => {
                out_write!(out, w);
                BwStatus::Ok
            }
            Err(e) => (&e).into(),
        }
    })
}

/// Simulate rounds; the record is deterministic in (seed, round index).
/// `reversible` selects the reversible-controller routing (identical work
/// statistics).
///
/// # Safety
/// Handles must be NULL or live; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bw_simulate(
    game: *const BwGame,
    behavior: *const BwBehavior,
    rounds: u64,
    seed: u64,
    reversible: bool,
    delta: f64,
    out: *mut *mut BwWorkRecord,
) -> BwStatus {
    guarded(|| {
        let game = deref!(game);
        let behavior = deref!(behavior);
        let rounds = match usize::try_from(rounds) {
            Ok(r) => r,
            Err(_) => return BwStatus::InvalidArgument,
        };
        let variant = if reversible {
            Variant::Reversible
        } else {
            Variant::Feedforward
        };
        match simulate(game, behavior, rounds, seed, variant, delta) {
            Ok(record) => {
                out_write!(out, Box::into_raw(Box::new(BwWorkRecord(record))));
                BwStatus::Ok
            }
            Err(e) => (&e).into(),
        }
    })
}

/// Release a work-record handle. NULL is a no-op.
///
/// # Safety
/// `record` must be NULL or a handle returned by this library, not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn bw_record_free(record: *mut BwWorkRecord) {
    if !record.is_null() {
        drop(unsafe { Box::from_raw(record) });
    }
}

/// Number of rounds in the record.
///
/// # Safety
/// `record` must be NULL or a live handle; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bw_record_rounds(record: *const BwWorkRecord, out: *mut u64) -> BwStatus {
    guarded(|| {
        let record = deref!(record);
        out_write!(out, record.rounds() as u64);
        BwStatus::Ok
    })
}

/// Number of charged rounds.
///
/// # Safety
/// `record` must be NULL or a live handle; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bw_record_ones(record: *const BwWorkRecord, out: *mut u64) -> BwStatus {
    guarded(|| {
        let record = deref!(record);
        out_write!(out, record.ones() as u64);
        BwStatus::Ok
    })
}

/// Total banked energy, delta per charged round.
///
/// # Safety
/// `record` must be NULL or a live handle; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bw_record_sum_work(
    record: *const BwWorkRecord,
    out: *mut f64,
) -> BwStatus {
    guarded(|| {
        let record = deref!(record);
        out_write!(out, record.sum_work());
        BwStatus::Ok
    })
}

/// Empirical success rate.
///
/// # Safety
/// `record` must be NULL or a live handle; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bw_record_p_hat(record: *const BwWorkRecord, out: *mut f64) -> BwStatus {
    guarded(|| {
        let record = deref!(record);
        out_write!(out, record.p_hat());
        BwStatus::Ok
    })
}

/// The i-th work bit (0 or 1).
///
/// # Safety
/// `record` must be NULL or a live handle; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bw_record_bit(
    record: *const BwWorkRecord,
    index: u64,
    out: *mut u8,
) -> BwStatus {
    guarded(|| {
        let record = deref!(record);
        let index = match usize::try_from(index) {
            Ok(i) if i < record.rounds() => i,
            _ => return BwStatus::InvalidArgument,
        };
        out_write!(out, record.bit(index));
        BwStatus::Ok
    })
}

/// Serialize a record to NDJSON (free with `bw_string_free`).
///
/// # Safety
/// `record` must be NULL or a live handle; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bw_record_to_ndjson(
    record: *const BwWorkRecord,
    out: *mut *mut c_char,
) -> BwStatus {
    guarded(|| {
        let record = deref!(record);
        string_out(record.to_ndjson(), out)
    })
}

/// Parse a record from NDJSON.
///
/// # Safety
/// `text` must be NULL or a valid NUL-terminated string; `out` must be
/// NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bw_record_from_ndjson(
    text: *const c_char,
    out: *mut *mut BwWorkRecord,
) -> BwStatus {
    guarded(|| {
        let text = match unsafe { cstr_arg(text) } {
            Ok(t) => t,
            Err(s) => return s,
        };
        match WorkRecord::from_ndjson(text) {
            Ok(record) => {
                out_write!(out, Box::into_raw(Box::new(BwWorkRecord(record))));
                BwStatus::Ok
            }
            Err(e) => (&e).into(),
        }
    })
}

// ---------------------------------------------------------------------------
// Certification and scalar helpers
// ---------------------------------------------------------------------------

/// Certify a record against a game's thresholds and return the full
/// certificate as a JSON string (free with `bw_string_free`). Negative
/// `eta0_upper` / `eta1_upper` mean "no readout bound".
///
/// # Safety
/// Handles must be NULL or live; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bw_certify_json(
    record: *const BwWorkRecord,
    game: *const BwGame,
    method: BwMethod,
    alpha: f64,
    eta0_upper: f64,
    eta1_upper: f64,
    out: *mut *mut c_char,
) -> BwStatus {
    guarded(|| {
        let record = deref!(record);
        let game = deref!(game);
        let values = match GameValues::compute(game) {
            Ok(v) => v,
            Err(e) => return (&e).into(),
        };
        let model = if eta0_upper >= 0.0 {
            let e1 = (eta1_upper >= 0.0).then_some(eta1_upper);
            match ReadoutModel::conservative(eta0_upper, e1) {
                Ok(m) => Some(m),
                Err(e) => return (&e).into(),
            }
        } else {
            None
        };
        match certify(record, &values, method.into(), alpha, model.as_ref()) {
            Ok(report) => string_out(report.to_json_pretty(), out),
            Err(e) => (&e).into(),
        }
    })
}

/// Binary entropy h2(p) in bits.
///
/// # Safety
/// `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bw_binary_entropy(p: f64, out: *mut f64) -> BwStatus {
    guarded(|| match binary_entropy(p) {
        Ok(h) => {
            out_write!(out, h);
            BwStatus::Ok
        }
        Err(e) => (&e).into(),
    })
}

/// Hoeffding radius sqrt(ln(1/alpha) / (2n)).
///
/// # Safety
/// `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bw_hoeffding_epsilon(n: u64, alpha: f64, out: *mut f64) -> BwStatus {
    guarded(|| match hoeffding_epsilon(n, alpha) {
        Ok(eps) => {
            out_write!(out, eps);
            BwStatus::Ok
        }
        Err(e) => (&e).into(),
    })
}

/// sin^2(pi/8), the largest symmetric work-bit flip rate that keeps an
/// ideal PR signal above the CHSH quantum ceiling.
#[no_mangle]
pub extern "C" fn bw_symmetric_flip_threshold() -> f64 {
    symmetric_flip_threshold()
}

/// Clopper-Pearson interval endpoints.
///
/// # Safety
/// `out_lower` and `out_upper` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bw_clopper_pearson(
    k: u64,
    n: u64,
    alpha: f64,
    two_sided: bool,
    out_lower: *mut f64,
    out_upper: *mut f64,
) -> BwStatus {
    guarded(|| {
        let sided = if two_sided { Sided::Two } else { Sided::One };
        match clopper_pearson(k, n, alpha, sided) {
            Ok(interval) => {
                out_write!(out_lower, interval.lower);
                out_write!(out_upper, interval.upper);
                BwStatus::Ok
            }
            Err(e) => (&e).into(),
        }
    })
}

/// Wilson interval endpoints.
///
/// # Safety
/// `out_lower` and `out_upper` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bw_wilson(
    k: u64,
    n: u64,
    alpha: f64,
    out_lower: *mut f64,
    out_upper: *mut f64,
) -> BwStatus {
    guarded(|| match wilson(k, n, alpha) {
        Ok(interval) => {
            out_write!(out_lower, interval.lower);
            out_write!(out_upper, interval.upper);
            BwStatus::Ok
        }
        Err(e) => (&e).into(),
    })
}

/// Release a string returned by this library. NULL is a no-op.
///
/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
