//! C interface to the simulator.
//!
//! Every function returns an [`MpqkdStatus`]; on failure the message is
//! available from [`mpqkd_last_error`] on the same thread. Objects are
//! opaque handles created by `*_new`/`mpqkd_run_session` and released with
//! the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mpqkd::backend::PauliChannel;
use mpqkd::codes::catalog;
use mpqkd::gf2::BitString;
use mpqkd::harness::parse_config;
use mpqkd::harness::ExperimentKind;
use mpqkd::protocols::{run_session, Adversary, Backend, LinkSet, ProtocolConfig, ProtocolKind, SessionResult};
use mpqkd::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MpqkdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    BackendLimit = 4,
    DecodeFailure = 5,
    Internal = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MpqkdProtocol {
    Entangled = 0,
    Css = 1,
    PrepareMeasure = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MpqkdBackend {
    Auto = 0,
    Dense = 1,
    Tableau = 2,
    Classical = 3,
}

/// Session parameters.
pub struct MpqkdConfig {
    inner: ProtocolConfig,
    kind: Option<ProtocolKind>,
}

/// Outcome of one session.
pub struct MpqkdSession {
    inner: SessionResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> MpqkdStatus {
    match e {
        Error::Parse(_) | Error::Config { .. } => MpqkdStatus::ParseError,
        Error::BackendLimit { .. } => MpqkdStatus::BackendLimit,
        Error::DecodeFailure { .. } => MpqkdStatus::DecodeFailure,
        Error::Divergence(_) | Error::Io(_) => MpqkdStatus::Internal,
        _ => MpqkdStatus::InvalidArgument,
    }
}

/// Runs `f`, recording errors and panics for [`mpqkd_last_error`].
fn guard<F: FnOnce() -> Result<(), (MpqkdStatus, String)>>(f: F) -> MpqkdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MpqkdStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            MpqkdStatus::Panic
        }
    }
}

fn fail(e: Error) -> (MpqkdStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (MpqkdStatus, String) {
    (MpqkdStatus::NullPointer, format!("{what} is NULL"))
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mpqkd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates a configuration with default settings.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn mpqkd_config_new(parties: usize, n: usize, out: *mut *mut MpqkdConfig) -> MpqkdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = ProtocolConfig::new(parties, n);
        inner.validate().map_err(fail)?;
        *out = Box::into_raw(Box::new(MpqkdConfig { inner, kind: None }));
        Ok(())
    })
}

/// Parses an experiment file in `key = value` form. The protocol named in
/// the text becomes the default for [`mpqkd_run_config`].
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mpqkd_config_parse(text: *const c_char, out: *mut *mut MpqkdConfig) -> MpqkdStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let s = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| (MpqkdStatus::ParseError, "config text is not UTF-8".to_string()))?;
        let spec = parse_config(s).map_err(fail)?;
        let kind = match spec.kind {
            ExperimentKind::Protocol(k) => Some(k),
            _ => None,
        };
        *out = Box::into_raw(Box::new(MpqkdConfig {
            inner: spec.config,
            kind,
        }));
        Ok(())
    })
}

/// # Safety
/// `config` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mpqkd_config_free(config: *mut MpqkdConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

unsafe fn with_config<F>(config: *mut MpqkdConfig, f: F) -> MpqkdStatus
where
    F: FnOnce(&mut ProtocolConfig) -> Result<(), (MpqkdStatus, String)>,
{
    guard(|| {
        let cfg = config.as_mut().ok_or_else(|| null("config"))?;
        let mut updated = cfg.inner.clone();
        f(&mut updated)?;
        updated.validate().map_err(fail)?;
        cfg.inner = updated;
        Ok(())
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mpqkd_config_set_seed(config: *mut MpqkdConfig, seed: u64) -> MpqkdStatus {
    with_config(config, |c| {
        c.seed = seed;
        Ok(())
    })
}

/// Confidence factor `c ≥ 0` of the error threshold.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mpqkd_config_set_confidence(config: *mut MpqkdConfig, c: f64) -> MpqkdStatus {
    with_config(config, |cfg| {
        cfg.c = c;
        Ok(())
    })
}

/// Independent Pauli noise on every transmitted qubit.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mpqkd_config_set_channel(config: *mut MpqkdConfig, px: f64, py: f64, pz: f64) -> MpqkdStatus {
    with_config(config, |c| {
        c.channel = PauliChannel { p_x: px, p_y: py, p_z: pz };
        Ok(())
    })
}

/// Intercept-resend attack on receiver `link`, or on every link when 0.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mpqkd_config_set_intercept_resend(config: *mut MpqkdConfig, link: usize) -> MpqkdStatus {
    with_config(config, |c| {
        let links = if link == 0 { LinkSet::All } else { LinkSet::Only(vec![link]) };
        c.adversary = Adversary::InterceptResend { links };
        Ok(())
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mpqkd_config_set_backend(config: *mut MpqkdConfig, backend: MpqkdBackend) -> MpqkdStatus {
    with_config(config, |c| {
        c.backend = match backend {
            MpqkdBackend::Auto => Backend::Auto,
            MpqkdBackend::Dense => Backend::Dense,
            MpqkdBackend::Tableau => Backend::Tableau,
            MpqkdBackend::Classical => Backend::Classical,
        };
        Ok(())
    })
}

fn protocol_kind(p: MpqkdProtocol) -> ProtocolKind {
    match p {
        MpqkdProtocol::Entangled => ProtocolKind::Entangled,
        MpqkdProtocol::Css => ProtocolKind::Css,
        MpqkdProtocol::PrepareMeasure => ProtocolKind::PrepareMeasure,
    }
}

/// Runs one session of `protocol`.
///
/// # Safety
/// `config` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mpqkd_run_session(
    config: *const MpqkdConfig,
    protocol: MpqkdProtocol,
    out: *mut *mut MpqkdSession,
) -> MpqkdStatus {
    run_with(config, Some(protocol_kind(protocol)), out)
}

/// Runs one session of the protocol named when the config was parsed.
///
/// # Safety
/// `config` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mpqkd_run_config(config: *const MpqkdConfig, out: *mut *mut MpqkdSession) -> MpqkdStatus {
    run_with(config, None, out)
}

unsafe fn run_with(config: *const MpqkdConfig, kind: Option<ProtocolKind>, out: *mut *mut MpqkdSession) -> MpqkdStatus {
    guard(|| {
        let cfg = config.as_ref().ok_or_else(|| null("config"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let kind = kind.or(cfg.kind).ok_or_else(|| {
            (
                MpqkdStatus::InvalidArgument,
                "config does not name a key-distribution protocol".to_string(),
            )
        })?;
        let inner = run_session(kind, &cfg.inner).map_err(fail)?;
        *out = Box::into_raw(Box::new(MpqkdSession { inner }));
        Ok(())
    })
}

/// # Safety
/// `session` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mpqkd_session_free(session: *mut MpqkdSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// 1 if the session aborted, 0 if not, -1 for a NULL handle.
///
/// # Safety
/// `session` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mpqkd_session_aborted(session: *const MpqkdSession) -> i32 {
    session.as_ref().map_or(-1, |s| s.inner.aborted() as i32)
}

/// 1 if every party holds the same key, 0 if not or aborted, -1 for NULL.
///
/// # Safety
/// `session` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mpqkd_session_keys_equal(session: *const MpqkdSession) -> i32 {
    session.as_ref().map_or(-1, |s| s.inner.keys_equal() as i32)
}

/// Key length in bits; 0 when aborted or NULL.
///
/// # Safety
/// `session` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mpqkd_session_key_len(session: *const MpqkdSession) -> usize {
    session.as_ref().map_or(0, |s| s.inner.key_len())
}

/// Observed check-bit error rate; NaN for NULL.
///
/// # Safety
/// `session` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mpqkd_session_qber(session: *const MpqkdSession) -> f64 {
    session.as_ref().map_or(f64::NAN, |s| s.inner.qber)
}

/// Error threshold `t` the parties derived.
///
/// # Safety
/// `session` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mpqkd_session_threshold(session: *const MpqkdSession) -> usize {
    session.as_ref().map_or(0, |s| s.inner.t)
}

/// Static name of the abort reason, or NULL when the session finished.
///
/// # Safety
/// `session` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mpqkd_session_abort_reason(session: *const MpqkdSession) -> *const c_char {
    let Some(s) = session.as_ref() else {
        return ptr::null();
    };
    match s.inner.abort.as_ref().map(|a| a.as_str()) {
        Some("threshold") => c"threshold".as_ptr(),
        Some("no_code") => c"no_code".as_ptr(),
        Some("insufficient_sift") => c"insufficient_sift".as_ptr(),
        Some(_) => c"decode_failure".as_ptr(),
        None => ptr::null(),
    }
}

/// Copies party `party`'s key as one byte (0 or 1) per bit into `buf`.
///
/// # Safety
/// `session` must be a live handle and `buf` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn mpqkd_session_key(
    session: *const MpqkdSession,
    party: usize,
    buf: *mut u8,
    len: usize,
) -> MpqkdStatus {
    guard(|| {
        let s = session.as_ref().ok_or_else(|| null("session"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let keys = s.inner.keys.as_ref().ok_or_else(|| {
            (MpqkdStatus::InvalidArgument, "session aborted; no key".to_string())
        })?;
        let key = keys
            .get(party)
            .ok_or_else(|| (MpqkdStatus::InvalidArgument, format!("no party {party}")))?;
        if len < key.len() {
            return Err((
                MpqkdStatus::InvalidArgument,
                format!("buffer holds {len} bytes, key has {}", key.len()),
            ));
        }
        let out = std::slice::from_raw_parts_mut(buf, key.len());
        for (o, b) in out.iter_mut().zip(key.iter()) {
            *o = b as u8;
        }
        Ok(())
    })
}

/// Hamming `[7,4,3]` syndrome of a 7-byte word of 0/1 values, written as
/// three 0/1 bytes.
///
/// # Safety
/// `word` must point to 7 readable bytes and `syndrome` to 3 writable ones.
#[no_mangle]
pub unsafe extern "C" fn mpqkd_hamming74_syndrome(word: *const u8, syndrome: *mut u8) -> MpqkdStatus {
    guard(|| {
        if word.is_null() {
            return Err(null("word"));
        }
        if syndrome.is_null() {
            return Err(null("syndrome"));
        }
        let w = std::slice::from_raw_parts(word, 7);
        if w.iter().any(|&b| b > 1) {
            return Err((MpqkdStatus::InvalidArgument, "word bytes must be 0 or 1".into()));
        }
        let s = catalog::hamming74()
            .syndrome(&BitString::from_bits(w.iter().map(|&b| b == 1)))
            .map_err(fail)?;
        let out = std::slice::from_raw_parts_mut(syndrome, 3);
        for (o, b) in out.iter_mut().zip(s.iter()) {
            *o = b as u8;
        }
        Ok(())
    })
}
