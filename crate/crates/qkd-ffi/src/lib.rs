//! C interface to the protocol analysis toolkit.
//!
//! Conventions, which every function below follows:
//!
//! * Every entry point returns a [`QkdStatus`]; results land in `out`
//!   pointers, written only on [`QkdStatus::Ok`].
//! * Null `out` or handle pointers yield [`QkdStatus::NullPointer`].
//!   Pointers documented as optional may be null to skip that output.
//! * Channel handles come from `qkd_channel_new` or a preset constructor
//!   and must be released with `qkd_channel_free` exactly once.
//! * No function stores the pointers it is given; everything is copied.
//!
//! The matching header `include/qkd.h` is regenerated on every build.

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qkd_core::decoy::{self, ChannelParams, DecoyProtocol, RateModel, RateReport};
use qkd_core::distill::{self, StepSequence};
use qkd_core::entropy::h2;
use qkd_core::sarg::one_way_threshold;
use qkd_core::{attack, Error, Protocol};

/// Outcome of a call. Everything except `Ok` leaves the outputs untouched.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QkdStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument was outside its mathematical domain.
    Domain = 2,
    /// The computation degenerated (no conclusive events to condition on).
    Degenerate = 3,
    /// Every distance is interceptable for these parameters.
    NoSecureRegion = 4,
    /// A caller-provided buffer was too small for the result.
    BufferTooSmall = 5,
    /// Internal failure; a bug in this library rather than in the call.
    Internal = 6,
}

/// Sifting and source model for threshold queries.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QkdProtocol {
    Bb84 = 0,
    /// Two-state announcement, single-photon signals.
    Sarg1 = 1,
    /// Two-state announcement, two-photon signals.
    Sarg2 = 2,
}

/// Source/sifting scheme of a weak-coherent implementation.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QkdDecoyProtocol {
    Bb84 = 0,
    Sarg04 = 1,
}

/// Which privacy analysis prices the multi-photon pulses.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QkdRateModel {
    Decoy = 0,
    DecoyOnePhoton = 1,
    Gllp = 2,
}

/// Opaque fiber/receiver parameter set.
pub struct QkdChannel {
    inner: ChannelParams,
}

/// One rate evaluation. Fields that do not apply to the protocol or
/// model at hand are zero.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QkdRateReport {
    pub mu: f64,
    pub distance_km: f64,
    pub q_mu: f64,
    pub e_mu: f64,
    pub q1: f64,
    pub e1: f64,
    pub q2: f64,
    pub e2: f64,
    pub ep1: f64,
    pub ep2: f64,
    /// Key per pulse before flooring at zero; negative means no key.
    pub rate_raw: f64,
    pub rate: f64,
}

impl From<RateReport> for QkdRateReport {
    fn from(r: RateReport) -> QkdRateReport {
        QkdRateReport {
            mu: r.mu,
            distance_km: r.distance_km,
            q_mu: r.q_mu,
            e_mu: r.e_mu,
            q1: r.q1,
            e1: r.e1,
            q2: r.q2,
            e2: r.e2,
            ep1: r.ep1,
            ep2: r.ep2,
            rate_raw: r.rate_raw,
            rate: r.rate,
        }
    }
}

fn status_of(err: &Error) -> QkdStatus {
    match err {
        Error::Domain(_) => QkdStatus::Domain,
        Error::Degenerate(_) => QkdStatus::Degenerate,
        Error::NoSecureRegion(_) => QkdStatus::NoSecureRegion,
    }
}

fn protocol_of(p: QkdProtocol) -> Protocol {
    match p {
        QkdProtocol::Bb84 => Protocol::Bb84,
        QkdProtocol::Sarg1 => Protocol::Sarg1,
        QkdProtocol::Sarg2 => Protocol::Sarg2,
    }
}

fn decoy_protocol_of(p: QkdDecoyProtocol) -> DecoyProtocol {
    match p {
        QkdDecoyProtocol::Bb84 => DecoyProtocol::Bb84,
        QkdDecoyProtocol::Sarg04 => DecoyProtocol::Sarg04,
    }
}

fn model_of(m: QkdRateModel) -> RateModel {
    match m {
        QkdRateModel::Decoy => RateModel::Decoy,
        QkdRateModel::DecoyOnePhoton => RateModel::DecoyOnePhoton,
        QkdRateModel::Gllp => RateModel::Gllp,
    }
}

/// Panics must not unwind into C callers; they become `Internal`.
fn guarded(f: impl FnOnce() -> QkdStatus) -> QkdStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(QkdStatus::Internal)
}

/// Writes a `Result` through an out pointer, mapping errors to statuses.
fn write_result<T>(out: *mut T, r: Result<T, Error>) -> QkdStatus {
    match r {
        Ok(v) => {
            unsafe { out.write(v) };
            QkdStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Static description of a status code, always NUL-terminated ASCII.
#[no_mangle]
pub extern "C" fn qkd_status_message(status: QkdStatus) -> *const c_char {
    let text: &'static str = match status {
        QkdStatus::Ok => "ok\0",
        QkdStatus::NullPointer => "required pointer was null\0",
        QkdStatus::Domain => "argument outside its domain\0",
        QkdStatus::Degenerate => "computation degenerated\0",
        QkdStatus::NoSecureRegion => "no secure region exists\0",
        QkdStatus::BufferTooSmall => "buffer too small\0",
        QkdStatus::Internal => "internal error\0",
    };
    text.as_ptr().cast()
}

/// New channel handle from explicit parameters: fiber loss in dB/km,
/// receiver transmittance, detector error rate, dark count probability,
/// and error-correction inefficiency (at least 1).
#[no_mangle]
pub extern "C" fn qkd_channel_new(
    alpha: f64,
    eta_bob: f64,
    e_detector: f64,
    p_dark: f64,
    f_ec: f64,
    out: *mut *mut QkdChannel,
) -> QkdStatus {
    if out.is_null() {
        return QkdStatus::NullPointer;
    }
    guarded(|| match ChannelParams::new(alpha, eta_bob, e_detector, p_dark, f_ec) {
        Ok(inner) => {
            let handle = Box::into_raw(Box::new(QkdChannel { inner }));
            unsafe { out.write(handle) };
            QkdStatus::Ok
        }
        Err(e) => status_of(&e),
    })
}

/// The long-haul fiber preset (0.21 dB/km, 4.5% receiver, 3.3% detector
/// error, 1.7e-6 dark counts, f = 1.22).
#[no_mangle]
pub extern "C" fn qkd_channel_gys(out: *mut *mut QkdChannel) -> QkdStatus {
    let p = ChannelParams::gys();
    qkd_channel_new(p.alpha, p.eta_bob, p.e_detector, p.p_dark, p.f_ec, out)
}

/// The clean-detector preset (0.25 dB/km, 10% receiver, no misalignment,
/// 1e-5 dark counts, ideal correction).
#[no_mangle]
pub extern "C" fn qkd_channel_branciard(out: *mut *mut QkdChannel) -> QkdStatus {
    let p = ChannelParams::branciard();
    qkd_channel_new(p.alpha, p.eta_bob, p.e_detector, p.p_dark, p.f_ec, out)
}

/// Releases a channel handle. Null is accepted and ignored.
#[no_mangle]
pub extern "C" fn qkd_channel_free(channel: *mut QkdChannel) {
    if !channel.is_null() {
        drop(unsafe { Box::from_raw(channel) });
    }
}

fn channel_ref<'a>(channel: *const QkdChannel) -> Option<&'a ChannelParams> {
    unsafe { channel.as_ref() }.map(|c| &c.inner)
}

/// Binary entropy of `x` in [0, 1], in bits.
#[no_mangle]
pub extern "C" fn qkd_h2(x: f64, out: *mut f64) -> QkdStatus {
    if out.is_null() {
        return QkdStatus::NullPointer;
    }
    guarded(|| write_result(out, h2(x)))
}

/// Tolerable bit error rate with one-way postprocessing only.
#[no_mangle]
pub extern "C" fn qkd_one_way_threshold(protocol: QkdProtocol, out: *mut f64) -> QkdStatus {
    if out.is_null() {
        return QkdStatus::NullPointer;
    }
    guarded(|| write_result(out, one_way_threshold(protocol_of(protocol))))
}

/// Tolerable bit error rate after the two-way step sequence in
/// `sequence`: characters 'B' and 'P', or "-" for the empty sequence.
#[no_mangle]
pub extern "C" fn qkd_tolerable_ber(
    sequence: *const c_char,
    protocol: QkdProtocol,
    out: *mut f64,
) -> QkdStatus {
    if sequence.is_null() || out.is_null() {
        return QkdStatus::NullPointer;
    }
    let text = match unsafe { CStr::from_ptr(sequence) }.to_str() {
        Ok(t) => t,
        Err(_) => return QkdStatus::Domain,
    };
    let seq: StepSequence = match text.parse() {
        Ok(s) => s,
        Err(_) => return QkdStatus::Domain,
    };
    guarded(|| write_result(out, distill::tolerable_ber(&seq, protocol_of(protocol))))
}

/// Best step sequence up to `max_steps` long and its tolerable error
/// rate. The sequence is written NUL-terminated into `sequence_buf`
/// (capacity `buf_len`); `max_steps + 1` bytes always suffice.
#[no_mangle]
pub extern "C" fn qkd_search_best_sequence(
    max_steps: u32,
    protocol: QkdProtocol,
    sequence_buf: *mut c_char,
    buf_len: usize,
    out_threshold: *mut f64,
) -> QkdStatus {
    if sequence_buf.is_null() || out_threshold.is_null() {
        return QkdStatus::NullPointer;
    }
    guarded(|| {
        let (seq, threshold) =
            match distill::search_best_sequence(max_steps as usize, protocol_of(protocol)) {
                Ok(pair) => pair,
                Err(e) => return status_of(&e),
            };
        let text = seq.to_string();
        if buf_len < text.len() + 1 {
            return QkdStatus::BufferTooSmall;
        }
        unsafe {
            std::ptr::copy_nonoverlapping(text.as_ptr(), sequence_buf.cast(), text.len());
            sequence_buf.add(text.len()).write(0);
            out_threshold.write(threshold);
        }
        QkdStatus::Ok
    })
}

/// Minimum error rate an intercept-resend attack can induce on `photons`
/// photon signals (1 or 2), searched on a `grid` x `grid` angle grid
/// (at least 64) with local refinement. The worst resent state's Bloch
/// angles are written to the optional `out_theta_y` / `out_theta_z`.
#[no_mangle]
pub extern "C" fn qkd_min_ber_over_states(
    photons: u32,
    grid: u32,
    out_ber: *mut f64,
    out_theta_y: *mut f64,
    out_theta_z: *mut f64,
) -> QkdStatus {
    if out_ber.is_null() {
        return QkdStatus::NullPointer;
    }
    let nu = match u8::try_from(photons) {
        Ok(n) => n,
        Err(_) => return QkdStatus::Domain,
    };
    guarded(|| match attack::min_ber_over_states(nu, grid as usize) {
        Ok((ber, ty, tz)) => {
            unsafe {
                out_ber.write(ber);
                if !out_theta_y.is_null() {
                    out_theta_y.write(ty);
                }
                if !out_theta_z.is_null() {
                    out_theta_z.write(tz);
                }
            }
            QkdStatus::Ok
        }
        Err(e) => status_of(&e),
    })
}

/// Key rate at fixed mean photon number `mu` and distance `l_km`.
#[no_mangle]
pub extern "C" fn qkd_key_rate(
    model: QkdRateModel,
    protocol: QkdDecoyProtocol,
    channel: *const QkdChannel,
    mu: f64,
    l_km: f64,
    out: *mut QkdRateReport,
) -> QkdStatus {
    let Some(params) = channel_ref(channel) else {
        return QkdStatus::NullPointer;
    };
    if out.is_null() {
        return QkdStatus::NullPointer;
    }
    guarded(|| {
        write_result(
            out,
            decoy::key_rate(model_of(model), decoy_protocol_of(protocol), params, mu, l_km)
                .map(QkdRateReport::from),
        )
    })
}

/// Mean photon number maximizing the raw rate at `l_km`, and optionally
/// the full report at that optimum.
#[no_mangle]
pub extern "C" fn qkd_optimal_mu(
    model: QkdRateModel,
    protocol: QkdDecoyProtocol,
    channel: *const QkdChannel,
    l_km: f64,
    out_mu: *mut f64,
    out_report: *mut QkdRateReport,
) -> QkdStatus {
    let Some(params) = channel_ref(channel) else {
        return QkdStatus::NullPointer;
    };
    if out_mu.is_null() {
        return QkdStatus::NullPointer;
    }
    guarded(|| {
        match decoy::optimal_mu(model_of(model), decoy_protocol_of(protocol), params, l_km) {
            Ok((mu, report)) => {
                unsafe {
                    out_mu.write(mu);
                    if !out_report.is_null() {
                        out_report.write(report.into());
                    }
                }
                QkdStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Longest distance with a positive optimized rate, to 0.01 km.
/// Infinity when the rate never turns negative.
#[no_mangle]
pub extern "C" fn qkd_secure_distance(
    model: QkdRateModel,
    protocol: QkdDecoyProtocol,
    channel: *const QkdChannel,
    out_km: *mut f64,
) -> QkdStatus {
    let Some(params) = channel_ref(channel) else {
        return QkdStatus::NullPointer;
    };
    if out_km.is_null() {
        return QkdStatus::NullPointer;
    }
    guarded(|| {
        write_result(
            out_km,
            decoy::secure_distance(model_of(model), decoy_protocol_of(protocol), params),
        )
    })
}

/// Distances beyond which no analysis can certify key. The two-photon
/// ceiling applies to the four-state sifting only and is written as NaN
/// for the standard one; the overall ceiling is the single-photon one.
#[no_mangle]
pub extern "C" fn qkd_upper_bound_distance(
    protocol: QkdDecoyProtocol,
    channel: *const QkdChannel,
    out_single_photon_km: *mut f64,
    out_two_photon_km: *mut f64,
    out_overall_km: *mut f64,
) -> QkdStatus {
    let Some(params) = channel_ref(channel) else {
        return QkdStatus::NullPointer;
    };
    if out_single_photon_km.is_null() || out_overall_km.is_null() {
        return QkdStatus::NullPointer;
    }
    guarded(|| {
        match decoy::upper_bound_distance(decoy_protocol_of(protocol), params) {
            Ok(bounds) => {
                unsafe {
                    out_single_photon_km.write(bounds.single_photon_km);
                    if !out_two_photon_km.is_null() {
                        out_two_photon_km.write(bounds.two_photon_km.unwrap_or(f64::NAN));
                    }
                    out_overall_km.write(bounds.overall_km);
                }
                QkdStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Sifted error rate a depolarizing channel of strength `p` produces.
#[no_mangle]
pub extern "C" fn qkd_depolarizing_ber(
    protocol: QkdProtocol,
    p: f64,
    out: *mut f64,
) -> QkdStatus {
    if out.is_null() {
        return QkdStatus::NullPointer;
    }
    guarded(|| write_result(out, distill::depolarizing_ber(protocol_of(protocol), p)))
}

/// Depolarizing strength that produces a given sifted error rate.
#[no_mangle]
pub extern "C" fn qkd_depolarizing_prob(
    protocol: QkdProtocol,
    e_b: f64,
    out: *mut f64,
) -> QkdStatus {
    if out.is_null() {
        return QkdStatus::NullPointer;
    }
    guarded(|| write_result(out, distill::depolarizing_prob(protocol_of(protocol), e_b)))
}
